#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ifxo/dataset.hpp"
#include "ifxo/errors.hpp"
#include "ifxo/fair_round.hpp"
#include "ifxo/format.hpp"
#include "ifxo/lp_model.hpp"
#include "ifxo/lp_solve.hpp"
#include "ifxo/metric.hpp"
#include "ifxo/out_round.hpp"

namespace ifxo {

struct ExperimentConfig {
  std::string dataset_path;
  std::vector<std::string> feature_columns;
  std::vector<std::size_t> k_list;
  std::vector<int> p_list{2};
  std::optional<std::size_t> m;  // default: ceil(0.01 * working size)
  double alpha = 1.0;
  double tau = 0.0;
  std::size_t sample_size = 1000;
  std::uint64_t seed = 0;
  double inject_fraction = 0.01;
  std::string external_outlier_labels;  // optional; bypasses LP detection
  Backend backend = Backend::Auto;
  std::string out_dir = ".";
};

struct StageTimings {
  double prepare = 0.0;  // load + scale + sample + inject
  double metric = 0.0;
  double build = 0.0;
  double solve = 0.0;
  double out_round = 0.0;
  double fair_round = 0.0;
};

struct RunRecord {
  // config echo
  std::string dataset;
  std::size_t n = 0;  // working sample size
  std::size_t k = 0;
  int p = 2;
  std::size_t m = 0;
  double alpha = 1.0;
  double tau = 0.0;
  std::uint64_t seed = 0;
  std::size_t sample_size = 0;
  double inject_fraction = 0.0;
  std::string solver_name;

  // results
  double lp_star = 0.0;   // solved relaxation objective
  double lp_prime = 0.0;  // cost of the repaired variables on the inliers
  double fr_cost = 0.0;   // integral clustering cost
  double theorem1_ratio = 0.0;
  std::size_t n_outliers_detected = 0;
  bool outlier_bound_exceeded = false;  // more than 3m detected (reported, not fatal)
  double max_fairness_ratio = 0.0;
  double max_coverage_deficit = 0.0;
  LemmaAudit lemma;

  StageTimings timings;  // diagnostic only; never serialized (outputs stay byte-stable)
};

struct RunOutput {
  RunRecord record;
  ClusteringResult clustering;
  RoundedFractional rounded;
  MetricContext metric;
};

struct PipelineParams {
  std::size_t k = 0;
  int p = 2;
  std::optional<std::size_t> m;
  double alpha = 1.0;
  double tau = 0.0;
  Backend backend = Backend::Auto;
};

namespace detail {

class StageClock {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double secs = std::chrono::duration<double>(now - mark_).count();
    mark_ = now;
    return secs;
  }

 private:
  std::chrono::steady_clock::time_point mark_ = std::chrono::steady_clock::now();
};

}  // namespace detail

// Core of the method on an already-prepared working dataset:
// metric -> relaxation at the solve radius -> solve -> outlier rounding ->
// integral rounding on the inliers. Throws InfeasibleModel when the
// relaxation has no feasible point and InvariantViolation when a guaranteed
// bound fails.
inline RunOutput run_pipeline(const Dataset& working, const PipelineParams& params) {
  RunOutput out;
  RunRecord& rec = out.record;
  rec.n = working.n();
  rec.k = params.k;
  rec.p = params.p;
  rec.alpha = params.alpha;
  rec.tau = params.tau;
  rec.m = params.m ? *params.m : ceil_count(0.01, working.n());

  detail::StageClock clock;
  out.metric = build_metric(working, params.k);
  rec.timings.metric = clock.lap();

  const LpInstance inst = build_lp(out.metric, params.p, params.k, rec.m, params.alpha);
  rec.timings.build = clock.lap();

  const SolveReport report = solve_lp(inst, params.backend);
  rec.timings.solve = clock.lap();
  rec.solver_name = report.solver_name;
  if (report.status == SolveStatus::Infeasible)
    throw InfeasibleModel("no fair clustering exists for k=" + std::to_string(params.k) +
                          ", m=" + std::to_string(rec.m) +
                          ", alpha=" + format_double(params.alpha));
  if (report.status == SolveStatus::Error)
    throw SolverError(report.solver_name + ": " + report.message);
  rec.lp_star = report.objective;

  out.rounded = out_round(out.metric, report.solution, params.tau);
  rec.timings.out_round = clock.lap();
  rec.n_outliers_detected = out.rounded.outlier_indices.size();
  rec.outlier_bound_exceeded = rec.n_outliers_detected > 3 * rec.m;
  rec.max_coverage_deficit = out.rounded.max_deficit();
  rec.lemma = out.rounded.lemma;
  rec.lp_prime = rounded_cost(out.metric, out.rounded, params.p);

  // Cost of the repaired variables must stay within the rounding factor of
  // the solved objective: 3x for plain distances, 5x for squared.
  const double factor = params.p == 1 ? 3.0 : 5.0;
  rec.theorem1_ratio = rec.lp_star > 0.0
                           ? rec.lp_prime / rec.lp_star
                           : (rec.lp_prime == 0.0 ? 1.0
                                                  : std::numeric_limits<double>::infinity());
  if (rec.lp_prime > factor * rec.lp_star + 1e-6 * std::max(1.0, rec.lp_star))
    throw InvariantViolation("repaired cost " + format_double(rec.lp_prime) +
                             " exceeds " + format_double(factor) + " x solved cost " +
                             format_double(rec.lp_star));

  out.clustering = fair_round(out.metric, out.rounded, params.p);
  rec.timings.fair_round = clock.lap();
  rec.fr_cost = out.clustering.cost;
  rec.max_fairness_ratio = out.clustering.max_fairness_ratio;
  return out;
}

// load -> scale -> sample -> inject, per the experiment protocol.
inline Dataset prepare_dataset(const ExperimentConfig& config) {
  Dataset d = load_csv(config.dataset_path, config.feature_columns);
  d = standard_scale(d);
  const std::size_t size = std::min(config.sample_size, d.n());
  d = sample_points(d, size, config.seed);
  if (config.inject_fraction > 0.0)
    d = inject_outliers(d, config.inject_fraction, config.seed);
  return d;
}

inline std::vector<std::size_t> load_outlier_labels(const std::string& path,
                                                    std::size_t n) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open outlier label file: " + path);
  std::vector<std::size_t> labels;
  long long value = 0;
  while (in >> value) {
    if (value < 0 || static_cast<std::size_t>(value) >= n)
      throw ArgumentError("outlier label " + std::to_string(value) +
                          " out of range for n = " + std::to_string(n));
    labels.push_back(static_cast<std::size_t>(value));
  }
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  return labels;
}

inline Dataset remove_rows(const Dataset& d, const std::vector<std::size_t>& rows) {
  std::vector<char> drop(d.n(), 0);
  for (std::size_t r : rows) drop[r] = 1;
  Dataset out;
  out.dim = d.dim;
  out.feature_names = d.feature_names;
  out.scaled = d.scaled;
  out.seed = d.seed;
  for (std::size_t r = 0; r < d.n(); ++r) {
    if (drop[r]) continue;
    for (std::size_t c = 0; c < d.dim; ++c) out.points.push_back(d.at(r, c));
    out.source_rows.push_back(d.source_rows[r]);
  }
  return out;
}

// Full end-to-end run for one (k, p). With external outlier labels the LP
// detection stage is skipped: labeled points are removed up front and the
// remainder is clustered with m = 0, so any external detector can be
// compared under the same rounding. Results are then indexed against the
// reduced point set.
inline RunOutput ifxo_run(const ExperimentConfig& config, std::size_t k, int p) {
  detail::StageClock clock;
  Dataset working = prepare_dataset(config);

  PipelineParams params;
  params.k = k;
  params.p = p;
  params.m = config.m;
  params.alpha = config.alpha;
  params.tau = config.tau;
  params.backend = config.backend;

  std::size_t external_count = 0;
  if (!config.external_outlier_labels.empty()) {
    const auto labels = load_outlier_labels(config.external_outlier_labels, working.n());
    external_count = labels.size();
    working = remove_rows(working, labels);
    params.m = 0;
  }
  const double prepare_secs = clock.lap();

  RunOutput out = run_pipeline(working, params);
  out.record.timings.prepare = prepare_secs;
  out.record.dataset = config.dataset_path;
  out.record.seed = config.seed;
  out.record.sample_size = config.sample_size;
  out.record.inject_fraction = config.inject_fraction;
  if (external_count > 0) out.record.n_outliers_detected = external_count;
  return out;
}

inline nlohmann::ordered_json record_to_json(const RunRecord& rec) {
  nlohmann::ordered_json doc;
  doc["dataset"] = rec.dataset;
  doc["n"] = rec.n;
  doc["k"] = rec.k;
  doc["p"] = rec.p;
  doc["m"] = rec.m;
  doc["alpha"] = rec.alpha;
  doc["tau"] = rec.tau;
  doc["seed"] = rec.seed;
  doc["sample_size"] = rec.sample_size;
  doc["inject_fraction"] = rec.inject_fraction;
  doc["solver"] = rec.solver_name;
  doc["lp_star"] = rec.lp_star;
  doc["lp_prime"] = rec.lp_prime;
  doc["fr_cost"] = rec.fr_cost;
  doc["theorem1_ratio"] = rec.theorem1_ratio;
  doc["n_outliers_detected"] = rec.n_outliers_detected;
  doc["outlier_bound_exceeded"] = rec.outlier_bound_exceeded;
  doc["max_fairness_ratio"] = rec.max_fairness_ratio;
  doc["max_coverage_deficit"] = rec.max_coverage_deficit;
  doc["lemma_checks"] = rec.lemma.checks;
  doc["lemma_max_excess"] = rec.lemma.checks ? rec.lemma.max_excess : 0.0;
  return doc;
}

inline void write_run_record(const RunRecord& rec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ArgumentError("cannot write file: " + path);
  out << record_to_json(rec).dump(2) << '\n';
}

// Sweep over k_list x p_list. Emits table.csv plus per-run record, result,
// audit and per-point radius files into config.out_dir. A failing run is
// recorded (nan row + failures.json) and the sweep continues.
inline std::vector<RunRecord> run_table(const ExperimentConfig& config,
                                        const std::vector<std::size_t>& k_list) {
  namespace fs = std::filesystem;
  fs::create_directories(config.out_dir);
  const auto path_for = [&](const std::string& name) {
    return (fs::path(config.out_dir) / name).string();
  };

  std::vector<RunRecord> records;
  nlohmann::ordered_json failures = nlohmann::ordered_json::array();

  std::ofstream table(path_for("table.csv"));
  if (!table) throw ArgumentError("cannot write table.csv in " + config.out_dir);
  table << "k,p,lp_star,lp_prime,fr_cost,n_outliers,max_fairness_ratio\n";

  for (std::size_t k : k_list) {
    for (int p : config.p_list) {
      const std::string tag = "k" + std::to_string(k) + "_p" + std::to_string(p);
      try {
        RunOutput out = ifxo_run(config, k, p);
        const RunRecord& rec = out.record;
        table << k << ',' << p << ',' << format_double(rec.lp_star) << ','
              << format_double(rec.lp_prime) << ',' << format_double(rec.fr_cost) << ','
              << rec.n_outliers_detected << ',' << format_double(rec.max_fairness_ratio)
              << '\n';
        write_run_record(rec, path_for("run_" + tag + ".json"));
        export_result_json(out.clustering, rec.k, rec.m, rec.seed,
                           path_for("result_" + tag + ".json"));
        export_audit(out.rounded, path_for("audit_" + tag + ".json"));
        export_assignment_csv(out.metric, out.clustering,
                              path_for("fair_radius_" + tag + ".csv"));
        records.push_back(out.record);
      } catch (const Error& e) {
        table << k << ',' << p << ",nan,nan,nan,0,nan\n";
        failures.push_back({{"k", k}, {"p", p}, {"error", e.what()}});
      }
    }
  }
  if (!failures.empty()) {
    std::ofstream out(path_for("failures.json"));
    out << failures.dump(2) << '\n';
  }
  return records;
}

}  // namespace ifxo
