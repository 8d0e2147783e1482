// Command-line front end: single runs, table sweeps, tiny-instance ground
// truth, and dataset preparation.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ifxo/ifxo.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitInvariant = 3;

struct CommonOpts {
  std::string data;
  std::vector<std::string> features;
  std::string backend = "auto";
  std::string out_dir = ".";
  std::uint64_t seed = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--data", opts.data, "input CSV file")->required();
  cmd->add_option("--features", opts.features, "feature column names")
      ->required()
      ->delimiter(',');
  cmd->add_option("--backend", opts.backend, "LP solver backend: auto|builtin|scipy");
  cmd->add_option("--out-dir", opts.out_dir, "output directory");
  cmd->add_option("--seed", opts.seed, "random seed for sampling and injection");
}

void print_record(const ifxo::RunRecord& rec) {
  std::cout << ifxo::record_to_json(rec).dump(2) << '\n';
  std::fprintf(stderr,
               "timings: prepare %.3fs metric %.3fs build %.3fs solve %.3fs "
               "out_round %.3fs fair_round %.3fs\n",
               rec.timings.prepare, rec.timings.metric, rec.timings.build,
               rec.timings.solve, rec.timings.out_round, rec.timings.fair_round);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Individually fair k-clustering with outlier detection"};
  app.require_subcommand(1);

  CommonOpts run_opts;
  std::size_t run_k = 5;
  int run_p = 2;
  std::int64_t run_m = -1;  // -1: ceil(0.01 * n)
  double run_alpha = 1.0, run_tau = 0.0, run_inject = 0.01;
  std::size_t run_sample = 1000;
  std::string run_labels;

  auto* run = app.add_subcommand("run", "single end-to-end clustering run");
  add_common(run, run_opts);
  run->add_option("--k", run_k, "number of centers")->required();
  run->add_option("--p", run_p, "cost power: 1 (k-median) or 2 (k-means)")
      ->check(CLI::IsMember({1, 2}));
  run->add_option("--m", run_m, "outlier budget (-1 = 1% of the sample)");
  run->add_option("--alpha", run_alpha, "fairness stretch for the solve stage");
  run->add_option("--tau", run_tau, "outlier threshold");
  run->add_option("--sample-size", run_sample, "points sampled from the dataset");
  run->add_option("--inject-fraction", run_inject, "fraction of rows perturbed");
  run->add_option("--outlier-labels", run_labels,
                  "file of externally detected outlier indices; skips LP detection");

  CommonOpts table_opts;
  std::vector<std::size_t> table_k{5, 10, 15};
  std::vector<int> table_p{2};
  std::int64_t table_m = -1;
  double table_alpha = 1.0, table_tau = 0.0, table_inject = 0.01;
  std::size_t table_sample = 1000;
  std::string table_labels;

  auto* table = app.add_subcommand("table", "sweep over k (and p) and emit CSV");
  add_common(table, table_opts);
  table->add_option("--k", table_k, "center counts to sweep")->delimiter(',');
  table->add_option("--p", table_p, "cost powers to sweep")
      ->delimiter(',')
      ->check(CLI::IsMember({1, 2}));
  table->add_option("--m", table_m, "outlier budget (-1 = 1% of the sample)");
  table->add_option("--alpha", table_alpha, "fairness stretch for the solve stage");
  table->add_option("--tau", table_tau, "outlier threshold");
  table->add_option("--sample-size", table_sample, "points sampled from the dataset");
  table->add_option("--inject-fraction", table_inject, "fraction of rows perturbed");
  table->add_option("--outlier-labels", table_labels,
                    "file of externally detected outlier indices");

  CommonOpts oracle_opts;
  std::size_t oracle_k = 1;
  int oracle_p = 2;
  std::size_t oracle_m = 0;
  double oracle_alpha = 1.0;
  bool oracle_raw = false;

  auto* oracle = app.add_subcommand("oracle", "exhaustive optimum for tiny inputs");
  add_common(oracle, oracle_opts);
  oracle->add_option("--k", oracle_k, "number of centers")->required();
  oracle->add_option("--m", oracle_m, "outlier budget");
  oracle->add_option("--p", oracle_p, "cost power")->check(CLI::IsMember({1, 2}));
  oracle->add_option("--alpha", oracle_alpha, "fairness stretch");
  oracle->add_flag("--no-scale", oracle_raw, "skip standard scaling");

  CommonOpts inject_opts;
  std::size_t inject_sample = 1000;
  double inject_fraction = 0.01;

  auto* inject = app.add_subcommand("inject", "prepare a scaled, perturbed sample");
  add_common(inject, inject_opts);
  inject->add_option("--sample-size", inject_sample, "points sampled from the dataset");
  inject->add_option("--inject-fraction", inject_fraction, "fraction of rows perturbed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      ifxo::ExperimentConfig config;
      config.dataset_path = run_opts.data;
      config.feature_columns = run_opts.features;
      if (run_m >= 0) config.m = static_cast<std::size_t>(run_m);
      config.alpha = run_alpha;
      config.tau = run_tau;
      config.sample_size = run_sample;
      config.seed = run_opts.seed;
      config.inject_fraction = run_inject;
      config.external_outlier_labels = run_labels;
      config.backend = ifxo::backend_from_name(run_opts.backend);
      config.out_dir = run_opts.out_dir;

      std::filesystem::create_directories(config.out_dir);
      const auto path_for = [&](const std::string& name) {
        return (std::filesystem::path(config.out_dir) / name).string();
      };
      ifxo::RunOutput out = ifxo::ifxo_run(config, run_k, run_p);
      ifxo::write_run_record(out.record, path_for("run.json"));
      ifxo::export_result_json(out.clustering, out.record.k, out.record.m,
                               out.record.seed, path_for("result.json"));
      ifxo::export_audit(out.rounded, path_for("audit.json"));
      ifxo::export_assignment_csv(out.metric, out.clustering,
                                  path_for("fair_radius.csv"));
      print_record(out.record);
    } else if (table->parsed()) {
      ifxo::ExperimentConfig config;
      config.dataset_path = table_opts.data;
      config.feature_columns = table_opts.features;
      config.p_list = table_p;
      if (table_m >= 0) config.m = static_cast<std::size_t>(table_m);
      config.alpha = table_alpha;
      config.tau = table_tau;
      config.sample_size = table_sample;
      config.seed = table_opts.seed;
      config.inject_fraction = table_inject;
      config.external_outlier_labels = table_labels;
      config.backend = ifxo::backend_from_name(table_opts.backend);
      config.out_dir = table_opts.out_dir;

      const auto records = ifxo::run_table(config, table_k);
      std::cout << "wrote " << records.size() << " runs to " << config.out_dir << '\n';
      const std::size_t expected = table_k.size() * table_p.size();
      if (records.size() != expected) {
        std::cerr << expected - records.size()
                  << " run(s) failed; see failures.json\n";
        return kExitError;
      }
    } else if (oracle->parsed()) {
      ifxo::Dataset d = ifxo::load_csv(oracle_opts.data, oracle_opts.features);
      if (!oracle_raw) d = ifxo::standard_scale(d);
      const ifxo::MetricContext ctx = ifxo::build_metric(d, oracle_k);
      const ifxo::OracleResult res =
          ifxo::brute_force_opt(ctx, oracle_p, oracle_k, oracle_m, oracle_alpha);
      nlohmann::ordered_json doc;
      doc["feasible"] = res.feasible();
      doc["opt_cost"] = res.feasible() ? nlohmann::ordered_json(res.opt_cost)
                                       : nlohmann::ordered_json("infeasible");
      doc["opt_centers"] = res.opt_centers;
      doc["opt_outliers"] = res.opt_outliers;
      std::cout << doc.dump(2) << '\n';
    } else if (inject->parsed()) {
      ifxo::ExperimentConfig config;
      config.dataset_path = inject_opts.data;
      config.feature_columns = inject_opts.features;
      config.sample_size = inject_sample;
      config.seed = inject_opts.seed;
      config.inject_fraction = inject_fraction;
      const ifxo::Dataset d = ifxo::prepare_dataset(config);
      std::filesystem::create_directories(inject_opts.out_dir);
      const auto base = std::filesystem::path(inject_opts.out_dir);
      ifxo::export_dataset(d, (base / "dataset.csv").string(),
                           (base / "dataset_meta.json").string());
      std::cout << "wrote " << d.n() << " points (" << d.injected_outlier_indices.size()
                << " perturbed) to " << (base / "dataset.csv").string() << '\n';
    }
  } catch (const ifxo::InfeasibleModel& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const ifxo::InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitOk;
}
