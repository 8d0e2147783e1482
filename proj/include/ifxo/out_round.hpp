#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "ifxo/errors.hpp"
#include "ifxo/format.hpp"
#include "ifxo/lp_model.hpp"
#include "ifxo/metric.hpp"

namespace ifxo {

// Deficits at or below this are treated as zero (solver noise).
inline constexpr double kDeficitTol = 1e-9;

struct Reassignment {
  std::size_t u_out = 0;
  std::size_t u_prime = 0;
  double moved_mass = 0.0;  // fractional opening transferred
};

struct LemmaAudit {
  std::size_t checks = 0;
  double max_excess = -std::numeric_limits<double>::infinity();  // d(v,u') - 2 d(v,u_out)
};

// Output of the outlier-rounding stage: the thresholded outlier set plus the
// repaired assignment/opening variables on the inliers. Every surviving x
// entry lies within 2 r(v) of its point, so the support is valid for the
// doubled-radius model.
struct RoundedFractional {
  std::vector<std::map<std::size_t, double>> x_prime;  // per-point sparse row
  std::vector<double> y_prime;
  std::vector<std::size_t> outlier_indices;  // ascending
  std::vector<char> is_outlier;
  std::vector<Reassignment> reassignments;
  std::map<std::size_t, double> coverage_deficit;  // inlier -> max(0, 1 - sum_u x'_vu)
  LemmaAudit lemma;
  double clipped_mass = 0.0;
  double tau = 0.0;

  double max_deficit() const {
    double worst = 0.0;
    for (const auto& [v, d] : coverage_deficit) worst = std::max(worst, d);
    return worst;
  }
  bool zero_deficit() const { return max_deficit() <= kDeficitTol; }

  double total_opening() const {
    double total = 0.0;
    for (double y : y_prime) total += y;
    return total;
  }

  double total_assignment() const {
    double total = 0.0;
    for (const auto& row : x_prime)
      for (const auto& [u, val] : row) total += val;
    return total;
  }
};

// Objective value of the repaired variables: sum d(v,u)^p x'_vu.
inline double rounded_cost(const MetricContext& ctx, const RoundedFractional& rf, int p) {
  double total = 0.0;
  for (std::size_t v = 0; v < rf.x_prime.size(); ++v) {
    for (const auto& [u, val] : rf.x_prime[v]) {
      const double dvu = ctx.d(v, u);
      total += (p == 1 ? dvu : dvu * dvu) * val;
    }
  }
  return total;
}

// Rounds the outlier indicators at threshold tau and repairs (x, y):
// outlier rows and columns are cleared, and the opening mass of any outlier
// that was fractionally open migrates to its nearest inlier, dragging the
// assignments pointing at it along. Assignment mass landing on u' is clipped
// to the updated opening y'_u'. Expects a solution of the alpha = 1 model.
inline RoundedFractional out_round(const MetricContext& ctx,
                                   const FractionalSolution& sol, double tau) {
  if (tau < 0.0) throw ArgumentError("tau must be >= 0");
  const std::size_t n = ctx.n;
  if (sol.y.size() != n || sol.z.size() != n || sol.x.size() != sol.x_support.size())
    throw ArgumentError("solution does not match the metric context");

  RoundedFractional rf;
  rf.tau = tau;
  rf.is_outlier.assign(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    if (sol.z[v] > tau) {
      rf.is_outlier[v] = 1;
      rf.outlier_indices.push_back(v);
    }
  }
  if (rf.outlier_indices.size() == n)
    throw InfeasibleModel("every point was marked an outlier at tau = " +
                          format_double(tau));

  // Copy x* keeping only nonzero entries and dropping outlier rows.
  rf.x_prime.assign(n, {});
  for (std::size_t i = 0; i < sol.x_support.size(); ++i) {
    const auto [v, u] = sol.x_support[i];
    if (sol.x[i] != 0.0 && !rf.is_outlier[v]) rf.x_prime[v][u] = sol.x[i];
  }
  rf.y_prime = sol.y;
  for (std::size_t v : rf.outlier_indices) rf.y_prime[v] = 0.0;

  // Outliers that were fractionally open, in ascending order.
  std::vector<std::size_t> u_out_set;
  for (std::size_t u : rf.outlier_indices)
    if (sol.y[u] != 0.0) u_out_set.push_back(u);

  for (std::size_t u_out : u_out_set) {
    // Nearest inlier, smallest index on ties.
    std::size_t u_prime = n;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t u = 0; u < n; ++u) {
      if (rf.is_outlier[u]) continue;
      const double duu = ctx.d(u_out, u);
      if (duu < best) {
        best = duu;
        u_prime = u;
      }
    }

    const double moved = sol.y[u_out];
    rf.y_prime[u_prime] = std::min(rf.y_prime[u_prime] + moved, 1.0);
    rf.reassignments.push_back({u_out, u_prime, moved});

    for (std::size_t v = 0; v < n; ++v) {
      if (rf.is_outlier[v]) continue;
      const double mass = sol.x_value(v, u_out);
      if (mass == 0.0) continue;

      // Reassignment must stay within twice the original distance; the
      // argmin choice of u' guarantees it, so a failure here is a bug.
      const double excess = ctx.d(v, u_prime) - 2.0 * ctx.d(v, u_out);
      rf.lemma.checks += 1;
      rf.lemma.max_excess = std::max(rf.lemma.max_excess, excess);
      if (excess > 1e-9)
        throw InvariantViolation(
            "reassignment stretch bound failed for v=" + std::to_string(v) +
            ", u_out=" + std::to_string(u_out) + ": excess " + format_double(excess));

      auto& row = rf.x_prime[v];
      row.erase(u_out);
      double updated = row.count(u_prime) ? row[u_prime] : 0.0;
      updated += mass;
      if (updated > rf.y_prime[u_prime]) {
        rf.clipped_mass += updated - rf.y_prime[u_prime];
        updated = rf.y_prime[u_prime];
      }
      row[u_prime] = updated;
    }
  }

  // Scrub stragglers: an assignment into an outlier column whose opening was
  // exactly zero has no reassignment target and simply disappears.
  for (std::size_t v = 0; v < n; ++v) {
    auto& row = rf.x_prime[v];
    for (auto it = row.begin(); it != row.end();) {
      if (rf.is_outlier[it->first]) {
        rf.clipped_mass += it->second;
        it = row.erase(it);
      } else {
        ++it;
      }
    }
  }

  // Support radius invariant: every surviving pair sits within 2 r(v).
  for (std::size_t v = 0; v < n; ++v) {
    for (const auto& [u, val] : rf.x_prime[v]) {
      (void)val;
      if (ctx.d(v, u) > 2.0 * ctx.fair_radius[v] + 1e-9)
        throw InvariantViolation("pair (" + std::to_string(v) + "," +
                                 std::to_string(u) + ") outside 2 r(v) support");
    }
  }

  for (std::size_t v = 0; v < n; ++v) {
    if (rf.is_outlier[v]) continue;
    double covered = 0.0;
    for (const auto& [u, val] : rf.x_prime[v]) covered += val;
    const double deficit = std::max(0.0, 1.0 - covered);
    if (deficit > 1e-12) rf.coverage_deficit[v] = deficit;
  }
  return rf;
}

// Audit trail for debugging and the acceptance suite.
inline void export_audit(const RoundedFractional& rf, const std::string& path) {
  nlohmann::ordered_json audit;
  audit["tau"] = rf.tau;
  audit["outlier_indices"] = rf.outlier_indices;
  audit["reassignments"] = nlohmann::json::array();
  for (const auto& r : rf.reassignments)
    audit["reassignments"].push_back(
        {{"u_out", r.u_out}, {"u_prime", r.u_prime}, {"moved_mass", r.moved_mass}});
  audit["coverage_deficit"] = nlohmann::json::array();
  for (const auto& [v, d] : rf.coverage_deficit)
    audit["coverage_deficit"].push_back({{"point", v}, {"deficit", d}});
  audit["lemma"] = {{"checks", rf.lemma.checks},
                    {"max_excess", rf.lemma.checks ? rf.lemma.max_excess : 0.0}};
  audit["clipped_mass"] = rf.clipped_mass;
  std::ofstream out(path);
  if (!out) throw ArgumentError("cannot write file: " + path);
  out << audit.dump(2) << '\n';
}

}  // namespace ifxo
