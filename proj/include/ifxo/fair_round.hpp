#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "ifxo/errors.hpp"
#include "ifxo/format.hpp"
#include "ifxo/metric.hpp"
#include "ifxo/out_round.hpp"

namespace ifxo {

inline constexpr std::size_t kUnassigned = static_cast<std::size_t>(-1);

struct ClusteringResult {
  std::vector<std::size_t> centers;     // S, ascending, |S| <= k, inliers only
  std::vector<std::size_t> assignment;  // per point; kUnassigned for outliers
  std::vector<std::size_t> inliers;     // ascending
  std::vector<std::size_t> filter_set;  // representatives chosen while rounding
  double cost = 0.0;                    // sum over inliers of d(v, S)^p
  double max_fairness_ratio = 0.0;      // max over inliers of d(v, S) / r(v)
  int p = 2;
};

// Total p-powered distance from every listed point to its nearest center.
// Both index lists must be ascending; centers must be drawn from inliers.
inline double compute_cost(const MetricContext& ctx,
                           const std::vector<std::size_t>& centers,
                           const std::vector<std::size_t>& inliers, int p) {
  if (centers.empty()) throw ArgumentError("compute_cost: empty center set");
  if (!std::includes(inliers.begin(), inliers.end(), centers.begin(), centers.end()))
    throw ArgumentError("compute_cost: centers must be inlier points");
  double total = 0.0;
  for (std::size_t v : inliers) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t s : centers) best = std::min(best, ctx.d(v, s));
    total += p == 1 ? best : best * best;
  }
  return total;
}

// Worst ratio d(v, S) / r(v) over the listed points. A point with r(v) = 0
// contributes 0 when a center coincides with it and infinity otherwise.
inline double max_fairness_ratio(const MetricContext& ctx,
                                 const std::vector<std::size_t>& centers,
                                 const std::vector<std::size_t>& inliers) {
  if (centers.empty()) throw ArgumentError("max_fairness_ratio: empty center set");
  double worst = 0.0;
  for (std::size_t v : inliers) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t s : centers) best = std::min(best, ctx.d(v, s));
    const double r = ctx.fair_radius[v];
    double ratio;
    if (r > 0.0)
      ratio = best / r;
    else
      ratio = best == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    worst = std::max(worst, ratio);
  }
  return worst;
}

// Rounds the repaired fractional opening to at most k integral centers.
//
// Filtering procedure over the inliers with ball radius R(v) = 2 r(v), the
// support radius the repair stage guarantees:
//   1. walk inliers by ascending r(v); keep v as a representative iff every
//      kept f satisfies d(v,f) > R(v) + R(f), so representative balls are
//      pairwise disjoint;
//   2. each representative opens the nearest inlier carrying positive
//      opening mass within R(f), or itself if no such point exists;
//   3. while fewer than k centers are open and adding one still lowers the
//      cost, open the inlier with the largest cost reduction (augmentation:
//      disjoint doubled balls always number below k, so filtering alone
//      leaves budget unused and can strand whole clusters on one center);
//   4. every inlier joins its nearest opened center.
// Disjoint balls each hold one unit of assignment mass when coverage
// deficits are zero, which caps the number of representatives at k.
// Augmentation only shrinks distances, so the fairness bound of the
// filtering step survives it.
inline ClusteringResult fair_round(const MetricContext& ctx,
                                   const RoundedFractional& rf, int p) {
  if (p != 1 && p != 2) throw ArgumentError("p must be 1 or 2");
  const std::size_t n = ctx.n;
  if (rf.y_prime.size() != n || rf.x_prime.size() != n || rf.is_outlier.size() != n)
    throw ArgumentError("rounded solution does not match the metric context");

  ClusteringResult res;
  res.p = p;
  for (std::size_t v = 0; v < n; ++v)
    if (!rf.is_outlier[v]) res.inliers.push_back(v);
  if (res.inliers.empty()) throw ArgumentError("fair_round: no inliers");

  const double opening = rf.total_opening();
  if (opening > static_cast<double>(ctx.k) + 1e-6)
    throw ArgumentError("total opening mass " + format_double(opening) +
                        " exceeds k = " + std::to_string(ctx.k));

  const auto radius = [&](std::size_t v) { return 2.0 * ctx.fair_radius[v]; };

  std::vector<std::size_t> order = res.inliers;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (ctx.fair_radius[a] != ctx.fair_radius[b])
      return ctx.fair_radius[a] < ctx.fair_radius[b];
    return a < b;
  });

  for (std::size_t v : order) {
    bool blocked = false;
    for (std::size_t f : res.filter_set) {
      if (ctx.d(v, f) <= radius(v) + radius(f)) {
        blocked = true;
        break;
      }
    }
    if (!blocked) res.filter_set.push_back(v);
  }

  // Representative balls must be pairwise disjoint by construction.
  for (std::size_t i = 0; i < res.filter_set.size(); ++i)
    for (std::size_t j = i + 1; j < res.filter_set.size(); ++j) {
      const std::size_t a = res.filter_set[i], b = res.filter_set[j];
      if (ctx.d(a, b) <= radius(a) + radius(b))
        throw InvariantViolation("filter balls of " + std::to_string(a) + " and " +
                                 std::to_string(b) + " overlap");
    }

  if (res.filter_set.size() > ctx.k)
    throw InvariantViolation(
        "filtering produced " + std::to_string(res.filter_set.size()) +
        " representatives for k = " + std::to_string(ctx.k) +
        " (max coverage deficit " + format_double(rf.max_deficit()) + ")");

  for (std::size_t f : res.filter_set) {
    std::size_t chosen = f;  // fallback when no opening mass sits within R(f)
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t u : res.inliers) {
      if (rf.y_prime[u] <= 0.0) continue;
      const double dfu = ctx.d(f, u);
      if (dfu <= radius(f) && dfu < best) {
        best = dfu;
        chosen = u;
      }
    }
    res.centers.push_back(chosen);
  }
  std::sort(res.centers.begin(), res.centers.end());
  res.centers.erase(std::unique(res.centers.begin(), res.centers.end()),
                    res.centers.end());

  // Greedy augmentation toward the full budget.
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  for (std::size_t v : res.inliers)
    for (std::size_t s : res.centers) nearest[v] = std::min(nearest[v], ctx.d(v, s));
  const auto powered = [p](double dist) { return p == 1 ? dist : dist * dist; };
  while (res.centers.size() < std::min(ctx.k, res.inliers.size())) {
    std::size_t pick = n;
    double best_gain = 0.0;
    for (std::size_t cand : res.inliers) {
      double gain = 0.0;
      for (std::size_t v : res.inliers) {
        const double dvc = ctx.d(v, cand);
        if (dvc < nearest[v]) gain += powered(nearest[v]) - powered(dvc);
      }
      if (gain > best_gain) {
        best_gain = gain;
        pick = cand;
      }
    }
    if (pick == n) break;  // no strict improvement left
    res.centers.insert(
        std::lower_bound(res.centers.begin(), res.centers.end(), pick), pick);
    for (std::size_t v : res.inliers)
      nearest[v] = std::min(nearest[v], ctx.d(v, pick));
  }

  res.assignment.assign(n, kUnassigned);
  for (std::size_t v : res.inliers) {
    std::size_t nearest = res.centers.front();
    double best = ctx.d(v, nearest);
    for (std::size_t s : res.centers) {
      const double dvs = ctx.d(v, s);
      if (dvs < best) {
        best = dvs;
        nearest = s;
      }
    }
    res.assignment[v] = nearest;
  }

  res.cost = compute_cost(ctx, res.centers, res.inliers, p);
  res.max_fairness_ratio = max_fairness_ratio(ctx, res.centers, res.inliers);

  // Realized fairness must sit inside the procedure's own bound when the
  // repair stage lost no coverage, and inside the global envelope otherwise.
  const double limit = rf.zero_deficit() ? 6.0 + 1e-9 : 16.0 + 1e-9;
  if (res.max_fairness_ratio > limit)
    throw InvariantViolation("fairness ratio " + format_double(res.max_fairness_ratio) +
                             " exceeds bound " + format_double(limit));
  return res;
}

inline void export_result_json(const ClusteringResult& res, std::size_t k,
                               std::size_t m, std::uint64_t seed,
                               const std::string& path) {
  nlohmann::ordered_json doc;
  doc["centers"] = res.centers;
  doc["assignment"] = nlohmann::json::array();
  for (std::size_t v : res.inliers)
    doc["assignment"].push_back({{"point", v}, {"center", res.assignment[v]}});
  doc["cost"] = res.cost;
  doc["max_fairness_ratio"] = res.max_fairness_ratio;
  doc["k"] = k;
  doc["m"] = m;
  doc["p"] = res.p;
  doc["seed"] = seed;
  std::ofstream out(path);
  if (!out) throw ArgumentError("cannot write file: " + path);
  out << doc.dump(2) << '\n';
}

// Per-point rows (index, assigned_center, distance, r, ratio) for plots.
inline void export_assignment_csv(const MetricContext& ctx,
                                  const ClusteringResult& res,
                                  const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ArgumentError("cannot write file: " + path);
  out << "index,assigned_center,distance,r,ratio\n";
  for (std::size_t v : res.inliers) {
    const double dist = ctx.d(v, res.assignment[v]);
    const double r = ctx.fair_radius[v];
    const double ratio = r > 0.0 ? dist / r : (dist == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    out << v << ',' << res.assignment[v] << ',' << format_double(dist) << ','
        << format_double(r) << ',' << format_double(ratio) << '\n';
  }
}

}  // namespace ifxo
