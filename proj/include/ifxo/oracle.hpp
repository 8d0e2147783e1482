#pragma once

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "ifxo/errors.hpp"
#include "ifxo/metric.hpp"

namespace ifxo {

struct OracleResult {
  double opt_cost = std::numeric_limits<double>::infinity();  // infinity if infeasible
  std::vector<std::size_t> opt_centers;
  std::vector<std::size_t> opt_outliers;

  bool feasible() const { return std::isfinite(opt_cost); }
};

namespace detail {

inline std::vector<std::size_t> mask_to_indices(std::uint32_t mask) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; mask; ++i, mask >>= 1)
    if (mask & 1u) out.push_back(i);
  return out;
}

}  // namespace detail

// Exhaustive ground truth for tiny instances: every outlier set Z with
// |Z| <= m and every center set S in X \ Z with 1 <= |S| <= k is tried; a
// pair qualifies when each kept point has a center within alpha * r(v).
// Cost ties resolve to the lexicographically smallest (Z, S).
inline OracleResult brute_force_opt(const MetricContext& ctx, int p, std::size_t k,
                                    std::size_t m, double alpha) {
  if (ctx.n > 12) throw ArgumentError("oracle is limited to n <= 12");
  if (p != 1 && p != 2) throw ArgumentError("p must be 1 or 2");
  if (k < 1) throw ArgumentError("k must be >= 1");
  if (alpha < 1.0) throw ArgumentError("alpha must be >= 1");

  const std::size_t n = ctx.n;
  const std::uint32_t full = n == 32 ? ~0u : (1u << n) - 1u;

  OracleResult best;
  std::vector<std::size_t> keep;
  keep.reserve(n);

  for (std::uint32_t z_mask = 0; z_mask <= full; ++z_mask) {
    if (static_cast<std::size_t>(std::popcount(z_mask)) > m) continue;
    const std::uint32_t comp = full & ~z_mask;
    if (comp == 0) continue;  // at least one center is required
    keep = detail::mask_to_indices(comp);

    // Enumerate nonempty submasks of the complement.
    for (std::uint32_t s_mask = comp; s_mask; s_mask = (s_mask - 1) & comp) {
      const std::size_t s_count = static_cast<std::size_t>(std::popcount(s_mask));
      if (s_count > k) continue;

      double cost = 0.0;
      bool fair = true;
      for (std::size_t v : keep) {
        double nearest = std::numeric_limits<double>::infinity();
        for (std::uint32_t rest = s_mask; rest;) {
          const std::size_t u = static_cast<std::size_t>(std::countr_zero(rest));
          rest &= rest - 1;
          nearest = std::min(nearest, ctx.d(v, u));
        }
        if (nearest > alpha * ctx.fair_radius[v]) {
          fair = false;
          break;
        }
        cost += p == 1 ? nearest : nearest * nearest;
      }
      if (!fair) continue;

      if (cost < best.opt_cost) {
        best.opt_cost = cost;
        best.opt_outliers = detail::mask_to_indices(z_mask);
        best.opt_centers = detail::mask_to_indices(s_mask);
      } else if (cost == best.opt_cost) {
        auto outliers = detail::mask_to_indices(z_mask);
        auto centers = detail::mask_to_indices(s_mask);
        if (std::make_pair(outliers, centers) <
            std::make_pair(best.opt_outliers, best.opt_centers)) {
          best.opt_outliers = std::move(outliers);
          best.opt_centers = std::move(centers);
        }
      }
    }
  }
  return best;
}

}  // namespace ifxo
