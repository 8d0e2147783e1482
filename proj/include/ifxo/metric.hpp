#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <string>
#include <vector>

#include "ifxo/dataset.hpp"
#include "ifxo/errors.hpp"
#include "ifxo/format.hpp"

namespace ifxo {

// Pairwise Euclidean distances plus, for every point, the radius of the ball
// that captures its t = min(ceil(n/k), n-1) nearest other points. The
// clustering objective raises distances to the power p; the metric itself is
// unpowered.
struct MetricContext {
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t neighbor_count = 0;       // t
  std::vector<double> dist;             // row-major, n x n, symmetric
  std::vector<double> fair_radius;      // r(v), length n

  double d(std::size_t v, std::size_t u) const { return dist[v * n + u]; }
};

inline MetricContext build_metric(const Dataset& data, std::size_t k) {
  const std::size_t n = data.n();
  if (n < 2) throw ArgumentError("metric needs at least 2 points");
  if (k < 1 || k > n)
    throw ArgumentError("k = " + std::to_string(k) + " out of range [1, " +
                        std::to_string(n) + "]");

  MetricContext ctx;
  ctx.n = n;
  ctx.k = k;
  // ceil(n/k) other points, never counting v itself; clamp handles k = 1.
  ctx.neighbor_count = std::min((n + k - 1) / k, n - 1);
  ctx.dist.assign(n * n, 0.0);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t u = v + 1; u < n; ++u) {
      double sq = 0.0;
      for (std::size_t c = 0; c < data.dim; ++c) {
        const double diff = data.at(v, c) - data.at(u, c);
        sq += diff * diff;
      }
      const double dvu = std::sqrt(sq);
      ctx.dist[v * n + u] = dvu;
      ctx.dist[u * n + v] = dvu;
    }
  }

  // r(v) = t-th smallest distance to another point (t-th order statistic,
  // ties included).
  ctx.fair_radius.resize(n);
  std::vector<double> row(n - 1);
  for (std::size_t v = 0; v < n; ++v) {
    std::size_t w = 0;
    for (std::size_t u = 0; u < n; ++u)
      if (u != v) row[w++] = ctx.d(v, u);
    auto nth = row.begin() + static_cast<std::ptrdiff_t>(ctx.neighbor_count - 1);
    std::nth_element(row.begin(), nth, row.end());
    ctx.fair_radius[v] = *nth;
  }
  return ctx;
}

// {u : d(v,u) <= alpha * r(v)}; contains v itself since d(v,v) = 0.
inline std::vector<std::size_t> fair_ball(const MetricContext& ctx, std::size_t v,
                                          double alpha) {
  if (v >= ctx.n) throw ArgumentError("fair_ball: point index out of range");
  if (alpha < 1.0) throw ArgumentError("fair_ball: alpha must be >= 1");
  const double reach = alpha * ctx.fair_radius[v];
  std::vector<std::size_t> members;
  for (std::size_t u = 0; u < ctx.n; ++u)
    if (ctx.d(v, u) <= reach) members.push_back(u);
  return members;
}

// (index, radius) rows for plotting.
inline void export_fair_radii(const MetricContext& ctx, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ArgumentError("cannot write file: " + path);
  out << "index,radius\n";
  for (std::size_t v = 0; v < ctx.n; ++v)
    out << v << ',' << format_double(ctx.fair_radius[v]) << '\n';
}

}  // namespace ifxo
