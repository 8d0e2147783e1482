#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ifxo/errors.hpp"
#include "ifxo/format.hpp"
#include "ifxo/metric.hpp"

namespace ifxo {

// Sparse model of the clustering relaxation:
//
//   min  sum d(v,u)^p x_vu
//   s.t. sum_u y_u <= k                       (LP1)
//        sum_v z_v <= m                       (LP2)
//        sum_u x_vu >= 1 - z_v   for all v    (LP3)
//        x_vu <= y_u             per pair     (LP4)
//        y_u <= 1 - z_u          for all u    (LP5)
//        0 <= x, y, z <= 1                    (LP7)
//
// Assignment variables exist only for pairs with d(v,u) <= alpha * r(v); a
// pair outside that support would be forced to zero anyway (LP6), so it is
// eliminated rather than constrained.
struct LpInstance {
  std::size_t n = 0;
  int p = 2;
  std::size_t k = 0;
  std::size_t m = 0;
  double alpha = 1.0;

  // x pairs sorted by (v, u); pair i is variable i.
  std::vector<std::pair<std::size_t, std::size_t>> x_pairs;
  std::vector<double> x_cost;          // d(v,u)^p per pair
  std::vector<std::size_t> row_begin;  // v's pairs live in [row_begin[v], row_begin[v+1])

  std::size_t num_x() const { return x_pairs.size(); }
  std::size_t num_vars() const { return num_x() + 2 * n; }
  std::size_t y_var(std::size_t u) const { return num_x() + u; }
  std::size_t z_var(std::size_t v) const { return num_x() + n + v; }

  std::optional<std::size_t> x_index(std::size_t v, std::size_t u) const {
    const auto first = x_pairs.begin() + static_cast<std::ptrdiff_t>(row_begin[v]);
    const auto last = x_pairs.begin() + static_cast<std::ptrdiff_t>(row_begin[v + 1]);
    auto it = std::lower_bound(first, last, std::make_pair(v, u));
    if (it == last || it->second != u) return std::nullopt;
    return static_cast<std::size_t>(it - x_pairs.begin());
  }

  std::string var_name(std::size_t id) const {
    if (id < num_x())
      return "x_" + std::to_string(x_pairs[id].first) + "_" +
             std::to_string(x_pairs[id].second);
    if (id < num_x() + n) return "y_" + std::to_string(id - num_x());
    return "z_" + std::to_string(id - num_x() - n);
  }
};

// Self-describing solution: x_support carries the (v,u) keys so downstream
// stages can interpret x without holding the instance.
struct FractionalSolution {
  std::vector<std::pair<std::size_t, std::size_t>> x_support;  // sorted (v,u)
  std::vector<double> x;  // aligned with x_support
  std::vector<double> y;  // length n
  std::vector<double> z;  // length n
  double objective = 0.0;

  double x_value(std::size_t v, std::size_t u) const {
    auto it = std::lower_bound(x_support.begin(), x_support.end(), std::make_pair(v, u));
    if (it == x_support.end() || *it != std::make_pair(v, u)) return 0.0;
    return x[static_cast<std::size_t>(it - x_support.begin())];
  }
};

inline LpInstance build_lp(const MetricContext& ctx, int p, std::size_t k,
                           std::size_t m, double alpha) {
  if (p != 1 && p != 2) throw ArgumentError("p must be 1 or 2");
  if (k < 1 || k > ctx.n) throw ArgumentError("k out of range [1, n]");
  if (m >= ctx.n) throw ArgumentError("m must be smaller than n");
  if (alpha < 1.0) throw ArgumentError("alpha must be >= 1");

  LpInstance inst;
  inst.n = ctx.n;
  inst.p = p;
  inst.k = k;
  inst.m = m;
  inst.alpha = alpha;
  inst.row_begin.resize(ctx.n + 1, 0);
  for (std::size_t v = 0; v < ctx.n; ++v) {
    inst.row_begin[v] = inst.x_pairs.size();
    const double reach = alpha * ctx.fair_radius[v];
    for (std::size_t u = 0; u < ctx.n; ++u) {
      const double dvu = ctx.d(v, u);
      if (dvu <= reach) {
        inst.x_pairs.emplace_back(v, u);
        inst.x_cost.push_back(p == 1 ? dvu : dvu * dvu);
      }
    }
  }
  inst.row_begin[ctx.n] = inst.x_pairs.size();
  return inst;
}

enum class Rel { LE, GE };

struct Constraint {
  std::string name;
  std::vector<std::pair<std::size_t, double>> coeffs;  // (variable id, coefficient)
  Rel rel = Rel::LE;
  double rhs = 0.0;
};

// Single source for the constraint system; solving, feasibility checking and
// export all walk the same rows.
template <typename F>
void for_each_constraint(const LpInstance& inst, F&& visit) {
  Constraint c;

  c.name = "LP1";
  c.coeffs.clear();
  for (std::size_t u = 0; u < inst.n; ++u) c.coeffs.emplace_back(inst.y_var(u), 1.0);
  c.rel = Rel::LE;
  c.rhs = static_cast<double>(inst.k);
  visit(c);

  c.name = "LP2";
  c.coeffs.clear();
  for (std::size_t v = 0; v < inst.n; ++v) c.coeffs.emplace_back(inst.z_var(v), 1.0);
  c.rel = Rel::LE;
  c.rhs = static_cast<double>(inst.m);
  visit(c);

  for (std::size_t v = 0; v < inst.n; ++v) {
    c.name = "LP3[v=" + std::to_string(v) + "]";
    c.coeffs.clear();
    for (std::size_t i = inst.row_begin[v]; i < inst.row_begin[v + 1]; ++i)
      c.coeffs.emplace_back(i, 1.0);
    c.coeffs.emplace_back(inst.z_var(v), 1.0);
    c.rel = Rel::GE;
    c.rhs = 1.0;
    visit(c);
  }

  for (std::size_t i = 0; i < inst.num_x(); ++i) {
    const auto [v, u] = inst.x_pairs[i];
    c.name = "LP4[v=" + std::to_string(v) + ",u=" + std::to_string(u) + "]";
    c.coeffs.clear();
    c.coeffs.emplace_back(i, 1.0);
    c.coeffs.emplace_back(inst.y_var(u), -1.0);
    c.rel = Rel::LE;
    c.rhs = 0.0;
    visit(c);
  }

  for (std::size_t u = 0; u < inst.n; ++u) {
    c.name = "LP5[u=" + std::to_string(u) + "]";
    c.coeffs.clear();
    c.coeffs.emplace_back(inst.y_var(u), 1.0);
    c.coeffs.emplace_back(inst.z_var(u), 1.0);
    c.rel = Rel::LE;
    c.rhs = 1.0;
    visit(c);
  }
}

struct Violation {
  std::string constraint;
  double amount = 0.0;  // how far past the bound
};

inline std::vector<double> flatten(const LpInstance& inst, const FractionalSolution& sol) {
  if (sol.x.size() != inst.num_x() || sol.y.size() != inst.n || sol.z.size() != inst.n ||
      sol.x_support != inst.x_pairs)
    throw ArgumentError("solution dimensions do not match the instance");
  std::vector<double> values(inst.num_vars());
  std::copy(sol.x.begin(), sol.x.end(), values.begin());
  std::copy(sol.y.begin(), sol.y.end(), values.begin() + static_cast<std::ptrdiff_t>(inst.num_x()));
  std::copy(sol.z.begin(), sol.z.end(),
            values.begin() + static_cast<std::ptrdiff_t>(inst.num_x() + inst.n));
  return values;
}

// Every constraint (and [0,1] bound) violated by more than tol, with the
// violation amount. Empty result means feasible.
inline std::vector<Violation> check_feasibility(const LpInstance& inst,
                                                const FractionalSolution& sol,
                                                double tol) {
  const std::vector<double> values = flatten(inst, sol);
  std::vector<Violation> out;
  for_each_constraint(inst, [&](const Constraint& c) {
    double lhs = 0.0;
    for (const auto& [id, coeff] : c.coeffs) lhs += coeff * values[id];
    const double excess = c.rel == Rel::LE ? lhs - c.rhs : c.rhs - lhs;
    if (excess > tol) out.push_back({c.name, excess});
  });
  for (std::size_t id = 0; id < inst.num_vars(); ++id) {
    if (values[id] < -tol)
      out.push_back({"LP7[" + inst.var_name(id) + "]", -values[id]});
    else if (values[id] > 1.0 + tol)
      out.push_back({"LP7[" + inst.var_name(id) + "]", values[id] - 1.0});
  }
  return out;
}

// Objective value of an assignment vector aligned with x_pairs.
inline double lp_cost(const LpInstance& inst, const std::vector<double>& x) {
  if (x.size() != inst.num_x())
    throw ArgumentError("x vector does not match the instance support");
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) total += inst.x_cost[i] * x[i];
  return total;
}

// Map form; any key outside the instance support is an error.
inline double lp_cost(const LpInstance& inst,
                      const std::map<std::pair<std::size_t, std::size_t>, double>& x) {
  double total = 0.0;
  for (const auto& [pair, value] : x) {
    auto idx = inst.x_index(pair.first, pair.second);
    if (!idx)
      throw ArgumentError("x entry (" + std::to_string(pair.first) + "," +
                          std::to_string(pair.second) + ") outside instance support");
    total += inst.x_cost[*idx] * value;
  }
  return total;
}

// Text export in LP interchange format so external solvers can cross-check
// the objective.
inline void export_lp(const LpInstance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ArgumentError("cannot write file: " + path);
  out << "Minimize\n obj:";
  std::size_t terms = 0;
  for (std::size_t i = 0; i < inst.num_x(); ++i) {
    if (inst.x_cost[i] == 0.0) continue;
    out << (terms ? " + " : " ") << format_double(inst.x_cost[i]) << ' '
        << inst.var_name(i);
    if (++terms % 8 == 0) out << "\n     ";
  }
  if (terms == 0) out << " 0 " << inst.var_name(inst.y_var(0));
  out << "\nSubject To\n";
  for_each_constraint(inst, [&](const Constraint& c) {
    std::string name = c.name;
    for (char& ch : name)
      if (ch == '[' || ch == ']' || ch == '=' || ch == ',') ch = '_';
    out << ' ' << name << ':';
    std::size_t row_terms = 0;
    for (const auto& [id, coeff] : c.coeffs) {
      if (coeff >= 0)
        out << (row_terms ? " + " : " ") << format_double(coeff);
      else
        out << " - " << format_double(-coeff);
      out << ' ' << inst.var_name(id);
      if (++row_terms % 8 == 0) out << "\n     ";
    }
    out << (c.rel == Rel::LE ? " <= " : " >= ") << format_double(c.rhs) << '\n';
  });
  out << "Bounds\n";
  for (std::size_t id = 0; id < inst.num_vars(); ++id)
    out << " 0 <= " << inst.var_name(id) << " <= 1\n";
  out << "End\n";
}

}  // namespace ifxo
