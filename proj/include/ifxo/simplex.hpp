#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "ifxo/errors.hpp"

namespace ifxo {

// Minimal raw LP: min c.x subject to sparse <=/>= rows and x >= 0.
// Upper bounds must be encoded as rows by the caller.
struct RawLp {
  std::size_t num_vars = 0;
  std::vector<double> objective;
  struct Row {
    std::vector<std::pair<std::size_t, double>> coeffs;
    bool is_ge = false;
    double rhs = 0.0;
  };
  std::vector<Row> rows;
};

enum class SimplexStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct SimplexResult {
  SimplexStatus status = SimplexStatus::IterationLimit;
  double objective = 0.0;
  std::vector<double> x;
};

// Dense two-phase primal simplex. Dantzig pricing with a permanent switch to
// Bland's rule after a fixed number of pivots, so it always terminates. All
// tie-breaks go to the smallest index, which makes results deterministic.
// Intended for the small instances in this project, not as a general solver.
class DenseSimplex {
 public:
  explicit DenseSimplex(const RawLp& lp) : lp_(lp) {}

  SimplexResult solve() {
    build_tableau();
    if (!run_phase(/*phase_one=*/true)) return {SimplexStatus::IterationLimit, 0.0, {}};
    if (-cost_[width_ - 1] > 1e-7) return {SimplexStatus::Infeasible, 0.0, {}};
    purge_artificials();
    setup_phase2_costs();
    if (!run_phase(/*phase_one=*/false)) return {SimplexStatus::IterationLimit, 0.0, {}};
    if (unbounded_) return {SimplexStatus::Unbounded, 0.0, {}};

    SimplexResult res;
    res.status = SimplexStatus::Optimal;
    res.x.assign(lp_.num_vars, 0.0);
    for (std::size_t i = 0; i < rows_; ++i)
      if (basis_[i] < lp_.num_vars) res.x[basis_[i]] = tab_[i * width_ + width_ - 1];
    res.objective = 0.0;
    for (std::size_t j = 0; j < lp_.num_vars; ++j)
      res.objective += lp_.objective[j] * res.x[j];
    return res;
  }

 private:
  static constexpr double kPivotTol = 1e-9;
  static constexpr double kCostTol = 1e-9;

  double& at(std::size_t i, std::size_t j) { return tab_[i * width_ + j]; }

  void build_tableau() {
    rows_ = lp_.rows.size();
    // Normalize to rhs >= 0 first so slack columns of <= rows can seed the basis.
    std::vector<RawLp::Row> rows = lp_.rows;
    for (auto& row : rows) {
      if (row.rhs < 0.0) {
        row.rhs = -row.rhs;
        row.is_ge = !row.is_ge;
        for (auto& [id, coeff] : row.coeffs) coeff = -coeff;
      }
    }

    std::size_t n_slack = 0, n_art = 0;
    for (const auto& row : rows) (row.is_ge ? n_art : n_slack) += 1;
    n_slack = rows.size();  // every row gets a slack or surplus column
    slack_begin_ = lp_.num_vars;
    art_begin_ = slack_begin_ + n_slack;
    width_ = art_begin_ + n_art + 1;  // +1 for rhs

    tab_.assign(rows_ * width_, 0.0);
    basis_.assign(rows_, 0);
    std::size_t art = art_begin_;
    for (std::size_t i = 0; i < rows_; ++i) {
      const auto& row = rows[i];
      for (const auto& [id, coeff] : row.coeffs) at(i, id) += coeff;
      at(i, width_ - 1) = row.rhs;
      if (row.is_ge) {
        at(i, slack_begin_ + i) = -1.0;  // surplus
        at(i, art) = 1.0;
        basis_[i] = art++;
      } else {
        at(i, slack_begin_ + i) = 1.0;
        basis_[i] = slack_begin_ + i;
      }
    }

    // Phase-1 cost row: minimize the sum of artificials.
    cost_.assign(width_, 0.0);
    for (std::size_t j = art_begin_; j + 1 < width_; ++j) cost_[j] = 1.0;
    for (std::size_t i = 0; i < rows_; ++i)
      if (basis_[i] >= art_begin_)
        for (std::size_t j = 0; j < width_; ++j) cost_[j] -= at(i, j);
    phase_one_ = true;
    unbounded_ = false;
  }

  void setup_phase2_costs() {
    cost_.assign(width_, 0.0);
    for (std::size_t j = 0; j < lp_.num_vars; ++j) cost_[j] = lp_.objective[j];
    for (std::size_t i = 0; i < rows_; ++i) {
      const double cb = basis_[i] < lp_.num_vars ? lp_.objective[basis_[i]] : 0.0;
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j < width_; ++j) cost_[j] -= cb * at(i, j);
    }
    phase_one_ = false;
  }

  // Swap basic artificials for structural columns; drop redundant rows.
  void purge_artificials() {
    for (std::size_t i = 0; i < rows_;) {
      if (basis_[i] < art_begin_) {
        ++i;
        continue;
      }
      std::size_t enter = width_;
      for (std::size_t j = 0; j < art_begin_; ++j) {
        if (std::fabs(at(i, j)) > kPivotTol) {
          enter = j;
          break;
        }
      }
      if (enter == width_) {
        drop_row(i);  // all-zero row: redundant constraint
      } else {
        pivot(i, enter);
        ++i;
      }
    }
  }

  void drop_row(std::size_t i) {
    if (i != rows_ - 1) {
      std::copy(tab_.begin() + static_cast<std::ptrdiff_t>((rows_ - 1) * width_),
                tab_.begin() + static_cast<std::ptrdiff_t>(rows_ * width_),
                tab_.begin() + static_cast<std::ptrdiff_t>(i * width_));
      basis_[i] = basis_[rows_ - 1];
    }
    --rows_;
    tab_.resize(rows_ * width_);
    basis_.resize(rows_);
  }

  bool enterable(std::size_t j) const {
    if (j >= width_ - 1) return false;
    if (!phase_one_ && j >= art_begin_) return false;  // artificials done after phase 1
    return true;
  }

  // Returns false only on iteration-limit exhaustion.
  bool run_phase(bool) {
    const std::size_t bland_after = 50 * (rows_ + width_);
    const std::size_t hard_limit = 400 * (rows_ + width_) + 100000;
    for (std::size_t iter = 0; iter < hard_limit; ++iter) {
      const bool bland = iter >= bland_after;
      std::size_t enter = width_;
      double best = -kCostTol;
      for (std::size_t j = 0; j < width_ - 1; ++j) {
        if (!enterable(j)) continue;
        if (cost_[j] < best) {
          best = cost_[j];
          enter = j;
          if (bland) break;  // Bland: first improving index
        }
      }
      if (enter == width_) return true;  // optimal for this phase

      // Ratio test; ties resolved to the smallest basis index (Bland-safe).
      std::size_t leave = rows_;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < rows_; ++i) {
        const double a = at(i, enter);
        if (a <= kPivotTol) continue;
        const double ratio = at(i, width_ - 1) / a;
        if (ratio < best_ratio - 1e-12 ||
            (ratio < best_ratio + 1e-12 && (leave == rows_ || basis_[i] < basis_[leave]))) {
          best_ratio = ratio;
          leave = i;
        }
      }
      if (leave == rows_) {
        if (phase_one_) return true;  // cannot happen: phase-1 is bounded below
        unbounded_ = true;
        return true;
      }
      pivot(leave, enter);
    }
    return false;
  }

  void pivot(std::size_t row, std::size_t col) {
    const double p = at(row, col);
    const double inv = 1.0 / p;
    for (std::size_t j = 0; j < width_; ++j) at(row, j) *= inv;
    at(row, col) = 1.0;
    for (std::size_t i = 0; i < rows_; ++i) {
      if (i == row) continue;
      const double factor = at(i, col);
      if (factor == 0.0) continue;
      for (std::size_t j = 0; j < width_; ++j) at(i, j) -= factor * at(row, j);
      at(i, col) = 0.0;
    }
    const double cf = cost_[col];
    if (cf != 0.0) {
      for (std::size_t j = 0; j < width_; ++j) cost_[j] -= cf * at(row, j);
      cost_[col] = 0.0;
    }
    basis_[row] = col;
  }

  const RawLp& lp_;
  std::vector<double> tab_;
  std::vector<double> cost_;
  std::vector<std::size_t> basis_;
  std::size_t rows_ = 0;
  std::size_t width_ = 0;
  std::size_t slack_begin_ = 0;
  std::size_t art_begin_ = 0;
  bool phase_one_ = true;
  bool unbounded_ = false;
};

inline SimplexResult solve_simplex(const RawLp& lp) { return DenseSimplex(lp).solve(); }

}  // namespace ifxo
