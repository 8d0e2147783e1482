#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ifxo/errors.hpp"
#include "ifxo/lp_model.hpp"
#include "ifxo/simplex.hpp"

namespace ifxo {

enum class SolveStatus { Optimal, Infeasible, Error };

enum class Backend {
  Auto,     // builtin for small instances, scipy-highs otherwise
  Builtin,  // in-process dense simplex
  Scipy,    // python3 + scipy.optimize.linprog (HiGHS), via subprocess
};

struct SolveReport {
  SolveStatus status = SolveStatus::Error;
  double objective = std::numeric_limits<double>::quiet_NaN();
  FractionalSolution solution;  // populated iff status == Optimal
  double solve_time = 0.0;      // seconds; diagnostic, never serialized
  std::string solver_name;
  std::string message;
};

namespace detail {

// Constraint rows in "A x <= b" form (>= rows negated), CSR layout.
struct UbSystem {
  std::vector<std::size_t> indptr{0};
  std::vector<std::size_t> indices;
  std::vector<double> data;
  std::vector<double> b;
};

inline UbSystem assemble_ub(const LpInstance& inst) {
  UbSystem sys;
  for_each_constraint(inst, [&](const Constraint& c) {
    const double sign = c.rel == Rel::LE ? 1.0 : -1.0;
    for (const auto& [id, coeff] : c.coeffs) {
      sys.indices.push_back(id);
      sys.data.push_back(sign * coeff);
    }
    sys.indptr.push_back(sys.indices.size());
    sys.b.push_back(sign * c.rhs);
  });
  return sys;
}

inline SolveReport finish_report(const LpInstance& inst, SolveReport report) {
  if (report.status != SolveStatus::Optimal) return report;
  // Never a silent wrong answer: a claimed optimum must satisfy the model.
  const auto violations = check_feasibility(inst, report.solution, 1e-6);
  if (!violations.empty()) {
    report.status = SolveStatus::Error;
    report.message = report.solver_name + " returned an infeasible point: " +
                     violations.front().constraint + " violated by " +
                     format_double(violations.front().amount);
    return report;
  }
  const double recomputed = lp_cost(inst, report.solution.x);
  const double scale = std::max({1.0, std::fabs(recomputed), std::fabs(report.objective)});
  if (std::fabs(recomputed - report.objective) > 1e-6 * scale) {
    report.status = SolveStatus::Error;
    report.message = report.solver_name + " objective mismatch: reported " +
                     format_double(report.objective) + " vs recomputed " +
                     format_double(recomputed);
    return report;
  }
  report.solution.objective = report.objective;
  return report;
}

inline FractionalSolution split_values(const LpInstance& inst, const std::vector<double>& v) {
  FractionalSolution sol;
  sol.x_support = inst.x_pairs;
  sol.x.assign(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(inst.num_x()));
  sol.y.assign(v.begin() + static_cast<std::ptrdiff_t>(inst.num_x()),
               v.begin() + static_cast<std::ptrdiff_t>(inst.num_x() + inst.n));
  sol.z.assign(v.begin() + static_cast<std::ptrdiff_t>(inst.num_x() + inst.n), v.end());
  return sol;
}

inline SolveReport solve_builtin(const LpInstance& inst) {
  SolveReport report;
  report.solver_name = "builtin-simplex";

  RawLp raw;
  raw.num_vars = inst.num_vars();
  raw.objective.assign(raw.num_vars, 0.0);
  for (std::size_t i = 0; i < inst.num_x(); ++i) raw.objective[i] = inst.x_cost[i];
  // Upper bounds are implied: x <= y, y + z <= 1 and nonnegativity already
  // cap every variable at 1, so no bound rows are added.
  for_each_constraint(inst, [&](const Constraint& c) {
    RawLp::Row row;
    row.coeffs = c.coeffs;
    row.is_ge = c.rel == Rel::GE;
    row.rhs = c.rhs;
    raw.rows.push_back(std::move(row));
  });

  const SimplexResult res = solve_simplex(raw);
  switch (res.status) {
    case SimplexStatus::Optimal:
      report.status = SolveStatus::Optimal;
      report.objective = res.objective;
      report.solution = split_values(inst, res.x);
      break;
    case SimplexStatus::Infeasible:
      report.status = SolveStatus::Infeasible;
      break;
    case SimplexStatus::Unbounded:
      report.message = "simplex reported unbounded on a bounded model";
      break;
    case SimplexStatus::IterationLimit:
      report.message = "simplex iteration limit reached";
      break;
  }
  return report;
}

// Source of the subprocess solver. Written to a temp file per call; the
// interpreter comes from IFXO_PYTHON (default python3).
inline const char* scipy_solver_script() {
  return R"PY(
import json
import sys

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import csr_matrix


def main():
    with open(sys.argv[1]) as f:
        prob = json.load(f)
    num_vars = prob["num_vars"]
    c = np.asarray(prob["c"], dtype=float)
    a_ub = csr_matrix(
        (
            np.asarray(prob["data"], dtype=float),
            np.asarray(prob["indices"], dtype=np.int64),
            np.asarray(prob["indptr"], dtype=np.int64),
        ),
        shape=(len(prob["indptr"]) - 1, num_vars),
    )
    b_ub = np.asarray(prob["b"], dtype=float)
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, bounds=(0.0, 1.0), method="highs")
    if res.status == 0:
        out = {
            "status": "optimal",
            "objective": float(res.fun),
            "x": [float(v) for v in res.x],
        }
    elif res.status == 2:
        out = {"status": "infeasible"}
    else:
        out = {"status": "error", "message": str(res.message)}
    with open(sys.argv[2], "w") as f:
        json.dump(out, f)


main()
)PY";
}

inline std::filesystem::path make_scratch_dir() {
  static std::atomic<std::uint64_t> counter{0};
  const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
  const auto name = "ifxo-lp-" + std::to_string(static_cast<long long>(stamp)) + "-" +
                    std::to_string(counter.fetch_add(1));
  auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::create_directories(dir);
  return dir;
}

inline SolveReport solve_scipy(const LpInstance& inst) {
  SolveReport report;
  report.solver_name = "scipy-highs";

  const auto dir = make_scratch_dir();
  struct Cleanup {
    std::filesystem::path dir;
    ~Cleanup() {
      std::error_code ec;
      std::filesystem::remove_all(dir, ec);
    }
  } cleanup{dir};

  const UbSystem sys = assemble_ub(inst);
  nlohmann::json prob;
  prob["num_vars"] = inst.num_vars();
  {
    std::vector<double> c(inst.num_vars(), 0.0);
    for (std::size_t i = 0; i < inst.num_x(); ++i) c[i] = inst.x_cost[i];
    prob["c"] = std::move(c);
  }
  prob["indptr"] = sys.indptr;
  prob["indices"] = sys.indices;
  prob["data"] = sys.data;
  prob["b"] = sys.b;

  const auto in_path = dir / "problem.json";
  const auto out_path = dir / "solution.json";
  const auto script_path = dir / "solve_lp.py";
  const auto err_path = dir / "stderr.txt";
  {
    std::ofstream in(in_path);
    in << prob.dump();
  }
  {
    std::ofstream script(script_path);
    script << scipy_solver_script();
  }

  const char* python_env = std::getenv("IFXO_PYTHON");
  const std::string python = python_env ? python_env : "python3";
  const std::string cmd = python + " '" + script_path.string() + "' '" +
                          in_path.string() + "' '" + out_path.string() + "' 2>'" +
                          err_path.string() + "'";
  const int rc = std::system(cmd.c_str());
  if (rc != 0 || !std::filesystem::exists(out_path)) {
    std::ifstream err(err_path);
    std::stringstream tail;
    tail << err.rdbuf();
    report.message = "scipy backend failed (exit " + std::to_string(rc) + "): " +
                     tail.str().substr(0, 500);
    return report;
  }

  nlohmann::json out;
  try {
    std::ifstream result(out_path);
    result >> out;
  } catch (const std::exception& e) {
    report.message = std::string("unparsable solver output: ") + e.what();
    return report;
  }

  const std::string status = out.value("status", "error");
  if (status == "optimal") {
    std::vector<double> values = out.at("x").get<std::vector<double>>();
    if (values.size() != inst.num_vars()) {
      report.message = "solver returned wrong variable count";
      return report;
    }
    report.status = SolveStatus::Optimal;
    report.objective = out.at("objective").get<double>();
    report.solution = split_values(inst, values);
  } else if (status == "infeasible") {
    report.status = SolveStatus::Infeasible;
  } else {
    report.message = out.value("message", "unknown solver error");
  }
  return report;
}

}  // namespace detail

// Size guard for the dense builtin simplex; beyond this the tableau work is
// no longer reasonable.
inline bool builtin_can_handle(const LpInstance& inst) { return inst.num_vars() <= 400; }

inline SolveReport solve_lp(const LpInstance& inst, Backend backend = Backend::Auto) {
  const auto start = std::chrono::steady_clock::now();
  SolveReport report;
  switch (backend) {
    case Backend::Builtin:
      report = detail::solve_builtin(inst);
      break;
    case Backend::Scipy:
      report = detail::solve_scipy(inst);
      break;
    case Backend::Auto:
      report = builtin_can_handle(inst) ? detail::solve_builtin(inst)
                                        : detail::solve_scipy(inst);
      break;
  }
  report = detail::finish_report(inst, report);
  report.solve_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

inline Backend backend_from_name(const std::string& name) {
  if (name == "auto") return Backend::Auto;
  if (name == "builtin") return Backend::Builtin;
  if (name == "scipy") return Backend::Scipy;
  throw ArgumentError("unknown solver backend: " + name);
}

inline std::string backend_name(Backend b) {
  switch (b) {
    case Backend::Auto: return "auto";
    case Backend::Builtin: return "builtin";
    case Backend::Scipy: return "scipy";
  }
  return "auto";
}

}  // namespace ifxo
