#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "ifxo/lp_solve.hpp"
#include "ifxo/out_round.hpp"
#include "support/synthetic.hpp"
#include "support/temp_dir.hpp"

using namespace ifxo;

namespace {

// Hand-assembled solution over the line A=0, B=1, C=10 (k=2): C is flagged
// as an outlier while fractionally open, so its opening and the assignment
// mass pointing at it must migrate to B, its nearest inlier.
struct TraceFixture {
  MetricContext ctx;
  FractionalSolution sol;

  TraceFixture() {
    ctx = build_metric(testing::line_dataset({0, 1, 10}), 2);
    sol.x_support = {{0, 0}, {0, 2}, {1, 1}};
    sol.x = {0.8, 0.2, 1.0};
    sol.y = {0.6, 1.0, 0.4};
    sol.z = {0.0, 0.0, 1.0};
  }
};

double row_sum(const RoundedFractional& rf, std::size_t v) {
  double total = 0.0;
  for (const auto& [u, val] : rf.x_prime[v]) total += val;
  return total;
}

}  // namespace

TEST_CASE("all-zero indicators leave the solution untouched") {
  const MetricContext ctx = build_metric(testing::line_dataset({0, 1, 10}), 1);
  const LpInstance inst = build_lp(ctx, 1, 1, 0, 1.0);
  const SolveReport report = solve_lp(inst, Backend::Builtin);
  REQUIRE(report.status == SolveStatus::Optimal);

  const RoundedFractional rf = out_round(ctx, report.solution, 0.0);
  CHECK(rf.outlier_indices.empty());
  CHECK(rf.reassignments.empty());
  CHECK(rf.y_prime == report.solution.y);
  for (std::size_t i = 0; i < report.solution.x.size(); ++i) {
    const auto [v, u] = report.solution.x_support[i];
    if (report.solution.x[i] != 0.0)
      CHECK(rf.x_prime[v].at(u) == report.solution.x[i]);
  }
  CHECK(rounded_cost(ctx, rf, 1) == Catch::Approx(lp_cost(inst, report.solution.x)));
}

TEST_CASE("hand trace: open outlier hands its mass to the nearest inlier") {
  TraceFixture fx;
  const RoundedFractional rf = out_round(fx.ctx, fx.sol, 0.0);

  CHECK(rf.outlier_indices == std::vector<std::size_t>{2});
  REQUIRE(rf.reassignments.size() == 1);
  CHECK(rf.reassignments[0].u_out == 2);
  CHECK(rf.reassignments[0].u_prime == 1);  // d(C,B)=9 beats d(C,A)=10
  CHECK(rf.reassignments[0].moved_mass == Catch::Approx(0.4));

  CHECK(rf.y_prime == std::vector<double>{0.6, 1.0, 0.0});
  CHECK(rf.x_prime[0].at(0) == Catch::Approx(0.8));
  CHECK(rf.x_prime[0].at(1) == Catch::Approx(0.2));  // moved, no clip: y'_B = 1
  CHECK(rf.x_prime[0].count(2) == 0);
  CHECK(rf.x_prime[1].at(1) == Catch::Approx(1.0));
  CHECK(rf.x_prime[2].empty());

  CHECK(rf.lemma.checks == 1);
  CHECK(rf.lemma.max_excess <= 0.0);  // d(A,B)=1 <= 2 d(A,C)=20
  CHECK(rf.coverage_deficit.empty());
  CHECK(rf.zero_deficit());
}

TEST_CASE("thresholding respects tau") {
  TraceFixture fx;
  fx.sol.z = {0.0, 0.3, 1.0};
  const RoundedFractional low = out_round(fx.ctx, fx.sol, 0.0);
  CHECK(low.outlier_indices == std::vector<std::size_t>{1, 2});
  const RoundedFractional high = out_round(fx.ctx, fx.sol, 0.5);
  CHECK(high.outlier_indices == std::vector<std::size_t>{2});
  CHECK_THROWS_AS(out_round(fx.ctx, fx.sol, -0.1), ArgumentError);
}

TEST_CASE("clipping caps received mass at the new opening") {
  // B receives C's mass but its opening saturates below the combined
  // assignment, so the overflow is clipped and recorded as a deficit.
  MetricContext ctx = build_metric(testing::line_dataset({0, 1, 10}), 2);
  FractionalSolution sol;
  sol.x_support = {{0, 0}, {0, 1}, {0, 2}, {1, 1}};
  sol.x = {0.3, 0.3, 0.4, 1.0};
  sol.y = {0.3, 0.4, 0.5};
  sol.z = {0.0, 0.0, 1.0};

  const RoundedFractional rf = out_round(ctx, sol, 0.0);
  CHECK(rf.y_prime[1] == Catch::Approx(0.9));  // 0.4 + 0.5
  // x'_{0,1} = 0.3 + 0.4 = 0.7 <= 0.9: no clip here.
  CHECK(rf.x_prime[0].at(1) == Catch::Approx(0.7));
  CHECK(rf.zero_deficit());

  sol.y = {0.3, 0.4, 0.2};
  sol.x[2] = 0.4;
  const RoundedFractional clipped = out_round(ctx, sol, 0.0);
  CHECK(clipped.y_prime[1] == Catch::Approx(0.6));
  // 0.3 + 0.4 = 0.7 exceeds y' = 0.6: clipped by 0.1.
  CHECK(clipped.x_prime[0].at(1) == Catch::Approx(0.6));
  CHECK(clipped.clipped_mass == Catch::Approx(0.1));
  CHECK(clipped.coverage_deficit.size() == 1);
  CHECK(clipped.coverage_deficit.at(0) == Catch::Approx(0.1));
  CHECK_FALSE(clipped.zero_deficit());
}

TEST_CASE("marking every point as an outlier is rejected") {
  TraceFixture fx;
  fx.sol.z = {1.0, 1.0, 1.0};
  CHECK_THROWS_AS(out_round(fx.ctx, fx.sol, 0.0), InfeasibleModel);
}

TEST_CASE("outlier rows and columns vanish, support stays within 2r") {
  Rng rng(27);
  for (int trial = 0; trial < 25; ++trial) {
    const Dataset d = testing::random_tiny(rng, 5, 10);
    const std::size_t k = 1 + rng.below(3);
    const std::size_t m = 1 + rng.below(2);
    const int p = rng.below(2) ? 1 : 2;
    const MetricContext ctx = build_metric(d, k);
    const LpInstance inst = build_lp(ctx, p, k, m, 1.0);
    const SolveReport report = solve_lp(inst, Backend::Builtin);
    REQUIRE(report.status == SolveStatus::Optimal);
    const RoundedFractional rf = out_round(ctx, report.solution, 0.0);

    for (std::size_t v : rf.outlier_indices) {
      CHECK(rf.x_prime[v].empty());
      CHECK(rf.y_prime[v] == 0.0);
    }
    double total_prime = 0.0;
    for (std::size_t v = 0; v < ctx.n; ++v) {
      for (const auto& [u, val] : rf.x_prime[v]) {
        CHECK_FALSE(static_cast<bool>(rf.is_outlier[u]));
        CHECK(val <= rf.y_prime[u] + 1e-12);
        CHECK(ctx.d(v, u) <= 2.0 * ctx.fair_radius[v] + 1e-12);
        total_prime += val;
      }
      if (!rf.is_outlier[v]) {
        const double deficit = std::max(0.0, 1.0 - row_sum(rf, v));
        const double recorded =
            rf.coverage_deficit.count(v) ? rf.coverage_deficit.at(v) : 0.0;
        CHECK(deficit == Catch::Approx(recorded).margin(1e-11));
      }
    }
    // Mass only moves or shrinks.
    double total_star = 0.0;
    for (double xi : report.solution.x) total_star += xi;
    CHECK(total_prime <= total_star + 1e-9);
    // Opening mass never grows either.
    double y_star = 0.0, y_prime = 0.0;
    for (std::size_t u = 0; u < ctx.n; ++u) {
      y_star += report.solution.y[u];
      y_prime += rf.y_prime[u];
    }
    CHECK(y_prime <= y_star + 1e-9);
  }
}

TEST_CASE("repair is deterministic") {
  TraceFixture fx;
  const RoundedFractional a = out_round(fx.ctx, fx.sol, 0.0);
  const RoundedFractional b = out_round(fx.ctx, fx.sol, 0.0);
  CHECK(a.y_prime == b.y_prime);
  CHECK(a.outlier_indices == b.outlier_indices);
  for (std::size_t v = 0; v < a.x_prime.size(); ++v) {
    REQUIRE(a.x_prime[v].size() == b.x_prime[v].size());
    for (const auto& [u, val] : a.x_prime[v]) CHECK(b.x_prime[v].at(u) == val);
  }
}

TEST_CASE("audit export captures the trail") {
  testing::TempDir tmp;
  TraceFixture fx;
  const RoundedFractional rf = out_round(fx.ctx, fx.sol, 0.0);
  export_audit(rf, tmp.file("audit.json"));
  const auto doc = nlohmann::json::parse(testing::slurp(tmp.file("audit.json")));
  CHECK(doc.at("outlier_indices") == nlohmann::json::array({2}));
  CHECK(doc.at("reassignments").size() == 1);
  CHECK(doc.at("reassignments")[0].at("u_prime") == 1);
  CHECK(doc.at("lemma").at("checks") == 1);
  CHECK(doc.at("clipped_mass").get<double>() == 0.0);
}
