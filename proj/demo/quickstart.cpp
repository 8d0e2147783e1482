// Minimal library walkthrough: build a small dataset with one far-away
// point, solve the relaxation, round, and print what happened.

#include <cstdio>

#include "ifxo/ifxo.hpp"

int main() {
  ifxo::Dataset d;
  d.dim = 1;
  d.feature_names = {"value"};
  d.scaled = true;  // already in working coordinates
  d.points = {0.0, 0.2, 0.4, 0.6, 5.0, 5.2, 5.4, 5.6, 12.0};
  d.source_rows.resize(d.n());
  for (std::size_t i = 0; i < d.n(); ++i) d.source_rows[i] = i;

  ifxo::PipelineParams params;
  params.k = 2;
  params.p = 2;
  params.m = 1;

  const ifxo::RunOutput out = ifxo::run_pipeline(d, params);
  std::printf("relaxation objective: %.6f\n", out.record.lp_star);
  std::printf("repaired objective:   %.6f\n", out.record.lp_prime);
  std::printf("clustering cost:      %.6f\n", out.record.fr_cost);
  std::printf("outliers detected:    %zu\n", out.record.n_outliers_detected);
  std::printf("centers:");
  for (std::size_t s : out.clustering.centers) std::printf(" %zu", s);
  std::printf("\nmax fairness ratio:   %.3f\n", out.record.max_fairness_ratio);
  return 0;
}
