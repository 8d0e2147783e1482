#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <vector>

#include "ifxo/dataset.hpp"
#include "support/synthetic.hpp"
#include "support/temp_dir.hpp"

using namespace ifxo;
using ifxo::testing::TempDir;

TEST_CASE("load_csv parses selected numeric columns") {
  TempDir tmp;
  const auto path = tmp.write("points.csv", "v\n0\n2\n4\n");
  const Dataset d = load_csv(path, {"v"});
  REQUIRE(d.n() == 3);
  REQUIRE(d.dim == 1);
  CHECK(d.at(0, 0) == 0.0);
  CHECK(d.at(1, 0) == 2.0);
  CHECK(d.at(2, 0) == 4.0);
  CHECK_FALSE(d.scaled);
  CHECK(d.source_rows == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("load_csv keeps row order and ignores unselected columns") {
  TempDir tmp;
  const auto path = tmp.write("mixed.csv", "a,b,c\n1,x,10\n2,y,20\n");
  const Dataset d = load_csv(path, {"c", "a"});
  REQUIRE(d.n() == 2);
  CHECK(d.at(0, 0) == 10.0);
  CHECK(d.at(0, 1) == 1.0);
  CHECK(d.at(1, 0) == 20.0);
}

TEST_CASE("load_csv error paths") {
  TempDir tmp;
  CHECK_THROWS_AS(load_csv(tmp.file("absent.csv"), {"v"}), ArgumentError);

  const auto path = tmp.write("bad.csv", "a,b\n1,2\n3,abc\n");
  CHECK_THROWS_AS(load_csv(path, {"missing"}), DataError);
  CHECK_THROWS_WITH(load_csv(path, {"b"}),
                    Catch::Matchers::ContainsSubstring("row 2") &&
                        Catch::Matchers::ContainsSubstring("'b'"));
}

TEST_CASE("standard_scale matches the direct formula") {
  TempDir tmp;
  const auto path = tmp.write("col.csv", "v\n0\n2\n4\n");
  const Dataset scaled = standard_scale(load_csv(path, {"v"}));

  // Independent computation: mean 2, population std sqrt(8/3).
  const double expected = 2.0 / std::sqrt(8.0 / 3.0);
  CHECK(scaled.at(0, 0) == Catch::Approx(-expected).epsilon(1e-12));
  CHECK(scaled.at(1, 0) == Catch::Approx(0.0).margin(1e-12));
  CHECK(scaled.at(2, 0) == Catch::Approx(expected).epsilon(1e-12));
  CHECK(scaled.scaled);
}

TEST_CASE("standard_scale maps constant columns to zero") {
  TempDir tmp;
  const auto path = tmp.write("const.csv", "v,w\n5,1\n5,2\n5,3\n");
  const Dataset scaled = standard_scale(load_csv(path, {"v", "w"}));
  for (std::size_t r = 0; r < 3; ++r) CHECK(scaled.at(r, 0) == 0.0);
}

TEST_CASE("standard_scale rejects empty and already scaled input") {
  Dataset empty;
  empty.dim = 1;
  empty.feature_names = {"v"};
  CHECK_THROWS_AS(standard_scale(empty), ArgumentError);

  Dataset once = testing::make_bank_like(20, 7);
  const Dataset scaled = standard_scale(once);
  CHECK_THROWS_AS(standard_scale(scaled), ArgumentError);
}

TEST_CASE("scaled columns have zero mean and unit population std") {
  const Dataset scaled = standard_scale(testing::make_adult_like(150, 3));
  const std::size_t n = scaled.n();
  for (std::size_t c = 0; c < scaled.dim; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < n; ++r) mean += scaled.at(r, c);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double diff = scaled.at(r, c) - mean;
      var += diff * diff;
    }
    var /= static_cast<double>(n);
    CHECK(std::fabs(mean) < 1e-9);
    CHECK(std::fabs(std::sqrt(var) - 1.0) < 1e-9);
  }
}

TEST_CASE("sample_points with size n keeps every row") {
  const Dataset d = testing::make_diabetes_like(40, 11);
  const Dataset s = sample_points(d, 40, 123);
  CHECK(s.points == d.points);  // ascending index order preserves rows exactly
  CHECK(s.source_rows == d.source_rows);
}

TEST_CASE("sample_points is deterministic and tracks provenance") {
  const Dataset d = testing::make_bank_like(200, 5);
  const Dataset a = sample_points(d, 50, 99);
  const Dataset b = sample_points(d, 50, 99);
  REQUIRE(a.n() == 50);
  CHECK(a.points == b.points);
  CHECK(a.source_rows == b.source_rows);

  const Dataset c = sample_points(d, 50, 100);
  CHECK(a.source_rows != c.source_rows);  // different seed, different rows

  // Provenance maps back to the original rows.
  for (std::size_t i = 0; i < a.n(); ++i)
    for (std::size_t f = 0; f < a.dim; ++f)
      CHECK(a.at(i, f) == d.at(a.source_rows[i], f));
}

TEST_CASE("sample_points rejects bad sizes") {
  const Dataset d = testing::make_diabetes_like(10, 1);
  CHECK_THROWS_AS(sample_points(d, 11, 0), ArgumentError);
  CHECK_THROWS_AS(sample_points(d, 0, 0), ArgumentError);
}

TEST_CASE("ceil_count avoids floating point overshoot") {
  CHECK(ceil_count(0.01, 1000) == 10);
  CHECK(ceil_count(0.01, 101) == 2);
  CHECK(ceil_count(0.0, 50) == 0);
  CHECK(ceil_count(1.0, 50) == 50);
  CHECK(ceil_count(0.015, 1000) == 15);
}

TEST_CASE("inject_outliers with fraction zero is a no-op") {
  const Dataset d = standard_scale(testing::make_bank_like(30, 2));
  const Dataset out = inject_outliers(d, 0.0, 42);
  CHECK(out.points == d.points);
  CHECK(out.injected_outlier_indices.empty());
}

TEST_CASE("inject_outliers perturbs exactly ceil(fraction*n) rows upward") {
  const Dataset d = standard_scale(testing::make_bank_like(1000, 8));
  const Dataset out = inject_outliers(d, 0.01, 42);
  REQUIRE(out.injected_outlier_indices.size() == 10);

  std::set<std::size_t> changed;
  for (std::size_t r = 0; r < d.n(); ++r)
    for (std::size_t c = 0; c < d.dim; ++c) {
      CHECK(out.at(r, c) >= d.at(r, c));  // noise is nonnegative
      if (out.at(r, c) != d.at(r, c)) changed.insert(r);
    }
  const std::set<std::size_t> recorded(out.injected_outlier_indices.begin(),
                                       out.injected_outlier_indices.end());
  CHECK(changed == recorded);
}

TEST_CASE("inject_outliers requires a scaled dataset") {
  const Dataset raw = testing::make_bank_like(10, 3);
  CHECK_THROWS_AS(inject_outliers(raw, 0.5, 1), ArgumentError);
  const Dataset scaled = standard_scale(raw);
  CHECK_THROWS_AS(inject_outliers(scaled, 1.5, 1), ArgumentError);
}

TEST_CASE("injected noise stays within [0, col_max] over 1e4 draws") {
  // Single column with maximum exactly 2.0; perturb every row.
  Dataset d;
  d.dim = 1;
  d.feature_names = {"v"};
  d.scaled = true;
  const std::size_t n = 10000;
  Rng fill(77);
  d.points.reserve(n);
  for (std::size_t i = 0; i + 1 < n; ++i) d.points.push_back(fill.uniform(2.0) - 1.0);
  d.points.push_back(2.0);  // pin the maximum
  d.source_rows.resize(n);

  const Dataset out = inject_outliers(d, 1.0, 5);
  REQUIRE(out.injected_outlier_indices.size() == n);
  for (std::size_t r = 0; r < n; ++r) {
    const double noise = out.at(r, 0) - d.at(r, 0);
    CHECK(noise >= 0.0);
    CHECK(noise <= 2.0);
  }
}

TEST_CASE("load-scale-sample-inject chain is bit-identical across runs") {
  TempDir tmp;
  const Dataset raw = testing::make_bank_like(300, 21);
  export_dataset(raw, tmp.file("d.csv"), tmp.file("d.json"));

  const auto chain = [&] {
    Dataset d = load_csv(tmp.file("d.csv"), {"age", "balance", "duration"});
    d = standard_scale(d);
    d = sample_points(d, 120, 9);
    return inject_outliers(d, 0.05, 9);
  };
  const Dataset a = chain();
  const Dataset b = chain();
  CHECK(a.points == b.points);
  CHECK(a.injected_outlier_indices == b.injected_outlier_indices);
  CHECK(a.source_rows == b.source_rows);
}

TEST_CASE("export_dataset round-trips exactly and writes the sidecar") {
  TempDir tmp;
  Dataset d = standard_scale(testing::make_diabetes_like(25, 4));
  d = inject_outliers(d, 0.1, 17);
  export_dataset(d, tmp.file("out.csv"), tmp.file("out.json"));

  const Dataset back = load_csv(tmp.file("out.csv"), d.feature_names);
  REQUIRE(back.n() == d.n());
  CHECK(back.points == d.points);  // shortest round-trip formatting is exact

  const auto meta = nlohmann::json::parse(testing::slurp(tmp.file("out.json")));
  CHECK(meta.at("seed").get<std::uint64_t>() == 17);
  CHECK(meta.at("scaled").get<bool>());
  CHECK(meta.at("injected_outlier_indices").get<std::vector<std::size_t>>() ==
        d.injected_outlier_indices);
  CHECK(meta.at("source_row_indices").get<std::vector<std::size_t>>() == d.source_rows);
}
