#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ifxo/csv.hpp"
#include "ifxo/errors.hpp"
#include "ifxo/format.hpp"
#include "ifxo/rng.hpp"

namespace ifxo {

// A point matrix plus the bookkeeping needed to reproduce how it was made:
// scaling state, which rows were synthetically perturbed, and which rows of
// the source file each point came from.
struct Dataset {
  std::vector<double> points;  // row-major, n x dim
  std::size_t dim = 0;
  std::vector<std::string> feature_names;
  bool scaled = false;
  std::vector<std::size_t> injected_outlier_indices;  // sorted
  std::uint64_t seed = 0;
  std::vector<std::size_t> source_rows;  // original row index per point

  std::size_t n() const { return dim == 0 ? 0 : points.size() / dim; }

  double at(std::size_t row, std::size_t col) const {
    return points[row * dim + col];
  }
  double& at(std::size_t row, std::size_t col) { return points[row * dim + col]; }
};

// Smallest integer >= fraction * n, guarding against the binary
// representation of fraction nudging an exact product above its integer
// value (0.01 * 1000 must give 10, not 11).
inline std::size_t ceil_count(double fraction, std::size_t n) {
  const double target = fraction * static_cast<double>(n);
  return static_cast<std::size_t>(std::ceil(target - 1e-9));
}

inline Dataset load_csv(const std::string& path,
                        const std::vector<std::string>& feature_columns) {
  if (feature_columns.empty()) throw ArgumentError("no feature columns selected");
  const CsvTable table = read_csv(path);

  std::vector<std::size_t> col_idx;
  for (const auto& name : feature_columns) {
    auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end())
      throw DataError("column '" + name + "' not found in " + path);
    col_idx.push_back(static_cast<std::size_t>(it - table.header.begin()));
  }

  Dataset d;
  d.dim = feature_columns.size();
  d.feature_names = feature_columns;
  d.points.reserve(table.rows.size() * d.dim);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    for (std::size_t j = 0; j < col_idx.size(); ++j) {
      if (col_idx[j] >= row.size())
        throw DataError("row " + std::to_string(r + 1) + " is missing column '" +
                        feature_columns[j] + "' in " + path);
      double value = 0.0;
      if (!parse_double(row[col_idx[j]], value) || !std::isfinite(value))
        throw DataError("non-numeric cell at row " + std::to_string(r + 1) +
                        ", column '" + feature_columns[j] + "': '" +
                        row[col_idx[j]] + "'");
      d.points.push_back(value);
    }
  }
  d.source_rows.resize(d.n());
  for (std::size_t i = 0; i < d.source_rows.size(); ++i) d.source_rows[i] = i;
  return d;
}

// Per-column (x - mean) / std with population std (divide by n). Constant
// columns map to all-zeros.
inline Dataset standard_scale(const Dataset& d) {
  if (d.scaled) throw ArgumentError("dataset is already scaled");
  const std::size_t n = d.n();
  if (n == 0) throw ArgumentError("cannot scale an empty dataset");

  Dataset out = d;
  out.scaled = true;
  for (std::size_t c = 0; c < d.dim; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < n; ++r) mean += d.at(r, c);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double diff = d.at(r, c) - mean;
      var += diff * diff;
    }
    var /= static_cast<double>(n);
    const double stddev = std::sqrt(var);
    for (std::size_t r = 0; r < n; ++r)
      out.at(r, c) = stddev == 0.0 ? 0.0 : (d.at(r, c) - mean) / stddev;
  }
  return out;
}

// Uniform sample of `size` rows without replacement. Surviving rows keep
// their original relative order; source_rows records provenance.
inline Dataset sample_points(const Dataset& d, std::size_t size, std::uint64_t seed) {
  const std::size_t n = d.n();
  if (size < 1 || size > n)
    throw ArgumentError("sample size " + std::to_string(size) +
                        " out of range [1, " + std::to_string(n) + "]");

  Rng rng(seed);
  std::vector<std::size_t> picked = rng.sample_indices(n, size);
  std::sort(picked.begin(), picked.end());

  Dataset out;
  out.dim = d.dim;
  out.feature_names = d.feature_names;
  out.scaled = d.scaled;
  out.seed = seed;
  out.points.reserve(size * d.dim);
  out.source_rows.reserve(size);
  for (std::size_t idx : picked) {
    for (std::size_t c = 0; c < d.dim; ++c) out.points.push_back(d.at(idx, c));
    out.source_rows.push_back(d.source_rows[idx]);
  }
  return out;
}

// Perturbs ceil(fraction * n) distinct rows: each feature of a chosen row
// gains independent noise ~ Uniform(0, col_max), where col_max is the
// column maximum over the current points. Requires scaled input so the
// noise operates on the working representation.
inline Dataset inject_outliers(const Dataset& d, double fraction, std::uint64_t seed) {
  if (!d.scaled) throw ArgumentError("inject_outliers requires a scaled dataset");
  if (fraction < 0.0 || fraction > 1.0)
    throw ArgumentError("inject fraction must lie in [0, 1]");
  const std::size_t n = d.n();
  const std::size_t count = ceil_count(fraction, n);

  Dataset out = d;
  out.seed = seed;
  if (count == 0) return out;

  std::vector<double> col_max(d.dim, 0.0);
  for (std::size_t c = 0; c < d.dim; ++c) {
    double m = d.at(0, c);
    for (std::size_t r = 1; r < n; ++r) m = std::max(m, d.at(r, c));
    col_max[c] = m;
  }

  Rng rng(seed);
  std::vector<std::size_t> chosen = rng.sample_indices(n, count);
  std::sort(chosen.begin(), chosen.end());
  for (std::size_t row : chosen)
    for (std::size_t c = 0; c < d.dim; ++c)
      out.at(row, c) += rng.uniform(col_max[c]);

  out.injected_outlier_indices = std::move(chosen);
  return out;
}

// CSV dump plus a sidecar JSON describing how the dataset was produced.
inline void export_dataset(const Dataset& d, const std::string& csv_path,
                           const std::string& sidecar_path) {
  std::ofstream csv(csv_path);
  if (!csv) throw ArgumentError("cannot write file: " + csv_path);
  write_csv_line(csv, d.feature_names);
  for (std::size_t r = 0; r < d.n(); ++r) {
    std::vector<std::string> fields;
    fields.reserve(d.dim);
    for (std::size_t c = 0; c < d.dim; ++c) fields.push_back(format_double(d.at(r, c)));
    write_csv_line(csv, fields);
  }

  nlohmann::ordered_json meta;
  meta["seed"] = d.seed;
  meta["scaled"] = d.scaled;
  meta["injected_outlier_indices"] = d.injected_outlier_indices;
  meta["source_row_indices"] = d.source_rows;
  std::ofstream side(sidecar_path);
  if (!side) throw ArgumentError("cannot write file: " + sidecar_path);
  side << meta.dump(2) << '\n';
}

}  // namespace ifxo
