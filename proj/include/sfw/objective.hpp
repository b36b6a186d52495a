#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sfw/core.hpp"
#include "sfw/rng.hpp"

namespace sfw {

/// Sparse row-major design matrix with +-1 labels.
struct Dataset {
  std::vector<std::size_t> row_ptr{0};
  std::vector<std::uint32_t> col_idx;
  std::vector<double> values;
  std::vector<double> labels;
  std::size_t dim = 0;

  [[nodiscard]] std::size_t n_samples() const { return labels.size(); }
  [[nodiscard]] std::size_t nnz() const { return values.size(); }

  [[nodiscard]] std::span<const std::uint32_t> row_indices(std::size_t i) const {
    return {col_idx.data() + row_ptr[i], row_ptr[i + 1] - row_ptr[i]};
  }
  [[nodiscard]] std::span<const double> row_values(std::size_t i) const {
    return {values.data() + row_ptr[i], row_ptr[i + 1] - row_ptr[i]};
  }

  /// Appends a row. Indices must be 0-based and strictly increasing.
  void add_row(double label, std::span<const std::uint32_t> idx, std::span<const double> val) {
    require(label == 1.0 || label == -1.0, "Dataset: labels must be +-1");
    require(idx.size() == val.size(), "Dataset: index/value length mismatch");
    for (std::size_t t = 0; t < idx.size(); ++t) {
      require(t == 0 || idx[t] > idx[t - 1], "Dataset: indices must be strictly increasing");
      require(std::isfinite(val[t]), "Dataset: non-finite feature value");
      col_idx.push_back(idx[t]);
      values.push_back(val[t]);
      if (idx[t] + 1 > dim) dim = idx[t] + 1;
    }
    labels.push_back(label);
    row_ptr.push_back(col_idx.size());
  }

  /// First `rows` samples (or all of them when fewer exist); dim is preserved.
  [[nodiscard]] Dataset head(std::size_t rows) const {
    Dataset out;
    const std::size_t m = std::min(rows, n_samples());
    for (std::size_t i = 0; i < m; ++i) out.add_row(labels[i], row_indices(i), row_values(i));
    out.dim = dim;
    return out;
  }
};

namespace detail {

inline double parse_number(std::string_view tok, std::size_t line_no) {
  // std::from_chars rejects a leading '+', which LibSVM labels commonly carry.
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end || tok.empty()) {
    throw ValidationError("libsvm line " + std::to_string(line_no) + ": malformed number '" +
                          std::string(tok) + "'");
  }
  return v;
}

}  // namespace detail

/// Reads LibSVM text: one sample per nonempty line, "label idx:val idx:val ...",
/// with 1-based strictly increasing indices. Labels -1/+1 are kept and 0 maps
/// to -1. The resulting dim is the largest index seen (at least `min_dim`).
inline Dataset parse_libsvm(std::istream& in, std::size_t min_dim = 0) {
  Dataset ds;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::uint32_t> idx;
  std::vector<double> val;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    const double raw = detail::parse_number(tok, line_no);
    double label;
    if (raw == 1.0) {
      label = 1.0;
    } else if (raw == -1.0 || raw == 0.0) {
      label = -1.0;
    } else {
      throw ValidationError("libsvm line " + std::to_string(line_no) + ": unknown label '" + tok +
                            "'");
    }
    idx.clear();
    val.clear();
    while (ls >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size()) {
        throw ValidationError("libsvm line " + std::to_string(line_no) + ": malformed token '" +
                              tok + "'");
      }
      const std::string_view sv(tok);
      const double one_based = detail::parse_number(sv.substr(0, colon), line_no);
      if (one_based < 1.0 || one_based != std::floor(one_based) || one_based > 4.0e9) {
        throw ValidationError("libsvm line " + std::to_string(line_no) + ": bad index in '" + tok +
                              "'");
      }
      const auto j = static_cast<std::uint32_t>(one_based - 1.0);
      if (!idx.empty() && j <= idx.back()) {
        throw ValidationError("libsvm line " + std::to_string(line_no) +
                              (j == idx.back() ? ": duplicate index " : ": non-monotone index ") +
                              std::to_string(j + 1));
      }
      const double v = detail::parse_number(sv.substr(colon + 1), line_no);
      if (!std::isfinite(v)) {
        throw ValidationError("libsvm line " + std::to_string(line_no) + ": non-finite value");
      }
      idx.push_back(j);
      val.push_back(v);
    }
    ds.add_row(label, idx, val);
  }
  require(ds.n_samples() > 0, "libsvm: empty dataset");
  ds.dim = std::max(ds.dim, min_dim);
  require(ds.dim > 0, "libsvm: dataset has no features");
  return ds;
}

inline Dataset parse_libsvm_text(const std::string& text, std::size_t min_dim = 0) {
  std::istringstream in(text);
  return parse_libsvm(in, min_dim);
}

inline Dataset load_libsvm(const std::string& path, std::size_t min_dim = 0) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open dataset '" + path + "'");
  return parse_libsvm(in, min_dim);
}

/// Smoothness constants of the logistic objective.
struct ObjectiveMeta {
  double L = 0.0;              // smoothness of f
  std::vector<double> L_i;     // per-sample smoothness |a_i|^2 / 4
  double L_tilde = 0.0;        // sqrt(mean L_i^2)
};

/// Assignment of sample indices to workers. Groups are disjoint and cover all
/// samples.
struct Partition {
  std::vector<std::vector<std::size_t>> groups;

  [[nodiscard]] std::size_t n_workers() const { return groups.size(); }

  /// Contiguous blocks whose sizes differ by at most one; keeps neighbouring
  /// (and typically similar) samples on the same worker.
  static Partition contiguous(std::size_t n_samples, std::size_t n_workers) {
    require(n_workers >= 1, "Partition: n_workers must be >= 1");
    require(n_workers <= n_samples, "Partition: more workers than samples");
    Partition part;
    part.groups.resize(n_workers);
    const std::size_t base = n_samples / n_workers;
    const std::size_t extra = n_samples % n_workers;
    std::size_t next = 0;
    for (std::size_t w = 0; w < n_workers; ++w) {
      const std::size_t size = base + (w < extra ? 1 : 0);
      for (std::size_t t = 0; t < size; ++t) part.groups[w].push_back(next++);
    }
    return part;
  }

  static Partition shuffled(std::size_t n_samples, std::size_t n_workers, std::uint64_t seed) {
    Partition part = contiguous(n_samples, n_workers);
    std::vector<std::size_t> perm(n_samples);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    RngStream rng(seed, kServerStream, 0, 7);
    for (std::size_t i = n_samples; i > 1; --i) std::swap(perm[i - 1], perm[rng.uniform_index(i)]);
    for (auto& g : part.groups) {
      for (auto& i : g) i = perm[i];
      std::sort(g.begin(), g.end());
    }
    return part;
  }
};

/// f(x) = (1/n) sum_i log(1 + exp(-b_i <a_i, x>)) over a sparse dataset.
/// Immutable after construction; all queries are const and thread-safe.
class LogisticObjective {
 public:
  explicit LogisticObjective(Dataset data) : data_(std::move(data)) {
    require(data_.n_samples() > 0, "LogisticObjective: empty dataset");
    build_columns();
  }

  [[nodiscard]] const Dataset& data() const { return data_; }
  [[nodiscard]] std::size_t n_samples() const { return data_.n_samples(); }
  [[nodiscard]] std::size_t dim() const { return data_.dim; }

  [[nodiscard]] double margin(std::size_t i, std::span<const double> x) const {
    const auto idx = data_.row_indices(i);
    const auto val = data_.row_values(i);
    double m = 0.0;
    for (std::size_t t = 0; t < idx.size(); ++t) m += val[t] * x[idx[t]];
    return m;
  }

  // log(1 + exp(z)) without overflow.
  static double softplus(double z) {
    return z > 35.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
  }

  static double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
  }

  [[nodiscard]] double sample_value(std::size_t i, std::span<const double> x) const {
    check_index(i);
    return softplus(-data_.labels[i] * margin(i, x));
  }

  [[nodiscard]] double value(std::span<const double> x) const {
    check_dim(x);
    double s = 0.0;
    for (std::size_t i = 0; i < n_samples(); ++i) s += softplus(-data_.labels[i] * margin(i, x));
    return s / static_cast<double>(n_samples());
  }

  /// Mean loss over a subset of samples (a worker shard).
  [[nodiscard]] double subset_value(std::span<const std::size_t> rows,
                                    std::span<const double> x) const {
    check_dim(x);
    require(!rows.empty(), "LogisticObjective: empty index set");
    double s = 0.0;
    for (std::size_t i : rows) s += sample_value(i, x);
    return s / static_cast<double>(rows.size());
  }

  /// out += scale * grad f_i(x).
  void add_sample_gradient(std::size_t i, std::span<const double> x, double scale,
                           std::span<double> out) const {
    check_index(i);
    const double b = data_.labels[i];
    const double coef = -b * sigmoid(-b * margin(i, x)) * scale;
    const auto idx = data_.row_indices(i);
    const auto val = data_.row_values(i);
    for (std::size_t t = 0; t < idx.size(); ++t) out[idx[t]] += coef * val[t];
  }

  [[nodiscard]] Vector sample_gradient(std::size_t i, std::span<const double> x) const {
    check_dim(x);
    Vector g(dim(), 0.0);
    add_sample_gradient(i, x, 1.0, g);
    return g;
  }

  /// (1/|S|) sum_{i in S} grad f_i(x).
  [[nodiscard]] Vector batch_gradient(std::span<const std::size_t> rows,
                                      std::span<const double> x) const {
    check_dim(x);
    require(!rows.empty(), "LogisticObjective: empty index set");
    Vector g(dim(), 0.0);
    const double scale = 1.0 / static_cast<double>(rows.size());
    for (std::size_t i : rows) add_sample_gradient(i, x, scale, g);
    return g;
  }

  [[nodiscard]] Vector full_gradient(std::span<const double> x) const {
    check_dim(x);
    Vector g(dim(), 0.0);
    const double scale = 1.0 / static_cast<double>(n_samples());
    for (std::size_t i = 0; i < n_samples(); ++i) add_sample_gradient(i, x, scale, g);
    return g;
  }

  /// j-th entry of the full gradient, touching only the rows that contain j.
  [[nodiscard]] double partial_derivative(std::size_t j, std::span<const double> x) const {
    check_dim(x);
    require(j < dim(), "LogisticObjective: coordinate out of range");
    double s = 0.0;
    for (std::size_t t = col_ptr_[j]; t < col_ptr_[j + 1]; ++t) {
      const std::size_t i = col_rows_[t];
      const double b = data_.labels[i];
      s += -b * sigmoid(-b * margin(i, x)) * col_vals_[t];
    }
    return s / static_cast<double>(n_samples());
  }

  /// L_i = |a_i|^2 / 4; L = lambda_max(A^T A) / (4n) by 50 power iterations.
  [[nodiscard]] ObjectiveMeta smoothness_constants() const {
    ObjectiveMeta meta;
    const std::size_t n = n_samples();
    meta.L_i.resize(n);
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      meta.L_i[i] = squared_norm(data_.row_values(i)) / 4.0;
      sum_sq += meta.L_i[i] * meta.L_i[i];
    }
    meta.L_tilde = std::sqrt(sum_sq / static_cast<double>(n));

    Vector v(dim(), 1.0 / std::sqrt(static_cast<double>(dim())));
    double lambda = 0.0;
    for (int it = 0; it < 50; ++it) {
      Vector w(dim(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const double m = margin(i, v);
        const auto idx = data_.row_indices(i);
        const auto val = data_.row_values(i);
        for (std::size_t t = 0; t < idx.size(); ++t) w[idx[t]] += m * val[t];
      }
      const double nw = std::sqrt(squared_norm(w));
      lambda = nw;  // |A^T A v| with |v| = 1
      if (nw == 0.0) break;
      for (std::size_t j = 0; j < dim(); ++j) v[j] = w[j] / nw;
    }
    meta.L = lambda / (4.0 * static_cast<double>(n));
    return meta;
  }

 private:
  void check_dim(std::span<const double> x) const {
    require(x.size() == dim(), "LogisticObjective: vector length does not match dim");
  }
  void check_index(std::size_t i) const {
    require(i < n_samples(), "LogisticObjective: sample index out of range");
  }

  void build_columns() {
    col_ptr_.assign(dim() + 1, 0);
    for (auto j : data_.col_idx) ++col_ptr_[j + 1];
    for (std::size_t j = 0; j < dim(); ++j) col_ptr_[j + 1] += col_ptr_[j];
    col_rows_.resize(data_.nnz());
    col_vals_.resize(data_.nnz());
    std::vector<std::size_t> fill(col_ptr_.begin(), col_ptr_.end() - 1);
    for (std::size_t i = 0; i < n_samples(); ++i) {
      for (std::size_t t = data_.row_ptr[i]; t < data_.row_ptr[i + 1]; ++t) {
        const std::size_t pos = fill[data_.col_idx[t]]++;
        col_rows_[pos] = i;
        col_vals_[pos] = data_.values[t];
      }
    }
  }

  Dataset data_;
  std::vector<std::size_t> col_ptr_;
  std::vector<std::size_t> col_rows_;
  std::vector<double> col_vals_;
};

}  // namespace sfw
