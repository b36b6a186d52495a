#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "sfw/core.hpp"
#include "sfw/objective.hpp"
#include "sfw/rng.hpp"

namespace sfw {

/// Gradient estimator g^k plugged into the Frank-Wolfe step.
///
/// init(x0) builds g^0 from x0; update(x_next, x_curr, k) produces g^{k+1}
/// from the new iterate x^{k+1} = x_next and the previous one x^k = x_curr,
/// drawing its randomness from the counter-based stream of iteration k.
/// Estimators are single-owner mutable objects. Copying one snapshots its
/// complete state, which is how the tests enumerate every random outcome.
class GradientEstimator {
 public:
  virtual ~GradientEstimator() = default;

  virtual void init(std::span<const double> x0) = 0;
  virtual void update(std::span<const double> x_next, std::span<const double> x_curr,
                      std::uint64_t k) = 0;

  [[nodiscard]] const Vector& gradient() const { return g_; }
  [[nodiscard]] const Counters& counters() const { return counters_; }

  /// Current value of the auxiliary variance sequence, where it is cheap.
  [[nodiscard]] virtual std::optional<double> sigma_sq() const { return std::nullopt; }

  /// Largest violation of a server/worker bookkeeping identity (distributed
  /// methods); zero for single-machine estimators.
  [[nodiscard]] virtual double consistency_error() const { return 0.0; }

 protected:
  Vector g_;
  Counters counters_;
};

/// Which snapshot of a memory table the gradient formula reads when the same
/// step also refreshes the table.
enum class MemoryRead {
  before_refresh,  // pre-update table: keeps SAGA/SEGA unbiased for any memory state
  after_refresh,   // post-update table, literally as the update is usually printed
};

namespace detail {

inline void check_batch(std::size_t b, std::size_t n) {
  require(b >= 1, "estimator: batch size must be >= 1");
  require(b <= n, "estimator: batch size exceeds number of samples");
}

inline void check_probability(double p) {
  require(p > 0.0 && p <= 1.0, "estimator: probability must lie in (0, 1]");
}

}  // namespace detail

/// Exact gradient every step: classical Frank-Wolfe.
class DeterministicEstimator final : public GradientEstimator {
 public:
  explicit DeterministicEstimator(const LogisticObjective& obj) : obj_(&obj) {}

  void init(std::span<const double> x0) override { refresh(x0); }
  void update(std::span<const double> x_next, std::span<const double>, std::uint64_t) override {
    refresh(x_next);
  }

 private:
  void refresh(std::span<const double> x) {
    g_ = obj_->full_gradient(x);
    counters_.grad_calls += obj_->n_samples();
  }
  const LogisticObjective* obj_;
};

/// Loopless SVRG: with probability p the anchor w jumps to x^k and grad f(w)
/// is recomputed; g = (1/b) sum_S [grad f_i(x^{k+1}) - grad f_i(w)] + grad f(w).
class LsvrgEstimator final : public GradientEstimator {
 public:
  struct Draw {
    bool refresh = false;
    std::vector<std::size_t> batch;
  };

  LsvrgEstimator(const LogisticObjective& obj, double p, std::size_t b, std::uint64_t seed)
      : obj_(&obj), p_(p), b_(b), seed_(seed) {
    detail::check_probability(p);
    detail::check_batch(b, obj.n_samples());
  }

  void init(std::span<const double> x0) override {
    w_.assign(x0.begin(), x0.end());
    grad_w_ = obj_->full_gradient(w_);
    counters_.grad_calls += obj_->n_samples();
    g_ = grad_w_;
    last_x_ = w_;
  }

  [[nodiscard]] Draw draw(std::uint64_t k) const {
    RngStream rng(seed_, 0, k);
    Draw d;
    d.refresh = rng.bernoulli(p_);
    d.batch = rng.subset(obj_->n_samples(), b_);
    return d;
  }

  void apply(std::span<const double> x_next, std::span<const double> x_curr, const Draw& d) {
    if (d.refresh) {
      w_.assign(x_curr.begin(), x_curr.end());
      grad_w_ = obj_->full_gradient(w_);
      counters_.grad_calls += obj_->n_samples();
    }
    Vector g = grad_w_;
    const double scale = 1.0 / static_cast<double>(d.batch.size());
    for (std::size_t i : d.batch) {
      obj_->add_sample_gradient(i, x_next, scale, g);
      obj_->add_sample_gradient(i, w_, -scale, g);
    }
    counters_.grad_calls += 2 * d.batch.size();
    g_ = std::move(g);
    last_x_.assign(x_next.begin(), x_next.end());
  }

  void update(std::span<const double> x_next, std::span<const double> x_curr,
              std::uint64_t k) override {
    apply(x_next, x_curr, draw(k));
  }

  [[nodiscard]] std::optional<double> sigma_sq() const override {
    return squared_distance(last_x_, w_);
  }

  [[nodiscard]] const Vector& anchor() const { return w_; }
  [[nodiscard]] double p() const { return p_; }
  [[nodiscard]] std::size_t batch() const { return b_; }

 private:
  const LogisticObjective* obj_;
  double p_;
  std::size_t b_;
  std::uint64_t seed_;
  Vector w_, grad_w_, last_x_;
};

/// Loopless SARAH: with probability p a full gradient at x^{k+1}, otherwise the
/// recursive correction g + (1/b) sum_S [grad f_i(x^{k+1}) - grad f_i(x^k)].
class SarahEstimator final : public GradientEstimator {
 public:
  struct Draw {
    bool full = false;
    std::vector<std::size_t> batch;  // unused when full
  };

  SarahEstimator(const LogisticObjective& obj, double p, std::size_t b, std::uint64_t seed)
      : obj_(&obj), p_(p), b_(b), seed_(seed) {
    detail::check_probability(p);
    detail::check_batch(b, obj.n_samples());
  }

  void init(std::span<const double> x0) override {
    g_ = obj_->full_gradient(x0);
    counters_.grad_calls += obj_->n_samples();
  }

  [[nodiscard]] Draw draw(std::uint64_t k) const {
    RngStream rng(seed_, 0, k);
    Draw d;
    d.full = rng.bernoulli(p_);
    if (!d.full) d.batch = rng.subset(obj_->n_samples(), b_);
    return d;
  }

  void apply(std::span<const double> x_next, std::span<const double> x_curr, const Draw& d) {
    if (d.full) {
      g_ = obj_->full_gradient(x_next);
      counters_.grad_calls += obj_->n_samples();
      return;
    }
    const double scale = 1.0 / static_cast<double>(d.batch.size());
    for (std::size_t i : d.batch) {
      obj_->add_sample_gradient(i, x_next, scale, g_);
      obj_->add_sample_gradient(i, x_curr, -scale, g_);
    }
    counters_.grad_calls += 2 * d.batch.size();
  }

  void update(std::span<const double> x_next, std::span<const double> x_curr,
              std::uint64_t k) override {
    apply(x_next, x_curr, draw(k));
  }

  /// Sets g directly; used to probe the recursion from arbitrary states.
  void set_gradient(Vector g) { g_ = std::move(g); }

 private:
  const LogisticObjective* obj_;
  double p_;
  std::size_t b_;
  std::uint64_t seed_;
};

/// Per-sample gradient table y_1..y_n with its incrementally maintained mean.
class GradientTable {
 public:
  GradientTable() = default;
  GradientTable(const LogisticObjective& obj, std::span<const double> x)
      : n_(obj.n_samples()), dim_(obj.dim()), table_(n_ * dim_, 0.0), mean_(dim_, 0.0) {
    const double inv_n = 1.0 / static_cast<double>(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      obj.add_sample_gradient(i, x, 1.0, mutable_row(i));
      axpy(inv_n, row(i), mean_);
    }
  }

  [[nodiscard]] std::span<const double> row(std::size_t i) const {
    return {table_.data() + i * dim_, dim_};
  }
  [[nodiscard]] const Vector& mean() const { return mean_; }

  /// Replaces y_i with `value`, updating the mean in O(dim).
  void assign(std::size_t i, std::span<const double> value) {
    auto r = mutable_row(i);
    const double inv_n = 1.0 / static_cast<double>(n_);
    for (std::size_t j = 0; j < dim_; ++j) {
      mean_[j] += (value[j] - r[j]) * inv_n;
      r[j] = value[j];
    }
  }

  /// Mean recomputed from scratch; the invariant is mean() == recomputed_mean().
  [[nodiscard]] Vector recomputed_mean() const {
    Vector m(dim_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) axpy(1.0 / static_cast<double>(n_), row(i), m);
    return m;
  }

 private:
  std::span<double> mutable_row(std::size_t i) { return {table_.data() + i * dim_, dim_}; }

  std::size_t n_ = 0, dim_ = 0;
  Vector table_;
  Vector mean_;
};

/// SAGA: table entries for the sampled indices are refreshed to grad f_i(x^k),
/// g = (1/b) sum_S [grad f_i(x^{k+1}) - y_i] + mean(y).
class SagaEstimator final : public GradientEstimator {
 public:
  struct Draw {
    std::vector<std::size_t> batch;
  };

  SagaEstimator(const LogisticObjective& obj, std::size_t b, std::uint64_t seed,
                MemoryRead read = MemoryRead::before_refresh)
      : obj_(&obj), b_(b), seed_(seed), read_(read) {
    detail::check_batch(b, obj.n_samples());
  }

  void init(std::span<const double> x0) override {
    table_ = GradientTable(*obj_, x0);
    counters_.grad_calls += obj_->n_samples();
    g_ = table_.mean();
    last_x_.assign(x0.begin(), x0.end());
  }

  [[nodiscard]] Draw draw(std::uint64_t k) const {
    RngStream rng(seed_, 0, k);
    return {rng.subset(obj_->n_samples(), b_)};
  }

  void apply(std::span<const double> x_next, std::span<const double> x_curr, const Draw& d) {
    const double scale = 1.0 / static_cast<double>(d.batch.size());
    Vector g(obj_->dim(), 0.0);
    if (read_ == MemoryRead::before_refresh) {
      g = table_.mean();
      for (std::size_t i : d.batch) axpy(-scale, table_.row(i), g);
      refresh(x_curr, d.batch);
    } else {
      refresh(x_curr, d.batch);
      g = table_.mean();
      for (std::size_t i : d.batch) axpy(-scale, table_.row(i), g);
    }
    for (std::size_t i : d.batch) obj_->add_sample_gradient(i, x_next, scale, g);
    counters_.grad_calls += 2 * d.batch.size();
    g_ = std::move(g);
    last_x_.assign(x_next.begin(), x_next.end());
  }

  void update(std::span<const double> x_next, std::span<const double> x_curr,
              std::uint64_t k) override {
    apply(x_next, x_curr, draw(k));
  }

  [[nodiscard]] const GradientTable& table() const { return table_; }

  [[nodiscard]] std::optional<double> sigma_sq() const override {
    double s = 0.0;
    for (std::size_t j = 0; j < obj_->n_samples(); ++j)
      s += squared_distance(obj_->sample_gradient(j, last_x_), table_.row(j));
    return s / static_cast<double>(obj_->n_samples());
  }

 private:
  void refresh(std::span<const double> x_curr, std::span<const std::size_t> batch) {
    for (std::size_t i : batch) table_.assign(i, obj_->sample_gradient(i, x_curr));
  }

  const LogisticObjective* obj_;
  std::size_t b_;
  std::uint64_t seed_;
  MemoryRead read_;
  GradientTable table_;
  Vector last_x_;
};

/// SAGA-SARAH hybrid with momentum lambda = b / (2n):
///   g <- (1/b) sum_S [grad f_i(x^{k+1}) - grad f_i(x^k)] + (1 - lambda) g
///        + lambda ((1/b) sum_S [grad f_i(x^k) - y_i] + mean(y)).
/// By default the lambda-term reads the freshly written table entries.
class SagaSarahEstimator final : public GradientEstimator {
 public:
  struct Draw {
    std::vector<std::size_t> batch;
  };

  SagaSarahEstimator(const LogisticObjective& obj, std::size_t b, std::uint64_t seed,
                     MemoryRead read = MemoryRead::after_refresh)
      : obj_(&obj), b_(b), seed_(seed), read_(read) {
    detail::check_batch(b, obj.n_samples());
  }

  [[nodiscard]] double lambda() const {
    return static_cast<double>(b_) / (2.0 * static_cast<double>(obj_->n_samples()));
  }

  void init(std::span<const double> x0) override {
    table_ = GradientTable(*obj_, x0);
    counters_.grad_calls += obj_->n_samples();
    g_ = table_.mean();
  }

  [[nodiscard]] Draw draw(std::uint64_t k) const {
    RngStream rng(seed_, 0, k);
    return {rng.subset(obj_->n_samples(), b_)};
  }

  void apply(std::span<const double> x_next, std::span<const double> x_curr, const Draw& d) {
    const double scale = 1.0 / static_cast<double>(d.batch.size());
    const double lam = lambda();
    std::vector<Vector> grad_curr;
    grad_curr.reserve(d.batch.size());
    for (std::size_t i : d.batch) grad_curr.push_back(obj_->sample_gradient(i, x_curr));

    auto saga_term = [&] {
      Vector t = table_.mean();
      for (std::size_t s = 0; s < d.batch.size(); ++s) {
        axpy(scale, grad_curr[s], t);
        axpy(-scale, table_.row(d.batch[s]), t);
      }
      return t;
    };
    Vector correction;
    if (read_ == MemoryRead::before_refresh) {
      correction = saga_term();
      for (std::size_t s = 0; s < d.batch.size(); ++s) table_.assign(d.batch[s], grad_curr[s]);
    } else {
      for (std::size_t s = 0; s < d.batch.size(); ++s) table_.assign(d.batch[s], grad_curr[s]);
      correction = saga_term();
    }

    Vector g(obj_->dim(), 0.0);
    for (std::size_t s = 0; s < d.batch.size(); ++s) {
      obj_->add_sample_gradient(d.batch[s], x_next, scale, g);
      axpy(-scale, grad_curr[s], g);
    }
    axpy(1.0 - lam, g_, g);
    axpy(lam, correction, g);
    counters_.grad_calls += 2 * d.batch.size();
    g_ = std::move(g);
  }

  void update(std::span<const double> x_next, std::span<const double> x_curr,
              std::uint64_t k) override {
    apply(x_next, x_curr, draw(k));
  }

  void set_gradient(Vector g) { g_ = std::move(g); }
  [[nodiscard]] const GradientTable& table() const { return table_; }

 private:
  const LogisticObjective* obj_;
  std::size_t b_;
  std::uint64_t seed_;
  MemoryRead read_;
  GradientTable table_;
};

/// SEGA-style coordinate estimator with memory h: coordinate i of h is
/// refreshed to d_i f(x^k), and g = h + dim (d_i f(x^{k+1}) - h_i) e_i.
class SegaEstimator final : public GradientEstimator {
 public:
  struct Draw {
    std::size_t coord = 0;
  };

  SegaEstimator(const LogisticObjective& obj, std::uint64_t seed,
                MemoryRead read = MemoryRead::before_refresh)
      : obj_(&obj), seed_(seed), read_(read) {}

  void init(std::span<const double> x0) override {
    h_ = obj_->full_gradient(x0);
    counters_.grad_calls += obj_->n_samples();
    g_ = h_;
    last_x_.assign(x0.begin(), x0.end());
  }

  [[nodiscard]] Draw draw(std::uint64_t k) const {
    RngStream rng(seed_, 0, k);
    return {rng.uniform_index(obj_->dim())};
  }

  void apply(std::span<const double> x_next, std::span<const double> x_curr, const Draw& d) {
    const std::size_t i = d.coord;
    require(i < obj_->dim(), "sega: coordinate out of range");
    const double dim = static_cast<double>(obj_->dim());
    const double d_next = obj_->partial_derivative(i, x_next);
    const double d_curr = obj_->partial_derivative(i, x_curr);
    if (read_ == MemoryRead::before_refresh) {
      g_ = h_;
      g_[i] = h_[i] + dim * (d_next - h_[i]);
      h_[i] = d_curr;
    } else {
      h_[i] = d_curr;
      g_ = h_;
      g_[i] = h_[i] + dim * (d_next - h_[i]);
    }
    counters_.coord_calls += 2;
    last_x_.assign(x_curr.begin(), x_curr.end());
  }

  void update(std::span<const double> x_next, std::span<const double> x_curr,
              std::uint64_t k) override {
    apply(x_next, x_curr, draw(k));
  }

  [[nodiscard]] const Vector& memory() const { return h_; }
  void set_memory(Vector h) { h_ = std::move(h); }

  // |h^{k+1} - grad f(x^k)|^2 with x^k the last x_curr seen.
  [[nodiscard]] std::optional<double> sigma_sq() const override {
    return squared_distance(h_, obj_->full_gradient(last_x_));
  }

 private:
  const LogisticObjective* obj_;
  std::uint64_t seed_;
  MemoryRead read_;
  Vector h_, last_x_;
};

/// JAGUAR: overwrite one random coordinate of g with the exact partial
/// derivative at x^{k+1}.
class JaguarEstimator final : public GradientEstimator {
 public:
  struct Draw {
    std::size_t coord = 0;
  };

  JaguarEstimator(const LogisticObjective& obj, std::uint64_t seed) : obj_(&obj), seed_(seed) {}

  void init(std::span<const double> x0) override {
    g_ = obj_->full_gradient(x0);
    counters_.grad_calls += obj_->n_samples();
  }

  [[nodiscard]] Draw draw(std::uint64_t k) const {
    RngStream rng(seed_, 0, k);
    return {rng.uniform_index(obj_->dim())};
  }

  void apply(std::span<const double> x_next, std::span<const double>, const Draw& d) {
    require(d.coord < obj_->dim(), "jaguar: coordinate out of range");
    g_[d.coord] = obj_->partial_derivative(d.coord, x_next);
    counters_.coord_calls += 1;
  }

  void update(std::span<const double> x_next, std::span<const double> x_curr,
              std::uint64_t k) override {
    apply(x_next, x_curr, draw(k));
  }

  void set_gradient(Vector g) { g_ = std::move(g); }

 private:
  const LogisticObjective* obj_;
  std::uint64_t seed_;
};

/// Zero-order JAGUAR: the overwritten coordinate is the forward difference
/// (f(x + tau e_i) - f(x)) / tau at x^{k+1}. g^0 is the forward-difference
/// gradient at x0, so the method never touches exact derivatives.
class ZojaEstimator final : public GradientEstimator {
 public:
  struct Draw {
    std::size_t coord = 0;
  };

  ZojaEstimator(const LogisticObjective& obj, double tau, std::uint64_t seed)
      : obj_(&obj), tau_(tau), seed_(seed) {
    require(tau > 0.0, "zoja: tau must be > 0");
  }

  [[nodiscard]] double forward_difference(std::size_t i, std::span<const double> x) {
    Vector shifted(x.begin(), x.end());
    shifted[i] += tau_;
    counters_.func_calls += 2;
    return (obj_->value(shifted) - obj_->value(x)) / tau_;
  }

  void init(std::span<const double> x0) override {
    g_.assign(obj_->dim(), 0.0);
    for (std::size_t i = 0; i < obj_->dim(); ++i) g_[i] = forward_difference(i, x0);
    counters_.coord_calls += obj_->dim();
  }

  [[nodiscard]] Draw draw(std::uint64_t k) const {
    RngStream rng(seed_, 0, k);
    return {rng.uniform_index(obj_->dim())};
  }

  void apply(std::span<const double> x_next, std::span<const double>, const Draw& d) {
    require(d.coord < obj_->dim(), "zoja: coordinate out of range");
    g_[d.coord] = forward_difference(d.coord, x_next);
    counters_.coord_calls += 1;
  }

  void update(std::span<const double> x_next, std::span<const double> x_curr,
              std::uint64_t k) override {
    apply(x_next, x_curr, draw(k));
  }

  [[nodiscard]] double tau() const { return tau_; }

 private:
  const LogisticObjective* obj_;
  double tau_;
  std::uint64_t seed_;
};

}  // namespace sfw
