#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sfw/compression.hpp"
#include "sfw/core.hpp"
#include "sfw/estimators.hpp"
#include "sfw/objective.hpp"
#include "sfw/rng.hpp"

namespace sfw {

/// Uplink totals of a distributed run.
struct BitsReport {
  std::uint64_t total_bits = 0;
  double per_round_mean = 0.0;              // bits per round, summed over workers
  double coords_per_worker_round = 0.0;     // transmitted coordinates per worker per round
};

/// In-process parameter-server simulation. Worker i owns the shard
/// f_i = (1/m_i) sum_{j in group i} f_j and the server aggregates with weights
/// pi_i = m_i / N, so sum_i pi_i grad f_i = grad f for any partition.
/// Workers run sequentially in id order. Every worker/round pair draws from its
/// own RngStream (seed, worker, round); shared coins use the server stream.
class DistributedEstimator : public GradientEstimator {
 public:
  DistributedEstimator(const LogisticObjective& obj, Partition part, std::uint64_t seed)
      : obj_(&obj), part_(std::move(part)), seed_(seed) {
    require(part_.n_workers() >= 1, "distributed: need at least one worker");
    std::size_t total = 0;
    for (const auto& g : part_.groups) {
      require(!g.empty(), "distributed: empty worker shard");
      for (std::size_t i : g) require(i < obj.n_samples(), "distributed: shard index out of range");
      total += g.size();
    }
    require(total == obj.n_samples(), "distributed: partition does not cover the dataset");
    weights_.reserve(part_.n_workers());
    for (const auto& g : part_.groups)
      weights_.push_back(static_cast<double>(g.size()) / static_cast<double>(total));
  }

  [[nodiscard]] std::size_t n_workers() const { return part_.n_workers(); }
  [[nodiscard]] const Partition& partition() const { return part_; }
  [[nodiscard]] double weight(std::size_t i) const { return weights_[i]; }

  [[nodiscard]] BitsReport bits_report() const {
    require(counters_.rounds >= 1, "bits_report: no round executed");
    const double r = static_cast<double>(counters_.rounds);
    return {counters_.bits_sent, static_cast<double>(counters_.bits_sent) / r,
            static_cast<double>(counters_.coords_sent) / (r * static_cast<double>(n_workers()))};
  }

 protected:
  [[nodiscard]] Vector shard_gradient(std::size_t i, std::span<const double> x) {
    counters_.grad_calls += part_.groups[i].size();
    return obj_->batch_gradient(part_.groups[i], x);
  }

  /// sum_i pi_i v_i
  [[nodiscard]] Vector weighted_mean(const std::vector<Vector>& v) const {
    Vector out(obj_->dim(), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) axpy(weights_[i], v[i], out);
    return out;
  }

  void send(const Packet& pk) {
    counters_.bits_sent += pk.bits;
    counters_.coords_sent += pk.coords;
  }

  void send_dense() { send(Packet{{}, obj_->dim(), dense_bits(obj_->dim())}); }

  void end_round() {
    counters_.rounds += 1;
    counters_.bits_down += n_workers() * dense_bits(obj_->dim());  // broadcast of x^{k+1}
  }

  /// Per-worker rand_k subsets for round k (empty when the compressor is deterministic).
  [[nodiscard]] std::vector<std::vector<std::size_t>> compression_subsets(
      const CompressorSpec& spec, std::uint64_t k) const {
    std::vector<std::vector<std::size_t>> out(n_workers());
    if (!spec.randomized()) return out;
    for (std::size_t i = 0; i < n_workers(); ++i) {
      RngStream rng(seed_, i, k, 0);
      out[i] = rng.subset(spec.dim, spec.k);
    }
    return out;
  }

  [[nodiscard]] RngStream server_stream(std::uint64_t k) const {
    return RngStream(seed_, kServerStream, k);
  }

  [[nodiscard]] double max_abs_diff(std::span<const double> a, std::span<const double> b) const {
    double m = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
    return m;
  }

  const LogisticObjective* obj_;
  Partition part_;
  std::uint64_t seed_;
  std::vector<double> weights_;
};

namespace detail {

inline CompressorSpec unbiased_spec(CompressorSpec spec, std::size_t dim, const char* who) {
  spec.dim = dim;
  spec.validate();
  if (!spec.unbiased())
    throw ValidationError(std::string(who) + ": requires an unbiased compressor (identity or rand_k)");
  return spec;
}

}  // namespace detail

/// DIANA: workers compress shifted gradients Delta_i = Q(grad f_i(x^{k+1}) - h_i),
/// g = h + sum pi_i Delta_i; the shifts move by alpha * Delta at the start of
/// the next round (the listing's deferred update of h and h_i).
class DianaEstimator final : public DistributedEstimator {
 public:
  struct Draw {
    std::vector<std::vector<std::size_t>> subsets;
  };

  DianaEstimator(const LogisticObjective& obj, Partition part, CompressorSpec spec, double alpha,
                 std::uint64_t seed)
      : DistributedEstimator(obj, std::move(part), seed),
        spec_(detail::unbiased_spec(spec, obj.dim(), "diana")),
        alpha_(alpha) {
    require(alpha > 0.0 && alpha <= 1.0, "diana: alpha must lie in (0, 1]");
  }

  void init(std::span<const double> x0) override {
    h_i_.clear();
    for (std::size_t i = 0; i < n_workers(); ++i) h_i_.push_back(shard_gradient(i, x0));
    h_ = weighted_mean(h_i_);
    delta_.assign(n_workers(), Vector(obj_->dim(), 0.0));
    g_ = h_;
  }

  [[nodiscard]] Draw draw(std::uint64_t k) const { return {compression_subsets(spec_, k)}; }

  void apply(std::span<const double> x_next, std::span<const double>, const Draw& d) {
    Vector mean_prev(obj_->dim(), 0.0);
    for (std::size_t i = 0; i < n_workers(); ++i) axpy(weight(i), delta_[i], mean_prev);
    axpy(alpha_, mean_prev, h_);
    Vector mean_delta(obj_->dim(), 0.0);
    for (std::size_t i = 0; i < n_workers(); ++i) {
      axpy(alpha_, delta_[i], h_i_[i]);
      const Vector diff = subtract(shard_gradient(i, x_next), h_i_[i]);
      Packet pk = compress_with(spec_, diff, d.subsets[i]);
      send(pk);
      delta_[i] = std::move(pk.value);
      axpy(weight(i), delta_[i], mean_delta);
    }
    g_ = h_;
    axpy(1.0, mean_delta, g_);
    end_round();
  }

  void update(std::span<const double> x_next, std::span<const double> x_curr,
              std::uint64_t k) override {
    apply(x_next, x_curr, draw(k));
  }

  /// |h - sum pi_i h_i|_inf
  [[nodiscard]] double consistency_error() const override {
    return max_abs_diff(h_, weighted_mean(h_i_));
  }

  [[nodiscard]] const std::vector<Vector>& shifts() const { return h_i_; }
  void set_shifts(std::vector<Vector> h_i) {
    require(h_i.size() == n_workers(), "diana: shift count mismatch");
    h_i_ = std::move(h_i);
    h_ = weighted_mean(h_i_);
    delta_.assign(n_workers(), Vector(obj_->dim(), 0.0));
  }
  [[nodiscard]] double alpha() const { return alpha_; }

 private:
  CompressorSpec spec_;
  double alpha_;
  std::vector<Vector> h_i_;
  std::vector<Vector> delta_;
  Vector h_;
};

/// MARINA and VR-MARINA. One shared coin per round: heads sends the exact
/// correction grad f_i(x^{k+1}) - g_i uncompressed; tails sends a compressed
/// gradient difference, over the whole shard (MARINA) or over an inner
/// minibatch of size b' (VR-MARINA).
class MarinaEstimator final : public DistributedEstimator {
 public:
  struct Draw {
    bool full = false;
    std::vector<std::vector<std::size_t>> subsets;       // compression, per worker
    std::vector<std::vector<std::size_t>> inner_batches;  // positions within the shard (VR only)
  };

  /// inner_batch = 0 selects plain MARINA.
  MarinaEstimator(const LogisticObjective& obj, Partition part, CompressorSpec spec, double p,
                  std::uint64_t seed, std::size_t inner_batch = 0)
      : DistributedEstimator(obj, std::move(part), seed),
        spec_(detail::unbiased_spec(spec, obj.dim(), "marina")),
        p_(p),
        inner_(inner_batch) {
    detail::check_probability(p);
    for (const auto& g : part_.groups)
      require(inner_ <= g.size(), "vr_marina: inner batch exceeds a worker shard");
  }

  [[nodiscard]] bool variance_reduced() const { return inner_ > 0; }

  void init(std::span<const double> x0) override {
    g_i_.clear();
    for (std::size_t i = 0; i < n_workers(); ++i) g_i_.push_back(shard_gradient(i, x0));
    g_ = weighted_mean(g_i_);
  }

  [[nodiscard]] Draw draw(std::uint64_t k) const {
    Draw d;
    RngStream coin = server_stream(k);
    d.full = coin.bernoulli(p_);
    if (d.full) return d;
    d.subsets = compression_subsets(spec_, k);
    if (variance_reduced()) {
      d.inner_batches.resize(n_workers());
      for (std::size_t i = 0; i < n_workers(); ++i) {
        RngStream rng(seed_, i, k, 1);
        d.inner_batches[i] = rng.subset(part_.groups[i].size(), inner_);
      }
    }
    return d;
  }

  void apply(std::span<const double> x_next, std::span<const double> x_curr, const Draw& d) {
    Vector mean_c(obj_->dim(), 0.0);
    for (std::size_t i = 0; i < n_workers(); ++i) {
      Vector c;
      if (d.full) {
        c = subtract(shard_gradient(i, x_next), g_i_[i]);
        send(identity_packet(c));
      } else {
        std::vector<std::size_t> rows;
        if (variance_reduced()) {
          for (std::size_t pos : d.inner_batches[i]) rows.push_back(part_.groups[i][pos]);
        } else {
          rows = part_.groups[i];
        }
        const Vector diff = subtract(obj_->batch_gradient(rows, x_next), obj_->batch_gradient(rows, x_curr));
        counters_.grad_calls += 2 * rows.size();
        Packet pk = compress_with(spec_, diff, d.subsets[i]);
        send(pk);
        c = std::move(pk.value);
      }
      axpy(1.0, c, g_i_[i]);
      axpy(weight(i), c, mean_c);
    }
    axpy(1.0, mean_c, g_);
    end_round();
  }

  void update(std::span<const double> x_next, std::span<const double> x_curr,
              std::uint64_t k) override {
    apply(x_next, x_curr, draw(k));
  }

  /// |g - sum pi_i g_i|_inf
  [[nodiscard]] double consistency_error() const override {
    return max_abs_diff(g_, weighted_mean(g_i_));
  }

  /// Replaces worker estimates and the server aggregate (enumeration tests).
  void set_worker_gradients(std::vector<Vector> g_i) {
    require(g_i.size() == n_workers(), "marina: worker count mismatch");
    g_i_ = std::move(g_i);
    g_ = weighted_mean(g_i_);
  }

  [[nodiscard]] double p() const { return p_; }

 private:
  CompressorSpec spec_;
  double p_;
  std::size_t inner_;
  std::vector<Vector> g_i_;
};

/// EF21: c_i = C(grad f_i(x^{k+1}) - g_i), g_i += c_i, g += sum pi_i c_i.
/// Deterministic for top_k and identity.
class Ef21Estimator final : public DistributedEstimator {
 public:
  Ef21Estimator(const LogisticObjective& obj, Partition part, CompressorSpec spec,
                std::uint64_t seed)
      : DistributedEstimator(obj, std::move(part), seed), spec_(spec) {
    spec_.dim = obj.dim();
    spec_.validate();
    if (spec_.randomized())
      throw ValidationError("ef21: requires a contractive compressor (identity or top_k)");
  }

  void init(std::span<const double> x0) override {
    g_i_.clear();
    for (std::size_t i = 0; i < n_workers(); ++i) g_i_.push_back(shard_gradient(i, x0));
    g_ = weighted_mean(g_i_);
  }

  void apply(std::span<const double> x_next) {
    Vector mean_c(obj_->dim(), 0.0);
    for (std::size_t i = 0; i < n_workers(); ++i) {
      const Vector diff = subtract(shard_gradient(i, x_next), g_i_[i]);
      Packet pk = compress_with(spec_, diff, {});
      send(pk);
      axpy(1.0, pk.value, g_i_[i]);
      axpy(weight(i), pk.value, mean_c);
    }
    axpy(1.0, mean_c, g_);
    end_round();
  }

  void update(std::span<const double> x_next, std::span<const double>, std::uint64_t) override {
    apply(x_next);
  }

  [[nodiscard]] double consistency_error() const override {
    return max_abs_diff(g_, weighted_mean(g_i_));
  }

  [[nodiscard]] const std::vector<Vector>& worker_gradients() const { return g_i_; }
  void set_worker_gradients(std::vector<Vector> g_i) {
    require(g_i.size() == n_workers(), "ef21: worker count mismatch");
    g_i_ = std::move(g_i);
    g_ = weighted_mean(g_i_);
  }

 private:
  CompressorSpec spec_;
  std::vector<Vector> g_i_;
};

/// Q-L-SVRG: shared coin moves the anchor w to x^k (workers then send their
/// exact anchor gradients); every round worker i sends
/// Q(grad f_i(x^{k+1}) - grad f_i(w)) and g = sum pi_i Q(...) + grad f(w).
class QlsvrgEstimator final : public DistributedEstimator {
 public:
  struct Draw {
    bool refresh = false;
    std::vector<std::vector<std::size_t>> subsets;
  };

  QlsvrgEstimator(const LogisticObjective& obj, Partition part, CompressorSpec spec, double p,
                  std::uint64_t seed)
      : DistributedEstimator(obj, std::move(part), seed),
        spec_(detail::unbiased_spec(spec, obj.dim(), "qlsvrg")),
        p_(p) {
    detail::check_probability(p);
  }

  void init(std::span<const double> x0) override {
    set_anchor(x0);
    g_ = grad_w_;
  }

  [[nodiscard]] Draw draw(std::uint64_t k) const {
    Draw d;
    RngStream coin = server_stream(k);
    d.refresh = coin.bernoulli(p_);
    d.subsets = compression_subsets(spec_, k);
    return d;
  }

  void apply(std::span<const double> x_next, std::span<const double> x_curr, const Draw& d) {
    if (d.refresh) {
      set_anchor(x_curr);
      for (std::size_t i = 0; i < n_workers(); ++i) send_dense();
    }
    Vector g = grad_w_;
    for (std::size_t i = 0; i < n_workers(); ++i) {
      const Vector diff = subtract(shard_gradient(i, x_next), grad_w_i_[i]);
      Packet pk = compress_with(spec_, diff, d.subsets[i]);
      send(pk);
      axpy(weight(i), pk.value, g);
    }
    g_ = std::move(g);
    end_round();
  }

  void update(std::span<const double> x_next, std::span<const double> x_curr,
              std::uint64_t k) override {
    apply(x_next, x_curr, draw(k));
  }

  [[nodiscard]] double consistency_error() const override {
    return max_abs_diff(grad_w_, weighted_mean(grad_w_i_));
  }

  [[nodiscard]] const Vector& anchor() const { return w_; }
  void set_anchor(std::span<const double> w) {
    w_.assign(w.begin(), w.end());
    grad_w_i_.clear();
    for (std::size_t i = 0; i < n_workers(); ++i) grad_w_i_.push_back(shard_gradient(i, w_));
    grad_w_ = weighted_mean(grad_w_i_);
  }

 private:
  CompressorSpec spec_;
  double p_;
  Vector w_, grad_w_;
  std::vector<Vector> grad_w_i_;
};

/// Anchor gradient used by the PP-L-SVRG correction term.
enum class AnchorRead {
  post_refresh,  // grad f(w^{k+1}), matching the per-worker anchor term
  pre_refresh,   // grad f(w^k), literally as in the algorithm listing
};

/// PP-L-SVRG (partial participation): a shared coin refreshes the anchor,
/// then one worker i, chosen with probability pi_i, sends
/// grad f_i(x^{k+1}) - grad f_i(w), and g = that + grad f(w).
class PplsvrgEstimator final : public DistributedEstimator {
 public:
  struct Draw {
    bool refresh = false;
    std::size_t worker = 0;
  };

  PplsvrgEstimator(const LogisticObjective& obj, Partition part, double p, std::uint64_t seed,
                   AnchorRead read = AnchorRead::post_refresh)
      : DistributedEstimator(obj, std::move(part), seed), p_(p), read_(read) {
    detail::check_probability(p);
  }

  void init(std::span<const double> x0) override {
    w_.assign(x0.begin(), x0.end());
    grad_w_i_.clear();
    for (std::size_t i = 0; i < n_workers(); ++i) grad_w_i_.push_back(shard_gradient(i, w_));
    grad_w_ = weighted_mean(grad_w_i_);
    g_ = grad_w_;
  }

  [[nodiscard]] Draw draw(std::uint64_t k) const {
    Draw d;
    RngStream rng = server_stream(k);
    d.refresh = rng.bernoulli(p_);
    const double u = rng.uniform();
    double acc = 0.0;
    d.worker = n_workers() - 1;
    for (std::size_t i = 0; i < n_workers(); ++i) {
      acc += weight(i);
      if (u < acc) {
        d.worker = i;
        break;
      }
    }
    return d;
  }

  void apply(std::span<const double> x_next, std::span<const double> x_curr, const Draw& d) {
    require(d.worker < n_workers(), "pplsvrg: worker out of range");
    const Vector grad_w_prev = grad_w_;
    if (d.refresh) {
      w_.assign(x_curr.begin(), x_curr.end());
      for (std::size_t i = 0; i < n_workers(); ++i) {
        grad_w_i_[i] = shard_gradient(i, w_);
        send_dense();
      }
      grad_w_ = weighted_mean(grad_w_i_);
    }
    const std::size_t i = d.worker;
    Vector g = subtract(shard_gradient(i, x_next), grad_w_i_[i]);
    send_dense();
    axpy(1.0, read_ == AnchorRead::post_refresh ? grad_w_ : grad_w_prev, g);
    g_ = std::move(g);
    end_round();
  }

  void update(std::span<const double> x_next, std::span<const double> x_curr,
              std::uint64_t k) override {
    apply(x_next, x_curr, draw(k));
  }

  [[nodiscard]] double consistency_error() const override {
    return max_abs_diff(grad_w_, weighted_mean(grad_w_i_));
  }

  [[nodiscard]] const Vector& anchor() const { return w_; }

 private:
  double p_;
  AnchorRead read_;
  Vector w_, grad_w_;
  std::vector<Vector> grad_w_i_;
};

}  // namespace sfw
