#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sfw/config.hpp"
#include "sfw/core.hpp"
#include "sfw/distributed.hpp"
#include "sfw/estimators.hpp"
#include "sfw/feasible_set.hpp"
#include "sfw/objective.hpp"

namespace sfw {

/// x' = (1 - eta) x + eta s with s = lmo(g).
template <FeasibleSet Set>
Vector fw_step(std::span<const double> x, std::span<const double> g, double eta, const Set& set) {
  require(eta > 0.0 && eta <= 1.0, "fw_step: eta must lie in (0, 1]");
  require(x.size() == set.dim(), "fw_step: iterate length mismatch");
  const Vector s = set.lmo(g);
  Vector out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = (1.0 - eta) * x[j] + eta * s[j];
  return out;
}

/// eta_k = 1/d while K <= d or k < k0, then 2 / (2d + k - k0); d = 2 / min(rho1, rho2),
/// k0 = ceil(K / 2).
inline double schedule_convex(std::uint64_t k, std::uint64_t K, double rho1, double rho2) {
  require(rho1 > 0.0 && rho1 <= 1.0 && rho2 > 0.0 && rho2 <= 1.0,
          "schedule_convex: rho must lie in (0, 1]");
  const double d = 2.0 / std::min(rho1, rho2);
  const std::uint64_t k0 = (K + 1) / 2;
  if (static_cast<double>(K) <= d || k < k0) return 1.0 / d;
  return 2.0 / (2.0 * d + static_cast<double>(k - k0));
}

inline double schedule_nonconvex(std::uint64_t K) {
  require(K >= 1, "schedule_nonconvex: K must be >= 1");
  return 1.0 / std::sqrt(static_cast<double>(K));
}

/// max over the set of <grad f(x), x - s>, with the exact gradient.
template <FeasibleSet Set>
double fw_gap(std::span<const double> x, const LogisticObjective& obj, const Set& set) {
  const Vector g = obj.full_gradient(x);
  const Vector s = set.lmo(g);
  double gap = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) gap += g[j] * (x[j] - s[j]);
  return gap;
}

struct IterationRecord {
  std::uint64_t k = 0;
  double f_value = 0.0;
  double fw_gap = 0.0;
  std::uint64_t grad_calls = 0;
  std::uint64_t coord_calls = 0;
  std::uint64_t bits_sent = 0;
  double elapsed_ms = 0.0;
};

struct Trace {
  std::string label;
  std::vector<IterationRecord> records;
  Vector x_final;
  Counters counters;
  std::optional<BitsReport> bits;
};

inline std::unique_ptr<GradientEstimator> make_estimator(const ResolvedConfig& r,
                                                         const LogisticObjective& obj) {
  const std::uint64_t seed = r.raw.seed;
  auto partition = [&] {
    return r.raw.shuffled_partition ? Partition::shuffled(obj.n_samples(), r.n_workers, seed)
                                    : Partition::contiguous(obj.n_samples(), r.n_workers);
  };
  switch (r.raw.method) {
    case Method::deterministic: return std::make_unique<DeterministicEstimator>(obj);
    case Method::lsvrg: return std::make_unique<LsvrgEstimator>(obj, r.p, r.b, seed);
    case Method::sarah: return std::make_unique<SarahEstimator>(obj, r.p, r.b, seed);
    case Method::saga: return std::make_unique<SagaEstimator>(obj, r.b, seed, r.memory);
    case Method::saga_sarah:
      return std::make_unique<SagaSarahEstimator>(obj, r.b, seed, r.memory);
    case Method::sega: return std::make_unique<SegaEstimator>(obj, seed, r.memory);
    case Method::jaguar: return std::make_unique<JaguarEstimator>(obj, seed);
    case Method::zoja: return std::make_unique<ZojaEstimator>(obj, r.tau, seed);
    case Method::diana:
      return std::make_unique<DianaEstimator>(obj, partition(), r.compressor, r.alpha, seed);
    case Method::marina:
      return std::make_unique<MarinaEstimator>(obj, partition(), r.compressor, r.p, seed);
    case Method::vr_marina:
      return std::make_unique<MarinaEstimator>(obj, partition(), r.compressor, r.p, seed,
                                               r.inner_batch);
    case Method::ef21: return std::make_unique<Ef21Estimator>(obj, partition(), r.compressor, seed);
    case Method::qlsvrg:
      return std::make_unique<QlsvrgEstimator>(obj, partition(), r.compressor, r.p, seed);
    case Method::pplsvrg:
      return std::make_unique<PplsvrgEstimator>(obj, partition(), r.p, seed, r.raw.anchor);
  }
  throw ValidationError("make_estimator: unknown method");
}

inline double step_size(const ResolvedConfig& r, std::uint64_t k) {
  const auto K = static_cast<std::uint64_t>(r.raw.K);
  switch (r.raw.schedule) {
    case ScheduleMode::convex:
      return schedule_convex(k, K, r.constants.rho1, r.constants.rho2);
    case ScheduleMode::nonconvex: return schedule_nonconvex(K);
    case ScheduleMode::fixed: return *r.raw.eta;
  }
  return 1.0;
}

/// Runs K Frank-Wolfe iterations from x0 = 0 and records every log_every-th
/// iterate plus the first and the last one.
inline Trace run(const ResolvedConfig& r, const LogisticObjective& obj) {
  const L1Ball set(r.raw.l1_radius, obj.dim());
  auto est = make_estimator(r, obj);
  const auto K = static_cast<std::uint64_t>(r.raw.K);
  const auto t0 = std::chrono::steady_clock::now();

  Trace trace;
  trace.label = std::string(method_name(r.raw.method));
  Vector x(obj.dim(), 0.0);
  est->init(x);

  auto record = [&](std::uint64_t k) {
    IterationRecord rec;
    rec.k = k;
    rec.f_value = obj.value(x);
    rec.fw_gap = fw_gap(x, obj, set);
    rec.grad_calls = est->counters().grad_calls;
    rec.coord_calls = est->counters().coord_calls;
    rec.bits_sent = est->counters().bits_sent;
    if (r.raw.timing) {
      rec.elapsed_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    }
    trace.records.push_back(rec);
  };
  record(0);

  for (std::uint64_t k = 0; k < K; ++k) {
    const double eta = step_size(r, k);
    Vector x_next = fw_step(x, est->gradient(), eta, set);
    est->update(x_next, x, k);
#ifndef NDEBUG
    if (is_distributed(r.raw.method) && est->consistency_error() > 1e-9)
      throw std::runtime_error("distributed: server/worker state diverged");
#endif
    x = std::move(x_next);
    if (!all_finite(est->gradient())) throw std::runtime_error("run: non-finite gradient estimate");
    if ((k + 1) % r.log_every == 0 || k + 1 == K) record(k + 1);
  }
  trace.x_final = x;
  trace.counters = est->counters();
  if (const auto* d = dynamic_cast<const DistributedEstimator*>(est.get());
      d != nullptr && d->counters().rounds > 0) {
    trace.bits = d->bits_report();
  }
  return trace;
}

/// Loads the dataset named by the config, resolves presets and runs.
inline Trace run(const RunConfig& c) {
  const LogisticObjective obj(load_dataset(c));
  const ObjectiveMeta meta = obj.smoothness_constants();
  return run(resolve(c, obj.n_samples(), obj.dim(), &meta), obj);
}

}  // namespace sfw
