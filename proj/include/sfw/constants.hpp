#pragma once

#include <algorithm>
#include <optional>
#include <string>

#include "sfw/core.hpp"

namespace sfw {

/// Constants of the parametric variance bound
///   E|g^k - grad f(x^k)|^2 <= (1 - rho1)|g^{k-1} - grad f(x^{k-1})|^2
///                             + A sigma_{k-1}^2 + eta_{k-1}^2 B D^2 + C
///   E sigma_k^2 <= (1 - rho2) sigma_{k-1}^2 + eta_{k-1}^2 E D^2
/// together with a description of the auxiliary sequence sigma_k.
struct MethodConstants {
  double rho1 = 1.0;
  double rho2 = 1.0;
  double A = 0.0;
  double B = 0.0;
  double C = 0.0;
  double E = 0.0;
  std::string sigma;  // diagnostic description of sigma_k^2

  /// Schedule constant d = 2 / min(rho1, rho2) (always >= 2).
  [[nodiscard]] double schedule_d() const { return 2.0 / std::min(rho1, rho2); }

  [[nodiscard]] bool valid() const {
    return rho1 > 0.0 && rho1 <= 1.0 && rho2 > 0.0 && rho2 <= 1.0 && A >= 0.0 && B >= 0.0 &&
           C >= 0.0 && E >= 0.0;
  }
};

/// Inputs to the constants table. Optional fields are only required by the
/// methods whose bound mentions them. Smoothness constants default to 1 so the
/// rho values (the only ones the step-size schedule needs) can be queried
/// without a dataset.
struct ConstantParams {
  std::optional<double> p;
  std::optional<double> b;          // minibatch (inner minibatch for VR-MARINA)
  std::optional<double> n_samples;  // finite-sum size
  std::optional<double> dim;
  std::optional<double> omega;      // unbiased compressor variance
  std::optional<double> delta;      // biased compressor contraction
  std::optional<double> n_workers;
  std::optional<double> tau;        // zero-order smoothing radius
  double L = 1.0;                   // smoothness of f
  double L_tilde = 1.0;             // RMS of per-component constants
  double L_avg = 1.0;               // average L-smoothness of inner minibatches (VR-MARINA)
};

namespace detail {

inline double need(const std::optional<double>& v, const char* name, Method m) {
  if (!v) {
    throw ValidationError(std::string("constants_for(") + std::string(method_name(m)) +
                          "): missing parameter '" + name + "'");
  }
  return *v;
}

inline double need_p(const ConstantParams& prm, Method m) {
  const double p = need(prm.p, "p", m);
  require(p > 0.0 && p <= 1.0, "constants_for: p must lie in (0, 1]");
  return p;
}

inline double need_b(const ConstantParams& prm, Method m, const std::optional<double>& bound) {
  const double b = need(prm.b, "b", m);
  require(b >= 1.0, "constants_for: b must be >= 1");
  if (bound) require(b <= *bound, "constants_for: b must not exceed the number of samples");
  return b;
}

}  // namespace detail

/// Constants certified for each method. Where the short and the detailed
/// statements of a bound differ (JAGUAR rho1, EF21 rho2, SAGA B, Q-L-SVRG A/B)
/// the detailed version, which carries the proof, is used.
inline MethodConstants constants_for(Method m, const ConstantParams& prm) {
  using detail::need;
  const double Lt2 = prm.L_tilde * prm.L_tilde;
  const double L2 = prm.L * prm.L;
  MethodConstants c;
  switch (m) {
    case Method::deterministic:
      c.sigma = "0";
      break;
    case Method::lsvrg: {
      const double p = detail::need_p(prm, m);
      const double b = detail::need_b(prm, m, prm.n_samples);
      c = {1.0, p / 2.0, Lt2 / b * (1.0 - p / 2.0), 8.0 * Lt2 / (p * b), 0.0, 8.0 / p,
           "|x^k - w^k|^2"};
      break;
    }
    case Method::sarah: {
      const double p = detail::need_p(prm, m);
      const double b = detail::need_b(prm, m, prm.n_samples);
      c = {p, 1.0, 0.0, (1.0 - p) / b * Lt2, 0.0, 0.0, "0"};
      break;
    }
    case Method::saga: {
      const double n = need(prm.n_samples, "n_samples", m);
      const double b = detail::need_b(prm, m, n);
      c = {1.0,      b / (2.0 * n), (1.0 + b / (2.0 * n)) / b, Lt2 / b * (1.0 + 2.0 * n / b),
           0.0,      2.0 * n / b * Lt2, "(1/n) sum_j |grad f_j(x^k) - y_j^{k+1}|^2"};
      break;
    }
    case Method::saga_sarah: {
      const double n = need(prm.n_samples, "n_samples", m);
      const double b = detail::need_b(prm, m, n);
      c = {b / (2.0 * n), b / (2.0 * n), b / (2.0 * n * n), 2.0 * Lt2 / b, 0.0, 2.0 * n * Lt2 / b,
           "(1/n) sum_j E|grad f_j(x^k) - y_j^{k+1}|^2"};
      break;
    }
    case Method::sega: {
      const double d = need(prm.dim, "dim", m);
      require(d >= 1.0, "constants_for: dim must be >= 1");
      c = {1.0, 1.0 / (2.0 * d), d, d * d * L2, 0.0, 3.0 * L2 * d, "|h^{k+1} - grad f(x^k)|^2"};
      break;
    }
    case Method::jaguar: {
      const double d = need(prm.dim, "dim", m);
      require(d >= 1.0, "constants_for: dim must be >= 1");
      c = {1.0 / (2.0 * d), 1.0, 0.0, 3.0 * d * L2, 0.0, 0.0, "0"};
      break;
    }
    case Method::zoja: {
      const double d = need(prm.dim, "dim", m);
      const double tau = need(prm.tau, "tau", m);
      require(d >= 1.0, "constants_for: dim must be >= 1");
      require(tau > 0.0, "constants_for: tau must be > 0");
      c = {1.0 / (4.0 * d), 1.0, 0.0, 3.0 * d * L2, 5.0 * d * L2 * tau * tau / 4.0, 0.0, "0"};
      break;
    }
    case Method::diana: {
      const double w = need(prm.omega, "omega", m);
      const double n = need(prm.n_workers, "n_workers", m);
      require(w >= 0.0, "constants_for: omega must be >= 0");
      c = {1.0,
           1.0 / (2.0 * (1.0 + w)),
           w / (n * n),
           2.0 * w * (w + 1.0) * Lt2 / n,
           0.0,
           2.0 * (w + 1.0) * n * Lt2,
           "sum_i |grad f_i(x^k) - h_i^k|^2"};
      break;
    }
    case Method::marina: {
      const double p = detail::need_p(prm, m);
      const double w = need(prm.omega, "omega", m);
      const double n = need(prm.n_workers, "n_workers", m);
      require(w >= 0.0, "constants_for: omega must be >= 0");
      c = {p, 1.0, 0.0, (1.0 - p) * w * L2 / n, 0.0, 0.0, "0"};
      break;
    }
    case Method::vr_marina: {
      const double p = detail::need_p(prm, m);
      const double w = need(prm.omega, "omega", m);
      const double n = need(prm.n_workers, "n_workers", m);
      const double b = detail::need_b(prm, m, std::nullopt);
      require(w >= 0.0, "constants_for: omega must be >= 0");
      const double La2 = prm.L_avg * prm.L_avg;
      c = {p, 1.0, 0.0, (1.0 - p) / n * (w * L2 + (1.0 + w) * La2 / b), 0.0, 0.0, "0"};
      break;
    }
    case Method::ef21: {
      const double d = need(prm.delta, "delta", m);
      require(d >= 1.0, "constants_for: delta must be >= 1");
      c = {1.0, (d + 1.0) / (2.0 * d * d), 1.0, 0.0, 0.0, 2.0 * d * Lt2,
           "(1/n) sum_i |g_i^k - grad f_i(x^k)|^2"};
      break;
    }
    case Method::qlsvrg: {
      const double p = detail::need_p(prm, m);
      const double w = need(prm.omega, "omega", m);
      const double n = need(prm.n_workers, "n_workers", m);
      require(w >= 0.0, "constants_for: omega must be >= 0");
      const double tail = 1.0 + 8.0 * (1.0 - p) / p;
      c = {1.0, p / 2.0, w * Lt2 / n * (1.0 - p / 2.0), w * Lt2 / n * tail, 0.0, tail,
           "|x^k - w^k|^2"};
      break;
    }
    case Method::pplsvrg: {
      const double p = detail::need_p(prm, m);
      c = {1.0, p / 2.0, 1.0 + p / 2.0, Lt2 * (1.0 + 2.0 / p), 0.0, Lt2 * 2.0 / p,
           "sum_i |grad f_i(x^k) - grad f_i(w^{k+1})|^2"};
      break;
    }
  }
  if (prm.omega) require(*prm.omega >= 0.0, "constants_for: omega must be >= 0");
  if (prm.delta) require(*prm.delta >= 1.0, "constants_for: delta must be >= 1");
  return c;
}

}  // namespace sfw
