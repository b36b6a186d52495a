#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sfw {

/// Dense real vector. Iterates, gradient estimates and memory buffers all use it.
using Vector = std::vector<double>;

/// Raised when an input violates a documented precondition (bad parameter,
/// malformed file, unknown key). The CLI maps it to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ValidationError(what);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double squared_norm(std::span<const double> a) { return dot(a, a); }

inline double norm1(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += std::abs(v);
  return s;
}

inline double norm_inf(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s = std::max(s, std::abs(v));
  return s;
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline Vector subtract(std::span<const double> a, std::span<const double> b) {
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

inline bool all_finite(std::span<const double> a) {
  return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

/// Every gradient estimator and distributed protocol the library ships.
enum class Method {
  deterministic,
  lsvrg,
  sarah,
  saga,
  saga_sarah,
  sega,
  jaguar,
  zoja,
  diana,
  marina,
  vr_marina,
  ef21,
  qlsvrg,
  pplsvrg,
};

inline constexpr Method kAllMethods[] = {
    Method::deterministic, Method::lsvrg,  Method::sarah,     Method::saga,
    Method::saga_sarah,    Method::sega,   Method::jaguar,    Method::zoja,
    Method::diana,         Method::marina, Method::vr_marina, Method::ef21,
    Method::qlsvrg,        Method::pplsvrg,
};

inline std::string_view method_name(Method m) {
  switch (m) {
    case Method::deterministic: return "deterministic";
    case Method::lsvrg: return "lsvrg";
    case Method::sarah: return "sarah";
    case Method::saga: return "saga";
    case Method::saga_sarah: return "saga_sarah";
    case Method::sega: return "sega";
    case Method::jaguar: return "jaguar";
    case Method::zoja: return "zoja";
    case Method::diana: return "diana";
    case Method::marina: return "marina";
    case Method::vr_marina: return "vr_marina";
    case Method::ef21: return "ef21";
    case Method::qlsvrg: return "qlsvrg";
    case Method::pplsvrg: return "pplsvrg";
  }
  return "?";
}

inline Method parse_method(std::string_view s) {
  for (Method m : kAllMethods)
    if (method_name(m) == s) return m;
  throw ValidationError("unknown method '" + std::string(s) + "'");
}

inline bool is_distributed(Method m) {
  switch (m) {
    case Method::diana:
    case Method::marina:
    case Method::vr_marina:
    case Method::ef21:
    case Method::qlsvrg:
    case Method::pplsvrg:
      return true;
    default:
      return false;
  }
}

/// Oracle and communication cost counters. Every counter is monotone.
struct Counters {
  std::uint64_t grad_calls = 0;   // per-sample gradient evaluations
  std::uint64_t coord_calls = 0;  // partial derivatives / coordinate estimates
  std::uint64_t func_calls = 0;   // objective evaluations (zero-order)
  std::uint64_t bits_sent = 0;    // uplink, worker -> server
  std::uint64_t bits_down = 0;    // downlink broadcasts, reported separately
  std::uint64_t coords_sent = 0;  // uplink coordinates, summed over workers
  std::uint64_t rounds = 0;
};

}  // namespace sfw
