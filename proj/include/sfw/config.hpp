#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

#include "sfw/compression.hpp"
#include "sfw/constants.hpp"
#include "sfw/core.hpp"
#include "sfw/estimators.hpp"
#include "sfw/distributed.hpp"
#include "sfw/objective.hpp"

#ifndef SFW_DATA_DIR
#define SFW_DATA_DIR "data"
#endif

namespace sfw {

enum class ScheduleMode { convex, nonconvex, fixed };

inline ScheduleMode parse_schedule(std::string_view s) {
  if (s == "convex") return ScheduleMode::convex;
  if (s == "nonconvex") return ScheduleMode::nonconvex;
  if (s == "fixed") return ScheduleMode::fixed;
  throw ValidationError("unknown schedule '" + std::string(s) + "'");
}

inline std::string_view schedule_name(ScheduleMode m) {
  switch (m) {
    case ScheduleMode::convex: return "convex";
    case ScheduleMode::nonconvex: return "nonconvex";
    case ScheduleMode::fixed: return "fixed";
  }
  return "?";
}

/// Run description as written by the user. Unset optionals are filled by
/// resolve() from the method presets.
struct RunConfig {
  Method method = Method::deterministic;
  std::string dataset;                 // file path or a bundled name (mushrooms, w1a)
  std::optional<std::size_t> rows;     // keep only the first `rows` samples
  double l1_radius = 2000.0;
  ScheduleMode schedule = ScheduleMode::convex;
  std::optional<double> eta;           // fixed schedule only
  std::int64_t K = 100;
  std::uint64_t seed = 0;
  std::optional<double> p;
  std::optional<std::size_t> b;
  std::optional<double> tau;
  std::optional<CompressorKind> compressor;
  std::optional<std::size_t> compressor_k;
  std::optional<std::size_t> n_workers;
  std::optional<double> alpha;
  std::optional<std::size_t> inner_batch;
  bool shuffled_partition = false;
  std::optional<MemoryRead> memory;    // saga, saga_sarah, sega
  AnchorRead anchor = AnchorRead::post_refresh;
  std::string output;
  std::optional<std::size_t> log_every;
  bool timing = false;
  std::set<std::string> keys;          // keys present in the source text
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline double parse_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, out);
  if (r.ec != std::errc() || r.ptr != end || !std::isfinite(out))
    throw ValidationError("config: '" + key + "' expects a real number, got '" + v + "'");
  return out;
}

inline std::int64_t parse_int(const std::string& key, const std::string& v) {
  std::int64_t out = 0;
  const auto* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, out);
  if (r.ec != std::errc() || r.ptr != end)
    throw ValidationError("config: '" + key + "' expects an integer, got '" + v + "'");
  return out;
}

inline std::size_t parse_count(const std::string& key, const std::string& v) {
  const std::int64_t n = parse_int(key, v);
  if (n < 0) throw ValidationError("config: '" + key + "' must be non-negative");
  return static_cast<std::size_t>(n);
}

inline bool parse_switch(const std::string& key, const std::string& v) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw ValidationError("config: '" + key + "' expects on/off, got '" + v + "'");
}

inline MemoryRead parse_memory(const std::string& key, const std::string& v) {
  if (v == "before" || v == "pre") return MemoryRead::before_refresh;
  if (v == "after" || v == "post") return MemoryRead::after_refresh;
  throw ValidationError("config: '" + key + "' expects before/after, got '" + v + "'");
}

}  // namespace detail

/// Parses flat `key=value` text. Blank lines and lines starting with '#' are
/// skipped; unknown or repeated keys are errors.
inline RunConfig parse_config(std::istream& in) {
  using namespace detail;
  RunConfig c;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config line " + std::to_string(line_no) + ": expected key=value");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string v = trim(std::string_view(t).substr(eq + 1));
    if (!c.keys.insert(key).second) throw ValidationError("config: duplicate key '" + key + "'");

    if (key == "method") c.method = parse_method(v);
    else if (key == "dataset") c.dataset = v;
    else if (key == "dataset.rows") c.rows = parse_count(key, v);
    else if (key == "l1_radius") c.l1_radius = parse_real(key, v);
    else if (key == "schedule") c.schedule = parse_schedule(v);
    else if (key == "eta") c.eta = parse_real(key, v);
    else if (key == "K") c.K = parse_int(key, v);
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_count(key, v));
    else if (key == "p") c.p = parse_real(key, v);
    else if (key == "b") c.b = parse_count(key, v);
    else if (key == "tau") c.tau = parse_real(key, v);
    else if (key == "compressor.kind") c.compressor = parse_compressor(v);
    else if (key == "compressor.k") c.compressor_k = parse_count(key, v);
    else if (key == "n_workers") c.n_workers = parse_count(key, v);
    else if (key == "alpha") c.alpha = parse_real(key, v);
    else if (key == "inner_batch") c.inner_batch = parse_count(key, v);
    else if (key == "partition") {
      if (v == "contiguous") c.shuffled_partition = false;
      else if (v == "shuffled") c.shuffled_partition = true;
      else throw ValidationError("config: partition expects contiguous/shuffled");
    } else if (key == "memory") c.memory = parse_memory(key, v);
    else if (key == "anchor") {
      if (v == "post") c.anchor = AnchorRead::post_refresh;
      else if (v == "pre") c.anchor = AnchorRead::pre_refresh;
      else throw ValidationError("config: anchor expects post/pre");
    } else if (key == "output") c.output = v;
    else if (key == "log_every") c.log_every = parse_count(key, v);
    else if (key == "timing") c.timing = parse_switch(key, v);
    else throw ValidationError("config: unknown key '" + key + "'");
  }
  return c;
}

inline RunConfig parse_config_text(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

/// Reads a config file. A relative dataset path is taken relative to the file.
inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path + "'");
  RunConfig c = parse_config(in);
  if (!c.dataset.empty() && c.dataset.find('/') != std::string::npos) {
    std::filesystem::path d(c.dataset);
    if (d.is_relative()) c.dataset = (std::filesystem::path(path).parent_path() / d).string();
  }
  return c;
}

/// Maps bundled dataset names to files under the data directory.
inline std::string dataset_path(const std::string& name) {
  if (name == "mushrooms" || name == "w1a") return std::string(SFW_DATA_DIR) + "/" + name + ".txt";
  return name;
}

inline Dataset load_dataset(const RunConfig& c) {
  require(!c.dataset.empty(), "config: 'dataset' is required");
  Dataset d = load_libsvm(dataset_path(c.dataset));
  if (c.rows) {
    require(*c.rows >= 1, "config: dataset.rows must be >= 1");
    d = d.head(*c.rows);
  }
  return d;
}

/// Fully determined run parameters for one dataset.
struct ResolvedConfig {
  RunConfig raw;
  std::size_t n_samples = 0;
  std::size_t dim = 0;
  double p = 1.0;
  std::size_t b = 1;
  double tau = 1e-6;
  CompressorSpec compressor;
  std::size_t n_workers = 1;
  double alpha = 1.0;
  std::size_t inner_batch = 0;
  MemoryRead memory = MemoryRead::before_refresh;
  std::size_t log_every = 1;
  MethodConstants constants;
};

namespace detail {

inline const std::set<std::string>& method_keys(Method m) {
  static const std::map<Method, std::set<std::string>> table = {
      {Method::deterministic, {}},
      {Method::lsvrg, {"p", "b"}},
      {Method::sarah, {"p", "b"}},
      {Method::saga, {"b", "memory"}},
      {Method::saga_sarah, {"b", "memory"}},
      {Method::sega, {"memory"}},
      {Method::jaguar, {}},
      {Method::zoja, {"tau"}},
      {Method::diana, {"compressor.kind", "compressor.k", "n_workers", "alpha", "partition"}},
      {Method::marina, {"compressor.kind", "compressor.k", "n_workers", "p", "partition"}},
      {Method::vr_marina,
       {"compressor.kind", "compressor.k", "n_workers", "p", "partition", "inner_batch"}},
      {Method::ef21, {"compressor.kind", "compressor.k", "n_workers", "partition"}},
      {Method::qlsvrg, {"compressor.kind", "compressor.k", "n_workers", "p", "partition"}},
      {Method::pplsvrg, {"n_workers", "p", "partition", "anchor"}},
  };
  return table.at(m);
}

inline const std::set<std::string>& common_keys() {
  static const std::set<std::string> keys = {
      "method", "dataset", "dataset.rows", "l1_radius", "schedule", "eta", "K",
      "seed",   "output",  "log_every",    "timing"};
  return keys;
}

inline std::size_t ceil_size(double v) { return static_cast<std::size_t>(std::ceil(v - 1e-12)); }

}  // namespace detail

/// Validates `c` against its method and a dataset of the given shape and fills
/// unset parameters with the presets:
///   L-SVRG      b = ceil(n^{2/3}), p = min(1, b^{1/4} / sqrt(n))
///   SARAH       b = ceil(sqrt(n)), p = b / (n + b)
///   SAGA        b = ceil(n^{2/3});   SAGA-SARAH b = ceil(sqrt(n))
///   MARINA      p = k / (dim + k);   Q-L-SVRG p = k / dim
///   PP-L-SVRG   p = 1 / (n_workers + 1)
///   DIANA       alpha = 1 / (1 + omega)
inline ResolvedConfig resolve(const RunConfig& c, std::size_t n_samples, std::size_t dim,
                              const ObjectiveMeta* meta = nullptr) {
  using detail::ceil_size;
  const Method m = c.method;
  for (const auto& key : c.keys) {
    if (detail::common_keys().count(key) || detail::method_keys(m).count(key)) continue;
    throw ValidationError("config: key '" + key + "' does not apply to method " +
                          std::string(method_name(m)));
  }
  require(n_samples >= 1 && dim >= 1, "config: empty dataset");
  require(std::isfinite(c.l1_radius) && c.l1_radius > 0.0, "config: l1_radius must be > 0");
  require(c.K >= 0, "config: K must be >= 0");
  if (c.schedule == ScheduleMode::fixed) {
    require(c.eta.has_value(), "config: schedule=fixed requires eta");
    require(*c.eta > 0.0 && *c.eta <= 1.0, "config: eta must lie in (0, 1]");
  } else {
    require(!c.eta, "config: eta only applies to schedule=fixed");
  }

  ResolvedConfig r;
  r.raw = c;
  r.n_samples = n_samples;
  r.dim = dim;
  const double n = static_cast<double>(n_samples);

  const bool dist = is_distributed(m);
  if (dist) {
    r.n_workers = c.n_workers.value_or(std::min<std::size_t>(4, n_samples));
    require(r.n_workers >= 1, "config: n_workers must be >= 1");
    require(r.n_workers <= n_samples, "config: n_workers exceeds number of samples");
  }
  if (dist && m != Method::pplsvrg) {
    const bool biased = m == Method::ef21;
    r.compressor.kind = c.compressor.value_or(biased ? CompressorKind::top_k : CompressorKind::rand_k);
    r.compressor.dim = dim;
    r.compressor.k = c.compressor_k.value_or(std::max<std::size_t>(1, dim / 10));
    if (r.compressor.kind == CompressorKind::identity) r.compressor.k = dim;
    r.compressor.validate();
    if (biased && r.compressor.kind == CompressorKind::rand_k)
      throw ValidationError("config: ef21 needs top_k or identity compression");
    if (!biased && r.compressor.kind == CompressorKind::top_k)
      throw ValidationError("config: " + std::string(method_name(m)) +
                            " needs rand_k or identity compression");
  }
  const double k = static_cast<double>(r.compressor.k);
  const double d = static_cast<double>(dim);

  switch (m) {
    case Method::lsvrg: {
      r.b = c.b.value_or(ceil_size(std::pow(n, 2.0 / 3.0)));
      r.p = c.p.value_or(std::min(1.0, std::pow(static_cast<double>(r.b), 0.25) / std::sqrt(n)));
      break;
    }
    case Method::sarah:
      r.b = c.b.value_or(ceil_size(std::sqrt(n)));
      r.p = c.p.value_or(static_cast<double>(r.b) / (n + static_cast<double>(r.b)));
      break;
    case Method::saga:
      r.b = c.b.value_or(ceil_size(std::pow(n, 2.0 / 3.0)));
      break;
    case Method::saga_sarah:
      r.b = c.b.value_or(ceil_size(std::sqrt(n)));
      break;
    case Method::zoja:
      r.tau = c.tau.value_or(1e-6);
      require(r.tau > 0.0, "config: tau must be > 0");
      break;
    case Method::diana:
      r.alpha = c.alpha.value_or(1.0 / (1.0 + omega_of(r.compressor)));
      require(r.alpha > 0.0 && r.alpha <= 1.0, "config: alpha must lie in (0, 1]");
      break;
    case Method::marina:
    case Method::vr_marina:
      r.p = c.p.value_or(r.compressor.kind == CompressorKind::identity ? 1.0 : k / (d + k));
      if (m == Method::vr_marina) {
        std::size_t min_shard = n_samples / r.n_workers;
        r.inner_batch = c.inner_batch.value_or(std::max<std::size_t>(1, ceil_size(std::sqrt(static_cast<double>(min_shard)))));
        require(r.inner_batch >= 1, "config: inner_batch must be >= 1");
        require(r.inner_batch <= min_shard, "config: inner_batch exceeds the smallest shard");
      }
      break;
    case Method::qlsvrg:
      r.p = c.p.value_or(k / d);
      break;
    case Method::pplsvrg:
      r.p = c.p.value_or(1.0 / (static_cast<double>(r.n_workers) + 1.0));
      break;
    default:
      break;
  }
  if (m == Method::lsvrg || m == Method::sarah || m == Method::saga || m == Method::saga_sarah) {
    require(r.b >= 1, "config: b must be >= 1");
    require(r.b <= n_samples, "config: b exceeds number of samples");
  }
  require(r.p > 0.0 && r.p <= 1.0, "config: p must lie in (0, 1]");
  r.memory = c.memory.value_or(m == Method::saga_sarah ? MemoryRead::after_refresh
                                                       : MemoryRead::before_refresh);
  const std::size_t K = static_cast<std::size_t>(c.K);
  r.log_every = c.log_every.value_or(std::max<std::size_t>(1, K / 500));
  require(r.log_every >= 1, "config: log_every must be >= 1");

  ConstantParams prm;
  prm.p = r.p;
  prm.b = static_cast<double>(m == Method::vr_marina ? r.inner_batch : r.b);
  prm.n_samples = n;
  prm.dim = d;
  prm.n_workers = static_cast<double>(r.n_workers);
  prm.tau = r.tau;
  if (dist && m != Method::pplsvrg) {
    if (r.compressor.unbiased()) prm.omega = omega_of(r.compressor);
    if (r.compressor.kind != CompressorKind::rand_k) prm.delta = delta_of(r.compressor);
  }
  if (meta) {
    prm.L = meta->L;
    prm.L_tilde = meta->L_tilde;
    prm.L_avg = meta->L_tilde;
  }
  r.constants = constants_for(m, prm);
  return r;
}

}  // namespace sfw
