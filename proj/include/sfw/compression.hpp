#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sfw/core.hpp"
#include "sfw/rng.hpp"

namespace sfw {

/// Wire-size model for uplink packets: a sparse coordinate costs a 32-bit index
/// plus a 64-bit value, a dense vector costs 64 bits per entry.
inline constexpr std::uint64_t kBitsPerSparseCoord = 96;
inline constexpr std::uint64_t kBitsPerDenseCoord = 64;

inline std::uint64_t dense_bits(std::size_t dim) { return kBitsPerDenseCoord * dim; }

enum class CompressorKind { identity, rand_k, top_k };

inline std::string_view compressor_name(CompressorKind k) {
  switch (k) {
    case CompressorKind::identity: return "identity";
    case CompressorKind::rand_k: return "rand_k";
    case CompressorKind::top_k: return "top_k";
  }
  return "?";
}

inline CompressorKind parse_compressor(std::string_view s) {
  if (s == "identity") return CompressorKind::identity;
  if (s == "rand_k" || s == "randk") return CompressorKind::rand_k;
  if (s == "top_k" || s == "topk") return CompressorKind::top_k;
  throw ValidationError("unknown compressor '" + std::string(s) + "'");
}

/// Result of compressing one vector: the (dense) decoded value the server
/// reconstructs, and what it cost to send.
struct Packet {
  Vector value;
  std::size_t coords = 0;  // transmitted coordinates
  std::uint64_t bits = 0;
};

/// Compression operator description. `k` is ignored by the identity.
struct CompressorSpec {
  CompressorKind kind = CompressorKind::identity;
  std::size_t k = 0;
  std::size_t dim = 0;

  void validate() const {
    require(dim >= 1, "compressor: dim must be >= 1");
    if (kind != CompressorKind::identity) {
      require(k >= 1 && k <= dim, "compressor: k must lie in [1, dim]");
    }
  }

  [[nodiscard]] bool unbiased() const { return kind != CompressorKind::top_k; }
  [[nodiscard]] bool randomized() const { return kind == CompressorKind::rand_k; }
};

/// Variance parameter of an unbiased compressor: E|Q(x) - x|^2 <= omega |x|^2.
inline double omega_of(const CompressorSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case CompressorKind::identity: return 0.0;
    case CompressorKind::rand_k:
      return static_cast<double>(spec.dim) / static_cast<double>(spec.k) - 1.0;
    case CompressorKind::top_k: break;
  }
  throw ValidationError("omega_of: top_k is not an unbiased compressor");
}

/// Contraction parameter of a biased compressor: |C(x) - x|^2 <= (1 - 1/delta)|x|^2.
inline double delta_of(const CompressorSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case CompressorKind::identity: return 1.0;
    case CompressorKind::top_k:
      return static_cast<double>(spec.dim) / static_cast<double>(spec.k);
    case CompressorKind::rand_k: break;
  }
  throw ValidationError("delta_of: rand_k is certified as unbiased, use omega_of");
}

inline Packet identity_packet(std::span<const double> x) {
  return {Vector(x.begin(), x.end()), x.size(), dense_bits(x.size())};
}

/// RandK with an explicit coordinate subset: (dim/k) x restricted to `subset`.
inline Packet rand_k(std::span<const double> x, std::span<const std::size_t> subset) {
  const std::size_t k = subset.size();
  require(k >= 1 && k <= x.size(), "rand_k: k must lie in [1, dim]");
  const double scale = static_cast<double>(x.size()) / static_cast<double>(k);
  Packet out{Vector(x.size(), 0.0), k, kBitsPerSparseCoord * k};
  for (std::size_t j : subset) {
    require(j < x.size(), "rand_k: subset index out of range");
    out.value[j] = scale * x[j];
  }
  return out;
}

inline Packet rand_k(std::span<const double> x, std::size_t k, RngStream& rng) {
  require(k >= 1 && k <= x.size(), "rand_k: k must lie in [1, dim]");
  const auto subset = rng.subset(x.size(), k);
  return rand_k(x, subset);
}

/// TopK: keep the k largest-magnitude entries unscaled; ties go to the lower index.
inline Packet top_k(std::span<const double> x, std::size_t k) {
  require(k >= 1 && k <= x.size(), "top_k: k must lie in [1, dim]");
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      const double fa = std::abs(x[a]);
                      const double fb = std::abs(x[b]);
                      return fa > fb || (fa == fb && a < b);
                    });
  Packet out{Vector(x.size(), 0.0), k, kBitsPerSparseCoord * k};
  for (std::size_t t = 0; t < k; ++t) out.value[order[t]] = x[order[t]];
  return out;
}

/// Applies `spec` to x. Only rand_k consumes randomness.
inline Packet compress(const CompressorSpec& spec, std::span<const double> x, RngStream& rng) {
  switch (spec.kind) {
    case CompressorKind::identity: return identity_packet(x);
    case CompressorKind::rand_k: return rand_k(x, spec.k, rng);
    case CompressorKind::top_k: return top_k(x, spec.k);
  }
  return identity_packet(x);
}

/// Same as compress() with the rand_k subset supplied by the caller; the subset
/// is ignored by deterministic compressors.
inline Packet compress_with(const CompressorSpec& spec, std::span<const double> x,
                            std::span<const std::size_t> subset) {
  switch (spec.kind) {
    case CompressorKind::identity: return identity_packet(x);
    case CompressorKind::rand_k:
      require(subset.size() == spec.k, "compress_with: subset size must equal k");
      return rand_k(x, subset);
    case CompressorKind::top_k: return top_k(x, spec.k);
  }
  return identity_packet(x);
}

}  // namespace sfw
