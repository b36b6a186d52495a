#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <span>

#include "sfw/core.hpp"

namespace sfw {

/// A compact convex set usable by the Frank-Wolfe loop: it only has to answer
/// linear minimization queries, report its diameter and test membership.
template <typename S>
concept FeasibleSet = requires(const S& s, std::span<const double> v) {
  { s.lmo(v) } -> std::convertible_to<Vector>;
  { s.diameter() } -> std::convertible_to<double>;
  { s.contains(v) } -> std::convertible_to<bool>;
  { s.dim() } -> std::convertible_to<std::size_t>;
};

/// l1-ball {x : |x|_1 <= r}. Its extreme points are the 2*dim vertices
/// +-r e_i, so the linear minimization oracle is a signed coordinate pick.
class L1Ball {
 public:
  L1Ball(double radius, std::size_t dim) : radius_(radius), dim_(dim) {
    require(std::isfinite(radius) && radius > 0.0, "L1Ball: radius must be positive");
    require(dim >= 1, "L1Ball: dim must be >= 1");
  }

  [[nodiscard]] double radius() const { return radius_; }
  [[nodiscard]] std::size_t dim() const { return dim_; }

  /// argmin over the ball of <g, s>: s = -r sign(g_i) e_i with i = argmax |g_j|.
  /// Ties go to the lowest index and sign(0) = +1.
  [[nodiscard]] std::size_t lmo_index(std::span<const double> g) const {
    require(g.size() == dim_, "L1Ball::lmo: gradient length mismatch");
    std::size_t best = 0;
    double best_abs = -1.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (std::isnan(g[j])) throw ValidationError("L1Ball::lmo: NaN in gradient");
      const double a = std::abs(g[j]);
      if (a > best_abs) {
        best_abs = a;
        best = j;
      }
    }
    return best;
  }

  [[nodiscard]] double lmo_value(std::span<const double> g, std::size_t i) const {
    return g[i] >= 0.0 ? -radius_ : radius_;
  }

  [[nodiscard]] Vector lmo(std::span<const double> g) const {
    const std::size_t i = lmo_index(g);
    Vector s(dim_, 0.0);
    s[i] = lmo_value(g, i);
    return s;
  }

  [[nodiscard]] double diameter() const { return 2.0 * radius_; }

  [[nodiscard]] bool contains(std::span<const double> x, double rel_tol = 1e-9) const {
    return x.size() == dim_ && norm1(x) <= radius_ * (1.0 + rel_tol);
  }

 private:
  double radius_;
  std::size_t dim_;
};

static_assert(FeasibleSet<L1Ball>);

}  // namespace sfw
