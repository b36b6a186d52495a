#include <gtest/gtest.h>

#include <cmath>

#include "sfw/feasible_set.hpp"
#include "sfw/rng.hpp"

using namespace sfw;

TEST(L1Ball, LmoExamples) {
  EXPECT_EQ(L1Ball(2, 3).lmo(Vector{3, -1, 0}), (Vector{-2, 0, 0}));
  EXPECT_EQ(L1Ball(5, 2).lmo(Vector{0, 0}), (Vector{-5, 0}));
  const Vector g{1, -4, 2};
  const Vector s = L1Ball(1, 3).lmo(g);
  EXPECT_EQ(s, (Vector{0, 1, 0}));
  EXPECT_DOUBLE_EQ(dot(g, s), -4.0);
}

TEST(L1Ball, TiesGoToLowestIndex) {
  EXPECT_EQ(L1Ball(1, 3).lmo(Vector{-2, 2, -2}), (Vector{1, 0, 0}));
  EXPECT_EQ(L1Ball(1, 3).lmo_index(Vector{0, 5, -5}), 1u);
}

TEST(L1Ball, Diameter) {
  EXPECT_DOUBLE_EQ(L1Ball(2000, 4).diameter(), 4000);
  EXPECT_DOUBLE_EQ(L1Ball(1, 4).diameter(), 2);
  EXPECT_DOUBLE_EQ(L1Ball(0.5, 4).diameter(), 1);
}

TEST(L1Ball, Errors) {
  EXPECT_THROW(L1Ball(0, 3), ValidationError);
  EXPECT_THROW(L1Ball(-1, 3), ValidationError);
  EXPECT_THROW(L1Ball(1, 0), ValidationError);
  EXPECT_THROW(L1Ball(1, 2).lmo(Vector{NAN, 1}), ValidationError);
  EXPECT_THROW(L1Ball(1, 2).lmo(Vector{1, 2, 3}), ValidationError);
}

TEST(L1Ball, LmoBeatsEveryVertexExhaustively) {
  RngStream rng(9, 0, 0);
  for (std::size_t dim = 1; dim <= 8; ++dim) {
    for (int t = 0; t < 200; ++t) {
      const double r = 0.1 + 3 * rng.uniform();
      Vector g(dim);
      for (auto& v : g) v = t % 3 == 0 ? std::round(4 * rng.uniform() - 2) : rng.uniform() - 0.5;
      const L1Ball ball(r, dim);
      const Vector s = ball.lmo(g);
      int nonzero = 0;
      for (double v : s) {
        if (v != 0.0) {
          ++nonzero;
          EXPECT_EQ(std::abs(v), r);
        }
      }
      EXPECT_EQ(nonzero, 1);
      EXPECT_EQ(norm1(s), r);
      for (std::size_t j = 0; j < dim; ++j) {
        Vector v(dim, 0.0);
        for (double sign : {1.0, -1.0}) {
          v[j] = sign * r;
          EXPECT_LE(dot(g, s), dot(g, v));
        }
      }
    }
  }
}

TEST(L1Ball, Membership) {
  const L1Ball ball(2, 3);
  EXPECT_TRUE(ball.contains(Vector{1, -1, 0}));
  EXPECT_TRUE(ball.contains(Vector{2 * (1 + 1e-10), 0, 0}));
  EXPECT_FALSE(ball.contains(Vector{2.01, 0, 0}));
  EXPECT_FALSE(ball.contains(Vector{0, 0}));
}

TEST(L1Ball, ConvexCombinationsStayInside) {
  const L1Ball ball(3, 4);
  RngStream rng(5, 0, 0);
  Vector x(4, 0.0);
  for (int k = 0; k < 500; ++k) {
    Vector g(4);
    for (auto& v : g) v = rng.uniform() - 0.5;
    const Vector s = ball.lmo(g);
    const double eta = rng.uniform();
    for (std::size_t j = 0; j < 4; ++j) x[j] = (1 - eta) * x[j] + eta * s[j];
    ASSERT_TRUE(ball.contains(x));
  }
}
