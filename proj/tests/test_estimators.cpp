#include <gtest/gtest.h>

#include <cmath>

#include "sfw/estimators.hpp"
#include "sfw/verify.hpp"
#include "test_util.hpp"

using namespace sfw;
using sfw::testing::dense_dataset;

namespace {

const Dataset& toy() {
  static const Dataset d = dense_dataset({{1, -2, 0.5}, {-1, 0.5, 2}, {0.3, 1, -1}}, {1, -1, 1});
  return d;
}

const Vector kX0{0.2, -0.1, 0.3};
const Vector kX1{-0.4, 0.6, 0.1};
const Vector kX2{0.5, 0.5, -0.7};

double diff(std::span<const double> a, std::span<const double> b) {
  return verify::max_abs_diff(a, b);
}

}  // namespace

TEST(Deterministic, ExactGradientAndCost) {
  const LogisticObjective obj(toy());
  DeterministicEstimator est(obj);
  est.init(kX0);
  EXPECT_EQ(est.gradient(), obj.full_gradient(kX0));
  est.update(kX1, kX0, 0);
  EXPECT_EQ(est.gradient(), obj.full_gradient(kX1));
  EXPECT_EQ(est.counters().grad_calls, 6u);
}

TEST(Lsvrg, FullBatchIsExact) {
  const LogisticObjective obj(toy());
  LsvrgEstimator est(obj, 0.3, 3, 1);
  est.init(kX0);
  EXPECT_LE(diff(est.gradient(), obj.full_gradient(kX0)), 1e-15);
  for (std::uint64_t k = 0; k < 5; ++k) {
    est.update(kX1, kX0, k);
    EXPECT_LE(diff(est.gradient(), obj.full_gradient(kX1)), 1e-14);
  }
}

TEST(Lsvrg, UnbiasedForFixedAnchor) {
  const LogisticObjective obj(dense_dataset({{1, 2}, {-3, 1}}, {1, -1}));
  LsvrgEstimator base(obj, 1.0, 1, 1);
  base.init(Vector{0.1, 0.2});
  verify::Mean m;
  for (std::size_t i = 0; i < 2; ++i) {
    LsvrgEstimator e = base;
    e.apply(Vector{0.5, -0.3}, Vector{0.1, 0.2}, {false, {i}});
    m.add(0.5, e.gradient());
  }
  EXPECT_LE(diff(m.value(), obj.full_gradient(Vector{0.5, -0.3})), 1e-12);
}

TEST(Lsvrg, RefreshSetsAnchorToCurrentIterate) {
  const LogisticObjective obj(toy());
  LsvrgEstimator est(obj, 1.0, 1, 1);
  est.init(kX0);
  est.apply(kX2, kX1, {true, {2}});
  EXPECT_EQ(est.anchor(), kX1);
  Vector expect = obj.full_gradient(kX1);
  axpy(1.0, obj.sample_gradient(2, kX2), expect);
  axpy(-1.0, obj.sample_gradient(2, kX1), expect);
  EXPECT_LE(diff(est.gradient(), expect), 1e-14);
}

TEST(Lsvrg, ExpectedCostWithinThreePercent) {
  const LogisticObjective obj(verify::random_dataset(4, 50, 4));
  const double p = 0.1;
  const std::size_t b = 3;
  LsvrgEstimator est(obj, p, b, 9);
  Vector x(4, 0.0);
  est.init(x);
  const std::uint64_t start = est.counters().grad_calls;
  const int steps = 10000;
  for (int k = 0; k < steps; ++k) est.update(x, x, static_cast<std::uint64_t>(k));
  const double per_step = static_cast<double>(est.counters().grad_calls - start) / steps;
  const double expected = 50 * p + 2.0 * b;
  EXPECT_NEAR(per_step, expected, 0.03 * expected);
}

TEST(Lsvrg, Errors) {
  const LogisticObjective obj(toy());
  EXPECT_THROW(LsvrgEstimator(obj, 0.5, 4, 1), ValidationError);
  EXPECT_THROW(LsvrgEstimator(obj, 0.5, 0, 1), ValidationError);
  EXPECT_THROW(LsvrgEstimator(obj, 0.0, 1, 1), ValidationError);
  EXPECT_THROW(LsvrgEstimator(obj, 1.5, 1, 1), ValidationError);
}

TEST(Sarah, ProbabilityOneIsExact) {
  const LogisticObjective obj(toy());
  SarahEstimator est(obj, 1.0, 1, 3);
  est.init(kX0);
  est.update(kX1, kX0, 0);
  EXPECT_EQ(est.gradient(), obj.full_gradient(kX1));
}

TEST(Sarah, SingleSampleTelescopes) {
  const LogisticObjective obj(dense_dataset({{1, -2}}, {1}));
  SarahEstimator est(obj, 0.5, 1, 3);
  est.init(Vector{0.1, 0.1});
  est.apply(Vector{0.3, -0.2}, Vector{0.1, 0.1}, {false, {0}});
  EXPECT_LE(diff(est.gradient(), obj.full_gradient(Vector{0.3, -0.2})), 1e-15);
}

TEST(Sarah, ExpectedRecursionStep) {
  const LogisticObjective obj(dense_dataset({{1, 2}, {-3, 1}}, {1, -1}));
  const Vector xc{0.1, 0.2}, xn{-0.2, 0.4}, g0{0.7, -0.3};
  SarahEstimator base(obj, 0.5, 1, 3);
  base.set_gradient(g0);
  verify::Mean m;
  for (std::size_t i = 0; i < 2; ++i) {
    SarahEstimator e = base;
    e.apply(xn, xc, {false, {i}});
    m.add(0.5, e.gradient());
  }
  Vector expect = g0;
  axpy(1.0, obj.full_gradient(xn), expect);
  axpy(-1.0, obj.full_gradient(xc), expect);
  EXPECT_LE(diff(m.value(), expect), 1e-12);
}

TEST(Saga, FullBatchIsExactAndTableMeanInvariant) {
  const LogisticObjective obj(toy());
  SagaEstimator est(obj, 3, 5);
  est.init(kX0);
  EXPECT_LE(diff(est.gradient(), obj.full_gradient(kX0)), 1e-15);
  Vector xc = kX0;
  for (const Vector& xn : {kX1, kX2, kX0, kX1}) {
    est.update(xn, xc, 0);
    EXPECT_LE(diff(est.gradient(), obj.full_gradient(xn)), 1e-14);
    EXPECT_LE(diff(est.table().mean(), est.table().recomputed_mean()), 1e-12);
    xc = xn;
  }
}

TEST(Saga, InitThenStationaryIsExact) {
  const LogisticObjective obj(toy());
  for (auto read : {MemoryRead::before_refresh, MemoryRead::after_refresh}) {
    SagaEstimator est(obj, 1, 5, read);
    est.init(kX0);
    est.update(kX0, kX0, 0);
    EXPECT_LE(diff(est.gradient(), obj.full_gradient(kX0)), 1e-14);
  }
}

TEST(Saga, UnbiasedFromArbitraryTableState) {
  const LogisticObjective obj(toy());
  SagaEstimator base(obj, 1, 5);
  base.init(kX0);
  base.apply(kX1, kX0, {{1}});  // row 1 now stale relative to the others
  verify::Mean m;
  for (std::size_t i = 0; i < 3; ++i) {
    SagaEstimator e = base;
    e.apply(kX2, kX1, {{i}});
    m.add(1.0, e.gradient());
  }
  EXPECT_LE(diff(m.value(), obj.full_gradient(kX2)), 1e-12);
}

TEST(Saga, LongRunKeepsMeanInvariant) {
  const LogisticObjective obj(verify::random_dataset(3, 20, 5));
  SagaEstimator est(obj, 4, 7);
  RngStream rng(1, 0, 0);
  Vector x = verify::random_in_ball(rng, 5, 1);
  est.init(x);
  for (std::uint64_t k = 0; k < 200; ++k) {
    Vector xn = verify::random_in_ball(rng, 5, 1);
    est.update(xn, x, k);
    x = xn;
  }
  EXPECT_LE(diff(est.table().mean(), est.table().recomputed_mean()), 1e-12);
  EXPECT_EQ(est.counters().grad_calls, 20u + 200u * 8u);
}

TEST(SagaSarah, LambdaAndFullBatchExactness) {
  const LogisticObjective obj(toy());
  SagaSarahEstimator est(obj, 3, 2);
  EXPECT_DOUBLE_EQ(est.lambda(), 0.5);
  est.init(kX0);
  est.update(kX1, kX0, 0);
  EXPECT_LE(diff(est.gradient(), obj.full_gradient(kX1)), 1e-14);
  est.update(kX2, kX1, 1);
  EXPECT_LE(diff(est.gradient(), obj.full_gradient(kX2)), 1e-14);
}

TEST(SagaSarah, ExpectationMatchesDirectExpansion) {
  const LogisticObjective obj(dense_dataset({{1, 2}, {-3, 1}}, {1, -1}));
  const Vector x0{0.3, 0.1}, xc{0.1, 0.2}, xn{-0.2, 0.4}, g0{0.7, -0.3};
  for (auto read : {MemoryRead::before_refresh, MemoryRead::after_refresh}) {
    SagaSarahEstimator base(obj, 1, 3, read);
    base.init(x0);
    base.set_gradient(g0);
    const double lam = base.lambda();
    verify::Mean m;
    for (std::size_t i = 0; i < 2; ++i) {
      SagaSarahEstimator e = base;
      e.apply(xn, xc, {{i}});
      m.add(0.5, e.gradient());
    }
    // Direct expansion of the update averaged over i.
    Vector expect(2, 0.0);
    axpy(1.0, obj.full_gradient(xn), expect);
    axpy(-1.0, obj.full_gradient(xc), expect);
    axpy(1 - lam, g0, expect);
    for (std::size_t i = 0; i < 2; ++i) {
      const Vector gi = obj.sample_gradient(i, xc);
      Vector y0 = obj.sample_gradient(0, x0), y1 = obj.sample_gradient(1, x0);
      const Vector& yi_old = i == 0 ? y0 : y1;
      Vector saga = gi;
      axpy(-1.0, read == MemoryRead::before_refresh ? yi_old : gi, saga);
      (i == 0 ? y0 : y1) = read == MemoryRead::before_refresh ? (i == 0 ? y0 : y1) : gi;
      axpy(0.5, y0, saga);
      axpy(0.5, y1, saga);
      axpy(0.5 * lam, saga, expect);
    }
    EXPECT_LE(diff(m.value(), expect), 1e-12);
  }
}

TEST(Sega, SpecExample) {
  // f(x) = log(1 + exp(a.x)) with a = (8, 12): grad f(0) = (4, 6).
  const LogisticObjective obj(dense_dataset({{8, 12}}, {-1}));
  const Vector x{0, 0};
  ASSERT_LE(diff(obj.full_gradient(x), Vector{4, 6}), 1e-15);
  SegaEstimator est(obj, 1, MemoryRead::after_refresh);
  est.init(x);
  est.set_memory(Vector{0, 0});
  est.apply(x, x, {1});
  EXPECT_EQ(est.memory(), (Vector{0, 6}));
  EXPECT_EQ(est.gradient(), (Vector{0, 6}));
  EXPECT_EQ(est.counters().coord_calls, 2u);
}

TEST(Sega, UnbiasedForAnyMemory) {
  const LogisticObjective obj(toy());
  SegaEstimator base(obj, 1);
  base.init(kX0);
  base.set_memory(Vector{3, -1, 2});
  verify::Mean m;
  for (std::size_t i = 0; i < 3; ++i) {
    SegaEstimator e = base;
    e.apply(kX1, kX0, {i});
    m.add(1.0, e.gradient());
  }
  EXPECT_LE(diff(m.value(), obj.full_gradient(kX1)), 1e-12);
}

TEST(Sega, ExactMemoryStationaryPoint) {
  const LogisticObjective obj(toy());
  for (std::size_t i = 0; i < 3; ++i) {
    SegaEstimator e(obj, 1);
    e.init(kX0);
    e.apply(kX0, kX0, {i});
    EXPECT_LE(diff(e.gradient(), obj.full_gradient(kX0)), 1e-14);
  }
}

TEST(Jaguar, SpecExample) {
  const LogisticObjective obj(dense_dataset({{6, 10}}, {-1}));
  JaguarEstimator est(obj, 1);
  est.init(Vector{0, 0});
  est.set_gradient(Vector{1, 1});
  est.apply(Vector{0, 0}, Vector{0, 0}, {0});
  EXPECT_EQ(est.gradient(), (Vector{3, 1}));
}

TEST(Jaguar, FullSweepRecoversGradient) {
  const LogisticObjective obj(toy());
  JaguarEstimator est(obj, 1);
  est.init(kX0);
  for (std::size_t i = 0; i < 3; ++i) est.apply(kX1, kX0, {i});
  EXPECT_LE(diff(est.gradient(), obj.full_gradient(kX1)), 1e-15);
}

TEST(Jaguar, ExpectationByEnumeration) {
  const LogisticObjective obj(toy());
  JaguarEstimator base(obj, 1);
  base.init(kX0);
  const Vector g = base.gradient();
  verify::Mean m;
  for (std::size_t i = 0; i < 3; ++i) {
    JaguarEstimator e = base;
    e.apply(kX1, kX0, {i});
    m.add(1.0, e.gradient());
  }
  Vector expect(3, 0.0);
  axpy(2.0 / 3.0, g, expect);
  axpy(1.0 / 3.0, obj.full_gradient(kX1), expect);
  EXPECT_LE(diff(m.value(), expect), 1e-15);
}

TEST(Zoja, ForwardDifferenceWithinSmoothnessBound) {
  const LogisticObjective obj(toy());
  const double L = obj.smoothness_constants().L;
  const double tau = 1e-4;
  ZojaEstimator est(obj, tau, 1);
  for (const Vector& x : {kX0, kX1, kX2})
    for (std::size_t i = 0; i < 3; ++i)
      EXPECT_LE(std::abs(est.forward_difference(i, x) - obj.partial_derivative(i, x)),
                L * tau / 2 + 1e-11);
}

TEST(Zoja, SmallTauTracksJaguar) {
  const LogisticObjective obj(toy());
  ZojaEstimator z(obj, 1e-8, 4);
  JaguarEstimator j(obj, 4);
  z.init(kX0);
  j.init(kX0);
  Vector x = kX0;
  for (std::uint64_t k = 0; k < 20; ++k) {
    const Vector& xn = k % 2 ? kX1 : kX2;
    z.update(xn, x, k);
    j.update(xn, x, k);
    x = xn;
  }
  EXPECT_LE(diff(z.gradient(), j.gradient()), 1e-5);
  EXPECT_EQ(z.counters().func_calls, 2u * (3 + 20));
}

TEST(Zoja, NearLinearRegion) {
  // Far into the saturated region f is numerically linear in x_0.
  const LogisticObjective obj(dense_dataset({{1}}, {-1}));
  ZojaEstimator est(obj, 1e-3, 1);
  const Vector x{50};
  EXPECT_NEAR(est.forward_difference(0, x), obj.partial_derivative(0, x), 1e-9);
}

TEST(Zoja, RejectsNonPositiveTau) {
  const LogisticObjective obj(toy());
  EXPECT_THROW(ZojaEstimator(obj, 0.0, 1), ValidationError);
  EXPECT_THROW(ZojaEstimator(obj, -1.0, 1), ValidationError);
}

TEST(Estimators, DrawsAreDeterministicPerSeedAndStep) {
  const LogisticObjective obj(verify::random_dataset(3, 20, 5));
  LsvrgEstimator a(obj, 0.5, 4, 11), b(obj, 0.5, 4, 11), c(obj, 0.5, 4, 12);
  EXPECT_EQ(a.draw(7).batch, b.draw(7).batch);
  EXPECT_EQ(a.draw(7).refresh, b.draw(7).refresh);
  bool any_diff = false;
  for (std::uint64_t k = 0; k < 10; ++k) any_diff |= a.draw(k).batch != c.draw(k).batch;
  EXPECT_TRUE(any_diff);
}
