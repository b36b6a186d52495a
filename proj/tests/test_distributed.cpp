#include <gtest/gtest.h>

#include <cmath>

#include "sfw/distributed.hpp"
#include "sfw/verify.hpp"
#include "test_util.hpp"

using namespace sfw;
using sfw::testing::dense_dataset;

namespace {

const Dataset& toy4() {
  static const Dataset d = dense_dataset(
      {{1, -2}, {-1, 0.5}, {0.3, 1}, {2, -0.7}}, {1, -1, 1, -1});
  return d;
}

const Vector kA{0.2, -0.1};
const Vector kB{-0.4, 0.6};
const Vector kC{0.5, 0.3};

const CompressorSpec kIdentity{CompressorKind::identity, 0, 2};
const CompressorSpec kRand1{CompressorKind::rand_k, 1, 2};

double diff(std::span<const double> a, std::span<const double> b) {
  return verify::max_abs_diff(a, b);
}

Partition two_workers() { return Partition::contiguous(4, 2); }

}  // namespace

TEST(Partitioned, WeightsFollowShardSizes) {
  const LogisticObjective obj(toy4());
  Partition uneven{{{0}, {1, 2, 3}}};
  MarinaEstimator est(obj, uneven, kIdentity, 1.0, 1);
  EXPECT_DOUBLE_EQ(est.weight(0), 0.25);
  EXPECT_DOUBLE_EQ(est.weight(1), 0.75);
  est.init(kA);
  EXPECT_LE(diff(est.gradient(), obj.full_gradient(kA)), 1e-15);
  EXPECT_THROW(MarinaEstimator(obj, Partition{{{0}, {1, 2}}}, kIdentity, 1.0, 1), ValidationError);
  EXPECT_THROW(MarinaEstimator(obj, Partition{{{0, 1, 2, 3}, {}}}, kIdentity, 1.0, 1),
               ValidationError);
  EXPECT_THROW(est.bits_report(), ValidationError);
}

TEST(Diana, IdentityAlphaOneIsExact) {
  const LogisticObjective obj(toy4());
  DianaEstimator est(obj, two_workers(), kIdentity, 1.0, 1);
  est.init(kA);
  Vector x = kA;
  std::uint64_t k = 0;
  for (const Vector& xn : {kB, kC, kA}) {
    est.update(xn, x, k++);
    EXPECT_LE(diff(est.gradient(), obj.full_gradient(xn)), 1e-14);
    EXPECT_LE(est.consistency_error(), 1e-12);
    x = xn;
  }
  const BitsReport r = est.bits_report();
  EXPECT_EQ(r.total_bits, 3u * 2u * 2u * 64u);
  EXPECT_DOUBLE_EQ(r.coords_per_worker_round, 2.0);
}

TEST(Diana, UnbiasedByEnumeration) {
  const LogisticObjective obj(toy4());
  DianaEstimator base(obj, two_workers(), kRand1, 0.5, 1);
  base.init(kA);
  base.update(kB, kA, 0);  // leaves a non-zero pending shift
  verify::Mean m;
  for (const auto& subsets : verify::subset_products(2, 2, 1)) {
    DianaEstimator e = base;
    e.apply(kC, kB, {subsets});
    m.add(1.0, e.gradient());
    EXPECT_LE(e.consistency_error(), 1e-12);
  }
  EXPECT_LE(diff(m.value(), obj.full_gradient(kC)), 1e-12);
}

TEST(Diana, RejectsBadParameters) {
  const LogisticObjective obj(toy4());
  EXPECT_THROW(DianaEstimator(obj, two_workers(), kIdentity, 0.0, 1), ValidationError);
  EXPECT_THROW(DianaEstimator(obj, two_workers(), kIdentity, 1.5, 1), ValidationError);
  EXPECT_THROW(DianaEstimator(obj, two_workers(), {CompressorKind::top_k, 1, 2}, 0.5, 1),
               ValidationError);
}

TEST(Marina, ProbabilityOneIsExact) {
  const LogisticObjective obj(toy4());
  MarinaEstimator est(obj, two_workers(), kRand1, 1.0, 1);
  est.init(kA);
  est.update(kB, kA, 0);
  EXPECT_LE(diff(est.gradient(), obj.full_gradient(kB)), 1e-15);
  EXPECT_EQ(est.counters().bits_sent, 2u * 2u * 64u);
}

TEST(Marina, IdentityTailsTelescopes) {
  const LogisticObjective obj(toy4());
  MarinaEstimator est(obj, two_workers(), kIdentity, 1.0, 1);
  est.init(kA);
  Vector x = kA;
  for (const Vector& xn : {kB, kC, kA, kB}) {
    est.apply(xn, x, {false, {{}, {}}, {}});
    EXPECT_LE(diff(est.gradient(), obj.full_gradient(xn)), 1e-14);
    x = xn;
  }
}

TEST(Marina, TailsExpectationByEnumeration) {
  const LogisticObjective obj(toy4());
  MarinaEstimator base(obj, two_workers(), kRand1, 0.5, 1);
  base.init(kA);
  const Vector g0 = base.gradient();
  verify::Mean m;
  for (const auto& subsets : verify::subset_products(2, 2, 1)) {
    MarinaEstimator e = base;
    e.apply(kB, kA, {false, subsets, {}});
    m.add(1.0, e.gradient());
    EXPECT_LE(e.consistency_error(), 1e-12);
  }
  Vector expect = g0;
  axpy(1.0, obj.full_gradient(kB), expect);
  axpy(-1.0, obj.full_gradient(kA), expect);
  EXPECT_LE(diff(m.value(), expect), 1e-12);
}

TEST(Marina, UplinkCoordinatesMatchExpectation) {
  const LogisticObjective obj(verify::random_dataset(21, 8, 10));
  MarinaEstimator est(obj, Partition::contiguous(8, 4), {CompressorKind::rand_k, 2, 10}, 0.2, 5);
  Vector x(10, 0.0);
  est.init(x);
  for (std::uint64_t k = 0; k < 10000; ++k) est.update(x, x, k);
  const BitsReport r = est.bits_report();
  EXPECT_GE(r.coords_per_worker_round, 3.42);
  EXPECT_LE(r.coords_per_worker_round, 3.78);
}

TEST(VrMarina, FullInnerBatchMatchesMarinaBitwise) {
  const LogisticObjective obj(verify::random_dataset(22, 12, 5));
  const CompressorSpec spec{CompressorKind::rand_k, 2, 5};
  MarinaEstimator plain(obj, Partition::contiguous(12, 3), spec, 0.3, 8);
  MarinaEstimator vr(obj, Partition::contiguous(12, 3), spec, 0.3, 8, 4);
  RngStream rng(3, 0, 0);
  Vector x(5, 0.0);
  plain.init(x);
  vr.init(x);
  for (std::uint64_t k = 0; k < 50; ++k) {
    const Vector xn = verify::random_in_ball(rng, 5, 2);
    plain.update(xn, x, k);
    vr.update(xn, x, k);
    ASSERT_EQ(plain.gradient(), vr.gradient());
    x = xn;
  }
  EXPECT_EQ(plain.counters().bits_sent, vr.counters().bits_sent);
}

TEST(VrMarina, InnerBatchExpectation) {
  const LogisticObjective obj(toy4());
  MarinaEstimator base(obj, two_workers(), kIdentity, 0.5, 1, 1);
  base.init(kA);
  const Vector g0 = base.gradient();
  verify::Mean m;
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = 0; b < 2; ++b) {
      MarinaEstimator e = base;
      e.apply(kB, kA, {false, {{}, {}}, {{a}, {b}}});
      m.add(1.0, e.gradient());
    }
  Vector expect = g0;
  axpy(1.0, obj.full_gradient(kB), expect);
  axpy(-1.0, obj.full_gradient(kA), expect);
  EXPECT_LE(diff(m.value(), expect), 1e-12);
}

TEST(VrMarina, RejectsOversizedInnerBatch) {
  const LogisticObjective obj(toy4());
  EXPECT_THROW(MarinaEstimator(obj, two_workers(), kIdentity, 0.5, 1, 3), ValidationError);
}

TEST(Ef21, IdentityIsExact) {
  const LogisticObjective obj(toy4());
  Ef21Estimator est(obj, two_workers(), kIdentity, 1);
  est.init(kA);
  est.update(kB, kA, 0);
  EXPECT_LE(diff(est.gradient(), obj.full_gradient(kB)), 1e-15);
}

TEST(Ef21, SingleWorkerFullTopKIsExact) {
  const LogisticObjective obj(toy4());
  Ef21Estimator est(obj, Partition::contiguous(4, 1), {CompressorKind::top_k, 2, 2}, 1);
  est.init(kA);
  est.update(kC, kA, 0);
  EXPECT_LE(diff(est.gradient(), obj.full_gradient(kC)), 1e-15);
}

TEST(Ef21, ContractsAtFixedPoint) {
  const LogisticObjective obj(verify::random_dataset(23, 6, 6));
  const CompressorSpec spec{CompressorKind::top_k, 2, 6};
  const double factor = 1.0 - 1.0 / delta_of(spec);
  Ef21Estimator est(obj, Partition::contiguous(6, 2), spec, 1);
  RngStream rng(4, 0, 0);
  const Vector x = verify::random_in_ball(rng, 6, 1);
  est.init(Vector(6, 0.0));
  est.set_worker_gradients({Vector{1, -2, 3, 0.5, -1, 2}, Vector{-3, 1, 0.2, 2, 1, -1}});
  const auto err = [&] {
    double e = 0;
    for (std::size_t i = 0; i < 2; ++i) {
      const Vector gi = obj.batch_gradient(Partition::contiguous(6, 2).groups[i], x);
      e += squared_distance(est.worker_gradients()[i], gi);
    }
    return e;
  };
  double prev = err();
  for (int r = 0; r < 50; ++r) {
    est.update(x, x, static_cast<std::uint64_t>(r));
    const double cur = err();
    EXPECT_LE(cur, factor * prev + 1e-24);
    EXPECT_LE(est.consistency_error(), 1e-12);
    prev = cur;
  }
  EXPECT_LT(prev, 1e-20);
}

TEST(Ef21, BitsArePerWorkerTopK) {
  const LogisticObjective obj(verify::random_dataset(24, 10, 8));
  Ef21Estimator est(obj, Partition::contiguous(10, 5), {CompressorKind::top_k, 3, 8}, 1);
  RngStream rng(5, 0, 0);
  Vector x(8, 0.0);
  est.init(x);
  for (std::uint64_t k = 0; k < 4; ++k) {
    const std::uint64_t before = est.counters().bits_sent;
    const Vector xn = verify::random_in_ball(rng, 8, 1);
    est.update(xn, x, k);
    EXPECT_EQ(est.counters().bits_sent - before, 5u * 3u * 96u);
    x = xn;
  }
  EXPECT_THROW(Ef21Estimator(obj, Partition::contiguous(10, 5), {CompressorKind::rand_k, 3, 8}, 1),
               ValidationError);
}

TEST(Qlsvrg, IdentityIsExact) {
  const LogisticObjective obj(toy4());
  QlsvrgEstimator est(obj, two_workers(), kIdentity, 0.5, 1);
  est.init(kA);
  Vector x = kA;
  std::uint64_t k = 0;
  for (const Vector& xn : {kB, kC, kA}) {
    est.update(xn, x, k++);
    EXPECT_LE(diff(est.gradient(), obj.full_gradient(xn)), 1e-14);
    x = xn;
  }
}

TEST(Qlsvrg, RefreshMovesAnchorToCurrentIterate) {
  const LogisticObjective obj(toy4());
  QlsvrgEstimator est(obj, two_workers(), kRand1, 1.0, 1);
  est.init(kA);
  est.update(kC, kB, 0);
  EXPECT_EQ(est.anchor(), kB);
  EXPECT_EQ(est.counters().bits_sent, 2u * 2u * 64u + 2u * 96u);
}

TEST(Qlsvrg, UnbiasedByEnumeration) {
  const LogisticObjective obj(toy4());
  QlsvrgEstimator base(obj, two_workers(), kRand1, 0.5, 1);
  base.init(kA);
  verify::Mean m;
  for (const auto& subsets : verify::subset_products(2, 2, 1)) {
    QlsvrgEstimator e = base;
    e.apply(kC, kB, {false, subsets});
    m.add(1.0, e.gradient());
  }
  EXPECT_LE(diff(m.value(), obj.full_gradient(kC)), 1e-12);
}

TEST(Pplsvrg, SingleWorkerIsExact) {
  const LogisticObjective obj(toy4());
  PplsvrgEstimator est(obj, Partition::contiguous(4, 1), 0.3, 1);
  est.init(kA);
  Vector x = kA;
  std::uint64_t k = 0;
  for (const Vector& xn : {kB, kC, kA}) {
    est.update(xn, x, k++);
    EXPECT_LE(diff(est.gradient(), obj.full_gradient(xn)), 1e-14);
    x = xn;
  }
}

TEST(Pplsvrg, UnbiasedOverWorkerChoice) {
  const LogisticObjective obj(toy4());
  for (const Partition& part : {two_workers(), Partition{{{0}, {1, 2, 3}}}}) {
    PplsvrgEstimator base(obj, part, 0.5, 1);
    base.init(kA);
    verify::Mean m;
    for (std::size_t i = 0; i < 2; ++i) {
      PplsvrgEstimator e = base;
      e.apply(kC, kB, {false, i});
      m.add(base.weight(i), e.gradient());
    }
    EXPECT_LE(diff(m.value(), obj.full_gradient(kC)), 1e-12);
  }
}

TEST(Pplsvrg, RefreshFormula) {
  const LogisticObjective obj(toy4());
  const Partition part = two_workers();
  PplsvrgEstimator est(obj, part, 1.0, 1);
  est.init(kA);
  est.apply(kC, kB, {true, 1});
  EXPECT_EQ(est.anchor(), kB);
  Vector expect = obj.batch_gradient(part.groups[1], kC);
  axpy(-1.0, obj.batch_gradient(part.groups[1], kB), expect);
  axpy(1.0, obj.full_gradient(kB), expect);
  EXPECT_LE(diff(est.gradient(), expect), 1e-14);
  EXPECT_EQ(est.counters().bits_sent, 3u * 2u * 64u);
}

TEST(Pplsvrg, WorkerChoiceFollowsWeights) {
  const LogisticObjective obj(toy4());
  PplsvrgEstimator est(obj, Partition{{{0}, {1, 2, 3}}}, 0.5, 1);
  int first = 0;
  const int trials = 20000;
  for (int k = 0; k < trials; ++k) first += est.draw(static_cast<std::uint64_t>(k)).worker == 0;
  EXPECT_NEAR(static_cast<double>(first) / trials, 0.25, 0.015);
}

TEST(Distributed, ConsistencyInvariantsOverLongRuns) {
  const LogisticObjective obj(verify::random_dataset(25, 15, 6));
  const Partition part = Partition::shuffled(15, 3, 2);
  const CompressorSpec rk{CompressorKind::rand_k, 2, 6};
  std::vector<std::unique_ptr<GradientEstimator>> ests;
  ests.push_back(std::make_unique<DianaEstimator>(obj, part, rk, 1.0 / (1 + omega_of(rk)), 1));
  ests.push_back(std::make_unique<MarinaEstimator>(obj, part, rk, 0.2, 1));
  ests.push_back(std::make_unique<MarinaEstimator>(obj, part, rk, 0.2, 1, 2));
  ests.push_back(std::make_unique<Ef21Estimator>(obj, part, CompressorSpec{CompressorKind::top_k, 2, 6}, 1));
  ests.push_back(std::make_unique<QlsvrgEstimator>(obj, part, rk, 0.3, 1));
  ests.push_back(std::make_unique<PplsvrgEstimator>(obj, part, 0.25, 1));
  for (auto& e : ests) {
    RngStream rng(6, 0, 0);
    Vector x(6, 0.0);
    e->init(x);
    for (std::uint64_t k = 0; k < 300; ++k) {
      const Vector xn = verify::random_in_ball(rng, 6, 3);
      e->update(xn, x, k);
      ASSERT_LE(e->consistency_error(), 1e-9);
      x = xn;
    }
    EXPECT_EQ(e->counters().rounds, 300u);
    EXPECT_EQ(e->counters().bits_down, 300u * 3u * 6u * 64u);
  }
}
