#pragma once

// Acceptance checks. Every reference value here comes from an independent
// oracle: finite differences of value(), brute force over vertices, or exact
// enumeration of all random outcomes through the estimators' explicit draws.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "sfw/compression.hpp"
#include "sfw/config.hpp"
#include "sfw/constants.hpp"
#include "sfw/distributed.hpp"
#include "sfw/driver.hpp"
#include "sfw/estimators.hpp"
#include "sfw/feasible_set.hpp"
#include "sfw/objective.hpp"
#include "sfw/rng.hpp"

namespace sfw::verify {

struct CheckResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  double limit_seconds = 0.0;
};

// ---------------------------------------------------------------- fixtures

/// Random sparse dataset; every row has at least one nonzero.
inline Dataset random_dataset(std::uint64_t seed, std::size_t n, std::size_t dim,
                              double density = 0.7) {
  RngStream rng(seed, 11, 0);
  Dataset d;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::uint32_t> idx;
    std::vector<double> val;
    for (std::size_t j = 0; j < dim; ++j) {
      if (rng.uniform() < density || (idx.empty() && j + 1 == dim)) {
        idx.push_back(static_cast<std::uint32_t>(j));
        val.push_back(2.0 * rng.uniform() - 1.0);
      }
    }
    d.add_row(rng.bernoulli(0.5) ? 1.0 : -1.0, idx, val);
  }
  d.dim = dim;
  return d;
}

inline std::vector<Dataset> toy_datasets() {
  return {random_dataset(1, 3, 3, 1.0), random_dataset(2, 10, 6, 0.5),
          random_dataset(3, 5, 4, 0.8)};
}

inline Dataset bundled_subset(const std::string& name, std::size_t rows) {
  return load_libsvm(dataset_path(name)).head(rows);
}

/// Uniform direction scaled to a uniform l1 norm in [0, r].
inline Vector random_in_ball(RngStream& rng, std::size_t dim, double r) {
  Vector x(dim);
  for (auto& v : x) v = 2.0 * rng.uniform() - 1.0;
  const double n1 = norm1(x);
  const double target = r * rng.uniform();
  if (n1 > 0.0)
    for (auto& v : x) v *= target / n1;
  return x;
}

inline double central_difference(const LogisticObjective& obj, std::span<const double> x,
                                  std::size_t j, double h) {
  Vector xp(x.begin(), x.end()), xm(x.begin(), x.end());
  xp[j] += h;
  xm[j] -= h;
  return (obj.value(xp) - obj.value(xm)) / (2.0 * h);
}

/// All size-k subsets of {0..n-1} in lexicographic order.
inline std::vector<std::vector<std::size_t>> all_subsets(std::size_t n, std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur;
  std::function<void(std::size_t)> rec = [&](std::size_t start) {
    if (cur.size() == k) {
      out.push_back(cur);
      return;
    }
    for (std::size_t i = start; i < n; ++i) {
      cur.push_back(i);
      rec(i + 1);
      cur.pop_back();
    }
  };
  rec(0);
  return out;
}

/// Cartesian product of per-worker subset choices.
inline std::vector<std::vector<std::vector<std::size_t>>> subset_products(std::size_t workers,
                                                                          std::size_t dim,
                                                                          std::size_t k) {
  const auto single = all_subsets(dim, k);
  std::vector<std::vector<std::vector<std::size_t>>> out{{}};
  for (std::size_t w = 0; w < workers; ++w) {
    std::vector<std::vector<std::vector<std::size_t>>> next;
    for (const auto& prefix : out)
      for (const auto& s : single) {
        auto v = prefix;
        v.push_back(s);
        next.push_back(std::move(v));
      }
    out = std::move(next);
  }
  return out;
}

struct Mean {
  Vector sum;
  double weight = 0.0;
  void add(double w, std::span<const double> v) {
    if (sum.empty()) sum.assign(v.size(), 0.0);
    axpy(w, v, sum);
    weight += w;
  }
  [[nodiscard]] Vector value() const {
    Vector out = sum;
    for (auto& v : out) v /= weight;
    return out;
  }
};

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
  return m;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

inline RunConfig base_config(Method m, std::int64_t K, double radius, ScheduleMode sched) {
  RunConfig c;
  c.method = m;
  c.K = K;
  c.l1_radius = radius;
  c.schedule = sched;
  return c;
}

inline Trace run_on(const LogisticObjective& obj, const RunConfig& c) {
  const ObjectiveMeta meta = obj.smoothness_constants();
  return run(resolve(c, obj.n_samples(), obj.dim(), &meta), obj);
}

// ---------------------------------------------------------------- checks

/// 1. full_gradient against central differences of value().
inline CheckResult check_gradient() {
  CheckResult r{1, "gradient correctness", false, {}, 0.0, 5.0};
  std::vector<Dataset> sets = toy_datasets();
  sets.push_back(bundled_subset("mushrooms", 500));
  double worst = 0.0;
  RngStream rng(101, 0, 0);
  for (std::size_t s = 0; s < sets.size(); ++s) {
    const LogisticObjective obj(sets[s]);
    const int points = s < 3 ? 20 : 5;
    for (int t = 0; t < points; ++t) {
      const Vector x = random_in_ball(rng, obj.dim(), 5.0);
      const Vector g = obj.full_gradient(x);
      for (std::size_t j = 0; j < obj.dim(); ++j) {
        const double fd = central_difference(obj, x, j, 1e-6);
        const double scale = std::max({std::abs(g[j]), std::abs(fd), 1e-3});
        worst = std::max(worst, std::abs(fd - g[j]) / scale);
      }
    }
  }
  r.passed = worst <= 1e-5;
  r.detail = "max rel. error " + fmt(worst) + " (floor 1e-3 on the denominator)";
  return r;
}

/// 2. LMO output against brute force over all 2 dim vertices.
inline CheckResult check_lmo() {
  CheckResult r{2, "LMO optimality", false, {}, 0.0, 1.0};
  RngStream rng(202, 0, 0);
  std::size_t failures = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t dim = 1 + rng.uniform_index(8);
    const double radius = 0.5 + 4.0 * rng.uniform();
    Vector g(dim);
    // Integer-valued entries in half the draws to exercise ties and zeros.
    for (auto& v : g) v = t % 2 ? std::round(6.0 * rng.uniform() - 3.0) : 2.0 * rng.uniform() - 1.0;
    const L1Ball ball(radius, dim);
    const Vector s = ball.lmo(g);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < dim; ++j)
      for (double sign : {1.0, -1.0}) best = std::min(best, g[j] * sign * radius);
    if (!(dot(g, s) <= best)) ++failures;
  }
  r.passed = failures == 0;
  r.detail = std::to_string(failures) + " of 1000 gradients beat by a vertex";
  return r;
}

/// 3. Exact expectation of the estimators over all random outcomes.
inline CheckResult check_unbiasedness() {
  CheckResult r{3, "unbiasedness (exhaustive)", false, {}, 0.0, 10.0};
  const LogisticObjective obj(random_dataset(31, 3, 3, 1.0));
  const std::size_t n = obj.n_samples(), dim = obj.dim();
  RngStream rng(303, 0, 0);
  auto point = [&] { return random_in_ball(rng, dim, 2.0); };
  double worst = 0.0;
  std::ostringstream per;

  auto report = [&](const char* name, double err) {
    worst = std::max(worst, err);
    per << name << '=' << fmt(err) << ' ';
  };

  {  // L-SVRG, both coin outcomes, every batch
    double err = 0.0;
    for (std::size_t b : {1, 2}) {
      LsvrgEstimator base(obj, 0.3, b, 1);
      base.init(point());
      base.apply(point(), point(), {true, all_subsets(n, b)[0]});  // move the anchor
      const Vector xc = point(), xn = point();
      const Vector truth = obj.full_gradient(xn);
      for (bool refresh : {false, true}) {
        Mean m;
        for (const auto& S : all_subsets(n, b)) {
          LsvrgEstimator e = base;
          e.apply(xn, xc, {refresh, S});
          m.add(1.0, e.gradient());
        }
        err = std::max(err, max_abs_diff(m.value(), truth));
      }
    }
    report("lsvrg", err);
  }
  {  // SAGA from an inhomogeneous table
    double err = 0.0;
    for (std::size_t b : {1, 2}) {
      SagaEstimator base(obj, b, 1);
      base.init(point());
      const auto subsets = all_subsets(n, b);
      for (std::size_t t = 0; t < 3; ++t) {
        const Vector a = point(), c = point();
        base.apply(a, c, {subsets[t % subsets.size()]});
      }
      const Vector xc = point(), xn = point();
      Mean m;
      for (const auto& S : all_subsets(n, b)) {
        SagaEstimator e = base;
        e.apply(xn, xc, {S});
        m.add(1.0, e.gradient());
      }
      err = std::max(err, max_abs_diff(m.value(), obj.full_gradient(xn)));
    }
    report("saga", err);
  }
  {  // SEGA with arbitrary memory
    SegaEstimator base(obj, 1);
    base.init(point());
    base.set_memory(point());
    const Vector xc = point(), xn = point();
    Mean m;
    for (std::size_t i = 0; i < dim; ++i) {
      SegaEstimator e = base;
      e.apply(xn, xc, {i});
      m.add(1.0, e.gradient());
    }
    report("sega", max_abs_diff(m.value(), obj.full_gradient(xn)));
  }
  const CompressorSpec rand1{CompressorKind::rand_k, 1, dim};
  const auto products = subset_products(2, dim, 1);
  {  // DIANA after two random rounds (deferred shift updates pending)
    DianaEstimator base(obj, Partition::contiguous(n, 2), rand1, 0.5, 9);
    base.init(point());
    base.update(point(), point(), 0);
    base.update(point(), point(), 1);
    const Vector xc = point(), xn = point();
    Mean m;
    for (const auto& subsets : products) {
      DianaEstimator e = base;
      e.apply(xn, xc, {subsets});
      m.add(1.0, e.gradient());
    }
    report("diana", max_abs_diff(m.value(), obj.full_gradient(xn)));
  }
  {  // Q-L-SVRG, both coin outcomes
    QlsvrgEstimator base(obj, Partition::contiguous(n, 2), rand1, 0.4, 9);
    base.init(point());
    base.set_anchor(point());
    const Vector xc = point(), xn = point();
    double err = 0.0;
    for (bool refresh : {false, true}) {
      Mean m;
      for (const auto& subsets : products) {
        QlsvrgEstimator e = base;
        e.apply(xn, xc, {refresh, subsets});
        m.add(1.0, e.gradient());
      }
      err = std::max(err, max_abs_diff(m.value(), obj.full_gradient(xn)));
    }
    report("qlsvrg", err);
  }
  {  // PP-L-SVRG, worker chosen with probability pi_i
    PplsvrgEstimator base(obj, Partition::contiguous(n, 2), 0.4, 9);
    base.init(point());
    base.update(point(), point(), 0);
    const Vector xc = point(), xn = point();
    double err = 0.0;
    for (bool refresh : {false, true}) {
      Mean m;
      for (std::size_t i = 0; i < base.n_workers(); ++i) {
        PplsvrgEstimator e = base;
        e.apply(xn, xc, {refresh, i});
        m.add(base.weight(i), e.gradient());
      }
      err = std::max(err, max_abs_diff(m.value(), obj.full_gradient(xn)));
    }
    report("pplsvrg", err);
  }
  r.passed = worst <= 1e-12;
  r.detail = per.str() + "(max |E g - grad f|)";
  return r;
}

/// 4. One-step variance recursion for SARAH and MARINA, exact expectations.
inline CheckResult check_recursions() {
  CheckResult r{4, "variance recursions (SARAH, MARINA)", false, {}, 0.0, 10.0};
  RngStream rng(404, 0, 0);
  std::size_t violations = 0, trials = 0;
  double tightest = 0.0;  // max lhs / rhs
  const double radius = 3.0;
  for (std::uint64_t inst = 0; inst < 10; ++inst) {
    const LogisticObjective obj(random_dataset(40 + inst, 2, 2, 1.0));
    const ObjectiveMeta meta = obj.smoothness_constants();
    const L1Ball ball(radius, 2);
    const double D = ball.diameter();
    for (double p : {0.25, 0.5, 1.0}) {
      for (int t = 0; t < 20; ++t) {
        const Vector xc = random_in_ball(rng, 2, radius);
        Vector g = obj.full_gradient(xc);
        for (auto& v : g) v += rng.uniform() - 0.5;
        const double eta = 0.05 + 0.95 * rng.uniform();
        const Vector xn = fw_step(xc, g, eta, ball);
        const Vector truth_c = obj.full_gradient(xc), truth_n = obj.full_gradient(xn);
        const double prev = squared_distance(g, truth_c);
        const double dx2 = squared_distance(xn, xc);

        auto judge = [&](double lhs, double rhs) {
          ++trials;
          if (lhs > rhs * (1.0 + 1e-12) + 1e-15) ++violations;
          if (rhs > 0.0) tightest = std::max(tightest, lhs / rhs);
        };

        {  // SARAH, b = 1
          SarahEstimator base(obj, p, 1, 0);
          base.set_gradient(g);
          double lhs = 0.0;
          {
            SarahEstimator e = base;
            e.apply(xn, xc, {true, {}});
            lhs += p * squared_distance(e.gradient(), truth_n);
          }
          for (std::size_t i = 0; i < 2; ++i) {
            SarahEstimator e = base;
            e.apply(xn, xc, {false, {i}});
            lhs += (1.0 - p) * 0.5 * squared_distance(e.gradient(), truth_n);
          }
          ConstantParams prm;
          prm.p = p;
          prm.b = 1;
          prm.n_samples = 2;
          prm.L_tilde = meta.L_tilde;
          const MethodConstants c = constants_for(Method::sarah, prm);
          judge(lhs, (1.0 - c.rho1) * prev + (1.0 - p) * meta.L_tilde * meta.L_tilde * dx2);
          judge(lhs, (1.0 - c.rho1) * prev + eta * eta * c.B * D * D);
        }
        {  // MARINA, one worker holding both samples, rand_1 (omega = 1)
          const CompressorSpec spec{CompressorKind::rand_k, 1, 2};
          MarinaEstimator base(obj, Partition::contiguous(2, 1), spec, p, 0);
          base.init(xc);
          base.set_worker_gradients({g});
          double lhs = 0.0;
          {
            MarinaEstimator e = base;
            e.apply(xn, xc, {true, {}, {}});
            lhs += p * squared_distance(e.gradient(), truth_n);
          }
          for (const auto& S : all_subsets(2, 1)) {
            MarinaEstimator e = base;
            e.apply(xn, xc, {false, {S}, {}});
            lhs += (1.0 - p) * 0.5 * squared_distance(e.gradient(), truth_n);
          }
          ConstantParams prm;
          prm.p = p;
          prm.omega = omega_of(spec);
          prm.n_workers = 1;
          prm.L = meta.L;
          const MethodConstants c = constants_for(Method::marina, prm);
          judge(lhs, (1.0 - c.rho1) * prev + c.B * dx2);
          judge(lhs, (1.0 - c.rho1) * prev + eta * eta * c.B * D * D);
        }
      }
    }
  }
  r.passed = violations == 0;
  r.detail = std::to_string(violations) + " violations in " + std::to_string(trials) +
             " inequalities; max lhs/rhs " + fmt(tightest);
  return r;
}

/// 5. RandK by subset enumeration, TopK contraction and tightness.
inline CheckResult check_compressors() {
  CheckResult r{5, "compressor certificates", false, {}, 0.0, 5.0};
  RngStream rng(505, 0, 0);
  double mean_err = 0.0, var_err = 0.0;
  for (std::size_t dim = 1; dim <= 6; ++dim) {
    for (std::size_t k = 1; k <= dim; ++k) {
      Vector x(dim);
      for (auto& v : x) v = 4.0 * rng.uniform() - 2.0;
      Mean m;
      double var = 0.0;
      const auto subsets = all_subsets(dim, k);
      for (const auto& S : subsets) {
        const Packet pk = rand_k(x, S);
        m.add(1.0, pk.value);
        var += squared_distance(pk.value, x);
      }
      var /= static_cast<double>(subsets.size());
      const double omega = omega_of({CompressorKind::rand_k, k, dim});
      mean_err = std::max(mean_err, max_abs_diff(m.value(), x));
      var_err = std::max(var_err, std::abs(var - omega * squared_norm(x)) /
                                      std::max(1.0, squared_norm(x)));
    }
  }
  std::size_t contraction_fail = 0;
  for (int t = 0; t < 10000; ++t) {
    const std::size_t dim = 10, k = 1 + rng.uniform_index(dim);
    Vector x(dim);
    for (auto& v : x) v = 2.0 * rng.uniform() - 1.0;
    const double delta = delta_of({CompressorKind::top_k, k, dim});
    if (squared_distance(top_k(x, k).value, x) > (1.0 - 1.0 / delta) * squared_norm(x) * (1.0 + 1e-12))
      ++contraction_fail;
  }
  double tight_err = 0.0;
  for (std::size_t k = 1; k <= 10; ++k) {
    const Vector ones(10, 1.0);
    const double delta = delta_of({CompressorKind::top_k, k, 10});
    tight_err = std::max(tight_err, std::abs(squared_distance(top_k(ones, k).value, ones) -
                                             (1.0 - 1.0 / delta) * 10.0));
  }
  r.passed = mean_err <= 1e-12 && var_err <= 1e-12 && contraction_fail == 0 && tight_err <= 1e-12;
  r.detail = "randk |E Q - x| " + fmt(mean_err) + ", variance gap " + fmt(var_err) +
             "; topk violations " + std::to_string(contraction_fail) + ", tightness gap " +
             fmt(tight_err);
  return r;
}

/// 6. Degenerate parameters reproduce deterministic FW.
inline CheckResult check_reductions() {
  CheckResult r{6, "reduction identities", false, {}, 0.0, 30.0};
  const LogisticObjective obj(bundled_subset("mushrooms", 500));
  const std::size_t n = obj.n_samples();
  auto cfg = [&](Method m) {
    RunConfig c = base_config(m, 200, 20.0, ScheduleMode::nonconvex);
    c.log_every = 1;
    return c;
  };
  const Trace ref = run_on(obj, cfg(Method::deterministic));

  std::vector<RunConfig> cases;
  {
    RunConfig c = cfg(Method::lsvrg);
    c.b = n;
    c.p = 1.0;
    cases.push_back(c);
  }
  {
    RunConfig c = cfg(Method::sarah);
    c.p = 1.0;
    cases.push_back(c);
  }
  for (Method m : {Method::saga, Method::saga_sarah}) {
    RunConfig c = cfg(m);
    c.b = n;
    cases.push_back(c);
  }
  for (Method m : {Method::diana, Method::marina, Method::vr_marina, Method::ef21, Method::qlsvrg}) {
    RunConfig c = cfg(m);
    c.compressor = CompressorKind::identity;
    if (m == Method::diana) c.alpha = 1.0;
    if (m != Method::diana && m != Method::ef21) c.p = 1.0;
    cases.push_back(c);
  }
  {
    RunConfig c = cfg(Method::pplsvrg);
    c.n_workers = 1;
    c.p = 1.0;
    cases.push_back(c);
  }

  double worst = 0.0;
  std::ostringstream per;
  for (const auto& c : cases) {
    const Trace t = run_on(obj, c);
    double err = t.records.size() == ref.records.size() ? 0.0 : INFINITY;
    for (std::size_t i = 0; i < std::min(t.records.size(), ref.records.size()); ++i)
      err = std::max(err, std::abs(t.records[i].f_value - ref.records[i].f_value));
    worst = std::max(worst, err);
    per << method_name(c.method) << '=' << fmt(err) << ' ';
  }
  r.passed = worst <= 1e-12;
  r.detail = per.str();
  return r;
}

/// Reference optimum for the mushrooms subset: 1e5 deterministic FW steps.
inline double reference_optimum(const LogisticObjective& obj, double radius) {
  RunConfig c = base_config(Method::deterministic, 100000, radius, ScheduleMode::convex);
  c.log_every = 1000;
  const Trace t = run_on(obj, c);
  double best = obj.value(t.x_final);
  for (const auto& rec : t.records) best = std::min(best, rec.f_value);
  return best;
}

/// 7. Suboptimality ratio between K = 200 and K = 400.
inline CheckResult check_convex_rate() {
  CheckResult r{7, "convex rate shape", false, {}, 0.0, 60.0};
  const LogisticObjective obj(bundled_subset("mushrooms", 500));
  const double f_star = reference_optimum(obj, 20.0);
  auto final_f = [&](std::int64_t K) {
    return run_on(obj, base_config(Method::deterministic, K, 20.0, ScheduleMode::convex))
        .records.back()
        .f_value;
  };
  const double e200 = final_f(200) - f_star, e400 = final_f(400) - f_star;
  const double ratio = e200 / e400;
  r.passed = e400 > 0.0 && ratio >= 1.5 && ratio <= 3.0;
  r.detail = "f* " + fmt(f_star) + ", gap(200) " + fmt(e200) + ", gap(400) " + fmt(e400) +
             ", ratio " + fmt(ratio) + " (band [1.5, 3])";
  return r;
}

/// 8. Min-so-far FW gap of SARAH-FW with eta = 1/sqrt(K).
inline CheckResult check_nonconvex() {
  CheckResult r{8, "non-convex gap decay (SARAH)", false, {}, 0.0, 60.0};
  const LogisticObjective obj(bundled_subset("mushrooms", 500));
  auto min_gap = [&](std::int64_t K, std::uint64_t seed) {
    RunConfig c = base_config(Method::sarah, K, 20.0, ScheduleMode::nonconvex);
    c.seed = seed;
    c.log_every = 1;
    const Trace t = run_on(obj, c);
    double m = INFINITY;
    for (const auto& rec : t.records) m = std::min(m, rec.fw_gap);
    return m;
  };
  std::vector<double> g100, g400;
  for (std::uint64_t s = 1; s <= 5; ++s) {
    g100.push_back(min_gap(100, s));
    g400.push_back(min_gap(400, s));
  }
  const double ratio = median(g400) / median(g100);
  r.passed = ratio <= 0.7;
  r.detail = "median min gap K=100 " + fmt(median(g100)) + ", K=400 " + fmt(median(g400)) +
             ", ratio " + fmt(ratio) + " (need <= 0.7)";
  return r;
}

/// 9. MARINA uplink coordinates per worker per round against p dim + (1 - p) k.
inline CheckResult check_bits() {
  CheckResult r{9, "bits accounting (MARINA)", false, {}, 0.0, 30.0};
  const LogisticObjective obj(random_dataset(909, 16, 300, 0.1));
  RunConfig c = base_config(Method::marina, 10000, 1.0, ScheduleMode::nonconvex);
  c.n_workers = 4;
  c.p = 0.1;
  c.compressor = CompressorKind::rand_k;
  c.compressor_k = 30;
  c.seed = 7;
  c.log_every = 10000;
  const Trace t = run_on(obj, c);
  const double mean = t.bits->coords_per_worker_round;
  const double target = 0.1 * 300 + 0.9 * 30;
  r.passed = std::abs(mean - target) <= 0.05 * target;
  r.detail = "mean coords/worker/round " + fmt(mean) + " vs " + fmt(target) + ", total bits " +
             std::to_string(t.bits->total_bits);
  return r;
}

/// 10. SAGA-SARAH-FW against deterministic FW at 50 full-gradient equivalents.
inline CheckResult check_saga_sarah_vs_fw() {
  CheckResult r{10, "SAGA-SARAH beats FW at equal budget", false, {}, 0.0, 120.0};
  const LogisticObjective obj(bundled_subset("w1a", 2000));
  const ObjectiveMeta meta = obj.smoothness_constants();
  const std::size_t n = obj.n_samples();
  const std::uint64_t budget = 50 * n;
  const double radius = 2000.0;

  auto final_f = [&](Method m, std::uint64_t seed) {
    RunConfig c = base_config(m, 1, radius, ScheduleMode::convex);
    c.seed = seed;
    ResolvedConfig rc = resolve(c, n, obj.dim(), &meta);
    const std::uint64_t per_step = m == Method::deterministic ? n : 2 * rc.b;
    rc.raw.K = static_cast<std::int64_t>((budget - n) / per_step);  // init costs n
    rc.log_every = static_cast<std::size_t>(rc.raw.K);
    const Trace t = run(rc, obj);
    return std::pair{t.records.back().f_value, t.counters.grad_calls};
  };
  std::vector<double> fw, ss;
  std::uint64_t calls_fw = 0, calls_ss = 0;
  for (std::uint64_t s = 1; s <= 5; ++s) {
    auto [a, ca] = final_f(Method::deterministic, s);
    auto [b, cb] = final_f(Method::saga_sarah, s);
    fw.push_back(a);
    ss.push_back(b);
    calls_fw = ca;
    calls_ss = cb;
  }
  const double mf = median(fw), ms = median(ss);
  r.passed = ms <= mf - 1e-4;
  r.detail = "median f: saga_sarah " + fmt(ms) + " (" + std::to_string(calls_ss) +
             " grads), deterministic " + fmt(mf) + " (" + std::to_string(calls_fw) + " grads)";
  return r;
}

/// 11. ZOJA with tau = 1e-8 tracks JAGUAR on shared streams.
inline CheckResult check_zoja_jaguar() {
  CheckResult r{11, "ZOJA/JAGUAR consistency", false, {}, 0.0, 10.0};
  const LogisticObjective obj(bundled_subset("mushrooms", 500));
  const L1Ball ball(20.0, obj.dim());
  JaguarEstimator jag(obj, 77);
  ZojaEstimator zoja(obj, 1e-8, 77);
  Vector x(obj.dim(), 0.0);
  jag.init(x);
  zoja.init(x);
  double worst = max_abs_diff(jag.gradient(), zoja.gradient());
  for (std::uint64_t k = 0; k < 100; ++k) {
    const Vector xn = fw_step(x, jag.gradient(), schedule_nonconvex(100), ball);
    jag.update(xn, x, k);
    zoja.update(xn, x, k);
    worst = std::max(worst, max_abs_diff(jag.gradient(), zoja.gradient()));
    x = xn;
  }
  r.passed = worst <= 1e-5;
  r.detail = "max |g_zoja - g_jaguar|_inf " + fmt(worst);
  return r;
}

inline std::vector<std::function<CheckResult()>> all_checks() {
  return {check_gradient,  check_lmo,         check_unbiasedness,   check_recursions,
          check_compressors, check_reductions, check_convex_rate,  check_nonconvex,
          check_bits,      check_saga_sarah_vs_fw, check_zoja_jaguar};
}

/// Runs one check, timing it; an exception or a runtime over the limit fails it.
inline CheckResult timed(const std::function<CheckResult()>& check) {
  const auto t0 = std::chrono::steady_clock::now();
  CheckResult r;
  try {
    r = check();
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (r.limit_seconds > 0.0 && r.seconds > r.limit_seconds) {
    r.passed = false;
    r.detail += " [over time limit " + fmt(r.limit_seconds) + " s]";
  }
  return r;
}

inline std::string format_line(const CheckResult& r) {
  std::ostringstream s;
  s << (r.passed ? "PASS" : "FAIL") << "  " << r.id << ". " << r.name << " - " << r.detail << " ("
    << fmt(r.seconds) << " s)";
  return s.str();
}

}  // namespace sfw::verify
