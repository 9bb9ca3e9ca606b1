#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "aeroforge/optimizer.hpp"
#include "aeroforge/structures.hpp"
#include "aeroforge/util.hpp"
#include "test_helpers.hpp"

using namespace aeroforge;
using namespace aeroforge::opt;

namespace {

/// High-precision oracle: Phi(z) = 1/2 + phi(z) * sum z^(2n+1) / (1*3*...*(2n+1))
/// evaluated in long double. Beyond |z| = 6 the tail is below 1e-9.
long double normal_cdf_series(long double z) {
  if (z > 6.0L) return 1.0L - static_cast<long double>(normal_cdf_series(-z));
  if (z < -6.0L) {
    // continued accumulation is symmetric
    long double pos = normal_cdf_series(-z);
    return 1.0L - pos;
  }
  long double term = z;
  long double sum = z;
  for (int n = 1; n < 200; ++n) {
    term *= z * z / (2.0L * n + 1.0L);
    sum += term;
    if (std::fabs(static_cast<double>(term)) < 1e-22) break;
  }
  long double phi = std::exp(-0.5L * z * z) / std::sqrt(2.0L * std::numbers::pi_v<long double>);
  return 0.5L + phi * sum;
}

std::vector<ParetoPoint> brute_force_front(const std::vector<std::array<double, 2>>& pts) {
  std::vector<ParetoPoint> front;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < pts.size() && !dominated; ++j) {
      if (i == j) continue;
      bool leq = pts[j][0] <= pts[i][0] && pts[j][1] <= pts[i][1];
      bool strict = pts[j][0] < pts[i][0] || pts[j][1] < pts[i][1];
      if (leq && strict) dominated = true;
    }
    if (!dominated) front.push_back({pts[i][0], pts[i][1], i});
  }
  return front;
}

}  // namespace

TEST_CASE("normal CDF approximation stays within 1e-7 of the series oracle") {
  for (double z = -6.0; z <= 6.0; z += 0.01) {
    double approx = normal_cdf(z);
    double exact = static_cast<double>(normal_cdf_series(z));
    CHECK(std::fabs(approx - exact) < 1.0e-7);
  }
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(normal_cdf(10.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(normal_cdf(-10.0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("expected improvement") {
  SUBCASE("closed-form limits at zero variance") {
    CHECK(expected_improvement(5.0, 0.0, 4.0) == 0.0);   // mean above incumbent
    CHECK(expected_improvement(3.0, 0.0, 4.0) == 1.0);   // mean one below
  }

  SUBCASE("at the incumbent with unit variance, EI equals 1/sqrt(2 pi)") {
    const double ei = expected_improvement(2.0, 1.0, 2.0);
    CHECK(ei == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-6));

    // Monte-Carlo oracle over one million draws confirms
    std::mt19937_64 rng(1234);
    std::normal_distribution<double> g(0.0, 1.0);
    double acc = 0.0;
    const int n = 1'000'000;
    for (int i = 0; i < n; ++i) acc += std::max(-g(rng), 0.0);
    CHECK(std::fabs(acc / n - ei) < 2e-3);
  }

  SUBCASE("nonnegative everywhere") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-5, 5), s(0, 3);
    for (int i = 0; i < 2000; ++i) CHECK(expected_improvement(u(rng), s(rng), u(rng)) >= 0.0);
  }

  SUBCASE("strictly increasing in sigma at fixed mean") {
    // away from the far tail, where the value has not underflowed to zero
    for (double mu : {-1.0, 0.0, 0.5, 2.0}) {
      double prev = expected_improvement(mu, 0.45, 0.0);
      for (double s = 0.5; s <= 3.0; s += 0.1) {
        double ei = expected_improvement(mu, s, 0.0);
        CHECK(ei > prev);
        prev = ei;
      }
    }
  }
}

TEST_CASE("GP posterior matches a hand-solved three-point system") {
  // data prearranged so the internal normalizations are identities
  const double a = std::sqrt(1.5);
  std::vector<std::vector<double>> x{{0.0}, {0.5}, {1.0}};
  std::vector<double> y{a, -a, 0.0};
  const double ell = 0.3, sf = 1.2, sn = 0.05;
  auto model = GpModel::fit_fixed(x, y, ell, sf, sn, 0.0);

  auto kernel = [&](double p, double q) {
    return sf * sf * std::exp(-(p - q) * (p - q) / (2 * ell * ell));
  };
  // solve (K + sn^2 I) alpha = y by elimination
  double K[3][4];
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) K[i][j] = kernel(x[i][0], x[j][0]) + (i == j ? sn * sn : 0.0);
    K[i][3] = y[i];
  }
  for (int c = 0; c < 3; ++c) {
    for (int r = c + 1; r < 3; ++r) {
      double f = K[r][c] / K[c][c];
      for (int k = c; k < 4; ++k) K[r][k] -= f * K[c][k];
    }
  }
  double alpha[3];
  for (int r = 2; r >= 0; --r) {
    alpha[r] = K[r][3];
    for (int k = r + 1; k < 3; ++k) alpha[r] -= K[r][k] * alpha[k];
    alpha[r] /= K[r][r];
  }

  for (double q : {0.25, 0.4, 0.77}) {
    double mean = 0.0;
    for (int i = 0; i < 3; ++i) mean += kernel(q, x[i][0]) * alpha[i];
    auto p = model.predict({q});
    CHECK(p.mean == doctest::Approx(mean).epsilon(1e-9));
  }
}

TEST_CASE("GP predictive behaviour") {
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  for (int i = 0; i < 9; ++i) {
    double t = i / 8.0;
    x.push_back({t});
    y.push_back(std::sin(6.0 * t));
  }
  // standardize so the target scale is exactly one
  double mean = 0, var = 0;
  for (double v : y) mean += v;
  mean /= y.size();
  for (double v : y) var += (v - mean) * (v - mean);
  var /= y.size();
  for (auto& v : y) v = (v - mean) / std::sqrt(var);

  SUBCASE("training points reproduce with jitter-only noise") {
    auto model = GpModel::fit_fixed(x, y, 0.2, 1.0, 0.0, 1e-10);
    for (std::size_t i = 0; i < x.size(); ++i) {
      auto p = model.predict(x[i]);
      CHECK(p.mean == doctest::Approx(y[i]).epsilon(1e-6));
    }
  }

  SUBCASE("predictive sigma approaches the noise level at training points") {
    auto model = GpModel::fit_fixed(x, y, 0.2, 1.0, 1e-3, 1e-12);
    for (std::size_t i = 0; i < x.size(); ++i) {
      auto p = model.predict(x[i]);
      CHECK(p.sigma < 5e-3);
      CHECK(p.sigma >= 1e-3 * 0.9);
    }
  }

  SUBCASE("far from data the posterior reverts to the prior amplitude") {
    auto model = GpModel::fit_fixed(x, y, 0.05, 1.3, 1e-3, 1e-12);
    auto far = model.predict({25.0});
    CHECK(far.sigma == doctest::Approx(1.3).epsilon(1e-3));
    CHECK(far.mean == doctest::Approx(0.0).epsilon(1e-6));  // standardized mean
  }

  SUBCASE("consistent affine input rescaling leaves predictions unchanged") {
    auto model_raw = GpModel::fit_fixed(x, y, 0.2, 1.0, 1e-3, 1e-12);
    std::vector<std::vector<double>> x2;
    for (const auto& r : x) x2.push_back({37.0 * r[0] - 11.0});
    auto model_scaled = GpModel::fit_fixed(x2, y, 0.2, 1.0, 1e-3, 1e-12);
    for (double q : {0.1, 0.33, 0.8}) {
      CHECK(model_scaled.predict({37.0 * q - 11.0}).mean ==
            doctest::Approx(model_raw.predict({q}).mean).epsilon(1e-9));
    }
  }
}

TEST_CASE("hyperparameter training with held-out validation") {
  SUBCASE("smooth two-dimensional function reaches R2 above 0.95") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<std::vector<double>> x;
    std::vector<double> y;
    for (int i = 0; i < 100; ++i) {
      double p = u(rng), q = u(rng);
      x.push_back({p, q});
      y.push_back(p * p + q * q);
    }
    auto [model, report] = train(x, y, 2024);
    CHECK(report.n_train == 80);
    CHECK(report.n_test == 20);
    CHECK(report.r2 >= 0.95);
    CHECK(!report.flat_model_warning);
  }

  SUBCASE("constant targets produce a flat model, not a failure") {
    std::vector<std::vector<double>> x;
    std::vector<double> y;
    for (int i = 0; i < 20; ++i) {
      x.push_back({i / 19.0});
      y.push_back(3.5);
    }
    auto [model, report] = train(x, y, 5);
    CHECK(report.flat_model_warning);
    auto p = model.predict({0.37});
    CHECK(p.mean == doctest::Approx(3.5).epsilon(1e-9));
    CHECK(p.sigma < 0.05);
  }

  SUBCASE("fewer than ten samples is an error") {
    std::vector<std::vector<double>> x{{0.0}, {1.0}};
    std::vector<double> y{0.0, 1.0};
    CHECK_THROWS(train(x, y, 1));
  }
}

TEST_CASE("pareto front extraction") {
  SUBCASE("toy example") {
    auto front = pareto_front({{1, 2}, {2, 1}, {2, 2}});
    REQUIRE(front.size() == 2);
    CHECK(front[0].f1 == 1);
    CHECK(front[0].f2 == 2);
    CHECK(front[1].f1 == 2);
    CHECK(front[1].f2 == 1);
  }
  SUBCASE("single point is its own front") {
    auto front = pareto_front({{3, 4}});
    REQUIRE(front.size() == 1);
    CHECK(front[0].index == 0);
  }
  SUBCASE("1000 random points match the quadratic-time oracle exactly") {
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> u(0, 1);
    std::uniform_int_distribution<int> coarse(0, 30);
    std::vector<std::array<double, 2>> pts;
    for (int i = 0; i < 900; ++i) pts.push_back({u(rng), u(rng)});
    for (int i = 0; i < 100; ++i)  // coarse grid injects exact duplicates
      pts.push_back({coarse(rng) / 30.0, coarse(rng) / 30.0});

    auto fast = pareto_front(pts);
    auto slow = brute_force_front(pts);
    std::set<std::size_t> fast_idx, slow_idx;
    for (const auto& p : fast) fast_idx.insert(p.index);
    for (const auto& p : slow) slow_idx.insert(p.index);
    CHECK(fast_idx == slow_idx);

    SUBCASE("idempotent and ordered") {
      std::vector<std::array<double, 2>> front_pts;
      for (const auto& p : fast) front_pts.push_back({p.f1, p.f2});
      auto again = pareto_front(front_pts);
      CHECK(again.size() == fast.size());
      for (std::size_t i = 1; i < fast.size(); ++i) CHECK(fast[i].f1 >= fast[i - 1].f1);
    }
  }
}

TEST_CASE("scalarized EI search") {
  SUBCASE("zero budget returns the best discrete point unchanged") {
    BoProblem problem;
    problem.x_min = {0.0};
    problem.x_max = {1.0};
    problem.evaluate = [](const std::vector<double>& x, std::pair<int, int>) {
      return std::array<double, 2>{x[0], 1.0 - x[0]};
    };
    std::vector<BoEvaluation> initial{{{0.2}, {0, 0}, 0.2, 0.8}, {{0.7}, {0, 0}, 0.7, 0.3}};
    auto res = optimize(problem, initial, 0, 11);
    CHECK(res.evaluated.size() == 2);
    CHECK(res.best.f1 == 0.2);
    CHECK(res.improvement_fraction == 0.0);
  }

  SUBCASE("convex quadratic objectives recover the analytic trade-off curve") {
    const std::vector<double> c1{0.2, 0.3}, c2{0.8, 0.7};
    auto f = [&](const std::vector<double>& x) {
      double d1 = 0, d2 = 0;
      for (int k = 0; k < 2; ++k) {
        d1 += (x[k] - c1[k]) * (x[k] - c1[k]);
        d2 += (x[k] - c2[k]) * (x[k] - c2[k]);
      }
      return std::array<double, 2>{d1, d2};
    };
    BoProblem problem;
    problem.x_min = {0.0, 0.0};
    problem.x_max = {1.0, 1.0};
    problem.evaluate = [&](const std::vector<double>& x, std::pair<int, int>) { return f(x); };

    std::vector<BoEvaluation> initial;
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) {
        std::vector<double> x{i / 4.0, j / 4.0};
        auto v = f(x);
        initial.push_back({x, {0, 0}, v[0], v[1]});
      }

    auto res = optimize(problem, initial, 40, 2025);
    const double d = std::sqrt(0.6 * 0.6 + 0.4 * 0.4);  // |c1 - c2|
    // on the true front, sqrt(f1) + sqrt(f2) equals the distance between minima
    for (const auto& p : res.front) {
      double slack = std::sqrt(p.f1) + std::sqrt(p.f2) - d;
      CHECK(slack >= -1e-9);
      CHECK(slack < 0.08);
    }
    // both ends of the trade-off were approached
    CHECK(res.front.front().f1 < 0.02);
    CHECK(res.front.back().f2 < 0.02);
    CHECK(res.improvement_fraction >= 0.0);
  }

  SUBCASE("structural desk data: the verified best never regresses") {
    auto spec = testutil::uav_spec();
    auto coords = geometry::generate(geometry::parse_designator("NACA4412"), 120);
    domain::CaseConfig winner;
    winner.airfoil = "NACA4412";
    winner.velocity_ms = 25;
    winner.chord_m = 0.1;
    winner.kinematic_viscosity_m2_s = 8.57e-6;
    winner.reynolds = 25 * 0.1 / 8.57e-6;
    domain::FlowResult flow;
    flow.cl = 0.96;
    flow.cd = 0.04;
    flow.converged = true;
    auto loads = structures::load_cases(spec, winner, flow);

    structures::SweepBounds small;
    small.spar_width_levels = 2;
    small.rib_thickness_levels = 2;
    small.shell_thickness_levels = 2;
    auto configs = structures::sweep(small);

    auto eval_cfg = [&](const domain::StructConfig& c) {
      auto r = structures::evaluate_config(c, loads, coords, 0.1, 0.2, spec.material);
      double worst = 0;
      for (const auto& [_, s] : r.max_von_mises_mpa) worst = std::max(worst, s);
      return std::array<double, 2>{worst, r.mass_g};
    };

    BoProblem problem;
    structures::SweepBounds b;
    problem.x_min = {b.spar_width_min, b.rib_thickness_min, b.shell_thickness_min};
    problem.x_max = {b.spar_width_max, b.rib_thickness_max, b.shell_thickness_max};
    problem.combos = {{2, 2}, {2, 3}, {3, 2}, {3, 3}};
    problem.evaluate = [&](const std::vector<double>& x, std::pair<int, int> combo) {
      return eval_cfg({x[0], x[1], x[2], combo.first, combo.second});
    };
    std::vector<BoEvaluation> initial;
    for (const auto& c : configs) {
      auto v = eval_cfg(c);
      initial.push_back({{c.spar_width_mm, c.rib_thickness_mm, c.shell_thickness_mm},
                         {c.n_spars, c.n_ribs},
                         v[0],
                         v[1]});
    }
    auto res = optimize(problem, initial, 12, 31);
    CHECK(res.best.f1 <= res.best_discrete_f1);
    CHECK(res.improvement_fraction >= 0.0);
    CHECK(!res.front.empty());
  }
}
