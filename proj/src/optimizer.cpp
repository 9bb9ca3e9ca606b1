#include "aeroforge/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

#include "aeroforge/util.hpp"

namespace aeroforge::opt {

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double z) {
  // Rational tail approximation (Abramowitz & Stegun 26.2.17).
  const double x = std::fabs(z);
  const double t = 1.0 / (1.0 + 0.2316419 * x);
  const double poly =
      t * (0.319381530 +
           t * (-0.356563782 + t * (1.781477937 + t * (-1.821255978 + t * 1.330274429))));
  const double tail = normal_pdf(x) * poly;
  return z >= 0.0 ? 1.0 - tail : tail;
}

double expected_improvement(double mean, double sigma, double f_best) {
  if (sigma <= 0.0) return std::max(f_best - mean, 0.0);
  const double z = (f_best - mean) / sigma;
  // the closed form is nonnegative; clamp the far-tail cancellation residue
  return std::max(0.0, (f_best - mean) * normal_cdf(z) + sigma * normal_pdf(z));
}

// ---- Nelder-Mead (bounded by clamping) ----

namespace {

using Objective = std::function<double(const std::vector<double>&)>;

std::vector<double> nelder_mead(const Objective& f, std::vector<double> start, double step,
                                const std::vector<double>& lo, const std::vector<double>& hi,
                                int max_iter) {
  const std::size_t n = start.size();
  auto clamp_vec = [&](std::vector<double> v) {
    for (std::size_t i = 0; i < n; ++i) v[i] = std::clamp(v[i], lo[i], hi[i]);
    return v;
  };
  struct Vertex {
    std::vector<double> x;
    double fx;
  };
  std::vector<Vertex> simplex;
  start = clamp_vec(std::move(start));
  simplex.push_back({start, f(start)});
  for (std::size_t i = 0; i < n; ++i) {
    auto v = start;
    v[i] = std::clamp(v[i] + step * (hi[i] - lo[i]), lo[i], hi[i]);
    if (v[i] == start[i]) v[i] = std::clamp(v[i] - step * (hi[i] - lo[i]), lo[i], hi[i]);
    simplex.push_back({v, f(v)});
  }
  auto by_f = [](const Vertex& a, const Vertex& b) { return a.fx < b.fx; };
  for (int it = 0; it < max_iter; ++it) {
    std::sort(simplex.begin(), simplex.end(), by_f);
    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[i].x[k];
    }
    for (auto& c : centroid) c /= static_cast<double>(n);
    auto& worst = simplex.back();

    auto blend = [&](double coef) {
      std::vector<double> v(n);
      for (std::size_t k = 0; k < n; ++k) v[k] = centroid[k] + coef * (centroid[k] - worst.x[k]);
      return clamp_vec(std::move(v));
    };

    auto refl = blend(1.0);
    double f_refl = f(refl);
    if (f_refl < simplex[0].fx) {
      auto exp_v = blend(2.0);
      double f_exp = f(exp_v);
      worst = f_exp < f_refl ? Vertex{exp_v, f_exp} : Vertex{refl, f_refl};
    } else if (f_refl < simplex[n - 1].fx) {
      worst = {refl, f_refl};
    } else {
      auto contr = blend(-0.5);
      double f_contr = f(contr);
      if (f_contr < worst.fx) {
        worst = {contr, f_contr};
      } else {
        for (std::size_t i = 1; i <= n; ++i) {
          for (std::size_t k = 0; k < n; ++k)
            simplex[i].x[k] = simplex[0].x[k] + 0.5 * (simplex[i].x[k] - simplex[0].x[k]);
          simplex[i].fx = f(simplex[i].x);
        }
      }
    }
  }
  std::sort(simplex.begin(), simplex.end(), by_f);
  return simplex[0].x;
}

}  // namespace

// ---- Gaussian process ----

void GpModel::build_distance_cache() {
  const Eigen::Index n = x_.rows();
  Eigen::VectorXd sq = x_.rowwise().squaredNorm();
  d2_ = (sq.replicate(1, n) + sq.transpose().replicate(n, 1) - 2.0 * x_ * x_.transpose())
            .cwiseMax(0.0);
}

void GpModel::factorize(double ell, double sf, double sn, double jitter) {
  if (d2_.rows() != x_.rows()) build_distance_cache();
  const Eigen::Index n = x_.rows();
  Eigen::MatrixXd k = (sf * sf) * (-d2_ / (2.0 * ell * ell)).array().exp().matrix();
  double jit = jitter;
  for (int attempt = 0; attempt < 8; ++attempt) {
    Eigen::MatrixXd kn = k;
    kn.diagonal().array() += sn * sn + jit;
    llt_.compute(kn);
    if (llt_.info() == Eigen::Success) {
      alpha_ = llt_.solve(y_);
      ell_ = ell;
      sf_ = sf;
      sn_ = sn;
      double log_det = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) log_det += std::log(llt_.matrixL()(i, i));
      lml_ = -0.5 * y_.dot(alpha_) - log_det -
             0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
      return;
    }
    jit *= 10.0;  // escalate and retry
  }
  throw std::runtime_error("GP kernel factorization failed after jitter escalation");
}

namespace {
void standardize_setup(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                       Eigen::MatrixXd& xm, Eigen::VectorXd& yv, std::vector<double>& lo,
                       std::vector<double>& range, double& y_mean, double& y_scale, bool& flat) {
  if (x.empty() || x.size() != y.size()) throw std::invalid_argument("GP: bad training data");
  const std::size_t n = x.size(), d = x[0].size();
  lo.assign(d, std::numeric_limits<double>::infinity());
  std::vector<double> hi(d, -std::numeric_limits<double>::infinity());
  for (const auto& row : x) {
    if (row.size() != d) throw std::invalid_argument("GP: ragged inputs");
    for (std::size_t k = 0; k < d; ++k) {
      lo[k] = std::min(lo[k], row[k]);
      hi[k] = std::max(hi[k], row[k]);
    }
  }
  range.resize(d);
  for (std::size_t k = 0; k < d; ++k) range[k] = (hi[k] > lo[k]) ? hi[k] - lo[k] : 1.0;
  xm.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < d; ++k)
      xm(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = (x[i][k] - lo[k]) / range[k];

  y_mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (double v : y) var += (v - y_mean) * (v - y_mean);
  var /= static_cast<double>(n);
  flat = var <= 0.0;
  y_scale = flat ? 1.0 : std::sqrt(var);
  yv.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) yv(static_cast<Eigen::Index>(i)) = (y[i] - y_mean) / y_scale;
}
}  // namespace

GpModel GpModel::fit_fixed(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                           double lengthscale, double signal_sigma, double noise_sigma,
                           double jitter) {
  GpModel m;
  standardize_setup(x, y, m.x_, m.y_, m.x_lo_, m.x_range_, m.y_mean_, m.y_scale_, m.flat_);
  m.factorize(lengthscale, signal_sigma, noise_sigma, jitter);
  return m;
}

GpModel GpModel::fit(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                     const GpConfig& config) {
  GpModel m;
  standardize_setup(x, y, m.x_, m.y_, m.x_lo_, m.x_range_, m.y_mean_, m.y_scale_, m.flat_);
  if (m.flat_) {
    m.factorize(1.0, 1.0, std::max(config.noise_sigma_min, 1e-4), config.jitter);
    return m;
  }

  const std::vector<double> lo{std::log(config.lengthscale_min), std::log(1e-2),
                               std::log(config.noise_sigma_min)};
  const std::vector<double> hi{std::log(config.lengthscale_max), std::log(1e2),
                               std::log(config.noise_sigma_max)};
  m.build_distance_cache();
  auto objective = [&](const std::vector<double>& theta) {
    GpModel probe;
    probe.x_ = m.x_;
    probe.d2_ = m.d2_;  // reuse the cached distances across the search
    probe.y_ = m.y_;
    try {
      probe.factorize(std::exp(theta[0]), std::exp(theta[1]), std::exp(theta[2]), config.jitter);
    } catch (const std::exception&) {
      return 1e30;
    }
    return -probe.log_marginal_likelihood();
  };

  auto rng = util::seeded_rng(config.seed, "gp-multistart");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double best_obj = std::numeric_limits<double>::infinity();
  std::vector<double> best_theta{0.0, 0.0, std::log(1e-3)};
  for (int s = 0; s < config.multistarts; ++s) {
    std::vector<double> start(3);
    for (int k = 0; k < 3; ++k) start[k] = lo[k] + (hi[k] - lo[k]) * u(rng);
    auto theta = nelder_mead(objective, start, 0.15, lo, hi, config.nm_iterations);
    double v = objective(theta);
    if (v < best_obj) {
      best_obj = v;
      best_theta = theta;
    }
  }
  m.factorize(std::exp(best_theta[0]), std::exp(best_theta[1]), std::exp(best_theta[2]),
              config.jitter);
  return m;
}

Eigen::VectorXd GpModel::normalize(const std::vector<double>& x) const {
  if (x.size() != x_lo_.size()) throw std::invalid_argument("GP predict: dimension mismatch");
  Eigen::VectorXd v(static_cast<Eigen::Index>(x.size()));
  for (std::size_t k = 0; k < x.size(); ++k)
    v(static_cast<Eigen::Index>(k)) = (x[k] - x_lo_[k]) / x_range_[k];
  return v;
}

GpModel::Prediction GpModel::predict(const std::vector<double>& x) const {
  Eigen::VectorXd q = normalize(x);
  const Eigen::Index n = x_.rows();
  Eigen::VectorXd kstar(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double d2 = (x_.row(i).transpose() - q).squaredNorm();
    kstar(i) = sf_ * sf_ * std::exp(-d2 / (2.0 * ell_ * ell_));
  }
  Prediction p;
  p.mean = y_mean_ + y_scale_ * kstar.dot(alpha_);
  Eigen::VectorXd v = llt_.matrixL().solve(kstar);
  double latent = sf_ * sf_ - v.squaredNorm();
  double var = std::max(0.0, latent) + sn_ * sn_;
  p.sigma = y_scale_ * std::sqrt(var);
  return p;
}

std::pair<GpModel, ValidationReport> train(const std::vector<std::vector<double>>& samples,
                                           const std::vector<double>& targets,
                                           std::uint64_t split_seed, const GpConfig& config) {
  if (samples.size() < 10) throw std::invalid_argument("train: need at least 10 samples");
  std::vector<std::size_t> idx(samples.size());
  std::iota(idx.begin(), idx.end(), 0);
  auto rng = util::seeded_rng(split_seed, "gp-split");
  std::shuffle(idx.begin(), idx.end(), rng);
  const std::size_t n_train = samples.size() - samples.size() / 5;

  std::vector<std::vector<double>> xt, xv;
  std::vector<double> yt, yv;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (i < n_train) {
      xt.push_back(samples[idx[i]]);
      yt.push_back(targets[idx[i]]);
    } else {
      xv.push_back(samples[idx[i]]);
      yv.push_back(targets[idx[i]]);
    }
  }

  GpModel model = GpModel::fit(xt, yt, config);
  ValidationReport rep;
  rep.n_train = xt.size();
  rep.n_test = xv.size();
  rep.flat_model_warning = model.flat_targets();

  double mean = std::accumulate(yv.begin(), yv.end(), 0.0) / static_cast<double>(yv.size());
  double sse = 0.0, sst = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) {
    double pred = model.predict(xv[i]).mean;
    sse += (pred - yv[i]) * (pred - yv[i]);
    sst += (yv[i] - mean) * (yv[i] - mean);
  }
  rep.rmse = std::sqrt(sse / static_cast<double>(xv.size()));
  rep.r2 = sst > 0 ? 1.0 - sse / sst : (sse < 1e-12 ? 1.0 : 0.0);
  return {std::move(model), rep};
}

// ---- Pareto ----

std::vector<ParetoPoint> pareto_front(const std::vector<std::array<double, 2>>& points) {
  if (points.empty()) throw std::invalid_argument("pareto_front: no points");
  std::vector<ParetoPoint> all;
  all.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) all.push_back({points[i][0], points[i][1], i});
  std::stable_sort(all.begin(), all.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
    if (a.f1 != b.f1) return a.f1 < b.f1;
    return a.f2 < b.f2;
  });
  std::vector<ParetoPoint> front;
  double best_f2 = std::numeric_limits<double>::infinity();
  for (const auto& p : all) {
    bool duplicate_of_kept =
        !front.empty() && front.back().f1 == p.f1 && front.back().f2 == p.f2;
    if (p.f2 < best_f2 || duplicate_of_kept) {
      front.push_back(p);
      best_f2 = std::min(best_f2, p.f2);
    }
  }
  return front;
}

// ---- Bayesian optimization ----

namespace {

struct Scalarizer {
  double w = 0.5;
  double f1_lo = 0, f1_range = 1, f2_lo = 0, f2_range = 1;

  static Scalarizer make(const std::vector<BoEvaluation>& evals, double w) {
    Scalarizer s;
    s.w = w;
    double f1_hi = -std::numeric_limits<double>::infinity();
    double f2_hi = -std::numeric_limits<double>::infinity();
    s.f1_lo = std::numeric_limits<double>::infinity();
    s.f2_lo = std::numeric_limits<double>::infinity();
    for (const auto& e : evals) {
      s.f1_lo = std::min(s.f1_lo, e.f1);
      f1_hi = std::max(f1_hi, e.f1);
      s.f2_lo = std::min(s.f2_lo, e.f2);
      f2_hi = std::max(f2_hi, e.f2);
    }
    s.f1_range = f1_hi > s.f1_lo ? f1_hi - s.f1_lo : 1.0;
    s.f2_range = f2_hi > s.f2_lo ? f2_hi - s.f2_lo : 1.0;
    return s;
  }

  double operator()(double f1, double f2) const {
    double a = w * (f1 - f1_lo) / f1_range;
    double b = (1.0 - w) * (f2 - f2_lo) / f2_range;
    return std::max(a, b) + 0.05 * (a + b);  // augmented Chebyshev
  }
};

}  // namespace

BoResult optimize(const BoProblem& problem, const std::vector<BoEvaluation>& initial, int budget,
                  std::uint64_t seed, const GpConfig& gp_config) {
  if (initial.empty()) throw std::invalid_argument("optimize: no initial evaluations");
  if (problem.x_min.size() != problem.x_max.size() || problem.x_min.empty())
    throw std::invalid_argument("optimize: bad box constraints");
  const std::size_t dim = problem.x_min.size();

  BoResult out;
  out.evaluated = initial;
  out.best_discrete_f1 = std::numeric_limits<double>::infinity();
  for (const auto& e : initial) out.best_discrete_f1 = std::min(out.best_discrete_f1, e.f1);

  auto rng = util::seeded_rng(seed, "bo-loop");
  std::uniform_real_distribution<double> uw(0.05, 0.95);
  std::uniform_real_distribution<double> ux(0.0, 1.0);

  const int combos = static_cast<int>(problem.combos.size());
  for (int ci = 0; ci < combos && budget > 0; ++ci) {
    const auto combo = problem.combos[ci];
    int combo_budget = budget / combos + (ci < budget % combos ? 1 : 0);

    GpConfig gc = gp_config;
    gc.multistarts = std::max(2, gp_config.multistarts / 2);
    gc.nm_iterations = 80;
    double fitted_ell = 0, fitted_sf = 0, fitted_sn = 0;

    for (int it = 0; it < combo_budget; ++it) {
      // data conditioned on this integer combination
      std::vector<std::vector<double>> xs;
      std::vector<double> gs;
      Scalarizer sc = Scalarizer::make(out.evaluated, uw(rng));
      for (const auto& e : out.evaluated) {
        if (e.combo != combo) continue;
        xs.push_back(e.x);
        gs.push_back(sc(e.f1, e.f2));
      }
      if (xs.size() < 3) break;

      GpModel model = [&] {
        if (it == 0 || fitted_ell == 0) {
          gc.seed = seed + static_cast<std::uint64_t>(ci) * 1000 + it;
          GpModel m = GpModel::fit(xs, gs, gc);
          fitted_ell = m.lengthscale();
          fitted_sf = m.signal_sigma();
          fitted_sn = m.noise_sigma();
          return m;
        }
        return GpModel::fit_fixed(xs, gs, fitted_ell, fitted_sf, fitted_sn, gc.jitter);
      }();

      double f_best = *std::min_element(gs.begin(), gs.end());
      auto neg_ei = [&](const std::vector<double>& x) {
        auto p = model.predict(x);
        return -expected_improvement(p.mean, p.sigma, f_best);
      };

      // candidate search: random seeds plus a local polish of the best one
      std::vector<double> best_x(dim);
      double best_v = std::numeric_limits<double>::infinity();
      for (int c = 0; c < 192; ++c) {
        std::vector<double> x(dim);
        for (std::size_t k = 0; k < dim; ++k)
          x[k] = problem.x_min[k] + (problem.x_max[k] - problem.x_min[k]) * ux(rng);
        double v = neg_ei(x);
        if (v < best_v) {
          best_v = v;
          best_x = x;
        }
      }
      best_x = nelder_mead(neg_ei, best_x, 0.08, problem.x_min, problem.x_max, 60);

      auto f = problem.evaluate(best_x, combo);
      out.evaluated.push_back({best_x, combo, f[0], f[1]});
    }
  }

  // best verified design and the nondominated set over everything evaluated
  const BoEvaluation* best = &out.evaluated.front();
  for (const auto& e : out.evaluated)
    if (e.f1 < best->f1) best = &e;
  out.best = *best;
  out.improvement_fraction =
      out.best_discrete_f1 != 0.0
          ? (out.best_discrete_f1 - out.best.f1) / std::fabs(out.best_discrete_f1)
          : 0.0;

  std::vector<std::array<double, 2>> pts;
  pts.reserve(out.evaluated.size());
  for (const auto& e : out.evaluated) pts.push_back({e.f1, e.f2});
  out.front = pareto_front(pts);
  return out;
}

}  // namespace aeroforge::opt
