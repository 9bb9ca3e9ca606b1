#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace aeroforge::opt {

/// Standard normal density.
double normal_pdf(double z);

/// Standard normal CDF via a rational tail approximation (absolute error
/// below 7.5e-8 across the real line).
double normal_cdf(double z);

struct GpConfig {
  double lengthscale_min = 1e-2;   // normalized input units
  double lengthscale_max = 10.0;
  double noise_sigma_min = 1e-6;   // standardized target units
  double noise_sigma_max = 1.0;
  int multistarts = 8;
  int nm_iterations = 120;
  double jitter = 1e-8;
  std::uint64_t seed = 0;
};

/// Gaussian-process regressor with an isotropic RBF kernel
/// k(x,x') = sf^2 exp(-|x-x'|^2 / (2 l^2)) + sn^2 I.
/// Inputs are min-max normalized and targets standardized internally, so a
/// consistent affine rescaling of all inputs leaves predictions unchanged.
class GpModel {
 public:
  /// Fits hyperparameters by maximizing the log marginal likelihood with
  /// multi-start Nelder-Mead under the configured bounds.
  static GpModel fit(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                     const GpConfig& config = {});

  /// Fits only the linear algebra with the given hyperparameters
  /// (lengthscale/signal/noise in normalized-input, standardized-target units).
  static GpModel fit_fixed(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                           double lengthscale, double signal_sigma, double noise_sigma,
                           double jitter = 1e-8);

  struct Prediction {
    double mean = 0.0;
    double sigma = 0.0;
  };
  Prediction predict(const std::vector<double>& x) const;

  double lengthscale() const { return ell_; }
  double signal_sigma() const { return sf_; }
  double noise_sigma() const { return sn_; }
  double log_marginal_likelihood() const { return lml_; }
  bool flat_targets() const { return flat_; }

 private:
  GpModel() = default;
  void factorize(double ell, double sf, double sn, double jitter);
  Eigen::VectorXd normalize(const std::vector<double>& x) const;
  void build_distance_cache();

  Eigen::MatrixXd x_;      // normalized inputs, n x d
  Eigen::MatrixXd d2_;     // pairwise squared distances, cached across fits
  Eigen::VectorXd y_;      // standardized targets
  Eigen::VectorXd alpha_;  // K^-1 y
  Eigen::LLT<Eigen::MatrixXd> llt_;
  std::vector<double> x_lo_, x_range_;
  double y_mean_ = 0.0, y_scale_ = 1.0;
  double ell_ = 1.0, sf_ = 1.0, sn_ = 1e-3;
  double lml_ = 0.0;
  bool flat_ = false;
};

struct ValidationReport {
  double r2 = 0.0;
  double rmse = 0.0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  bool flat_model_warning = false;
};

/// 80/20 split by seeded shuffle; the model is fitted on the training share
/// and the report scores the held-out share.
std::pair<GpModel, ValidationReport> train(const std::vector<std::vector<double>>& samples,
                                           const std::vector<double>& targets,
                                           std::uint64_t split_seed, const GpConfig& config = {});

/// Expected improvement under the minimization convention. sigma = 0 falls
/// back to the closed-form limit max(f_best - mean, 0).
double expected_improvement(double mean, double sigma, double f_best);

struct ParetoPoint {
  double f1 = 0.0;
  double f2 = 0.0;
  std::size_t index = 0;  // position in the input list
};

/// Exact nondominated filtering for two minimized objectives, ordered by the
/// first objective. Duplicated nondominated points are all retained.
std::vector<ParetoPoint> pareto_front(const std::vector<std::array<double, 2>>& points);

/// One evaluated design: continuous coordinates, an integer-combination tag,
/// and the two verified objective values.
struct BoEvaluation {
  std::vector<double> x;
  std::pair<int, int> combo{0, 0};
  double f1 = 0.0;
  double f2 = 0.0;
};

struct BoProblem {
  std::vector<double> x_min, x_max;               // continuous box constraints
  std::vector<std::pair<int, int>> combos{{0, 0}};  // integer conditioning
  std::function<std::array<double, 2>(const std::vector<double>&, std::pair<int, int>)> evaluate;
};

struct BoResult {
  BoEvaluation best;            // minimum verified f1 over everything evaluated
  double best_discrete_f1 = 0.0;
  double improvement_fraction = 0.0;  // (best_discrete - best)/best_discrete
  std::vector<BoEvaluation> evaluated;  // initial set plus proposals
  std::vector<ParetoPoint> front;       // indices into `evaluated`
};

/// Expected-improvement search over the continuous box, run per integer
/// combination and merged. Each iteration scalarizes the two normalized
/// objectives with a random-weight Chebyshev combination, fits the surrogate
/// to the scalarized values, and proposes the EI maximizer, which is then
/// verified by the problem evaluator. budget counts verified proposals.
BoResult optimize(const BoProblem& problem, const std::vector<BoEvaluation>& initial, int budget,
                  std::uint64_t seed, const GpConfig& gp_config = {});

}  // namespace aeroforge::opt
