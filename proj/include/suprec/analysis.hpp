#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "suprec/methods.hpp"
#include "suprec/model.hpp"
#include "suprec/prox.hpp"

namespace suprec {

/// How Gaussian moments E[h(g)] are evaluated.
struct MomentMethod {
  enum class Kind { quadrature, monte_carlo };
  Kind kind = Kind::quadrature;
  Index trials = 1000000;  // Monte Carlo only
  std::uint64_t seed = 0;
  unsigned threads = 1;

  static MomentMethod quadrature() { return {}; }
  static MomentMethod monte_carlo(Index trials, std::uint64_t seed = 0, unsigned threads = 1) {
    return {Kind::monte_carlo, trials, seed, threads};
  }
};

struct ScalarEstimate {
  double value = 0.0;
  double std_error = 0.0;  // 0 for quadrature
  Index trials = 0;
};

/// mu = E[f(c g) g] / c for g ~ N(0,1) and source scale c (= ||x0||).
/// Quadrature is exact to ~1e-10 for piecewise smooth f with declared
/// breakpoints; random kinds need Monte Carlo (unsupported_operation otherwise).
ScalarEstimate estimate_scaling_parameter(const Nonlinearity& f, const MomentMethod& method = {},
                                          double source_scale = 1.0);
double scaling_parameter(const Nonlinearity& f, const MomentMethod& method = {},
                         double source_scale = 1.0);

struct ScalingProfile {
  VectorXd mu;
  double mu_bar = 0.0;
  VectorXd mu_tilde;  // (N/M) W^T mu; equals (mu_bar) without weights
  MomentMethod method;
};

ScalingProfile scaling_profile(const std::vector<Nonlinearity>& nonlinearities,
                               const std::optional<WeightMatrix>& weights = std::nullopt,
                               double source_scale = 1.0, const MomentMethod& method = {});

/// (N/M) W^T mu.
VectorXd hybrid_scaling_vector(const VectorXd& mu, const MatrixXd& weights);

/// Linear surrogate (a, y) -> (a', y') whose mismatch is measured.
///   direct:  (abar / sqrt(M), y / sqrt(M)), x_natural is n x 1
///   lifting: (A, y), x_natural is n x M
///   hybrid:  (sqrt(N/M) A W, sqrt(N/M) y), x_natural is n x N
struct CombinedDesign {
  enum class Kind { direct, lifting, hybrid };
  Kind kind = Kind::direct;
  MatrixXd weights;  // hybrid only

  static CombinedDesign direct() { return {}; }
  static CombinedDesign lifting() { return {Kind::lifting, {}}; }
  static CombinedDesign hybrid(const WeightMatrix& w) { return {Kind::hybrid, w.entries()}; }
};

/// Estimate of rho(x)^2 = ||E[(<a', x> - y') a']||^2.
///
/// The plug-in norm ||mean(z)|| is biased upward by about sqrt(tr Cov(z) / T),
/// so the primary estimate is the unbiased U-statistic
/// (||sum z||^2 - sum ||z||^2) / (T (T - 1)) with its jackknife standard error.
struct MismatchCovarianceEstimate {
  double rho_squared = 0.0;
  double rho_squared_std_error = 0.0;
  double rho_norm = 0.0;      // sqrt(max(0, rho_squared))
  double plug_in_norm = 0.0;  // ||mean z||
  Index samples = 0;

  /// |rho_squared| <= k * rho_squared_std_error.
  bool consistent_with_zero(double k = 4.0) const;
};

MismatchCovarianceEstimate empirical_mismatch_covariance(const MatrixXd& x_natural,
                                                         const MeasurementEnsemble& ens,
                                                         const CombinedDesign& design);
/// Streams T samples from the sampler (two passes, nothing stored).
MismatchCovarianceEstimate empirical_mismatch_covariance(const MatrixXd& x_natural,
                                                         const EnsembleSampler& sampler,
                                                         Index samples,
                                                         const CombinedDesign& design,
                                                         unsigned threads = 1);

/// max_{p in {2,4,6,8}} p^{-1/2} (mean |z|^p)^{1/p} of the surrogate residual
/// z = <a', x> - y'.
double empirical_mismatch_deviation(const MatrixXd& x_natural, const MeasurementEnsemble& ens,
                                    const CombinedDesign& design);

/// The same moment proxy for a function of one standard Gaussian, by quadrature.
double subgaussian_norm_proxy(const std::function<double(double)>& fn,
                              std::span<const double> breakpoints = {});

/// sigma_Dir = sqrt((1/M) sum_j ||f_j(g) - mubar g||^2).
double sigma_dir(const std::vector<Nonlinearity>& nonlinearities);
/// sigma_Lift = sqrt((1/M) sum_j ||f_j(g) - mu_j g||^2).
double sigma_lift(const std::vector<Nonlinearity>& nonlinearities);
/// sigma_Hyb = sqrt((1/M) sum_j ||c_j g - f_j(g)||^2), c = W W^T mu.
double sigma_hyb(const std::vector<Nonlinearity>& nonlinearities, const WeightMatrix& w);

struct IsotropyMismatch {
  MatrixXd rho;         // n x M, column j = rho^j
  MatrixXd std_errors;  // per entry
  Index trials = 0;
};

/// Monte-Carlo estimate of rho^j = E[f_j(<a, x0>) (a - <a, x0> x0)].
IsotropyMismatch isotropy_mismatch_vectors(const std::vector<Nonlinearity>& nonlinearities,
                                           const DistributionSpec& dist, const VectorXd& x0,
                                           Index trials, std::uint64_t seed = 0,
                                           unsigned threads = 1);

/// ||rho W||_F / sqrt(N).
double rho_hyb(const MatrixXd& rho_vectors, const MatrixXd& weights);

struct MismatchProfile {
  MatrixXd rho_vectors;
  MatrixXd rho_std_errors;
  double rho_norm = 0.0;  // empirical rho(x_natural), filled by the caller
  double sigma = 0.0;     // empirical sigma(x_natural), filled by the caller
  double sigma_dir = 0.0;
  double sigma_lift = 0.0;
  double sigma_hyb = 0.0;
  double rho_hyb = 0.0;
};

/// Model-level parameters for unit x0: isotropy mismatch vectors, sigma_Dir,
/// sigma_Lift, sigma_Hyb and rho_Hyb (W = ones(M, 1) when absent).
MismatchProfile mismatch_profile(const std::vector<Nonlinearity>& nonlinearities,
                                 const DistributionSpec& dist, const VectorXd& x0,
                                 const std::optional<WeightMatrix>& weights, Index trials,
                                 std::uint64_t seed = 0, unsigned threads = 1);

struct WidthEstimate {
  enum class Kind { global, conic };
  Kind kind = Kind::global;
  double value = 0.0;  // mean of the per-sample values
  double std_error = 0.0;
  /// Conic only: mean of the squared per-sample distances (the quantity the
  /// width bounds control) and its standard error.
  double squared_value = 0.0;
  double squared_std_error = 0.0;
  Index trials = 0;
};

/// E sup_{h in K} <g, h> with the supremum in closed form per sample.
/// Unbounded K throws unsupported_operation.
WidthEstimate global_mean_width(const ConstraintSet& set, Index trials, std::uint64_t seed = 0,
                                unsigned threads = 1);

/// min_{tau >= 0} dist(g, tau * subdiff ||.||_1 (x))^2 for one sample g.
double conic_distance_sq_l1(const VectorXd& x_natural, const VectorXd& g);
/// min_{tau >= 0} dist(G, tau * subdiff ||.||_{1,2} (x0 mu^T))^2 for one sample G.
double conic_distance_sq_l12(const VectorXd& x0, const VectorXd& mu, const MatrixXd& g);

/// E min_{tau >= 0} dist(g, tau * subdiff ||.||_1 (x)).
WidthEstimate conic_mean_width_l1(const VectorXd& x_natural, Index trials, std::uint64_t seed = 0,
                                  unsigned threads = 1);

/// E min_{tau >= 0} dist(G, tau * subdiff ||.||_{1,2} (x0 mu^T)), G n x M.
WidthEstimate conic_mean_width_l12(const VectorXd& x0, const VectorXd& mu, Index trials,
                                   std::uint64_t seed = 0, unsigned threads = 1);

/// Sample-size formulas with every unspecified constant set to 1.
struct SampleComplexityQuery {
  enum class Rule {
    direct,         // delta^-2 s log(2n/s)
    lifting,        // delta^-2 s max(M, log(2n/s))
    hybrid_conic,   // kappa^4 delta^-2 w^2
    hybrid_global,  // kappa^4 delta^-4 w^2
  };
  Rule rule = Rule::direct;
  Index s = 1;
  Index n = 1;
  Index nodes = 1;
  double delta = 1.0;
  double width = 0.0;
  double kappa = 1.0;
};

double sample_complexity(const SampleComplexityQuery& query);

}  // namespace suprec
