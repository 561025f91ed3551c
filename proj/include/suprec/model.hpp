#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "suprec/rng.hpp"

namespace suprec {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Unit-norm s-sparse source with its support.
struct SourceVector {
  VectorXd entries;
  std::vector<Index> support;  // sorted
  Index sparsity_budget = 0;

  Index dimension() const { return entries.size(); }
};

/// Draws a unit-norm vector with exactly s nonzeros on a uniformly random
/// support; the nonzeros are i.i.d. Gaussian before normalization.
SourceVector generate_sparse_source(Index n, Index s, std::uint64_t seed);

/// Scalar output function of one sensor node. Immutable; copies share the
/// expression tree.
class Nonlinearity {
 public:
  enum class Kind { identity, clip, scale, sign, compose, random_sign_flip, custom };

  static Nonlinearity identity();
  /// sign(v) * min(|v|, amplitude); amplitude must be positive.
  static Nonlinearity clip(double amplitude);
  /// v -> h * v (channel coefficient).
  static Nonlinearity scale(double coefficient);
  static Nonlinearity sign();
  /// v -> outer(inner(v)).
  static Nonlinearity compose(Nonlinearity outer, Nonlinearity inner);
  /// Flips the sign of base(v) with probability p, independently per call.
  static Nonlinearity random_sign_flip(double p, Nonlinearity base);
  /// Arbitrary deterministic function. `odd` declares f(-v) = -f(v);
  /// `breakpoints` lists kinks or jumps so quadrature can split there.
  static Nonlinearity custom(std::string name, std::function<double(double)> fn,
                             bool odd, std::vector<double> breakpoints = {});

  Kind kind() const;
  double amplitude() const;    // clip only
  double coefficient() const;  // scale only
  double flip_probability() const;

  bool is_odd() const;
  bool is_random() const;

  /// Evaluates f(v). The stream is only consumed by random kinds.
  double operator()(double v, Stream& rng) const;
  /// Deterministic evaluation; throws unsupported_operation for random kinds.
  double operator()(double v) const;

  /// Sorted input locations where f is not smooth.
  std::vector<double> breakpoints() const;
  std::string describe() const;

  struct Node;  // expression-tree node, defined in model.cpp

 private:
  explicit Nonlinearity(std::shared_ptr<const Node> node);
  std::shared_ptr<const Node> node_;
};

/// Law of the measurement vectors. Every family is isotropic and mean-zero.
struct DistributionSpec {
  enum class Family { gaussian, rademacher, uniform_isotropic };

  Family family = Family::gaussian;
  double kappa_hint = 1.0;

  void sample(Stream& rng, Eigen::Ref<VectorXd> out) const;
  bool symmetric() const { return true; }
};

std::string to_string(DistributionSpec::Family family);
DistributionSpec::Family parse_family(const std::string& name);

/// Which signal power a target SNR refers to.
enum class SnrReference {
  aggregate,  // Var(sum_j f_j)
  per_node,   // Var(sum_j f_j) / M
};

struct NoiseScale {
  double nu = 0.0;
};

struct TargetSnr {
  double db = 0.0;
  SnrReference reference = SnrReference::aggregate;
};

using NoiseSpec = std::variant<NoiseScale, TargetSnr>;

struct ObservationSpec {
  Index node_count = 1;
  Index sample_count = 1;
  NoiseSpec noise = NoiseScale{0.0};
  std::vector<Nonlinearity> nonlinearities;
  DistributionSpec distribution;
  std::uint64_t seed = 0;
  double source_scale = 1.0;

  void validate() const;
};

/// m draws of {a_i^j} together with y_i = sum_j f_j(<a_i^j, x0>) + e_i.
struct MeasurementEnsemble {
  std::vector<MatrixXd> vectors;  // vectors[i] is n x M, column j = a_i^j
  VectorXd observations;
  ObservationSpec spec;
  double noise_sigma = 0.0;  // resolved noise scale

  Index sample_count() const { return observations.size(); }
  Index node_count() const { return spec.node_count; }
  Index dimension() const { return vectors.empty() ? 0 : vectors.front().rows(); }
};

/// Generates single samples of the ensemble on demand. Sample i depends
/// only on (seed, i), so streaming and stored ensembles agree bit for bit.
class EnsembleSampler {
 public:
  /// Validates the spec, runs the centering check for non-odd outputs and
  /// resolves a target SNR into a noise scale from 10^4 pilot samples.
  EnsembleSampler(const SourceVector& x0, ObservationSpec spec);

  /// Fills the n x M matrix of sample i and returns y_i.
  double sample(Index i, Eigen::Ref<MatrixXd> vectors) const;
  /// Noise-free part sum_j f_j(<a_i^j, x0>) of sample i.
  double signal(Index i, Eigen::Ref<MatrixXd> vectors) const;

  double noise_sigma() const { return noise_sigma_; }
  const ObservationSpec& spec() const { return spec_; }
  const VectorXd& source() const { return source_; }

 private:
  double signal_in_domain(StreamDomain domain, Index i, const VectorXd& source,
                          Eigen::Ref<MatrixXd> vectors) const;

  VectorXd source_;
  ObservationSpec spec_;
  double noise_sigma_ = 0.0;
};

MeasurementEnsemble generate_ensemble(const SourceVector& x0, const ObservationSpec& spec,
                                      unsigned threads = 1);

struct CenteringReport {
  double mean = 0.0;
  double std_error = 0.0;
  Index trials = 0;
  bool passed = false;
};

/// Monte-Carlo check of E[f(<a, x>)] = 0. Without a direction, x is the
/// normalized all-ones vector in R^16 (exactly N(0,1) projections for the
/// Gaussian family). Passes iff |mean| <= 4 * std / sqrt(trials).
CenteringReport check_centering(const Nonlinearity& f, const DistributionSpec& dist,
                                Index trials, std::uint64_t seed = 0,
                                const std::optional<VectorXd>& direction = std::nullopt);

}  // namespace suprec
