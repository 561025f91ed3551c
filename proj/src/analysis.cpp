#include "suprec/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "suprec/errors.hpp"
#include "suprec/parallel.hpp"
#include "suprec/quadrature.hpp"
#include "suprec/rng.hpp"

namespace suprec {

namespace {

// Welford accumulator with the Chan et al. merge, so chunk results can be
// combined in a fixed order independent of the thread count.
struct RunningStats {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    count += 1.0;
    const double delta = x - mean;
    mean += delta / count;
    m2 += delta * (x - mean);
  }

  void merge(const RunningStats& o) {
    if (o.count == 0.0) return;
    const double total = count + o.count;
    const double delta = o.mean - mean;
    mean += delta * o.count / total;
    m2 += o.m2 + delta * delta * count * o.count / total;
    count = total;
  }

  double variance() const { return count > 1.0 ? m2 / (count - 1.0) : 0.0; }
  double std_error() const { return count > 0.0 ? std::sqrt(variance() / count) : 0.0; }
};

constexpr Index kChunk = 2048;

// Runs fn(first, last, stream, acc) over fixed chunks of [0, total). Each chunk
// owns one stream and one accumulator; accumulators are returned in order.
template <class Acc, class Fn>
std::vector<Acc> run_chunks(Index total, unsigned threads, std::uint64_t seed, std::uint32_t tag,
                            const Acc& init, Fn&& fn) {
  const Index chunks = (total + kChunk - 1) / kChunk;
  std::vector<Acc> out(static_cast<std::size_t>(chunks), init);
  parallel_for(static_cast<std::size_t>(chunks), threads, [&](std::size_t c) {
    const Index first = static_cast<Index>(c) * kChunk;
    const Index last = std::min(total, first + kChunk);
    Stream rng(seed, StreamDomain::monte_carlo, static_cast<std::uint32_t>(c), tag);
    fn(first, last, rng, out[c]);
  });
  return out;
}

RunningStats merged(const std::vector<RunningStats>& parts) {
  RunningStats all;
  for (const auto& p : parts) all.merge(p);
  return all;
}

void require_quadrature_capable(const Nonlinearity& f) {
  if (f.is_random())
    throw unsupported_operation("quadrature of a random nonlinearity (" + f.describe() +
                                "); use Monte Carlo");
}

// Breakpoints of v -> f(c v).
std::vector<double> scaled_breakpoints(const Nonlinearity& f, double c) {
  auto b = f.breakpoints();
  for (double& v : b) v /= c;
  return b;
}

void require_nodes(const std::vector<Nonlinearity>& fs) {
  if (fs.empty()) throw std::invalid_argument("analysis: at least one nonlinearity required");
}

}  // namespace

// ---------------------------------------------------------------- scaling

ScalarEstimate estimate_scaling_parameter(const Nonlinearity& f, const MomentMethod& method,
                                          double source_scale) {
  if (!(source_scale > 0.0) || !std::isfinite(source_scale))
    throw std::invalid_argument("scaling_parameter: source_scale must be > 0");
  const double c = source_scale;
  ScalarEstimate out;
  if (method.kind == MomentMethod::Kind::quadrature) {
    require_quadrature_capable(f);
    const auto b = scaled_breakpoints(f, c);
    out.value = gaussian_expectation([&](double g) { return f(c * g) * g; }, b) / c;
    return out;
  }
  if (method.trials < 2) throw std::invalid_argument("scaling_parameter: need >= 2 trials");
  const auto parts = run_chunks(method.trials, method.threads, method.seed, 0x5CA1u, RunningStats{},
                                [&](Index first, Index last, Stream& rng, RunningStats& acc) {
                                  for (Index t = first; t < last; ++t) {
                                    const double g = rng.normal();
                                    acc.add(f(c * g, rng) * g / c);
                                  }
                                });
  const auto all = merged(parts);
  out.value = all.mean;
  out.std_error = all.std_error();
  out.trials = method.trials;
  return out;
}

double scaling_parameter(const Nonlinearity& f, const MomentMethod& method, double source_scale) {
  return estimate_scaling_parameter(f, method, source_scale).value;
}

VectorXd hybrid_scaling_vector(const VectorXd& mu, const MatrixXd& weights) {
  if (weights.rows() != mu.size())
    throw std::invalid_argument("hybrid_scaling_vector: W must have M rows");
  const double ratio = static_cast<double>(weights.cols()) / static_cast<double>(weights.rows());
  return ratio * (weights.transpose() * mu);
}

ScalingProfile scaling_profile(const std::vector<Nonlinearity>& nonlinearities,
                               const std::optional<WeightMatrix>& weights, double source_scale,
                               const MomentMethod& method) {
  require_nodes(nonlinearities);
  const Index m = static_cast<Index>(nonlinearities.size());
  ScalingProfile p;
  p.method = method;
  p.mu.resize(m);
  for (Index j = 0; j < m; ++j) {
    MomentMethod per_node = method;
    per_node.seed = derive_seed(method.seed, static_cast<std::uint64_t>(j), 0x5CA1u);
    p.mu[j] = scaling_parameter(nonlinearities[static_cast<std::size_t>(j)], per_node, source_scale);
  }
  p.mu_bar = p.mu.mean();
  if (weights) {
    p.mu_tilde = hybrid_scaling_vector(p.mu, weights->entries());
  } else {
    p.mu_tilde = VectorXd::Constant(1, p.mu_bar);
  }
  return p;
}

// ---------------------------------------------------------------- mismatch

namespace {

// Maps one sample (A_i, y_i) to the surrogate pair (a', y') in flattened form.
class Surrogate {
 public:
  Surrogate(const CombinedDesign& design, Index n, Index nodes) : design_(design) {
    switch (design.kind) {
      case CombinedDesign::Kind::direct:
        dim_ = n;
        scale_ = 1.0 / std::sqrt(static_cast<double>(nodes));
        break;
      case CombinedDesign::Kind::lifting:
        dim_ = n * nodes;
        scale_ = 1.0;
        break;
      case CombinedDesign::Kind::hybrid:
        if (design.weights.rows() != nodes || design.weights.cols() < 1)
          throw std::invalid_argument("mismatch: hybrid weights must have M rows");
        dim_ = n * design.weights.cols();
        scale_ = std::sqrt(static_cast<double>(design.weights.cols()) / static_cast<double>(nodes));
        break;
    }
  }

  Index dimension() const { return dim_; }

  void check(const MatrixXd& x) const {
    if (x.size() != dim_)
      throw std::invalid_argument("mismatch: x_natural has " + std::to_string(x.size()) +
                                  " entries, expected " + std::to_string(dim_));
  }

  // Writes a' and returns y'.
  double map(const MatrixXd& vectors, double y, VectorXd& a) const {
    switch (design_.kind) {
      case CombinedDesign::Kind::direct:
        a = vectors.rowwise().sum();
        break;
      case CombinedDesign::Kind::lifting:
        a = vectors.reshaped();
        break;
      case CombinedDesign::Kind::hybrid:
        a = (vectors * design_.weights).reshaped();
        break;
    }
    a *= scale_;
    return scale_ * y;
  }

 private:
  const CombinedDesign& design_;
  Index dim_ = 0;
  double scale_ = 1.0;
};

struct FirstPass {
  VectorXd sum;
  double sum_sq_norms = 0.0;
};

// Sample-access callback: fills vectors and returns y for sample i.
template <class Sample>
MismatchCovarianceEstimate mismatch_covariance_impl(const MatrixXd& x_natural, Index samples,
                                                    Index n, Index nodes,
                                                    const CombinedDesign& design, unsigned threads,
                                                    Sample&& sample) {
  if (samples < 3) throw std::invalid_argument("mismatch_covariance: need >= 3 samples");
  const Surrogate sur(design, n, nodes);
  sur.check(x_natural);
  const VectorXd x = x_natural.reshaped();
  const Index d = sur.dimension();
  const Index chunks = (samples + kChunk - 1) / kChunk;

  auto residual_vector = [&](Index i, MatrixXd& vectors, VectorXd& z) {
    const double y = sample(i, vectors);
    const double yp = sur.map(vectors, y, z);
    z *= z.dot(x) - yp;
  };

  std::vector<FirstPass> first(static_cast<std::size_t>(chunks), FirstPass{VectorXd::Zero(d), 0.0});
  parallel_for(static_cast<std::size_t>(chunks), threads, [&](std::size_t c) {
    MatrixXd vectors(n, nodes);
    VectorXd z(d);
    const Index lo = static_cast<Index>(c) * kChunk;
    const Index hi = std::min(samples, lo + kChunk);
    for (Index i = lo; i < hi; ++i) {
      residual_vector(i, vectors, z);
      first[c].sum += z;
      first[c].sum_sq_norms += z.squaredNorm();
    }
  });
  VectorXd total = VectorXd::Zero(d);
  double q = 0.0;
  for (const auto& f : first) {
    total += f.sum;
    q += f.sum_sq_norms;
  }

  const double t = static_cast<double>(samples);
  const double s2 = total.squaredNorm();
  MismatchCovarianceEstimate out;
  out.samples = samples;
  out.rho_squared = (s2 - q) / (t * (t - 1.0));
  out.rho_norm = std::sqrt(std::max(0.0, out.rho_squared));
  out.plug_in_norm = std::sqrt(s2) / t;

  // Leave-one-out values differ from a common constant by
  // 2 (||z_i||^2 - <S, z_i>) / ((T-1)(T-2)); only that part affects the spread.
  std::vector<RunningStats> second(static_cast<std::size_t>(chunks));
  const double denom = (t - 1.0) * (t - 2.0);
  parallel_for(static_cast<std::size_t>(chunks), threads, [&](std::size_t c) {
    MatrixXd vectors(n, nodes);
    VectorXd z(d);
    const Index lo = static_cast<Index>(c) * kChunk;
    const Index hi = std::min(samples, lo + kChunk);
    for (Index i = lo; i < hi; ++i) {
      residual_vector(i, vectors, z);
      second[c].add(2.0 * (z.squaredNorm() - total.dot(z)) / denom);
    }
  });
  const auto loo = merged(second);
  out.rho_squared_std_error = std::sqrt((t - 1.0) / t * loo.m2);
  return out;
}

}  // namespace

bool MismatchCovarianceEstimate::consistent_with_zero(double k) const {
  return std::abs(rho_squared) <= k * rho_squared_std_error;
}

MismatchCovarianceEstimate empirical_mismatch_covariance(const MatrixXd& x_natural,
                                                         const MeasurementEnsemble& ens,
                                                         const CombinedDesign& design) {
  return mismatch_covariance_impl(
      x_natural, ens.sample_count(), ens.dimension(), ens.node_count(), design, 1,
      [&](Index i, MatrixXd& vectors) {
        vectors = ens.vectors[static_cast<std::size_t>(i)];
        return ens.observations[i];
      });
}

MismatchCovarianceEstimate empirical_mismatch_covariance(const MatrixXd& x_natural,
                                                         const EnsembleSampler& sampler,
                                                         Index samples,
                                                         const CombinedDesign& design,
                                                         unsigned threads) {
  return mismatch_covariance_impl(x_natural, samples, sampler.source().size(),
                                  sampler.spec().node_count, design, threads,
                                  [&](Index i, MatrixXd& vectors) { return sampler.sample(i, vectors); });
}

namespace {

constexpr std::array<int, 4> kProxyOrders{2, 4, 6, 8};

double proxy_from_moments(const std::array<double, 4>& moments) {
  double best = 0.0;
  for (std::size_t k = 0; k < kProxyOrders.size(); ++k) {
    const double p = kProxyOrders[k];
    best = std::max(best, std::pow(std::max(0.0, moments[k]), 1.0 / p) / std::sqrt(p));
  }
  return best;
}

}  // namespace

double empirical_mismatch_deviation(const MatrixXd& x_natural, const MeasurementEnsemble& ens,
                                    const CombinedDesign& design) {
  if (ens.sample_count() < 1) throw std::invalid_argument("mismatch_deviation: empty ensemble");
  const Surrogate sur(design, ens.dimension(), ens.node_count());
  sur.check(x_natural);
  const VectorXd x = x_natural.reshaped();
  std::array<double, 4> moments{};
  VectorXd a(sur.dimension());
  for (Index i = 0; i < ens.sample_count(); ++i) {
    const double yp = sur.map(ens.vectors[static_cast<std::size_t>(i)], ens.observations[i], a);
    const double z2 = std::pow(a.dot(x) - yp, 2);
    double zp = z2;
    for (std::size_t k = 0; k < moments.size(); ++k, zp *= z2) moments[k] += zp;
  }
  for (double& v : moments) v /= static_cast<double>(ens.sample_count());
  return proxy_from_moments(moments);
}

double subgaussian_norm_proxy(const std::function<double(double)>& fn,
                              std::span<const double> breakpoints) {
  std::array<double, 4> moments{};
  for (std::size_t k = 0; k < moments.size(); ++k) {
    const int p = kProxyOrders[k];
    moments[k] = gaussian_expectation([&](double g) { return std::pow(fn(g), p); }, breakpoints);
  }
  return proxy_from_moments(moments);
}

namespace {

// (1/M) sum_j proxy(f_j(g) - c_j g)^2.
double mean_squared_deviation(const std::vector<Nonlinearity>& fs, const VectorXd& c) {
  double acc = 0.0;
  for (std::size_t j = 0; j < fs.size(); ++j) {
    const auto& f = fs[j];
    require_quadrature_capable(f);
    const double cj = c[static_cast<Index>(j)];
    const auto b = f.breakpoints();
    const double proxy = subgaussian_norm_proxy([&](double g) { return f(g) - cj * g; }, b);
    acc += proxy * proxy;
  }
  return acc / static_cast<double>(fs.size());
}

VectorXd quadrature_mu(const std::vector<Nonlinearity>& fs) {
  VectorXd mu(static_cast<Index>(fs.size()));
  for (std::size_t j = 0; j < fs.size(); ++j) mu[static_cast<Index>(j)] = scaling_parameter(fs[j]);
  return mu;
}

}  // namespace

double sigma_dir(const std::vector<Nonlinearity>& nonlinearities) {
  require_nodes(nonlinearities);
  const VectorXd mu = quadrature_mu(nonlinearities);
  return std::sqrt(mean_squared_deviation(nonlinearities, VectorXd::Constant(mu.size(), mu.mean())));
}

double sigma_lift(const std::vector<Nonlinearity>& nonlinearities) {
  require_nodes(nonlinearities);
  return std::sqrt(mean_squared_deviation(nonlinearities, quadrature_mu(nonlinearities)));
}

double sigma_hyb(const std::vector<Nonlinearity>& nonlinearities, const WeightMatrix& w) {
  require_nodes(nonlinearities);
  if (w.nodes() != static_cast<Index>(nonlinearities.size()))
    throw std::invalid_argument("sigma_hyb: W must have M rows");
  const VectorXd mu = quadrature_mu(nonlinearities);
  const VectorXd c = w.entries() * (w.entries().transpose() * mu);
  return std::sqrt(mean_squared_deviation(nonlinearities, c));
}

IsotropyMismatch isotropy_mismatch_vectors(const std::vector<Nonlinearity>& nonlinearities,
                                           const DistributionSpec& dist, const VectorXd& x0,
                                           Index trials, std::uint64_t seed, unsigned threads) {
  require_nodes(nonlinearities);
  if (trials < 2) throw std::invalid_argument("isotropy_mismatch_vectors: need >= 2 trials");
  if (x0.size() < 1 || !(x0.norm() > 0.0))
    throw std::invalid_argument("isotropy_mismatch_vectors: x0 must be nonzero");
  const Index n = x0.size();
  const Index m = static_cast<Index>(nonlinearities.size());
  const VectorXd unit = x0.normalized();

  struct Acc {
    MatrixXd sum, sum_sq;
  };
  const Acc init{MatrixXd::Zero(n, m), MatrixXd::Zero(n, m)};
  // One stream per (chunk, node) keeps node columns independent.
  Acc total = init;
  for (Index j = 0; j < m; ++j) {
    const auto& f = nonlinearities[static_cast<std::size_t>(j)];
    const auto node_parts = run_chunks(
        trials, threads, derive_seed(seed, static_cast<std::uint64_t>(j), 0x150u), 0x150u, init,
        [&](Index first, Index last, Stream& rng, Acc& acc) {
          VectorXd a(n);
          for (Index t = first; t < last; ++t) {
            dist.sample(rng, a);
            const double v = a.dot(x0);
            const VectorXd z = f(v, rng) * (a - a.dot(unit) * unit);
            acc.sum.col(j) += z;
            acc.sum_sq.col(j) += z.cwiseAbs2();
          }
        });
    for (const auto& p : node_parts) {
      total.sum.col(j) += p.sum.col(j);
      total.sum_sq.col(j) += p.sum_sq.col(j);
    }
  }
  const double t = static_cast<double>(trials);
  IsotropyMismatch out;
  out.trials = trials;
  out.rho = total.sum / t;
  const MatrixXd var = ((total.sum_sq - t * out.rho.cwiseAbs2()) / (t - 1.0)).cwiseMax(0.0);
  out.std_errors = (var / t).cwiseSqrt();
  return out;
}

double rho_hyb(const MatrixXd& rho_vectors, const MatrixXd& weights) {
  if (rho_vectors.cols() != weights.rows())
    throw std::invalid_argument("rho_hyb: rho has M columns, W must have M rows");
  return (rho_vectors * weights).norm() / std::sqrt(static_cast<double>(weights.cols()));
}

MismatchProfile mismatch_profile(const std::vector<Nonlinearity>& nonlinearities,
                                 const DistributionSpec& dist, const VectorXd& x0,
                                 const std::optional<WeightMatrix>& weights, Index trials,
                                 std::uint64_t seed, unsigned threads) {
  require_nodes(nonlinearities);
  const WeightMatrix w = weights ? *weights : WeightMatrix::ones(static_cast<Index>(nonlinearities.size()));
  const auto iso = isotropy_mismatch_vectors(nonlinearities, dist, x0, trials, seed, threads);
  MismatchProfile p;
  p.rho_vectors = iso.rho;
  p.rho_std_errors = iso.std_errors;
  p.sigma_dir = sigma_dir(nonlinearities);
  p.sigma_lift = sigma_lift(nonlinearities);
  p.sigma_hyb = sigma_hyb(nonlinearities, w);
  p.rho_hyb = rho_hyb(iso.rho, w.entries());
  return p;
}

// ---------------------------------------------------------------- widths

namespace {

WidthEstimate finish(WidthEstimate::Kind kind, const RunningStats& values,
                     const RunningStats& squares) {
  WidthEstimate w;
  w.kind = kind;
  w.value = values.mean;
  w.std_error = values.std_error();
  w.squared_value = squares.mean;
  w.squared_std_error = squares.std_error();
  w.trials = static_cast<Index>(values.count);
  return w;
}

struct WidthAcc {
  RunningStats values;
  RunningStats squares;
};

WidthEstimate collect(WidthEstimate::Kind kind, const std::vector<WidthAcc>& parts) {
  RunningStats v, s;
  for (const auto& p : parts) {
    v.merge(p.values);
    s.merge(p.squares);
  }
  return finish(kind, v, s);
}

// Minimizes a convex function on [0, hi] by ternary search down to 1e-8.
template <class Fn>
double convex_min(Fn&& fn, double hi) {
  double lo = 0.0;
  while (hi - lo > 1e-8) {
    const double a = lo + (hi - lo) / 3.0;
    const double b = hi - (hi - lo) / 3.0;
    if (fn(a) <= fn(b)) {
      hi = b;
    } else {
      lo = a;
    }
  }
  return std::min({fn(0.5 * (lo + hi)), fn(0.0)});
}

void require_trials(Index trials) {
  if (trials < 2) throw std::invalid_argument("mean width: need >= 2 trials");
}

}  // namespace

WidthEstimate global_mean_width(const ConstraintSet& set, Index trials, std::uint64_t seed,
                                unsigned threads) {
  require_trials(trials);
  const double r = set.radius();
  switch (set.kind()) {
    case ConstraintSet::Kind::unconstrained:
      throw unsupported_operation("global mean width of an unbounded set");
    case ConstraintSet::Kind::origin: {
      WidthEstimate w;
      w.trials = trials;
      return w;
    }
    default:
      break;
  }
  const auto parts = run_chunks(
      trials, threads, seed, 0x617u, WidthAcc{}, [&](Index first, Index last, Stream& rng, WidthAcc& acc) {
        MatrixXd g(set.rows(), set.cols());
        for (Index t = first; t < last; ++t) {
          for (Index k = 0; k < g.size(); ++k) g.data()[k] = rng.normal();
          double sup = 0.0;
          switch (set.kind()) {
            case ConstraintSet::Kind::l1_ball:
              sup = r * g.cwiseAbs().maxCoeff();
              break;
            case ConstraintSet::Kind::l12_ball:
              sup = r * g.rowwise().norm().maxCoeff();
              break;
            case ConstraintSet::Kind::dictionary_l1_ball:
              sup = r * (set.dictionary().transpose() * g.col(0)).cwiseAbs().maxCoeff();
              break;
            default:
              break;
          }
          acc.values.add(sup);
          acc.squares.add(sup * sup);
        }
      });
  return collect(WidthEstimate::Kind::global, parts);
}

double conic_distance_sq_l1(const VectorXd& x_natural, const VectorXd& g) {
  if (g.size() != x_natural.size()) throw std::invalid_argument("conic_distance_sq_l1: size mismatch");
  const Index n = g.size();
  auto dist2 = [&](double tau) {
    double d = 0.0;
    for (Index k = 0; k < n; ++k) {
      const double x = x_natural[k];
      if (x != 0.0) {
        d += std::pow(g[k] - tau * (x > 0.0 ? 1.0 : -1.0), 2);
      } else {
        d += std::pow(std::max(std::abs(g[k]) - tau, 0.0), 2);
      }
    }
    return d;
  };
  return convex_min(dist2, 10.0 * g.norm());
}

double conic_distance_sq_l12(const VectorXd& x0, const VectorXd& mu, const MatrixXd& g) {
  if (g.rows() != x0.size() || g.cols() != mu.size())
    throw std::invalid_argument("conic_distance_sq_l12: size mismatch");
  const VectorXd dir = mu.normalized();
  const VectorXd row_norms = g.rowwise().norm();
  auto dist2 = [&](double tau) {
    double d = 0.0;
    for (Index k = 0; k < g.rows(); ++k) {
      const double x = x0[k];
      if (x != 0.0) {
        d += (g.row(k).transpose() - tau * (x > 0.0 ? 1.0 : -1.0) * dir).squaredNorm();
      } else {
        d += std::pow(std::max(row_norms[k] - tau, 0.0), 2);
      }
    }
    return d;
  };
  return convex_min(dist2, 10.0 * g.norm());
}

WidthEstimate conic_mean_width_l1(const VectorXd& x_natural, Index trials, std::uint64_t seed,
                                  unsigned threads) {
  require_trials(trials);
  if (x_natural.size() < 1 || x_natural.cwiseAbs().maxCoeff() == 0.0)
    throw std::invalid_argument("conic_mean_width_l1: x_natural must be nonzero");
  const Index n = x_natural.size();
  const auto parts = run_chunks(
      trials, threads, seed, 0xC11u, WidthAcc{}, [&](Index first, Index last, Stream& rng, WidthAcc& acc) {
        VectorXd g(n);
        for (Index t = first; t < last; ++t) {
          for (Index k = 0; k < n; ++k) g[k] = rng.normal();
          const double best = conic_distance_sq_l1(x_natural, g);
          acc.values.add(std::sqrt(best));
          acc.squares.add(best);
        }
      });
  return collect(WidthEstimate::Kind::conic, parts);
}

WidthEstimate conic_mean_width_l12(const VectorXd& x0, const VectorXd& mu, Index trials,
                                   std::uint64_t seed, unsigned threads) {
  require_trials(trials);
  if (x0.size() < 1 || x0.cwiseAbs().maxCoeff() == 0.0)
    throw std::invalid_argument("conic_mean_width_l12: x0 must be nonzero");
  if (mu.size() < 1 || !(mu.norm() > 0.0))
    throw std::invalid_argument("conic_mean_width_l12: mu must be nonzero");
  const Index n = x0.size();
  const Index m = mu.size();
  const auto parts = run_chunks(
      trials, threads, seed, 0xC12u, WidthAcc{}, [&](Index first, Index last, Stream& rng, WidthAcc& acc) {
        MatrixXd g(n, m);
        for (Index t = first; t < last; ++t) {
          for (Index k = 0; k < g.size(); ++k) g.data()[k] = rng.normal();
          const double best = conic_distance_sq_l12(x0, mu, g);
          acc.values.add(std::sqrt(best));
          acc.squares.add(best);
        }
      });
  return collect(WidthEstimate::Kind::conic, parts);
}

double sample_complexity(const SampleComplexityQuery& q) {
  if (!(q.delta > 0.0 && q.delta <= 1.0))
    throw std::invalid_argument("sample_complexity: delta must lie in (0, 1]");
  using Rule = SampleComplexityQuery::Rule;
  const double inv_d2 = 1.0 / (q.delta * q.delta);
  if (q.rule == Rule::direct || q.rule == Rule::lifting) {
    if (q.s < 1 || q.n < q.s) throw std::invalid_argument("sample_complexity: need 1 <= s <= n");
    const double log_term = std::log(2.0 * static_cast<double>(q.n) / static_cast<double>(q.s));
    const double s = static_cast<double>(q.s);
    if (q.rule == Rule::direct) return inv_d2 * s * log_term;
    if (q.nodes < 1) throw std::invalid_argument("sample_complexity: need M >= 1");
    return inv_d2 * s * std::max(static_cast<double>(q.nodes), log_term);
  }
  if (!(q.width >= 0.0) || !(q.kappa > 0.0))
    throw std::invalid_argument("sample_complexity: width must be >= 0 and kappa > 0");
  const double k4 = std::pow(q.kappa, 4);
  const double w2 = q.width * q.width;
  if (q.rule == Rule::hybrid_conic) return k4 * inv_d2 * w2;
  return k4 * inv_d2 * inv_d2 * w2;
}

}  // namespace suprec
