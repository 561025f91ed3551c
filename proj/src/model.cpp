#include "suprec/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "suprec/errors.hpp"
#include "suprec/parallel.hpp"

namespace suprec {

SourceVector generate_sparse_source(Index n, Index s, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("generate_sparse_source: n must be >= 1");
  if (s < 1 || s > n) throw std::invalid_argument("generate_sparse_source: need 1 <= s <= n");

  Stream rng(seed, StreamDomain::source);
  std::vector<Index> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), Index{0});
  // partial Fisher-Yates: the first s slots become a uniform random subset
  for (Index k = 0; k < s; ++k) {
    const auto pick = k + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - k)));
    std::swap(pool[static_cast<std::size_t>(k)], pool[static_cast<std::size_t>(pick)]);
  }
  SourceVector out;
  out.support.assign(pool.begin(), pool.begin() + s);
  std::sort(out.support.begin(), out.support.end());
  out.sparsity_budget = s;
  out.entries = VectorXd::Zero(n);
  double norm = 0.0;
  while (norm == 0.0) {
    for (Index k : out.support) out.entries[k] = rng.normal();
    norm = out.entries.norm();
  }
  out.entries /= norm;
  return out;
}

// ---------------------------------------------------------------- Nonlinearity

struct Nonlinearity::Node {
  Kind kind = Kind::identity;
  double param = 0.0;  // amplitude, coefficient or flip probability
  std::shared_ptr<const Node> outer;
  std::shared_ptr<const Node> inner;  // also the base of random_sign_flip
  std::function<double(double)> fn;
  std::string name;
  bool odd = true;
  std::vector<double> custom_breakpoints;
};

namespace {

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

Nonlinearity::Nonlinearity(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Nonlinearity Nonlinearity::identity() {
  auto n = std::make_shared<Node>();
  n->kind = Kind::identity;
  return Nonlinearity(std::move(n));
}

Nonlinearity Nonlinearity::clip(double amplitude) {
  if (!(amplitude > 0.0)) throw std::invalid_argument("clip: amplitude must be > 0");
  auto n = std::make_shared<Node>();
  n->kind = Kind::clip;
  n->param = amplitude;
  return Nonlinearity(std::move(n));
}

Nonlinearity Nonlinearity::scale(double coefficient) {
  if (!std::isfinite(coefficient)) throw std::invalid_argument("scale: coefficient must be finite");
  auto n = std::make_shared<Node>();
  n->kind = Kind::scale;
  n->param = coefficient;
  return Nonlinearity(std::move(n));
}

Nonlinearity Nonlinearity::sign() {
  auto n = std::make_shared<Node>();
  n->kind = Kind::sign;
  return Nonlinearity(std::move(n));
}

Nonlinearity Nonlinearity::compose(Nonlinearity outer, Nonlinearity inner) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::compose;
  n->odd = outer.is_odd() && inner.is_odd();
  n->outer = std::move(outer.node_);
  n->inner = std::move(inner.node_);
  return Nonlinearity(std::move(n));
}

Nonlinearity Nonlinearity::random_sign_flip(double p, Nonlinearity base) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("random_sign_flip: p must lie in [0, 1]");
  auto n = std::make_shared<Node>();
  n->kind = Kind::random_sign_flip;
  n->param = p;
  n->odd = base.is_odd();
  n->inner = std::move(base.node_);
  return Nonlinearity(std::move(n));
}

Nonlinearity Nonlinearity::custom(std::string name, std::function<double(double)> fn, bool odd,
                                  std::vector<double> breakpoints) {
  if (!fn) throw std::invalid_argument("custom: empty function");
  auto n = std::make_shared<Node>();
  n->kind = Kind::custom;
  n->name = std::move(name);
  n->fn = std::move(fn);
  n->odd = odd;
  std::sort(breakpoints.begin(), breakpoints.end());
  n->custom_breakpoints = std::move(breakpoints);
  return Nonlinearity(std::move(n));
}

Nonlinearity::Kind Nonlinearity::kind() const { return node_->kind; }

double Nonlinearity::amplitude() const {
  if (node_->kind != Kind::clip) throw std::logic_error("amplitude: not a clip");
  return node_->param;
}

double Nonlinearity::coefficient() const {
  if (node_->kind != Kind::scale) throw std::logic_error("coefficient: not a scale");
  return node_->param;
}

double Nonlinearity::flip_probability() const {
  if (node_->kind != Kind::random_sign_flip) throw std::logic_error("flip_probability: not a sign flip");
  return node_->param;
}

bool Nonlinearity::is_odd() const { return node_->odd; }

namespace {

bool node_is_random(const Nonlinearity::Node& n) {
  if (n.kind == Nonlinearity::Kind::random_sign_flip) return true;
  return (n.outer && node_is_random(*n.outer)) || (n.inner && node_is_random(*n.inner));
}

}  // namespace

bool Nonlinearity::is_random() const { return node_is_random(*node_); }

namespace {

double eval_node(const Nonlinearity::Node& n, double v, Stream* rng) {
  using K = Nonlinearity::Kind;
  switch (n.kind) {
    case K::identity:
      return v;
    case K::clip:
      return sign_of(v) * std::min(std::abs(v), n.param);
    case K::scale:
      return n.param * v;
    case K::sign:
      return sign_of(v);
    case K::compose:
      return eval_node(*n.outer, eval_node(*n.inner, v, rng), rng);
    case K::random_sign_flip: {
      if (rng == nullptr)
        throw unsupported_operation("random_sign_flip requires a random stream");
      const double base = eval_node(*n.inner, v, rng);
      return rng->bernoulli(n.param) ? -base : base;
    }
    case K::custom:
      return n.fn(v);
  }
  return v;
}

// Input-domain breakpoints of a node.
std::vector<double> node_breakpoints(const Nonlinearity::Node& n) {
  using K = Nonlinearity::Kind;
  switch (n.kind) {
    case K::identity:
    case K::scale:
      return {};
    case K::clip:
      return {-n.param, n.param};
    case K::sign:
      return {0.0};
    case K::custom:
      return n.custom_breakpoints;
    case K::random_sign_flip:
      return node_breakpoints(*n.inner);
    case K::compose: {
      std::vector<double> out = node_breakpoints(*n.inner);
      const std::vector<double> outer = node_breakpoints(*n.outer);
      const auto& in = *n.inner;
      // Preimages of the outer kinks are only tracked through inner maps that
      // are invertible where it matters.
      for (double b : outer) {
        if (in.kind == K::identity) {
          out.push_back(b);
        } else if (in.kind == K::scale && in.param != 0.0) {
          out.push_back(b / in.param);
        } else if (in.kind == K::clip && std::abs(b) < in.param) {
          out.push_back(b);
        }
      }
      std::sort(out.begin(), out.end());
      out.erase(std::unique(out.begin(), out.end()), out.end());
      return out;
    }
  }
  return {};
}

std::string describe_node(const Nonlinearity::Node& n) {
  using K = Nonlinearity::Kind;
  std::ostringstream os;
  switch (n.kind) {
    case K::identity: os << "identity"; break;
    case K::clip: os << "clip(" << n.param << ")"; break;
    case K::scale: os << "scale(" << n.param << ")"; break;
    case K::sign: os << "sign"; break;
    case K::compose: os << describe_node(*n.outer) << "∘" << describe_node(*n.inner); break;
    case K::random_sign_flip: os << "flip(" << n.param << ", " << describe_node(*n.inner) << ")"; break;
    case K::custom: os << (n.name.empty() ? "custom" : n.name); break;
  }
  return os.str();
}

}  // namespace

double Nonlinearity::operator()(double v, Stream& rng) const { return eval_node(*node_, v, &rng); }

double Nonlinearity::operator()(double v) const { return eval_node(*node_, v, nullptr); }

std::vector<double> Nonlinearity::breakpoints() const { return node_breakpoints(*node_); }

std::string Nonlinearity::describe() const { return describe_node(*node_); }

// ---------------------------------------------------------------- distributions

void DistributionSpec::sample(Stream& rng, Eigen::Ref<VectorXd> out) const {
  static const double kUniformHalfWidth = std::sqrt(3.0);
  switch (family) {
    case Family::gaussian:
      for (Index k = 0; k < out.size(); ++k) out[k] = rng.normal();
      break;
    case Family::rademacher:
      for (Index k = 0; k < out.size(); ++k) out[k] = rng.rademacher();
      break;
    case Family::uniform_isotropic:
      for (Index k = 0; k < out.size(); ++k) out[k] = rng.uniform(-kUniformHalfWidth, kUniformHalfWidth);
      break;
  }
}

std::string to_string(DistributionSpec::Family family) {
  switch (family) {
    case DistributionSpec::Family::gaussian: return "gaussian";
    case DistributionSpec::Family::rademacher: return "rademacher";
    case DistributionSpec::Family::uniform_isotropic: return "uniform_isotropic";
  }
  return "gaussian";
}

DistributionSpec::Family parse_family(const std::string& name) {
  if (name == "gaussian") return DistributionSpec::Family::gaussian;
  if (name == "rademacher") return DistributionSpec::Family::rademacher;
  if (name == "uniform_isotropic" || name == "uniform") return DistributionSpec::Family::uniform_isotropic;
  throw std::invalid_argument("unknown distribution family '" + name + "'");
}

// ---------------------------------------------------------------- ensembles

void ObservationSpec::validate() const {
  if (node_count < 1) throw std::invalid_argument("ObservationSpec: node_count must be >= 1");
  if (sample_count < 1) throw std::invalid_argument("ObservationSpec: sample_count must be >= 1");
  if (static_cast<Index>(nonlinearities.size()) != node_count)
    throw std::invalid_argument("ObservationSpec: expected one nonlinearity per node");
  if (!(source_scale > 0.0)) throw std::invalid_argument("ObservationSpec: source_scale must be > 0");
  if (const auto* ns = std::get_if<NoiseScale>(&noise)) {
    if (!(ns->nu >= 0.0) || !std::isfinite(ns->nu))
      throw std::invalid_argument("ObservationSpec: noise scale must be >= 0");
  } else if (!std::isfinite(std::get<TargetSnr>(noise).db)) {
    throw std::invalid_argument("ObservationSpec: SNR must be finite");
  }
}

namespace {

constexpr Index kPilotSamples = 10000;
constexpr Index kCenteringTrials = 100000;
constexpr std::uint32_t kNoiseStream = 0xFFFFFFFFu;

}  // namespace

EnsembleSampler::EnsembleSampler(const SourceVector& x0, ObservationSpec spec)
    : source_(x0.entries), spec_(std::move(spec)) {
  spec_.validate();
  if (source_.size() < 1) throw std::invalid_argument("EnsembleSampler: empty source");

  const VectorXd scaled = spec_.source_scale * source_;
  for (std::size_t j = 0; j < spec_.nonlinearities.size(); ++j) {
    const auto& f = spec_.nonlinearities[j];
    if (f.is_odd() && spec_.distribution.symmetric()) continue;
    const auto report = check_centering(f, spec_.distribution, kCenteringTrials,
                                        derive_seed(spec_.seed, j, 0xCE), scaled);
    if (!report.passed) {
      std::ostringstream os;
      os << "node " << j << " output " << f.describe() << " is not centered: E[f] ~ "
         << report.mean << " +- " << report.std_error;
      throw model_violation(os.str());
    }
  }

  if (const auto* ns = std::get_if<NoiseScale>(&spec_.noise)) {
    noise_sigma_ = ns->nu;
  } else {
    const auto& snr = std::get<TargetSnr>(spec_.noise);
    // Coordinates are i.i.d., so <a, x0> only needs the coordinates on the
    // support of x0; the pilot draws just those.
    std::vector<double> kept;
    for (Index k = 0; k < source_.size(); ++k)
      if (source_[k] != 0.0) kept.push_back(source_[k]);
    if (kept.empty()) kept.push_back(0.0);
    const VectorXd compact = Eigen::Map<const VectorXd>(kept.data(), static_cast<Index>(kept.size()));
    MatrixXd scratch(compact.size(), spec_.node_count);
    double sum = 0.0, sum_sq = 0.0;
    for (Index i = 0; i < kPilotSamples; ++i) {
      const double v = signal_in_domain(StreamDomain::pilot, i, compact, scratch);
      sum += v;
      sum_sq += v * v;
    }
    const double n = static_cast<double>(kPilotSamples);
    double power = std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0));
    if (snr.reference == SnrReference::per_node) power /= static_cast<double>(spec_.node_count);
    noise_sigma_ = std::sqrt(power * std::pow(10.0, -snr.db / 10.0));
  }
}

double EnsembleSampler::signal_in_domain(StreamDomain domain, Index i, const VectorXd& source,
                                         Eigen::Ref<MatrixXd> vectors) const {
  double y = 0.0;
  for (Index j = 0; j < spec_.node_count; ++j) {
    Stream rng(spec_.seed, domain, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
    spec_.distribution.sample(rng, vectors.col(j));
    const double v = spec_.source_scale * vectors.col(j).dot(source);
    y += spec_.nonlinearities[static_cast<std::size_t>(j)](v, rng);
  }
  return y;
}

double EnsembleSampler::signal(Index i, Eigen::Ref<MatrixXd> vectors) const {
  return signal_in_domain(StreamDomain::measurement, i, source_, vectors);
}

double EnsembleSampler::sample(Index i, Eigen::Ref<MatrixXd> vectors) const {
  double y = signal(i, vectors);
  if (noise_sigma_ > 0.0) {
    Stream rng(spec_.seed, StreamDomain::noise, static_cast<std::uint32_t>(i), kNoiseStream);
    y += noise_sigma_ * rng.normal();
  }
  return y;
}

MeasurementEnsemble generate_ensemble(const SourceVector& x0, const ObservationSpec& spec,
                                      unsigned threads) {
  EnsembleSampler sampler(x0, spec);
  MeasurementEnsemble ens;
  ens.spec = spec;
  ens.noise_sigma = sampler.noise_sigma();
  const Index m = spec.sample_count;
  ens.vectors.assign(static_cast<std::size_t>(m), MatrixXd(x0.dimension(), spec.node_count));
  ens.observations.resize(m);
  parallel_for(static_cast<std::size_t>(m), threads, [&](std::size_t i) {
    ens.observations[static_cast<Index>(i)] = sampler.sample(static_cast<Index>(i), ens.vectors[i]);
  });
  return ens;
}

CenteringReport check_centering(const Nonlinearity& f, const DistributionSpec& dist, Index trials,
                                std::uint64_t seed, const std::optional<VectorXd>& direction) {
  if (trials < 1000) throw std::invalid_argument("check_centering: trials must be >= 1000");
  const VectorXd dir = direction ? *direction : VectorXd::Constant(16, 0.25);
  VectorXd a(dir.size());
  double sum = 0.0, sum_sq = 0.0;
  for (Index t = 0; t < trials; ++t) {
    Stream rng(seed, StreamDomain::monte_carlo, static_cast<std::uint32_t>(t), 0xCE);
    dist.sample(rng, a);
    const double v = f(a.dot(dir), rng);
    sum += v;
    sum_sq += v * v;
  }
  const double n = static_cast<double>(trials);
  CenteringReport r;
  r.trials = trials;
  r.mean = sum / n;
  const double var = std::max(0.0, (sum_sq - n * r.mean * r.mean) / (n - 1.0));
  r.std_error = std::sqrt(var / n);
  r.passed = std::abs(r.mean) <= 4.0 * r.std_error;
  return r;
}

}  // namespace suprec
