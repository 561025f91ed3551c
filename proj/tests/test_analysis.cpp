#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "suprec/analysis.hpp"
#include "suprec/errors.hpp"

using namespace suprec;

namespace {

double phi(double v) { return std::exp(-0.5 * v * v) / std::sqrt(2.0 * M_PI); }

double kronrod(const std::function<double(double)>& fn, double lo, double hi) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(fn, lo, hi, 20, 1e-14);
}

// Gaussian moment proxy max_p p^{-1/2} (E|g|^p)^{1/p} of a standard normal.
double gaussian_proxy() {
  double best = 0.0, dfact = 1.0;
  for (int p = 2; p <= 8; p += 2) {
    dfact *= p - 1;
    best = std::max(best, std::pow(dfact, 1.0 / p) / std::sqrt(static_cast<double>(p)));
  }
  return best;
}

std::vector<Nonlinearity> scaled(const VectorXd& h) {
  std::vector<Nonlinearity> fs;
  for (Index j = 0; j < h.size(); ++j) fs.push_back(Nonlinearity::scale(h[j]));
  return fs;
}

EnsembleSampler sampler_for(const SourceVector& x0, std::vector<Nonlinearity> fs, double nu = 0.0,
                            DistributionSpec::Family family = DistributionSpec::Family::gaussian) {
  ObservationSpec spec;
  spec.node_count = static_cast<Index>(fs.size());
  spec.sample_count = 1;
  spec.nonlinearities = std::move(fs);
  spec.noise = NoiseScale{nu};
  spec.distribution.family = family;
  spec.seed = 77;
  return EnsembleSampler(x0, spec);
}

}  // namespace

TEST_CASE("scaling parameters") {
  CHECK(scaling_parameter(Nonlinearity::identity()) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(scaling_parameter(Nonlinearity::clip(100.0)) - 1.0) <= 1e-10);
  CHECK(scaling_parameter(Nonlinearity::scale(-2.5)) == doctest::Approx(-2.5).epsilon(1e-12));

  // clip(A): independent adaptive integration of sign(g) min(|g|, A) g phi(g)
  for (double amp : {0.25, 1.0, 3.0}) {
    const double oracle = 2.0 * (kronrod([](double v) { return v * v * phi(v); }, 0.0, amp) +
                                 kronrod([amp](double v) { return amp * v * phi(v); }, amp, 40.0));
    CHECK(std::abs(scaling_parameter(Nonlinearity::clip(amp)) - oracle) <= 1e-8);
  }
  CHECK(std::abs(scaling_parameter(Nonlinearity::clip(1.0)) - std::erf(1.0 / std::sqrt(2.0))) <= 1e-10);

  // sign: Monte-Carlo oracle with 10^7 draws
  {
    Stream rng(31, StreamDomain::monte_carlo);
    const int t = 10000000;
    double sum = 0.0, sum2 = 0.0;
    for (int k = 0; k < t; ++k) {
      const double a = std::abs(rng.normal());
      sum += a;
      sum2 += a * a;
    }
    const double mean = sum / t;
    const double se = std::sqrt((sum2 / t - mean * mean) / t);
    CHECK(std::abs(scaling_parameter(Nonlinearity::sign()) - mean) <= 5.0 * se);
    CHECK(scaling_parameter(Nonlinearity::sign()) == doctest::Approx(std::sqrt(2.0 / M_PI)).epsilon(1e-10));
  }

  // quadrature and Monte Carlo agree
  for (const auto& f : {Nonlinearity::clip(0.5), Nonlinearity::sign(),
                        Nonlinearity::compose(Nonlinearity::scale(-1.5), Nonlinearity::clip(2.0))}) {
    const auto mc = estimate_scaling_parameter(f, MomentMethod::monte_carlo(1000000, 3));
    CHECK(mc.std_error > 0.0);
    CHECK(std::abs(mc.value - scaling_parameter(f)) <= 5.0 * mc.std_error);
  }

  // source scale enters through f(c g) g / c
  // and by Stein's identity equals P(|g| <= A / c)
  CHECK(scaling_parameter(Nonlinearity::clip(1.0), {}, 2.0) ==
        doctest::Approx(std::erf(0.5 / std::sqrt(2.0))).epsilon(1e-10));

  const auto flip = Nonlinearity::random_sign_flip(0.2, Nonlinearity::identity());
  CHECK_THROWS_AS(scaling_parameter(flip), unsupported_operation);
  const auto est = estimate_scaling_parameter(flip, MomentMethod::monte_carlo(400000, 1));
  CHECK(std::abs(est.value - 0.6) <= 5.0 * est.std_error);
}

TEST_CASE("scaling profiles") {
  const VectorXd h = Eigen::Vector4d(0.5, -2.0, 1.0, 0.25);
  const auto p = scaling_profile(scaled(h));
  CHECK((p.mu - h).norm() <= 1e-12);
  CHECK(p.mu_bar == p.mu.mean());
  CHECK(p.mu_tilde.size() == 1);
  CHECK(p.mu_tilde[0] == doctest::Approx(p.mu_bar).epsilon(1e-14));

  const auto ones = scaling_profile(std::vector<Nonlinearity>(3, Nonlinearity::identity()), WeightMatrix::ones(3));
  CHECK(ones.mu_tilde[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ones.mu_bar == doctest::Approx(1.0).epsilon(1e-12));

  const auto signs = scaling_profile(scaled(h), WeightMatrix::signs(h));
  CHECK(signs.mu_tilde[0] == doctest::Approx(h.cwiseAbs().mean()).epsilon(1e-12));

  // (N/M) W^T mu entry by entry against the matrix product
  MatrixXd w(4, 2);
  w << 1, 1, 1, -1, 1, 1, 1, -1;
  const VectorXd mt = hybrid_scaling_vector(h, w);
  for (Index k = 0; k < 2; ++k) {
    double acc = 0.0;
    for (Index j = 0; j < 4; ++j) acc += w(j, k) * h[j];
    CHECK(std::abs(mt[k] - 0.5 * acc) <= 1e-14);
  }
}

TEST_CASE("mismatch covariance vanishes for Gaussian designs") {
  const auto x0 = generate_sparse_source(32, 3, 5);
  std::vector<Nonlinearity> fs{Nonlinearity::clip(0.5), Nonlinearity::sign(),
                               Nonlinearity::compose(Nonlinearity::scale(-1.0), Nonlinearity::clip(1.5))};
  const auto prof = scaling_profile(fs);
  const auto sampler = sampler_for(x0, fs, 0.3);

  const auto dir = empirical_mismatch_covariance(MatrixXd(prof.mu_bar * x0.entries), sampler, 20000,
                                                 CombinedDesign::direct());
  CHECK(dir.consistent_with_zero());
  const auto lift = empirical_mismatch_covariance(MatrixXd(x0.entries * prof.mu.transpose()), sampler, 20000,
                                                  CombinedDesign::lifting());
  CHECK(lift.consistent_with_zero());

  // a wrong scaling is detected
  const auto off = empirical_mismatch_covariance(MatrixXd(x0.entries * (prof.mu.transpose() * 1.3)), sampler,
                                                 20000, CombinedDesign::lifting());
  CHECK(!off.consistent_with_zero());
  CHECK(off.rho_norm == doctest::Approx(0.3 * prof.mu.norm()).epsilon(0.1));

  // stored and streamed ensembles give the same estimate
  ObservationSpec spec = sampler.spec();
  spec.sample_count = 3000;
  const auto ens = generate_ensemble(x0, spec);
  const auto stored = empirical_mismatch_covariance(MatrixXd(x0.entries * prof.mu.transpose()), ens,
                                                    CombinedDesign::lifting());
  const auto streamed = empirical_mismatch_covariance(MatrixXd(x0.entries * prof.mu.transpose()), sampler, 3000,
                                                      CombinedDesign::lifting(), 3);
  CHECK(stored.rho_squared == doctest::Approx(streamed.rho_squared).epsilon(1e-9));
  CHECK(stored.samples == 3000);
}

TEST_CASE("mismatch covariance matches a direct oracle") {
  const auto x0 = generate_sparse_source(6, 2, 1);
  ObservationSpec spec;
  spec.node_count = 2;
  spec.sample_count = 400;
  spec.nonlinearities = {Nonlinearity::clip(0.3), Nonlinearity::sign()};
  spec.noise = NoiseScale{0.5};
  spec.seed = 3;
  const auto ens = generate_ensemble(x0, spec);
  const MatrixXd x = MatrixXd::Constant(6, 2, 0.1);
  const auto got = empirical_mismatch_covariance(x, ens, CombinedDesign::lifting());
  // brute force over all ordered pairs
  const Index t = 400;
  std::vector<VectorXd> z;
  for (Index i = 0; i < t; ++i) {
    const MatrixXd& a = ens.vectors[static_cast<std::size_t>(i)];
    const double r = (a.array() * x.array()).sum() - ens.observations[i];
    z.push_back((r * a).reshaped());
  }
  double pairs = 0.0;
  for (Index i = 0; i < t; ++i)
    for (Index k = 0; k < t; ++k)
      if (i != k) pairs += z[static_cast<std::size_t>(i)].dot(z[static_cast<std::size_t>(k)]);
  CHECK(got.rho_squared == doctest::Approx(pairs / (t * (t - 1.0))).epsilon(1e-10));
  VectorXd mean = VectorXd::Zero(12);
  for (const auto& v : z) mean += v / static_cast<double>(t);
  CHECK(got.plug_in_norm == doctest::Approx(mean.norm()).epsilon(1e-10));
}

TEST_CASE("linear models have zero mismatch in every isotropic family") {
  const auto x0 = generate_sparse_source(16, 3, 2);
  for (auto family : {DistributionSpec::Family::rademacher, DistributionSpec::Family::uniform_isotropic}) {
    const auto sampler = sampler_for(x0, {Nonlinearity::identity()}, 0.0, family);
    const auto est = empirical_mismatch_covariance(MatrixXd(x0.entries), sampler, 5000, CombinedDesign::direct());
    CHECK(est.rho_squared == doctest::Approx(0.0));
    CHECK(est.plug_in_norm <= 1e-12);
  }
}

TEST_CASE("rho estimate decays like one over root T") {
  const auto x0 = generate_sparse_source(64, 4, 8);
  const std::vector<Nonlinearity> fs(4, Nonlinearity::clip(1.0));
  const auto prof = scaling_profile(fs);
  const auto sampler = sampler_for(x0, fs, 0.2);
  std::vector<double> scaled_norms;
  for (Index t : {1000, 10000, 100000}) {
    const auto est = empirical_mismatch_covariance(MatrixXd(x0.entries * prof.mu.transpose()), sampler, t,
                                                   CombinedDesign::lifting());
    scaled_norms.push_back(std::sqrt(static_cast<double>(t)) * est.plug_in_norm);
    CHECK(est.consistent_with_zero());
  }
  const auto [lo, hi] = std::minmax_element(scaled_norms.begin(), scaled_norms.end());
  CHECK(*hi <= 2.0 * *lo);
}

TEST_CASE("mismatch deviation") {
  const auto x0 = generate_sparse_source(16, 2, 4);
  ObservationSpec spec;
  spec.sample_count = 20000;
  spec.nonlinearities = {Nonlinearity::identity()};
  spec.seed = 9;
  const auto clean = generate_ensemble(x0, spec);
  CHECK(empirical_mismatch_deviation(MatrixXd(x0.entries), clean, CombinedDesign::direct()) <= 1e-12);

  spec.noise = NoiseScale{0.4};
  const auto noisy = generate_ensemble(x0, spec);
  const double dev = empirical_mismatch_deviation(MatrixXd(x0.entries), noisy, CombinedDesign::direct());
  CHECK(dev >= 0.2);
  CHECK(dev <= 0.8);
  CHECK(dev == doctest::Approx(0.4 * gaussian_proxy()).epsilon(0.05));

  spec.noise = NoiseScale{0.0};
  spec.nonlinearities = {Nonlinearity::clip(1.0)};
  const auto clipped = generate_ensemble(x0, spec);
  const double mu = scaling_parameter(Nonlinearity::clip(1.0));
  const double emp = empirical_mismatch_deviation(MatrixXd(mu * x0.entries), clipped, CombinedDesign::direct());
  const double bp[] = {-1.0, 1.0};
  const double model = subgaussian_norm_proxy([mu](double g) { return std::clamp(g, -1.0, 1.0) - mu * g; }, bp);
  CHECK(emp > 0.0);
  CHECK(std::isfinite(emp));
  CHECK(emp == doctest::Approx(model).epsilon(0.05));
  CHECK(sigma_dir({Nonlinearity::clip(1.0)}) == doctest::Approx(model).epsilon(1e-12));
}

TEST_CASE("model deviations") {
  const double c = gaussian_proxy();
  CHECK(subgaussian_norm_proxy([](double g) { return g; }) == doctest::Approx(c).epsilon(1e-10));

  const VectorXd h = Eigen::Vector3d(1.0, -0.5, 2.0);
  const auto fs = scaled(h);
  CHECK(sigma_lift(fs) <= 1e-12);
  // f_j(g) - mubar g = (h_j - mubar) g
  const double expect = c * std::sqrt((h.array() - h.mean()).square().mean());
  CHECK(sigma_dir(fs) == doctest::Approx(expect).epsilon(1e-10));
  CHECK(sigma_dir(std::vector<Nonlinearity>(4, Nonlinearity::identity())) <= 1e-12);

  const std::vector<Nonlinearity> mixed{Nonlinearity::clip(0.5), Nonlinearity::sign(), Nonlinearity::scale(-1.0)};
  CHECK(sigma_hyb(mixed, WeightMatrix::identity(3)) == doctest::Approx(sigma_lift(mixed)).epsilon(1e-12));
  // c = W W^T mu; for sign weights and pure scalings, c_j = sign(h_j) sum |h|
  const double s = h.cwiseAbs().sum();
  double acc = 0.0;
  for (Index j = 0; j < 3; ++j) acc += std::pow((std::copysign(s, h[j]) - h[j]) * c, 2);
  CHECK(sigma_hyb(fs, WeightMatrix::signs(h)) == doctest::Approx(std::sqrt(acc / 3.0)).epsilon(1e-10));
}

TEST_CASE("isotropy mismatch vectors") {
  const std::vector<Nonlinearity> fs{Nonlinearity::clip(0.5), Nonlinearity::sign(), Nonlinearity::identity()};
  const auto x0 = generate_sparse_source(8, 3, 6).entries;
  const auto gauss = isotropy_mismatch_vectors(fs, DistributionSpec{}, x0, 100000, 1);
  for (Index j = 0; j < 3; ++j)
    for (Index k = 0; k < 8; ++k) CHECK(std::abs(gauss.rho(k, j)) <= 4.5 * gauss.std_errors(k, j) + 1e-15);

  DistributionSpec rad;
  rad.family = DistributionSpec::Family::rademacher;
  const auto lin = isotropy_mismatch_vectors({Nonlinearity::identity()}, rad, x0, 20000, 2);
  for (Index k = 0; k < 8; ++k) CHECK(std::abs(lin.rho(k, 0)) <= 4.5 * lin.std_errors(k, 0) + 1e-15);

  // exhaustive enumeration over the four sign patterns at n = 2
  const Eigen::Vector2d u = Eigen::Vector2d(2.0, 1.0) / std::sqrt(5.0);
  const auto clip = Nonlinearity::clip(0.5);
  Eigen::Vector2d exact = Eigen::Vector2d::Zero();
  for (double a1 : {-1.0, 1.0})
    for (double a2 : {-1.0, 1.0}) {
      const Eigen::Vector2d a(a1, a2);
      const double v = a.dot(u);
      exact += 0.25 * clip(v) * (a - v * u);
    }
  CHECK(exact.norm() > 0.1);
  const auto est = isotropy_mismatch_vectors({clip}, rad, u, 200000, 3);
  for (Index k = 0; k < 2; ++k) CHECK(std::abs(est.rho(k, 0) - exact[k]) <= 5.0 * est.std_errors(k, 0) + 1e-12);

  // rho_Hyb = ||rho W||_F / sqrt(N)
  MatrixXd rho(2, 3);
  rho << 1, 2, 3, 4, 5, 6;
  MatrixXd w(3, 2);
  w << 1, 0, 0, 1, 1, 1;
  CHECK(rho_hyb(rho, w) == doctest::Approx((rho * w).norm() / std::sqrt(2.0)).epsilon(1e-15));

  const auto profile = mismatch_profile(fs, DistributionSpec{}, x0, std::nullopt, 50000, 4);
  CHECK(profile.rho_vectors.cols() == 3);
  CHECK(profile.sigma_dir == doctest::Approx(sigma_dir(fs)).epsilon(1e-12));
  CHECK(profile.rho_hyb == doctest::Approx(rho_hyb(profile.rho_vectors, MatrixXd::Ones(3, 1))).epsilon(1e-12));
}

TEST_CASE("global mean width") {
  // R E max(|g1|, |g2|) = R int_0^inf 1 - erf(t / sqrt 2)^2 dt
  const double oracle = kronrod([](double t) { return 1.0 - std::pow(std::erf(t / std::sqrt(2.0)), 2); }, 0.0, 40.0);
  const auto two = global_mean_width(ConstraintSet::l1_ball(1.5, 2), 200000, 1);
  CHECK(two.kind == WidthEstimate::Kind::global);
  CHECK(std::abs(two.value - 1.5 * oracle) <= 5.0 * two.std_error);

  CHECK(global_mean_width(ConstraintSet::origin(5), 100).value == 0.0);
  CHECK_THROWS_AS(global_mean_width(ConstraintSet::unconstrained(5), 100), unsupported_operation);

  const double r = 2.0;
  const auto big = global_mean_width(ConstraintSet::l1_ball(r, 64), 20000, 2);
  CHECK(big.value >= r * std::sqrt(std::log(128.0)) / 2.0);
  CHECK(big.value <= r * 2.0 * std::sqrt(2.0 * std::log(128.0)));

  // identity dictionary equals the l1 ball; one-column l1,2 also
  const auto dict = global_mean_width(ConstraintSet::dictionary_l1_ball(r, MatrixXd::Identity(64, 64)), 20000, 2);
  CHECK(dict.value == doctest::Approx(big.value).epsilon(1e-12));
  const auto l12 = global_mean_width(ConstraintSet::l12_ball(r, 64, 1), 20000, 2);
  CHECK(l12.value == doctest::Approx(big.value).epsilon(1e-12));
  // l1,2 with M columns: R E max row norm, each row norm is chi_M
  const auto wide = global_mean_width(ConstraintSet::l12_ball(1.0, 8, 3), 100000, 5);
  CHECK(wide.value > std::sqrt(3.0));
}

TEST_CASE("conic mean widths") {
  // n = 1: min over tau of (g - tau)^2 is g_-^2, mean 1/2
  const auto one = conic_mean_width_l1(VectorXd::Constant(1, 0.7), 100000, 1);
  CHECK(one.kind == WidthEstimate::Kind::conic);
  CHECK(std::abs(one.squared_value - 0.5) <= 5.0 * one.squared_std_error);
  CHECK(one.squared_value <= 1.0);

  // dense x at n = 4: the polar cone is a ray, so dist^2 = ||g||^2 - <g, u>_+^2
  // with u = sign(x) / 2; expectation 4 - 1/2
  const Eigen::Vector4d dense(0.5, -0.2, 1.0, -0.1);
  const auto d = conic_mean_width_l1(dense, 100000, 2);
  CHECK(std::abs(d.squared_value - 3.5) <= 5.0 * d.squared_std_error);
  Stream rng(3, StreamDomain::monte_carlo);
  const Eigen::Vector4d u = dense.array().sign() / 2.0;
  for (int t = 0; t < 1000; ++t) {
    Eigen::Vector4d g;
    for (int k = 0; k < 4; ++k) g[k] = rng.normal();
    const double proj = g.squaredNorm() - std::pow(std::max(0.0, g.dot(u)), 2);
    CHECK(conic_distance_sq_l1(dense, g) == doctest::Approx(proj).epsilon(1e-7));
  }

  // sandwich for n = 64, s = 4
  const auto x0 = generate_sparse_source(64, 4, 3).entries;
  const auto sparse = conic_mean_width_l1(x0, 20000, 4);
  CHECK(sparse.squared_value >= 3.0);
  CHECK(sparse.squared_value <= 4.0 * 4.0 * std::log(32.0));
  CHECK(sparse.value * sparse.value <= sparse.squared_value + 1e-12);

  // one column of l1,2 is l1
  const auto as_l12 = conic_mean_width_l12(x0, VectorXd::Constant(1, 0.8), 20000, 5);
  CHECK(std::abs(as_l12.squared_value - sparse.squared_value) <=
        2.0 * std::hypot(as_l12.squared_std_error, sparse.squared_std_error));
  CHECK(conic_distance_sq_l12(x0, VectorXd::Constant(1, 2.0), MatrixXd(x0 * 1.7 + VectorXd::Ones(64))) ==
        doctest::Approx(conic_distance_sq_l1(x0, x0 * 1.7 + VectorXd::Ones(64))).epsilon(1e-7));

  // s log bound with 16 nodes
  const auto many = conic_mean_width_l12(x0, VectorXd::Ones(16), 5000, 6);
  CHECK(many.squared_value <= 4.0 * 4.0 * 16.0);

  // dense: the polar cone is the ray of sign(x) mu^T / ||mu||, expectation n M - 1/2
  const Eigen::Vector2d mu(1.0, -2.0);
  const auto dense12 = conic_mean_width_l12(dense, mu, 100000, 7);
  CHECK(dense12.squared_value >= 4.0 * 2.0 / 2.0);
  CHECK(std::abs(dense12.squared_value - 7.5) <= 5.0 * dense12.squared_std_error);

  CHECK_THROWS_AS(conic_mean_width_l1(VectorXd::Zero(4), 10), std::invalid_argument);
  CHECK_THROWS_AS(conic_mean_width_l12(dense, VectorXd::Zero(2), 10), std::invalid_argument);
}

TEST_CASE("sample complexity formulas") {
  SampleComplexityQuery q;
  q.s = 4;
  q.n = 64;
  CHECK(sample_complexity(q) == doctest::Approx(4.0 * std::log(32.0)));
  CHECK(sample_complexity(q) == doctest::Approx(13.8629).epsilon(1e-4));
  q.rule = SampleComplexityQuery::Rule::lifting;
  q.nodes = 16;
  CHECK(sample_complexity(q) == doctest::Approx(64.0));
  q.rule = SampleComplexityQuery::Rule::hybrid_global;
  q.width = 3.0;
  q.delta = 0.5;
  CHECK(sample_complexity(q) == doctest::Approx(16.0 * 9.0));
  q.rule = SampleComplexityQuery::Rule::hybrid_conic;
  CHECK(sample_complexity(q) == doctest::Approx(4.0 * 9.0));
  q.kappa = 2.0;
  CHECK(sample_complexity(q) == doctest::Approx(16.0 * 4.0 * 9.0));
  q.delta = 0.0;
  CHECK_THROWS_AS(sample_complexity(q), std::invalid_argument);
  q.delta = 1.5;
  CHECK_THROWS_AS(sample_complexity(q), std::invalid_argument);
}
