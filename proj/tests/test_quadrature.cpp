#include <doctest.h>

#include <cmath>
#include <numeric>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "suprec/quadrature.hpp"

using namespace suprec;

namespace {

// Independent oracle: adaptive Gauss-Kronrod against the Gaussian density.
double kronrod_expectation(const std::function<double(double)>& fn) {
  const double c = 1.0 / std::sqrt(2.0 * M_PI);
  auto integrand = [&](double v) { return fn(v) * c * std::exp(-0.5 * v * v); };
  double total = 0.0;
  for (double lo = -16.0; lo < 16.0; lo += 0.25)
    total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, lo, lo + 0.25, 15, 1e-14);
  return total;
}

}  // namespace

TEST_CASE("Gauss-Hermite rule") {
  for (int p : {5, 20, 200}) {
    const auto rule = gauss_hermite(p);
    REQUIRE(rule.nodes.size() == static_cast<std::size_t>(p));
    CHECK(std::accumulate(rule.weights.begin(), rule.weights.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-13));
    // exact for polynomials of degree 2p-1: E g^2k = (2k-1)!!
    double dfact = 1.0;
    for (int k = 1; 2 * k <= std::min(2 * p - 1, 16); ++k) {
      dfact *= 2 * k - 1;
      double moment = 0.0;
      for (int i = 0; i < p; ++i) moment += rule.weights[i] * std::pow(rule.nodes[i], 2 * k);
      CHECK(moment == doctest::Approx(dfact).epsilon(1e-10));
    }
  }
}

TEST_CASE("Gauss-Legendre rule") {
  const auto rule = gauss_legendre(20);
  double w = 0.0, x4 = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    w += rule.weights[i];
    x4 += rule.weights[i] * std::pow(rule.nodes[i], 4);
  }
  CHECK(w == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(x4 == doctest::Approx(0.4).epsilon(1e-13));
}

TEST_CASE("Gaussian expectations match an adaptive oracle") {
  auto smooth = [](double v) { return std::cos(v) * v * v; };
  CHECK(gaussian_expectation(smooth) == doctest::Approx(kronrod_expectation(smooth)).epsilon(1e-12));
  // closed form: E cos(g) = exp(-1/2)
  CHECK(gaussian_expectation([](double v) { return std::cos(v); }) ==
        doctest::Approx(std::exp(-0.5)).epsilon(1e-13));

  for (double amp : {0.1, 0.5, 1.0, 2.0}) {
    auto clip_times_v = [amp](double v) { return v * std::copysign(std::min(std::abs(v), amp), v); };
    const double bp[] = {-amp, amp};
    const double got = gaussian_expectation(clip_times_v, bp);
    CHECK(got == doctest::Approx(kronrod_expectation(clip_times_v)).epsilon(1e-11));
    // closed form: E[g clip(g)] = P(|g| <= a) = erf(a / sqrt 2)
    CHECK(got == doctest::Approx(std::erf(amp / std::sqrt(2.0))).epsilon(1e-12));
  }

  auto abs_v = [](double v) { return std::abs(v); };
  const double zero[] = {0.0};
  CHECK(gaussian_expectation(abs_v, zero) == doctest::Approx(std::sqrt(2.0 / M_PI)).epsilon(1e-13));
}
