#pragma once

#include <functional>
#include <span>
#include <vector>

namespace suprec {

/// Nodes and weights of a one-dimensional quadrature rule.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Hermite rule for the standard normal weight (probabilists'
/// convention, weights sum to 1), computed by Golub-Welsch.
QuadratureRule gauss_hermite(int points);

/// Gauss-Legendre rule on [-1, 1] (Golub-Welsch).
QuadratureRule gauss_legendre(int points);

/// E[fn(g)], g ~ N(0, 1).
///
/// Smooth integrands (no breakpoints) use a 200-point Gauss-Hermite rule.
/// With breakpoints, [-L, L] (L = 14, or further out to cover every
/// breakpoint) is cut at the breakpoints and each piece is covered by 20-point
/// Gauss-Legendre panels of width <= 0.5 against the Gaussian density;
/// a single Hermite rule converges only algebraically across a kink.
double gaussian_expectation(const std::function<double(double)>& fn,
                            std::span<const double> breakpoints = {});

}  // namespace suprec
