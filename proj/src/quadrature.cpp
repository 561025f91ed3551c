#include "suprec/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

namespace suprec {

namespace {

// Golub-Welsch: eigenvalues of the symmetric Jacobi matrix are the nodes and
// the squared first eigenvector components (times the weight mass) the weights.
QuadratureRule golub_welsch(int points, const std::function<double(int)>& off_diagonal,
                            double mass) {
  if (points < 1) throw std::invalid_argument("quadrature: need at least one point");
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(points, points);
  for (int k = 1; k < points; ++k) {
    jacobi(k - 1, k) = jacobi(k, k - 1) = off_diagonal(k);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  QuadratureRule rule;
  rule.nodes.resize(static_cast<std::size_t>(points));
  rule.weights.resize(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) {
    rule.nodes[static_cast<std::size_t>(k)] = eig.eigenvalues()[k];
    const double v0 = eig.eigenvectors()(0, k);
    rule.weights[static_cast<std::size_t>(k)] = mass * v0 * v0;
  }
  return rule;
}

const QuadratureRule& hermite200() {
  static const QuadratureRule rule = gauss_hermite(200);
  return rule;
}

const QuadratureRule& legendre20() {
  static const QuadratureRule rule = gauss_legendre(20);
  return rule;
}

double normal_pdf(double g) {
  return std::exp(-0.5 * g * g) / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace

QuadratureRule gauss_hermite(int points) {
  return golub_welsch(points, [](int k) { return std::sqrt(static_cast<double>(k)); }, 1.0);
}

QuadratureRule gauss_legendre(int points) {
  return golub_welsch(
      points,
      [](int k) {
        const double kk = static_cast<double>(k);
        return kk / std::sqrt(4.0 * kk * kk - 1.0);
      },
      2.0);
}

double gaussian_expectation(const std::function<double(double)>& fn,
                            std::span<const double> breakpoints) {
  if (breakpoints.empty()) {
    const auto& rule = hermite200();
    double sum = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) sum += rule.weights[k] * fn(rule.nodes[k]);
    return sum;
  }

  double limit = 14.0;
  for (double b : breakpoints) limit = std::max(limit, std::abs(b) + 1.0);
  std::vector<double> cuts{-limit, limit};
  for (double b : breakpoints) cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  const auto& rule = legendre20();
  double sum = 0.0;
  for (std::size_t piece = 0; piece + 1 < cuts.size(); ++piece) {
    const double lo = cuts[piece];
    const double hi = cuts[piece + 1];
    const int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) / 0.5)));
    const double width = (hi - lo) / panels;
    for (int p = 0; p < panels; ++p) {
      const double a = lo + p * width;
      const double mid = a + 0.5 * width;
      // far tails contribute nothing at double precision
      if (std::min(std::abs(a), std::abs(a + width)) > 40.0) continue;
      for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        const double g = mid + 0.5 * width * rule.nodes[k];
        sum += 0.5 * width * rule.weights[k] * fn(g) * normal_pdf(g);
      }
    }
  }
  return sum;
}

}  // namespace suprec
