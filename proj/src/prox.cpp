#include "suprec/prox.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "suprec/solver.hpp"

namespace suprec {

namespace {

void require_radius(double radius, const char* where) {
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw std::invalid_argument(std::string(where) + ": radius must be > 0");
}

}  // namespace

VectorXd project_l1_ball(const VectorXd& v, double radius) {
  require_radius(radius, "project_l1_ball");
  if (!v.allFinite()) throw std::invalid_argument("project_l1_ball: non-finite input");
  if (v.lpNorm<1>() <= radius) return v;

  std::vector<double> mags(static_cast<std::size_t>(v.size()));
  for (Index k = 0; k < v.size(); ++k) mags[static_cast<std::size_t>(k)] = std::abs(v[k]);
  std::sort(mags.begin(), mags.end(), std::greater<>());

  // threshold = (sum of the k largest magnitudes - radius) / k for the largest
  // k whose k-th magnitude still exceeds it
  double cumulative = 0.0;
  double threshold = 0.0;
  for (std::size_t k = 0; k < mags.size(); ++k) {
    cumulative += mags[k];
    const double candidate = (cumulative - radius) / static_cast<double>(k + 1);
    if (mags[k] > candidate) {
      threshold = candidate;
    } else {
      break;
    }
  }
  VectorXd out(v.size());
  for (Index k = 0; k < v.size(); ++k) {
    const double mag = std::max(std::abs(v[k]) - threshold, 0.0);
    out[k] = v[k] >= 0.0 ? mag : -mag;
  }
  return out;
}

double l12_norm(const MatrixXd& x) { return x.rowwise().norm().sum(); }

MatrixXd project_l12_ball(const MatrixXd& x, double radius) {
  require_radius(radius, "project_l12_ball");
  if (!x.allFinite()) throw std::invalid_argument("project_l12_ball: non-finite input");
  const VectorXd norms = x.rowwise().norm();
  if (norms.sum() <= radius) return x;
  const VectorXd shrunk = project_l1_ball(norms, radius);
  MatrixXd out = MatrixXd::Zero(x.rows(), x.cols());
  for (Index k = 0; k < x.rows(); ++k) {
    if (norms[k] > 0.0 && shrunk[k] > 0.0) out.row(k) = x.row(k) * (shrunk[k] / norms[k]);
  }
  return out;
}

VectorXd project_dictionary_ball(const VectorXd& x, double radius, const MatrixXd& dictionary,
                                 double tolerance) {
  require_radius(radius, "project_dictionary_ball");
  if (dictionary.rows() != x.size() || dictionary.cols() < 1)
    throw std::invalid_argument("project_dictionary_ball: dictionary/vector dimension mismatch");
  SolverConfig cfg;
  cfg.max_iters = 100000;
  cfg.residual_tol = tolerance;
  cfg.rel_obj_tol = 1e-15;
  const auto report =
      solve_k_lasso(dictionary, x, ConstraintSet::l1_ball(radius, dictionary.cols()), cfg);
  return dictionary * report.minimizer;
}

// ---------------------------------------------------------------- ConstraintSet

ConstraintSet ConstraintSet::unconstrained(Index rows, Index cols) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("ConstraintSet: empty shape");
  return ConstraintSet(Kind::unconstrained, 0.0, rows, cols);
}

ConstraintSet ConstraintSet::origin(Index rows, Index cols) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("ConstraintSet: empty shape");
  return ConstraintSet(Kind::origin, 0.0, rows, cols);
}

ConstraintSet ConstraintSet::l1_ball(double radius, Index n) {
  require_radius(radius, "ConstraintSet::l1_ball");
  if (n < 1) throw std::invalid_argument("ConstraintSet: empty shape");
  return ConstraintSet(Kind::l1_ball, radius, n, 1);
}

ConstraintSet ConstraintSet::l12_ball(double radius, Index n, Index cols) {
  require_radius(radius, "ConstraintSet::l12_ball");
  if (n < 1 || cols < 1) throw std::invalid_argument("ConstraintSet: empty shape");
  return ConstraintSet(Kind::l12_ball, radius, n, cols);
}

ConstraintSet ConstraintSet::dictionary_l1_ball(double radius, MatrixXd dictionary) {
  require_radius(radius, "ConstraintSet::dictionary_l1_ball");
  if (dictionary.size() == 0 || !dictionary.allFinite())
    throw std::invalid_argument("ConstraintSet: invalid dictionary");
  ConstraintSet set(Kind::dictionary_l1_ball, radius, dictionary.rows(), 1);
  set.dictionary_ = std::move(dictionary);
  return set;
}

void ConstraintSet::check_size(const VectorXd& x) const {
  if (x.size() != dimension())
    throw std::invalid_argument("ConstraintSet: expected a vector of size " +
                                std::to_string(dimension()));
}

bool ConstraintSet::contains(const VectorXd& x) const {
  check_size(x);
  const double slack = kMembershipTolerance * std::max(1.0, radius_);
  switch (kind_) {
    case Kind::unconstrained:
      return true;
    case Kind::origin:
      return x.lpNorm<Eigen::Infinity>() <= kMembershipTolerance;
    case Kind::l1_ball:
      return x.lpNorm<1>() <= radius_ + slack;
    case Kind::l12_ball:
      return l12_norm(x.reshaped(rows_, cols_)) <= radius_ + slack;
    case Kind::dictionary_l1_ball:
      return (project(x) - x).norm() <= kDictionaryTolerance * (1.0 + x.norm());
  }
  return false;
}

VectorXd ConstraintSet::project(const VectorXd& x) const {
  check_size(x);
  switch (kind_) {
    case Kind::unconstrained:
      return x;
    case Kind::origin:
      return VectorXd::Zero(x.size());
    case Kind::l1_ball:
      return project_l1_ball(x, radius_);
    case Kind::l12_ball: {
      const MatrixXd p = project_l12_ball(x.reshaped(rows_, cols_), radius_);
      return p.reshaped();
    }
    case Kind::dictionary_l1_ball:
      return project_dictionary_ball(x, radius_, dictionary_, kDictionaryTolerance * 1e-2);
  }
  return x;
}

}  // namespace suprec
