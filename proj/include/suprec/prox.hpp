#pragma once

#include <Eigen/Dense>

namespace suprec {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Euclidean projection onto {x : ||x||_1 <= radius} by sort-based thresholding.
VectorXd project_l1_ball(const VectorXd& v, double radius);

/// Sum of the Euclidean norms of the rows.
double l12_norm(const MatrixXd& x);

/// Frobenius projection onto {X : ||X||_{1,2} <= radius}: the row-norm
/// vector is projected onto the l1 ball and each row is rescaled.
MatrixXd project_l12_ball(const MatrixXd& x, double radius);

/// Projection onto radius * D * B_1: returns D c* where c* minimizes
/// ||x - D c|| over ||c||_1 <= radius. Solved iteratively to `tolerance`.
VectorXd project_dictionary_ball(const VectorXd& x, double radius, const MatrixXd& dictionary,
                                 double tolerance = 1e-8);

/// Convex constraint set over n x N matrices, stored flattened in column-major
/// order (vectors are n x 1).
class ConstraintSet {
 public:
  enum class Kind { unconstrained, origin, l1_ball, l12_ball, dictionary_l1_ball };

  static constexpr double kMembershipTolerance = 1e-10;
  static constexpr double kDictionaryTolerance = 1e-8;

  static ConstraintSet unconstrained(Index rows, Index cols = 1);
  /// The singleton {0}.
  static ConstraintSet origin(Index rows, Index cols = 1);
  static ConstraintSet l1_ball(double radius, Index n);
  static ConstraintSet l12_ball(double radius, Index n, Index cols);
  /// radius * D * B_1^{n'}, living in R^n (n = D.rows()).
  static ConstraintSet dictionary_l1_ball(double radius, MatrixXd dictionary);

  Kind kind() const { return kind_; }
  double radius() const { return radius_; }
  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index dimension() const { return rows_ * cols_; }
  const MatrixXd& dictionary() const { return dictionary_; }
  bool bounded() const { return kind_ != Kind::unconstrained; }

  /// Membership up to kMembershipTolerance (kDictionaryTolerance for the
  /// inexact dictionary projection).
  bool contains(const VectorXd& x) const;
  VectorXd project(const VectorXd& x) const;

 private:
  ConstraintSet(Kind kind, double radius, Index rows, Index cols)
      : kind_(kind), radius_(radius), rows_(rows), cols_(cols) {}

  void check_size(const VectorXd& x) const;

  Kind kind_;
  double radius_;
  Index rows_;
  Index cols_;
  MatrixXd dictionary_;
};

}  // namespace suprec
