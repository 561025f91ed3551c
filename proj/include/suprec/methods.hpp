#pragma once

#include <optional>

#include <Eigen/Dense>

#include "suprec/model.hpp"
#include "suprec/prox.hpp"
#include "suprec/solver.hpp"

namespace suprec {

/// M x N combination matrix of the hybrid estimator.
class WeightMatrix {
 public:
  explicit WeightMatrix(MatrixXd entries);

  static WeightMatrix ones(Index nodes);
  static WeightMatrix identity(Index nodes);
  /// Single column of signs (zero entries are rejected).
  static WeightMatrix signs(const VectorXd& values);

  const MatrixXd& entries() const { return entries_; }
  Index nodes() const { return entries_.rows(); }
  Index columns() const { return entries_.cols(); }
  /// W^T W = (M/N) I within 1e-10 * (M/N) * sqrt(N) in Frobenius norm.
  bool semi_orthogonal() const { return semi_orthogonal_; }
  /// ||W^T W - (M/N) I||_F.
  double orthogonality_defect() const;

 private:
  MatrixXd entries_;
  bool semi_orthogonal_ = false;
};

/// W U^{-1/2} with U = (N/M) W^T W; requires full column rank and M >= N.
WeightMatrix semi_orthogonalize(const WeightMatrix& w);

struct RankOneFactors {
  VectorXd source;    // unit left singular vector
  VectorXd scalings;  // sigma * right singular vector
};

/// Best rank-one approximation x0 mu^T of X. The sign is fixed so the
/// largest-magnitude entry of mu is positive. Throws degenerate_input for X = 0.
RankOneFactors rank_one_factor(const MatrixXd& x);

struct RecoveryResult {
  MatrixXd estimate_matrix;  // n x N
  std::optional<VectorXd> extracted_source;
  std::optional<VectorXd> extracted_scalings;
  SolveReport report;
};

/// Superimposed design rows abar_i = sum_j a_i^j.
MatrixXd superimposed_design(const MeasurementEnsemble& ens);
/// Rows vec(A_i W) (column-major), A_i = [a_i^1 ... a_i^M].
MatrixXd combined_design(const MeasurementEnsemble& ens, const MatrixXd& weights);

/// l1-constrained Lasso on the superimposed vectors; targets mubar * x0.
RecoveryResult direct_method(const MeasurementEnsemble& ens, double radius,
                             const SolverConfig& cfg = {});

/// l1,2-constrained group Lasso on the n x M lifted problem followed by
/// rank-one extraction of (x0, mu).
RecoveryResult lifting_method(const MeasurementEnsemble& ens, double radius,
                              const SolverConfig& cfg = {});

/// Lasso over K on the hybrid vectors sum_j w_jk a_i^j; targets x0 mutilde^T.
/// A weight matrix that is not semi-orthogonal is rejected unless
/// `allow_non_semi_orthogonal` is set.
RecoveryResult hybrid_method(const MeasurementEnsemble& ens, const WeightMatrix& w,
                             const ConstraintSet& set, const SolverConfig& cfg = {},
                             bool allow_non_semi_orthogonal = false);

}  // namespace suprec
