#pragma once

#include <vector>

#include <Eigen/Dense>

#include "suprec/prox.hpp"

namespace suprec {

enum class StepRule { lipschitz_power_iteration, backtracking };

struct SolverConfig {
  int max_iters = 10000;
  double rel_obj_tol = 1e-12;
  /// Fixed-point residual threshold, relative to 1 + ||x||.
  double residual_tol = 1e-8;
  StepRule step_rule = StepRule::lipschitz_power_iteration;
  bool acceleration = true;
  bool restart = true;
  /// Keep the objective value of every iterate (only meaningful without
  /// acceleration, where every iterate is evaluated anyway).
  bool record_objective = false;

  void validate() const;
};

struct SolveReport {
  VectorXd minimizer;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  /// ||x - P_K(x - step * grad)|| / step at the minimizer.
  double fixed_point_residual = 0.0;
  std::vector<double> objective_trace;
};

/// Minimizes (1/2m) sum_i (y_i - <a_i, x>)^2 over x in K by accelerated
/// projected gradient with gradient-based adaptive restart. `design` holds
/// one measurement a_i per row; K's flattened dimension must equal its
/// column count. Returns the best checked iterate with diagnostics when
/// max_iters is exhausted.
SolveReport solve_k_lasso(const MatrixXd& design, const VectorXd& y, const ConstraintSet& set,
                          const SolverConfig& cfg = {}, const VectorXd* initial = nullptr);

/// Largest eigenvalue of (1/m) A^T A by power iteration (relative tolerance
/// `rel_tol`). Returns 0 for a zero matrix.
double estimate_lipschitz(const MatrixXd& design, double rel_tol = 1e-6);

}  // namespace suprec
