#include "suprec/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "suprec/rng.hpp"

namespace suprec {

void SolverConfig::validate() const {
  if (max_iters < 1) throw std::invalid_argument("SolverConfig: max_iters must be >= 1");
  if (!(rel_obj_tol > 0.0)) throw std::invalid_argument("SolverConfig: rel_obj_tol must be > 0");
  if (!(residual_tol > 0.0)) throw std::invalid_argument("SolverConfig: residual_tol must be > 0");
}

double estimate_lipschitz(const MatrixXd& design, double rel_tol) {
  if (design.size() == 0) throw std::invalid_argument("estimate_lipschitz: empty design");
  const double m = static_cast<double>(design.rows());
  Stream rng(0x5EEDu, StreamDomain::monte_carlo, 0x11u, 0x22u);
  VectorXd v(design.cols());
  for (Index k = 0; k < v.size(); ++k) v[k] = rng.normal();
  v.normalize();

  double lambda = 0.0;
  for (int it = 0; it < 100000; ++it) {
    const VectorXd w = design.transpose() * (design * v) / m;
    const double next = v.dot(w);  // Rayleigh quotient, never above the truth
    const double wn = w.norm();
    if (wn == 0.0) return 0.0;
    v = w / wn;
    if (it > 0 && std::abs(next - lambda) <= rel_tol * std::abs(next)) return next;
    lambda = next;
  }
  return lambda;
}

namespace {

// Least-squares data term (1/2m)||A x - y||^2. Gradients go through the
// Gram matrix when it is cheaper than two passes over A.
class LeastSquares {
 public:
  LeastSquares(const MatrixXd& design, const VectorXd& y) : a_(design), y_(y) {
    m_ = static_cast<double>(design.rows());
    use_gram_ = design.cols() <= 2 * design.rows();
    if (use_gram_) {
      gram_ = design.transpose() * design / m_;
      corr_ = design.transpose() * y / m_;
    }
  }

  void gradient(const VectorXd& x, VectorXd& grad) const {
    if (use_gram_) {
      grad.noalias() = gram_ * x;
      grad -= corr_;
    } else {
      const VectorXd r = a_ * x - y_;
      grad.noalias() = a_.transpose() * r / m_;
    }
  }

  double objective(const VectorXd& x) const { return 0.5 * (a_ * x - y_).squaredNorm() / m_; }

 private:
  const MatrixXd& a_;
  const VectorXd& y_;
  double m_ = 1.0;
  bool use_gram_ = false;
  MatrixXd gram_;
  VectorXd corr_;
};

constexpr double kStepPadding = 1.01;
constexpr int kCheckEvery = 10;

}  // namespace

SolveReport solve_k_lasso(const MatrixXd& design, const VectorXd& y, const ConstraintSet& set,
                          const SolverConfig& cfg, const VectorXd* initial) {
  cfg.validate();
  if (design.rows() < 1) throw std::invalid_argument("solve_k_lasso: empty design");
  if (design.rows() != y.size())
    throw std::invalid_argument("solve_k_lasso: design rows and observations differ");
  if (design.cols() != set.dimension())
    throw std::invalid_argument("solve_k_lasso: design columns and constraint dimension differ");
  if (!design.allFinite() || !y.allFinite())
    throw std::invalid_argument("solve_k_lasso: non-finite data");
  if (initial && initial->size() != design.cols())
    throw std::invalid_argument("solve_k_lasso: initial point has the wrong size");

  const LeastSquares f(design, y);

  bool backtracking = cfg.step_rule == StepRule::backtracking;
  double lipschitz = 0.0;
  if (!backtracking) {
    lipschitz = estimate_lipschitz(design);
    if (lipschitz == 0.0) backtracking = true;
  }
  double step = backtracking ? 1.0 : 1.0 / (kStepPadding * lipschitz);

  const Index d = design.cols();
  VectorXd x = set.project(initial ? *initial : VectorXd::Zero(d));
  VectorXd point = x;  // extrapolated point
  VectorXd grad(d), x_new(d), grad_x(d);
  double momentum = 1.0;

  SolveReport report;
  VectorXd best = x;
  double best_obj = f.objective(x);
  double best_res = std::numeric_limits<double>::infinity();
  if (cfg.record_objective) report.objective_trace.push_back(best_obj);
  std::vector<double> history;  // objective at checked iterates
  history.push_back(best_obj);

  auto residual_at = [&](const VectorXd& z, const VectorXd& gz) {
    return (z - set.project(z - step * gz)).norm() / step;
  };

  bool grad_cached = false;  // grad holds the gradient at `point`
  int iter = 0;
  for (iter = 1; iter <= cfg.max_iters; ++iter) {
    if (!grad_cached) f.gradient(point, grad);
    grad_cached = false;

    x_new = set.project(point - step * grad);
    if (backtracking) {
      const double f_point = f.objective(point);
      for (int tries = 0; tries < 200; ++tries) {
        const VectorXd diff = x_new - point;
        if (f.objective(x_new) <= f_point + grad.dot(diff) + 0.5 / step * diff.squaredNorm() + 1e-15 * std::abs(f_point))
          break;
        step *= 0.5;
        x_new = set.project(point - step * grad);
      }
    }

    if (cfg.acceleration) {
      if (cfg.restart && (point - x_new).dot(x_new - x) > 0.0) {
        momentum = 1.0;
        point = x_new;
      } else {
        const double next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
        point = x_new + ((momentum - 1.0) / next) * (x_new - x);
        momentum = next;
      }
    } else {
      point = x_new;
    }
    x.swap(x_new);

    const bool check = !cfg.acceleration || iter % kCheckEvery == 0 || iter == cfg.max_iters;
    if (!check) continue;

    f.gradient(x, grad_x);
    const double obj = f.objective(x);
    const double res = residual_at(x, grad_x);
    if (!cfg.acceleration) {
      grad = grad_x;
      grad_cached = true;
    }
    if (cfg.record_objective) report.objective_trace.push_back(obj);
    history.push_back(obj);
    if (obj < best_obj || (obj == best_obj && res < best_res)) {
      best_obj = obj;
      best_res = res;
      best = x;
    }

    bool done = res <= cfg.residual_tol * (1.0 + x.norm());
    const std::size_t lag = cfg.acceleration ? 1 : kCheckEvery;
    if (!done && history.size() > lag) {
      const double past = history[history.size() - 1 - lag];
      done = std::abs(past - obj) <= cfg.rel_obj_tol * std::abs(obj);
    }
    if (done) {
      report.minimizer = x;
      report.objective = obj;
      report.fixed_point_residual = res;
      report.iterations = iter;
      report.converged = true;
      return report;
    }
  }

  report.minimizer = best;
  report.objective = best_obj;
  f.gradient(best, grad_x);
  report.fixed_point_residual = residual_at(best, grad_x);
  report.iterations = cfg.max_iters;
  report.converged = false;
  return report;
}

}  // namespace suprec
