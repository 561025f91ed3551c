#include "suprec/methods.hpp"

#include <cmath>
#include <stdexcept>

#include "suprec/errors.hpp"

namespace suprec {

// ---------------------------------------------------------------- weights

WeightMatrix::WeightMatrix(MatrixXd entries) : entries_(std::move(entries)) {
  if (entries_.size() == 0 || !entries_.allFinite())
    throw std::invalid_argument("WeightMatrix: entries must be non-empty and finite");
  const double ratio = static_cast<double>(nodes()) / static_cast<double>(columns());
  semi_orthogonal_ = orthogonality_defect() <=
                     1e-10 * ratio * std::sqrt(static_cast<double>(columns()));
}

WeightMatrix WeightMatrix::ones(Index nodes) { return WeightMatrix(MatrixXd::Ones(nodes, 1)); }

WeightMatrix WeightMatrix::identity(Index nodes) {
  return WeightMatrix(MatrixXd::Identity(nodes, nodes));
}

WeightMatrix WeightMatrix::signs(const VectorXd& values) {
  MatrixXd w(values.size(), 1);
  for (Index j = 0; j < values.size(); ++j) {
    if (values[j] == 0.0) throw std::invalid_argument("WeightMatrix::signs: zero entry has no sign");
    w(j, 0) = values[j] > 0.0 ? 1.0 : -1.0;
  }
  return WeightMatrix(std::move(w));
}

double WeightMatrix::orthogonality_defect() const {
  const double ratio = static_cast<double>(nodes()) / static_cast<double>(columns());
  return (entries_.transpose() * entries_ - ratio * MatrixXd::Identity(columns(), columns())).norm();
}

WeightMatrix semi_orthogonalize(const WeightMatrix& w) {
  const Index m = w.nodes();
  const Index n = w.columns();
  if (m < n) throw std::invalid_argument("semi_orthogonalize: need M >= N");
  const MatrixXd u = (static_cast<double>(n) / static_cast<double>(m)) *
                     (w.entries().transpose() * w.entries());
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(u);
  const VectorXd& vals = eig.eigenvalues();
  if (!(vals.minCoeff() > 1e-12 * std::max(1.0, vals.maxCoeff())))
    throw std::invalid_argument("semi_orthogonalize: weight matrix is rank deficient");
  const MatrixXd inv_sqrt =
      eig.eigenvectors() * vals.cwiseSqrt().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
  return WeightMatrix(w.entries() * inv_sqrt);
}

// ---------------------------------------------------------------- rank one

RankOneFactors rank_one_factor(const MatrixXd& x) {
  if (x.size() == 0 || !x.allFinite()) throw std::invalid_argument("rank_one_factor: invalid matrix");
  if (x.cwiseAbs().maxCoeff() == 0.0) throw degenerate_input("rank_one_factor: zero matrix");
  Eigen::JacobiSVD<MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  RankOneFactors out;
  out.source = svd.matrixU().col(0);
  out.scalings = svd.singularValues()[0] * svd.matrixV().col(0);
  Index lead = 0;
  out.scalings.cwiseAbs().maxCoeff(&lead);
  if (out.scalings[lead] < 0.0) {
    out.source = -out.source;
    out.scalings = -out.scalings;
  }
  return out;
}

// ---------------------------------------------------------------- designs

MatrixXd superimposed_design(const MeasurementEnsemble& ens) {
  const Index m = ens.sample_count();
  MatrixXd rows(m, ens.dimension());
  for (Index i = 0; i < m; ++i) rows.row(i) = ens.vectors[static_cast<std::size_t>(i)].rowwise().sum().transpose();
  return rows;
}

MatrixXd combined_design(const MeasurementEnsemble& ens, const MatrixXd& weights) {
  if (weights.rows() != ens.node_count())
    throw std::invalid_argument("combined_design: weight matrix must have M rows");
  const Index m = ens.sample_count();
  const Index n = ens.dimension();
  MatrixXd rows(m, n * weights.cols());
  MatrixXd combined(n, weights.cols());
  for (Index i = 0; i < m; ++i) {
    combined.noalias() = ens.vectors[static_cast<std::size_t>(i)] * weights;
    rows.row(i) = combined.reshaped().transpose();
  }
  return rows;
}

namespace {

void require_nonempty(const MeasurementEnsemble& ens) {
  if (ens.sample_count() < 1 || ens.vectors.size() != static_cast<std::size_t>(ens.sample_count()))
    throw std::invalid_argument("recovery: empty or inconsistent ensemble");
}

}  // namespace

RecoveryResult direct_method(const MeasurementEnsemble& ens, double radius,
                             const SolverConfig& cfg) {
  require_nonempty(ens);
  const auto set = ConstraintSet::l1_ball(radius, ens.dimension());
  RecoveryResult out;
  out.report = solve_k_lasso(superimposed_design(ens), ens.observations, set, cfg);
  out.estimate_matrix = out.report.minimizer;
  return out;
}

RecoveryResult lifting_method(const MeasurementEnsemble& ens, double radius,
                              const SolverConfig& cfg) {
  require_nonempty(ens);
  const Index n = ens.dimension();
  const Index nodes = ens.node_count();
  const auto set = ConstraintSet::l12_ball(radius, n, nodes);
  MatrixXd rows(ens.sample_count(), n * nodes);
  for (Index i = 0; i < ens.sample_count(); ++i)
    rows.row(i) = ens.vectors[static_cast<std::size_t>(i)].reshaped().transpose();

  RecoveryResult out;
  out.report = solve_k_lasso(rows, ens.observations, set, cfg);
  out.estimate_matrix = out.report.minimizer.reshaped(n, nodes);
  if (out.estimate_matrix.cwiseAbs().maxCoeff() > 0.0) {
    auto factors = rank_one_factor(out.estimate_matrix);
    out.extracted_source = std::move(factors.source);
    out.extracted_scalings = std::move(factors.scalings);
  }
  return out;
}

RecoveryResult hybrid_method(const MeasurementEnsemble& ens, const WeightMatrix& w,
                             const ConstraintSet& set, const SolverConfig& cfg,
                             bool allow_non_semi_orthogonal) {
  require_nonempty(ens);
  if (w.nodes() != ens.node_count())
    throw std::invalid_argument("hybrid_method: weight matrix must have M rows");
  if (!w.semi_orthogonal() && !allow_non_semi_orthogonal)
    throw std::invalid_argument(
        "hybrid_method: weight matrix is not semi-orthogonal (semi_orthogonalize it first)");
  if (set.rows() != ens.dimension() || set.cols() != w.columns())
    throw std::invalid_argument("hybrid_method: constraint set must live in R^{n x N}");

  RecoveryResult out;
  out.report = solve_k_lasso(combined_design(ens, w.entries()), ens.observations, set, cfg);
  out.estimate_matrix = out.report.minimizer.reshaped(ens.dimension(), w.columns());
  return out;
}

}  // namespace suprec
