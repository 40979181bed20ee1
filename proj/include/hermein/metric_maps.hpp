#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "hermein/parallel.hpp"
#include "hermein/split_bundles.hpp"

namespace hermein {

/// Hermitian positive-definite inner product on the section space, with a
/// cached Cholesky factorization for solves and the log-determinant. The
/// eigenvalue spread grows with the twist, so solves always go through the
/// factorization, never an explicit inverse.
class GramMetric {
public:
  explicit GramMetric(Matrix m) : matrix_(std::move(m)) {
    if (matrix_.rows() != matrix_.cols())
      throw std::invalid_argument("GramMetric: matrix must be square");
    const double scale = matrix_.norm();
    if ((matrix_ - matrix_.adjoint()).norm() > 1e-12 * (1.0 + scale))
      throw conditioning_error("GramMetric: matrix is not Hermitian");
    matrix_ = ((matrix_ + matrix_.adjoint()) / 2.0).eval();
    llt_.compute(matrix_);
    if (llt_.info() != Eigen::Success)
      throw conditioning_error("GramMetric: matrix is not positive-definite");
  }

  const Matrix& matrix() const { return matrix_; }
  Eigen::Index dim() const { return matrix_.rows(); }

  Matrix solve(const Matrix& rhs) const { return llt_.solve(rhs); }

  double log_det() const {
    double acc = 0.0;
    const auto& L = llt_.matrixLLT();
    for (Eigen::Index i = 0; i < L.rows(); ++i)
      acc += 2.0 * std::log(L(i, i).real());
    return acc;
  }

  GramMetric scaled(double c) const {
    if (!(c > 0.0)) throw std::invalid_argument("GramMetric::scaled: c must be positive");
    return GramMetric(c * matrix_);
  }

private:
  Matrix matrix_;
  Eigen::LLT<Matrix> llt_;
};

namespace detail {

inline void require_gram_rule(const BundleSpec& spec, const QuadratureRule& rule) {
  if (rule.kind != RuleKind::continuous)
    throw std::invalid_argument("gram: continuous rule required");
  if (rule.exactness < spec.max_twisted_degree())
    throw insufficient_quadrature_error(
        "gram: rule exactness below max twisted degree");
}

} // namespace detail

/// L^2 inner product on sections induced by a fiber metric closure H:
/// entry (i,j) = sum_k w_k (A_k col_i)^* H(z_k) (A_k col_j).
template <typename Field>
GramMetric gram_of(const Field& H, const BundleSpec& spec,
                   const QuadratureRule& rule) {
  spec.require_admissible();
  detail::require_gram_rule(spec, rule);
  const int p = spec.basis_dimension();

  Matrix G = indexed_sum(rule.size(), Matrix(Matrix::Zero(p, p)),
                         [&](std::size_t k) -> Matrix {
                           const EvaluationMap ev = evaluation_map(spec, rule.nodes[k]);
                           const Matrix HA = H(rule.nodes[k]) * ev.matrix;
                           return rule.weights[k] * (ev.matrix.adjoint() * HA);
                         });
  G = ((G + G.adjoint()) / 2.0).eval();
  return GramMetric(std::move(G)); // throws conditioning_error if not PD
}

inline GramMetric gram(const MetricField& field, const BundleSpec& spec,
                       const QuadratureRule& rule) {
  if (!(field.spec() == spec))
    throw std::invalid_argument("gram: field and spec disagree");
  return gram_of(field, spec, rule);
}

inline GramMetric gram(const MetricField& field, const QuadratureRule& rule) {
  return gram_of(field, field.spec(), rule);
}

/// Fiber metric induced by a section-space metric: the constrained minimum
/// min{ m(v,v) : v(z) = e } over sections, which is (A m^{-1} A^*)^{-1} for
/// the evaluation map A at z.
inline Matrix induce(const GramMetric& m, const BundleSpec& spec, ChartPoint z) {
  const EvaluationMap ev = evaluation_map(spec, z);
  const Matrix Y = m.solve(ev.matrix.adjoint()); // p x r
  Matrix Q = ev.matrix * Y;                      // A m^{-1} A^*
  Q = ((Q + Q.adjoint()) / 2.0).eval();

  const int r = spec.rank();
  if (r == 1) {
    const double q = Q(0, 0).real();
    if (!(q > 0.0) || !std::isfinite(q))
      throw base_point_error("induce: evaluation map degenerate at point");
    return (Matrix(1, 1) << 1.0 / q).finished();
  }
  const double det = (Q(0, 0) * Q(1, 1) - Q(0, 1) * Q(1, 0)).real();
  const double tr = Q.trace().real();
  if (!(det > 0.0) || !(tr > 0.0) || !std::isfinite(det))
    throw base_point_error("induce: evaluation map rank-deficient at point");
  Matrix inv(2, 2);
  inv(0, 0) = Q(1, 1) / det;
  inv(1, 1) = Q(0, 0) / det;
  inv(0, 1) = -Q(0, 1) / det;
  inv(1, 0) = -Q(1, 0) / det;
  return inv;
}

/// Projection-kernel density on the diagonal, B(z) = H(z) A m^{-1} A^*.
/// Similar to a Hermitian positive matrix; its trace integrates to the
/// section-space dimension.
inline Matrix bergman(const GramMetric& m, const MetricField& field, ChartPoint z) {
  const EvaluationMap ev = evaluation_map(field.spec(), z);
  const Matrix Y = m.solve(ev.matrix.adjoint());
  return field(z) * (ev.matrix * Y);
}

inline Matrix bergman(const MetricField& field, const BundleSpec& spec,
                      const QuadratureRule& rule, ChartPoint z) {
  if (!(field.spec() == spec))
    throw std::invalid_argument("bergman: field and spec disagree");
  return bergman(gram(field, rule), field, z);
}

/// Pointwise composite h^{-1} I_n L_n(h); equals diag 1/(d_i+n+1) exactly for
/// split round fields, with the curvature difference showing up at first
/// order in 1/n.
inline Matrix iln_matrix(const GramMetric& gram_of_field, const MetricField& field,
                         ChartPoint z) {
  const Matrix ind = induce(gram_of_field, field.spec(), z);
  return Eigen::PartialPivLU<Matrix>(field(z)).solve(ind);
}

inline Matrix iln_matrix(const MetricField& field, const BundleSpec& spec,
                         const QuadratureRule& rule, ChartPoint z) {
  if (!(field.spec() == spec))
    throw std::invalid_argument("iln_matrix: field and spec disagree");
  return iln_matrix(gram(field, rule), field, z);
}

} // namespace hermein
