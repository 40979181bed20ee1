#pragma once

#include <optional>

#include "hermein/functionals.hpp"

namespace hermein {

/// Trace of one optimizer run. converged means the final residual of the
/// balanced equation (p/r) L(I(m)) = m dropped below tolerance.
struct IterationReport {
  std::optional<GramMetric> final_metric;
  std::vector<double> residual_history;
  std::vector<double> kn_history;
  bool converged = false;
  int iterations = 0;
  /// Steps on which the functional increased by more than 1e-10; the descent
  /// along the fixed-point iteration is observed, not proved.
  int kn_monotonicity_violations = 0;

  const GramMetric& metric() const { return *final_metric; }
};

/// Approximate constant-curvature metric c * induce(m*, .) recovered from a
/// critical section-space metric.
struct RecoveredMetric {
  BundleSpec spec;
  GramMetric m_star;
  double c = 1.0;
  std::vector<ChartPoint> nodes;
  std::vector<Matrix> samples;

  Matrix operator()(ChartPoint z) const { return c * induce(m_star, spec, z); }
};

namespace detail {

/// Rescales m so its log-determinant matches target_ldet (the SL gauge fix;
/// the functional is flat along overall scale).
inline GramMetric fix_determinant(const GramMetric& m, double target_ldet) {
  const double shift = (target_ldet - m.log_det()) / static_cast<double>(m.dim());
  return m.scaled(std::exp(shift));
}

inline double balanced_residual(const GramMetric& m, const Matrix& mapped) {
  return (mapped - m.matrix()).norm() / m.matrix().norm();
}

} // namespace detail

/// Fixed-point iteration m -> (p/r) gram(induce(m, .)) with the determinant
/// renormalized each step. Fixed points solve the balanced equation, the
/// stationarity condition of the Kempf-Ness functional.
inline IterationReport t_iterate(const GramMetric& m0, const BundleSpec& spec,
                                 const ReferenceMetric& k0, const QuadratureRule& rule,
                                 int max_iter, double tol) {
  spec.require_admissible();
  if (!(tol > 0.0)) throw std::invalid_argument("t_iterate: tol must be positive");
  if (max_iter < 0) throw std::invalid_argument("t_iterate: max_iter must be >= 0");

  const double p_over_r = static_cast<double>(spec.basis_dimension()) / spec.rank();
  const double ldet0 = m0.log_det();

  IterationReport report;
  GramMetric m = m0;
  for (int it = 0; it <= max_iter; ++it) {
    auto induced = [&](ChartPoint z) -> Matrix { return induce(m, spec, z); };
    const GramMetric mapped = gram_of(induced, spec, rule);
    const Matrix target = p_over_r * mapped.matrix();

    const double residual = detail::balanced_residual(m, target);
    report.residual_history.push_back(residual);
    const double kn = kn_functional(m, k0, spec, rule);
    if (!report.kn_history.empty() && kn > report.kn_history.back() + 1e-10)
      ++report.kn_monotonicity_violations;
    report.kn_history.push_back(kn);

    if (residual > 1e3) throw divergence_error("t_iterate: residual blew up");
    if (residual < tol) {
      report.converged = true;
      report.iterations = it;
      break;
    }
    if (it == max_iter) {
      report.iterations = it;
      break;
    }
    m = detail::fix_determinant(GramMetric(target), ldet0);
  }
  report.final_metric = std::move(m);
  return report;
}

/// Projected gradient descent on the Kempf-Ness functional in the
/// affine-invariant geometry: direction m grad m with the scale component
/// removed, Armijo backtracking, determinant renormalized each accepted step.
inline IterationReport minimize_kn(const GramMetric& m0, const BundleSpec& spec,
                                   const ReferenceMetric& k0, const QuadratureRule& rule,
                                   int max_iter, double tol, double step0) {
  spec.require_admissible();
  if (!(step0 > 0.0)) throw std::invalid_argument("minimize_kn: step0 must be positive");
  if (!(tol > 0.0)) throw std::invalid_argument("minimize_kn: tol must be positive");

  const double p = spec.basis_dimension();
  const double ldet0 = m0.log_det();

  IterationReport report;
  GramMetric m = m0;
  double kn = kn_functional(m, k0, spec, rule);
  for (int it = 0; it <= max_iter; ++it) {
    const Matrix grad = kn_gradient(m, k0, spec, rule);
    // Natural (affine-invariant) descent direction, projected off the
    // determinant direction.
    const double scale_component = (grad * m.matrix()).trace().real() / p;
    Matrix dir = m.matrix() * grad * m.matrix() - scale_component * m.matrix();
    dir = ((dir + dir.adjoint()) / 2.0).eval();

    const double grad_norm = std::sqrt(std::abs((grad * dir).trace().real()));
    report.residual_history.push_back(grad_norm);
    report.kn_history.push_back(kn);

    if (grad_norm < tol) {
      report.converged = true;
      report.iterations = it;
      break;
    }
    if (it == max_iter) {
      report.iterations = it;
      break;
    }

    const double slope = (grad * dir).trace().real(); // descent rate along -dir
    const double floor = 4e-13 * (1.0 + std::abs(kn)); // kn evaluation noise
    if (step0 * slope <= floor) {
      // no measurable decrease is available at double precision
      report.converged = true;
      report.iterations = it;
      break;
    }
    double step = step0;
    bool accepted = false;
    double best_kn = kn;
    for (int halving = 0; halving < 60; ++halving) {
      Matrix trial = m.matrix() - step * dir;
      trial = ((trial + trial.adjoint()) / 2.0).eval();
      try {
        GramMetric candidate =
            detail::fix_determinant(GramMetric(std::move(trial)), ldet0);
        const double kn_trial = kn_functional(candidate, k0, spec, rule);
        best_kn = std::min(best_kn, kn_trial);
        if (kn_trial <= kn - 1e-4 * step * slope) {
          m = std::move(candidate);
          kn = kn_trial;
          accepted = true;
          break;
        }
      } catch (const conditioning_error&) {
        // stepped outside the positive cone; shorten
      }
      step /= 2.0;
    }
    if (!accepted) {
      if (best_kn <= kn + floor) {
        // decrease is below evaluation precision: the iterate is a critical
        // point at working accuracy
        report.converged = true;
        report.iterations = it;
        break;
      }
      throw stall_error("minimize_kn: line search stalled");
    }
  }
  report.final_metric = std::move(m);
  return report;
}

/// Rebuilds the approximate constant-curvature metric c * induce(m*, .),
/// with c fixed by matching the integrated log-determinant of the reference
/// field (the theory pins the constant only to leading order).
inline RecoveredMetric recover_ym(const GramMetric& m_star, const BundleSpec& spec,
                                  const QuadratureRule& rule,
                                  const MetricField& reference) {
  spec.require_admissible();
  if (!(reference.spec() == spec))
    throw std::invalid_argument("recover_ym: reference on a different bundle");

  double gap = 0.0; // int (ln det ref - ln det induce) dmu
  for (std::size_t k = 0; k < rule.size(); ++k) {
    const ChartPoint z = rule.nodes[k];
    gap += rule.weights[k] * (detail::log_det_pd(reference(z)) -
                              detail::log_det_pd(induce(m_star, spec, z)));
  }
  RecoveredMetric rec{spec, m_star, std::exp(gap / spec.rank()), rule.nodes, {}};
  rec.samples.reserve(rule.size());
  for (const ChartPoint& z : rule.nodes) rec.samples.push_back(rec(z));
  return rec;
}

/// Sobolev-type distance between two fiber-metric closures relative to the
/// unit-determinant reference: L2 norm of k0^{-1}(a-b) plus its first
/// finite-difference derivatives over the quadrature nodes.
template <typename FieldA, typename FieldB>
double sobolev_distance(const FieldA& a, const FieldB& b, const ReferenceMetric& k0,
                        const QuadratureRule& rule, double step = 1e-4) {
  auto rel = [&](ChartPoint z) -> Matrix {
    return Eigen::PartialPivLU<Matrix>(k0(z)).solve(a(z) - b(z));
  };
  double acc = 0.0;
  for (std::size_t k = 0; k < rule.size(); ++k) {
    const ChartPoint z = rule.nodes[k];
    const double s = step * std::sqrt(1.0 + std::norm(z));
    const Matrix v = rel(z);
    const Matrix dx = (rel(z + Complex(s, 0)) - rel(z - Complex(s, 0))) / (2.0 * s);
    const Matrix dy = (rel(z + Complex(0, s)) - rel(z - Complex(0, s))) / (2.0 * s);
    acc += rule.weights[k] * (v.squaredNorm() + dx.squaredNorm() + dy.squaredNorm());
  }
  return std::sqrt(acc);
}

struct ConvergenceRow {
  int n = 0;
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;
  double distance = 0.0;
  double he_defect = 0.0;
  double scale_c = 1.0;
};

/// For each twist in the list: iterate to the balanced metric from the
/// distorted start, recover the candidate constant-curvature metric, and
/// report its Sobolev distance to the round product together with the
/// central-curvature defect.
inline std::vector<ConvergenceRow> convergence_study(
    const std::vector<int>& degrees, const DistortionSpec& start_distortion,
    const std::vector<int>& n_list, const QuadratureParams& params = {},
    int max_iter = 200, double tol = 1e-8) {
  if (n_list.empty())
    throw std::invalid_argument("convergence_study: empty n list");
  for (std::size_t i = 1; i < n_list.size(); ++i)
    if (n_list[i] <= n_list[i - 1])
      throw std::invalid_argument("convergence_study: n list must be ascending");

  std::vector<ConvergenceRow> rows;
  for (int n : n_list) {
    const BundleSpec spec{degrees, n};
    spec.require_admissible();
    const QuadratureRule rule = rule_for(spec, params);
    const ReferenceMetric k0(spec);
    const MetricField target(spec, DistortionSpec::identity());
    const MetricField start(spec, start_distortion);

    const IterationReport report =
        t_iterate(gram(start, rule), spec, k0, rule, max_iter, tol);
    const RecoveredMetric rec = recover_ym(report.metric(), spec, rule, target);

    ConvergenceRow row;
    row.n = n;
    row.converged = report.converged;
    row.iterations = report.iterations;
    row.residual = report.residual_history.back();
    row.distance = sobolev_distance(rec, target, k0, rule);
    row.he_defect = hermite_einstein_defect(rec, spec, rule);
    row.scale_c = rec.c;
    rows.push_back(row);
  }
  return rows;
}

} // namespace hermein
