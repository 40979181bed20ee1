#pragma once

#include <sstream>

#include "hermein/experiments.hpp"

namespace hermein {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

namespace detail {

inline CriterionResult from_rows(int id, std::string name,
                                 const std::vector<ReportRow>& rows) {
  CriterionResult res{id, std::move(name), true, {}};
  std::ostringstream detail;
  for (const auto& r : rows) {
    res.pass = res.pass && r.pass;
    if (!r.pass)
      detail << " [" << r.quantity << " n=" << r.n << " value=" << format_double(r.value)
             << " tol=" << format_double(r.tolerance) << "]";
  }
  if (res.pass) {
    detail << rows.size() << " checks";
  }
  res.detail = detail.str();
  return res;
}

} // namespace detail

/// 1. Gram matrix of the quadratic round field equals the Beta diagonal.
inline CriterionResult criterion_gram_oracle() {
  return detail::from_rows(1, "gram oracle diag(1/3,1/6,1/3)",
                           run_gram_oracle(ExperimentConfig{}));
}

/// 2. Chern integral plus rank recovers the section count for distorted
/// fields across degree patterns and twists.
inline CriterionResult criterion_riemann_roch() {
  std::vector<ReportRow> rows;
  std::uint64_t seed = 201;
  for (const std::vector<int> degrees :
       {std::vector<int>{0, 0}, {1, -1}, {2, 0}})
    for (int n : {4, 8}) {
      const BundleSpec spec{degrees, n};
      const auto rule = rule_for(spec);
      const MetricField field(spec, make_seeded_distortion(2, 2, 0.3, seed++));
      const double lhs = degree_from_curvature(field, rule) + spec.rank();
      std::ostringstream name;
      name << "riemann_roch_d" << degrees[0] << "_" << degrees[1] << "_n" << n;
      rows.push_back(detail::check_row(n, name.str(), lhs, spec.basis_dimension(), 1e-5));
    }
  return detail::from_rows(2, "Riemann-Roch consistency (6 distorted fields)", rows);
}

/// 3. Projection-kernel density is the balanced constant for round fields.
inline CriterionResult criterion_bergman() {
  std::vector<ReportRow> rows;
  for (const auto& [degrees, n] :
       std::vector<std::pair<std::vector<int>, int>>{{{1, -1}, 5}, {{2, 0}, 3}, {{2}, 0}}) {
    ExperimentConfig ec;
    ec.degrees = degrees;
    ec.n = n;
    for (auto& r : run_bergman(ec)) rows.push_back(std::move(r));
  }
  return detail::from_rows(3, "Bergman exactness on split round fields", rows);
}

/// 4. Pointwise composite matches the per-summand balanced values with the
/// degree-difference gap at first order.
inline CriterionResult criterion_iln_expansion() {
  return detail::from_rows(4, "I_n L_n expansion diag(1/(n+2),1/n)",
                           run_iln_expansion(ExperimentConfig{}));
}

/// 5. The split example path: log-det slope 2, functional slope 1, affine
/// Kempf-Ness restriction.
inline CriterionResult criterion_unstable_example() {
  return detail::from_rows(5, "unstable example slopes (2 and 1) and affine KN",
                           run_unstable_example(ExperimentConfig{}));
}

/// 6. Functional normalization: scale identity, cocycle, gradient vs finite
/// differences.
inline CriterionResult criterion_normalization() {
  std::vector<ReportRow> rows;
  const BundleSpec spec{{0, 0}, 2};
  const auto rule = rule_for(spec);
  const ReferenceMetric k0(spec);

  const MetricField h(spec, make_seeded_distortion(2, 2, 0.4, 23));
  rows.push_back(detail::check_row(spec.n, "scale_identity",
                                   donaldson_m_between(h, h.scaled(2.0), rule, 16), 0.0,
                                   1e-8));

  const MetricField a(spec, make_seeded_distortion(2, 2, 0.4, 51));
  const MetricField b(spec, make_seeded_distortion(2, 2, 0.4, 52));
  const MetricField c(spec, make_seeded_distortion(2, 2, 0.4, 53));
  const double cyc = donaldson_m_between(a, b, rule, 64) +
                     donaldson_m_between(b, c, rule, 64) +
                     donaldson_m_between(c, a, rule, 64);
  rows.push_back(detail::check_row(spec.n, "cocycle", cyc, 0.0, 1e-6));

  const GramMetric m = gram(MetricField(spec, make_seeded_distortion(2, 2, 0.4, 19)), rule);
  const Matrix grad = kn_gradient(m, k0, spec, rule);
  const double step = 1e-5;
  double worst_rel = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    std::mt19937_64 rng(400 + s);
    auto unit = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    Matrix dir(m.dim(), m.dim());
    for (int i = 0; i < m.dim(); ++i)
      for (int j = 0; j < m.dim(); ++j)
        dir(i, j) = Complex(2.0 * unit() - 1.0, 2.0 * unit() - 1.0);
    dir = ((dir + dir.adjoint()) / 2.0).eval();
    const double analytic = (grad * dir).trace().real();
    const double plus = kn_functional(GramMetric(m.matrix() + step * dir), k0, spec, rule);
    const double minus = kn_functional(GramMetric(m.matrix() - step * dir), k0, spec, rule);
    const double fd = (plus - minus) / (2.0 * step);
    worst_rel = std::max(worst_rel, std::abs(fd - analytic) / (1.0 + std::abs(analytic)));
  }
  rows.push_back(detail::bound_row(spec.n, "gradient_fd_relative_error", worst_rel, 1e-5));
  return detail::from_rows(6, "functional normalization suite", rows);
}

/// 7. The functional gap difference decays like 1/n.
inline CriterionResult criterion_functional_gap() {
  return detail::from_rows(7, "functional gap decay (slope <= -0.7)",
                           run_functional_gap(ExperimentConfig{}));
}

/// 8. Torsion variation: exact zero on diagonal round paths, 1/n decay on
/// distorted paths.
inline CriterionResult criterion_torsion_decay() {
  return detail::from_rows(8, "torsion variation decay",
                           run_torsion_decay(ExperimentConfig{}));
}

/// 9. Balanced iteration converges and the recovered metrics approach the
/// round product with shrinking central-curvature defect.
inline CriterionResult criterion_convergence_study() {
  return detail::from_rows(9, "Yang-Mills recovery across twists",
                           run_convergence_study(ExperimentConfig{}));
}

/// 10. Fixed-point and gradient optimizers agree on the critical value.
inline CriterionResult criterion_cross_optimizer() {
  return detail::from_rows(10, "cross-optimizer agreement",
                           run_kn_minimize(ExperimentConfig{}));
}

inline std::vector<CriterionResult> run_acceptance() {
  return {
      criterion_gram_oracle(),      criterion_riemann_roch(),
      criterion_bergman(),          criterion_iln_expansion(),
      criterion_unstable_example(), criterion_normalization(),
      criterion_functional_gap(),   criterion_torsion_decay(),
      criterion_convergence_study(), criterion_cross_optimizer(),
  };
}

/// Prints one pass/fail line per criterion; returns the failure count.
inline int report_acceptance(std::ostream& out) {
  const auto results = run_acceptance();
  int failures = 0;
  for (const auto& r : results) {
    out << (r.pass ? "PASS" : "FAIL") << " criterion " << r.id << ": " << r.name
        << " (" << r.detail << ")\n";
    if (!r.pass) ++failures;
  }
  out << (failures == 0 ? "all criteria passed"
                        : std::to_string(failures) + " criteria failed")
      << "\n";
  return failures;
}

} // namespace hermein
