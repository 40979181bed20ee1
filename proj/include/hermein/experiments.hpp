#pragma once

#include <chrono>
#include <cmath>
#include <iostream>
#include <optional>

#include "hermein/balanced_optimizer.hpp"
#include "hermein/config.hpp"
#include "hermein/report.hpp"

namespace hermein {

enum class Experiment {
  gram_oracle,
  bergman,
  iln_expansion,
  unstable_example,
  balanced_run,
  kn_minimize,
  functional_gap,
  torsion_decay,
  convergence_study,
};

inline const std::vector<std::pair<std::string, Experiment>>& experiment_names() {
  static const std::vector<std::pair<std::string, Experiment>> names = {
      {"gram_oracle", Experiment::gram_oracle},
      {"bergman", Experiment::bergman},
      {"iln_expansion", Experiment::iln_expansion},
      {"unstable_example", Experiment::unstable_example},
      {"balanced_run", Experiment::balanced_run},
      {"kn_minimize", Experiment::kn_minimize},
      {"functional_gap", Experiment::functional_gap},
      {"torsion_decay", Experiment::torsion_decay},
      {"convergence_study", Experiment::convergence_study},
  };
  return names;
}

/// Parsed experiment request. Anything not set in the config falls back to
/// the experiment's documented defaults, which reproduce the acceptance
/// checks.
struct ExperimentConfig {
  Experiment experiment = Experiment::gram_oracle;
  std::optional<std::vector<int>> degrees;
  std::optional<int> n;
  std::optional<std::vector<int>> n_list;
  QuadratureParams quad;
  std::optional<int> point_mass_count;
  double point_phase = 0.0;
  std::optional<DistortionSpec> distortion;
  int max_iter = 200;
  double tol = 1e-8;
  double step0 = 1.0;
  std::string format = "csv";
  std::string path = "report.csv";

  static ExperimentConfig from(const Config& cfg) {
    ExperimentConfig ec;
    const std::string name = cfg.get_string("experiment");
    bool found = false;
    for (const auto& [key, value] : experiment_names())
      if (key == name) {
        ec.experiment = value;
        found = true;
      }
    if (!found)
      throw parse_error(0, 0, "unknown experiment '" + name + "'");

    if (cfg.has("bundle.degrees")) ec.degrees = cfg.get_int_list("bundle.degrees");
    if (cfg.has("bundle.n")) ec.n = static_cast<int>(cfg.get_int("bundle.n"));
    if (cfg.has("bundle.n_list")) ec.n_list = cfg.get_int_list("bundle.n_list");
    ec.quad.radial = static_cast<int>(cfg.get_int("quadrature.radial", 0));
    ec.quad.angular = static_cast<int>(cfg.get_int("quadrature.angular", 0));
    if (cfg.has("quadrature.point_mass")) {
      ec.point_mass_count = static_cast<int>(cfg.get_int("quadrature.point_mass"));
      if (!cfg.has("quadrature.seed"))
        throw invariant_violation(
            "seed-required", "point-mass quadrature referenced without quadrature.seed");
      const double golden = 0.6180339887498949;
      ec.point_phase =
          std::fmod(golden * static_cast<double>(cfg.get_int("quadrature.seed")), 1.0);
    }

    if (cfg.has("distortion.kind")) {
      const std::string kind = cfg.get_string("distortion.kind");
      if (kind == "identity") {
        ec.distortion = DistortionSpec::identity();
      } else if (kind == "diagonal_exp") {
        ec.distortion = DistortionSpec::diagonal_exp(cfg.get_double("distortion.u"));
      } else if (kind == "log_polynomial") {
        if (!cfg.has("distortion.seed"))
          throw invariant_violation("seed-required",
                                    "log_polynomial distortion referenced without distortion.seed");
        const int rank = cfg.has("bundle.degrees")
                             ? static_cast<int>(cfg.get_int_list("bundle.degrees").size())
                             : 2;
        ec.distortion = make_seeded_distortion(
            rank, static_cast<int>(cfg.get_int("distortion.degree", 2)),
            cfg.get_double("distortion.amplitude", 0.4),
            static_cast<std::uint64_t>(cfg.get_int("distortion.seed")),
            cfg.get_bool("distortion.trace_free", false));
      } else {
        throw parse_error(0, 0, "unknown distortion.kind '" + kind + "'");
      }
    }

    ec.max_iter = static_cast<int>(cfg.get_int("optimizer.max_iter", 200));
    ec.tol = cfg.get_double("optimizer.tol", 1e-8);
    ec.step0 = cfg.get_double("optimizer.step0", 1.0);
    ec.format = cfg.get_string("output.format", "csv");
    ec.path = cfg.get_string("output.path", "report." + ec.format);
    if (ec.format != "csv" && ec.format != "json")
      throw parse_error(0, 0, "output.format must be csv or json");
    return ec;
  }
};

namespace detail {

inline double fit_loglog_slope(const std::vector<double>& xs,
                               const std::vector<double>& ys) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const auto m = static_cast<double>(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x = std::log(xs[i]), y = std::log(ys[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

/// Least-squares intercept of y = a + b/n.
inline double fit_intercept_inv(const std::vector<double>& ns,
                                const std::vector<double>& ys) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const auto m = static_cast<double>(ns.size());
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const double x = 1.0 / ns[i], y = ys[i];
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double b = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return (sy - b * sx) / m;
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline ReportRow check_row(int n, std::string quantity, double value, double target,
                           double tol) {
  return {n, std::move(quantity), value, tol, std::abs(value - target) <= tol};
}

inline ReportRow bound_row(int n, std::string quantity, double value, double bound) {
  return {n, std::move(quantity), value, bound, value <= bound};
}

// Default seed-fixed fields reproduced by the acceptance suite.
inline DistortionSpec default_mixing_distortion() {
  return make_seeded_distortion(2, 2, 0.4, 56);
}
inline DistortionSpec gap_field_h() { return make_seeded_distortion(2, 1, 0.45, 107); }
inline DistortionSpec gap_field_k() { return make_seeded_distortion(2, 1, 0.45, 108); }
inline DistortionSpec torsion_endpoint() {
  return make_seeded_distortion(2, 2, 0.4, 87, /*trace_free=*/true);
}

} // namespace detail

inline std::vector<ReportRow> run_gram_oracle(const ExperimentConfig& ec) {
  const BundleSpec spec{ec.degrees.value_or(std::vector<int>{2}), ec.n.value_or(0)};
  spec.require_admissible();
  const auto t0 = std::chrono::steady_clock::now();
  const auto rule = build_quadrature(ec.quad.radial > 0 ? ec.quad.radial : 32,
                                     ec.quad.angular > 0 ? ec.quad.angular : 16);
  const MetricField fs(spec, DistortionSpec::identity());
  const GramMetric g = gram(fs, spec, rule);
  const double runtime = detail::seconds_since(t0);

  std::vector<ReportRow> rows;
  const int m = spec.max_twisted_degree();
  for (int j = 0; j <= m; ++j) {
    double expect = 1.0;
    for (int i = 1; i <= j; ++i) expect *= i;
    for (int i = 1; i <= m - j; ++i) expect *= i;
    for (int i = 1; i <= m + 1; ++i) expect /= i;
    rows.push_back(detail::check_row(spec.n, "gram_diag_" + std::to_string(j),
                                     g.matrix()(j, j).real(), expect, 1e-10));
  }
  double offdiag = 0.0;
  for (int i = 0; i < g.dim(); ++i)
    for (int j = 0; j < g.dim(); ++j)
      if (i != j) offdiag = std::max(offdiag, std::abs(g.matrix()(i, j)));
  rows.push_back(detail::bound_row(spec.n, "gram_offdiag_max", offdiag, 1e-10));
  rows.push_back(detail::bound_row(spec.n, "runtime_seconds", runtime, 1.0));
  return rows;
}

inline std::vector<ReportRow> run_bergman(const ExperimentConfig& ec) {
  const BundleSpec spec{ec.degrees.value_or(std::vector<int>{1, -1}), ec.n.value_or(5)};
  spec.require_admissible();
  const auto rule = rule_for(spec, ec.quad);
  const MetricField fs(spec, DistortionSpec::identity());
  const GramMetric g = gram(fs, rule);

  double sup_dev = 0.0, trace_integral = 0.0, diag_diff = 0.0;
  bool first = true;
  for (std::size_t k = 0; k < rule.size(); ++k) {
    const Matrix B = bergman(g, fs, rule.nodes[k]);
    Matrix expect = Matrix::Zero(spec.rank(), spec.rank());
    for (int i = 0; i < spec.rank(); ++i) expect(i, i) = spec.twisted_degree(i) + 1;
    sup_dev = std::max(sup_dev, (B - expect).norm());
    trace_integral += rule.weights[k] * B.trace().real();
    if (first && spec.rank() == 2) {
      diag_diff = B(0, 0).real() - B(1, 1).real();
      first = false;
    }
  }

  std::vector<ReportRow> rows;
  rows.push_back(detail::bound_row(spec.n, "bergman_sup_deviation", sup_dev, 1e-9));
  rows.push_back(detail::check_row(spec.n, "bergman_trace_integral", trace_integral,
                                   spec.basis_dimension(), 1e-10));
  if (spec.rank() == 2)
    rows.push_back(detail::check_row(spec.n, "bergman_diag_difference", diag_diff,
                                     spec.degrees[0] - spec.degrees[1], 1e-10));
  return rows;
}

inline std::vector<ReportRow> run_iln_expansion(const ExperimentConfig& ec) {
  const std::vector<int> degrees = ec.degrees.value_or(std::vector<int>{1, -1});
  const std::vector<int> n_list = ec.n_list.value_or(std::vector<int>{8, 16, 32});
  const std::vector<ChartPoint> samples = {ChartPoint(0, 0), ChartPoint(0.3, -0.7),
                                           ChartPoint(1.1, 0.6)};
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<ReportRow> rows;
  std::vector<double> ns, scaled_gaps;
  for (int n : n_list) {
    const BundleSpec spec{degrees, n};
    spec.require_admissible();
    const auto rule = rule_for(spec, ec.quad);
    const MetricField fs(spec, DistortionSpec::identity());
    const GramMetric g = gram(fs, rule);

    double dev0 = 0, dev1 = 0, offd = 0, gap = 0;
    for (const ChartPoint z : samples) {
      const Matrix iln = iln_matrix(g, fs, z);
      dev0 = std::max(dev0, std::abs(iln(0, 0).real() - 1.0 / (spec.twisted_degree(0) + 1)));
      if (spec.rank() == 2) {
        dev1 = std::max(dev1, std::abs(iln(1, 1).real() - 1.0 / (spec.twisted_degree(1) + 1)));
        offd = std::max({offd, std::abs(iln(0, 1)), std::abs(iln(1, 0))});
        gap = iln(1, 1).real() - iln(0, 0).real();
      }
    }
    rows.push_back(detail::bound_row(n, "iln_entry00_deviation", dev0, 1e-10));
    if (spec.rank() == 2) {
      rows.push_back(detail::bound_row(n, "iln_entry11_deviation", dev1, 1e-10));
      rows.push_back(detail::bound_row(n, "iln_offdiag_max", offd, 1e-12));
      rows.push_back({n, "iln_scaled_entry_gap", n * n * gap, 0.0, true});
      ns.push_back(n);
      scaled_gaps.push_back(n * n * gap);
    }
  }
  if (ns.size() >= 2) {
    const double intercept = detail::fit_intercept_inv(ns, scaled_gaps);
    rows.push_back(detail::check_row(0, "iln_gap_extrapolated", intercept,
                                     degrees[0] - degrees[1], 0.2));
  }
  rows.push_back(detail::bound_row(0, "runtime_seconds", detail::seconds_since(t0), 10.0));
  return rows;
}

inline std::vector<ReportRow> run_unstable_example(const ExperimentConfig& ec) {
  const BundleSpec spec{ec.degrees.value_or(std::vector<int>{1, -1}), ec.n.value_or(6)};
  spec.require_admissible();
  if (spec.rank() != 2 || spec.degrees[0] == spec.degrees[1])
    throw invariant_violation("unstable-bundle",
                              "unstable_example needs two distinct summand degrees");
  const auto rule = rule_for(spec, ec.quad);
  const ReferenceMetric k0(spec);

  const std::vector<double> us = {0.0, 0.25, 0.5, 0.75, 1.0};
  std::vector<double> ldets, ms, kns;
  for (double u : us) {
    const MetricField f(spec, DistortionSpec::diagonal_exp(u));
    const GramMetric g = gram(f, rule);
    ldets.push_back(ldet_w(g));
    ms.push_back(donaldson_m(f, k0, spec, rule, 64));
    kns.push_back(kn_functional(g, k0, spec, rule));
  }
  auto fit_slope = [&](const std::vector<double>& ys) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < us.size(); ++i) {
      sx += us[i];
      sy += ys[i];
      sxx += us[i] * us[i];
      sxy += us[i] * ys[i];
    }
    const double m = static_cast<double>(us.size());
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
  };

  std::vector<ReportRow> rows;
  rows.push_back(detail::check_row(spec.n, "slope_ldet", fit_slope(ldets), 2.0, 1e-8));
  rows.push_back(detail::check_row(spec.n, "slope_M", fit_slope(ms), 1.0, 1e-6));
  double second_diff = 0.0;
  for (std::size_t i = 0; i + 2 < kns.size(); ++i)
    second_diff = std::max(second_diff, std::abs(kns[i] - 2 * kns[i + 1] + kns[i + 2]));
  rows.push_back(detail::bound_row(spec.n, "kn_second_difference", second_diff, 1e-8));
  return rows;
}

inline std::vector<ReportRow> run_balanced_run(const ExperimentConfig& ec) {
  const BundleSpec spec{ec.degrees.value_or(std::vector<int>{0, 0}), ec.n.value_or(4)};
  spec.require_admissible();
  const auto rule = rule_for(spec, ec.quad);
  const ReferenceMetric k0(spec);
  const DistortionSpec dist = ec.distortion.value_or(detail::default_mixing_distortion());
  const MetricField start(spec, dist);

  const auto rep = t_iterate(gram(start, rule), spec, k0, rule, ec.max_iter, ec.tol);
  const auto rec = recover_ym(rep.metric(), spec, rule,
                              MetricField(spec, DistortionSpec::identity()));

  std::vector<ReportRow> rows;
  rows.push_back({spec.n, "converged", rep.converged ? 1.0 : 0.0, 1.0, rep.converged});
  rows.push_back(detail::bound_row(spec.n, "residual", rep.residual_history.back(), ec.tol));
  rows.push_back(detail::bound_row(spec.n, "iterations", rep.iterations,
                                   static_cast<double>(ec.max_iter)));
  rows.push_back(detail::bound_row(spec.n, "kn_monotonicity_violations",
                                   rep.kn_monotonicity_violations, 0.0));
  rows.push_back(detail::bound_row(spec.n, "he_defect",
                                   hermite_einstein_defect(rec, spec, rule), 5.0 / spec.n));
  rows.push_back({spec.n, "recovered_scale_c", rec.c, 0.0, true});

  if (ec.point_mass_count) {
    // the finite-point functional over a quasi-uniform lattice against the
    // smooth-measure value at the converged metric
    const auto pm =
        point_masses(fibonacci_sphere_points(*ec.point_mass_count, ec.point_phase));
    const double kn_smooth = rep.kn_history.back();
    const double kn_pm = kn_functional(rep.metric(), k0, spec, pm);
    rows.push_back({spec.n, "kn_continuous", kn_smooth, 0.0, true});
    rows.push_back({spec.n, "kn_point_mass", kn_pm, 0.0, true});
    const bool binding = *ec.point_mass_count >= 200;
    rows.push_back({spec.n, "kn_measure_gap", std::abs(kn_pm - kn_smooth),
                    binding ? 0.05 : 0.0,
                    !binding || std::abs(kn_pm - kn_smooth) <= 0.05});
  }
  return rows;
}

inline std::vector<ReportRow> run_kn_minimize(const ExperimentConfig& ec) {
  const BundleSpec spec{ec.degrees.value_or(std::vector<int>{0, 0}), ec.n.value_or(4)};
  spec.require_admissible();
  const auto rule = rule_for(spec, ec.quad);
  const ReferenceMetric k0(spec);
  const DistortionSpec dist = ec.distortion.value_or(detail::default_mixing_distortion());
  const GramMetric m0 = gram(MetricField(spec, dist), rule);

  const auto fixed_point = t_iterate(m0, spec, k0, rule, ec.max_iter, ec.tol);
  const auto descent = minimize_kn(m0, spec, k0, rule, 2 * ec.max_iter, 1e-7, ec.step0);

  std::vector<ReportRow> rows;
  rows.push_back({spec.n, "kn_fixed_point", fixed_point.kn_history.back(), 0.0,
                  fixed_point.converged});
  rows.push_back({spec.n, "kn_descent", descent.kn_history.back(), 0.0, descent.converged});
  rows.push_back(detail::check_row(spec.n, "kn_cross_difference",
                                   fixed_point.kn_history.back() - descent.kn_history.back(),
                                   0.0, 1e-7));
  return rows;
}

inline std::vector<ReportRow> run_functional_gap(const ExperimentConfig& ec) {
  const std::vector<int> n_list =
      ec.n_list.value_or(std::vector<int>{4, 6, 8, 12, 16, 24});
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<ReportRow> rows;
  std::vector<double> ns, deltas;
  for (int n : n_list) {
    const BundleSpec spec{ec.degrees.value_or(std::vector<int>{0, 0}), n};
    spec.require_admissible();
    const auto rule = rule_for(spec, ec.quad);
    const ReferenceMetric k0(spec);
    const MetricField h(spec, detail::gap_field_h());
    const MetricField k(spec, detail::gap_field_k());
    auto gap = [&](const MetricField& f) {
      return donaldson_m(f, k0, spec, rule, 32) -
             kn_functional(gram(f, rule), k0, spec, rule);
    };
    const double delta = std::abs(gap(h) - gap(k));
    rows.push_back({n, "gap_difference", delta, 0.0, true});
    ns.push_back(n);
    deltas.push_back(delta);
  }
  const double slope = detail::fit_loglog_slope(ns, deltas);
  rows.push_back(detail::bound_row(0, "gap_loglog_slope", slope, -0.7));
  rows.push_back(detail::bound_row(0, "runtime_seconds", detail::seconds_since(t0), 120.0));
  return rows;
}

inline std::vector<ReportRow> run_torsion_decay(const ExperimentConfig& ec) {
  std::vector<ReportRow> rows;

  { // exact cancellation on the split round diagonal path
    const BundleSpec spec{{1, -1}, 6};
    const auto rule = rule_for(spec, ec.quad);
    const ReferenceMetric k0(spec);
    const MetricPath path(MetricField(spec, DistortionSpec::diagonal_exp(0.0)),
                          MetricField(spec, DistortionSpec::diagonal_exp(1.0)));
    rows.push_back(detail::check_row(
        spec.n, "diagonal_path_value", torsion_variation(path, 0.5, k0, spec, rule),
        0.0, 1e-8));
  }

  const std::vector<int> n_list = ec.n_list.value_or(std::vector<int>{4, 8, 16});
  std::vector<double> ns, vals;
  for (int n : n_list) {
    const BundleSpec spec{ec.degrees.value_or(std::vector<int>{0, 0}), n};
    spec.require_admissible();
    const auto rule = rule_for(spec, ec.quad);
    const ReferenceMetric k0(spec);
    const MetricPath path(MetricField(spec, DistortionSpec::identity()),
                          MetricField(spec, ec.distortion.value_or(detail::torsion_endpoint())));
    const double t = std::abs(torsion_variation(path, 0.5, k0, spec, rule));
    rows.push_back({n, "torsion_variation_abs", t, 0.0, true});
    ns.push_back(n);
    vals.push_back(t);
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < vals.size(); ++i) decreasing &= vals[i] < vals[i - 1];
  rows.push_back({0, "strictly_decreasing", decreasing ? 1.0 : 0.0, 1.0, decreasing});
  rows.push_back(detail::bound_row(0, "torsion_loglog_slope",
                                   detail::fit_loglog_slope(ns, vals), -0.7));
  return rows;
}

inline std::vector<ReportRow> run_convergence_study(const ExperimentConfig& ec) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<int> n_list = ec.n_list.value_or(std::vector<int>{4, 8, 16});
  const auto study = convergence_study(
      ec.degrees.value_or(std::vector<int>{0, 0}),
      ec.distortion.value_or(detail::default_mixing_distortion()), n_list, ec.quad,
      ec.max_iter, ec.tol);

  std::vector<ReportRow> rows;
  for (const auto& r : study) {
    rows.push_back({r.n, "converged", r.converged ? 1.0 : 0.0, 1.0, r.converged});
    rows.push_back(detail::bound_row(r.n, "residual", r.residual, ec.tol));
    rows.push_back(detail::bound_row(r.n, "iterations", r.iterations,
                                     static_cast<double>(ec.max_iter)));
    rows.push_back({r.n, "l21_distance", r.distance, 0.0, true});
    rows.push_back(detail::bound_row(r.n, "he_defect", r.he_defect, 5.0 / r.n));
    rows.push_back({r.n, "recovered_scale_c", r.scale_c, 0.0, true});
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < study.size(); ++i)
    decreasing &= study[i].distance < study[i - 1].distance;
  rows.push_back(
      {0, "distance_strictly_decreasing", decreasing ? 1.0 : 0.0, 1.0, decreasing});
  rows.push_back(detail::bound_row(0, "runtime_seconds", detail::seconds_since(t0), 300.0));
  return rows;
}

inline std::vector<ReportRow> run_experiment(const ExperimentConfig& ec) {
  switch (ec.experiment) {
    case Experiment::gram_oracle: return run_gram_oracle(ec);
    case Experiment::bergman: return run_bergman(ec);
    case Experiment::iln_expansion: return run_iln_expansion(ec);
    case Experiment::unstable_example: return run_unstable_example(ec);
    case Experiment::balanced_run: return run_balanced_run(ec);
    case Experiment::kn_minimize: return run_kn_minimize(ec);
    case Experiment::functional_gap: return run_functional_gap(ec);
    case Experiment::torsion_decay: return run_torsion_decay(ec);
    case Experiment::convergence_study: return run_convergence_study(ec);
  }
  throw std::invalid_argument("run_experiment: unknown experiment");
}

/// Runs the experiment named by the config file and writes its report.
/// Exit codes: 0 success, 1 parse error, 2 invariant violation, 3 numeric
/// failure.
inline int run(const std::string& config_path, std::ostream& err = std::cerr) {
  try {
    const Config cfg = Config::parse_file(config_path);
    const ExperimentConfig ec = ExperimentConfig::from(cfg);
    const auto rows = run_experiment(ec);
    emit_report(rows, ec.format, ec.path);
    return 0;
  } catch (const parse_error& e) {
    err << "parse error: " << e.what() << "\n";
    return 1;
  } catch (const invariant_violation& e) {
    err << "invariant violated [" << e.invariant() << "]: " << e.what() << "\n";
    return 2;
  } catch (const unsupported_bundle_error& e) {
    err << "invariant violated [admissible-bundle]: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "invariant violated [admissible-config]: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "numeric failure: " << e.what() << "\n";
    return 3;
  }
}

} // namespace hermein
