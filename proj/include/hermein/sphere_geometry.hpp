#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "hermein/errors.hpp"

namespace hermein {

/// Affine-chart coordinate on the sphere. The point at infinity is never a
/// quadrature node; integrands stay bounded there through the weight
/// conventions, so one chart suffices.
using ChartPoint = std::complex<double>;

enum class RuleKind { continuous, point_mass };

/// A unit-mass measure on the sphere: either the smooth round volume form
/// sampled by a product quadrature, or a finite set of equal point masses.
struct QuadratureRule {
  std::vector<ChartPoint> nodes;
  std::vector<double> weights;
  RuleKind kind = RuleKind::continuous;
  /// Largest monomial bidegree max(j,k) the rule integrates exactly
  /// (continuous rules only).
  int exactness = 0;

  std::size_t size() const { return nodes.size(); }
};

namespace detail {

/// Gauss-Legendre nodes/weights on [0,1], weights summing to 1.
inline void gauss_legendre_unit(int n, std::vector<double>& x,
                                std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const int m = (n + 1) / 2;
  for (int i = 1; i <= m; ++i) {
    double z = std::cos(std::numbers::pi * (i - 0.25) / (n + 0.5));
    double z1, pp;
    do {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      z1 = z;
      z = z1 - p1 / pp;
    } while (std::abs(z - z1) > 1e-15);
    x[i - 1] = (1.0 - z) / 2.0;
    x[n - i] = (1.0 + z) / 2.0;
    w[i - 1] = 1.0 / ((1.0 - z * z) * pp * pp);
    w[n - i] = w[i - 1];
  }
}

} // namespace detail

/// Product rule for the round unit-mass volume form. Under t = |z|^2/(1+|z|^2)
/// the integral becomes dt x dtheta/(2pi) on [0,1] x [0,2pi); Gauss-Legendre
/// handles t, a uniform grid handles theta. Weights sum to 1 by construction.
inline QuadratureRule build_quadrature(int radial_nodes, int angular_nodes) {
  if (radial_nodes < 2 || angular_nodes < 2)
    throw std::invalid_argument("build_quadrature: node counts must be >= 2");

  std::vector<double> t, wt;
  detail::gauss_legendre_unit(radial_nodes, t, wt);

  QuadratureRule rule;
  rule.kind = RuleKind::continuous;
  rule.exactness = std::min(radial_nodes - 1, (angular_nodes - 1) / 2);
  rule.nodes.reserve(static_cast<std::size_t>(radial_nodes) * angular_nodes);
  rule.weights.reserve(rule.nodes.capacity());
  for (int i = 0; i < radial_nodes; ++i) {
    const double rho = std::sqrt(t[i] / (1.0 - t[i]));
    const double w = wt[i] / angular_nodes;
    for (int j = 0; j < angular_nodes; ++j) {
      const double theta = 2.0 * std::numbers::pi * j / angular_nodes;
      rule.nodes.emplace_back(rho * std::cos(theta), rho * std::sin(theta));
      rule.weights.push_back(w);
    }
  }
  return rule;
}

/// Equal point masses at the given chart points (the discrete measures used
/// by the finite-point functional).
inline QuadratureRule point_masses(const std::vector<ChartPoint>& points) {
  if (points.empty())
    throw std::invalid_argument("point_masses: empty point list");
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j)
      if (points[i] == points[j])
        throw std::invalid_argument("point_masses: duplicate points");

  QuadratureRule rule;
  rule.kind = RuleKind::point_mass;
  rule.nodes = points;
  rule.weights.assign(points.size(), 1.0 / points.size());
  return rule;
}

/// Quasi-uniform N-point set on the sphere (golden-angle spiral in the
/// (t, theta) square), mapped to the chart. Deterministic; the optional phase
/// in [0,1) rotates the spiral, giving seeded variants of the same lattice.
inline std::vector<ChartPoint> fibonacci_sphere_points(int count, double phase = 0.0) {
  if (count < 1)
    throw std::invalid_argument("fibonacci_sphere_points: count must be >= 1");
  const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
  std::vector<ChartPoint> pts;
  pts.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double t = (i + 0.5) / count;
    const double frac = std::fmod(golden * i + phase, 1.0);
    const double theta = 2.0 * std::numbers::pi * frac;
    const double rho = std::sqrt(t / (1.0 - t));
    pts.emplace_back(rho * std::cos(theta), rho * std::sin(theta));
  }
  return pts;
}

/// Weighted sum of per-node samples against the rule.
inline std::complex<double> integrate(const std::vector<std::complex<double>>& samples,
                                      const QuadratureRule& rule) {
  if (samples.size() != rule.size())
    throw std::invalid_argument("integrate: sample count does not match rule");
  std::complex<double> acc = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i)
    acc += rule.weights[i] * samples[i];
  return acc;
}

/// Round weight (1+|z|^2)^{-k} of the degree-k line bundle; its expansion at
/// the origin is 1 - z zbar + ...
inline double fs_weight(int k, ChartPoint z) {
  return std::pow(1.0 + std::norm(z), -k);
}

/// Local area density of the unit-mass round form: the measure is
/// dA / (pi (1+|z|^2)^2), so integrals against area pick up this inverse.
inline double chart_area_factor(ChartPoint z) {
  const double s = 1.0 + std::norm(z);
  return std::numbers::pi * s * s;
}

} // namespace hermein
