#include <catch2/catch_amalgamated.hpp>

#include <numbers>

#include "hermein/sphere_geometry.hpp"

using namespace hermein;
using Catch::Matchers::WithinAbs;

namespace {

// Independent oracle for the radial moments: with t = |z|^2/(1+|z|^2) the
// integral int |z|^{2j} (1+|z|^2)^{-m-2} dA/pi becomes the Beta value
// int t^j (1-t)^{m-j} dt = j! (m-j)! / (m+1)!.
double beta_moment(int j, int m) {
  double v = 1.0;
  for (int i = 1; i <= j; ++i) v *= i;
  for (int i = 1; i <= m - j; ++i) v *= i;
  for (int i = 1; i <= m + 1; ++i) v /= i;
  return v;
}

std::vector<std::complex<double>> sample(const QuadratureRule& rule,
                                         auto&& fn) {
  std::vector<std::complex<double>> out;
  out.reserve(rule.size());
  for (const auto& z : rule.nodes) out.push_back(fn(z));
  return out;
}

} // namespace

TEST_CASE("build_quadrature rejects degenerate node counts", "[sphere]") {
  CHECK_THROWS_AS(build_quadrature(1, 16), std::invalid_argument);
  CHECK_THROWS_AS(build_quadrature(16, 1), std::invalid_argument);
}

TEST_CASE("quadrature weights are positive with unit total mass", "[sphere]") {
  for (auto [r, a] : {std::pair{2, 2}, {8, 4}, {32, 16}, {25, 49}}) {
    const auto rule = build_quadrature(r, a);
    REQUIRE(rule.size() == static_cast<std::size_t>(r * a));
    double total = 0.0;
    for (double w : rule.weights) {
      CHECK(w > 0.0);
      total += w;
    }
    CHECK_THAT(total, WithinAbs(1.0, 1e-14));
    CHECK(rule.exactness >= std::min(r - 1, (a - 1) / 2));
  }
}

TEST_CASE("integrate matches hand values", "[sphere]") {
  const auto rule = build_quadrature(32, 16);

  auto ones = sample(rule, [](ChartPoint) { return 1.0; });
  CHECK_THAT(integrate(ones, rule).real(), WithinAbs(1.0, 1e-14));

  auto zs = sample(rule, [](ChartPoint z) { return z; });
  CHECK_THAT(std::abs(integrate(zs, rule)), WithinAbs(0.0, 1e-13));

  // |z|^2 (1+|z|^2)^{-1} = t integrates to int_0^1 t dt = 1/2.
  auto mom = sample(rule, [](ChartPoint z) {
    return std::norm(z) / (1.0 + std::norm(z));
  });
  CHECK_THAT(integrate(mom, rule).real(), WithinAbs(0.5, 1e-12));

  // |z|^2 (1+|z|^2)^{-2} = t(1-t) integrates to 1/6.
  auto mom2 = sample(rule, [](ChartPoint z) {
    double s = 1.0 + std::norm(z);
    return std::norm(z) / (s * s);
  });
  CHECK_THAT(integrate(mom2, rule).real(), WithinAbs(1.0 / 6.0, 1e-12));

  // pi (1+|z|^2)^{-2} integrates to pi int_0^1 (1-t)^2 dt = pi/3.
  auto f = sample(rule, [](ChartPoint z) {
    double s = 1.0 + std::norm(z);
    return std::numbers::pi / (s * s);
  });
  CHECK_THAT(integrate(f, rule).real(), WithinAbs(std::numbers::pi / 3.0, 1e-12));

  CHECK_THROWS_AS(integrate({1.0, 2.0}, rule), std::invalid_argument);
}

TEST_CASE("monomial moments match the Beta oracle", "[sphere]") {
  const auto rule = build_quadrature(12, 25);
  const int cap = rule.exactness;
  for (int m = 0; m <= cap; ++m)
    for (int j = 0; j <= m; ++j) {
      auto vals = sample(rule, [&](ChartPoint z) {
        const double s = 1.0 + std::norm(z);
        return std::pow(std::norm(z), j) * std::pow(s, -m - 2) *
               chart_area_factor(z) / std::numbers::pi;
      });
      CHECK_THAT(integrate(vals, rule).real(),
                 WithinAbs(beta_moment(j, m), 1e-12));
    }
}

TEST_CASE("angular orthogonality kills mixed monomials", "[sphere]") {
  const auto rule = build_quadrature(12, 25);
  const int cap = rule.exactness;
  for (int j = 0; j <= cap; ++j)
    for (int k = 0; k <= cap; ++k) {
      if (j == k) continue;
      auto vals = sample(rule, [&](ChartPoint z) {
        const double s = 1.0 + std::norm(z);
        return std::pow(z, j) * std::pow(std::conj(z), k) *
               std::pow(s, -(j + k) / 2.0 - 2.0);
      });
      CHECK_THAT(std::abs(integrate(vals, rule)), WithinAbs(0.0, 1e-13));
    }
}

TEST_CASE("point masses are uniform and validated", "[sphere]") {
  const auto single = point_masses({ChartPoint(0, 0)});
  REQUIRE(single.weights == std::vector<double>{1.0});
  CHECK(single.kind == RuleKind::point_mass);

  const auto three =
      point_masses({ChartPoint(0, 0), ChartPoint(1, 0), ChartPoint(0, 1)});
  for (double w : three.weights) CHECK_THAT(w, WithinAbs(1.0 / 3.0, 1e-15));

  CHECK_THROWS_AS(point_masses({}), std::invalid_argument);
  CHECK_THROWS_AS(point_masses({ChartPoint(0, 0), ChartPoint(0, 0)}),
                  std::invalid_argument);
}

TEST_CASE("fs_weight values and expansion at the origin", "[sphere]") {
  CHECK(fs_weight(0, ChartPoint(0.7, -2.0)) == 1.0);
  CHECK(fs_weight(1, ChartPoint(0, 0)) == 1.0);
  CHECK_THAT(fs_weight(3, ChartPoint(1, 0)), WithinAbs(0.125, 1e-15));
  // Second-order term of (1+|z|^2)^{-1} at 0 is -|z|^2.
  for (double eps : {1e-2, 5e-3, 2e-3}) {
    const ChartPoint z(eps, eps / 2);
    const double diff = fs_weight(1, z) - (1.0 - std::norm(z));
    CHECK(std::abs(diff) <= 2.0 * std::norm(z) * std::norm(z));
  }
}

TEST_CASE("fibonacci points are distinct and usable as point masses", "[sphere]") {
  const auto pts = fibonacci_sphere_points(200);
  REQUIRE(pts.size() == 200);
  CHECK_NOTHROW(point_masses(pts));
}
