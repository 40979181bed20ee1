#include <catch2/catch_amalgamated.hpp>

#include "hermein/split_bundles.hpp"

using namespace hermein;
using Catch::Matchers::WithinAbs;

namespace {

// Analytic curvature of the round weight on a degree-k summand.
double fs_curvature(int k, ChartPoint z) {
  const double s = 1.0 + std::norm(z);
  return k / (s * s);
}

} // namespace

TEST_CASE("basis_dimension counts sections per summand", "[bundles]") {
  CHECK(basis_dimension({{1, -1}, 5}) == 12);
  CHECK(basis_dimension({{0}, 0}) == 1);
  CHECK(basis_dimension({{2}, 3}) == 6);
  CHECK_THROWS_AS(basis_dimension({{1, -1}, 0}), unsupported_bundle_error);
  CHECK_THROWS_AS(basis_dimension({{}, 4}), unsupported_bundle_error);
}

TEST_CASE("spec dimension equals Euler characteristic", "[bundles]") {
  for (const BundleSpec spec :
       {BundleSpec{{0, 0}, 3}, {{1, -1}, 4}, {{2, 0}, 1}, {{3}, 2}})
    CHECK(spec.basis_dimension() == spec.chi());
}

TEST_CASE("evaluation_map lays out monomials summand-major", "[bundles]") {
  const auto a = evaluation_map({{2}, 0}, ChartPoint(0, 0));
  REQUIRE(a.matrix.rows() == 1);
  REQUIRE(a.matrix.cols() == 3);
  CHECK(a.matrix(0, 0) == Complex(1, 0));
  CHECK(a.matrix(0, 1) == Complex(0, 0));
  CHECK(a.matrix(0, 2) == Complex(0, 0));

  const auto b = evaluation_map({{2}, 0}, ChartPoint(2, 0));
  CHECK(b.matrix(0, 1) == Complex(2, 0));
  CHECK(b.matrix(0, 2) == Complex(4, 0));

  const auto c = evaluation_map({{0, 0}, 1}, ChartPoint(0, 1));
  REQUIRE(c.matrix.rows() == 2);
  REQUIRE(c.matrix.cols() == 4);
  CHECK(c.matrix(0, 0) == Complex(1, 0));
  CHECK(c.matrix(0, 1) == Complex(0, 1));
  CHECK(c.matrix(0, 2) == Complex(0, 0));
  CHECK(c.matrix(0, 3) == Complex(0, 0));
  CHECK(c.matrix(1, 0) == Complex(0, 0));
  CHECK(c.matrix(1, 1) == Complex(0, 0));
  CHECK(c.matrix(1, 2) == Complex(1, 0));
  CHECK(c.matrix(1, 3) == Complex(0, 1));
}

TEST_CASE("metric_eval returns the expected round values", "[bundles]") {
  const MetricField id({{1, -1}, 1}, DistortionSpec::identity());
  CHECK((id(ChartPoint(0, 0)) - Matrix::Identity(2, 2)).norm() < 1e-15);
  const Matrix at1 = id(ChartPoint(1, 0));
  CHECK_THAT(at1(0, 0).real(), WithinAbs(0.25, 1e-15));
  CHECK_THAT(at1(1, 1).real(), WithinAbs(1.0, 1e-15));
  CHECK(std::abs(at1(0, 1)) < 1e-16);

  const MetricField de({{0, 0}, 0}, DistortionSpec::diagonal_exp(0.3));
  const Matrix v = de(ChartPoint(0, 0));
  CHECK_THAT(v(0, 0).real(), WithinAbs(std::exp(0.3), 1e-14));
  CHECK_THAT(v(1, 1).real(), WithinAbs(std::exp(-0.3), 1e-14));
}

TEST_CASE("metric values stay Hermitian positive-definite", "[bundles]") {
  const BundleSpec spec{{1, -1}, 4};
  const MetricField field(spec, make_seeded_distortion(2, 2, 0.4, 11));
  for (const ChartPoint z :
       {ChartPoint(0, 0), ChartPoint(0.3, -1.2), ChartPoint(4.0, 2.5)}) {
    const Matrix H = field(z);
    CHECK((H - H.adjoint()).norm() < 1e-14 * (1.0 + H.norm()));
    Eigen::SelfAdjointEigenSolver<Matrix> es(H);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("round frame expansion at the origin", "[bundles]") {
  // H(z) = I - diag(d_i + n)|z|^2 + O(|z|^4) for the identity distortion.
  const BundleSpec spec{{1, -1}, 3};
  const MetricField field(spec, DistortionSpec::identity());
  for (double eps : {1e-2, 5e-3}) {
    const ChartPoint z(eps, -eps);
    Matrix expect = Matrix::Identity(2, 2);
    expect(0, 0) -= 4.0 * std::norm(z);
    expect(1, 1) -= 2.0 * std::norm(z);
    CHECK((field(z) - expect).norm() < 40.0 * std::norm(z) * std::norm(z));
  }
}

TEST_CASE("curvature matches the analytic round oracle", "[bundles]") {
  const MetricField cubic({{3}, 0}, DistortionSpec::identity());
  CHECK_THAT(curvature(cubic, ChartPoint(0, 0), 1e-3)(0, 0).real(),
             WithinAbs(3.0, 1e-6));

  const MetricField split({{1, -1}, 4}, DistortionSpec::identity());
  const Matrix F0 = curvature(split, ChartPoint(0, 0), 1e-3);
  CHECK_THAT(F0(0, 0).real(), WithinAbs(5.0, 1e-6));
  CHECK_THAT(F0(1, 1).real(), WithinAbs(3.0, 1e-6));
  CHECK(std::abs(F0(0, 1)) < 1e-8);

  const MetricField flat({{0}, 0}, DistortionSpec::identity());
  for (const ChartPoint z : {ChartPoint(0, 0), ChartPoint(1.5, -0.5)})
    CHECK(std::abs(curvature(flat, z, 1e-3)(0, 0)) < 1e-8);

  // Off-origin agreement for a few points and degrees.
  for (int k : {1, 4}) {
    const MetricField f({{k}, 0}, DistortionSpec::identity());
    for (const ChartPoint z : {ChartPoint(0.7, 0.1), ChartPoint(-2.0, 3.0)})
      CHECK_THAT(curvature(f, z, 1e-3)(0, 0).real(),
                 WithinAbs(fs_curvature(k, z), 1e-6));
  }
}

TEST_CASE("H F stays Hermitian for every distortion variant", "[bundles]") {
  const BundleSpec spec{{0, 0}, 2};
  const std::vector<DistortionSpec> variants = {
      DistortionSpec::identity(), DistortionSpec::diagonal_exp(0.7),
      make_seeded_distortion(2, 2, 0.5, 3)};
  for (const auto& d : variants) {
    const MetricField field(spec, d);
    for (const ChartPoint z : {ChartPoint(0.2, 0.4), ChartPoint(-1.0, 2.0)}) {
      const Matrix HF = field(z) * curvature(field, z, 1e-3);
      CHECK((HF - HF.adjoint()).norm() < 1e-5 * (1.0 + HF.norm()));
    }
  }
}

TEST_CASE("diagonal_exp curvature is parameter-independent", "[bundles]") {
  const BundleSpec spec{{1, -1}, 2};
  const MetricField a(spec, DistortionSpec::diagonal_exp(0.2));
  const MetricField b(spec, DistortionSpec::diagonal_exp(1.1));
  for (const ChartPoint z : {ChartPoint(0, 0), ChartPoint(0.9, -0.3)})
    CHECK((curvature(a, z, 1e-3) - curvature(b, z, 1e-3)).norm() < 1e-7);
}

TEST_CASE("degree_from_curvature recovers the topological degree", "[bundles]") {
  const auto rule = build_quadrature(24, 48);

  const MetricField split({{1, -1}, 4}, DistortionSpec::identity());
  CHECK_THAT(degree_from_curvature(split, rule), WithinAbs(8.0, 1e-6));

  const MetricField flat({{0}, 0}, DistortionSpec::identity());
  CHECK_THAT(degree_from_curvature(flat, rule), WithinAbs(0.0, 1e-9));

  const MetricField distorted({{1, -1}, 4}, make_seeded_distortion(2, 2, 0.4, 21));
  CHECK_THAT(degree_from_curvature(distorted, rule), WithinAbs(8.0, 1e-4));

  CHECK_THROWS_AS(
      degree_from_curvature(flat, point_masses({ChartPoint(0, 0)})),
      std::invalid_argument);
}

TEST_CASE("Riemann-Roch consistency for distorted fields", "[bundles]") {
  const auto rule = build_quadrature(32, 64);
  int seed = 100;
  for (const BundleSpec spec :
       {BundleSpec{{0, 0}, 4}, {{1, -1}, 4}, {{2, 0}, 4}}) {
    const MetricField field(spec, make_seeded_distortion(2, 2, 0.3, ++seed));
    const double lhs = degree_from_curvature(field, rule) + spec.rank();
    CHECK_THAT(lhs, WithinAbs(spec.basis_dimension(), 1e-5));
  }
}

TEST_CASE("distortion construction is validated", "[bundles]") {
  CHECK_THROWS_AS(MetricField({{0}, 1}, DistortionSpec::diagonal_exp(0.1)),
                  std::invalid_argument);
  std::vector<Matrix> bad(4, Matrix::Zero(2, 2));
  bad[1] = Matrix::Identity(2, 2);  // S_01 without matching S_10
  CHECK_THROWS_AS(DistortionSpec::log_polynomial(1, bad), std::invalid_argument);
}

TEST_CASE("metric evaluation flags non-finite values", "[bundles]") {
  const MetricField blowup({{0, 0}, 1}, make_seeded_distortion(2, 1, 1e6, 9));
  CHECK_THROWS_AS(blowup(ChartPoint(0.5, 0.5)), numeric_domain_error);
}

TEST_CASE("seeded distortions are reproducible and Hermitian", "[bundles]") {
  const auto a = make_seeded_distortion(2, 2, 0.4, 42);
  const auto b = make_seeded_distortion(2, 2, 0.4, 42);
  for (std::size_t i = 0; i < a.coefficients.size(); ++i)
    CHECK((a.coefficients[i] - b.coefficients[i]).norm() == 0.0);

  const auto tf = make_seeded_distortion(2, 2, 0.4, 7, /*trace_free=*/true);
  const MetricField field({{0, 0}, 3}, tf);
  const Matrix H = field(ChartPoint(0.4, -0.9));
  // trace-free log-distortion leaves det H equal to the round determinant
  const double round_det =
      fs_weight(3, ChartPoint(0.4, -0.9)) * fs_weight(3, ChartPoint(0.4, -0.9));
  CHECK_THAT(H.determinant().real(), WithinAbs(round_det, 1e-12));
}
