#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "hermein/errors.hpp"
#include "hermein/sphere_geometry.hpp"

namespace hermein {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Complex = std::complex<double>;

/// Split bundle O(d_1) (+ O(d_2)) twisted by n. Rank is 1 or 2.
struct BundleSpec {
  std::vector<int> degrees;
  int n = 0;

  int rank() const { return static_cast<int>(degrees.size()); }

  int twisted_degree(int i) const { return degrees[static_cast<std::size_t>(i)] + n; }

  int degree() const {
    int d = 0;
    for (int di : degrees) d += di + n;
    return d;
  }

  double mu() const { return static_cast<double>(degree()) / rank(); }

  bool admissible() const {
    if (degrees.empty() || degrees.size() > 2) return false;
    for (int i = 0; i < rank(); ++i)
      if (twisted_degree(i) < 0) return false;
    return true;
  }

  void require_admissible() const {
    if (degrees.empty() || degrees.size() > 2)
      throw unsupported_bundle_error("bundle rank must be 1 or 2");
    for (int i = 0; i < rank(); ++i)
      if (twisted_degree(i) < 0)
        throw unsupported_bundle_error(
            "summand has negative twisted degree (not generated by sections)");
  }

  /// Section-space dimension: each degree-m summand contributes m+1.
  int basis_dimension() const {
    require_admissible();
    int p = 0;
    for (int i = 0; i < rank(); ++i) p += twisted_degree(i) + 1;
    return p;
  }

  /// Euler characteristic deg + r(1-g) at genus 0; equals basis_dimension
  /// whenever the spec is admissible.
  int chi() const { return degree() + rank(); }

  int max_twisted_degree() const {
    int m = 0;
    for (int i = 0; i < rank(); ++i) m = std::max(m, twisted_degree(i));
    return m;
  }

  bool operator==(const BundleSpec&) const = default;
};

inline int basis_dimension(const BundleSpec& spec) { return spec.basis_dimension(); }

enum class DistortionKind { identity, diagonal_exp, log_polynomial };

/// Bounded Hermitian log-distortion S(z) applied on top of the round weights.
/// log_polynomial uses S(z) = sum_{k,l<=D} S_kl z^k zbar^l (1+|z|^2)^{-max(k,l)}
/// with S_lk = S_kl^dagger, so each monomial stays bounded on the whole chart.
struct DistortionSpec {
  DistortionKind kind = DistortionKind::identity;
  double u = 0.0;                 // diagonal_exp parameter
  int degree_bound = 0;           // log_polynomial degree bound D
  std::vector<Matrix> coefficients; // row-major (D+1)x(D+1) blocks S_kl

  static DistortionSpec identity() { return {}; }

  static DistortionSpec diagonal_exp(double u) {
    DistortionSpec d;
    d.kind = DistortionKind::diagonal_exp;
    d.u = u;
    return d;
  }

  static DistortionSpec log_polynomial(int degree_bound,
                                       std::vector<Matrix> coefficients) {
    DistortionSpec d;
    d.kind = DistortionKind::log_polynomial;
    d.degree_bound = degree_bound;
    d.coefficients = std::move(coefficients);
    const std::size_t side = static_cast<std::size_t>(degree_bound) + 1;
    if (d.coefficients.size() != side * side)
      throw std::invalid_argument("log_polynomial: need (D+1)^2 coefficient blocks");
    for (std::size_t k = 0; k < side; ++k)
      for (std::size_t l = 0; l < side; ++l) {
        const Matrix& Skl = d.coefficients[k * side + l];
        const Matrix& Slk = d.coefficients[l * side + k];
        if ((Slk - Skl.adjoint()).norm() > 1e-12 * (1.0 + Skl.norm()))
          throw std::invalid_argument(
              "log_polynomial: coefficient tensor is not Hermitian-symmetric");
      }
    return d;
  }

  const Matrix& coefficient(int k, int l) const {
    const std::size_t side = static_cast<std::size_t>(degree_bound) + 1;
    return coefficients[static_cast<std::size_t>(k) * side + static_cast<std::size_t>(l)];
  }
};

/// Deterministic distortion with coefficient entries uniform in
/// [-amplitude, amplitude]; bit-reproducible across platforms. Only monomials
/// with k = l (mod 2) are populated: those are polynomial in the compact
/// radial coordinate t = |z|^2/(1+|z|^2), so the product quadrature keeps its
/// design accuracy on every field the generator produces. trace_free makes
/// S(z) pointwise trace-free.
inline DistortionSpec make_seeded_distortion(int rank, int degree_bound,
                                             double amplitude, std::uint64_t seed,
                                             bool trace_free = false) {
  std::mt19937_64 rng(seed);
  auto unit = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  auto draw = [&]() { return amplitude * (2.0 * unit() - 1.0); };

  const int side = degree_bound + 1;
  std::vector<Matrix> coeffs(static_cast<std::size_t>(side) * side,
                             Matrix::Zero(rank, rank));
  for (int k = 0; k < side; ++k)
    for (int l = k; l < side; ++l) {
      if ((k + l) % 2 != 0) continue;
      Matrix S(rank, rank);
      for (int a = 0; a < rank; ++a)
        for (int b = 0; b < rank; ++b) S(a, b) = Complex(draw(), draw());
      if (k == l) S = ((S + S.adjoint()) / 2.0).eval();
      if (trace_free) {
        Complex t = S.trace() / static_cast<double>(rank);
        S -= t * Matrix::Identity(rank, rank);
      }
      coeffs[static_cast<std::size_t>(k) * side + l] = S;
      if (l != k) coeffs[static_cast<std::size_t>(l) * side + k] = S.adjoint();
    }
  return DistortionSpec::log_polynomial(degree_bound, std::move(coeffs));
}

namespace detail {

/// exp of a Hermitian matrix; closed form for rank <= 2.
inline Matrix exp_hermitian(const Matrix& S) {
  const auto r = S.rows();
  if (r == 1) return (Matrix(1, 1) << std::exp(S(0, 0).real())).finished();
  if (r == 2) {
    const double m = (S(0, 0).real() + S(1, 1).real()) / 2.0;
    Matrix P = S - m * Matrix::Identity(2, 2);
    const double lam = std::sqrt(std::max(0.0, P(0, 0).real() * P(0, 0).real() +
                                                   std::norm(P(0, 1))));
    double ch, shl; // cosh(lam), sinh(lam)/lam
    if (lam < 1e-8) {
      ch = 1.0 + lam * lam / 2.0;
      shl = 1.0 + lam * lam / 6.0;
    } else {
      ch = std::cosh(lam);
      shl = std::sinh(lam) / lam;
    }
    return std::exp(m) * (ch * Matrix::Identity(2, 2) + shl * P);
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(S);
  return es.eigenvectors() *
         es.eigenvalues().array().exp().matrix().asDiagonal() *
         es.eigenvectors().adjoint();
}

} // namespace detail

/// Hermitian metric on the twisted bundle: round weights conjugated with a
/// bounded distortion, H(z) = W^{1/2} exp(S(z)) W^{1/2} with
/// W = diag (1+|z|^2)^{-(d_i+n)}. An optional overall scale and a pointwise
/// unit-determinant normalization cover scaled fields and the reference
/// metric.
class MetricField {
public:
  MetricField(BundleSpec spec, DistortionSpec distortion, double scale = 1.0,
              bool unit_determinant = false)
      : spec_(std::move(spec)), distortion_(std::move(distortion)), scale_(scale),
        unit_determinant_(unit_determinant) {
    spec_.require_admissible();
    if (scale_ <= 0.0)
      throw std::invalid_argument("MetricField: scale must be positive");
    if (distortion_.kind == DistortionKind::diagonal_exp && spec_.rank() != 2)
      throw std::invalid_argument("diagonal_exp distortion needs rank 2");
  }

  const BundleSpec& spec() const { return spec_; }
  const DistortionSpec& distortion() const { return distortion_; }
  double scale() const { return scale_; }

  MetricField scaled(double factor) const {
    MetricField f = *this;
    if (factor <= 0.0)
      throw std::invalid_argument("MetricField::scaled: factor must be positive");
    f.scale_ *= factor;
    return f;
  }

  Matrix operator()(ChartPoint z) const {
    const int r = spec_.rank();
    Matrix S = log_distortion(z);
    Matrix E = detail::exp_hermitian(S);
    Matrix H(r, r);
    for (int i = 0; i < r; ++i) {
      const double wi = std::sqrt(fs_weight(spec_.twisted_degree(i), z));
      for (int j = 0; j < r; ++j) {
        const double wj = std::sqrt(fs_weight(spec_.twisted_degree(j), z));
        H(i, j) = scale_ * wi * E(i, j) * wj;
      }
    }
    if (unit_determinant_) {
      const double det = H.determinant().real();
      if (!(det > 0.0) || !std::isfinite(det))
        throw numeric_domain_error("MetricField: non-positive determinant");
      H *= std::pow(det, -1.0 / r);
    }
    if (!H.allFinite())
      throw numeric_domain_error("MetricField: non-finite metric value");
    return H;
  }

private:
  Matrix log_distortion(ChartPoint z) const {
    const int r = spec_.rank();
    switch (distortion_.kind) {
      case DistortionKind::identity:
        return Matrix::Zero(r, r);
      case DistortionKind::diagonal_exp: {
        Matrix S = Matrix::Zero(2, 2);
        S(0, 0) = distortion_.u;
        S(1, 1) = -distortion_.u;
        return S;
      }
      case DistortionKind::log_polynomial: {
        Matrix S = Matrix::Zero(r, r);
        const int D = distortion_.degree_bound;
        const double s = 1.0 + std::norm(z);
        for (int k = 0; k <= D; ++k)
          for (int l = 0; l <= D; ++l) {
            const Complex mono = std::pow(z, k) * std::pow(std::conj(z), l) *
                                 std::pow(s, -std::max(k, l));
            S += mono * distortion_.coefficient(k, l);
          }
        return ((S + S.adjoint()) / 2.0).eval();
      }
    }
    return Matrix::Zero(r, r);
  }

  BundleSpec spec_;
  DistortionSpec distortion_;
  double scale_;
  bool unit_determinant_;
};

inline Matrix metric_eval(const MetricField& field, ChartPoint z) {
  return field(z);
}

/// Values of the monomial section basis at z, one row per summand, columns
/// summand-major with ascending power. Cross-summand entries vanish.
struct EvaluationMap {
  Matrix matrix; // r x p
  ChartPoint z;
};

inline EvaluationMap evaluation_map(const BundleSpec& spec, ChartPoint z) {
  spec.require_admissible();
  const int r = spec.rank();
  const int p = spec.basis_dimension();
  Matrix A = Matrix::Zero(r, p);
  int col = 0;
  for (int i = 0; i < r; ++i) {
    Complex zp = 1.0;
    for (int j = 0; j <= spec.twisted_degree(i); ++j) {
      A(i, col++) = zp;
      zp *= z;
    }
  }
  return {std::move(A), z};
}

/// Curvature coefficient F(z) of the Chern connection for an arbitrary metric
/// closure, F = -dzbar(H^{-1} dz H), by 4th-order central differences with
/// chart-adaptive spacing step*sqrt(1+|z|^2). The round weights vary on the
/// relative scale |z|, so the sqrt scaling keeps the truncation error uniform
/// across the chart. Sign convention: the round weight on a degree-k bundle
/// gives F = k (1+|z|^2)^{-2}.
template <typename Field>
Matrix curvature_of(const Field& H, ChartPoint z, double step = 1e-3) {
  if (!(step > 0.0)) throw std::invalid_argument("curvature: step must be positive");
  const double s = step * std::sqrt(1.0 + std::norm(z));
  const Complex dx(s, 0.0), dy(0.0, s);

  const Matrix H0 = H(z);
  const Matrix Hxp = H(z + dx), Hxm = H(z - dx), Hxp2 = H(z + 2.0 * dx),
               Hxm2 = H(z - 2.0 * dx);
  const Matrix Hyp = H(z + dy), Hym = H(z - dy), Hyp2 = H(z + 2.0 * dy),
               Hym2 = H(z - 2.0 * dy);

  const Matrix Dx = (-Hxp2 + 8.0 * Hxp - 8.0 * Hxm + Hxm2) / (12.0 * s);
  const Matrix Dy = (-Hyp2 + 8.0 * Hyp - 8.0 * Hym + Hym2) / (12.0 * s);
  const Matrix Dxx =
      (-Hxp2 + 16.0 * Hxp - 30.0 * H0 + 16.0 * Hxm - Hxm2) / (12.0 * s * s);
  const Matrix Dyy =
      (-Hyp2 + 16.0 * Hyp - 30.0 * H0 + 16.0 * Hym - Hym2) / (12.0 * s * s);

  const Matrix Dz = (Dx - Complex(0, 1) * Dy) / 2.0;
  const Matrix Dzbar = Dz.adjoint(); // conjugate derivative of a Hermitian field
  const Matrix mixed = (Dxx + Dyy) / 4.0;  // dzbar dz H

  Eigen::PartialPivLU<Matrix> lu(H0);
  return lu.solve(Dzbar * lu.solve(Dz).eval() - mixed);
}

inline Matrix curvature(const MetricField& field, ChartPoint z, double step = 1e-3) {
  return curvature_of(field, z, step);
}

struct QuadratureParams {
  int radial = 0;  // 0 means pick from the twisted degree
  int angular = 0;
};

/// Continuous rule sized for the spec: enough radial nodes for the section
/// monomials plus margin for smooth distortion factors.
inline QuadratureRule rule_for(const BundleSpec& spec,
                               const QuadratureParams& params = {}) {
  const int d = spec.max_twisted_degree();
  const int radial = params.radial > 0 ? params.radial : d + 17;
  const int angular = params.angular > 0 ? params.angular : 2 * d + 33;
  return build_quadrature(radial, angular);
}

/// Chern integral (1/pi) int tr F dA; equals deg(E_n) for every admissible
/// field, distorted or not.
inline double degree_from_curvature(const MetricField& field,
                                    const QuadratureRule& rule,
                                    double step = 1e-3) {
  if (rule.kind != RuleKind::continuous)
    throw std::invalid_argument("degree_from_curvature: continuous rule required");
  double acc = 0.0;
  for (std::size_t k = 0; k < rule.size(); ++k) {
    const ChartPoint z = rule.nodes[k];
    const Matrix F = curvature(field, z, step);
    acc += rule.weights[k] * F.trace().real() * chart_area_factor(z) /
           std::numbers::pi;
  }
  return acc;
}

} // namespace hermein
