#pragma once

#include "randhyp/core.hpp"
#include "randhyp/rng.hpp"

#include <compare>
#include <memory>
#include <span>
#include <vector>

namespace randhyp {

/// Exponent vector of a monomial x_0^a_0 ... x_N^a_N.
struct MultiIndex {
  std::vector<int> exponents;

  int degree() const;
  int variables() const { return static_cast<int>(exponents.size()); }
  auto operator<=>(const MultiIndex&) const = default;
};

/// Degree-m homogeneous polynomials in N+1 variables, restricted to the
/// equatorial S^n of S^N, taken r at a time.
struct EnsembleSpec {
  int ambient_dim = 1; // N
  int degree = 1;      // m
  int codim = 1;       // r
  int variety_dim = 1; // n

  static EnsembleSpec full(int ambient_dim, int degree) { return {ambient_dim, degree, 1, ambient_dim}; }

  /// Throws ConfigError unless 1 <= r <= n <= N and m >= 1.
  void validate() const;
  /// d_m = C(N+m, m).
  Index dimension() const;
  bool operator==(const EnsembleSpec&) const = default;
};

/// All degree-m multi-indices in N+1 variables, sorted lexicographically.
std::vector<MultiIndex> monomial_indices(const EnsembleSpec& spec);

/// Integral of x^alpha over the round S^N, where N + 1 = alpha.size().
/// Odd exponents integrate to zero; otherwise
///   2 * prod Gamma(b_i + 1/2) / Gamma(|b| + (N+1)/2),  alpha = 2b.
template <class Scalar = double>
Scalar sphere_moment(std::span<const int> alpha) {
  using std::exp;
  using std::lgamma;
  Scalar log_numerator = 0;
  Scalar half_total = 0;
  for (int a : alpha) {
    if (a < 0) throw ConfigError("sphere_moment: negative exponent");
    if (a % 2 != 0) return Scalar(0);
    const Scalar b = Scalar(a / 2) + Scalar(0.5);
    log_numerator += lgamma(b);
    half_total += b;
  }
  return Scalar(2) * exp(log_numerator - lgamma(half_total));
}

template <class Scalar = double>
Scalar sphere_moment(const MultiIndex& alpha) {
  return sphere_moment<Scalar>(std::span<const int>(alpha.exponents));
}

/// L2(S^N) inner products of all monomial pairs, in monomial_indices order.
template <class Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> gram_matrix(const EnsembleSpec& spec) {
  spec.validate();
  const auto indices = monomial_indices(spec);
  const Index d = static_cast<Index>(indices.size());
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> gram(d, d);
  std::vector<int> sum(spec.ambient_dim + 1);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j <= i; ++j) {
      for (std::size_t k = 0; k < sum.size(); ++k)
        sum[k] = indices[i].exponents[k] + indices[j].exponents[k];
      gram(i, j) = gram(j, i) = sphere_moment<Scalar>(std::span<const int>(sum));
    }
  }
  return gram;
}

/// Maps standard-Gaussian coordinates to monomial coefficients; its columns
/// are an L2-orthonormal basis written in monomial coordinates.
template <class Scalar = double>
struct WhiteningFactor {
  using MatrixType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  EnsembleSpec spec;
  MatrixType transform;
  /// Largest over smallest pivot of the Jacobi-scaled Cholesky factor.
  Scalar pivot_ratio = 1;
  /// max |T^T G T - I|.
  Scalar residual = 0;
};

/// Largest tolerated pivot ratio before the basis is declared unusable.
inline constexpr double kMaxPivotRatio = 1e12;
/// Largest tolerated orthonormality residual of a whitening transform.
inline constexpr double kMaxWhiteningResidual = 1e-8;

/// Cholesky whitening of a symmetric positive-definite Gram matrix. The
/// matrix is first scaled to unit diagonal; T = D^-1 L^-T so that
/// T^T G T = I. Throws ConditioningError if a pivot is not positive, the
/// pivot ratio exceeds kMaxPivotRatio, or the residual exceeds
/// kMaxWhiteningResidual.
template <class Scalar = double>
WhiteningFactor<Scalar> whitening(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& gram) {
  using MatrixType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using VectorType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (gram.rows() != gram.cols() || gram.rows() == 0) throw ConfigError("whitening: Gram matrix must be square and non-empty");
  const VectorType diag = gram.diagonal();
  if ((diag.array() <= Scalar(0)).any()) throw ConditioningError("whitening: Gram matrix has a non-positive diagonal entry");
  const VectorType inv_scale = diag.array().sqrt().inverse();
  const MatrixType scaled = inv_scale.asDiagonal() * gram * inv_scale.asDiagonal();

  Eigen::LLT<MatrixType> llt(scaled);
  if (llt.info() != Eigen::Success) throw ConditioningError("whitening: Gram matrix is not positive definite");
  const MatrixType lower = llt.matrixL();
  const VectorType pivots = lower.diagonal().array().square();
  if (pivots.minCoeff() <= Scalar(0)) throw ConditioningError("whitening: zero pivot in Cholesky factor");

  WhiteningFactor<Scalar> out;
  out.pivot_ratio = pivots.maxCoeff() / pivots.minCoeff();
  if (out.pivot_ratio > Scalar(kMaxPivotRatio)) throw ConditioningError("whitening: pivot ratio exceeds 1e12");

  MatrixType inv_lower_t = MatrixType::Identity(gram.rows(), gram.cols());
  lower.transpose().template triangularView<Eigen::Upper>().solveInPlace(inv_lower_t);
  out.transform = inv_scale.asDiagonal() * inv_lower_t;
  out.residual = (out.transform.transpose() * gram * out.transform - MatrixType::Identity(gram.rows(), gram.cols()))
                     .cwiseAbs()
                     .maxCoeff();
  if (!(out.residual <= Scalar(kMaxWhiteningResidual)))
    throw ConditioningError("whitening: orthonormality residual exceeds 1e-8; degree too high for the monomial basis");
  return out;
}

/// Builds the Gram matrix of `spec` and whitens it.
WhiteningFactor<double> whitening(const EnsembleSpec& spec);

/// Values of every monomial of `spec` at x, in monomial_indices order.
Vector monomial_values(const EnsembleSpec& spec, const Eigen::Ref<const Vector>& x);

/// A homogeneous polynomial written in the lexicographic monomial basis.
struct HomogeneousPolynomial {
  EnsembleSpec spec;
  Vector coeffs;

  double evaluate(const Eigen::Ref<const Vector>& x) const;
  double operator()(const Eigen::Ref<const Vector>& x) const { return evaluate(x); }
};

/// An L2(S^N)-orthonormal basis of the degree-m homogeneous polynomials,
/// evaluated on the sphere.
class OrthonormalBasis {
public:
  virtual ~OrthonormalBasis() = default;

  virtual const EnsembleSpec& spec() const = 0;
  virtual Index size() const = 0;
  /// Writes the values of every basis function at the unit vector x.
  virtual void evaluate(const Eigen::Ref<const Vector>& x, Eigen::Ref<Vector> out) const = 0;

  Vector evaluate(const Eigen::Ref<const Vector>& x) const;
  /// Basis values at each column of `points`; result is points.cols() x size().
  Matrix evaluate_many(const Eigen::Ref<const Matrix>& points) const;
};

/// Orthonormal basis obtained by whitening the monomial Gram matrix. Works in
/// any dimension but only for moderate degree.
class WhitenedMonomialBasis final : public OrthonormalBasis {
public:
  explicit WhitenedMonomialBasis(WhiteningFactor<double> factor);

  const EnsembleSpec& spec() const override { return factor_.spec; }
  Index size() const override { return factor_.transform.cols(); }
  void evaluate(const Eigen::Ref<const Vector>& x, Eigen::Ref<Vector> out) const override;
  using OrthonormalBasis::evaluate;

  const WhiteningFactor<double>& factor() const { return factor_; }

private:
  WhiteningFactor<double> factor_;
};

/// Real spherical-harmonic basis (N = 1: Fourier modes; N = 2: Legendre
/// recurrences) of the degrees k <= m with k = m mod 2, each lifted to degree
/// m by powers of |x|^2. Stable for large m.
class HarmonicBasis final : public OrthonormalBasis {
public:
  explicit HarmonicBasis(const EnsembleSpec& spec);

  const EnsembleSpec& spec() const override { return spec_; }
  Index size() const override { return size_; }
  void evaluate(const Eigen::Ref<const Vector>& x, Eigen::Ref<Vector> out) const override;
  using OrthonormalBasis::evaluate;

private:
  EnsembleSpec spec_;
  Index size_;
  // Legendre recurrence coefficients, indexed [order][degree].
  std::vector<std::vector<double>> a_;
  std::vector<std::vector<double>> b_;
  std::vector<double> diagonal_;
};

enum class BasisKind { automatic, monomial, harmonic };

/// automatic picks the harmonic basis for N <= 2 and the whitened monomial
/// basis otherwise.
std::shared_ptr<const OrthonormalBasis> make_basis(const EnsembleSpec& spec, BasisKind kind = BasisKind::automatic);

/// A draw P = sum_i a_i P_i with coordinates in an orthonormal basis.
struct RandomPolynomial {
  std::shared_ptr<const OrthonormalBasis> basis;
  Vector coords;

  double evaluate(const Eigen::Ref<const Vector>& x) const;
  double operator()(const Eigen::Ref<const Vector>& x) const { return evaluate(x); }
  /// Values at each column of `points`.
  Vector evaluate_many(const Eigen::Ref<const Matrix>& points) const;
};

/// r independent draws with unit-variance coordinates, returned in monomial
/// coefficients (coeffs = T a).
std::vector<HomogeneousPolynomial> sample_polynomial_tuple(const WhiteningFactor<double>& factor, int r,
                                                           RandomStream& rng);

/// r independent draws in an arbitrary orthonormal basis.
std::vector<RandomPolynomial> sample_polynomial_tuple(std::shared_ptr<const OrthonormalBasis> basis, int r,
                                                      RandomStream& rng);

/// E[P(x) P(y)] = sum_i P_i(x) P_i(y) over the orthonormal basis.
double covariance_exact(const OrthonormalBasis& basis, const Eigen::Ref<const Vector>& x,
                        const Eigen::Ref<const Vector>& y);

/// Same quantity from the whitening factor: v(x)^T T T^T v(y).
double covariance_exact(const WhiteningFactor<double>& factor, const Eigen::Ref<const Vector>& x,
                        const Eigen::Ref<const Vector>& y);

/// Closed zonal form of the covariance:
///   sum_{k <= m, k = m mod 2} dim H_k / |S^N| * G_k(<x, y>)
/// with G_k the Gegenbauer polynomial of index (N-1)/2 normalized to
/// G_k(1) = 1.
double zonal_covariance(const EnsembleSpec& spec, double inner_product);

/// Gegenbauer polynomial of index (N-1)/2 normalized at 1, i.e. the zonal
/// spherical harmonic of degree k on S^N divided by its value at the pole.
double normalized_gegenbauer(int N, int k, double t);

/// Dimension of the degree-k spherical harmonics on S^N.
Index harmonic_dimension(int N, int k);

} // namespace randhyp
