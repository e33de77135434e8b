#include "randhyp/ensemble.hpp"

#include <algorithm>
#include <complex>

namespace randhyp {

int MultiIndex::degree() const {
  int total = 0;
  for (int e : exponents) total += e;
  return total;
}

void EnsembleSpec::validate() const {
  if (ambient_dim < 1) throw ConfigError("ensemble: ambient dimension N must be >= 1");
  if (degree < 1) throw ConfigError("ensemble: degree m must be >= 1");
  if (variety_dim < 1 || variety_dim > ambient_dim) throw ConfigError("ensemble: variety dimension n must lie in [1, N]");
  if (codim < 1 || codim > variety_dim) throw ConfigError("ensemble: codimension r must lie in [1, n]");
}

Index EnsembleSpec::dimension() const { return binomial(ambient_dim + degree, degree); }

namespace {

void compositions(int remaining, int slot, std::vector<int>& current, std::vector<MultiIndex>& out) {
  const int slots = static_cast<int>(current.size());
  if (slot == slots - 1) {
    current[slot] = remaining;
    out.push_back({current});
    return;
  }
  for (int e = 0; e <= remaining; ++e) {
    current[slot] = e;
    compositions(remaining - e, slot + 1, current, out);
  }
}

} // namespace

std::vector<MultiIndex> monomial_indices(const EnsembleSpec& spec) {
  spec.validate();
  std::vector<MultiIndex> out;
  out.reserve(static_cast<std::size_t>(spec.dimension()));
  std::vector<int> current(spec.ambient_dim + 1, 0);
  compositions(spec.degree, 0, current, out);
  std::sort(out.begin(), out.end());
  return out;
}

WhiteningFactor<double> whitening(const EnsembleSpec& spec) {
  auto factor = whitening<double>(gram_matrix<double>(spec));
  factor.spec = spec;
  return factor;
}

Vector monomial_values(const EnsembleSpec& spec, const Eigen::Ref<const Vector>& x) {
  const int vars = spec.ambient_dim + 1;
  if (x.size() != vars) throw ConfigError("monomial_values: point has the wrong dimension");
  const int m = spec.degree;
  Matrix powers(vars, m + 1);
  for (int i = 0; i < vars; ++i) {
    powers(i, 0) = 1.0;
    for (int e = 1; e <= m; ++e) powers(i, e) = powers(i, e - 1) * x[i];
  }
  thread_local EnsembleSpec cached_spec{0, 0, 0, 0};
  thread_local std::vector<MultiIndex> indices;
  if (!(cached_spec == spec)) {
    indices = monomial_indices(spec);
    cached_spec = spec;
  }
  Vector out(static_cast<Index>(indices.size()));
  for (std::size_t j = 0; j < indices.size(); ++j) {
    double v = 1.0;
    for (int i = 0; i < vars; ++i) v *= powers(i, indices[j].exponents[i]);
    out[static_cast<Index>(j)] = v;
  }
  return out;
}

double HomogeneousPolynomial::evaluate(const Eigen::Ref<const Vector>& x) const {
  return monomial_values(spec, x).dot(coeffs);
}

Vector OrthonormalBasis::evaluate(const Eigen::Ref<const Vector>& x) const {
  Vector out(size());
  evaluate(x, out);
  return out;
}

Matrix OrthonormalBasis::evaluate_many(const Eigen::Ref<const Matrix>& points) const {
  Matrix out(points.cols(), size());
  Vector scratch(size());
  for (Index j = 0; j < points.cols(); ++j) {
    evaluate(points.col(j), scratch);
    out.row(j) = scratch.transpose();
  }
  return out;
}

WhitenedMonomialBasis::WhitenedMonomialBasis(WhiteningFactor<double> factor) : factor_(std::move(factor)) {}

void WhitenedMonomialBasis::evaluate(const Eigen::Ref<const Vector>& x, Eigen::Ref<Vector> out) const {
  out.noalias() = factor_.transform.transpose() * monomial_values(factor_.spec, x);
}

Index harmonic_dimension(int N, int k) {
  if (k < 0) return 0;
  return binomial(N + k, N) - (k >= 2 ? binomial(N + k - 2, N) : 0);
}

HarmonicBasis::HarmonicBasis(const EnsembleSpec& spec) : spec_(spec), size_(spec.dimension()) {
  spec_.validate();
  if (spec_.ambient_dim > 2) throw ConfigError("HarmonicBasis: only N = 1 and N = 2 are supported");
  if (spec_.ambient_dim == 2) {
    const int m = spec_.degree;
    a_.assign(m + 1, std::vector<double>(m + 1, 0.0));
    b_.assign(m + 1, std::vector<double>(m + 1, 0.0));
    diagonal_.assign(m + 1, 0.0);
    diagonal_[0] = std::sqrt(1.0 / (4.0 * std::numbers::pi));
    for (int order = 1; order <= m; ++order)
      diagonal_[order] = diagonal_[order - 1] * std::sqrt((2.0 * order + 1.0) / (2.0 * order));
    for (int order = 0; order <= m; ++order) {
      for (int l = order + 2; l <= m; ++l) {
        const double ll = l, mm = order;
        a_[order][l] = std::sqrt((4.0 * ll * ll - 1.0) / (ll * ll - mm * mm));
        b_[order][l] = std::sqrt(((ll - 1.0) * (ll - 1.0) - mm * mm) / (4.0 * (ll - 1.0) * (ll - 1.0) - 1.0));
      }
    }
  }
}

void HarmonicBasis::evaluate(const Eigen::Ref<const Vector>& x, Eigen::Ref<Vector> out) const {
  const int m = spec_.degree;
  const int parity = m % 2;
  if (spec_.ambient_dim == 1) {
    const std::complex<double> z(x[0], x[1]);
    std::complex<double> power(1.0, 0.0);
    const double c0 = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    const double ck = 1.0 / std::sqrt(std::numbers::pi);
    Index slot = 0;
    for (int k = 0; k <= m; ++k) {
      if (k > 0) power *= z;
      if (k % 2 != parity) continue;
      if (k == 0) {
        out[slot++] = c0;
      } else {
        out[slot++] = ck * power.real();
        out[slot++] = ck * power.imag();
      }
    }
    return;
  }

  // Polar axis x0; azimuth from (x1, x2). q_l^k = pbar_l^k / sin(theta)^k keeps
  // the evaluation polynomial, so the poles need no special case.
  const double t = x[0];
  const std::complex<double> z(x[1], x[2]);
  std::complex<double> power(1.0, 0.0);
  auto base = [parity](int l) {
    // Number of basis functions with degree below l and matching parity.
    Index count = 0;
    for (int k = parity; k < l; k += 2) count += 2 * k + 1;
    return count;
  };
  std::vector<Index> bases(m + 1, 0);
  for (int l = parity; l <= m; l += 2) bases[l] = base(l);

  const double sqrt2 = std::sqrt(2.0);
  for (int order = 0; order <= m; ++order) {
    if (order > 0) power *= z;
    double q_prev2 = 0.0;
    double q_prev = diagonal_[order];
    auto emit = [&](int l, double q) {
      if (l % 2 != parity) return;
      const Index b = bases[l];
      if (order == 0) {
        out[b] = q;
      } else {
        out[b + 2 * order - 1] = sqrt2 * q * power.real();
        out[b + 2 * order] = sqrt2 * q * power.imag();
      }
    };
    emit(order, q_prev);
    if (order + 1 <= m) {
      const double q = std::sqrt(2.0 * order + 3.0) * t * q_prev;
      q_prev2 = q_prev;
      q_prev = q;
      emit(order + 1, q);
    }
    for (int l = order + 2; l <= m; ++l) {
      const double q = a_[order][l] * (t * q_prev - b_[order][l] * q_prev2);
      q_prev2 = q_prev;
      q_prev = q;
      emit(l, q);
    }
  }
}

std::shared_ptr<const OrthonormalBasis> make_basis(const EnsembleSpec& spec, BasisKind kind) {
  spec.validate();
  if (kind == BasisKind::automatic) kind = spec.ambient_dim <= 2 ? BasisKind::harmonic : BasisKind::monomial;
  if (kind == BasisKind::harmonic) return std::make_shared<HarmonicBasis>(spec);
  return std::make_shared<WhitenedMonomialBasis>(whitening(spec));
}

double RandomPolynomial::evaluate(const Eigen::Ref<const Vector>& x) const {
  return basis->evaluate(x).dot(coords);
}

Vector RandomPolynomial::evaluate_many(const Eigen::Ref<const Matrix>& points) const {
  Vector out(points.cols());
  Vector scratch(basis->size());
  for (Index j = 0; j < points.cols(); ++j) {
    basis->evaluate(points.col(j), scratch);
    out[j] = scratch.dot(coords);
  }
  return out;
}

std::vector<HomogeneousPolynomial> sample_polynomial_tuple(const WhiteningFactor<double>& factor, int r,
                                                           RandomStream& rng) {
  if (r < 1) throw ConfigError("sample_polynomial_tuple: r must be >= 1");
  std::vector<HomogeneousPolynomial> out;
  out.reserve(r);
  for (int i = 0; i < r; ++i) {
    const Vector a = rng.normal_vector(factor.transform.cols());
    out.push_back({factor.spec, factor.transform * a});
  }
  return out;
}

std::vector<RandomPolynomial> sample_polynomial_tuple(std::shared_ptr<const OrthonormalBasis> basis, int r,
                                                      RandomStream& rng) {
  if (r < 1) throw ConfigError("sample_polynomial_tuple: r must be >= 1");
  std::vector<RandomPolynomial> out;
  out.reserve(r);
  for (int i = 0; i < r; ++i) out.push_back({basis, rng.normal_vector(basis->size())});
  return out;
}

double covariance_exact(const OrthonormalBasis& basis, const Eigen::Ref<const Vector>& x,
                        const Eigen::Ref<const Vector>& y) {
  return basis.evaluate(x).dot(basis.evaluate(y));
}

double covariance_exact(const WhiteningFactor<double>& factor, const Eigen::Ref<const Vector>& x,
                        const Eigen::Ref<const Vector>& y) {
  const Vector px = factor.transform.transpose() * monomial_values(factor.spec, x);
  const Vector py = factor.transform.transpose() * monomial_values(factor.spec, y);
  return px.dot(py);
}

double normalized_gegenbauer(int N, int k, double t) {
  const double lambda = 0.5 * (N - 1);
  if (k == 0) return 1.0;
  double prev = 1.0, cur = t;
  for (int j = 1; j < k; ++j) {
    const double next = (2.0 * (j + lambda) * t * cur - j * prev) / (j + 2.0 * lambda);
    prev = cur;
    cur = next;
  }
  return cur;
}

double zonal_covariance(const EnsembleSpec& spec, double inner_product) {
  spec.validate();
  const int N = spec.ambient_dim;
  const double lambda = 0.5 * (N - 1);
  const double t = std::clamp(inner_product, -1.0, 1.0);
  double sum = 0.0;
  double prev = 1.0, cur = t;
  for (int k = 0; k <= spec.degree; ++k) {
    const double g = k == 0 ? 1.0 : cur;
    if (k % 2 == spec.degree % 2) sum += static_cast<double>(harmonic_dimension(N, k)) * g;
    if (k >= 1) {
      const double next = (2.0 * (k + lambda) * t * cur - k * prev) / (k + 2.0 * lambda);
      prev = cur;
      cur = next;
    }
  }
  return sum / unit_sphere_area(N);
}

} // namespace randhyp
