#include "randhyp/rkhs.hpp"

#include <map>
#include <mutex>

namespace randhyp {

namespace {

double bump(double r2) { return r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) : 0.0; }

// Golub-Welsch on [-1, 1].
void gauss_legendre(int q, Vector& nodes, Vector& weights) {
  Matrix J = Matrix::Zero(q, q);
  for (int i = 1; i < q; ++i) {
    const double b = i / std::sqrt(4.0 * i * i - 1.0);
    J(i, i - 1) = J(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(J);
  nodes = eig.eigenvalues();
  weights = 2.0 * eig.eigenvectors().row(0).transpose().array().square();
}

// Tensor nodes over [-1, 1]^N with the normalized bump folded into the weights.
struct BumpQuadrature {
  Matrix nodes; // N x Q
  Vector weights;

  BumpQuadrature(int N, int q) {
    if (q < 2 || q > 512) throw QuadratureError("mollifier quadrature: nodes per axis must be in [2, 512]");
    Index total = 1;
    for (int a = 0; a < N; ++a) total *= q;
    if (total > 20'000'000) throw QuadratureError("mollifier quadrature: tensor grid exceeds the evaluation budget");
    Vector x, w;
    gauss_legendre(q, x, w);
    const double C = Mollifier::normalization(N);
    std::vector<Index> keep;
    Matrix all(N, total);
    Vector allw(total);
    for (Index flat = 0; flat < total; ++flat) {
      Index rest = flat;
      double weight = C, r2 = 0;
      for (int a = N - 1; a >= 0; --a) {
        const Index i = rest % q;
        rest /= q;
        all(a, flat) = x[i];
        weight *= w[i];
        r2 += x[i] * x[i];
      }
      allw[flat] = weight * bump(r2);
      if (allw[flat] > 0) keep.push_back(flat);
    }
    nodes.resize(N, static_cast<Index>(keep.size()));
    weights.resize(static_cast<Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j) {
      nodes.col(static_cast<Index>(j)) = all.col(keep[j]);
      weights[static_cast<Index>(j)] = allw[keep[j]];
    }
  }

  // Integral of phi(eta) cos(t <eta, x>).
  double transform(double t, const Eigen::Ref<const Vector>& x) const {
    const Vector phase = t * (nodes.topRows(x.size()).transpose() * x);
    return weights.dot(phase.array().cos().matrix());
  }
};

double monomial(const MultiIndex& k, const Eigen::Ref<const Vector>& x) {
  double v = 1;
  for (int i = 0; i < k.variables(); ++i) v *= std::pow(x[i], k.exponents[static_cast<std::size_t>(i)]);
  return v;
}

void check_point(const MultiIndex& k, const Mollifier& phi, Index dim) {
  if (k.variables() != dim) throw ConfigError("mollifier_approximant: multi-index and point dimensions differ");
  if (dim > phi.freq_dim()) throw ConfigError("mollifier_approximant: point dimension exceeds frequency dimension");
}

std::vector<Vector> ball_points(const GridSpec& grid) {
  std::vector<Vector> out;
  const double limit = grid.radius * (1.0 + 1e-12);
  for (Index i = 0; i < grid.size(); ++i) {
    Vector p = grid.point(i);
    if ((p - grid.center).norm() <= limit) out.push_back(std::move(p));
  }
  return out;
}

} // namespace

Mollifier::Mollifier(int freq_dim, double t) : freq_dim_(freq_dim), t_(t) {
  if (freq_dim < 1) throw ConfigError("Mollifier: dimension must be >= 1");
  if (!(t > 0.0 && t <= 1.0)) throw ConfigError("Mollifier: scale must lie in (0, 1]");
}

double Mollifier::normalization(int freq_dim) {
  static std::mutex mutex;
  static std::map<int, double> cache;
  std::lock_guard lock(mutex);
  if (auto it = cache.find(freq_dim); it != cache.end()) return it->second;
  QuadratureBudget budget;
  const double radial = integrate_adaptive(
      [freq_dim](double r) { return std::pow(r, freq_dim - 1) * bump(r * r); }, 0.0, 1.0, 1e-15, budget);
  const double C = 1.0 / (unit_sphere_area(freq_dim - 1) * radial);
  cache.emplace(freq_dim, C);
  return C;
}

double Mollifier::operator()(const Eigen::Ref<const Vector>& xi) const {
  if (xi.size() != freq_dim_) throw ConfigError("Mollifier: argument dimension mismatch");
  return normalization(freq_dim_) * bump((xi / t_).squaredNorm()) / std::pow(t_, freq_dim_);
}

double mollifier_approximant(const MultiIndex& k, const Mollifier& phi, const Eigen::Ref<const Vector>& x, int nodes) {
  check_point(k, phi, x.size());
  const BumpQuadrature quad(phi.freq_dim(), nodes);
  return monomial(k, x) * quad.transform(phi.scale(), x);
}

double mollifier_sup_error(const MultiIndex& k, const Mollifier& phi, const GridSpec& grid, int nodes) {
  grid.validate();
  check_point(k, phi, grid.dim());
  const BumpQuadrature quad(phi.freq_dim(), nodes);
  double worst = 0;
  for (const auto& p : ball_points(grid)) {
    const double target = monomial(k, p);
    worst = std::max(worst, std::abs(target * quad.transform(phi.scale(), p) - target));
  }
  return worst;
}

double evaluate_span(const Matrix& centers, const LimitKernelSpec& spec, const Vector& coefficients,
                     const Eigen::Ref<const Vector>& x) {
  double v = 0;
  for (Index j = 0; j < centers.cols(); ++j) v += coefficients[j] * limit_kernel(spec, x, centers.col(j));
  return v;
}

SpanFit fit_in_span(const Target& target, const Matrix& centers, const LimitKernelSpec& spec, double ridge,
                    const GridSpec& grid) {
  spec.validate();
  grid.validate();
  if (!(ridge >= 0.0)) throw ConfigError("fit_in_span: ridge must be >= 0");
  if (centers.rows() != spec.eval_dim || grid.dim() != spec.eval_dim)
    throw ConfigError("fit_in_span: centers, grid and kernel dimensions differ");
  if (centers.cols() == 0) throw ConfigError("fit_in_span: no centers");
  for (Index i = 0; i < centers.cols(); ++i)
    for (Index j = 0; j < i; ++j)
      if (centers.col(i) == centers.col(j)) throw ConfigError("fit_in_span: centers must be distinct");

  using Wide = long double;
  using WideMatrix = Eigen::Matrix<Wide, Eigen::Dynamic, Eigen::Dynamic>;
  using WideVector = Eigen::Matrix<Wide, Eigen::Dynamic, 1>;
  const Matrix cT = centers.transpose();
  auto design = [&](const std::vector<Vector>& pts, WideMatrix& A, WideVector& b) {
    const Index P = static_cast<Index>(pts.size()), M = centers.cols();
    A.resize(P, M);
    b.resize(P);
    for (Index i = 0; i < P; ++i) {
      const Vector& p = pts[static_cast<std::size_t>(i)];
      b[i] = target(p);
      for (Index j = 0; j < M; ++j) {
        Wide d2 = 0;
        for (Index a = 0; a < p.size(); ++a) {
          const Wide d = Wide(p[a]) - Wide(cT(j, a));
          d2 += d * d;
        }
        A(i, j) = limit_kernel_radial<Wide>(spec.freq_dim, std::sqrt(d2));
      }
    }
  };

  WideMatrix A;
  WideVector b;
  design(ball_points(grid), A, b);
  const Index P = A.rows(), M = A.cols();

  // Ridge ladder: climb only when a solve produces non-finite coefficients.
  const double scale = static_cast<double>(A.squaredNorm()) / static_cast<double>(M);
  std::vector<double> ladder{ridge};
  for (double rel : {1e-14, 1e-12, 1e-10, 1e-8, 1e-6})
    if (rel * scale > ridge) ladder.push_back(rel * scale);

  SpanFit fit;
  WideVector w;
  bool solved = false;
  for (double lambda : ladder) {
    if (lambda == 0.0) {
      w = Eigen::BDCSVD<WideMatrix>(A, Eigen::ComputeThinU | Eigen::ComputeThinV).solve(b);
    } else {
      WideMatrix aug(P + M, M);
      aug << A, std::sqrt(Wide(lambda)) * WideMatrix::Identity(M, M);
      WideVector rhs = WideVector::Zero(P + M);
      rhs.head(P) = b;
      w = aug.colPivHouseholderQr().solve(rhs);
    }
    if (w.allFinite()) {
      fit.ridge = lambda;
      solved = true;
      break;
    }
  }
  if (!solved) throw ConditioningError("fit_in_span: no rung of the ridge ladder gave a finite solution");

  fit.coefficients = w.cast<double>();
  fit.fit_points = P;
  fit.fit_residual = static_cast<double>((A * w - b).cwiseAbs().maxCoeff());

  GridSpec audit = grid;
  audit.resolution = 2 * grid.resolution - 1;
  WideMatrix Aa;
  WideVector ba;
  design(ball_points(audit), Aa, ba);
  fit.audit_points = Aa.rows();
  fit.sup_residual = static_cast<double>((Aa * w - ba).cwiseAbs().maxCoeff());
  return fit;
}

Matrix gridded_centers(int dim, double half_width, int count) {
  if (dim < 1 || count < 1) throw ConfigError("gridded_centers: dimension and count must be >= 1");
  Index total = 1;
  for (int a = 0; a < dim; ++a) total *= count;
  Matrix out(dim, total);
  for (Index flat = 0; flat < total; ++flat) {
    Index rest = flat;
    for (int a = dim - 1; a >= 0; --a) {
      const Index i = rest % count;
      rest /= count;
      out(a, flat) = count == 1 ? 0.0 : -half_width + 2.0 * half_width * static_cast<double>(i) / (count - 1);
    }
  }
  return out;
}

} // namespace randhyp
