#include "randhyp/kernel.hpp"

#include <functional>
#include <numbers>

namespace randhyp {

void LimitKernelSpec::validate() const {
  if (freq_dim < 1) throw ConfigError("limit kernel: freq_dim must be >= 1");
  if (eval_dim < 1 || eval_dim > freq_dim) throw ConfigError("limit kernel: eval_dim must lie in [1, freq_dim]");
}

namespace {

// Integral of cos(phase + sum_{i<axes} w_i xi_i) over the ball of radius rho
// in R^axes. xi_(axes-1) = rho sin(theta) removes the square-root endpoints.
double ball_cosine(const Vector& w, int axes, double rho, double phase, double tol, QuadratureBudget& budget) {
  if (axes == 0) {
    --budget.remaining;
    return std::cos(phase);
  }
  const double wk = w[axes - 1];
  auto inner = [&](double theta) {
    const double c = std::cos(theta);
    return rho * c * ball_cosine(w, axes - 1, rho * c, phase + wk * rho * std::sin(theta), 0.25 * tol, budget);
  };
  return integrate_adaptive(inner, -0.5 * std::numbers::pi, 0.5 * std::numbers::pi, tol, budget);
}

} // namespace

double limit_kernel_quadrature(const LimitKernelSpec& spec, const Eigen::Ref<const Vector>& u,
                               const Eigen::Ref<const Vector>& v, double tol, std::int64_t evaluation_budget) {
  spec.validate();
  if (!(tol > 0.0)) throw ConfigError("limit_kernel_quadrature: tol must be positive");
  if (u.size() != spec.eval_dim || v.size() != spec.eval_dim)
    throw ConfigError("limit_kernel_quadrature: argument dimension does not match eval_dim");
  Vector w = Vector::Zero(spec.freq_dim);
  w.head(spec.eval_dim) = u - v;
  QuadratureBudget budget{evaluation_budget};
  return ball_cosine(w, spec.freq_dim, 1.0, 0.0, tol, budget);
}

ChartAtPoint::ChartAtPoint(const Eigen::Ref<const Vector>& base_point, int variety_dim)
  : base_(base_point), variety_dim_(variety_dim) {
  const int N = static_cast<int>(base_.size()) - 1;
  if (N < 1) throw ConfigError("ChartAtPoint: base point must live in R^(N+1), N >= 1");
  if (variety_dim < 1 || variety_dim > N) throw ConfigError("ChartAtPoint: variety_dim must lie in [1, N]");
  if (std::abs(base_.norm() - 1.0) > 1e-12) throw ConfigError("ChartAtPoint: base point must be a unit vector");
  if (base_.tail(N - variety_dim).norm() > 1e-12)
    throw ConfigError("ChartAtPoint: base point must lie on the equatorial S^n");

  // Gram-Schmidt of e_0..e_n against x gives T_x S^n; e_(n+1)..e_N are
  // already orthogonal to it and to x.
  frame_ = Matrix::Zero(N + 1, N);
  int filled = 0;
  for (int i = 0; i <= variety_dim && filled < variety_dim; ++i) {
    Vector e = Vector::Unit(N + 1, i);
    e -= e.dot(base_) * base_;
    for (int j = 0; j < filled; ++j) e -= e.dot(frame_.col(j)) * frame_.col(j);
    const double norm = e.norm();
    if (norm < 1e-8) continue;
    frame_.col(filled++) = e / norm;
  }
  if (filled != variety_dim) throw ConfigError("ChartAtPoint: failed to build a tangent frame");
  for (int i = variety_dim + 1; i <= N; ++i) frame_.col(filled++) = Vector::Unit(N + 1, i);
}

ChartAtPoint ChartAtPoint::north_pole(int ambient_dim, int variety_dim) {
  return ChartAtPoint(Vector::Unit(ambient_dim + 1, 0), variety_dim);
}

Vector ChartAtPoint::exp(const Eigen::Ref<const Vector>& u) const {
  if (u.size() > frame_.cols()) throw ConfigError("ChartAtPoint::exp: too many tangent coordinates");
  const Vector w = frame_.leftCols(u.size()) * u;
  const double theta = w.norm();
  if (theta == 0.0) return base_;
  Vector out = std::cos(theta) * base_ + (std::sin(theta) / theta) * w;
  return out / out.norm();
}

double rescaled_kernel(const OrthonormalBasis& basis, const ChartAtPoint& chart, double scale_exponent,
                       const Eigen::Ref<const Vector>& u, const Eigen::Ref<const Vector>& v) {
  const double m = basis.spec().degree;
  if (u.norm() / m >= std::numbers::pi || v.norm() / m >= std::numbers::pi)
    throw ConfigError("rescaled_kernel: point outside the chart radius");
  const Vector x = chart.exp(u / m);
  const Vector y = chart.exp(v / m);
  return std::pow(m, -scale_exponent) * covariance_exact(basis, x, y);
}

KernelCalibration calibrate_kernel(int ambient_dim, int variety_dim, const std::vector<int>& degrees) {
  if (degrees.size() < 2) throw ConfigError("calibrate_kernel: need at least two degrees");
  KernelCalibration cal;
  cal.ambient_dim = ambient_dim;
  cal.variety_dim = variety_dim;
  cal.degrees = degrees;
  const auto chart = ChartAtPoint::north_pole(ambient_dim, variety_dim);
  const Index k = static_cast<Index>(degrees.size());
  Vector log_m(k), log_d(k);
  for (Index i = 0; i < k; ++i) {
    const auto basis = make_basis({ambient_dim, degrees[i], 1, variety_dim});
    const double d = covariance_exact(*basis, chart.base(), chart.base());
    cal.diagonal.push_back(d);
    log_m[i] = std::log(static_cast<double>(degrees[i]));
    log_d[i] = std::log(d);
  }
  const double mean_x = log_m.mean(), mean_y = log_d.mean();
  cal.raw_exponent = ((log_m.array() - mean_x) * (log_d.array() - mean_y)).sum() /
                     (log_m.array() - mean_x).square().sum();
  cal.scale_exponent = std::round(cal.raw_exponent);

  // ratio(m) = c + a / m by least squares.
  const double k0 = limit_kernel_radial(ambient_dim, 0.0);
  Matrix design(k, 2);
  Vector ratio(k);
  for (Index i = 0; i < k; ++i) {
    const double m = degrees[i];
    design(i, 0) = 1.0;
    design(i, 1) = 1.0 / m;
    ratio[i] = cal.diagonal[i] * std::pow(m, -cal.scale_exponent) / k0;
  }
  const Vector fit = design.colPivHouseholderQr().solve(ratio);
  cal.constant = fit[0];
  cal.constant_slope = fit[1];
  return cal;
}

Matrix kernel_grid(int variety_dim, double radius, int per_axis) {
  if (per_axis < 1) throw ConfigError("kernel_grid: per_axis must be >= 1");
  std::vector<Vector> pts;
  Index total = 1;
  for (int a = 0; a < variety_dim; ++a) total *= per_axis;
  for (Index flat = 0; flat < total; ++flat) {
    Vector p(variety_dim);
    Index rest = flat;
    for (int a = variety_dim - 1; a >= 0; --a) {
      const Index i = rest % per_axis;
      rest /= per_axis;
      p[a] = per_axis == 1 ? 0.0 : -radius + 2.0 * radius * static_cast<double>(i) / (per_axis - 1);
    }
    if (p.norm() <= radius * (1.0 + 1e-12)) pts.push_back(p);
  }
  Matrix out(variety_dim, static_cast<Index>(pts.size()));
  for (std::size_t j = 0; j < pts.size(); ++j) out.col(static_cast<Index>(j)) = pts[j];
  return out;
}

ConvergenceReport convergence_report(int ambient_dim, int variety_dim, const std::vector<int>& degrees,
                                     double grid_radius, int per_axis, const KernelCalibration& calibration) {
  if (degrees.empty()) throw ConfigError("convergence_report: no degrees");
  ConvergenceReport report;
  report.calibration = calibration;
  report.grid = kernel_grid(variety_dim, grid_radius, per_axis);
  const LimitKernelSpec limit{ambient_dim, variety_dim};
  const Index k = report.grid.cols();
  Matrix limit_values(k, k);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < k; ++j)
      limit_values(i, j) = calibration.constant * limit_kernel(limit, report.grid.col(i), report.grid.col(j));

  const auto chart = ChartAtPoint::north_pole(ambient_dim, variety_dim);
  for (int m : degrees) {
    if (grid_radius / m >= std::numbers::pi) throw ConfigError("convergence_report: grid outside the chart radius");
    const auto basis = make_basis({ambient_dim, m, 1, variety_dim});
    Matrix sphere_points(ambient_dim + 1, k);
    for (Index i = 0; i < k; ++i) sphere_points.col(i) = chart.exp(report.grid.col(i) / m);
    const Matrix values = basis->evaluate_many(sphere_points);
    const Matrix rescaled = std::pow(static_cast<double>(m), -calibration.scale_exponent) * values * values.transpose();
    Matrix err = (rescaled - limit_values).cwiseAbs();
    report.rows.push_back({m, err.maxCoeff(), calibration.constant});
    report.errors.push_back(std::move(err));
  }
  return report;
}

ConvergenceReport convergence_report(int ambient_dim, int variety_dim, const std::vector<int>& degrees,
                                     double grid_radius, int per_axis) {
  return convergence_report(ambient_dim, variety_dim, degrees, grid_radius, per_axis,
                            calibrate_kernel(ambient_dim, variety_dim));
}

} // namespace randhyp
