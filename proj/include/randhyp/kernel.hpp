#pragma once

#include "randhyp/core.hpp"
#include "randhyp/ensemble.hpp"
#include "randhyp/quadrature.hpp"

#include <cmath>
#include <vector>

namespace randhyp {

/// Kernel K(u, v) = integral over the unit ball of R^N of exp(i <u - v, xi>),
/// evaluated on arguments in R^n (n <= N), embedded in the first n coordinates.
struct LimitKernelSpec {
  int freq_dim = 1; // N
  int eval_dim = 1; // n

  void validate() const;
};

/// Radial profile of the limit kernel:
///   (2 pi)^(N/2) d^(-N/2) J_(N/2)(d),
/// with a six-term Taylor series below d = 1e-4.
template <class Scalar = double>
Scalar limit_kernel_radial(int freq_dim, Scalar distance) {
  using std::abs;
  using std::exp;
  using std::lgamma;
  using std::log;
  using std::pow;
  const Scalar half = Scalar(freq_dim) / 2;
  const Scalar pi = Scalar(3.141592653589793238462643383279502884L);
  const Scalar d = abs(distance);
  if (d < Scalar(1e-4)) {
    // pi^(N/2) sum_k (-d^2/4)^k / (k! Gamma(k + N/2 + 1))
    const Scalar x = -d * d / 4;
    Scalar sum = 0;
    Scalar power = 1;
    for (int k = 0; k < 6; ++k) {
      sum += power * exp(-lgamma(Scalar(k + 1)) - lgamma(Scalar(k) + half + 1));
      power *= x;
    }
    return pow(pi, half) * sum;
  }
  return pow(2 * pi / d, half) * std::cyl_bessel_j(half, d);
}

template <class Scalar = double>
Scalar limit_kernel(const LimitKernelSpec& spec, const Eigen::Ref<const Vector>& u, const Eigen::Ref<const Vector>& v) {
  if (u.size() != spec.eval_dim || v.size() != spec.eval_dim)
    throw ConfigError("limit_kernel: argument dimension does not match eval_dim");
  return limit_kernel_radial<Scalar>(spec.freq_dim, Scalar((u - v).norm()));
}

/// Independent oracle: nested adaptive quadrature of cos<u - v, xi> over the
/// unit ball, one trigonometric substitution per axis. Only used to validate
/// limit_kernel.
double limit_kernel_quadrature(const LimitKernelSpec& spec, const Eigen::Ref<const Vector>& u,
                               const Eigen::Ref<const Vector>& v, double tol,
                               std::int64_t evaluation_budget = 50'000'000);

/// Geodesic normal coordinates on S^N around a base point of the equatorial
/// S^n = {x_(n+1) = ... = x_N = 0}. The first n frame columns span T_x S^n.
class ChartAtPoint {
public:
  ChartAtPoint(const Eigen::Ref<const Vector>& base_point, int variety_dim);

  /// Chart at e_0 of S^N.
  static ChartAtPoint north_pole(int ambient_dim, int variety_dim);

  const Vector& base() const { return base_; }
  const Matrix& frame() const { return frame_; }
  int ambient_dim() const { return static_cast<int>(base_.size()) - 1; }
  int variety_dim() const { return variety_dim_; }

  /// exp_x(u) for u given in the first u.size() frame coordinates.
  Vector exp(const Eigen::Ref<const Vector>& u) const;

private:
  Vector base_;
  Matrix frame_;
  int variety_dim_;
};

/// m^(-scale_exponent) * E[P(exp_x(u/m)) P(exp_x(v/m))]. Rejects |u|/m or
/// |v|/m at or beyond the injectivity radius pi.
double rescaled_kernel(const OrthonormalBasis& basis, const ChartAtPoint& chart, double scale_exponent,
                       const Eigen::Ref<const Vector>& u, const Eigen::Ref<const Vector>& v);

/// Scale exponent and constant relating the rescaled covariance to the limit
/// kernel, fitted from the diagonal values K_m(x, x).
struct KernelCalibration {
  int ambient_dim = 1;
  int variety_dim = 1;
  std::vector<int> degrees;
  std::vector<double> diagonal;
  /// Least-squares slope of log K_m(x,x) against log m.
  double raw_exponent = 0;
  /// raw_exponent rounded to the nearest integer.
  double scale_exponent = 0;
  /// c in K_(m,x) -> c K, from a fit of ratio(m) = c + a/m.
  double constant = 0;
  double constant_slope = 0;
};

inline const std::vector<int> kDefaultCalibrationDegrees{10, 20, 40, 80};

KernelCalibration calibrate_kernel(int ambient_dim, int variety_dim,
                                   const std::vector<int>& degrees = kDefaultCalibrationDegrees);

struct ConvergenceRow {
  int degree = 0;
  double sup_error = 0;
  double constant = 0;
};

struct ConvergenceReport {
  KernelCalibration calibration;
  /// Grid points in R^n, one per column.
  Matrix grid;
  std::vector<ConvergenceRow> rows;
  /// |K_(m,x)(u_i, u_j) - c K(u_i, u_j)| per degree.
  std::vector<Matrix> errors;
};

/// Points of a per_axis^n lattice on [-radius, radius]^n inside the closed ball.
Matrix kernel_grid(int variety_dim, double radius, int per_axis);

/// Sup over grid pairs of |K_(m,x) - c K| for each degree. Deterministic.
ConvergenceReport convergence_report(int ambient_dim, int variety_dim, const std::vector<int>& degrees,
                                     double grid_radius, int per_axis, const KernelCalibration& calibration);

ConvergenceReport convergence_report(int ambient_dim, int variety_dim, const std::vector<int>& degrees,
                                     double grid_radius = 3.0, int per_axis = 9);

} // namespace randhyp
