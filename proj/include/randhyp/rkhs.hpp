#pragma once

#include "randhyp/core.hpp"
#include "randhyp/ensemble.hpp"
#include "randhyp/field.hpp"
#include "randhyp/kernel.hpp"

#include <functional>

namespace randhyp {

/// x -> K(x, center).
struct KernelTranslate {
  Vector center;
  LimitKernelSpec spec;

  double operator()(const Eigen::Ref<const Vector>& x) const { return limit_kernel(spec, x, center); }
};

/// phi_t(xi) = t^-N phi(xi / t), where phi is the normalized bump
/// C exp(-1 / (1 - |xi|^2)) on the unit ball of R^N.
class Mollifier {
public:
  Mollifier(int freq_dim, double t);

  int freq_dim() const { return freq_dim_; }
  double scale() const { return t_; }
  double operator()(const Eigen::Ref<const Vector>& xi) const;

  /// Normalizing constant C for dimension N, computed once per N.
  static double normalization(int freq_dim);

private:
  int freq_dim_;
  double t_;
};

inline constexpr int kDefaultMollifierNodes = 128;

/// x^k * integral of phi_t(xi) cos<xi, x> over R^N, with x embedded in the
/// first n coordinates. Tensor Gauss-Legendre over the support of phi_t with
/// `nodes` points per axis.
double mollifier_approximant(const MultiIndex& k, const Mollifier& phi, const Eigen::Ref<const Vector>& x,
                             int nodes = kDefaultMollifierNodes);

/// Sup of |approximant - x^k| over the grid points inside the ball of radius grid.radius.
double mollifier_sup_error(const MultiIndex& k, const Mollifier& phi, const GridSpec& grid,
                           int nodes = kDefaultMollifierNodes);

struct SpanFit {
  Vector coefficients;
  /// Ridge actually used; larger than requested when the ladder had to climb.
  double ridge = 0;
  Index fit_points = 0;
  Index audit_points = 0;
  double fit_residual = 0;
  /// Sup residual on the audit grid (resolution 2 res - 1).
  double sup_residual = 0;
};

using Target = std::function<double(const Eigen::Ref<const Vector>&)>;

/// Ridge least squares of target against {K(., c_j)} on the grid points
/// inside the ball of radius grid.radius about grid.center. Columns of
/// `centers` are the c_j. Translate systems are close to singular, so the
/// solve and both residuals run in long double.
SpanFit fit_in_span(const Target& target, const Matrix& centers, const LimitKernelSpec& spec, double ridge,
                    const GridSpec& grid);

/// Evaluate sum_j w_j K(x, c_j).
double evaluate_span(const Matrix& centers, const LimitKernelSpec& spec, const Vector& coefficients,
                     const Eigen::Ref<const Vector>& x);

/// `count` equally spaced centers on [-half_width, half_width]^n per axis.
Matrix gridded_centers(int dim, double half_width, int count);

} // namespace randhyp
