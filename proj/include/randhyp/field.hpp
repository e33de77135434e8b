#pragma once

#include "randhyp/core.hpp"
#include "randhyp/kernel.hpp"
#include "randhyp/rng.hpp"

#include <string>
#include <vector>

namespace randhyp {

/// Regular lattice of resolution^n points on the box [center - R, center + R]^n.
/// Flat indices are row-major with the last axis fastest.
struct GridSpec {
  Vector center;
  double radius = 1.0;
  int resolution = 3;

  static GridSpec cube(int dim, double radius, int resolution) { return {Vector::Zero(dim), radius, resolution}; }

  void validate() const;
  int dim() const { return static_cast<int>(center.size()); }
  double spacing() const { return 2.0 * radius / (resolution - 1); }
  Index size() const;
  double coordinate(int axis, Index i) const { return center[axis] - radius + spacing() * static_cast<double>(i); }
  Vector point(Index flat) const;
  /// Same lattice translated by `shift`.
  GridSpec shifted(const Eigen::Ref<const Vector>& shift) const;
};

/// Randomized spectral representation of the stationary field with spectral
/// measure Lebesgue on the unit ball of R^N:
///   F(x) = amplitude * sum_j cos(<xi_j, x> + phi_j),  amplitude = sqrt(2 |B_N| / M),
/// with x in R^n embedded in the first n coordinates.
struct SpectralFieldSample {
  int eval_dim = 1;
  Matrix frequencies; // N x M
  Vector phases;      // M
  double amplitude = 0;

  int freq_dim() const { return static_cast<int>(frequencies.rows()); }
  Index modes() const { return frequencies.cols(); }

  double evaluate(const Eigen::Ref<const Vector>& x) const;
  double operator()(const Eigen::Ref<const Vector>& x) const { return evaluate(x); }
  /// Values on every grid vertex, using separable per-axis exponentials.
  Vector on_grid(const GridSpec& grid) const;
};

inline constexpr int kDefaultSpectralModes = 512;

SpectralFieldSample sample_field_spectral(int eval_dim, int freq_dim, int modes, RandomStream& rng);

/// r independent spectral samples; entry i uses rng.child(i).
std::vector<SpectralFieldSample> sample_field_tuple(int r, int eval_dim, int freq_dim, int modes,
                                                    const RandomStream& rng);

/// Exact Gaussian sample at arbitrary points (columns) with covariance
/// K(p_i, p_j) + jitter I. The jitter ladder 1e-10, 1e-9, ..., 1e-6 is tried in
/// order; ConditioningError if every rung fails.
struct ExactFieldSample {
  Vector values;
  double jitter = 0;
};

ExactFieldSample sample_field_exact(const Eigen::Ref<const Matrix>& points, const LimitKernelSpec& spec,
                                    RandomStream& rng);

inline constexpr Index kMaxExactGridPoints = 10'000;

/// Exact sampler on a grid; grid.size() must not exceed kMaxExactGridPoints.
ExactFieldSample sample_field_exact_grid(const GridSpec& grid, const LimitKernelSpec& spec, RandomStream& rng);

/// Grid points as columns.
Matrix grid_points(const GridSpec& grid);

/// Writes values as little-endian row-major float64 to `<prefix>.bin` and the
/// grid description to `<prefix>.json`.
void write_grid_dump(const std::string& prefix, const GridSpec& grid, const Vector& values, std::uint64_t seed,
                     const std::string& sampler);

} // namespace randhyp
