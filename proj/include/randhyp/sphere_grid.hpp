#pragma once

#include "randhyp/core.hpp"

#include <array>
#include <vector>

namespace randhyp {

/// Boundary of the lattice {0..res-1}^(n+1), pushed onto S^n with the
/// equiangular warp tan(pi s / 4) per coordinate. Points are columns.
Matrix cube_sphere_lattice(int sphere_dim, int resolution);

/// Cube-sphere grid of S^2. Seams share vertices, and the lattice reflection
/// (i,j,k) -> (res-1-i, res-1-j, res-1-k) is exactly the antipodal map.
class SphereGrid {
public:
  explicit SphereGrid(int resolution, double rotation_angle = 0.0);

  int resolution() const { return resolution_; }
  double rotation_angle() const { return rotation_angle_; }
  Index size() const { return points_.cols(); }
  const Matrix& points() const { return points_; }
  const std::vector<std::array<Index, 4>>& quads() const { return quads_; }
  const std::vector<Index>& antipode() const { return antipode_; }
  /// One vertex from each antipodal pair.
  const std::vector<Index>& representatives() const { return representatives_; }
  Matrix representative_points() const;
  /// Full vertex values from representative values, using f(-x) = parity f(x).
  Vector expand(const Vector& representative_values, int parity) const;
  /// Largest angle between adjacent vertices.
  double cell_angle() const { return cell_angle_; }

  /// Same lattice rotated about a fixed irrational axis.
  SphereGrid rotated(double angle) const { return SphereGrid(resolution_, angle); }

private:
  int resolution_;
  double rotation_angle_;
  double cell_angle_ = 0;
  Matrix points_;
  std::vector<std::array<Index, 4>> quads_;
  std::vector<Index> antipode_;
  std::vector<Index> representatives_;
};

} // namespace randhyp
