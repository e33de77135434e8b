#include "randhyp/sphere_grid.hpp"

#include <numbers>

namespace randhyp {

namespace {

// Exact integer numerator keeps warp(res-1-i) == -warp(i) bit for bit.
double warp(Index i, int res) {
  const double s = static_cast<double>(2 * i - (res - 1)) / (res - 1);
  return std::tan(0.25 * std::numbers::pi * s);
}

} // namespace

Matrix cube_sphere_lattice(int sphere_dim, int resolution) {
  if (sphere_dim < 1) throw ConfigError("cube_sphere_lattice: sphere dimension must be >= 1");
  if (resolution < 2) throw ConfigError("cube_sphere_lattice: resolution must be >= 2");
  const int dims = sphere_dim + 1;
  Index total = 1;
  for (int a = 0; a < dims; ++a) total *= resolution;
  std::vector<Vector> pts;
  std::vector<Index> idx(dims);
  for (Index flat = 0; flat < total; ++flat) {
    Index rest = flat;
    bool boundary = false;
    for (int a = dims - 1; a >= 0; --a) {
      idx[a] = rest % resolution;
      rest /= resolution;
      boundary = boundary || idx[a] == 0 || idx[a] == resolution - 1;
    }
    if (!boundary) continue;
    Vector p(dims);
    for (int a = 0; a < dims; ++a) p[a] = warp(idx[a], resolution);
    pts.push_back(p.normalized());
  }
  Matrix out(dims, static_cast<Index>(pts.size()));
  for (std::size_t j = 0; j < pts.size(); ++j) out.col(static_cast<Index>(j)) = pts[j];
  return out;
}

SphereGrid::SphereGrid(int resolution, double rotation_angle)
  : resolution_(resolution), rotation_angle_(rotation_angle) {
  if (resolution < 3) throw ConfigError("SphereGrid: resolution must be >= 3");
  const Index res = resolution;
  const Index last = res - 1;
  std::vector<std::int32_t> id(static_cast<std::size_t>(res * res * res), -1);
  auto flat = [res](Index i, Index j, Index k) { return static_cast<std::size_t>((i * res + j) * res + k); };

  const double phi = std::numbers::phi;
  const Eigen::Matrix3d rot = Eigen::AngleAxisd(rotation_angle, Eigen::Vector3d(1.0, phi, phi * phi).normalized())
                                  .toRotationMatrix();
  std::vector<Eigen::Vector3d> pts;
  for (Index i = 0; i < res; ++i)
    for (Index j = 0; j < res; ++j)
      for (Index k = 0; k < res; ++k) {
        if (i != 0 && i != last && j != 0 && j != last && k != 0 && k != last) continue;
        id[flat(i, j, k)] = static_cast<std::int32_t>(pts.size());
        pts.push_back(rot * Eigen::Vector3d(warp(i, resolution), warp(j, resolution), warp(k, resolution)).normalized());
      }
  points_.resize(3, static_cast<Index>(pts.size()));
  for (std::size_t v = 0; v < pts.size(); ++v) points_.col(static_cast<Index>(v)) = pts[v];

  antipode_.resize(pts.size());
  for (Index i = 0; i < res; ++i)
    for (Index j = 0; j < res; ++j)
      for (Index k = 0; k < res; ++k) {
        const auto v = id[flat(i, j, k)];
        if (v >= 0) antipode_[v] = id[flat(last - i, last - j, last - k)];
      }
  for (Index v = 0; v < size(); ++v)
    if (v < antipode_[v]) representatives_.push_back(v);

  // Faces: axis a pinned at 0 or last, the other two axes span the quad.
  for (int a = 0; a < 3; ++a) {
    const int b = (a + 1) % 3, c = (a + 2) % 3;
    for (Index side : {Index(0), last}) {
      for (Index p = 0; p < last; ++p)
        for (Index q = 0; q < last; ++q) {
          std::array<Index, 4> quad{};
          const Index dp[4] = {0, 1, 1, 0}, dq[4] = {0, 0, 1, 1};
          for (int t = 0; t < 4; ++t) {
            Index ijk[3];
            ijk[a] = side;
            ijk[b] = p + dp[t];
            ijk[c] = q + dq[t];
            quad[t] = id[flat(ijk[0], ijk[1], ijk[2])];
          }
          quads_.push_back(quad);
        }
    }
  }
  // Steps along a face axis are at most pi/2 / (res-1); diagonals add sqrt 2.
  cell_angle_ = 0.5 * std::numbers::pi / static_cast<double>(last) * std::numbers::sqrt2;
}

Matrix SphereGrid::representative_points() const {
  Matrix out(3, static_cast<Index>(representatives_.size()));
  for (std::size_t j = 0; j < representatives_.size(); ++j) out.col(static_cast<Index>(j)) = points_.col(representatives_[j]);
  return out;
}

Vector SphereGrid::expand(const Vector& representative_values, int parity) const {
  if (representative_values.size() != static_cast<Index>(representatives_.size()))
    throw ConfigError("SphereGrid::expand: wrong number of representative values");
  Vector out(size());
  for (std::size_t j = 0; j < representatives_.size(); ++j) {
    const Index v = representatives_[j];
    out[v] = representative_values[static_cast<Index>(j)];
    out[antipode_[v]] = parity * representative_values[static_cast<Index>(j)];
  }
  return out;
}

} // namespace randhyp
