#pragma once

#include "randhyp/core.hpp"
#include "randhyp/field.hpp"
#include "randhyp/sphere_grid.hpp"

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace randhyp {

/// Diffeomorphism type of a closed manifold of dimension <= 2, or a multiset of
/// such pieces when `pieces` is non-empty.
struct TopologySignature {
  int dim = 1;
  int euler = 0;
  bool orientable = true;
  std::vector<TopologySignature> pieces;

  static TopologySignature point() { return {0, 1, true, {}}; }
  static TopologySignature circle() { return {1, 0, true, {}}; }
  static TopologySignature sphere() { return {2, 2, true, {}}; }
  static TopologySignature torus() { return {2, 0, true, {}}; }
  static TopologySignature genus(int g);
  static TopologySignature nonorientable(int k);
  static TopologySignature multi(std::vector<TopologySignature> pieces);

  /// Grammar: point | circle | sphere | torus | genus:g | nonorientable:k | multi:[s, s, ...]
  static TopologySignature parse(const std::string& text);
  std::string to_string() const;

  bool connected() const { return pieces.empty(); }
  bool operator==(const TopologySignature& other) const;
};

struct Component {
  TopologySignature signature;
  /// False when the signature could not be determined (open pieces, surfaces
  /// invariant under a quotient, codim results of dimension >= 2).
  bool classified = true;
  /// False when the component reaches the grid boundary.
  bool closed = true;
  bool manifold = true;
  std::vector<Index> cells;
  /// Points on the component (crossing nodes or refined zeros), one per column.
  Matrix points;
  /// Keys of the grid edges carrying the crossing nodes.
  std::vector<std::uint64_t> nodes;

  double max_distance(const Eigen::Ref<const Vector>& center) const;
};

enum class QuotientMode { none, antipodal };

struct ComponentReport {
  std::optional<GridSpec> grid;
  int sphere_resolution = 0;
  /// Sub-cell shift applied to the grid (flat grids) or rotation angle (sphere).
  Vector offset;
  QuotientMode quotient_mode = QuotientMode::none;
  std::vector<Component> components;
  int unresolved_cells = 0;
  int invariant_components = 0;
  int paired_components = 0;
  bool pairing_mismatch = false;

  bool uncertain() const { return unresolved_cells > 0; }
  Index closed_count() const;
};

/// Zero set geometry for export: segments (curves) or triangles (surfaces).
struct ZeroSetMesh {
  Matrix vertices;
  std::vector<std::array<Index, 2>> segments;
  std::vector<std::array<Index, 3>> triangles;
};

using PointFunction = std::function<double(const Eigen::Ref<const Vector>&)>;
/// Values of a function on every vertex of a grid, flat row-major order.
using GridFunction = std::function<Vector(const GridSpec&)>;

GridFunction pointwise(PointFunction f);

inline constexpr double kVertexZeroTolerance = 1e-9;

/// Golden-ratio sub-cell shift used when a vertex value is within
/// kVertexZeroTolerance of zero.
Vector subcell_offset(const GridSpec& grid);

/// Zero set of f on a grid of dimension 1, 2 or 3. Dimension 1 yields points,
/// 2 closed curves from marching squares with the asymptotic decider, 3 a
/// triangle mesh from marching tetrahedra (six-tetrahedron cube split).
ComponentReport extract_components_hypersurface(const GridFunction& f, const GridSpec& grid,
                                                ZeroSetMesh* mesh = nullptr);
ComponentReport extract_components_hypersurface(const PointFunction& f, const GridSpec& grid,
                                                ZeroSetMesh* mesh = nullptr);

/// Same, from precomputed vertex values. DegeneracyError on a vertex zero.
ComponentReport components_from_values(const Vector& values, const GridSpec& grid, ZeroSetMesh* mesh = nullptr);

/// Common zeros of r functions: cells where every function changes sign seed a
/// damped Gauss-Newton refinement; refined points are clustered with
/// eps = 2 * cell diagonal.
ComponentReport extract_components_codim_r(const std::vector<PointFunction>& fs, const GridSpec& grid);

using SphereFunction = std::function<Vector(const SphereGrid&)>;

/// Zero set of a function on the cube-sphere grid of S^2.
ComponentReport extract_components_sphere(const SphereFunction& f, const SphereGrid& grid,
                                          ZeroSetMesh* mesh = nullptr);
ComponentReport sphere_components_from_values(const Vector& values, const SphereGrid& grid,
                                              ZeroSetMesh* mesh = nullptr);

/// Identifies x with -x. Paired components count once; invariant curves map
/// to circles, invariant surfaces stay unclassified. The pairing is
/// cross-checked by a union-find count of the identified node graph.
ComponentReport antipodal_quotient(const ComponentReport& report, const SphereGrid& grid);

enum class CountMode { strict, grouped };

/// Number of closed components diffeomorphic to sigma (strict), or the number
/// of disjoint groups realizing sigma's pieces (grouped).
Index count_N_sigma(const ComponentReport& report, const TopologySignature& sigma, CountMode mode = CountMode::strict);

/// Closed components lying strictly inside B(center, radius).
ComponentReport restrict_to_ball(const ComponentReport& report, const Eigen::Ref<const Vector>& center,
                                 double radius);

std::string report_json(const ComponentReport& report);

/// ASCII OBJ: `v x y z` lines followed by `l` or `f` lines.
void write_obj(const ZeroSetMesh& mesh, const std::string& path);

} // namespace randhyp
