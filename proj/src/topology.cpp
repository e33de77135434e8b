#include "randhyp/topology.hpp"

#include "union_find.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <unordered_map>

namespace randhyp {

// ---------------------------------------------------------------- signatures

TopologySignature TopologySignature::genus(int g) {
  if (g < 0) throw ConfigError("signature: genus must be >= 0");
  return {2, 2 - 2 * g, true, {}};
}

TopologySignature TopologySignature::nonorientable(int k) {
  if (k < 1) throw ConfigError("signature: nonorientable genus must be >= 1");
  return {2, 2 - k, false, {}};
}

TopologySignature TopologySignature::multi(std::vector<TopologySignature> pieces) {
  if (pieces.empty()) throw ConfigError("signature: multi needs at least one piece");
  std::vector<TopologySignature> flat;
  for (auto& p : pieces) {
    if (p.connected()) flat.push_back(std::move(p));
    else flat.insert(flat.end(), p.pieces.begin(), p.pieces.end());
  }
  if (flat.size() == 1) return flat.front();
  const int dim = flat.front().dim;
  TopologySignature out{dim, 0, true, {}};
  for (const auto& p : flat) {
    if (p.dim != dim) throw ConfigError("signature: multi pieces must share a dimension");
    out.euler += p.euler;
    out.orientable = out.orientable && p.orientable;
  }
  std::sort(flat.begin(), flat.end(), [](const auto& a, const auto& b) { return a.to_string() < b.to_string(); });
  out.pieces = std::move(flat);
  return out;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

int parse_int(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw ConfigError("signature: bad integer in " + what);
  return v;
}

} // namespace

TopologySignature TopologySignature::parse(const std::string& raw) {
  const std::string text = trim(raw);
  if (text == "point") return point();
  if (text == "circle") return circle();
  if (text == "sphere") return sphere();
  if (text == "torus") return torus();
  if (text.rfind("genus:", 0) == 0) return genus(parse_int(text.substr(6), text));
  if (text.rfind("nonorientable:", 0) == 0) return nonorientable(parse_int(text.substr(14), text));
  if (text.rfind("multi:", 0) == 0) {
    const std::string body = trim(text.substr(6));
    if (body.size() < 2 || body.front() != '[' || body.back() != ']')
      throw ConfigError("signature: multi expects a bracketed list: " + text);
    std::vector<TopologySignature> pieces;
    int depth = 0;
    std::string current;
    for (std::size_t i = 1; i + 1 < body.size(); ++i) {
      const char ch = body[i];
      if (ch == '[') ++depth;
      if (ch == ']') --depth;
      if (ch == ',' && depth == 0) {
        pieces.push_back(parse(current));
        current.clear();
      } else {
        current += ch;
      }
    }
    if (depth != 0) throw ConfigError("signature: unbalanced brackets: " + text);
    pieces.push_back(parse(current));
    return multi(std::move(pieces));
  }
  throw ConfigError("signature: unknown signature '" + text + "'");
}

std::string TopologySignature::to_string() const {
  if (!connected()) {
    std::string out = "multi:[";
    for (std::size_t i = 0; i < pieces.size(); ++i) out += (i ? "," : "") + pieces[i].to_string();
    return out + "]";
  }
  switch (dim) {
  case 0:
    return "point";
  case 1:
    return "circle";
  case 2:
    if (!orientable) return "nonorientable:" + std::to_string(2 - euler);
    if (euler == 2) return "sphere";
    if (euler == 0) return "torus";
    return "genus:" + std::to_string((2 - euler) / 2);
  default:
    return "dim" + std::to_string(dim) + ":euler" + std::to_string(euler);
  }
}

bool TopologySignature::operator==(const TopologySignature& other) const {
  if (dim != other.dim || euler != other.euler || pieces.size() != other.pieces.size()) return false;
  if (dim == 2 && orientable != other.orientable) return false;
  for (std::size_t i = 0; i < pieces.size(); ++i)
    if (!(pieces[i] == other.pieces[i])) return false;
  return true;
}

double Component::max_distance(const Eigen::Ref<const Vector>& center) const {
  if (points.cols() == 0) return 0.0;
  return (points.colwise() - center).colwise().norm().maxCoeff();
}

Index ComponentReport::closed_count() const {
  return std::count_if(components.begin(), components.end(), [](const Component& c) { return c.closed; });
}

// ---------------------------------------------------------------- helpers

GridFunction pointwise(PointFunction f) {
  return [f = std::move(f)](const GridSpec& grid) {
    Vector out(grid.size());
    for (Index j = 0; j < grid.size(); ++j) out[j] = f(grid.point(j));
    return out;
  };
}

Vector subcell_offset(const GridSpec& grid) {
  Vector off(grid.dim());
  for (int a = 0; a < grid.dim(); ++a) {
    const double x = (a + 1) * std::numbers::phi;
    off[a] = 0.5 * grid.spacing() * (x - std::floor(x));
  }
  return off;
}

namespace {

bool has_vertex_zero(const Vector& values) {
  return values.size() > 0 && values.cwiseAbs().minCoeff() < kVertexZeroTolerance;
}

std::uint64_t edge_key(Index a, Index b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (lo << 32) | hi;
}

Matrix columns(const std::vector<double>& flat, int dim, const std::vector<Index>& which) {
  Matrix out(dim, static_cast<Index>(which.size()));
  for (std::size_t j = 0; j < which.size(); ++j)
    for (int a = 0; a < dim; ++a) out(a, static_cast<Index>(j)) = flat[which[j] * dim + a];
  return out;
}

void sort_unique(std::vector<Index>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

// Crossing nodes keyed by the grid edge they sit on.
class NodeTable {
public:
  explicit NodeTable(int dim) : dim_(dim) {}

  template <class Position>
  Index get(std::uint64_t key, Index a, Index b, double fa, double fb, Position&& position, bool normalize) {
    auto [it, inserted] = index_.try_emplace(key, static_cast<Index>(keys_.size()));
    if (!inserted) return it->second;
    keys_.push_back(key);
    const double t = fa / (fa - fb);
    double pa[3] = {}, pb[3] = {};
    position(a, pa);
    position(b, pb);
    double norm = 0;
    const std::size_t base = coords_.size();
    for (int d = 0; d < dim_; ++d) {
      coords_.push_back(pa[d] + t * (pb[d] - pa[d]));
      norm += coords_.back() * coords_.back();
    }
    if (normalize) {
      norm = std::sqrt(norm);
      for (int d = 0; d < dim_; ++d) coords_[base + d] /= norm;
    }
    return it->second;
  }

  Index size() const { return static_cast<Index>(keys_.size()); }
  const std::vector<std::uint64_t>& keys() const { return keys_; }
  const std::vector<double>& coords() const { return coords_; }
  int dim() const { return dim_; }

private:
  int dim_;
  std::unordered_map<std::uint64_t, Index> index_;
  std::vector<std::uint64_t> keys_;
  std::vector<double> coords_;
};

struct Segment {
  Index a, b, cell;
};

// Marching squares over quads given by cyclic corner lists; curves are closed
// exactly when every node has two incident segments.
template <class Corners, class Position>
ComponentReport march_quads(Index cell_count, Corners&& corners, const Vector& values, Position&& position,
                            int point_dim, bool normalize, ZeroSetMesh* mesh) {
  NodeTable nodes(point_dim);
  std::vector<Segment> segments;
  for (Index cell = 0; cell < cell_count; ++cell) {
    const std::array<Index, 4> c = corners(cell);
    double f[4];
    int positive = 0;
    for (int t = 0; t < 4; ++t) {
      f[t] = values[c[t]];
      positive += f[t] > 0;
    }
    if (positive == 0 || positive == 4) continue;
    Index node[4];
    int crossings = 0;
    for (int e = 0; e < 4; ++e) {
      const int u = e, v = (e + 1) % 4;
      node[e] = -1;
      if ((f[u] > 0) != (f[v] > 0)) {
        node[e] = nodes.get(edge_key(c[u], c[v]), c[u], c[v], f[u], f[v], position, normalize);
        ++crossings;
      }
    }
    if (crossings == 2) {
      Index ends[2], k = 0;
      for (int e = 0; e < 4; ++e)
        if (node[e] >= 0) ends[k++] = node[e];
      segments.push_back({ends[0], ends[1], cell});
      continue;
    }
    // Saddle: corners 0 and 2 share a sign. The bilinear interpolant's saddle
    // value decides whether they connect through the cell center.
    const double saddle = (f[0] * f[2] - f[1] * f[3]) / (f[0] + f[2] - f[1] - f[3]);
    if (saddle == 0.0) throw DegeneracyError("marching squares: saddle value is exactly zero");
    if ((saddle > 0) == (f[0] > 0)) {
      segments.push_back({node[0], node[1], cell});
      segments.push_back({node[2], node[3], cell});
    } else {
      segments.push_back({node[3], node[0], cell});
      segments.push_back({node[1], node[2], cell});
    }
  }

  detail::UnionFind uf(static_cast<std::size_t>(nodes.size()));
  std::vector<int> degree(nodes.size(), 0);
  for (const auto& s : segments) {
    uf.unite(s.a, s.b);
    ++degree[s.a];
    ++degree[s.b];
  }
  std::size_t count = 0;
  const auto label = uf.labels(&count);
  std::vector<std::vector<Index>> members(count), cells(count);
  for (Index v = 0; v < nodes.size(); ++v) members[label[v]].push_back(v);
  for (const auto& s : segments) cells[label[s.a]].push_back(s.cell);

  ComponentReport report;
  for (std::size_t k = 0; k < count; ++k) {
    Component comp;
    comp.closed = std::all_of(members[k].begin(), members[k].end(), [&](Index v) { return degree[v] == 2; });
    comp.classified = comp.closed;
    comp.signature = TopologySignature::circle();
    comp.points = columns(nodes.coords(), point_dim, members[k]);
    for (Index v : members[k]) comp.nodes.push_back(nodes.keys()[v]);
    comp.cells = std::move(cells[k]);
    sort_unique(comp.cells);
    report.components.push_back(std::move(comp));
  }
  if (mesh) {
    mesh->vertices = Eigen::Map<const Matrix>(nodes.coords().data(), point_dim, nodes.size());
    mesh->segments.clear();
    mesh->triangles.clear();
    for (const auto& s : segments) mesh->segments.push_back({s.a, s.b});
  }
  return report;
}

ComponentReport extract_1d(const Vector& values, const GridSpec& grid) {
  ComponentReport report;
  for (Index i = 0; i + 1 < grid.resolution; ++i) {
    const double a = values[i], b = values[i + 1];
    if ((a > 0) == (b > 0)) continue;
    Component comp;
    comp.signature = TopologySignature::point();
    comp.points.resize(1, 1);
    comp.points(0, 0) = grid.coordinate(0, i) + grid.spacing() * a / (a - b);
    comp.cells = {i};
    comp.nodes = {edge_key(i, i + 1)};
    report.components.push_back(std::move(comp));
  }
  return report;
}

ComponentReport extract_2d(const Vector& values, const GridSpec& grid, ZeroSetMesh* mesh) {
  const Index res = grid.resolution;
  auto corners = [res](Index cell) {
    const Index i = cell / (res - 1), j = cell % (res - 1);
    const Index v = i * res + j;
    return std::array<Index, 4>{v, v + 1, v + res + 1, v + res};
  };
  auto position = [&grid, res](Index v, double* out) {
    out[0] = grid.coordinate(0, v / res);
    out[1] = grid.coordinate(1, v % res);
  };
  return march_quads((res - 1) * (res - 1), corners, values, position, 2, false, mesh);
}

// Marching tetrahedra on the six-tetrahedron (Kuhn) split of every cube. Tets
// have no ambiguous sign patterns, and neighboring cubes share face diagonals.
ComponentReport extract_3d(const Vector& values, const GridSpec& grid, ZeroSetMesh* mesh) {
  const Index res = grid.resolution;
  const Index cres = res - 1;
  const Index stride[3] = {res * res, res, 1};
  constexpr int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  auto position = [&grid, res](Index v, double* out) {
    out[0] = grid.coordinate(0, v / (res * res));
    out[1] = grid.coordinate(1, (v / res) % res);
    out[2] = grid.coordinate(2, v % res);
  };
  // Tet vertices are ordered along a monotone lattice path, so u < v and
  // v - u encodes the edge direction.
  auto key = [res](Index u, Index v) {
    const Index d = v - u;
    const Index code = (d / (res * res)) * 4 + ((d % (res * res)) / res) * 2 + d % res;
    return static_cast<std::uint64_t>(u) * 8 + static_cast<std::uint64_t>(code);
  };

  NodeTable nodes(3);
  std::vector<std::array<Index, 3>> tris;
  std::vector<Index> tri_cell;
  auto node = [&](Index u, Index v) { return nodes.get(key(u, v), u, v, values[u], values[v], position, false); };

  for (Index i = 0; i < cres; ++i)
    for (Index j = 0; j < cres; ++j)
      for (Index k = 0; k < cres; ++k) {
        const Index base = i * stride[0] + j * stride[1] + k;
        const Index cell = (i * cres + j) * cres + k;
        const Index far = base + stride[0] + stride[1] + stride[2];
        const bool sb = values[base] > 0, sf = values[far] > 0;
        for (const auto& p : perms) {
          Index v[4];
          v[0] = base;
          v[1] = v[0] + stride[p[0]];
          v[2] = v[1] + stride[p[1]];
          v[3] = far;
          bool s[4] = {sb, values[v[1]] > 0, values[v[2]] > 0, sf};
          const int positive = s[0] + s[1] + s[2] + s[3];
          if (positive == 0 || positive == 4) continue;
          if (positive == 1 || positive == 3) {
            const bool lone = positive == 1;
            int a = 0;
            while (s[a] != lone) ++a;
            Index e[3], t = 0;
            for (int b = 0; b < 4; ++b)
              if (b != a) e[t++] = node(std::min(v[a], v[b]), std::max(v[a], v[b]));
            tris.push_back({e[0], e[1], e[2]});
            tri_cell.push_back(cell);
          } else {
            int pos[2], neg[2], np = 0, nn = 0;
            for (int b = 0; b < 4; ++b) (s[b] ? pos[np++] : neg[nn++]) = b;
            auto n = [&](int x, int y) { return node(std::min(v[x], v[y]), std::max(v[x], v[y])); };
            const Index ac = n(pos[0], neg[0]), ad = n(pos[0], neg[1]);
            const Index bd = n(pos[1], neg[1]), bc = n(pos[1], neg[0]);
            tris.push_back({ac, ad, bd});
            tris.push_back({ac, bd, bc});
            tri_cell.push_back(cell);
            tri_cell.push_back(cell);
          }
        }
      }

  detail::UnionFind uf(static_cast<std::size_t>(nodes.size()));
  for (const auto& t : tris) {
    uf.unite(t[0], t[1]);
    uf.unite(t[0], t[2]);
  }
  std::size_t count = 0;
  const auto label = uf.labels(&count);
  std::vector<std::vector<Index>> members(count), comp_tris(count);
  for (Index v = 0; v < nodes.size(); ++v) members[label[v]].push_back(v);
  for (std::size_t t = 0; t < tris.size(); ++t) comp_tris[label[tris[t][0]]].push_back(static_cast<Index>(t));

  ComponentReport report;
  for (std::size_t c = 0; c < count; ++c) {
    const auto& ct = comp_tris[c];
    // (edge, local triangle, direction) triples sorted by edge.
    struct EdgeUse {
      std::uint64_t key;
      Index tri;
      int dir;
    };
    std::vector<EdgeUse> uses;
    uses.reserve(ct.size() * 3);
    for (std::size_t lt = 0; lt < ct.size(); ++lt) {
      const auto& t = tris[ct[lt]];
      for (int e = 0; e < 3; ++e) {
        const Index a = t[e], b = t[(e + 1) % 3];
        uses.push_back({edge_key(a, b), static_cast<Index>(lt), a < b ? 1 : -1});
      }
    }
    std::sort(uses.begin(), uses.end(), [](const EdgeUse& x, const EdgeUse& y) {
      return x.key != y.key ? x.key < y.key : x.tri < y.tri;
    });
    Index edges = 0;
    bool boundary = false, manifold = true;
    std::vector<std::vector<std::pair<Index, int>>> adj(ct.size());
    for (std::size_t i = 0; i < uses.size();) {
      std::size_t j = i;
      while (j < uses.size() && uses[j].key == uses[i].key) ++j;
      ++edges;
      if (j - i == 1) boundary = true;
      else if (j - i > 2) manifold = false;
      else {
        const int rel = -uses[i].dir * uses[i + 1].dir;
        adj[uses[i].tri].push_back({uses[i + 1].tri, rel});
        adj[uses[i + 1].tri].push_back({uses[i].tri, rel});
      }
      i = j;
    }
    // Propagate an orientation; a conflict means no consistent orientation.
    std::vector<int> sign(ct.size(), 0);
    bool orientable = true;
    std::vector<Index> queue;
    for (std::size_t s = 0; s < ct.size(); ++s) {
      if (sign[s]) continue;
      sign[s] = 1;
      queue.assign(1, static_cast<Index>(s));
      while (!queue.empty()) {
        const Index t = queue.back();
        queue.pop_back();
        for (auto [u, rel] : adj[t]) {
          const int want = rel * sign[t];
          if (sign[u] == 0) {
            sign[u] = want;
            queue.push_back(u);
          } else if (sign[u] != want) {
            orientable = false;
          }
        }
      }
    }

    Component comp;
    comp.closed = !boundary;
    comp.manifold = manifold;
    comp.classified = comp.closed && manifold;
    comp.signature = {2, static_cast<int>(static_cast<Index>(members[c].size()) - edges + static_cast<Index>(ct.size())),
                      orientable, {}};
    comp.points = columns(nodes.coords(), 3, members[c]);
    for (Index v : members[c]) comp.nodes.push_back(nodes.keys()[v]);
    for (Index t : ct) comp.cells.push_back(tri_cell[t]);
    sort_unique(comp.cells);
    report.components.push_back(std::move(comp));
  }
  if (mesh) {
    mesh->vertices = Eigen::Map<const Matrix>(nodes.coords().data(), 3, nodes.size());
    mesh->segments.clear();
    mesh->triangles = std::move(tris);
  }
  return report;
}

} // namespace

ComponentReport components_from_values(const Vector& values, const GridSpec& grid, ZeroSetMesh* mesh) {
  grid.validate();
  if (values.size() != grid.size()) throw ConfigError("components_from_values: value count does not match grid");
  if (has_vertex_zero(values)) throw DegeneracyError("zero set passes through a grid vertex");
  ComponentReport report;
  switch (grid.dim()) {
  case 1:
    report = extract_1d(values, grid);
    break;
  case 2:
    report = extract_2d(values, grid, mesh);
    break;
  case 3:
    report = extract_3d(values, grid, mesh);
    break;
  default:
    throw ConfigError("extract_components_hypersurface: dimension must be 1, 2 or 3");
  }
  report.grid = grid;
  report.offset = Vector::Zero(grid.dim());
  return report;
}

ComponentReport extract_components_hypersurface(const GridFunction& f, const GridSpec& grid, ZeroSetMesh* mesh) {
  grid.validate();
  Vector values = f(grid);
  if (!has_vertex_zero(values)) return components_from_values(values, grid, mesh);
  const Vector off = subcell_offset(grid);
  const GridSpec moved = grid.shifted(off);
  values = f(moved);
  ComponentReport report = components_from_values(values, moved, mesh);
  report.offset = off;
  return report;
}

ComponentReport extract_components_hypersurface(const PointFunction& f, const GridSpec& grid, ZeroSetMesh* mesh) {
  return extract_components_hypersurface(pointwise(f), grid, mesh);
}

// ---------------------------------------------------------------- codim r

namespace {

// Damped Gauss-Newton with a minimum-norm step. Returns false on stagnation.
bool refine_common_zero(const std::vector<PointFunction>& fs, Vector& x, double tol, double h) {
  const Index r = static_cast<Index>(fs.size()), n = x.size();
  auto eval = [&](const Vector& p) {
    Vector out(r);
    for (Index i = 0; i < r; ++i) out[i] = fs[i](p);
    return out;
  };
  Vector F = eval(x);
  for (int iter = 0; iter < 60; ++iter) {
    if (F.cwiseAbs().maxCoeff() <= tol) return true;
    Matrix J(r, n);
    for (Index a = 0; a < n; ++a) {
      Vector xp = x, xm = x;
      xp[a] += h;
      xm[a] -= h;
      J.col(a) = (eval(xp) - eval(xm)) / (2.0 * h);
    }
    const Vector step = J.completeOrthogonalDecomposition().solve(-F);
    if (!step.allFinite()) return false;
    double alpha = 1.0;
    bool moved = false;
    while (alpha > 1e-4) {
      const Vector trial = x + alpha * step;
      const Vector Ft = eval(trial);
      if (Ft.norm() < F.norm()) {
        x = trial;
        F = Ft;
        moved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!moved) return F.cwiseAbs().maxCoeff() <= tol;
  }
  return F.cwiseAbs().maxCoeff() <= tol;
}

} // namespace

ComponentReport extract_components_codim_r(const std::vector<PointFunction>& fs, const GridSpec& grid) {
  grid.validate();
  const int n = grid.dim();
  const int r = static_cast<int>(fs.size());
  if (r < 2 || r > n) throw ConfigError("extract_components_codim_r: need 2 <= r <= n");
  if (n > 3) throw ConfigError("extract_components_codim_r: dimension must be <= 3");

  const Index res = grid.resolution;
  const Index V = grid.size();
  Matrix values(r, V);
  for (Index v = 0; v < V; ++v) {
    const Vector p = grid.point(v);
    for (int i = 0; i < r; ++i) values(i, v) = fs[i](p);
  }
  const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
  const double tol = 1e-10 * scale;
  const double h = grid.spacing();
  const double diag = h * std::sqrt(static_cast<double>(n));
  const double fd_step = 1e-6 * h;

  Index cells = 1;
  for (int a = 0; a < n; ++a) cells *= res - 1;
  std::vector<Index> vstride(n);
  for (int a = n - 1, s = 1; a >= 0; --a, s *= static_cast<int>(res)) vstride[a] = s;

  std::vector<Vector> zeros;
  std::vector<Index> zero_cell;
  ComponentReport report;
  std::vector<Index> idx(n);
  for (Index cell = 0; cell < cells; ++cell) {
    Index rest = cell, base = 0;
    for (int a = n - 1; a >= 0; --a) {
      idx[a] = rest % (res - 1);
      rest /= res - 1;
      base += idx[a] * vstride[a];
    }
    bool all_change = true;
    for (int i = 0; i < r && all_change; ++i) {
      bool pos = false, neg = false;
      for (int corner = 0; corner < (1 << n); ++corner) {
        Index v = base;
        for (int a = 0; a < n; ++a)
          if (corner >> a & 1) v += vstride[a];
        (values(i, v) > 0 ? pos : neg) = true;
      }
      all_change = pos && neg;
    }
    if (!all_change) continue;
    Vector x(n);
    for (int a = 0; a < n; ++a) x[a] = grid.coordinate(a, idx[a]) + 0.5 * h;
    if (!refine_common_zero(fs, x, tol, fd_step)) {
      ++report.unresolved_cells;
      continue;
    }
    bool inside = true;
    for (int a = 0; a < n; ++a)
      inside = inside && std::abs(x[a] - grid.center[a]) <= grid.radius;
    if (!inside) continue;
    zeros.push_back(x);
    zero_cell.push_back(cell);
  }

  // eps-neighborhood clustering through a spatial hash with bucket size eps.
  const double eps = 2.0 * diag;
  detail::UnionFind uf(zeros.size());
  std::map<std::vector<Index>, std::vector<std::size_t>> buckets;
  auto bucket_of = [&](const Vector& p) {
    std::vector<Index> b(n);
    for (int a = 0; a < n; ++a) b[a] = static_cast<Index>(std::floor((p[a] - grid.center[a] + grid.radius) / eps));
    return b;
  };
  for (std::size_t i = 0; i < zeros.size(); ++i) buckets[bucket_of(zeros[i])].push_back(i);
  for (std::size_t i = 0; i < zeros.size(); ++i) {
    const auto b = bucket_of(zeros[i]);
    int neighbors = 1;
    for (int a = 0; a < n; ++a) neighbors *= 3;
    for (int code = 0; code < neighbors; ++code) {
      auto nb = b;
      int rest = code;
      for (int a = 0; a < n; ++a) {
        nb[a] += rest % 3 - 1;
        rest /= 3;
      }
      const auto it = buckets.find(nb);
      if (it == buckets.end()) continue;
      for (std::size_t j : it->second)
        if (j > i && (zeros[i] - zeros[j]).norm() <= eps) uf.unite(i, j);
    }
  }
  std::size_t count = 0;
  const auto label = uf.labels(&count);
  std::vector<std::vector<std::size_t>> members(count);
  for (std::size_t i = 0; i < zeros.size(); ++i) members[label[i]].push_back(i);
  for (auto& m : members) {
    Component comp;
    comp.points.resize(n, static_cast<Index>(m.size()));
    bool near_boundary = false;
    for (std::size_t j = 0; j < m.size(); ++j) {
      const Vector& p = zeros[m[j]];
      comp.points.col(static_cast<Index>(j)) = p;
      comp.cells.push_back(zero_cell[m[j]]);
      for (int a = 0; a < n; ++a) near_boundary = near_boundary || grid.radius - std::abs(p[a] - grid.center[a]) < diag;
    }
    sort_unique(comp.cells);
    if (n == r) {
      comp.signature = TopologySignature::point();
    } else {
      comp.closed = !near_boundary;
      comp.signature = n - r == 1 ? TopologySignature::circle() : TopologySignature{n - r, 0, true, {}};
      comp.classified = comp.closed && n - r == 1;
    }
    report.components.push_back(std::move(comp));
  }
  report.grid = grid;
  report.offset = Vector::Zero(n);
  return report;
}

// ---------------------------------------------------------------- sphere

ComponentReport sphere_components_from_values(const Vector& values, const SphereGrid& grid, ZeroSetMesh* mesh) {
  if (values.size() != grid.size()) throw ConfigError("sphere_components_from_values: value count does not match grid");
  if (has_vertex_zero(values)) throw DegeneracyError("zero set passes through a sphere grid vertex");
  const auto& quads = grid.quads();
  const Matrix& pts = grid.points();
  auto corners = [&quads](Index cell) { return quads[cell]; };
  auto position = [&pts](Index v, double* out) {
    for (int a = 0; a < 3; ++a) out[a] = pts(a, v);
  };
  ComponentReport report =
      march_quads(static_cast<Index>(quads.size()), corners, values, position, 3, true, mesh);
  report.sphere_resolution = grid.resolution();
  report.offset = Vector::Constant(1, grid.rotation_angle());
  return report;
}

ComponentReport extract_components_sphere(const SphereFunction& f, const SphereGrid& grid, ZeroSetMesh* mesh) {
  Vector values = f(grid);
  if (!has_vertex_zero(values)) return sphere_components_from_values(values, grid, mesh);
  const double x = 2.0 * std::numbers::phi;
  const SphereGrid moved = grid.rotated(grid.rotation_angle() + 0.5 * grid.cell_angle() * (x - std::floor(x)));
  return sphere_components_from_values(f(moved), moved, mesh);
}

ComponentReport antipodal_quotient(const ComponentReport& report, const SphereGrid& grid) {
  if (report.sphere_resolution != grid.resolution() || report.offset.size() != 1 ||
      report.offset[0] != grid.rotation_angle())
    throw ConfigError("antipodal_quotient: report was not extracted on this sphere grid");
  const auto& anti = grid.antipode();
  auto mirror = [&anti](std::uint64_t key) {
    return edge_key(anti[static_cast<Index>(key >> 32)], anti[static_cast<Index>(key & 0xffffffffULL)]);
  };
  std::unordered_map<std::uint64_t, std::size_t> owner;
  for (std::size_t c = 0; c < report.components.size(); ++c)
    for (auto key : report.components[c].nodes) owner.emplace(key, c);

  ComponentReport out = report;
  out.quotient_mode = QuotientMode::antipodal;
  out.components.clear();
  const std::size_t none = SIZE_MAX;
  std::vector<std::size_t> partner(report.components.size(), none);
  for (std::size_t c = 0; c < report.components.size(); ++c) {
    for (auto key : report.components[c].nodes) {
      const auto it = owner.find(mirror(key));
      const std::size_t p = it == owner.end() ? none : it->second;
      if (partner[c] == none) partner[c] = p;
      if (p == none || p != partner[c]) {
        out.pairing_mismatch = true;
        break;
      }
    }
  }
  for (std::size_t c = 0; c < report.components.size(); ++c) {
    const std::size_t p = partner[c];
    if (p == none || partner[p] != c) {
      out.pairing_mismatch = true;
      out.components.push_back(report.components[c]);
      continue;
    }
    if (p == c) {
      ++out.invariant_components;
      Component comp = report.components[c];
      // A closed connected curve stays a circle in the quotient; surfaces
      // would need their own Euler count.
      comp.classified = comp.closed && comp.signature.dim == 1;
      out.components.push_back(std::move(comp));
    } else if (c < p) {
      out.paired_components += 2;
      out.components.push_back(report.components[c]);
    }
  }

  // Cross-check: identify every node with its mirror and count classes.
  std::unordered_map<std::uint64_t, std::size_t> id;
  detail::UnionFind uf;
  auto node_id = [&](std::uint64_t key) {
    auto [it, inserted] = id.try_emplace(key, 0);
    if (inserted) it->second = uf.add();
    return it->second;
  };
  for (const auto& comp : report.components) {
    if (comp.nodes.empty()) continue;
    const std::size_t first = node_id(comp.nodes.front());
    for (auto key : comp.nodes) {
      uf.unite(first, node_id(key));
      uf.unite(node_id(key), node_id(mirror(key)));
    }
  }
  std::size_t classes = 0;
  uf.labels(&classes);
  if (classes != out.components.size()) out.pairing_mismatch = true;
  return out;
}

// ---------------------------------------------------------------- counting

Index count_N_sigma(const ComponentReport& report, const TopologySignature& sigma, CountMode mode) {
  auto matches = [&report](const TopologySignature& s) {
    return static_cast<Index>(std::count_if(report.components.begin(), report.components.end(), [&s](const Component& c) {
      return c.closed && c.classified && c.signature == s;
    }));
  };
  if (sigma.connected()) return matches(sigma);
  if (mode == CountMode::strict) return 0;
  // Greedy ratio minimum over distinct pieces.
  std::vector<std::pair<TopologySignature, Index>> needed;
  for (const auto& p : sigma.pieces) {
    auto it = std::find_if(needed.begin(), needed.end(), [&p](const auto& e) { return e.first == p; });
    if (it == needed.end()) needed.push_back({p, 1});
    else ++it->second;
  }
  Index groups = std::numeric_limits<Index>::max();
  for (const auto& [piece, need] : needed) groups = std::min(groups, matches(piece) / need);
  return groups;
}

ComponentReport restrict_to_ball(const ComponentReport& report, const Eigen::Ref<const Vector>& center, double radius) {
  ComponentReport out = report;
  out.components.clear();
  for (const auto& c : report.components)
    if (c.closed && c.max_distance(center) < radius) out.components.push_back(c);
  return out;
}

// ---------------------------------------------------------------- output

std::string report_json(const ComponentReport& report) {
  using nlohmann::json;
  json j;
  if (report.grid) {
    const auto& g = *report.grid;
    j["grid"] = {{"center", std::vector<double>(g.center.data(), g.center.data() + g.center.size())},
                 {"radius", g.radius},
                 {"resolution", g.resolution}};
  }
  if (report.sphere_resolution > 0) j["sphere_resolution"] = report.sphere_resolution;
  j["offset"] = std::vector<double>(report.offset.data(), report.offset.data() + report.offset.size());
  j["quotient_mode"] = report.quotient_mode == QuotientMode::none ? "none" : "antipodal";
  j["unresolved_cells"] = report.unresolved_cells;
  if (report.quotient_mode == QuotientMode::antipodal) {
    j["invariant_components"] = report.invariant_components;
    j["paired_components"] = report.paired_components;
    j["pairing_mismatch"] = report.pairing_mismatch;
  }
  j["components"] = json::array();
  for (const auto& c : report.components) {
    const Vector centroid = c.points.cols() ? Vector(c.points.rowwise().mean()) : Vector();
    j["components"].push_back({{"signature", c.classified ? c.signature.to_string() : "unclassified"},
                               {"euler", c.signature.euler},
                               {"orientable", c.signature.orientable},
                               {"closed", c.closed},
                               {"cells", c.cells.size()},
                               {"points", c.points.cols()},
                               {"centroid", std::vector<double>(centroid.data(), centroid.data() + centroid.size())}});
  }
  return j.dump(2);
}

void write_obj(const ZeroSetMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("write_obj: cannot open " + path);
  out.precision(17);
  for (Index v = 0; v < mesh.vertices.cols(); ++v) {
    out << 'v';
    for (Index a = 0; a < 3; ++a) out << ' ' << (a < mesh.vertices.rows() ? mesh.vertices(a, v) : 0.0);
    out << '\n';
  }
  for (const auto& s : mesh.segments) out << "l " << s[0] + 1 << ' ' << s[1] + 1 << '\n';
  for (const auto& t : mesh.triangles) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

} // namespace randhyp
