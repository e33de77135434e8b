#include <doctest.h>

#include "randhyp/ensemble.hpp"
#include "randhyp/topology.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>

using namespace randhyp;

namespace {

double circle_fn(const Eigen::Ref<const Vector>& p) { return p.squaredNorm() - 1.0; }

double torus_fn(const Eigen::Ref<const Vector>& p) {
  const double R = 1.0, r = 0.4;
  const double s = p.squaredNorm() + R * R - r * r;
  return s * s - 4.0 * R * R * (p[0] * p[0] + p[1] * p[1]);
}

// z^2 = -q(x, y) over the disk of radius 2 with two holes of radius 0.4.
double double_torus_fn(const Eigen::Ref<const Vector>& p) {
  const double x = p[0], y = p[1];
  const double outer = x * x + y * y - 4.0;
  const double left = (x + 0.9) * (x + 0.9) + y * y - 0.16;
  const double right = (x - 0.9) * (x - 0.9) + y * y - 0.16;
  return p[2] * p[2] + 0.05 * outer * left * right;
}

GridSpec box(int dim, double radius, int res) { return GridSpec::cube(dim, radius, res); }

} // namespace

TEST_CASE("signature grammar") {
  CHECK(TopologySignature::parse("circle") == TopologySignature::circle());
  CHECK(TopologySignature::parse("sphere").euler == 2);
  CHECK(TopologySignature::parse("torus") == TopologySignature::genus(1));
  CHECK(TopologySignature::parse("genus:2").euler == -2);
  const auto rp2 = TopologySignature::parse("nonorientable:1");
  CHECK(rp2.euler == 1);
  CHECK_FALSE(rp2.orientable);
  CHECK_FALSE(rp2 == TopologySignature::parse("genus:0"));
  const auto two = TopologySignature::parse("multi:[circle, circle]");
  CHECK_FALSE(two.connected());
  CHECK(two.pieces.size() == 2);
  CHECK(TopologySignature::parse("multi:[torus,sphere]") == TopologySignature::parse("multi:[sphere, torus]"));
  CHECK(TopologySignature::parse("multi:[circle,multi:[circle,circle]]").pieces.size() == 3);
  for (const char* s : {"point", "circle", "sphere", "torus", "genus:3", "nonorientable:2", "multi:[circle,circle]"})
    CHECK(TopologySignature::parse(TopologySignature::parse(s).to_string()) == TopologySignature::parse(s));
  CHECK_THROWS_AS(TopologySignature::parse("klein"), ConfigError);
  CHECK_THROWS_AS(TopologySignature::parse("genus:x"), ConfigError);
  CHECK_THROWS_AS(TopologySignature::parse("multi:[circle,sphere]"), ConfigError);
  CHECK_THROWS_AS(TopologySignature::parse("multi:[circle"), ConfigError);
}

TEST_CASE("counting by signature") {
  ComponentReport report;
  auto add = [&report](TopologySignature s, bool closed = true) {
    Component c;
    c.signature = s;
    c.closed = closed;
    c.classified = closed;
    report.components.push_back(c);
  };
  add(TopologySignature::circle());
  add(TopologySignature::circle());
  CHECK(count_N_sigma(report, TopologySignature::circle()) == 2);
  add(TopologySignature::circle(), false);
  CHECK(count_N_sigma(report, TopologySignature::circle()) == 2);

  ComponentReport mixed;
  for (auto s : {TopologySignature::torus(), TopologySignature::sphere()}) {
    Component c;
    c.signature = s;
    mixed.components.push_back(c);
  }
  CHECK(count_N_sigma(mixed, TopologySignature::torus()) == 1);

  ComponentReport five;
  for (int i = 0; i < 5; ++i) {
    Component c;
    c.signature = TopologySignature::circle();
    five.components.push_back(c);
  }
  const auto pair = TopologySignature::parse("multi:[circle,circle]");
  CHECK(count_N_sigma(five, pair, CountMode::grouped) == 2);
  CHECK(count_N_sigma(five, pair, CountMode::strict) == 0);
}

TEST_CASE("zero crossings on a line") {
  const auto rep = extract_components_hypersurface(
      [](const Eigen::Ref<const Vector>& p) { return std::sin(3.0 * p[0]) + 0.1; }, box(1, 2.0, 401));
  // sin(3x) = -0.1 has three solutions on [-2, 2].
  CHECK(rep.components.size() == 3);
  for (const auto& c : rep.components) CHECK(std::abs(std::sin(3.0 * c.points(0, 0)) + 0.1) < 1e-3);
}

TEST_CASE("circle and empty fixtures") {
  for (int res : {129, 257}) {
    const auto rep = extract_components_hypersurface(circle_fn, box(2, 2.0, res));
    REQUIRE(rep.components.size() == 1);
    CHECK(rep.components[0].closed);
    CHECK(rep.components[0].signature == TopologySignature::circle());
    CHECK(count_N_sigma(rep, TopologySignature::circle()) == 1);
    for (Index j = 0; j < rep.components[0].points.cols(); ++j)
      CHECK(std::abs(rep.components[0].points.col(j).norm() - 1.0) < 1e-3);
  }
  const auto empty =
      extract_components_hypersurface([](const Eigen::Ref<const Vector>& p) { return p.squaredNorm() + 1.0; },
                                      box(2, 2.0, 129));
  CHECK(empty.components.empty());
}

TEST_CASE("vertex zeros trigger the sub-cell offset") {
  // Spacing 0.5 puts (0, +-1) and (+-1, 0) on the lattice.
  const auto rep = extract_components_hypersurface(circle_fn, box(2, 2.0, 9));
  CHECK(rep.offset.norm() > 0.0);
  CHECK(rep.offset.maxCoeff() < 0.5);
  CHECK(count_N_sigma(rep, TopologySignature::circle()) == 1);
  const auto again = extract_components_hypersurface(circle_fn, box(2, 2.0, 9));
  CHECK(again.offset == rep.offset);
  CHECK(again.components[0].points == rep.components[0].points);
}

TEST_CASE("ambiguous saddle with zero center value is reported") {
  Vector values = Vector::Ones(9);
  values[0] = 1.0;
  values[1] = -1.0;
  values[4] = 1.0;
  values[3] = -1.0;
  CHECK_THROWS_AS(components_from_values(values, box(2, 1.0, 3), nullptr), DegeneracyError);
  // A nonzero center value resolves the saddle either way.
  values[4] = 2.0;
  CHECK_NOTHROW(components_from_values(values, box(2, 1.0, 3), nullptr));
}

TEST_CASE("saddle decider separates nearby curves") {
  // Level set of xy = c: two hyperbola branches, never joined.
  for (double c : {0.013, -0.013}) {
    const auto rep = extract_components_hypersurface(
        [c](const Eigen::Ref<const Vector>& p) { return p[0] * p[1] - c; }, GridSpec{Vector::Constant(2, 0.011), 1.0, 9});
    CHECK(rep.components.size() == 2);
    for (const auto& comp : rep.components) CHECK_FALSE(comp.closed);
  }
}

TEST_CASE("boundary handling") {
  for (double radius : {1.5, 1.2, 1.05}) {
    const auto rep = extract_components_hypersurface(circle_fn, box(2, radius, 129));
    CHECK(count_N_sigma(rep, TopologySignature::circle()) == 1);
  }
  const auto cut = extract_components_hypersurface(circle_fn, box(2, 0.9, 129));
  CHECK(count_N_sigma(cut, TopologySignature::circle()) == 0);
  CHECK(cut.components.size() == 4);
  for (const auto& c : cut.components) CHECK_FALSE(c.closed);
}

TEST_CASE("torus fixture") {
  for (int res : {97, 193}) {
    const auto rep = extract_components_hypersurface(torus_fn, box(3, 2.0, res));
    REQUIRE(rep.components.size() == 1);
    const auto& c = rep.components[0];
    CHECK(c.closed);
    CHECK(c.manifold);
    CHECK(c.signature.euler == 0);
    CHECK(c.signature.orientable);
    CHECK(count_N_sigma(rep, TopologySignature::torus()) == 1);
  }
}

TEST_CASE("sphere fixtures and Euler additivity") {
  for (int res : {33, 65}) {
    ZeroSetMesh mesh;
    const auto rep = extract_components_hypersurface(circle_fn, box(3, 2.0, res), &mesh);
    REQUIRE(rep.components.size() == 1);
    CHECK(rep.components[0].signature == TopologySignature::sphere());
    CHECK(count_N_sigma(rep, TopologySignature::sphere()) == 1);
    CHECK(static_cast<Index>(mesh.triangles.size()) > 0);
  }
  auto two = [](const Eigen::Ref<const Vector>& p) {
    Vector a = p, b = p;
    a[0] -= 1.0;
    b[0] += 1.0;
    return (a.squaredNorm() - 0.36) * (b.squaredNorm() - 0.36);
  };
  const auto rep = extract_components_hypersurface(two, box(3, 2.0, 65));
  REQUIRE(rep.components.size() == 2);
  int total = 0;
  for (const auto& c : rep.components) total += c.signature.euler;
  CHECK(total == 4);
  CHECK(count_N_sigma(rep, TopologySignature::sphere()) == 2);
  CHECK(count_N_sigma(rep, TopologySignature::parse("multi:[sphere,sphere]"), CountMode::grouped) == 1);
}

TEST_CASE("genus two fixture") {
  const auto rep = extract_components_hypersurface(double_torus_fn, box(3, 2.5, 129));
  REQUIRE(rep.components.size() == 1);
  CHECK(rep.components[0].signature == TopologySignature::genus(2));
}

TEST_CASE("ball restriction is monotone in the radius") {
  auto blobs = [](const Eigen::Ref<const Vector>& p) { return std::cos(2.0 * p[0]) * std::cos(2.0 * p[1]) + 0.3; };
  const auto rep = extract_components_hypersurface(blobs, box(2, 6.0, 241));
  Index previous = 0;
  for (double R : {1.0, 2.0, 3.0, 4.0, 5.0, 6.0}) {
    const auto inside = restrict_to_ball(rep, Vector::Zero(2), R);
    const Index count = count_N_sigma(inside, TopologySignature::circle());
    CHECK(count >= previous);
    previous = count;
  }
  CHECK(previous > 4);
}

TEST_CASE("codimension two fixtures") {
  auto sphere = [](const Eigen::Ref<const Vector>& p) { return p.squaredNorm() - 1.0; };
  auto plane = [](double h) { return [h](const Eigen::Ref<const Vector>& p) { return p[2] - h; }; };
  const auto hit = extract_components_codim_r({sphere, plane(0.5)}, box(3, 2.0, 41));
  CHECK(hit.components.size() == 1);
  CHECK_FALSE(hit.uncertain());
  CHECK(count_N_sigma(hit, TopologySignature::circle()) == 1);
  for (Index j = 0; j < hit.components[0].points.cols(); ++j) {
    CHECK(std::abs(hit.components[0].points.col(j).norm() - 1.0) < 1e-8);
    CHECK(std::abs(hit.components[0].points(2, j) - 0.5) < 1e-8);
  }
  const auto miss = extract_components_codim_r({sphere, plane(2.0)}, box(3, 2.0, 41));
  CHECK(miss.components.empty());
  CHECK_THROWS_AS(extract_components_codim_r({sphere}, box(3, 2.0, 9)), ConfigError);
}

TEST_CASE("random field pair: isolated common zeros agree with a finer sign count") {
  const RandomStream root(2718);
  for (int trial = 0; trial < 4; ++trial) {
    const auto fields = sample_field_tuple(2, 2, 2, 256, root.child(static_cast<std::uint64_t>(trial)));
    const PointFunction f0 = [&](const Eigen::Ref<const Vector>& p) { return fields[0](p); };
    const PointFunction f1 = [&](const Eigen::Ref<const Vector>& p) { return fields[1](p); };
    const GridSpec coarse = box(2, 3.0, 61);
    const auto rep = extract_components_codim_r({f0, f1}, coarse);
    CHECK_FALSE(rep.uncertain());
    for (const auto& c : rep.components) CHECK(c.signature == TopologySignature::point());

    // Oracle: walk the zero curve of f0 on a 4x finer grid and count sign
    // changes of f1 along it.
    const GridSpec fine = box(2, 3.0, 4 * 60 + 1);
    ZeroSetMesh mesh;
    const auto curve = components_from_values(fields[0].on_grid(fine), fine, &mesh);
    (void)curve;
    Vector g(mesh.vertices.cols());
    for (Index v = 0; v < g.size(); ++v) g[v] = fields[1](Vector(mesh.vertices.col(v)));
    Index changes = 0;
    for (const auto& s : mesh.segments) changes += (g[s[0]] > 0) != (g[s[1]] > 0);
    CHECK(static_cast<Index>(rep.components.size()) == changes);
  }
}

TEST_CASE("cube-sphere grid") {
  const SphereGrid grid(17);
  CHECK(grid.size() == 6 * 16 * 16 + 2);
  CHECK(static_cast<Index>(grid.quads().size()) == 6 * 16 * 16);
  CHECK(static_cast<Index>(grid.representatives().size()) * 2 == grid.size());
  for (Index v = 0; v < grid.size(); ++v) {
    CHECK(grid.points().col(v).norm() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(grid.points().col(grid.antipode()[v]) == -grid.points().col(v));
  }
  const SphereGrid turned = grid.rotated(0.3);
  for (Index v = 0; v < turned.size(); ++v) CHECK(turned.points().col(turned.antipode()[v]) == -turned.points().col(v));
  const Matrix lattice = cube_sphere_lattice(2, 17);
  CHECK(lattice.cols() == grid.size());
  CHECK(cube_sphere_lattice(3, 5).cols() == 5 * 5 * 5 * 5 - 3 * 3 * 3 * 3);
}

TEST_CASE("great circle and antipodal small circles") {
  const SphereGrid grid(65);
  RandomStream rng(8);
  const Vector a = rng.normal_vector(3);
  const auto linear = sphere_components_from_values(a.transpose() * grid.points(), grid);
  REQUIRE(linear.components.size() == 1);
  CHECK(count_N_sigma(linear, TopologySignature::circle()) == 1);
  const auto q = antipodal_quotient(linear, grid);
  CHECK_FALSE(q.pairing_mismatch);
  CHECK(q.invariant_components == 1);
  CHECK(q.components.size() == 1);
  CHECK(count_N_sigma(q, TopologySignature::circle()) == 1);

  const Vector axis = Vector(a).normalized();
  const Vector caps = (axis.transpose() * grid.points()).array().square() - 0.64;
  const auto two = sphere_components_from_values(caps, grid);
  CHECK(two.components.size() == 2);
  const auto q2 = antipodal_quotient(two, grid);
  CHECK_FALSE(q2.pairing_mismatch);
  CHECK(q2.paired_components == 2);
  CHECK(q2.components.size() == 1);
  CHECK_THROWS_AS(antipodal_quotient(two, SphereGrid(33)), ConfigError);
}

TEST_CASE("random quartic curve: quotient count agrees with geometric pairing") {
  const SphereGrid grid(97);
  const auto basis = make_basis({2, 4, 1, 2});
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    RandomStream rng(seed);
    const auto P = sample_polynomial_tuple(basis, 1, rng)[0];
    const Vector values = grid.expand(P.evaluate_many(grid.representative_points()), 1);
    const auto rep = sphere_components_from_values(values, grid);
    const auto q = antipodal_quotient(rep, grid);
    CHECK_FALSE(q.pairing_mismatch);
    CHECK(static_cast<Index>(q.components.size()) == q.invariant_components + q.paired_components / 2);

    // Independent pairing: a component is invariant when its point cloud is
    // symmetric, otherwise its mirror is the component nearest to -centroid.
    Index invariant = 0, paired = 0;
    for (const auto& c : rep.components) {
      const Vector centroid = c.points.rowwise().mean();
      if (centroid.norm() < 1e-9) {
        ++invariant;
        continue;
      }
      for (const auto& d : rep.components)
        if (d.points.cols() == c.points.cols() && (Vector(d.points.rowwise().mean()) + centroid).norm() < 1e-9) ++paired;
    }
    CHECK(invariant == q.invariant_components);
    CHECK(paired == q.paired_components);
    // Even degree: P(-x) = P(x), so the zero set is antipodally symmetric.
    CHECK(static_cast<Index>(rep.components.size()) == invariant + paired);
  }
}

TEST_CASE("report JSON and OBJ export") {
  ZeroSetMesh mesh;
  const auto rep = extract_components_hypersurface(circle_fn, box(3, 2.0, 17), &mesh);
  const auto j = nlohmann::json::parse(report_json(rep));
  CHECK(j["components"].size() == 1);
  CHECK(j["components"][0]["signature"] == "sphere");
  const auto path = (std::filesystem::temp_directory_path() / "randhyp_sphere.obj").string();
  write_obj(mesh, path);
  std::ifstream in(path);
  Index v = 0, f = 0;
  for (std::string line; std::getline(in, line);) {
    v += line.rfind("v ", 0) == 0;
    f += line.rfind("f ", 0) == 0;
  }
  CHECK(v == mesh.vertices.cols());
  CHECK(f == static_cast<Index>(mesh.triangles.size()));
  std::filesystem::remove(path);
}
