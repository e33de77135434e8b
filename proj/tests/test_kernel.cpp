#include <doctest.h>

#include "randhyp/kernel.hpp"

#include <numbers>

using namespace randhyp;

namespace {
constexpr double pi = std::numbers::pi;

Vector point(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}
} // namespace

TEST_CASE("limit kernel closed form") {
  const LimitKernelSpec two{2, 2};
  CHECK(limit_kernel(two, point({0.3, -1.0}), point({0.3, -1.0})) == doctest::Approx(pi).epsilon(1e-14));
  const LimitKernelSpec one{1, 1};
  for (double d : {1e-6, 5e-5, 1e-4, 0.3, 1.0, 2.5, 7.0, 19.0}) {
    CHECK(limit_kernel(one, point({d}), point({0.0})) == doctest::Approx(2.0 * std::sin(d) / d).epsilon(1e-13));
  }
  // The series branch joins the Bessel branch continuously.
  for (int N : {1, 2, 3, 4}) {
    const double below = limit_kernel_radial(N, 0.99999e-4);
    const double above = limit_kernel_radial(N, 1.00001e-4);
    CHECK(below == doctest::Approx(above).epsilon(1e-12));
    CHECK(limit_kernel_radial(N, 0.0) == doctest::Approx(unit_ball_volume(N)).epsilon(1e-14));
  }
  CHECK(static_cast<double>(limit_kernel_radial<long double>(2, 1.5L)) ==
        doctest::Approx(limit_kernel_radial(2, 1.5)).epsilon(1e-14));
}

TEST_CASE("limit kernel is stationary and isotropic") {
  RandomStream rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const LimitKernelSpec spec{3, 3};
    const Vector u = 3.0 * rng.normal_vector(3), v = 3.0 * rng.normal_vector(3), t = 5.0 * rng.normal_vector(3);
    const double base = limit_kernel(spec, u, v);
    CHECK(std::abs(limit_kernel(spec, Vector(u + t), Vector(v + t)) - base) < 1e-10);
    const Eigen::Matrix3d rot =
        Eigen::AngleAxisd(rng.uniform() * 2 * pi, Eigen::Vector3d(rng.normal_vector(3)).normalized()).toRotationMatrix();
    CHECK(std::abs(limit_kernel(spec, Vector(rot * u), Vector(rot * v)) - base) < 1e-10);
    CHECK(limit_kernel(spec, v, u) == base);
  }
}

TEST_CASE("limit kernel matrices are positive semidefinite") {
  RandomStream rng(12);
  for (int N : {1, 2, 3}) {
    const LimitKernelSpec spec{N, N};
    Matrix pts(N, 20);
    for (Index j = 0; j < 20; ++j) pts.col(j) = 2.0 * rng.normal_vector(N);
    Matrix k(20, 20);
    for (Index i = 0; i < 20; ++i)
      for (Index j = 0; j < 20; ++j) k(i, j) = limit_kernel(spec, pts.col(i), pts.col(j));
    Eigen::SelfAdjointEigenSolver<Matrix> es(k);
    CHECK(es.eigenvalues().minCoeff() >= -1e-8);
  }
}

TEST_CASE("quadrature oracle") {
  const LimitKernelSpec three{3, 3};
  CHECK(limit_kernel_quadrature(three, point({1, 2, 3}), point({1, 2, 3}), 1e-10) ==
        doctest::Approx(4.0 * pi / 3.0).epsilon(1e-10));
  const LimitKernelSpec two{2, 1};
  const double a = limit_kernel_quadrature(two, point({0.4}), point({2.1}), 1e-10);
  const double b = limit_kernel_quadrature(two, point({2.1}), point({0.4}), 1e-10);
  CHECK(a == doctest::Approx(b).epsilon(1e-12));
  CHECK_THROWS_AS(limit_kernel_quadrature(two, point({0.0}), point({1.0}), 0.0), ConfigError);
  CHECK_THROWS_AS(limit_kernel_quadrature(three, point({0, 0, 0}), point({9, 0, 0}), 1e-12, 1000), QuadratureError);
}

TEST_CASE("closed form and quadrature agree on random pairs") {
  RandomStream rng(2024);
  for (int N : {1, 2, 3}) {
    for (int n = 1; n <= N; ++n) {
      const LimitKernelSpec spec{N, n};
      for (int trial = 0; trial < 10; ++trial) {
        const Vector u = 2.0 * rng.normal_vector(n), v = 2.0 * rng.normal_vector(n);
        CHECK(std::abs(limit_kernel(spec, u, v) - limit_kernel_quadrature(spec, u, v, 1e-10)) < 1e-8);
      }
    }
  }
}

TEST_CASE("chart frames and exponential map") {
  for (auto [N, n] : std::vector<std::pair<int, int>>{{1, 1}, {2, 2}, {2, 1}, {3, 2}}) {
    Vector x = Vector::Zero(N + 1);
    x[0] = 0.6;
    x[n] = 0.8;
    const ChartAtPoint chart(x, n);
    const Matrix& f = chart.frame();
    CHECK((f.transpose() * f - Matrix::Identity(N, N)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((f.transpose() * x).cwiseAbs().maxCoeff() < 1e-14);
    // First n frame vectors stay inside the equatorial R^(n+1).
    CHECK(f.block(n + 1, 0, N - n, n).cwiseAbs().maxCoeff() == 0.0);
    RandomStream rng(N * 10 + n);
    for (int k = 0; k < 50; ++k) {
      const Vector u = rng.normal_vector(N);
      CHECK(std::abs(chart.exp(u).norm() - 1.0) < 1e-12);
      CHECK(geodesic_distance(chart.exp(0.1 * u), x) == doctest::Approx(0.1 * u.norm()).epsilon(1e-10));
    }
  }
  CHECK_THROWS_AS(ChartAtPoint(Vector::Unit(3, 2), 1), ConfigError);
  CHECK_THROWS_AS(ChartAtPoint(Vector::Constant(3, 1.0), 2), ConfigError);
}

TEST_CASE("rescaled kernel") {
  const auto spec = EnsembleSpec{2, 12, 1, 2};
  const auto basis = make_basis(spec);
  const auto chart = ChartAtPoint::north_pole(2, 2);
  const Vector u = point({0.5, -1.2}), v = point({2.0, 0.3});
  CHECK(rescaled_kernel(*basis, chart, 2.0, u, v) == doctest::Approx(rescaled_kernel(*basis, chart, 2.0, v, u)));
  CHECK_THROWS_AS(rescaled_kernel(*basis, chart, 2.0, point({40.0, 0.0}), v), ConfigError);
  // Whitened and harmonic bases give the same rescaled kernel.
  const auto whitened = make_basis(spec, BasisKind::monomial);
  CHECK(rescaled_kernel(*whitened, chart, 2.0, u, v) ==
        doctest::Approx(rescaled_kernel(*basis, chart, 2.0, u, v)).epsilon(1e-9));
}

TEST_CASE("calibration recovers the ambient exponent and the density constant") {
  // K_m(x,x) = d_m / |S^N| ~ m^N / (N! |S^N|) and K(0,0) = |B_N|.
  for (auto [N, n] : std::vector<std::pair<int, int>>{{1, 1}, {2, 2}, {2, 1}}) {
    const auto cal = calibrate_kernel(N, n);
    CHECK(cal.scale_exponent == N);
    const double expected = 1.0 / (std::tgamma(N + 1.0) * unit_sphere_area(N) * unit_ball_volume(N));
    CHECK(cal.constant == doctest::Approx(expected).epsilon(5e-3));
  }
  CHECK_THROWS_AS(calibrate_kernel(1, 1, {10}), ConfigError);
}

TEST_CASE("convergence report") {
  const auto one = convergence_report(1, 1, {10});
  CHECK(one.rows.size() == 1);
  CHECK(one.rows[0].degree == 10);
  CHECK(one.grid.cols() == 9);

  const auto rep = convergence_report(1, 1, {10, 20, 40, 80});
  REQUIRE(rep.rows.size() == 4);
  for (std::size_t i = 1; i < rep.rows.size(); ++i) CHECK(rep.rows[i].sup_error < rep.rows[i - 1].sup_error);

  const auto grid = kernel_grid(2, 3.0, 9);
  for (Index j = 0; j < grid.cols(); ++j) CHECK(grid.col(j).norm() <= 3.0 + 1e-12);
  CHECK(grid.cols() < 81);
}
