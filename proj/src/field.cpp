#include "randhyp/field.hpp"

#include <json.hpp>

#include <complex>
#include <fstream>
#include <numbers>

namespace randhyp {

void GridSpec::validate() const {
  if (center.size() < 1) throw ConfigError("grid: dimension must be >= 1");
  if (!(radius > 0.0)) throw ConfigError("grid: radius must be positive");
  if (resolution < 3) throw ConfigError("grid: resolution must be >= 3");
}

Index GridSpec::size() const {
  Index total = 1;
  for (int a = 0; a < dim(); ++a) total *= resolution;
  return total;
}

Vector GridSpec::point(Index flat) const {
  Vector p(dim());
  for (int a = dim() - 1; a >= 0; --a) {
    p[a] = coordinate(a, flat % resolution);
    flat /= resolution;
  }
  return p;
}

GridSpec GridSpec::shifted(const Eigen::Ref<const Vector>& shift) const {
  GridSpec out = *this;
  out.center += shift;
  return out;
}

Matrix grid_points(const GridSpec& grid) {
  Matrix out(grid.dim(), grid.size());
  for (Index j = 0; j < grid.size(); ++j) out.col(j) = grid.point(j);
  return out;
}

double SpectralFieldSample::evaluate(const Eigen::Ref<const Vector>& x) const {
  if (x.size() != eval_dim) throw ConfigError("SpectralFieldSample: point dimension does not match eval_dim");
  const Vector proj = frequencies.topRows(eval_dim).transpose() * x;
  return amplitude * (proj + phases).array().cos().sum();
}

Vector SpectralFieldSample::on_grid(const GridSpec& grid) const {
  using Complex = std::complex<double>;
  using ComplexMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>;
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  if (grid.dim() != eval_dim) throw ConfigError("SpectralFieldSample::on_grid: grid dimension mismatch");
  const int n = eval_dim;
  const Index res = grid.resolution;
  const Index M = modes();
  if (n > 3) {
    Vector out(grid.size());
    for (Index j = 0; j < grid.size(); ++j) out[j] = evaluate(grid.point(j));
    return out;
  }
  // exp(i xi_a x_a) per axis, res x M.
  std::vector<ComplexMatrix> axis(n, ComplexMatrix(res, M));
  for (int a = 0; a < n; ++a)
    for (Index j = 0; j < M; ++j)
      for (Index i = 0; i < res; ++i) axis[a](i, j) = std::polar(1.0, frequencies(a, j) * grid.coordinate(a, i));
  Eigen::Matrix<Complex, Eigen::Dynamic, 1> weights(M);
  for (Index j = 0; j < M; ++j) weights[j] = std::polar(amplitude, phases[j]);

  Vector out(grid.size());
  if (n == 1) {
    out = (axis[0] * weights).real();
  } else if (n == 2) {
    const ComplexMatrix prod = (axis[0] * weights.asDiagonal()) * axis[1].transpose();
    Eigen::Map<RowMajor>(out.data(), res, res) = prod.real();
  } else {
    const ComplexMatrix right = axis[2].transpose();
    for (Index i0 = 0; i0 < res; ++i0) {
      const Eigen::Matrix<Complex, Eigen::Dynamic, 1> w = weights.cwiseProduct(axis[0].row(i0).transpose());
      const ComplexMatrix slice = (axis[1] * w.asDiagonal()) * right;
      Eigen::Map<RowMajor>(out.data() + i0 * res * res, res, res) = slice.real();
    }
  }
  return out;
}

SpectralFieldSample sample_field_spectral(int eval_dim, int freq_dim, int modes, RandomStream& rng) {
  LimitKernelSpec{freq_dim, eval_dim}.validate();
  if (modes < 1) throw ConfigError("sample_field_spectral: need at least one frequency");
  SpectralFieldSample out;
  out.eval_dim = eval_dim;
  out.frequencies.resize(freq_dim, modes);
  out.phases.resize(modes);
  for (int j = 0; j < modes; ++j) {
    // Uniform in the unit ball: Gaussian direction, radius U^(1/N).
    Vector dir = rng.normal_vector(freq_dim);
    double norm = dir.norm();
    while (norm == 0.0) {
      dir = rng.normal_vector(freq_dim);
      norm = dir.norm();
    }
    const double radius = std::pow(rng.uniform(), 1.0 / freq_dim);
    out.frequencies.col(j) = dir * (radius / norm);
    out.phases[j] = 2.0 * std::numbers::pi * rng.uniform();
  }
  out.amplitude = std::sqrt(2.0 * unit_ball_volume(freq_dim) / modes);
  return out;
}

std::vector<SpectralFieldSample> sample_field_tuple(int r, int eval_dim, int freq_dim, int modes,
                                                    const RandomStream& rng) {
  if (r < 1) throw ConfigError("sample_field_tuple: r must be >= 1");
  std::vector<SpectralFieldSample> out;
  out.reserve(r);
  for (int i = 0; i < r; ++i) {
    RandomStream child = rng.child(static_cast<std::uint64_t>(i));
    out.push_back(sample_field_spectral(eval_dim, freq_dim, modes, child));
  }
  return out;
}

ExactFieldSample sample_field_exact(const Eigen::Ref<const Matrix>& points, const LimitKernelSpec& spec,
                                    RandomStream& rng) {
  spec.validate();
  if (points.rows() != spec.eval_dim) throw ConfigError("sample_field_exact: point dimension mismatch");
  const Index k = points.cols();
  if (k > kMaxExactGridPoints) throw ConfigError("sample_field_exact: too many points for a dense factorization");
  Matrix cov(k, k);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j <= i; ++j) cov(i, j) = cov(j, i) = limit_kernel(spec, points.col(i), points.col(j));
  const Vector z = rng.normal_vector(k);
  for (double jitter = 1e-10; jitter <= 1.0000001e-6; jitter *= 10.0) {
    Eigen::LLT<Matrix> llt(cov + jitter * Matrix::Identity(k, k));
    if (llt.info() != Eigen::Success) continue;
    return {llt.matrixL() * z, jitter};
  }
  throw ConditioningError("sample_field_exact: kernel matrix not factorizable with jitter up to 1e-6");
}

ExactFieldSample sample_field_exact_grid(const GridSpec& grid, const LimitKernelSpec& spec, RandomStream& rng) {
  grid.validate();
  if (grid.size() > kMaxExactGridPoints) throw ConfigError("sample_field_exact_grid: grid exceeds 10^4 points");
  return sample_field_exact(grid_points(grid), spec, rng);
}

void write_grid_dump(const std::string& prefix, const GridSpec& grid, const Vector& values, std::uint64_t seed,
                     const std::string& sampler) {
  std::ofstream bin(prefix + ".bin", std::ios::binary);
  if (!bin) throw ConfigError("write_grid_dump: cannot open " + prefix + ".bin");
  bin.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));

  nlohmann::json header;
  header["schema"] = 1;
  header["layout"] = "row-major, last axis fastest, float64 little-endian";
  header["grid"] = {{"center", std::vector<double>(grid.center.data(), grid.center.data() + grid.center.size())},
                    {"radius", grid.radius},
                    {"resolution", grid.resolution}};
  header["points"] = values.size();
  header["seed"] = seed;
  header["sampler"] = sampler;
  std::ofstream js(prefix + ".json");
  js << header.dump(2) << '\n';
}

} // namespace randhyp
