#include "randhyp/experiments.hpp"

#include "randhyp/kernel.hpp"
#include "randhyp/parallel.hpp"

#include <algorithm>
#include <map>
#include <numbers>

namespace randhyp {

// ---------------------------------------------------------------- packing

namespace {

// Spatial hash over unit vectors; bucket width equals the exclusion chord.
class CenterIndex {
public:
  CenterIndex(int dims, double chord) : dims_(dims), chord_(chord) {}

  std::vector<Index> bucket(const Eigen::Ref<const Vector>& p) const {
    std::vector<Index> b(dims_);
    for (int a = 0; a < dims_; ++a) b[a] = static_cast<Index>(std::floor((p[a] + 1.0) / chord_));
    return b;
  }

  /// Smallest chord distance from p to a stored center (or +inf).
  double nearest(const Eigen::Ref<const Vector>& p) const {
    const auto b = bucket(p);
    int neighbors = 1;
    for (int a = 0; a < dims_; ++a) neighbors *= 3;
    double best = std::numeric_limits<double>::infinity();
    std::vector<Index> nb(dims_);
    for (int code = 0; code < neighbors; ++code) {
      int rest = code;
      for (int a = 0; a < dims_; ++a) {
        nb[a] = b[a] + rest % 3 - 1;
        rest /= 3;
      }
      const auto it = buckets_.find(nb);
      if (it == buckets_.end()) continue;
      for (Index j : it->second) best = std::min(best, (points_[j] - p).norm());
    }
    return best;
  }

  void insert(const Eigen::Ref<const Vector>& p) {
    buckets_[bucket(p)].push_back(static_cast<Index>(points_.size()));
    points_.push_back(p);
  }

  const std::vector<Vector>& points() const { return points_; }

private:
  int dims_;
  double chord_;
  std::map<std::vector<Index>, std::vector<Index>> buckets_;
  std::vector<Vector> points_;
};

double chord_of(double angle) { return 2.0 * std::sin(0.5 * angle); }

} // namespace

PackingResult pack_balls(int sphere_dim, double radius) {
  if (sphere_dim < 1) throw ConfigError("pack_balls: sphere dimension must be >= 1");
  if (!(radius > 0.0) || radius >= 0.25 * std::numbers::pi) throw ConfigError("pack_balls: need 0 < radius < pi/4");
  const double exclusion = chord_of(2.0 * radius);
  CenterIndex index(sphere_dim + 1, exclusion);
  PackingResult out;
  out.sphere_dim = sphere_dim;
  out.radius = radius;
  // Lattice steps of about radius / 4, then two hole-filling passes at 2x and 4x.
  int res = static_cast<int>(std::ceil(2.0 * std::numbers::pi / radius)) + 1;
  for (int pass = 0; pass < 3; ++pass, res = 2 * res - 1) {
    const Matrix lattice = cube_sphere_lattice(sphere_dim, res);
    out.candidates += lattice.cols();
    Index added = 0;
    for (Index j = 0; j < lattice.cols(); ++j) {
      if (index.nearest(lattice.col(j)) >= exclusion) {
        index.insert(lattice.col(j));
        ++added;
      }
    }
    ++out.passes;
    if (pass > 0 && added == 0) break;
  }
  out.centers.resize(sphere_dim + 1, static_cast<Index>(index.points().size()));
  for (std::size_t j = 0; j < index.points().size(); ++j) out.centers.col(static_cast<Index>(j)) = index.points()[j];
  return out;
}

double min_center_distance(const PackingResult& packing) {
  double best = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < packing.count(); ++i)
    for (Index j = i + 1; j < packing.count(); ++j)
      best = std::min(best, geodesic_distance(packing.centers.col(i), packing.centers.col(j)));
  return best;
}

CoverageAudit audit_coverage(const PackingResult& packing, Index probes, RandomStream& rng) {
  CenterIndex index(packing.sphere_dim + 1, chord_of(2.0 * packing.radius));
  for (Index j = 0; j < packing.count(); ++j) index.insert(packing.centers.col(j));
  CoverageAudit audit;
  audit.probes = probes;
  const double limit = 2.0 * packing.radius;
  for (Index t = 0; t < probes; ++t) {
    const Vector p = rng.normal_vector(packing.sphere_dim + 1).normalized();
    double chord = index.nearest(p);
    // Outside the neighboring buckets: fall back to a full scan.
    if (!std::isfinite(chord)) {
      chord = 2.0;
      for (Index j = 0; j < packing.count(); ++j) chord = std::min(chord, (packing.centers.col(j) - p).norm());
    }
    const double dist = 2.0 * std::asin(std::min(1.0, 0.5 * chord));
    audit.worst = std::max(audit.worst, dist);
    if (dist > limit) ++audit.uncovered;
  }
  return audit;
}

double packing_constant(int sphere_dim, double R) {
  return unit_sphere_area(sphere_dim) / (unit_ball_volume(sphere_dim) * std::pow(3.0 * R, sphere_dim));
}

// ---------------------------------------------------------------- statistics

WilsonInterval wilson_interval(Index successes, Index trials, double z) {
  if (trials <= 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double center = (p + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n);
  // The exact interval always brackets p; clamp away rounding at the ends.
  return {std::clamp(center - half, 0.0, p), std::clamp(center + half, p, 1.0)};
}

void check_degeneracy_budget(Index degenerate, Index total, const std::string& what) {
  if (total > 0 && static_cast<double>(degenerate) > kDegeneracyBudget * static_cast<double>(total))
    throw DegeneracyBudgetError(what + ": " + std::to_string(degenerate) + " of " + std::to_string(total) +
                                " trials were degenerate (budget 1%)");
}

namespace {

struct MeanStats {
  double mean = 0, variance = 0, std_error = 0;
};

MeanStats mean_stats(const std::vector<double>& xs) {
  MeanStats s;
  if (xs.empty()) return s;
  const double n = static_cast<double>(xs.size());
  for (double x : xs) s.mean += x;
  s.mean /= n;
  if (xs.size() > 1) {
    for (double x : xs) s.variance += (x - s.mean) * (x - s.mean);
    s.variance /= n - 1;
  }
  s.std_error = std::sqrt(s.variance / n);
  return s;
}

} // namespace

// ---------------------------------------------------------------- barrier

void BarrierConfig::validate() const {
  if (variety_dim < 1 || variety_dim > 3) throw ConfigError("barrier: n must be 1, 2 or 3");
  if (freq_dim() < variety_dim) throw ConfigError("barrier: N must be >= n");
  if (trials < 100) throw ConfigError("barrier: at least 100 trials are required");
  if (radii.empty()) throw ConfigError("barrier: no radii");
  for (double R : radii)
    if (!(R > 0.0)) throw ConfigError("barrier: radii must be positive");
  if (!(spacing > 0.0)) throw ConfigError("barrier: spacing must be positive");
  if (modes < 1) throw ConfigError("barrier: modes must be >= 1");
  if (degree < 0) throw ConfigError("barrier: degree must be >= 0");
  if (sigma.dim != variety_dim - 1) throw ConfigError("barrier: sigma must have dimension n - 1");
}

const BarrierEstimate& BarrierRun::best() const {
  return *std::max_element(estimates.begin(), estimates.end(),
                           [](const auto& a, const auto& b) { return a.ci_low < b.ci_low; });
}

BarrierRun barrier_probability(const BarrierConfig& config, const RandomStream& rng) {
  config.validate();
  const int n = config.variety_dim;
  const int N = config.freq_dim();
  const double r_max = *std::max_element(config.radii.begin(), config.radii.end());
  const double half_width = r_max + 2.0 * config.spacing;
  const int res = std::max(3, static_cast<int>(std::ceil(2.0 * half_width / config.spacing)) + 1);

  BarrierRun run;
  run.config = config;
  run.grid = GridSpec::cube(n, half_width, res);
  run.trials.resize(config.trials);

  // Polynomial model: the grid lives in geodesic normal coordinates scaled by m.
  std::shared_ptr<const OrthonormalBasis> basis;
  std::optional<ChartAtPoint> chart;
  Matrix basis_on_grid;
  auto chart_points = [&](const GridSpec& g) {
    Matrix pts(N + 1, g.size());
    for (Index j = 0; j < g.size(); ++j) pts.col(j) = chart->exp(g.point(j) / config.degree);
    return pts;
  };
  if (config.degree > 0) {
    if (half_width * std::sqrt(static_cast<double>(n)) / config.degree >= std::numbers::pi)
      throw ConfigError("barrier: R/m exceeds the chart radius");
    basis = make_basis({N, config.degree, 1, n});
    chart.emplace(config.base_point ? *config.base_point : Vector(Vector::Unit(N + 1, 0)), n);
    basis_on_grid = basis->evaluate_many(chart_points(run.grid));
  }

  parallel_for(static_cast<std::size_t>(config.trials), config.threads, [&](std::size_t t) {
    RandomStream stream = rng.child(t);
    GridFunction values;
    SpectralFieldSample field;
    Vector coords;
    if (config.degree == 0) {
      field = sample_field_spectral(n, N, config.modes, stream);
      values = [&field](const GridSpec& g) { return field.on_grid(g); };
    } else {
      coords = sample_polynomial_tuple(basis, 1, stream)[0].coords;
      values = [&](const GridSpec& g) -> Vector {
        if (g.center == run.grid.center) return basis_on_grid * coords;
        return basis->evaluate_many(chart_points(g)) * coords;
      };
    }
    BarrierTrial& trial = run.trials[t];
    try {
      const ComponentReport report = extract_components_hypersurface(values, run.grid);
      const Vector center = Vector::Zero(n);
      for (double R : config.radii)
        trial.counts.push_back(count_N_sigma(restrict_to_ball(report, center, R), config.sigma, config.mode));
    } catch (const DegeneracyError&) {
      trial.degenerate = true;
    }
  });

  for (const auto& trial : run.trials) {
    if (trial.degenerate) {
      ++run.degenerate;
      continue;
    }
    for (std::size_t a = 0; a < config.radii.size(); ++a)
      for (std::size_t b = 0; b < config.radii.size(); ++b)
        if (config.radii[a] < config.radii[b] && trial.counts[a] >= 1 && trial.counts[b] < 1) run.monotone = false;
  }
  check_degeneracy_budget(run.degenerate, config.trials, "barrier_probability");

  const Index valid = config.trials - run.degenerate;
  for (std::size_t k = 0; k < config.radii.size(); ++k) {
    BarrierEstimate est;
    est.sigma = config.sigma;
    est.R = config.radii[k];
    if (config.degree > 0) est.degree = config.degree;
    est.trials = valid;
    est.degenerate = run.degenerate;
    for (const auto& trial : run.trials)
      if (!trial.degenerate && trial.counts[k] >= 1) ++est.successes;
    est.p_hat = valid > 0 ? static_cast<double>(est.successes) / static_cast<double>(valid) : 0.0;
    const auto ci = wilson_interval(est.successes, valid);
    est.ci_low = ci.low;
    est.ci_high = ci.high;
    run.estimates.push_back(est);
  }
  return run;
}

// ---------------------------------------------------------------- sphere counting

namespace {

constexpr Index kPointBlock = 2048;
constexpr Index kTrialChunk = 64;

// Points of the equatorial S^2 inside S^N.
Matrix embed(const Matrix& points, int ambient_dim) {
  Matrix out = Matrix::Zero(ambient_dim + 1, points.cols());
  out.topRows(3) = points;
  return out;
}

// rows = points, cols = trials.
Matrix evaluate_block_gemm(const OrthonormalBasis& basis, const Matrix& points, const Matrix& coeffs, int threads) {
  Matrix out(points.cols(), coeffs.cols());
  const std::size_t blocks = static_cast<std::size_t>((points.cols() + kPointBlock - 1) / kPointBlock);
  parallel_for(blocks, threads, [&](std::size_t b) {
    const Index start = static_cast<Index>(b) * kPointBlock;
    const Index len = std::min(kPointBlock, points.cols() - start);
    const Matrix values = basis.evaluate_many(points.middleCols(start, len));
    out.middleRows(start, len).noalias() = values * coeffs;
  });
  return out;
}

struct SphereTrialOutcome {
  bool degenerate = false;
  ComponentReport report;
};

// Zero set of one polynomial on the cube-sphere, with the rotated-grid retry
// on vertex zeros and the optional antipodal quotient.
SphereTrialOutcome sphere_trial(const Vector& rep_values, const OrthonormalBasis& basis, const Vector& coords,
                                const SphereGrid& grid, int ambient_dim, QuotientMode quotient) {
  SphereTrialOutcome out;
  const int parity = basis.spec().degree % 2 == 0 ? 1 : -1;
  try {
    Vector values = grid.expand(rep_values, parity);
    if (values.cwiseAbs().minCoeff() >= kVertexZeroTolerance) {
      out.report = sphere_components_from_values(values, grid);
      if (quotient == QuotientMode::antipodal) out.report = antipodal_quotient(out.report, grid);
      return out;
    }
    const double x = 2.0 * std::numbers::phi;
    const SphereGrid moved = grid.rotated(grid.rotation_angle() + 0.5 * grid.cell_angle() * (x - std::floor(x)));
    const Matrix pts = embed(moved.representative_points(), ambient_dim);
    const Vector rep = basis.evaluate_many(pts) * coords;
    out.report = sphere_components_from_values(moved.expand(rep, parity), moved);
    if (quotient == QuotientMode::antipodal) out.report = antipodal_quotient(out.report, moved);
  } catch (const DegeneracyError&) {
    out.degenerate = true;
  }
  return out;
}

void validate_counting(const SphereCountConfig& c) {
  if (c.ambient_dim < 2) throw ConfigError("sphere counting: N must be >= 2");
  if (c.trials < 1) throw ConfigError("sphere counting: trials must be >= 1");
  if (c.resolution < 3) throw ConfigError("sphere counting: resolution must be >= 3");
  if (c.sigma.dim != 1) throw ConfigError("sphere counting: sigma must be one-dimensional on S^2");
}

// Runs `per_trial(t, outcome)` for every trial of a degree-m ensemble on S^2.
template <class PerTrial>
void for_each_sphere_trial(int degree, const SphereCountConfig& config, const SphereGrid& grid,
                           const RandomStream& stream, PerTrial&& per_trial) {
  const auto basis = make_basis({config.ambient_dim, degree, 1, 2});
  const Matrix pts = embed(grid.representative_points(), config.ambient_dim);
  for (Index start = 0; start < config.trials; start += kTrialChunk) {
    const Index len = std::min<Index>(kTrialChunk, config.trials - start);
    Matrix coeffs(basis->size(), len);
    for (Index t = 0; t < len; ++t) {
      RandomStream s = stream.child(static_cast<std::uint64_t>(start + t));
      coeffs.col(t) = sample_polynomial_tuple(basis, 1, s)[0].coords;
    }
    const Matrix values = evaluate_block_gemm(*basis, pts, coeffs, config.threads);
    parallel_for(static_cast<std::size_t>(len), config.threads, [&](std::size_t t) {
      const Index col = static_cast<Index>(t);
      auto outcome = sphere_trial(values.col(col), *basis, coeffs.col(col), grid, config.ambient_dim, config.quotient);
      per_trial(start + col, outcome);
    });
  }
}

} // namespace

ScalingResult expected_count_scaling(const std::vector<int>& degrees, const SphereCountConfig& config,
                                     const RandomStream& rng) {
  validate_counting(config);
  if (degrees.empty()) throw ConfigError("scaling: no degrees");
  for (std::size_t i = 0; i < degrees.size(); ++i) {
    if (degrees[i] < 1) throw ConfigError("scaling: degrees must be >= 1");
    if (i > 0 && degrees[i] <= degrees[i - 1]) throw ConfigError("scaling: degrees must be increasing");
  }
  const SphereGrid grid(config.resolution);
  ScalingResult result;
  for (int m : degrees) {
    ScalingRow row;
    row.degree = m;
    row.counts.assign(config.trials, 0);
    std::vector<char> degenerate(config.trials, 0);
    for_each_sphere_trial(m, config, grid, rng.child(static_cast<std::uint64_t>(m)),
                          [&](Index t, const SphereTrialOutcome& o) {
                            if (o.degenerate) degenerate[t] = 1;
                            else row.counts[t] = count_N_sigma(o.report, config.sigma, config.mode);
                          });
    std::vector<double> xs;
    for (Index t = 0; t < config.trials; ++t) {
      if (degenerate[t]) ++row.degenerate;
      else xs.push_back(static_cast<double>(row.counts[t]));
    }
    check_degeneracy_budget(row.degenerate, config.trials, "expected_count_scaling");
    row.trials = static_cast<Index>(xs.size());
    const auto s = mean_stats(xs);
    row.mean = s.mean;
    row.variance = s.variance;
    row.std_error = s.std_error;
    result.rows.push_back(std::move(row));
  }

  // Delta method: se(log mean) = se / mean.
  std::vector<double> x, y, w;
  for (const auto& row : result.rows) {
    if (row.std_error <= 0.0 || row.mean <= 0.0) continue;
    x.push_back(std::log(static_cast<double>(row.degree)));
    y.push_back(std::log(row.mean));
    w.push_back(std::pow(row.mean / row.std_error, 2));
  }
  if (x.size() >= 2) {
    double sw = 0, sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sw += w[i];
      sx += w[i] * x[i];
      sy += w[i] * y[i];
    }
    const double mx = sx / sw, my = sy / sw;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sxx += w[i] * (x[i] - mx) * (x[i] - mx);
      sxy += w[i] * (x[i] - mx) * (y[i] - my);
    }
    result.slope = sxy / sxx;
    result.intercept = my - result.slope * mx;
    result.slope_std_error = std::sqrt(1.0 / sxx);
  }
  return result;
}

AssemblyResult lower_bound_assembly(const AssemblyConfig& config, const RandomStream& rng) {
  validate_counting(config.counting);
  if (config.degree < 1) throw ConfigError("assembly: degree must be >= 1");
  const double rho = config.R / config.degree;
  AssemblyResult result;
  result.packing = pack_balls(2, rho);
  const Index balls = result.packing.count();
  const Index trials = config.counting.trials;
  result.counts.assign(trials, 0);
  result.ball_events.assign(trials, 0);
  std::vector<std::vector<char>> hit(trials);
  std::vector<char> degenerate(trials, 0);
  const double cos_rho = std::cos(rho);

  SphereCountConfig counting = config.counting;
  counting.quotient = QuotientMode::none;
  const SphereGrid grid(counting.resolution);
  for_each_sphere_trial(config.degree, counting, grid, rng, [&](Index t, const SphereTrialOutcome& o) {
    if (o.degenerate) {
      degenerate[t] = 1;
      return;
    }
    result.counts[t] = count_N_sigma(o.report, counting.sigma, counting.mode);
    hit[t].assign(balls, 0);
    // Components entirely inside each ball; candidates from the first point.
    std::vector<ComponentReport> inside(balls);
    for (const auto& comp : o.report.components) {
      if (comp.points.cols() == 0) continue;
      const Vector dots0 = result.packing.centers.transpose() * comp.points.col(0);
      for (Index i = 0; i < balls; ++i) {
        if (dots0[i] <= cos_rho) continue;
        const Vector dots = comp.points.transpose() * result.packing.centers.col(i);
        if (dots.minCoeff() > cos_rho) inside[i].components.push_back(comp);
      }
    }
    for (Index i = 0; i < balls; ++i)
      if (!inside[i].components.empty() && count_N_sigma(inside[i], counting.sigma, counting.mode) >= 1) {
        hit[t][i] = 1;
        ++result.ball_events[t];
      }
  });

  std::vector<double> counts, sums;
  result.p_hat.assign(balls, 0.0);
  for (Index t = 0; t < trials; ++t) {
    if (degenerate[t]) {
      ++result.degenerate;
      continue;
    }
    counts.push_back(static_cast<double>(result.counts[t]));
    sums.push_back(static_cast<double>(result.ball_events[t]));
    if (result.counts[t] < result.ball_events[t]) result.per_trial_inequality = false;
    for (Index i = 0; i < balls; ++i) result.p_hat[i] += hit[t][i];
  }
  check_degeneracy_budget(result.degenerate, trials, "lower_bound_assembly");
  const double valid = static_cast<double>(counts.size());
  for (double& p : result.p_hat) p /= valid;
  const auto c = mean_stats(counts), s = mean_stats(sums);
  result.mean_count = c.mean;
  result.mean_count_se = c.std_error;
  result.sum_p = s.mean;
  result.sum_p_se = s.std_error;
  result.holds = result.mean_count + kZ95 * std::hypot(result.mean_count_se, result.sum_p_se) >= result.sum_p;
  return result;
}

// ---------------------------------------------------------------- Kac-Rice

double kac_rice_zero_count(int degree) {
  if (degree < 1) throw ConfigError("kac_rice_zero_count: degree must be >= 1");
  const auto basis = make_basis({1, degree, 1, 1});
  const Vector x0 = Vector::Unit(2, 0);
  auto k = [&](double delta) {
    Vector y(2);
    y << std::cos(delta), std::sin(delta);
    return covariance_exact(*basis, x0, y);
  };
  const double h = 0.01 / degree;
  const double k0 = k(0.0);
  const double second = (-k(2 * h) + 16 * k(h) - 30 * k0 + 16 * k(-h) - k(-2 * h)) / (12 * h * h);
  const double lambda2 = -second;
  // Expected zeros on a curve of length L: (L / pi) sqrt(lambda2 / lambda0).
  const double length = 2.0 * std::numbers::pi;
  return length / std::numbers::pi * std::sqrt(lambda2 / k0);
}

KacRiceMonteCarlo kac_rice_monte_carlo(int degree, Index trials, const RandomStream& rng, int grid_points,
                                       int threads) {
  if (degree < 1) throw ConfigError("kac_rice_monte_carlo: degree must be >= 1");
  if (trials < 1) throw ConfigError("kac_rice_monte_carlo: trials must be >= 1");
  if (grid_points < 8 * degree) throw ConfigError("kac_rice_monte_carlo: grid too coarse for the degree");
  const auto basis = make_basis({1, degree, 1, 1});
  Matrix pts(2, grid_points);
  for (int j = 0; j < grid_points; ++j) {
    const double theta = 2.0 * std::numbers::pi * j / grid_points;
    pts(0, j) = std::cos(theta);
    pts(1, j) = std::sin(theta);
  }
  const Matrix B = basis->evaluate_many(pts);
  KacRiceMonteCarlo out;
  out.degree = degree;
  out.trials = trials;
  out.counts.assign(trials, 0);
  const Index chunk = 1024;
  for (Index start = 0; start < trials; start += chunk) {
    const Index len = std::min(chunk, trials - start);
    Matrix coeffs(basis->size(), len);
    for (Index t = 0; t < len; ++t) {
      RandomStream s = rng.child(static_cast<std::uint64_t>(start + t));
      coeffs.col(t) = sample_polynomial_tuple(basis, 1, s)[0].coords;
    }
    const Matrix values = B * coeffs;
    parallel_for(static_cast<std::size_t>(len), threads, [&](std::size_t t) {
      const auto col = values.col(static_cast<Index>(t));
      Index changes = 0;
      for (int j = 0; j < grid_points; ++j) changes += (col[j] > 0) != (col[(j + 1) % grid_points] > 0);
      out.counts[start + static_cast<Index>(t)] = changes;
    });
  }
  std::vector<double> xs(out.counts.begin(), out.counts.end());
  const auto s = mean_stats(xs);
  out.mean = s.mean;
  out.std_error = s.std_error;
  out.oracle = kac_rice_zero_count(degree);
  out.relative_error = std::abs(out.mean - out.oracle) / out.oracle;
  return out;
}

AffineFit fit_affine(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("fit_affine: need matching samples, at least two");
  const Index k = static_cast<Index>(x.size());
  Matrix design(k, 2);
  Vector rhs(k);
  for (Index i = 0; i < k; ++i) {
    design(i, 0) = x[i];
    design(i, 1) = 1.0;
    rhs[i] = y[i];
  }
  const Vector coef = design.colPivHouseholderQr().solve(rhs);
  AffineFit fit{coef[0], coef[1], 0.0};
  for (Index i = 0; i < k; ++i)
    fit.max_relative_residual =
        std::max(fit.max_relative_residual, std::abs(y[i] - (coef[0] * x[i] + coef[1])) / std::abs(y[i]));
  return fit;
}

} // namespace randhyp
