#pragma once

#include "randhyp/core.hpp"
#include "randhyp/ensemble.hpp"
#include "randhyp/field.hpp"
#include "randhyp/rng.hpp"
#include "randhyp/topology.hpp"

#include <optional>
#include <vector>

namespace randhyp {

// ---------------------------------------------------------------- packing

/// Disjoint geodesic balls of radius `radius` on S^n, greedily chosen from
/// successively finer cube-sphere lattices.
struct PackingResult {
  int sphere_dim = 2;
  double radius = 0;
  Matrix centers; // (n+1) x count
  Index candidates = 0;
  int passes = 0;

  Index count() const { return centers.cols(); }
};

PackingResult pack_balls(int sphere_dim, double radius);

/// Smallest pairwise geodesic distance between centers.
double min_center_distance(const PackingResult& packing);

struct CoverageAudit {
  Index probes = 0;
  Index uncovered = 0;
  /// Largest distance from a probe to its nearest center.
  double worst = 0;

  bool passed() const { return uncovered == 0; }
};

/// Uniform random probes; a probe is covered when some center lies within
/// 2 * radius.
CoverageAudit audit_coverage(const PackingResult& packing, Index probes, RandomStream& rng);

/// c' with |I_m| >= c' m^n for packings of radius R/m. Balls of radius
/// 3R/m around a maximal packing cover S^n, and geodesic balls are no larger
/// than Euclidean ones, so c' = |S^n| / (|B_n| (3R)^n).
double packing_constant(int sphere_dim, double R);

// ---------------------------------------------------------------- statistics

struct WilsonInterval {
  double low = 0;
  double high = 1;
};

inline constexpr double kZ95 = 1.959963984540054;

WilsonInterval wilson_interval(Index successes, Index trials, double z = kZ95);

/// Fraction of degenerate trials tolerated before a run fails.
inline constexpr double kDegeneracyBudget = 0.01;

/// Throws DegeneracyBudgetError when degenerate / total exceeds the budget.
void check_degeneracy_budget(Index degenerate, Index total, const std::string& what);

// ---------------------------------------------------------------- barrier

struct BarrierEstimate {
  double p_hat = 0;
  Index trials = 0;
  Index successes = 0;
  Index degenerate = 0;
  double ci_low = 0;
  double ci_high = 1;
  TopologySignature sigma;
  double R = 0;
  /// Empty for the limit field.
  std::optional<int> degree;
};

struct BarrierConfig {
  int variety_dim = 2;
  /// Frequency / ambient dimension N; 0 means N = n.
  int ambient_dim = 0;
  TopologySignature sigma = TopologySignature::circle();
  std::vector<double> radii{6.0};
  int trials = 1000;
  /// 0 selects the limit field; m > 0 the degree-m ensemble in the chart at base_point.
  int degree = 0;
  int modes = kDefaultSpectralModes;
  double spacing = 0.1;
  CountMode mode = CountMode::strict;
  /// Point of the equatorial S^n in R^(N+1); north pole when empty.
  std::optional<Vector> base_point;
  int threads = 1;

  int freq_dim() const { return ambient_dim > 0 ? ambient_dim : variety_dim; }
  void validate() const;
};

struct BarrierTrial {
  bool degenerate = false;
  /// N_sigma inside B(0, R) for each configured R.
  std::vector<Index> counts;
};

struct BarrierRun {
  BarrierConfig config;
  GridSpec grid;
  std::vector<BarrierTrial> trials;
  std::vector<BarrierEstimate> estimates;
  Index degenerate = 0;
  /// Every trial's event set grows with R.
  bool monotone = true;

  /// Estimate with the largest lower confidence bound.
  const BarrierEstimate& best() const;
};

/// Trial t uses rng.child(t). Events for all radii come from one extraction on
/// a grid covering the largest ball, so they are nested by construction.
BarrierRun barrier_probability(const BarrierConfig& config, const RandomStream& rng);

// ---------------------------------------------------------------- scaling on S^n

struct SphereCountConfig {
  /// Ensemble ambient dimension N; the zero set is counted on the equatorial S^2.
  int ambient_dim = 2;
  TopologySignature sigma = TopologySignature::circle();
  int trials = 200;
  int resolution = 257;
  QuotientMode quotient = QuotientMode::none;
  CountMode mode = CountMode::strict;
  int threads = 1;
};

struct ScalingRow {
  int degree = 0;
  Index trials = 0;
  Index degenerate = 0;
  double mean = 0;
  double variance = 0;
  double std_error = 0;
  std::vector<Index> counts;
};

struct ScalingResult {
  std::vector<ScalingRow> rows;
  /// Weighted least squares of log mean on log m over rows with positive
  /// standard error; weights (mean / se)^2.
  double slope = 0;
  double intercept = 0;
  double slope_std_error = 0;
};

/// Degree index i uses rng.child(m), trial t uses that stream's child(t).
ScalingResult expected_count_scaling(const std::vector<int>& degrees, const SphereCountConfig& config,
                                     const RandomStream& rng);

struct AssemblyConfig {
  int degree = 20;
  double R = 6.0;
  SphereCountConfig counting;
};

struct AssemblyResult {
  PackingResult packing;
  std::vector<Index> counts;      // N_sigma on the whole sphere, per trial
  std::vector<Index> ball_events; // sum over balls of the barrier event, per trial
  std::vector<double> p_hat;      // per ball
  Index degenerate = 0;
  double mean_count = 0;
  double mean_count_se = 0;
  double sum_p = 0;
  double sum_p_se = 0;
  /// counts[t] >= ball_events[t] for every trial.
  bool per_trial_inequality = true;
  /// mean_count + z * sqrt(se^2 + se^2) >= sum_p.
  bool holds = false;
};

AssemblyResult lower_bound_assembly(const AssemblyConfig& config, const RandomStream& rng);

// ---------------------------------------------------------------- Kac-Rice on S^1

/// Expected zero count on S^1 for the degree-m ensemble (N = n = 1):
/// 2 sqrt(lambda_2 / lambda_0) with lambda_2 from a five-point difference of
/// the exact covariance.
double kac_rice_zero_count(int degree);

struct KacRiceMonteCarlo {
  int degree = 0;
  Index trials = 0;
  double mean = 0;
  double std_error = 0;
  double oracle = 0;
  double relative_error = 0;
  std::vector<Index> counts;
};

/// Sign changes on a periodic grid of `grid_points` angles. Trial t uses rng.child(t).
KacRiceMonteCarlo kac_rice_monte_carlo(int degree, Index trials, const RandomStream& rng, int grid_points = 4096,
                                       int threads = 1);

struct AffineFit {
  double slope = 0;
  double intercept = 0;
  double max_relative_residual = 0;
};

AffineFit fit_affine(const std::vector<double>& x, const std::vector<double>& y);

} // namespace randhyp
