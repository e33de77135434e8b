#include "randhyp/cli.hpp"

#include "randhyp/experiments.hpp"
#include "randhyp/field.hpp"
#include "randhyp/io.hpp"
#include "randhyp/kernel.hpp"
#include "randhyp/rkhs.hpp"
#include "randhyp/topology.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <ostream>

namespace randhyp::cli {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

template <class T>
struct is_vector : std::false_type {};
template <class T>
struct is_vector<std::vector<T>> : std::true_type {};

/// Options bound to variables, remembered so the resolved values can be
/// written to the manifest and replayed.
class Options {
public:
  explicit Options(CLI::App* app) : app_(app) {}

  template <class T>
  CLI::Option* add(const std::string& key, T& var, const std::string& help) {
    CLI::Option* o = app_->add_option("--" + key, var, help)->capture_default_str();
    if constexpr (is_vector<T>::value) o->delimiter(',');
    dump_.emplace_back([key, &var](json& j) { j[key] = var; });
    return o;
  }

  CLI::Option* flag(const std::string& key, bool& var, const std::string& help) {
    dump_.emplace_back([key, &var](json& j) { j[key] = var; });
    return app_->add_flag("--" + key, var, help);
  }

  json values() const {
    json j = json::object();
    for (const auto& d : dump_) d(j);
    return j;
  }

private:
  CLI::App* app_;
  std::vector<std::function<void(json&)>> dump_;
};

struct Context {
  fs::path dir;
  std::string prefix;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct Output {
  std::vector<std::pair<std::string, io::CsvTable>> tables;
  /// Extra artifacts already written by the command (file names relative to dir).
  std::vector<std::string> files;
  json spec = json::object();
  json grid = json::object();
  json calibration = json::object();
  json aggregates = json::object();
  json trials = json::array();
};

class Command {
public:
  virtual ~Command() = default;
  virtual std::string name() const = 0;
  virtual std::string help() const = 0;
  virtual void setup(Options& o) = 0;
  /// Validate the parsed options; runs before the manifest is written.
  virtual void prepare() {}
  virtual Output execute(const Context& ctx) = 0;
};

using io::CsvTable;
using I64 = std::int64_t;

json grid_json(const GridSpec& g) {
  return {{"center", std::vector<double>(g.center.data(), g.center.data() + g.center.size())},
          {"radius", g.radius},
          {"resolution", g.resolution}};
}

CountMode parse_mode(const std::string& s) {
  if (s == "strict") return CountMode::strict;
  if (s == "grouped") return CountMode::grouped;
  throw ConfigError("mode must be strict or grouped, got '" + s + "'");
}

QuotientMode parse_quotient(const std::string& s) {
  if (s == "none") return QuotientMode::none;
  if (s == "antipodal") return QuotientMode::antipodal;
  throw ConfigError("quotient must be none or antipodal, got '" + s + "'");
}

// ---------------------------------------------------------------- kernel-check

class KernelCheck final : public Command {
public:
  std::string name() const override { return "kernel-check"; }
  std::string help() const override { return "Closed-form limit kernel against quadrature; optional convergence table"; }

  void setup(Options& o) override {
    o.add("N", dims_, "frequency dimensions to check");
    o.add("pairs", pairs_, "random point pairs per dimension")->check(CLI::PositiveNumber);
    o.add("spread", spread_, "points are spread * standard normal")->check(CLI::PositiveNumber);
    o.add("tol", tol_, "quadrature tolerance")->check(CLI::PositiveNumber);
    o.add("convergence", convergence_, "(N)x(n) pairs for the covariance convergence table, e.g. 2x2,2x1");
    o.add("degrees", degrees_, "degrees for the convergence table");
    o.add("grid-radius", grid_radius_, "radius of the convergence grid")->check(CLI::PositiveNumber);
    o.add("per-axis", per_axis_, "convergence grid points per axis")->check(CLI::Range(2, 64));
  }

  void prepare() override {
    for (int N : dims_) LimitKernelSpec{N, N}.validate();
    for (const auto& s : convergence_) parsed_.push_back(parse_pair(s));
  }

  Output execute(const Context& ctx) override {
    Output out;
    CsvTable oracle({"N", "pair", "distance", "closed_form", "quadrature", "abs_diff"});
    json worst = json::object();
    const RandomStream root(ctx.seed);
    for (int N : dims_) {
      const LimitKernelSpec spec{N, N};
      RandomStream rng = root.child(static_cast<std::uint64_t>(N));
      double max_diff = 0;
      for (int p = 0; p < pairs_; ++p) {
        const Vector u = spread_ * rng.normal_vector(N), v = spread_ * rng.normal_vector(N);
        const double a = limit_kernel(spec, u, v), b = limit_kernel_quadrature(spec, u, v, tol_);
        max_diff = std::max(max_diff, std::abs(a - b));
        oracle.add_row({I64(N), I64(p), (u - v).norm(), a, b, std::abs(a - b)});
      }
      worst[std::to_string(N)] = max_diff;
    }
    out.aggregates["max_abs_diff"] = worst;
    out.tables.emplace_back("oracle", std::move(oracle));

    if (!parsed_.empty()) {
      CsvTable conv({"N", "n", "m", "sup_error", "ratio_constant", "scale_exponent", "calibrated_constant"});
      json decreasing = json::object();
      for (auto [N, n] : parsed_) {
        const ConvergenceReport rep = convergence_report(N, n, degrees_, grid_radius_, per_axis_);
        const std::string key = std::to_string(N) + "x" + std::to_string(n);
        bool strict = true;
        for (std::size_t i = 0; i < rep.rows.size(); ++i) {
          const auto& r = rep.rows[i];
          conv.add_row({I64(N), I64(n), I64(r.degree), r.sup_error, r.constant, rep.calibration.scale_exponent,
                        rep.calibration.constant});
          if (i > 0 && !(r.sup_error < rep.rows[i - 1].sup_error)) strict = false;
        }
        decreasing[key] = strict;
        out.calibration[key] = {{"raw_exponent", rep.calibration.raw_exponent},
                                {"scale_exponent", rep.calibration.scale_exponent},
                                {"constant", rep.calibration.constant}};
      }
      out.aggregates["strictly_decreasing"] = decreasing;
      out.tables.emplace_back("convergence", std::move(conv));
    }
    return out;
  }

private:
  static std::pair<int, int> parse_pair(const std::string& s) {
    const auto x = s.find('x');
    try {
      if (x == std::string::npos) throw std::invalid_argument(s);
      const int N = std::stoi(s.substr(0, x)), n = std::stoi(s.substr(x + 1));
      EnsembleSpec{N, 1, 1, n}.validate();
      return {N, n};
    } catch (const std::logic_error&) {
      throw ConfigError("convergence entries look like 2x1, got '" + s + "'");
    }
  }

  std::vector<int> dims_{1, 2, 3};
  int pairs_ = 100;
  double spread_ = 2.0;
  double tol_ = 1e-10;
  std::vector<std::string> convergence_;
  std::vector<int> degrees_ = kDefaultCalibrationDegrees;
  double grid_radius_ = 3.0;
  int per_axis_ = 9;
  std::vector<std::pair<int, int>> parsed_;
};

// ---------------------------------------------------------------- field-sample

class FieldSampleCommand final : public Command {
public:
  std::string name() const override { return "field-sample"; }
  std::string help() const override { return "Sample the limit field on a grid and dump it"; }

  void setup(Options& o) override {
    o.add("n", n_, "grid dimension")->check(CLI::Range(1, 3));
    o.add("N", N_, "frequency dimension (0 means n)")->check(CLI::NonNegativeNumber);
    o.add("R", R_, "grid half-width")->check(CLI::PositiveNumber);
    o.add("res", res_, "points per axis")->check(CLI::Range(3, 4097));
    o.add("sampler", sampler_, "spectral or exact")->check(CLI::IsMember({"spectral", "exact"}));
    o.add("modes", modes_, "spectral modes")->check(CLI::PositiveNumber);
    o.flag("components", components_, "also extract zero-set components");
    o.flag("obj", obj_, "write the zero-set mesh as OBJ (implies --components)");
  }

  void prepare() override {
    spec_ = {N_ > 0 ? N_ : n_, n_};
    spec_.validate();
    grid_ = GridSpec::cube(n_, R_, res_);
    grid_.validate();
    if (sampler_ == "exact" && grid_.size() > kMaxExactGridPoints)
      throw ConfigError("exact sampler is limited to " + std::to_string(kMaxExactGridPoints) + " grid points");
  }

  Output execute(const Context& ctx) override {
    Output out;
    RandomStream rng(ctx.seed);
    Vector values;
    double jitter = 0;
    if (sampler_ == "spectral") {
      values = sample_field_spectral(n_, spec_.freq_dim, modes_, rng).on_grid(grid_);
    } else {
      auto s = sample_field_exact_grid(grid_, spec_, rng);
      values = std::move(s.values);
      jitter = s.jitter;
    }
    const std::string dump = ctx.prefix + "_field";
    write_grid_dump((ctx.dir / dump).string(), grid_, values, ctx.seed, sampler_);
    out.files = {dump + ".bin", dump + ".json"};

    const double mean = values.mean();
    CsvTable summary({"points", "min", "max", "mean", "variance", "jitter"});
    summary.add_row({I64(values.size()), values.minCoeff(), values.maxCoeff(), mean,
                     (values.array() - mean).square().mean(), jitter});
    out.tables.emplace_back("summary", std::move(summary));
    out.spec = {{"limit_kernel", {{"N", spec_.freq_dim}, {"n", spec_.eval_dim}}}};
    out.grid = grid_json(grid_);

    if (components_ || obj_) {
      ZeroSetMesh mesh;
      const ComponentReport rep = components_from_values(values, grid_, obj_ ? &mesh : nullptr);
      CsvTable comps({"component", "closed", "classified", "signature", "euler", "orientable", "points"});
      for (std::size_t i = 0; i < rep.components.size(); ++i) {
        const auto& c = rep.components[i];
        comps.add_row({I64(i), I64(c.closed), I64(c.classified), c.classified ? c.signature.to_string() : "open",
                       I64(c.signature.euler), I64(c.signature.orientable), I64(c.points.cols())});
      }
      out.tables.emplace_back("components", std::move(comps));
      out.aggregates["components"] = rep.components.size();
      out.aggregates["closed_components"] = rep.closed_count();
      if (obj_) {
        const std::string name = ctx.prefix + "_zeroset.obj";
        write_obj(mesh, (ctx.dir / name).string());
        out.files.push_back(name);
      }
    }
    return out;
  }

private:
  int n_ = 2, N_ = 0, res_ = 101, modes_ = kDefaultSpectralModes;
  double R_ = 5.0;
  std::string sampler_ = "spectral";
  bool components_ = false, obj_ = false;
  LimitKernelSpec spec_;
  GridSpec grid_;
};

// ---------------------------------------------------------------- barrier

class BarrierCommand final : public Command {
public:
  std::string name() const override { return "barrier"; }
  std::string help() const override { return "Barrier probability that a small ball contains a component of type sigma"; }

  void setup(Options& o) override {
    o.add("n", c_.variety_dim, "variety dimension")->check(CLI::Range(1, 3));
    o.add("N", c_.ambient_dim, "frequency / ambient dimension (0 means n)")->check(CLI::NonNegativeNumber);
    o.add("sigma", sigma_, "circle, sphere, torus, genus:g, nonorientable:k, multi:[...]");
    o.add("R", c_.radii, "ball radii (comma separated)");
    o.add("trials", c_.trials, "Monte Carlo trials (>= 100)");
    o.add("degree", c_.degree, "0 for the limit field, m > 0 for the degree-m ensemble")->check(CLI::NonNegativeNumber);
    o.add("spacing", c_.spacing, "grid spacing")->check(CLI::PositiveNumber);
    o.add("modes", c_.modes, "spectral modes of the limit field")->check(CLI::PositiveNumber);
    o.add("mode", mode_, "strict or grouped counting")->check(CLI::IsMember({"strict", "grouped"}));
    o.add("base-point", base_point_, "unit vector in R^(N+1) for the ball center (north pole when empty)");
  }

  void prepare() override {
    c_.sigma = TopologySignature::parse(sigma_);
    c_.mode = parse_mode(mode_);
    if (!base_point_.empty()) {
      Vector p = Eigen::Map<const Vector>(base_point_.data(), static_cast<Index>(base_point_.size()));
      if (p.size() != c_.freq_dim() + 1) throw ConfigError("base-point must have N + 1 coordinates");
      if (std::abs(p.norm() - 1.0) > 1e-12) throw ConfigError("base-point must be a unit vector");
      c_.base_point = p;
    }
    c_.validate();
  }

  Output execute(const Context& ctx) override {
    c_.threads = ctx.threads;
    const BarrierRun run = barrier_probability(c_, RandomStream(ctx.seed));
    Output out;
    CsvTable est({"sigma", "n", "N", "model", "R", "trials", "successes", "degenerate", "p_hat", "ci_low", "ci_high"});
    const std::string model = c_.degree > 0 ? "m=" + std::to_string(c_.degree) : "limit";
    for (const auto& e : run.estimates)
      est.add_row({e.sigma.to_string(), I64(c_.variety_dim), I64(c_.freq_dim()), model, e.R, I64(e.trials),
                   I64(e.successes), I64(e.degenerate), e.p_hat, e.ci_low, e.ci_high});
    out.tables.emplace_back("estimates", std::move(est));

    std::vector<std::string> header{"trial", "degenerate"};
    for (double R : c_.radii) header.push_back("count_R" + io::format_double(R));
    CsvTable trials(header);
    for (std::size_t t = 0; t < run.trials.size(); ++t) {
      const auto& tr = run.trials[t];
      std::vector<io::Cell> row{I64(t), I64(tr.degenerate)};
      for (std::size_t k = 0; k < c_.radii.size(); ++k) row.emplace_back(tr.degenerate ? I64(-1) : I64(tr.counts[k]));
      trials.add_row(std::move(row));
      out.trials.push_back(tr.degenerate ? json(nullptr) : json(tr.counts));
    }
    out.tables.emplace_back("trials", std::move(trials));

    if (c_.degree > 0)
      out.spec = {{"ensemble", {{"N", c_.freq_dim()}, {"m", c_.degree}, {"r", 1}, {"n", c_.variety_dim}}}};
    else
      out.spec = {{"limit_kernel", {{"N", c_.freq_dim()}, {"n", c_.variety_dim}}}, {"modes", c_.modes}};
    out.grid = grid_json(run.grid);
    const auto& best = run.best();
    out.aggregates = {{"monotone", run.monotone},
                      {"degenerate", run.degenerate},
                      {"best_R", best.R},
                      {"best_p_hat", best.p_hat},
                      {"best_ci_low", best.ci_low},
                      {"counting_mode", mode_}};
    return out;
  }

private:
  BarrierConfig c_;
  std::string sigma_ = "circle", mode_ = "strict";
  std::vector<double> base_point_;
};

// ---------------------------------------------------------------- scaling

class ScalingCommand final : public Command {
public:
  std::string name() const override { return "scaling"; }
  std::string help() const override { return "Mean component counts on S^2 across degrees with a log-log fit"; }

  void setup(Options& o) override {
    o.add("N", c_.ambient_dim, "ensemble ambient dimension (>= 2)")->check(CLI::Range(2, 3));
    o.add("degrees", degrees_, "increasing degrees");
    o.add("sigma", sigma_, "component type (dimension 1)");
    o.add("trials", c_.trials, "trials per degree")->check(CLI::PositiveNumber);
    o.add("res", c_.resolution, "cube-sphere resolution")->check(CLI::Range(3, 2049));
    o.add("quotient", quotient_, "none or antipodal")->check(CLI::IsMember({"none", "antipodal"}));
    o.add("mode", mode_, "strict or grouped counting")->check(CLI::IsMember({"strict", "grouped"}));
  }

  void prepare() override {
    c_.sigma = TopologySignature::parse(sigma_);
    if (c_.sigma.dim != 1) throw ConfigError("scaling counts curves on S^2; sigma must have dimension 1");
    c_.quotient = parse_quotient(quotient_);
    c_.mode = parse_mode(mode_);
    if (degrees_.empty()) throw ConfigError("degrees must not be empty");
    for (std::size_t i = 0; i < degrees_.size(); ++i) {
      if (degrees_[i] < 1) throw ConfigError("degrees must be >= 1");
      if (i > 0 && degrees_[i] <= degrees_[i - 1]) throw ConfigError("degrees must be increasing");
    }
  }

  Output execute(const Context& ctx) override {
    c_.threads = ctx.threads;
    const ScalingResult r = expected_count_scaling(degrees_, c_, RandomStream(ctx.seed));
    Output out;
    CsvTable rows({"m", "trials", "degenerate", "mean", "variance", "std_error"});
    CsvTable trials({"m", "trial", "count"});
    for (const auto& row : r.rows) {
      rows.add_row({I64(row.degree), I64(row.trials), I64(row.degenerate), row.mean, row.variance, row.std_error});
      for (std::size_t t = 0; t < row.counts.size(); ++t) trials.add_row({I64(row.degree), I64(t), I64(row.counts[t])});
      out.trials.push_back({{"m", row.degree}, {"counts", row.counts}});
    }
    CsvTable fit({"slope", "intercept", "slope_std_error"});
    fit.add_row({r.slope, r.intercept, r.slope_std_error});
    out.tables.emplace_back("rows", std::move(rows));
    out.tables.emplace_back("fit", std::move(fit));
    out.tables.emplace_back("trials", std::move(trials));
    out.spec = {{"ensemble", {{"N", c_.ambient_dim}, {"m", degrees_}, {"r", 1}, {"n", 2}}}};
    out.grid = {{"sphere_resolution", c_.resolution}, {"quotient", quotient_}};
    out.aggregates = {{"slope", r.slope}, {"slope_std_error", r.slope_std_error}, {"counting_mode", mode_}};
    return out;
  }

private:
  SphereCountConfig c_;
  std::vector<int> degrees_{5, 10, 20, 40};
  std::string sigma_ = "circle", quotient_ = "none", mode_ = "strict";
};

// ---------------------------------------------------------------- packing

class PackingCommand final : public Command {
public:
  std::string name() const override { return "packing"; }
  std::string help() const override { return "Greedy ball packings of S^n; --assembly adds the lower-bound assembly"; }

  void setup(Options& o) override {
    o.add("n", n_, "sphere dimension")->check(CLI::Range(1, 3));
    o.add("R", R_, "ball radius is R / m")->check(CLI::PositiveNumber);
    o.add("degrees", degrees_, "values of m");
    o.add("probes", probes_, "coverage probes per packing")->check(CLI::NonNegativeNumber);
    o.flag("assembly", assembly_, "compare mean counts with the summed per-ball barrier probabilities (n = 2)");
    o.add("degree", a_.degree, "assembly degree m")->check(CLI::PositiveNumber);
    o.add("trials", a_.counting.trials, "assembly trials")->check(CLI::PositiveNumber);
    o.add("res", a_.counting.resolution, "assembly cube-sphere resolution")->check(CLI::Range(3, 2049));
    o.add("sigma", sigma_, "component type for the assembly");
    o.add("mode", mode_, "strict or grouped counting")->check(CLI::IsMember({"strict", "grouped"}));
  }

  void prepare() override {
    for (int m : degrees_) {
      if (m < 1) throw ConfigError("degrees must be >= 1");
      const double r = R_ / m;
      if (!(r > 0.0 && r < std::numbers::pi / 4)) throw ConfigError("packing radius R/m must lie in (0, pi/4)");
    }
    if (assembly_) {
      if (n_ != 2) throw ConfigError("the assembly runs on S^2 only");
      a_.R = R_;
      a_.counting.sigma = TopologySignature::parse(sigma_);
      a_.counting.mode = parse_mode(mode_);
      if (!(R_ / a_.degree < std::numbers::pi / 4)) throw ConfigError("assembly radius R/m must be below pi/4");
    }
  }

  Output execute(const Context& ctx) override {
    Output out;
    const RandomStream root(ctx.seed);
    const double cprime = packing_constant(n_, R_);
    CsvTable table({"m", "radius", "count", "bound", "count_over_bound", "min_distance_over_2r", "probes", "uncovered"});
    bool bound_holds = true, covered = true;
    for (int m : degrees_) {
      const PackingResult p = pack_balls(n_, R_ / m);
      RandomStream rng = root.child(static_cast<std::uint64_t>(m));
      const CoverageAudit audit = audit_coverage(p, probes_, rng);
      const double bound = cprime * std::pow(static_cast<double>(m), n_);
      bound_holds = bound_holds && static_cast<double>(p.count()) >= bound;
      covered = covered && audit.passed();
      table.add_row({I64(m), p.radius, I64(p.count()), bound, static_cast<double>(p.count()) / bound,
                     p.count() > 1 ? min_center_distance(p) / (2 * p.radius) : 0.0, I64(probes_), I64(audit.uncovered)});
    }
    out.tables.emplace_back("packing", std::move(table));
    out.calibration = {{"c_prime", cprime}, {"formula", "|S^n| / (|B_n| (3R)^n)"}};
    out.aggregates = {{"bound_holds", bound_holds}, {"coverage_passed", covered}};

    if (assembly_) {
      a_.counting.threads = ctx.threads;
      const AssemblyResult r = lower_bound_assembly(a_, root.child(0xA55E'3B1Eu));
      CsvTable summary({"m", "R", "balls", "trials", "degenerate", "mean_count", "mean_count_se", "sum_p", "sum_p_se",
                        "per_trial_inequality", "holds"});
      summary.add_row({I64(a_.degree), a_.R, I64(r.packing.count()), I64(r.counts.size()), I64(r.degenerate),
                       r.mean_count, r.mean_count_se, r.sum_p, r.sum_p_se, I64(r.per_trial_inequality), I64(r.holds)});
      CsvTable balls({"ball", "x", "y", "z", "p_hat"});
      for (Index b = 0; b < r.packing.count(); ++b)
        balls.add_row({I64(b), r.packing.centers(0, b), r.packing.centers(1, b), r.packing.centers(2, b),
                       r.p_hat[static_cast<std::size_t>(b)]});
      CsvTable trials({"trial", "count", "ball_events"});
      for (std::size_t t = 0; t < r.counts.size(); ++t) {
        trials.add_row({I64(t), I64(r.counts[t]), I64(r.ball_events[t])});
        out.trials.push_back({r.counts[t], r.ball_events[t]});
      }
      out.tables.emplace_back("assembly", std::move(summary));
      out.tables.emplace_back("balls", std::move(balls));
      out.tables.emplace_back("assembly_trials", std::move(trials));
      out.spec = {{"ensemble", {{"N", 2}, {"m", a_.degree}, {"r", 1}, {"n", 2}}}};
      out.grid = {{"sphere_resolution", a_.counting.resolution}};
      out.aggregates["assembly_holds"] = r.holds;
      out.aggregates["per_trial_inequality"] = r.per_trial_inequality;
    }
    return out;
  }

private:
  int n_ = 2;
  double R_ = 3.0;
  std::vector<int> degrees_{4, 8, 16, 32, 64};
  int probes_ = 10'000;
  bool assembly_ = false;
  AssemblyConfig a_;
  std::string sigma_ = "circle", mode_ = "strict";
};

// ---------------------------------------------------------------- kacrice

class KacRiceCommand final : public Command {
public:
  std::string name() const override { return "kacrice"; }
  std::string help() const override { return "Zero counts on S^1: Monte Carlo against the Kac-Rice oracle"; }

  void setup(Options& o) override {
    o.add("degrees", degrees_, "degrees m");
    o.add("trials", trials_, "Monte Carlo trials per degree")->check(CLI::PositiveNumber);
    o.add("grid-points", grid_points_, "angles in the periodic grid")->check(CLI::Range(16, 1 << 22));
  }

  void prepare() override {
    for (int m : degrees_)
      if (m < 1) throw ConfigError("degrees must be >= 1");
  }

  Output execute(const Context& ctx) override {
    Output out;
    const RandomStream root(ctx.seed);
    CsvTable table({"m", "oracle", "mc_mean", "std_error", "relative_error", "trials"});
    std::vector<double> ms, oracle;
    for (int m : degrees_) {
      const auto mc = kac_rice_monte_carlo(m, trials_, root.child(static_cast<std::uint64_t>(m)), grid_points_, ctx.threads);
      table.add_row({I64(m), mc.oracle, mc.mean, mc.std_error, mc.relative_error, I64(mc.trials)});
      ms.push_back(m);
      oracle.push_back(mc.oracle);
      out.trials.push_back({{"m", m}, {"counts", mc.counts}});
    }
    out.tables.emplace_back("kacrice", std::move(table));
    if (ms.size() >= 2) {
      const AffineFit fit = fit_affine(ms, oracle);
      CsvTable f({"slope", "intercept", "max_relative_residual"});
      f.add_row({fit.slope, fit.intercept, fit.max_relative_residual});
      out.tables.emplace_back("fit", std::move(f));
      out.aggregates["affine_max_relative_residual"] = fit.max_relative_residual;
    }
    out.spec = {{"ensemble", {{"N", 1}, {"m", degrees_}, {"r", 1}, {"n", 1}}}};
    out.grid = {{"circle_points", grid_points_}};
    return out;
  }

private:
  std::vector<int> degrees_{5, 10, 20, 40};
  int trials_ = 10'000;
  int grid_points_ = 4096;
};

// ---------------------------------------------------------------- rkhs-fit

class RkhsFitCommand final : public Command {
public:
  std::string name() const override { return "rkhs-fit"; }
  std::string help() const override { return "Approximate a target on a ball by kernel translates"; }

  void setup(Options& o) override {
    o.add("n", n_, "dimension")->check(CLI::Range(1, 2));
    o.add("N", N_, "frequency dimension (0 means n)")->check(CLI::NonNegativeNumber);
    o.add("target", target_, "x<i>, monomial:k1[,k2] or translate:v1[,v2]");
    o.add("radius", radius_, "ball radius")->check(CLI::PositiveNumber);
    o.add("centers", centers_, "centers per axis at the first level")->check(CLI::Range(1, 4097));
    o.add("center-width", width_, "centers span [-w, w] per axis")->check(CLI::PositiveNumber);
    o.add("res", res_, "fit grid points per axis")->check(CLI::Range(3, 4097));
    o.add("ridge", ridge_, "ridge parameter")->check(CLI::NonNegativeNumber);
    o.add("levels", levels_, "center refinements c -> 2c - 1")->check(CLI::Range(1, 8));
    o.add("t", ladder_, "mollifier scales for the ladder table (needs a monomial target)");
  }

  void prepare() override {
    spec_ = {N_ > 0 ? N_ : n_, n_};
    spec_.validate();
    auto numbers = [](const std::string& s) {
      std::vector<double> v;
      std::stringstream ss(s);
      std::string item;
      while (std::getline(ss, item, ',')) v.push_back(std::stod(item));
      return v;
    };
    try {
      if (target_.size() >= 2 && target_[0] == 'x' && target_.find(':') == std::string::npos) {
        const int i = std::stoi(target_.substr(1));
        if (i < 1 || i > n_) throw ConfigError("target coordinate out of range");
        monomial_ = MultiIndex{std::vector<int>(static_cast<std::size_t>(n_), 0)};
        monomial_->exponents[static_cast<std::size_t>(i - 1)] = 1;
      } else if (target_.rfind("monomial:", 0) == 0) {
        std::vector<int> k;
        for (double v : numbers(target_.substr(9))) k.push_back(static_cast<int>(v));
        if (static_cast<int>(k.size()) != n_) throw ConfigError("monomial needs n exponents");
        for (int e : k)
          if (e < 0) throw ConfigError("monomial exponents must be >= 0");
        monomial_ = MultiIndex{k};
      } else if (target_.rfind("translate:", 0) == 0) {
        const auto v = numbers(target_.substr(10));
        if (static_cast<int>(v.size()) != n_) throw ConfigError("translate needs n coordinates");
        translate_ = Eigen::Map<const Vector>(v.data(), n_);
      } else {
        throw ConfigError("unknown target '" + target_ + "'");
      }
    } catch (const std::logic_error&) {
      throw ConfigError("cannot parse target '" + target_ + "'");
    }
    for (double t : ladder_)
      if (!(t > 0.0 && t <= 1.0)) throw ConfigError("mollifier scales must lie in (0, 1]");
    if (!ladder_.empty() && !monomial_) throw ConfigError("the mollifier ladder needs a monomial target");
  }

  Output execute(const Context&) override {
    Output out;
    Target f;
    if (monomial_) {
      const MultiIndex k = *monomial_;
      f = [k](const Eigen::Ref<const Vector>& x) {
        double v = 1;
        for (int i = 0; i < k.variables(); ++i) v *= std::pow(x[i], k.exponents[static_cast<std::size_t>(i)]);
        return v;
      };
    } else {
      f = KernelTranslate{*translate_, spec_};
    }
    GridSpec grid = GridSpec::cube(n_, radius_, res_);
    CsvTable table({"level", "centers", "ridge", "fit_points", "audit_points", "fit_residual", "sup_residual"});
    int per_axis = centers_;
    json residuals = json::array();
    for (int level = 0; level < levels_; ++level) {
      const Matrix c = gridded_centers(n_, width_, per_axis);
      const SpanFit fit = fit_in_span(f, c, spec_, ridge_, grid);
      table.add_row({I64(level), I64(c.cols()), fit.ridge, I64(fit.fit_points), I64(fit.audit_points), fit.fit_residual,
                     fit.sup_residual});
      residuals.push_back(fit.sup_residual);
      per_axis = 2 * per_axis - 1;
    }
    out.tables.emplace_back("fit", std::move(table));
    out.aggregates["sup_residuals"] = residuals;

    if (!ladder_.empty()) {
      CsvTable moll({"t", "sup_error"});
      for (double t : ladder_) moll.add_row({t, mollifier_sup_error(*monomial_, Mollifier(spec_.freq_dim, t), grid)});
      out.tables.emplace_back("mollifier", std::move(moll));
    }
    out.spec = {{"limit_kernel", {{"N", spec_.freq_dim}, {"n", spec_.eval_dim}}}};
    out.grid = grid_json(grid);
    return out;
  }

private:
  int n_ = 1, N_ = 0, centers_ = 25, res_ = 81, levels_ = 2;
  double radius_ = 2.0, width_ = 4.0, ridge_ = 0.0;
  std::string target_ = "x1";
  std::vector<double> ladder_;
  LimitKernelSpec spec_;
  std::optional<MultiIndex> monomial_;
  std::optional<Vector> translate_;
};

// ---------------------------------------------------------------- driver

std::vector<std::unique_ptr<Command>> make_commands() {
  std::vector<std::unique_ptr<Command>> v;
  v.push_back(std::make_unique<KernelCheck>());
  v.push_back(std::make_unique<FieldSampleCommand>());
  v.push_back(std::make_unique<BarrierCommand>());
  v.push_back(std::make_unique<ScalingCommand>());
  v.push_back(std::make_unique<PackingCommand>());
  v.push_back(std::make_unique<KacRiceCommand>());
  v.push_back(std::make_unique<RkhsFitCommand>());
  return v;
}

fs::path default_out() {
  const char* env = std::getenv(kOutputEnv);
  return env && *env ? fs::path(env) : fs::path(".");
}

// Output directory as far as it can be known before parsing succeeds.
fs::path scan_out(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--out" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--out=", 0) == 0) return args[i].substr(6);
  }
  return default_out();
}

struct Failure {
  std::string kind;
  std::string message;
  int code;
};

Failure classify(const std::exception& e) {
  if (const auto* d = dynamic_cast<const DegeneracyBudgetError*>(&e)) return {d->kind(), d->what(), kExitDegeneracy};
  if (const auto* c = dynamic_cast<const ConfigError*>(&e)) return {c->kind(), c->what(), kExitConfig};
  if (const auto* r = dynamic_cast<const Error*>(&e)) return {r->kind(), r->what(), kExitFailure};
  if (dynamic_cast<const CLI::ParseError*>(&e)) return {"config", e.what(), kExitConfig};
  if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) return {"io", e.what(), kExitFailure};
  return {"internal", e.what(), kExitFailure};
}

int report_failure(const Failure& f, const std::string& command, const fs::path& dir, std::ostream& err) {
  const json record = {{"error", f.kind}, {"message", f.message}, {"exit_code", f.code}, {"command", command}};
  err << record.dump() << '\n';
  try {
    io::write_file(dir / "error.json", record.dump(2) + "\n");
  } catch (const std::exception&) {
    // stderr already carries the record
  }
  return f.code;
}

struct RunResult {
  int code = kExitOk;
  fs::path manifest;
  json outputs = json::object();
};

RunResult run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunResult result;
  fs::path dir = scan_out(args);
  std::string command_name;

  CLI::App app{"Random real algebraic hypersurfaces: ensembles, limit fields, barrier and scaling experiments", "randhyp"};
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all", "Expand all help");
  auto commands = make_commands();
  std::map<CLI::App*, Command*> lookup;
  std::map<CLI::App*, std::unique_ptr<Options>> options;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out_dir = default_out().string();
  for (auto& cmd : commands) {
    CLI::App* sub = app.add_subcommand(cmd->name(), cmd->help());
    auto opts = std::make_unique<Options>(sub);
    cmd->setup(*opts);
    sub->add_option("--seed", seed, "64-bit seed")->capture_default_str();
    sub->add_option("--threads", threads, "worker threads (results do not depend on it)")
        ->check(CLI::Range(1, 1024))
        ->capture_default_str();
    sub->add_option("--out", out_dir, std::string("output directory (default $") + kOutputEnv + " or .)");
    lookup[sub] = cmd.get();
    options[sub] = std::move(opts);
  }
  app.add_subcommand("replay", "Re-run an experiment from its manifest and compare outputs")->allow_extras();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return result;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return result;
  } catch (const CLI::ParseError& e) {
    for (auto* sub : app.get_subcommands()) command_name = sub->get_name();
    result.code = report_failure({"config", e.what(), kExitConfig}, command_name, dir, err);
    return result;
  }

  CLI::App* sub = app.get_subcommands().front();
  command_name = sub->get_name();
  Command& cmd = *lookup.at(sub);
  dir = out_dir;
  json manifest;
  try {
    cmd.prepare();
    const json params = options.at(sub)->values();
    const std::string hash = io::hex64(io::fnv1a64(json{{"command", command_name}, {"parameters", params}, {"seed", seed}}.dump()));
    Context ctx{dir, command_name + "_seed" + std::to_string(seed) + "_" + hash, seed, threads};
    manifest = {{"schema", 1},
                {"tool", "randhyp"},
                {"command", command_name},
                {"parameters", params},
                {"seed", seed},
                {"spec_hash", hash},
                {"variance_convention", "unit"},
                {"monomial_order", "lexicographic"},
                {"status", "started"}};
    result.manifest = dir / (ctx.prefix + ".manifest.json");
    io::write_file(result.manifest, manifest.dump(2) + "\n");

    Output o = cmd.execute(ctx);
    for (const auto& [name, table] : o.tables) {
      const std::string file = ctx.prefix + "_" + name + ".csv";
      const std::string text = table.str();
      io::write_file(dir / file, text);
      result.outputs[name] = {{"file", file}, {"fnv1a64", io::hex64(io::fnv1a64(text))}};
    }
    for (const auto& file : o.files)
      result.outputs[file] = {{"file", file}, {"fnv1a64", io::hex64(io::fnv1a64(io::read_file(dir / file)))}};
    manifest["spec"] = o.spec;
    manifest["grid"] = o.grid;
    manifest["calibration"] = o.calibration;
    manifest["aggregates"] = o.aggregates;
    manifest["trials"] = o.trials;
    manifest["outputs"] = result.outputs;
    manifest["status"] = "complete";
    io::write_file(result.manifest, manifest.dump(2) + "\n");
    out << json{{"command", command_name},
                {"status", "ok"},
                {"manifest", result.manifest.string()},
                {"aggregates", o.aggregates}}
               .dump()
        << '\n';
  } catch (const std::exception& e) {
    const Failure f = classify(e);
    if (!manifest.is_null() && !result.manifest.empty()) {
      manifest["status"] = "failed";
      manifest["error"] = {{"kind", f.kind}, {"message", f.message}, {"exit_code", f.code}};
      try {
        io::write_file(result.manifest, manifest.dump(2) + "\n");
      } catch (const std::exception&) {
      }
    }
    result.code = report_failure(f, command_name, dir, err);
  }
  return result;
}

std::string arg_value(const json& v) {
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_float()) return io::format_double(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  throw ConfigError("manifest parameter has an unsupported type");
}

int replay(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Re-run an experiment from its manifest", "randhyp replay"};
  std::string manifest_path, out_dir;
  int threads = 1;
  app.add_option("--manifest", manifest_path, "manifest written by a previous run")->required();
  app.add_option("--out", out_dir, "directory for the replayed outputs (default: <manifest dir>/replay)");
  app.add_option("--threads", threads, "worker threads")->check(CLI::Range(1, 1024));
  fs::path dir = scan_out(args);
  try {
    std::vector<std::string> reversed(args.rbegin() + 0, args.rend() - 1);
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    return report_failure({"config", e.what(), kExitConfig}, "replay", dir, err);
  }
  try {
    const fs::path mpath(manifest_path);
    const json m = json::parse(io::read_file(mpath));
    if (m.value("schema", 0) != 1) throw ConfigError("unsupported manifest schema");
    if (m.value("status", "") != "complete") throw ConfigError("manifest does not describe a completed run");
    dir = out_dir.empty() ? mpath.parent_path() / "replay" : fs::path(out_dir);

    std::vector<std::string> rerun{m.at("command").get<std::string>()};
    for (const auto& [key, v] : m.at("parameters").items()) {
      if (v.is_boolean()) {
        if (v.get<bool>()) rerun.push_back("--" + key);
        continue;
      }
      if (v.is_array()) {
        if (v.empty()) continue;
        std::string joined;
        for (const auto& e : v) joined += (joined.empty() ? "" : ",") + arg_value(e);
        rerun.push_back("--" + key);
        rerun.push_back(joined);
        continue;
      }
      rerun.push_back("--" + key);
      rerun.push_back(arg_value(v));
    }
    rerun.insert(rerun.end(), {"--seed", std::to_string(m.at("seed").get<std::uint64_t>()), "--threads",
                               std::to_string(threads), "--out", dir.string()});

    std::ostringstream quiet;
    const RunResult r = run_command(rerun, quiet, err);
    if (r.code != kExitOk) return r.code;

    json files = json::array();
    bool identical = true;
    for (const auto& [name, entry] : m.at("outputs").items()) {
      const bool same = r.outputs.contains(name) && r.outputs[name]["fnv1a64"] == entry["fnv1a64"];
      identical = identical && same;
      files.push_back({{"output", name}, {"identical", same}});
    }
    out << json{{"command", "replay"},
                {"manifest", mpath.string()},
                {"replayed", r.manifest.string()},
                {"identical", identical},
                {"files", files}}
               .dump()
        << '\n';
    if (!identical)
      return report_failure({"replay_mismatch", "replayed outputs differ from the manifest", kExitFailure}, "replay", dir,
                            err);
    return kExitOk;
  } catch (const nlohmann::json::exception& e) {
    return report_failure({"config", std::string("malformed manifest: ") + e.what(), kExitConfig}, "replay", dir, err);
  } catch (const std::exception& e) {
    return report_failure(classify(e), "replay", dir, err);
  }
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (!args.empty() && args.front() == "replay") return replay(args, out, err);
  return run_command(args, out, err).code;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  return run(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

} // namespace randhyp::cli
