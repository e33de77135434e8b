// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.

#include "randhyp/cli.hpp"
#include "randhyp/experiments.hpp"
#include "randhyp/io.hpp"
#include "randhyp/kernel.hpp"
#include "randhyp/rkhs.hpp"
#include "randhyp/topology.hpp"

#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

using namespace randhyp;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

struct Criterion {
  int id;
  std::string title;
  double limit_seconds;
  std::function<void(Verdict&)> body;
};

const int kThreads = std::max(1, static_cast<int>(std::thread::hardware_concurrency()));

std::string fmt(double x, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << x;
  return s.str();
}

// ---------------------------------------------------------------- 1

void kernel_oracle(Verdict& v) {
  RandomStream root(20240601);
  for (int N : {1, 2, 3}) {
    const LimitKernelSpec spec{N, N};
    RandomStream rng = root.child(static_cast<std::uint64_t>(N));
    double worst = 0, worst_analytic = 0;
    for (int p = 0; p < 100; ++p) {
      const Vector a = 2.0 * rng.normal_vector(N), b = 2.0 * rng.normal_vector(N);
      const double closed = limit_kernel(spec, a, b);
      worst = std::max(worst, std::abs(closed - limit_kernel_quadrature(spec, a, b, 1e-10)));
      if (N == 1) {
        const double d = (a - b).norm();
        worst_analytic = std::max(worst_analytic, std::abs(closed - 2.0 * std::sin(d) / d));
      }
    }
    v.require(worst <= 1e-8, "N=" + std::to_string(N) + " quadrature gap");
    v.detail << "N=" << N << " max|closed-quad|=" << fmt(worst, 3) << " ";
    if (N == 1) {
      v.require(worst_analytic <= 1e-13, "2 sin(d)/d");
      v.detail << "max|K-2sin(d)/d|=" << fmt(worst_analytic, 3) << " ";
    }
  }
}

// ---------------------------------------------------------------- 2

void covariance_universality(Verdict& v) {
  for (auto [N, n] : {std::pair{1, 1}, std::pair{2, 2}, std::pair{2, 1}}) {
    const ConvergenceReport rep = convergence_report(N, n, {10, 20, 40, 80});
    bool strict = true;
    v.detail << "(" << N << "," << n << ") exp=" << rep.calibration.scale_exponent << " sup=[";
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
      v.detail << (i ? " " : "") << fmt(rep.rows[i].sup_error, 3);
      if (i > 0 && !(rep.rows[i].sup_error < rep.rows[i - 1].sup_error)) strict = false;
    }
    v.detail << "] ";
    v.require(strict, "strict decrease for (" + std::to_string(N) + "," + std::to_string(n) + ")");
  }
}

// ---------------------------------------------------------------- 3

void kac_rice(Verdict& v) {
  const RandomStream root(31);
  const auto one = kac_rice_monte_carlo(1, 10'000, root.child(1), 4096, kThreads);
  bool all_two = std::all_of(one.counts.begin(), one.counts.end(), [](Index c) { return c == 2; });
  v.require(all_two, "m=1 every trial has 2 zeros");
  v.require(std::abs(one.oracle - 2.0) < 1e-9, "m=1 oracle equals 2");
  v.detail << "m=1 oracle=" << fmt(one.oracle, 12) << " mc=" << one.mean << " ";
  for (int m : {5, 10, 20, 40}) {
    const auto mc = kac_rice_monte_carlo(m, 10'000, root.child(static_cast<std::uint64_t>(m)), 4096, kThreads);
    v.require(mc.relative_error < 0.02, "m=" + std::to_string(m) + " within 2%");
    v.detail << "m=" << m << " " << fmt(mc.mean, 6) << "/" << fmt(mc.oracle, 6) << " ";
  }
}

// ---------------------------------------------------------------- 4

void scaling_law(Verdict& v) {
  SphereCountConfig c;
  c.trials = 200;
  c.resolution = 257;
  c.threads = kThreads;
  const RandomStream root(4040);
  const ScalingResult control = expected_count_scaling({1}, c, root);
  v.require(control.rows[0].mean == 1.0 && control.rows[0].variance == 0.0, "m=1 mean 1 with zero variance");
  v.detail << "m=1 mean=" << control.rows[0].mean << " var=" << control.rows[0].variance << " ";

  const ScalingResult r = expected_count_scaling({5, 10, 20, 40}, c, root);
  for (const auto& row : r.rows) v.detail << "m=" << row.degree << " " << fmt(row.mean) << "+-" << fmt(row.std_error, 2) << " ";
  for (std::size_t i = 1; i < r.rows.size(); ++i)
    v.detail << "local" << r.rows[i - 1].degree << "-" << r.rows[i].degree << "="
             << fmt(std::log(r.rows[i].mean / r.rows[i - 1].mean) / std::log(2.0), 3) << " ";
  v.detail << "slope=" << fmt(r.slope) << "+-" << fmt(r.slope_std_error, 2) << " ";
  v.require(r.slope >= 1.7 && r.slope <= 2.3, "slope in [1.7, 2.3]");
}

// ---------------------------------------------------------------- 5

void barrier_positivity(Verdict& v) {
  struct Case {
    int n;
    TopologySignature sigma;
    double spacing;
  };
  for (const Case& k : {Case{2, TopologySignature::circle(), 0.1}, Case{3, TopologySignature::sphere(), 0.3}}) {
    BarrierConfig c;
    c.variety_dim = k.n;
    c.sigma = k.sigma;
    c.radii = {3.0, 6.0, 9.0};
    c.trials = 1000;
    c.spacing = k.spacing;
    c.threads = kThreads;
    const BarrierRun run = barrier_probability(c, RandomStream(500 + static_cast<std::uint64_t>(k.n)));
    bool nested = run.monotone;
    for (const auto& t : run.trials)
      if (!t.degenerate)
        for (std::size_t i = 1; i < t.counts.size(); ++i) nested = nested && t.counts[i] >= t.counts[i - 1];
    v.require(nested, k.sigma.to_string() + " per-trial monotonicity");
    v.detail << k.sigma.to_string() << " n=" << k.n << ":";
    for (const auto& e : run.estimates)
      v.detail << " R=" << e.R << " p=" << fmt(e.p_hat, 3) << " [" << fmt(e.ci_low, 3) << "," << fmt(e.ci_high, 3) << "]";
    v.detail << " degenerate=" << run.degenerate << " ";
    v.require(run.estimates[1].ci_low > 0.0, k.sigma.to_string() + " Wilson lower bound > 0 at R=6");
  }
}

// ---------------------------------------------------------------- 6

void assembly(Verdict& v) {
  AssemblyConfig a;
  a.degree = 20;
  a.R = 6.0;
  a.counting.trials = 200;
  a.counting.resolution = 257;
  a.counting.threads = kThreads;
  const AssemblyResult r = lower_bound_assembly(a, RandomStream(66));
  v.detail << "m=20 R=6 balls=" << r.packing.count() << " mean N=" << fmt(r.mean_count) << "+-" << fmt(r.mean_count_se, 2)
           << " sum p=" << fmt(r.sum_p) << "+-" << fmt(r.sum_p_se, 2) << " ";
  v.require(r.holds, "mean N >= sum p within combined CIs");
  v.require(r.per_trial_inequality, "per-trial inequality");

  const double cprime = packing_constant(2, 3.0);
  double worst_ratio = INFINITY;
  for (int m = 4; m <= 64; ++m) {
    const PackingResult p = pack_balls(2, 3.0 / m);
    worst_ratio = std::min(worst_ratio, static_cast<double>(p.count()) / (cprime * m * m));
  }
  v.detail << "c'=" << fmt(cprime) << " min |I_m|/(c' m^2) over m=4..64: " << fmt(worst_ratio) << " ";
  v.require(worst_ratio >= 1.0, "|I_m| >= c' m^2");
}

// ---------------------------------------------------------------- 7

struct FixtureOutcome {
  Index count;
  std::vector<std::pair<int, bool>> shapes; // euler, orientable
  bool operator==(const FixtureOutcome&) const = default;
};

FixtureOutcome outcome(const ComponentReport& rep, const TopologySignature& sigma) {
  FixtureOutcome o{count_N_sigma(rep, sigma), {}};
  for (const auto& c : rep.components) o.shapes.emplace_back(c.signature.euler, c.signature.orientable);
  std::sort(o.shapes.begin(), o.shapes.end());
  return o;
}

void topology_fixtures(Verdict& v) {
  auto circle = [](const Eigen::Ref<const Vector>& p) { return p.squaredNorm() - 1.0; };
  auto empty = [](const Eigen::Ref<const Vector>& p) { return p.squaredNorm() + 1.0; };
  auto torus = [](const Eigen::Ref<const Vector>& p) {
    const double s = p.squaredNorm() + 1.0 - 0.16;
    return s * s - 4.0 * (p[0] * p[0] + p[1] * p[1]);
  };
  struct Fixture {
    std::string name;
    PointFunction f;
    int dim;
    int res;
    TopologySignature sigma;
    FixtureOutcome expected;
  };
  const std::vector<Fixture> fixtures{
      {"circle", circle, 2, 129, TopologySignature::circle(), {1, {{0, true}}}},
      {"empty", empty, 2, 129, TopologySignature::circle(), {0, {}}},
      {"sphere", circle, 3, 33, TopologySignature::sphere(), {1, {{2, true}}}},
      {"torus", torus, 3, 97, TopologySignature::torus(), {1, {{0, true}}}},
  };
  for (const auto& fx : fixtures) {
    for (int res : {fx.res, 2 * fx.res - 1}) {
      const FixtureOutcome got = outcome(extract_components_hypersurface(fx.f, GridSpec::cube(fx.dim, 2.0, res)), fx.sigma);
      v.require(got == fx.expected, fx.name + " at resolution " + std::to_string(res));
    }
    v.detail << fx.name << " ok@" << fx.res << "," << 2 * fx.res - 1 << " ";
  }
  auto plane = [](const Eigen::Ref<const Vector>& p) { return p[2] - 0.5; };
  const auto cut = extract_components_codim_r({circle, plane}, GridSpec::cube(3, 2.0, 41));
  v.require(cut.components.size() == 1 && !cut.uncertain(), "sphere and plane meet in one component");
  v.detail << "sphere∩plane components=" << cut.components.size() << " ";
}

// ---------------------------------------------------------------- 8

void rkhs(Verdict& v) {
  const LimitKernelSpec spec{1, 1};
  Vector v0(1);
  v0 << 0.7;
  const SpanFit exact = fit_in_span(KernelTranslate{v0, spec}, Matrix::Constant(1, 1, 0.7), spec, 0.0, GridSpec::cube(1, 2.0, 41));
  v.require(exact.sup_residual < 1e-10 && std::abs(exact.coefficients[0] - 1.0) < 1e-10, "span member recovered");
  v.detail << "exact residual=" << fmt(exact.sup_residual, 3) << " ";

  const Target x1 = [](const Eigen::Ref<const Vector>& x) { return x[0]; };
  const GridSpec grid = GridSpec::cube(1, 2.0, 81);
  const double plain = fit_in_span(x1, gridded_centers(1, 4.0, 25), spec, 0.0, grid).sup_residual;
  v.require(plain < 1e-2, "x1 with 25 centers below 1e-2");
  v.detail << "x1 25 centers ridge 0: " << fmt(plain, 3) << " ";
  for (double ridge : {1e-24, 1e-16, 1e-8}) {
    const double a = fit_in_span(x1, gridded_centers(1, 4.0, 25), spec, ridge, grid).sup_residual;
    const double b = fit_in_span(x1, gridded_centers(1, 4.0, 49), spec, ridge, grid).sup_residual;
    v.require(a < 1e-2 && b < a, "decrease under doubling at ridge " + fmt(ridge, 2));
    v.detail << "ridge " << fmt(ridge, 2) << ": " << fmt(a, 3) << "->" << fmt(b, 3) << " ";
  }

  int ladders = 0;
  for (int n : {1, 2}) {
    const GridSpec g = GridSpec::cube(n, 3.0, n == 1 ? 61 : 31);
    for (int a = 0; a <= 4; ++a)
      for (int b = 0; b <= (n == 1 ? 0 : 4 - a); ++b) {
        const MultiIndex k{n == 1 ? std::vector<int>{a} : std::vector<int>{a, b}};
        double previous = INFINITY;
        for (double t : {0.5, 0.25, 0.125}) {
          const double err = mollifier_sup_error(k, Mollifier(n, t), g);
          v.require(err < previous, "mollifier ladder");
          previous = err;
        }
        ++ladders;
      }
  }
  v.detail << "mollifier ladders strictly decreasing: " << ladders << " multi-indices ";
}

// ---------------------------------------------------------------- 9

void reproducibility(Verdict& v) {
  const fs::path root = fs::temp_directory_path() / "randhyp_acceptance_replay";
  fs::remove_all(root);
  const std::vector<std::vector<std::string>> runs{
      {"kernel-check", "--pairs", "10", "--convergence", "2x1", "--degrees", "10,20"},
      {"field-sample", "--R", "4", "--res", "41", "--components"},
      {"barrier", "--n", "2", "--sigma", "circle", "--R", "3,6", "--trials", "100", "--spacing", "0.2"},
      {"barrier", "--n", "3", "--sigma", "sphere", "--R", "2", "--trials", "100", "--spacing", "0.4"},
      {"scaling", "--degrees", "1,4,8", "--trials", "20", "--res", "65"},
      {"packing", "--degrees", "4,8,16", "--probes", "1000", "--assembly", "--degree", "8", "--R", "3", "--trials", "20",
       "--res", "65"},
      {"kacrice", "--degrees", "1,5,10", "--trials", "500"},
      {"rkhs-fit", "--t", "0.5,0.25"},
  };
  int index = 0;
  for (const auto& base : runs) {
    const fs::path dir = root / std::to_string(index++);
    auto args = base;
    args.insert(args.end(), {"--seed", "1234", "--threads", "1", "--out", dir.string()});
    std::ostringstream out, err;
    if (cli::run(args, out, err) != 0) {
      v.require(false, base[0] + " run: " + err.str());
      continue;
    }
    const std::string manifest = nlohmann::json::parse(out.str())["manifest"];
    std::ostringstream rout, rerr;
    const int code = cli::run({"replay", "--manifest", manifest, "--threads", std::to_string(std::max(3, kThreads))}, rout, rerr);
    const bool identical = code == 0 && nlohmann::json::parse(rout.str())["identical"] == true;
    v.require(identical, base[0] + " replay");
    v.detail << base[0] << (identical ? " identical " : " DIFFERS ");
  }
  fs::remove_all(root);
}

} // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "kernel oracle agreement", 60, kernel_oracle},
      {2, "covariance universality", 600, covariance_universality},
      {3, "Kac-Rice pipeline audit", 300, kac_rice},
      {4, "scaling law on S^2", 1800, scaling_law},
      {5, "barrier positivity", 1200, barrier_positivity},
      {6, "lower-bound assembly and packing", 1200, assembly},
      {7, "topology fixtures", 120, topology_fixtures},
      {8, "RKHS approximation", 300, rkhs},
      {9, "reproducibility from manifests", 600, reproducibility},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

  int failed = 0, ran = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    Verdict v;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.body(v);
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    v.require(seconds <= c.limit_seconds, "runtime limit " + fmt(c.limit_seconds) + " s");
    ++ran;
    if (!v.pass) ++failed;
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.title << ", " << fmt(seconds, 3)
              << " s): " << v.detail.str() << std::endl;
  }
  std::cout << "acceptance: " << ran - failed << "/" << ran << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
