// Acceptance harness: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <fmt/core.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sdeid/fk_solver.hpp"
#include "sdeid/gallery.hpp"
#include "sdeid/identify.hpp"
#include "sdeid/observe.hpp"
#include "sdeid/simulate.hpp"

using namespace sdeid;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct GalleryCase {
  SdeModel model;
  Interval omega;
};

std::vector<GalleryCase> gallery_cases() {
  return {{ornstein_uhlenbeck(), {-0.5, 0.5}},
          {geometric_brownian(), {0.5, 1.5}},
          {wright_fisher(), {0.3, 0.7}},
          {brownian(), {-0.5, 0.5}},
          {constant_model(0.3, 0.5), {-0.5, 0.5}}};
}

double sup_error(const Eigen::VectorXd& x, const Eigen::VectorXd& estimate, const std::function<double(double)>& truth) {
  double worst = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(estimate(i) - truth(x(i))));
  return worst;
}

ObservationSet observe(const SdeModel& model, Interval omega, ObservationKind kind, int k = 1) {
  ObservationConfig c;
  c.omega = omega;
  c.kind = kind;
  c.k = k;
  return extract(PdeSource{model, Grid1D::reference(model), {}}, c);
}

double max_field_error(const SolutionField& field, const std::function<double(double, double)>& exact, double lo,
                       double hi) {
  double worst = 0;
  for (int k = 0; k <= field.grid.nt; ++k) {
    for (int j = 0; j < field.grid.nx; ++j) {
      const double x = field.grid.x(j);
      if (x < lo || x > hi) continue;
      worst = std::max(worst, std::abs(field.u(k, j) - exact(field.grid.t(k), x)));
    }
  }
  return worst;
}

Grid1D refined(Grid1D g) {
  g.nx = 2 * g.nx - 1;
  g.nt *= 2;
  return g;
}

Outcome ou_oracle() {
  const SdeModel ou = ornstein_uhlenbeck(1, 0.5, 0.2);
  const Grid1D grid{-4.0, 4.0, 401, 0.1, 200};
  const Stopwatch clock;
  const SolutionField field = solve_fk(ou, Observable::monomial(1), grid);
  const double elapsed = clock.seconds();
  const double err = max_field_error(field, [](double t, double x) { return oracle::ou_mean(1, 0.5, x, t); }, -4, 4);
  return {err <= 1e-4 && elapsed < 5.0, fmt::format("sup_err={:.3e} time={:.2f}s", err, elapsed)};
}

Outcome mc_pde_consistency() {
  const Stopwatch clock;
  int checked = 0;
  int failed = 0;
  double worst_ratio = 0;
  std::int64_t clamped = 0;
  std::uint64_t seed = 1000;
  for (const auto& [model, omega] : gallery_cases()) {
    const std::vector<std::pair<double, double>> probes{{0.02, omega.lo},
                                                        {0.05, omega.lo + 0.25 * omega.width()},
                                                        {0.1, omega.mid()},
                                                        {0.05, omega.lo + 0.75 * omega.width()},
                                                        {0.1, omega.hi}};
    for (const char* label : {"s", "s^2"}) {
      const Observable f = Observable::parse(label);
      const SolutionField field = solve_fk(model, f, Grid1D::reference(model));
      for (const auto& [t, x0] : probes) {
        const auto est = mc_moment(model, x0, std::vector<double>{t}, f, 100000, ++seed);
        const double gap = std::abs(est[0].mean - field.value_cubic(t, x0));
        const double allowed = 4 * est[0].std_error + 1e-3;
        worst_ratio = std::max(worst_ratio, gap / allowed);
        failed += gap > allowed;
        clamped += est[0].clamped_paths;
        ++checked;
      }
    }
  }
  const double elapsed = clock.seconds();
  return {failed == 0 && clamped == 0 && elapsed < 60.0,
          fmt::format("probes={} failed={} worst_gap/allowed={:.3f} clamped_paths={} time={:.1f}s", checked, failed,
                      worst_ratio, clamped, elapsed)};
}

Outcome drift_identification() {
  const ReconstructionResult ou =
      recover_drift_short_time(observe(ornstein_uhlenbeck(1, 0.5, 0.2), {-0.5, 0.5}, ObservationKind::moment));
  const double err = sup_error(ou.x_nodes, ou.b_hat, [](double x) { return 0.5 - x; });
  const ReconstructionResult flat = recover_drift_short_time(observe(brownian(), {-0.5, 0.5}, ObservationKind::moment));
  const double zero = flat.b_hat.cwiseAbs().maxCoeff();
  return {err <= 0.01 && zero <= 1e-6, fmt::format("ou_sup_err={:.3e} zero_drift_sup={:.3e}", err, zero)};
}

Outcome diffusion_identification() {
  struct Case {
    SdeModel model;
    Interval omega;
    std::function<double(double)> sigma;
    double tol;
  };
  const std::vector<Case> cases{{ornstein_uhlenbeck(1, 0.5, 0.2), {-0.5, 0.5}, [](double) { return 0.2; }, 0.01},
                                {constant_model(0.0, 0.2), {-0.5, 0.5}, [](double) { return 0.2; }, 0.01},
                                {geometric_brownian(0.1, 0.2), {0.5, 1.5}, [](double x) { return 0.2 * x; }, 0.015}};
  bool pass = true;
  std::string detail;
  for (const auto& c : cases) {
    const ObservationSet o1 = observe(c.model, c.omega, ObservationKind::moment, 1);
    const ObservationSet o2 = observe(c.model, c.omega, ObservationKind::moment, 2);
    const ObservationSet ov = observe(c.model, c.omega, ObservationKind::variance);
    const ReconstructionResult st = recover_diffusion_short_time(o1, o2);
    const ReconstructionResult vs = recover_diffusion_variance_slope(ov, &o1);
    const double e1 = sup_error(st.x_nodes, st.sigma_hat, c.sigma);
    const double e2 = sup_error(vs.x_nodes, vs.sigma_hat, c.sigma);
    const double agree = (st.sigma_hat - vs.sigma_hat).cwiseAbs().maxCoeff();
    pass = pass && e1 <= c.tol && e2 <= c.tol && agree <= 0.02;
    detail += fmt::format("{}: short_time={:.2e} variance_slope={:.2e} agree={:.2e}; ", c.model.name, e1, e2, agree);
  }
  detail.resize(detail.size() - 2);
  return {pass, detail};
}

Outcome joint_identification() {
  const SdeModel ou = ornstein_uhlenbeck();
  const ObservationSet o1 = observe(ou, {-0.5, 0.5}, ObservationKind::moment, 1);
  const ObservationSet o2 = observe(ou, {-0.5, 0.5}, ObservationKind::moment, 2);
  const Stopwatch clock;
  const ReconstructionResult r = recover_joint_global(o1, o2, {-0.5, 0.5}, 0.0);
  const double elapsed = clock.seconds();
  const double eb = sup_error(r.x_nodes, r.b_hat, [](double x) { return 0.5 - x; });
  const double es = sup_error(r.x_nodes, r.sigma_hat, [](double) { return 0.2; });
  return {eb <= 0.02 && es <= 0.01 && elapsed < 300.0,
          fmt::format("b_sup_err={:.2e} sigma_sup_err={:.2e} iterations={} solves={} time={:.1f}s", eb, es,
                      r.diagnostics.iterations, r.diagnostics.pde_solves, elapsed)};
}

Outcome uniqueness_falsifier() {
  const std::vector<Observable> fs{Observable::monomial(1), Observable::monomial(2)};
  int cases = 0;
  int failed = 0;
  double min_sup = INFINITY;
  double worst_identity = 0;
  double worst_identical = 0;
  for (const auto& [model, omega] : gallery_cases()) {
    ObservationConfig c;
    c.omega = omega;
    c.kind = ObservationKind::expectation;
    worst_identical = std::max(worst_identical, distinguishability_test(model, model, c, fs).sup_abs_U);
    for (double height : {0.05, 0.1, 0.2}) {
      for (bool in_drift : {true, false}) {
        const double width = 0.4 * omega.width();
        const SdeModel other = in_drift ? with_drift_bump(model, height, omega.mid(), width)
                                        : with_variance_bump(model, height, omega.mid(), width);
        const DistinguishabilityReport r = distinguishability_test(model, other, c, fs);
        double identity = 0;
        for (const auto& cmp : r.per_f) identity = std::max(identity, cmp.max_identity_error);
        min_sup = std::min(min_sup, r.sup_abs_U);
        worst_identity = std::max(worst_identity, identity);
        failed += r.verdict != Verdict::distinguished || r.sup_abs_U <= 10 * kPdeTolerance || identity > 1e-3;
        ++cases;
      }
    }
  }
  return {failed == 0 && worst_identical <= 1e-12,
          fmt::format("perturbed={} failed={} min_sup_abs_U={:.3e} max_identity_err={:.2e} identical_sup={:.1e}",
                      cases, failed, min_sup, worst_identity, worst_identical)};
}

Outcome invariants() {
  FkOptions reflecting;
  reflecting.boundary = BoundaryCondition::neumann;
  int violations = 0;
  for (const auto& entry : gallery()) {
    const SdeModel model = make_model(entry.name);
    Grid1D grid = Grid1D::reference(model);
    grid.nt = 400;
    for (const char* label : {"tanh", "gauss", "sin"}) {
      const SolutionField field = solve_fk(model, Observable::parse(label), grid, reflecting);
      const double lo = field.u.row(0).minCoeff();
      const double hi = field.u.row(0).maxCoeff();
      const double tol = 10 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi));
      violations += field.u.minCoeff() < lo - tol || field.u.maxCoeff() > hi + tol;
    }
  }

  int mc_failures = 0;
  const std::vector<double> times{0.02, 0.05, 0.1};
  for (double x0 : {-0.5, 0.0, 0.3}) {
    for (const auto& e : mc_moment(brownian(0.7), x0, times, Observable::monomial(1), 20000, 500)) {
      mc_failures += std::abs(e.mean - x0) > 4 * e.std_error;
    }
  }
  const SolutionField flat = solve_fk(brownian(0.7), Observable::monomial(1), Grid1D{-4, 4, 401, 0.1, 200});
  const double pde_drift = max_field_error(flat, [](double, double x) { return x; }, -4, 4);

  const SdeModel ou = ornstein_uhlenbeck(1, 0.5, 0.2);
  const Grid1D base{-4.0, 4.0, 401, 0.1, 200};
  auto ou2 = [](double t, double x) { return oracle::ou_second_moment(1, 0.5, 0.2, x, t); };
  const double ratio_ou = max_field_error(solve_fk(ou, Observable::monomial(2), base), ou2, -1, 2) /
                          max_field_error(solve_fk(ou, Observable::monomial(2), refined(base)), ou2, -1, 2);
  const Grid1D coarse{-4.0, 4.0, 101, 0.1, 50};
  auto heat = [](double t, double x) { return std::sin(x) * std::exp(-0.5 * t); };
  const double ratio_sin = max_field_error(solve_fk(brownian(1.0), Observable::parse("sin"), coarse), heat, -2, 2) /
                           max_field_error(solve_fk(brownian(1.0), Observable::parse("sin"), refined(coarse)), heat, -2, 2);

  const bool pass = violations == 0 && mc_failures == 0 && pde_drift <= 1e-8 && ratio_ou >= 3.5 && ratio_sin >= 3.5;
  return {pass, fmt::format("max_principle_violations={} mc_martingale_failures={} pde_martingale_err={:.1e} "
                            "convergence_ratio_ou_s2={:.2f} convergence_ratio_sin={:.2f}",
                            violations, mc_failures, pde_drift, ratio_ou, ratio_sin)};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / ("sdeid_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  const std::vector<std::pair<std::string, std::string>> runs{
      {"simulate", "--set simulate.n_paths=20000 --set simulate.write_paths=5"},
      {"observe", "--set observation.source=monte_carlo --set observation.n_paths=2000 --set observation.n_x=5"},
      {"observe", "--set observation.kind=O_prime --set observation.source=monte_carlo --set observation.n_paths=5000"},
      {"identify", ""},
      {"solve", ""}};
  int compared = 0;
  int mismatches = 0;
  int run_failures = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& [pipeline, extra] = runs[i];
    std::vector<fs::path> dirs;
    for (int threads : {1, 1, 2, 3}) {
      const fs::path out = root / fmt::format("{}_{}_{}", i, threads, dirs.size());
      const std::string cmd = fmt::format("{} {} --seed 42 --threads {} --out '{}' {} > /dev/null 2>&1",
                                          SDEID_CLI_PATH, pipeline, threads, out.string(), extra);
      const int status = std::system(cmd.c_str());
      run_failures += !(WIFEXITED(status) && WEXITSTATUS(status) == 0);
      dirs.push_back(out);
    }
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
      if (entry.path().extension() != ".csv") continue;
      const std::string reference = slurp(entry.path());
      for (std::size_t d = 1; d < dirs.size(); ++d) {
        mismatches += slurp(dirs[d] / entry.path().filename()) != reference;
        ++compared;
      }
    }
  }
  fs::remove_all(root);
  return {run_failures == 0 && mismatches == 0 && compared > 0,
          fmt::format("csv_comparisons={} mismatches={} failed_runs={} threads=1,1,2,3", compared, mismatches,
                      run_failures)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria{
      {"C1 OU oracle", ou_oracle},
      {"C2 MC/PDE consistency", mc_pde_consistency},
      {"C3 drift identification", drift_identification},
      {"C4 diffusion identification", diffusion_identification},
      {"C5 joint identification", joint_identification},
      {"C6 uniqueness falsifier", uniqueness_falsifier},
      {"C7 invariant suites", invariants},
      {"C8 determinism", determinism}};
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome outcome;
    try {
      outcome = run();
    } catch (const std::exception& e) {
      outcome = {false, fmt::format("exception: {}", e.what())};
    }
    failures += !outcome.pass;
    fmt::print("{} {}: {}\n", outcome.pass ? "PASS" : "FAIL", name, outcome.detail);
    std::fflush(stdout);
  }
  fmt::print("{}/{} criteria passed\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
