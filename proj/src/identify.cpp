#include "sdeid/identify.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "sdeid/csv.hpp"
#include "sdeid/parallel.hpp"

namespace sdeid {

std::string to_string(ReconstructionMethod method) {
  switch (method) {
    case ReconstructionMethod::short_time:
      return "short_time";
    case ReconstructionMethod::variance_slope:
      return "variance_slope";
    case ReconstructionMethod::global_lsq:
      return "global_lsq";
  }
  return "?";
}

ReconstructionMethod parse_reconstruction_method(const std::string& text) {
  for (auto m : {ReconstructionMethod::short_time, ReconstructionMethod::variance_slope,
                 ReconstructionMethod::global_lsq}) {
    if (text == to_string(m)) return m;
  }
  throw UsageError(fmt::format("unknown method '{}' (expected short_time, variance_slope, global_lsq)", text));
}

std::string to_string(Verdict verdict) {
  return verdict == Verdict::distinguished ? "distinguished" : "identical_within_tol";
}

std::string flag_text(unsigned flags) {
  static constexpr std::pair<unsigned, const char*> kNames[] = {{kFlagClamped, "clamped"},
                                                                {kFlagFrozen, "frozen"},
                                                                {kFlagProjected, "projected"},
                                                                {kFlagOutsideOmega, "outside_omega"},
                                                                {kFlagNoDrift, "no_drift"}};
  std::string out;
  for (const auto& [bit, name] : kNames) {
    if (flags & bit) {
      if (!out.empty()) out += '|';
      out += name;
    }
  }
  return out;
}

namespace {

struct Columns {
  std::vector<double> times;
  std::vector<double> xs;
  Eigen::MatrixXd value;   // n_t x n_x
  Eigen::MatrixXd weight;  // 1 / stderr for Monte Carlo samples, else 1
};

Columns columns_of(const ObservationSet& set, const char* expected_label) {
  if (set.config.kind == ObservationKind::pointwise) {
    throw UsageError("reconstruction needs lattice observations, not pointwise ones");
  }
  if (set.f_label != expected_label) {
    throw UsageError(fmt::format("expected observations of '{}', got '{}'", expected_label, set.f_label));
  }
  Columns c{set.config.times(), set.config.xs(), {}, {}};
  const auto n_t = static_cast<Eigen::Index>(c.times.size());
  const auto n_x = static_cast<Eigen::Index>(c.xs.size());
  if (n_t < 3) throw UsageError("short-time fits need at least 3 time samples");
  if (static_cast<Eigen::Index>(set.samples.size()) != n_t * n_x) {
    throw DataError("observation set does not match its lattice");
  }
  c.value.resize(n_t, n_x);
  c.weight.setOnes(n_t, n_x);
  for (Eigen::Index i = 0; i < n_t; ++i) {
    for (Eigen::Index j = 0; j < n_x; ++j) {
      const auto& s = set.samples[static_cast<std::size_t>(i * n_x + j)];
      if (!std::isfinite(s.value)) throw DataError(fmt::format("non-finite observation at x = {}", s.x));
      c.value(i, j) = s.value;
      if (set.source == SourceKind::monte_carlo && s.std_error > 0) c.weight(i, j) = 1.0 / s.std_error;
    }
  }
  return c;
}

bool same_lattice(const ObservationConfig& a, const ObservationConfig& b) {
  return a.epsilon == b.epsilon && a.omega == b.omega && a.n_t == b.n_t && a.n_x == b.n_x;
}

struct SlopeFit {
  double slope = 0;
  double rms = 0;
  double condition = 0;
};

// y(t) ~ c1 t + c2 t^2 (no intercept: the t = 0 value is known exactly).
SlopeFit fit_slope(const std::vector<double>& t, const Eigen::VectorXd& y, const Eigen::VectorXd& w) {
  const auto n = static_cast<Eigen::Index>(t.size());
  Eigen::MatrixXd a(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ti = t[static_cast<std::size_t>(i)];
    a(i, 0) = w(i) * ti;
    a(i, 1) = w(i) * ti * ti;
  }
  const Eigen::VectorXd rhs = w.cwiseProduct(y);
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  const Eigen::Vector2d c = qr.solve(rhs);
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& sv = svd.singularValues();
  Eigen::VectorXd fitted(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ti = t[static_cast<std::size_t>(i)];
    fitted(i) = c(0) * ti + c(1) * ti * ti;
  }
  return {c(0), std::sqrt((y - fitted).squaredNorm() / static_cast<double>(n)), sv(0) / sv(1)};
}

ReconstructionResult blank(const Columns& c, ReconstructionMethod method) {
  const auto n_x = static_cast<Eigen::Index>(c.xs.size());
  ReconstructionResult r;
  r.x_nodes = Eigen::Map<const Eigen::VectorXd>(c.xs.data(), n_x);
  r.b_hat = Eigen::VectorXd::Constant(n_x, std::numeric_limits<double>::quiet_NaN());
  r.sigma_hat = Eigen::VectorXd::Constant(n_x, std::numeric_limits<double>::quiet_NaN());
  r.residuals = Eigen::VectorXd::Zero(n_x);
  r.flags.assign(static_cast<std::size_t>(n_x), kFlagNone);
  r.method = method;
  return r;
}

// Fills sigma_hat from sigma^2 estimates, clamping negatives.
void set_sigma(ReconstructionResult& r, Eigen::Index j, double sigma2) {
  if (sigma2 < 0) {
    r.flags[static_cast<std::size_t>(j)] |= kFlagClamped;
    sigma2 = 0;
  }
  r.sigma_hat(j) = std::sqrt(sigma2);
}

}  // namespace

ReconstructionResult recover_drift_short_time(const ObservationSet& obs1) {
  obs1.config.check();
  const Columns c = columns_of(obs1, "s");
  ReconstructionResult r = blank(c, ReconstructionMethod::short_time);
  for (Eigen::Index j = 0; j < r.x_nodes.size(); ++j) {
    const Eigen::VectorXd y = c.value.col(j).array() - r.x_nodes(j);
    const SlopeFit fit = fit_slope(c.times, y, c.weight.col(j));
    r.b_hat(j) = fit.slope;
    r.residuals(j) = fit.rms;
    r.diagnostics.condition_estimate = std::max(r.diagnostics.condition_estimate, fit.condition);
  }
  return r;
}

ReconstructionResult recover_diffusion_short_time(const ObservationSet& obs1, const ObservationSet& obs2) {
  if (!same_lattice(obs1.config, obs2.config)) throw UsageError("observation lattices differ");
  ReconstructionResult r = recover_drift_short_time(obs1);
  const Columns c = columns_of(obs2, "s^2");
  for (Eigen::Index j = 0; j < r.x_nodes.size(); ++j) {
    const double x = r.x_nodes(j);
    const Eigen::VectorXd y = c.value.col(j).array() - x * x;
    const SlopeFit fit = fit_slope(c.times, y, c.weight.col(j));
    set_sigma(r, j, fit.slope - 2.0 * x * r.b_hat(j));
    r.residuals(j) = std::hypot(r.residuals(j), fit.rms);
    r.diagnostics.condition_estimate = std::max(r.diagnostics.condition_estimate, fit.condition);
  }
  return r;
}

ReconstructionResult recover_diffusion_variance_slope(const ObservationSet& obs_v, const ObservationSet* obs1) {
  obs_v.config.check();
  const Columns c = columns_of(obs_v, "var");
  ReconstructionResult r = blank(c, ReconstructionMethod::variance_slope);
  if (obs1) {
    if (!same_lattice(obs1->config, obs_v.config)) throw UsageError("observation lattices differ");
    r.b_hat = recover_drift_short_time(*obs1).b_hat;
  } else {
    for (auto& f : r.flags) f |= kFlagNoDrift;
  }
  for (Eigen::Index j = 0; j < r.x_nodes.size(); ++j) {
    const SlopeFit fit = fit_slope(c.times, c.value.col(j), c.weight.col(j));
    set_sigma(r, j, fit.slope);
    r.residuals(j) = fit.rms;
    r.diagnostics.condition_estimate = std::max(r.diagnostics.condition_estimate, fit.condition);
  }
  return r;
}

namespace {

SdeModel piecewise_model(const Eigen::VectorXd& knots, const Eigen::VectorXd& b, const Eigen::VectorXd& sigma,
                         Interval work_interval, double sigma_floor) {
  using Tail = Coefficient::Tail;
  const std::span<const double> k(knots.data(), static_cast<std::size_t>(knots.size()));
  SdeModel m{"reconstruction",
             Coefficient::piecewise_linear(k, {b.data(), static_cast<std::size_t>(b.size())}, Tail::linear),
             Coefficient::piecewise_linear(k, {sigma.data(), static_cast<std::size_t>(sigma.size())}, Tail::constant),
             work_interval};
  m.sigma_floor = std::min(m.sigma_floor, sigma_floor);
  return m;
}

double interpolate_clamped(const std::vector<double>& xs, const Eigen::VectorXd& ys, double x) {
  if (x <= xs.front()) return ys(0);
  if (x >= xs.back()) return ys(ys.size() - 1);
  const auto hi = static_cast<Eigen::Index>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
  const double x0 = xs[static_cast<std::size_t>(hi - 1)];
  const double x1 = xs[static_cast<std::size_t>(hi)];
  const double w = (x - x0) / (x1 - x0);
  return (1 - w) * ys(hi - 1) + w * ys(hi);
}

class JointProblem {
 public:
  JointProblem(const ObservationSet& obs1, const ObservationSet& obs2, Eigen::VectorXd knots, double reg_weight,
               const JointOptions& options)
      : obs1_(obs1), obs2_(obs2), knots_(std::move(knots)), reg_(std::sqrt(reg_weight)), options_(options) {
    grid_ = {options.work_interval.lo, options.work_interval.hi, options.nx, options.t_max, options.nt};
    n_ = knots_.size();
    n_data_ = static_cast<Eigen::Index>(obs1.samples.size() + obs2.samples.size());
  }

  Eigen::Index n_params() const { return 2 * n_; }
  Eigen::Index n_data() const { return n_data_; }

  SdeModel model(const Eigen::VectorXd& p) const {
    return piecewise_model(knots_, p.head(n_), p.tail(n_), options_.work_interval, options_.sigma_floor);
  }

  /// Data residuals followed by regularization rows.
  Eigen::VectorXd residual(const Eigen::VectorXd& p) const {
    const SdeModel m = model(p);
    const SolutionField u1 = solve_fk(m, Observable::monomial(1), grid_, options_.fk);
    const SolutionField u2 = solve_fk(m, Observable::monomial(2), grid_, options_.fk);
    const ObservationSet e1 = extract_from_fields(u1, obs1_.config);
    const ObservationSet e2 = extract_from_fields(u2, obs2_.config);
    const Eigen::Index n_reg = reg_ > 0 ? 2 * std::max<Eigen::Index>(n_ - 2, 0) : 0;
    Eigen::VectorXd r(n_data_ + n_reg);
    Eigen::Index row = 0;
    for (std::size_t i = 0; i < e1.samples.size(); ++i) r(row++) = e1.samples[i].value - obs1_.samples[i].value;
    for (std::size_t i = 0; i < e2.samples.size(); ++i) r(row++) = e2.samples[i].value - obs2_.samples[i].value;
    for (int block = 0; block < 2 && n_reg > 0; ++block) {
      const Eigen::VectorXd q = p.segment(block * n_, n_);
      for (Eigen::Index i = 1; i + 1 < n_; ++i) r(row++) = reg_ * (q(i - 1) - 2 * q(i) + q(i + 1));
    }
    return r;
  }

  double step(const Eigen::VectorXd& p, Eigen::Index i) const {
    return options_.fd_step * std::max(1.0, std::abs(p(i)));
  }

  Eigen::MatrixXd jacobian(const Eigen::VectorXd& p, const std::vector<Eigen::Index>& free, Eigen::Index rows) const {
    Eigen::MatrixXd j(rows, static_cast<Eigen::Index>(free.size()));
    parallel_for(free.size(), options_.threads, [&](std::size_t c) {
      const Eigen::Index i = free[c];
      const double h = step(p, i);
      Eigen::VectorXd up = p, down = p;
      up(i) += h;
      down(i) -= h;
      j.col(static_cast<Eigen::Index>(c)) = (residual(up) - residual(down)) / (2 * h);
    });
    return j;
  }

 private:
  const ObservationSet& obs1_;
  const ObservationSet& obs2_;
  Eigen::VectorXd knots_;
  double reg_;
  JointOptions options_;
  Grid1D grid_;
  Eigen::Index n_ = 0;
  Eigen::Index n_data_ = 0;
};

}  // namespace

ReconstructionResult recover_joint_global(const ObservationSet& obs1, const ObservationSet& obs2,
                                          Interval recon_interval, double reg_weight, const JointOptions& options) {
  if (!(reg_weight >= 0)) throw UsageError("reg_weight must be non-negative");
  if (options.n_nodes < 2) throw UsageError("joint fit needs at least 2 nodes");
  if (!(recon_interval.hi > recon_interval.lo) || !options.work_interval.contains(recon_interval)) {
    throw UsageError("recon_interval must be a non-empty subinterval of the work interval");
  }
  if (options.max_iters < 0) throw UsageError("max_iters must be non-negative");
  if (!same_lattice(obs1.config, obs2.config)) throw UsageError("observation lattices differ");

  const ReconstructionResult start = recover_diffusion_short_time(obs1, obs2);
  const std::vector<double> xs = obs1.config.xs();
  const int n = options.n_nodes;
  Eigen::VectorXd knots(n);
  for (int i = 0; i < n; ++i) {
    knots(i) = i == n - 1 ? recon_interval.hi : recon_interval.lo + i * recon_interval.width() / (n - 1);
  }

  Eigen::VectorXd p(2 * n);
  for (int i = 0; i < n; ++i) {
    p(i) = interpolate_clamped(xs, start.b_hat, knots(i));
    p(n + i) = std::max(interpolate_clamped(xs, start.sigma_hat, knots(i)), options.sigma_floor);
  }

  ReconstructionResult r;
  r.method = ReconstructionMethod::global_lsq;
  r.x_nodes = knots;
  r.flags.assign(static_cast<std::size_t>(n), kFlagNone);
  for (int i = 0; i < n; ++i) {
    if (!obs1.config.omega.contains(knots(i))) r.flags[static_cast<std::size_t>(i)] |= kFlagOutsideOmega;
  }
  FitDiagnostics& diag = r.diagnostics;

  const JointProblem problem(obs1, obs2, knots, reg_weight, options);
  auto project = [&](Eigen::VectorXd& q) {
    for (int i = 0; i < n; ++i) {
      if (q(n + i) < options.sigma_floor) {
        q(n + i) = options.sigma_floor;
        r.flags[static_cast<std::size_t>(i)] |= kFlagProjected;
      }
    }
  };

  Eigen::VectorXd res = problem.residual(p);
  diag.pde_solves += 2;
  double cost = res.squaredNorm();
  diag.misfit_history.push_back(cost);

  std::vector<Eigen::Index> free;
  Eigen::MatrixXd initial_jacobian;
  {
    const Eigen::MatrixXd j = problem.jacobian(p, [&] {
      std::vector<Eigen::Index> all(static_cast<std::size_t>(2 * n));
      for (Eigen::Index i = 0; i < 2 * n; ++i) all[static_cast<std::size_t>(i)] = i;
      return all;
    }(), res.size());
    diag.pde_solves += 8 * n;
    const Eigen::VectorXd sens = j.topRows(problem.n_data()).colwise().squaredNorm();
    diag.sensitivity_b = sens.head(n);
    diag.sensitivity_sigma = sens.tail(n);
    const double cutoff = 1e-8 * sens.maxCoeff();
    for (Eigen::Index i = 0; i < 2 * n; ++i) {
      if (sens(i) >= cutoff && sens(i) > 0) {
        free.push_back(i);
      } else {
        r.flags[static_cast<std::size_t>(i % n)] |= kFlagFrozen;
      }
    }
    initial_jacobian.resize(j.rows(), static_cast<Eigen::Index>(free.size()));
    for (std::size_t c = 0; c < free.size(); ++c) initial_jacobian.col(static_cast<Eigen::Index>(c)) = j.col(free[c]);
  }

  double lambda = 1e-3;
  diag.converged = false;
  diag.stop_reason = "max_iters";
  Eigen::MatrixXd a;
  for (int iter = 0; iter < options.max_iters && !free.empty(); ++iter) {
    diag.iterations = iter + 1;
    Eigen::MatrixXd j;
    if (iter == 0) {
      j = std::move(initial_jacobian);
    } else {
      j = problem.jacobian(p, free, res.size());
      diag.pde_solves += 4 * static_cast<int>(free.size());
    }
    a = j.transpose() * j;
    const Eigen::VectorXd g = j.transpose() * res;
    bool accepted = false;
    Eigen::VectorXd delta;
    while (lambda <= 1e12) {
      Eigen::MatrixXd damped = a;
      damped.diagonal() += lambda * a.diagonal();
      delta = damped.ldlt().solve(-g);
      Eigen::VectorXd trial = p;
      for (std::size_t c = 0; c < free.size(); ++c) trial(free[c]) += delta(static_cast<Eigen::Index>(c));
      project(trial);
      const Eigen::VectorXd trial_res = problem.residual(trial);
      diag.pde_solves += 2;
      const double trial_cost = trial_res.squaredNorm();
      if (std::isfinite(trial_cost) && trial_cost < cost) {
        const double previous = cost;
        p = trial;
        res = trial_res;
        cost = trial_cost;
        lambda = std::max(lambda / 10, 1e-12);
        accepted = true;
        if (previous - cost <= options.relative_tolerance * previous) {
          diag.converged = true;
          diag.stop_reason = "relative_decrease";
        }
        break;
      }
      lambda *= 10;
    }
    diag.misfit_history.push_back(cost);
    if (!accepted) {
      diag.converged = true;
      diag.stop_reason = "no_descent";
      break;
    }
    if (diag.converged) break;
    if (delta.lpNorm<Eigen::Infinity>() <= 1e-12 * std::max(1.0, p.lpNorm<Eigen::Infinity>())) {
      diag.converged = true;
      diag.stop_reason = "small_step";
      break;
    }
  }
  if (a.size() > 0) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    diag.condition_estimate = lo > 0 ? eig.eigenvalues().maxCoeff() / lo : std::numeric_limits<double>::infinity();
  }

  r.b_hat = p.head(n);
  r.sigma_hat = p.tail(n);

  // RMS data residual of the observation columns nearest to each node.
  r.residuals = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::quiet_NaN());
  const auto n_x = static_cast<std::size_t>(xs.size());
  const std::size_t n_t = obs1.samples.size() / n_x;
  std::vector<double> sum(static_cast<std::size_t>(n), 0.0);
  std::vector<int> count(static_cast<std::size_t>(n), 0);
  for (std::size_t jx = 0; jx < n_x; ++jx) {
    Eigen::Index nearest = 0;
    (knots.array() - xs[jx]).abs().minCoeff(&nearest);
    for (std::size_t it = 0; it < n_t; ++it) {
      const double r1 = res(static_cast<Eigen::Index>(it * n_x + jx));
      const double r2 = res(static_cast<Eigen::Index>(n_t * n_x + it * n_x + jx));
      sum[static_cast<std::size_t>(nearest)] += r1 * r1 + r2 * r2;
      count[static_cast<std::size_t>(nearest)] += 2;
    }
  }
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (count[k] > 0) r.residuals(i) = std::sqrt(sum[k] / count[k]);
  }
  return r;
}

SdeModel joint_model(const ReconstructionResult& result, Interval work_interval) {
  return piecewise_model(result.x_nodes, result.b_hat, result.sigma_hat, work_interval, 1e-6);
}

DistinguishabilityReport distinguishability_test(const SdeModel& model_a, const SdeModel& model_b,
                                                 const ObservationConfig& config, const std::vector<Observable>& fs,
                                                 const DistinguishOptions& options) {
  if (!(model_a.work_interval == model_b.work_interval)) {
    throw UsageError("distinguishability test needs models with the same work interval");
  }
  if (fs.empty()) throw UsageError("distinguishability test needs at least one observable");
  config.check();
  const Interval& work = model_a.work_interval;
  const Grid1D grid{work.lo, work.hi, options.nx, options.t_max, options.nt};

  DistinguishabilityReport report;
  report.tol = options.tol;
  std::vector<int> nodes;
  for (int j = 0; j < grid.nx; ++j) {
    if (config.omega.contains(grid.x(j))) nodes.push_back(j);
  }
  const auto m = static_cast<Eigen::Index>(nodes.size());
  report.x_nodes.resize(m);
  report.B_true.resize(m);
  report.Sigma_true.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double x = grid.x(nodes[static_cast<std::size_t>(i)]);
    report.x_nodes(i) = x;
    report.B_true(i) = model_a.b(x) - model_b.b(x);
    const double sa = model_a.sigma(x);
    const double sb = model_b.sigma(x);
    report.Sigma_true(i) = 0.5 * (sa * sa - sb * sb);
  }

  ObservationConfig lattice = config;
  if (lattice.kind != ObservationKind::pointwise) lattice.kind = ObservationKind::expectation;
  for (const Observable& f : fs) {
    ObservableComparison cmp;
    cmp.f_label = f.label();
    const SolutionField ua = solve_fk(model_a, f, grid, options.fk);
    const SolutionField ub = solve_fk(model_b, f, grid, options.fk);
    cmp.a = extract_from_fields(ua, lattice);
    cmp.b = extract_from_fields(ub, lattice);
    cmp.sup_abs_U = distance(cmp.a, cmp.b);
    const Eigen::VectorXd dt = time_deriv_at_zero(ua) - time_deriv_at_zero(ub);
    cmp.dtU0.resize(m);
    cmp.predicted.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double x = report.x_nodes(i);
      cmp.dtU0(i) = dt(nodes[static_cast<std::size_t>(i)]);
      cmp.predicted(i) = report.B_true(i) * f.d1(x) + report.Sigma_true(i) * f.d2(x);
    }
    cmp.max_identity_error = m > 0 ? (cmp.dtU0 - cmp.predicted).lpNorm<Eigen::Infinity>() : 0.0;
    report.sup_abs_U = std::max(report.sup_abs_U, cmp.sup_abs_U);
    report.per_f.push_back(std::move(cmp));
  }
  report.verdict = report.sup_abs_U > options.tol ? Verdict::distinguished : Verdict::identical_within_tol;
  return report;
}

void write_reconstruction_csv(std::ostream& os, const ReconstructionResult& result) {
  os << "x,b_hat,sigma_hat,residual,flags\n";
  for (Eigen::Index i = 0; i < result.x_nodes.size(); ++i) {
    os << csv_number(result.x_nodes(i)) << ',' << csv_number(result.b_hat(i)) << ','
       << csv_number(result.sigma_hat(i)) << ',' << csv_number(result.residuals(i)) << ','
       << flag_text(result.flags[static_cast<std::size_t>(i)]) << '\n';
  }
}

void write_report_text(std::ostream& os, const DistinguishabilityReport& report) {
  auto sup = [](const Eigen::VectorXd& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; };
  os << "verdict: " << to_string(report.verdict) << '\n';
  os << "sup_abs_U: " << csv_number(report.sup_abs_U) << '\n';
  os << "tol: " << csv_number(report.tol) << '\n';
  os << "omega_nodes: " << report.x_nodes.size() << '\n';
  os << "sup_abs_B: " << csv_number(sup(report.B_true)) << '\n';
  os << "sup_abs_Sigma: " << csv_number(sup(report.Sigma_true)) << '\n';
  for (const auto& cmp : report.per_f) {
    os << "f[" << cmp.f_label << "].sup_abs_U: " << csv_number(cmp.sup_abs_U) << '\n';
    os << "f[" << cmp.f_label << "].sup_abs_dtU0: " << csv_number(sup(cmp.dtU0)) << '\n';
    os << "f[" << cmp.f_label << "].max_identity_error: " << csv_number(cmp.max_identity_error) << '\n';
  }
}

void write_difference_csv(std::ostream& os, const DistinguishabilityReport& report) {
  os << "f,t,x,derivative_flag,u_a,u_b,diff\n";
  for (const auto& cmp : report.per_f) {
    for (std::size_t i = 0; i < cmp.a.samples.size(); ++i) {
      const auto& a = cmp.a.samples[i];
      const auto& b = cmp.b.samples[i];
      os << cmp.f_label << ',' << csv_number(a.t) << ',' << csv_number(a.x) << ',' << (a.derivative ? 1 : 0) << ','
         << csv_number(a.value) << ',' << csv_number(b.value) << ',' << csv_number(a.value - b.value) << '\n';
    }
  }
}

}  // namespace sdeid
