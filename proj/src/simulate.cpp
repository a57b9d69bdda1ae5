#include "sdeid/simulate.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>

#include "sdeid/counter_rng.hpp"
#include "sdeid/csv.hpp"
#include "sdeid/parallel.hpp"
#include "sdeid/stats.hpp"

namespace sdeid {
namespace {

void check_start(const SdeModel& model, double x0) {
  if (!std::isfinite(x0) || !model.work_interval.contains(x0)) {
    throw UsageError(fmt::format("x0 = {} lies outside the work interval [{}, {}]", x0, model.work_interval.lo,
                                 model.work_interval.hi));
  }
}

/// Advances x by one Euler-Maruyama step; returns true if clamped.
inline bool euler_step(const SdeModel& model, double& x, double step, double normal) {
  x += model.b(x) * step + model.sigma(x) * std::sqrt(step) * normal;
  if (x < model.work_interval.lo) {
    x = model.work_interval.lo;
    return true;
  }
  if (x > model.work_interval.hi) {
    x = model.work_interval.hi;
    return true;
  }
  return false;
}

struct Schedule {
  std::vector<double> times;          // times[0] = 0
  std::vector<std::size_t> targets;   // index into times of each requested t
};

Schedule make_schedule(std::span<const double> t_grid, double dt) {
  if (t_grid.empty()) throw UsageError("empty t_grid");
  if (!(dt > 0)) throw UsageError("dt must be positive");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > 0) || !std::isfinite(t_grid[i])) throw UsageError("t_grid entries must be positive");
    if (i > 0 && !(t_grid[i] > t_grid[i - 1])) throw UsageError("t_grid must be strictly increasing");
  }
  Schedule s;
  s.times.push_back(0.0);
  std::size_t next = 0;
  for (long k = 1;; ++k) {
    const double uniform = static_cast<double>(k) * dt;
    while (next < t_grid.size() && t_grid[next] <= uniform + 1e-9 * dt) {
      if (t_grid[next] - s.times.back() > 1e-9 * dt) s.times.push_back(t_grid[next]);
      s.targets.push_back(s.times.size() - 1);
      ++next;
    }
    if (next == t_grid.size()) break;
    if (uniform - s.times.back() > 1e-9 * dt) s.times.push_back(uniform);
  }
  return s;
}

}  // namespace

PathBatch simulate_paths(const SdeModel& model, double x0, double dt, int n_steps, int n_paths, std::uint64_t seed,
                         int threads) {
  if (!(dt > 0)) throw UsageError("simulate_paths: dt must be positive");
  if (n_steps < 0) throw UsageError("simulate_paths: n_steps must be non-negative");
  if (n_paths < 1) throw UsageError("simulate_paths: n_paths must be at least 1");
  check_start(model, x0);

  PathBatch batch{x0, dt, n_steps, n_paths, seed, Eigen::MatrixXd(n_paths, n_steps + 1), 0};
  const NormalDraws draws(seed);
  std::vector<char> clamped(static_cast<std::size_t>(n_paths), 0);
  parallel_for(static_cast<std::size_t>(n_paths), threads, [&](std::size_t path) {
    double x = x0;
    batch.values(static_cast<Eigen::Index>(path), 0) = x;
    bool hit = false;
    std::array<double, 2> normals{};
    for (int k = 0; k < n_steps; ++k) {
      if (k % 2 == 0) normals = draws.pair(path, static_cast<std::uint64_t>(k / 2));
      hit |= euler_step(model, x, dt, normals[k % 2]);
      batch.values(static_cast<Eigen::Index>(path), k + 1) = x;
    }
    clamped[path] = hit;
  });
  batch.clamped_paths = std::count(clamped.begin(), clamped.end(), 1);
  return batch;
}

Eigen::MatrixXd sample_observable(const SdeModel& model, double x0, std::span<const double> t_grid,
                                  const Observable& f, int n_paths, std::uint64_t seed, const McOptions& options,
                                  std::int64_t* clamped_paths) {
  if (n_paths < 1) throw UsageError("n_paths must be at least 1");
  check_start(model, x0);
  const Schedule schedule = make_schedule(t_grid, options.dt);
  const auto n_t = static_cast<Eigen::Index>(t_grid.size());
  Eigen::MatrixXd out(n_t, n_paths);
  const NormalDraws draws(seed);
  std::vector<char> clamped(static_cast<std::size_t>(n_paths), 0);

  parallel_for(static_cast<std::size_t>(n_paths), options.threads, [&](std::size_t path) {
    double x = x0;
    bool hit = false;
    std::size_t target = 0;
    std::array<double, 2> normals{};
    for (std::size_t k = 1; k < schedule.times.size(); ++k) {
      const std::size_t step = k - 1;
      if (step % 2 == 0) normals = draws.pair(path, step / 2);
      hit |= euler_step(model, x, schedule.times[k] - schedule.times[k - 1], normals[step % 2]);
      while (target < schedule.targets.size() && schedule.targets[target] == k) {
        out(static_cast<Eigen::Index>(target), static_cast<Eigen::Index>(path)) = f.value(x);
        ++target;
      }
    }
    clamped[path] = hit;
  });
  if (clamped_paths) *clamped_paths = std::count(clamped.begin(), clamped.end(), 1);
  return out;
}

std::vector<MomentEstimate> mc_moment(const SdeModel& model, double x0, std::span<const double> t_grid,
                                      const Observable& f, int n_paths, std::uint64_t seed,
                                      const McOptions& options) {
  std::int64_t clamped = 0;
  const Eigen::MatrixXd samples = sample_observable(model, x0, t_grid, f, n_paths, seed, options, &clamped);
  std::vector<MomentEstimate> out;
  out.reserve(t_grid.size());
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    const SampleSummary s = summarize(samples.row(i).transpose());
    out.push_back({t_grid[static_cast<std::size_t>(i)], x0, f.label(), s.mean, s.stderr_of_mean, n_paths, clamped});
  }
  return out;
}

std::vector<MomentEstimate> mc_variance(const SdeModel& model, double x0, std::span<const double> t_grid,
                                        int n_paths, std::uint64_t seed, const McOptions& options) {
  std::int64_t clamped = 0;
  const Eigen::MatrixXd samples =
      sample_observable(model, x0, t_grid, Observable::monomial(1), n_paths, seed, options, &clamped);
  std::vector<MomentEstimate> out;
  out.reserve(t_grid.size());
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    const SampleSummary first = summarize(samples.row(i).transpose());
    const Eigen::VectorXd squared_dev = (samples.row(i).transpose().array() - first.mean).square().matrix();
    const SampleSummary second = summarize(squared_dev);
    out.push_back({t_grid[static_cast<std::size_t>(i)], x0, "var", first.variance, second.stderr_of_mean, n_paths,
                   clamped});
  }
  return out;
}

void write_moments_csv(std::ostream& os, std::span<const MomentEstimate> estimates) {
  os << "t,x0,f,mean,stderr,n_paths\n";
  for (const auto& e : estimates) {
    os << csv_number(e.t) << ',' << csv_number(e.x0) << ',' << e.f << ',' << csv_number(e.mean) << ','
       << csv_number(e.std_error) << ',' << e.n_paths << '\n';
  }
}

}  // namespace sdeid
