#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "sdeid/model.hpp"
#include "sdeid/observable.hpp"

namespace sdeid {

/// Euler-Maruyama sample paths, one row per path, column k at time k*dt.
struct PathBatch {
  double x0 = 0;
  double dt = 0;
  int n_steps = 0;
  int n_paths = 0;
  std::uint64_t seed = 0;
  Eigen::MatrixXd values;
  /// Paths that touched the work-interval boundary and were clamped.
  std::int64_t clamped_paths = 0;

  double horizon() const { return dt * n_steps; }
};

struct MomentEstimate {
  double t = 0;
  double x0 = 0;
  std::string f;  // observable label, or "var" for the variance statistic
  double mean = 0;
  double std_error = 0;
  int n_paths = 0;
  std::int64_t clamped_paths = 0;
};

struct McOptions {
  double dt = 1e-3;
  int threads = 1;
};

PathBatch simulate_paths(const SdeModel& model, double x0, double dt, int n_steps, int n_paths, std::uint64_t seed,
                         int threads = 1);

/// f(X_t) for every t in `t_grid` (rows) and path (columns). Time steps are
/// `options.dt`, shortened where needed to land exactly on each t.
Eigen::MatrixXd sample_observable(const SdeModel& model, double x0, std::span<const double> t_grid,
                                  const Observable& f, int n_paths, std::uint64_t seed, const McOptions& options,
                                  std::int64_t* clamped_paths = nullptr);

std::vector<MomentEstimate> mc_moment(const SdeModel& model, double x0, std::span<const double> t_grid,
                                      const Observable& f, int n_paths, std::uint64_t seed,
                                      const McOptions& options = {});

/// V^x[X_t] = E[X_t^2] - E[X_t]^2 with the unbiased sample variance;
/// std_error from the delta method, i.e. the standard error of the mean of
/// (X - mean)^2.
std::vector<MomentEstimate> mc_variance(const SdeModel& model, double x0, std::span<const double> t_grid,
                                        int n_paths, std::uint64_t seed, const McOptions& options = {});

/// Header `t,x0,f,mean,stderr,n_paths`.
void write_moments_csv(std::ostream& os, std::span<const MomentEstimate> estimates);

}  // namespace sdeid
