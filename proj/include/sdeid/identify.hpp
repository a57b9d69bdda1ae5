#pragma once

#include <Eigen/Core>

#include <ostream>
#include <string>
#include <vector>

#include "sdeid/fk_solver.hpp"
#include "sdeid/model.hpp"
#include "sdeid/observe.hpp"

namespace sdeid {

enum class ReconstructionMethod { short_time, variance_slope, global_lsq };

std::string to_string(ReconstructionMethod method);
ReconstructionMethod parse_reconstruction_method(const std::string& text);

/// Per-node flag bits.
enum NodeFlag : unsigned {
  kFlagNone = 0,
  kFlagClamped = 1u << 0,    // negative sigma^2 estimate set to 0
  kFlagFrozen = 1u << 1,     // too little sensitivity; left at its initial value
  kFlagProjected = 1u << 2,  // sigma pushed back onto the floor during the fit
  kFlagOutsideOmega = 1u << 3,
  kFlagNoDrift = 1u << 4,  // method gives no drift estimate (b_hat is NaN)
};

/// "clamped|frozen", or "" for no flags.
std::string flag_text(unsigned flags);

struct FitDiagnostics {
  int iterations = 0;
  bool converged = true;
  std::string stop_reason;
  std::vector<double> misfit_history;
  /// Condition number of the per-node time design matrix (local fits) or of
  /// the final Gauss-Newton matrix (global fit).
  double condition_estimate = 0;
  /// Diagonal of J^T J per drift and diffusion node (global fit only).
  Eigen::VectorXd sensitivity_b;
  Eigen::VectorXd sensitivity_sigma;
  int pde_solves = 0;
};

struct ReconstructionResult {
  Eigen::VectorXd x_nodes;
  Eigen::VectorXd b_hat;
  Eigen::VectorXd sigma_hat;
  Eigen::VectorXd residuals;
  std::vector<unsigned> flags;
  ReconstructionMethod method = ReconstructionMethod::short_time;
  FitDiagnostics diagnostics;
};

/// Per-x fit of u(t, x) - x = c1 t + c2 t^2; b_hat = c1. Needs f(s) = s
/// observations with at least 3 times.
ReconstructionResult recover_drift_short_time(const ObservationSet& obs1);

/// sigma_hat^2 = slope of u2(t, x) - x^2 at t = 0 minus 2 x b_hat.
ReconstructionResult recover_diffusion_short_time(const ObservationSet& obs1, const ObservationSet& obs2);

/// sigma_hat^2 = slope of V(t, x) at t = 0. b_hat comes from `obs1` when given
/// and is NaN (flagged) otherwise.
ReconstructionResult recover_diffusion_variance_slope(const ObservationSet& obs_v,
                                                      const ObservationSet* obs1 = nullptr);

struct JointOptions {
  int n_nodes = 11;
  /// PDE grid used for the forward model; defaults to the reference grid on
  /// `work_interval`.
  Interval work_interval{-4.0, 4.0};
  int nx = 401;
  int nt = 200;
  double t_max = 0.1;
  FkOptions fk;
  int max_iters = 200;
  double sigma_floor = 1e-3;
  double fd_step = 1e-5;
  double relative_tolerance = 1e-12;
  int threads = 1;
};

/// Piecewise-linear b and sigma on `n_nodes` equispaced nodes of
/// `recon_interval`, fitted to both observation sets by Levenberg-Marquardt
/// with a finite-difference Jacobian and second-difference regularization.
/// Drift extends linearly beyond the nodes, sigma constantly.
ReconstructionResult recover_joint_global(const ObservationSet& obs1, const ObservationSet& obs2,
                                          Interval recon_interval, double reg_weight,
                                          const JointOptions& options = {});

/// The model a global reconstruction describes.
SdeModel joint_model(const ReconstructionResult& result, Interval work_interval);

enum class Verdict { identical_within_tol, distinguished };
std::string to_string(Verdict verdict);

struct DistinguishOptions {
  int nx = 401;
  int nt = 200;
  double t_max = 0.1;
  FkOptions fk;
  double tol = 10 * kPdeTolerance;
};

struct ObservableComparison {
  std::string f_label;
  double sup_abs_U = 0;
  Eigen::VectorXd dtU0;       // measured d/dt U(0, x) on the omega nodes
  Eigen::VectorXd predicted;  // B f' + Sigma f''
  double max_identity_error = 0;
  ObservationSet a, b;
};

struct DistinguishabilityReport {
  double sup_abs_U = 0;
  Eigen::VectorXd x_nodes;  // PDE grid nodes inside omega
  Eigen::VectorXd B_true;
  Eigen::VectorXd Sigma_true;
  std::vector<ObservableComparison> per_f;
  double tol = 0;
  Verdict verdict = Verdict::identical_within_tol;
};

DistinguishabilityReport distinguishability_test(const SdeModel& model_a, const SdeModel& model_b,
                                                 const ObservationConfig& config, const std::vector<Observable>& fs,
                                                 const DistinguishOptions& options = {});

/// CSV `x,b_hat,sigma_hat,residual,flags`.
void write_reconstruction_csv(std::ostream& os, const ReconstructionResult& result);
/// `key: value` lines.
void write_report_text(std::ostream& os, const DistinguishabilityReport& report);
/// CSV `f,t,x,derivative_flag,u_a,u_b,diff`.
void write_difference_csv(std::ostream& os, const DistinguishabilityReport& report);

}  // namespace sdeid
