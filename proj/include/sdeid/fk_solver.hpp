#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <istream>
#include <ostream>
#include <string>

#include "sdeid/model.hpp"
#include "sdeid/observable.hpp"

namespace sdeid {

/// Tolerance the solver is expected to meet on the gallery oracles at the
/// reference resolution.
inline constexpr double kPdeTolerance = 1e-4;

/// Uniform space-time grid: nx nodes on [x_min, x_max], nt steps on [0, t_max].
struct Grid1D {
  double x_min = -4.0;
  double x_max = 4.0;
  int nx = 401;
  double t_max = 0.1;
  int nt = 200;

  double h() const { return (x_max - x_min) / (nx - 1); }
  double tau() const { return t_max / nt; }
  double x(int j) const { return j == nx - 1 ? x_max : x_min + j * h(); }
  double t(int k) const { return k == nt ? t_max : k * tau(); }
  Eigen::VectorXd nodes() const;

  /// Throws UsageError unless nx >= 3, nt >= 1 and both spacings are positive.
  void check() const;

  bool operator==(const Grid1D&) const = default;

  /// nx = 401, nt = 200, t_max = 0.1 on the model's work interval.
  static Grid1D reference(const SdeModel& model);
};

enum class BoundaryCondition {
  linear_extrapolation,  // u_xx = 0 at both ends
  neumann,               // u_x = 0 (reflecting; conservative)
  dirichlet,             // u = FkOptions::dirichlet_value(t, x)
};

struct FkOptions {
  /// Enforce an M-matrix spatial operator (cell Peclet |b| h <= sigma^2).
  bool monotone = true;
  /// In monotone mode, switch violating nodes to an upwind first difference.
  /// With upwinding disabled a violation is a ConfigError.
  bool upwind = true;
  BoundaryCondition boundary = BoundaryCondition::linear_extrapolation;
  std::function<double(double t, double x)> dirichlet_value;
};

struct SolveDiagnostics {
  int upwinded_nodes = 0;
  double max_cell_peclet = 0;  // max |b| h / sigma^2 over interior nodes
  /// Spatial operator has non-negative off-diagonals and the explicit half of
  /// each Crank-Nicolson step has non-negative weights; together these give a
  /// discrete maximum principle.
  bool m_matrix = false;
  bool positive_explicit_part = false;
};

/// Discrete u(t, x) = E^x[f(X_t)], row k at time t(k), column j at x(j).
struct SolutionField {
  using Storage = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  Grid1D grid;
  Storage u;
  std::string f_label;
  std::uint64_t model_fingerprint = 0;
  SolveDiagnostics diagnostics;

  /// Bilinear interpolation; (t, x) must lie inside the grid.
  double value(double t, double x) const;
  /// Spatial derivative from the O(h^2) stencils, interpolated bilinearly.
  double dx_value(double t, double x) const;
  /// Linear in t, cubic Lagrange in x through the four surrounding nodes
  /// (exact for fields that are cubic in x).
  double value_cubic(double t, double x) const;
};

/// Crank-Nicolson for du/dt = 1/2 sigma^2 u_xx + b u_x, u(0, .) = f.
SolutionField solve_fk(const SdeModel& model, const Observable& f, const Grid1D& grid, const FkOptions& options = {});

struct SpatialDerivatives {
  Eigen::VectorXd du;
  Eigen::VectorXd d2u;
};

/// Centered differences inside, one-sided second-order at the ends.
SpatialDerivatives spatial_derivs(const SolutionField& field, int t_index);

/// (-3 u^0 + 4 u^1 - u^2) / (2 tau) at every node.
Eigen::VectorXd time_deriv_at_zero(const SolutionField& field);

/// Binary dump: "SDEIDFLD", version, grid, fingerprint, label, then the
/// row-major little-endian float64 payload.
void write_field_binary(std::ostream& os, const SolutionField& field);
SolutionField read_field_binary(std::istream& is);

/// CSV `t,x,u`, every `t_stride`-th time row and `x_stride`-th node (the
/// final row and node are always included).
void write_field_csv(std::ostream& os, const SolutionField& field, int t_stride = 1, int x_stride = 1);

}  // namespace sdeid
