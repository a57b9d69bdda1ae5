#include "sdeid/fk_solver.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>

#include "sdeid/csv.hpp"
#include "sdeid/tridiagonal.hpp"

namespace sdeid {

Eigen::VectorXd Grid1D::nodes() const {
  Eigen::VectorXd out(nx);
  for (int j = 0; j < nx; ++j) out(j) = x(j);
  return out;
}

void Grid1D::check() const {
  if (nx < 3) throw UsageError("grid: nx must be at least 3");
  if (nt < 1) throw UsageError("grid: nt must be at least 1");
  if (!(x_max > x_min) || !std::isfinite(x_min) || !std::isfinite(x_max)) {
    throw UsageError("grid: need finite x_min < x_max");
  }
  if (!(t_max > 0) || !std::isfinite(t_max)) throw UsageError("grid: t_max must be positive");
}

Grid1D Grid1D::reference(const SdeModel& model) {
  return {model.work_interval.lo, model.work_interval.hi, 401, 0.1, 200};
}

namespace {

struct Bracket {
  int lo;
  double weight;  // of lo + 1
};

Bracket locate(double v, double origin, double step, int count) {
  const double s = (v - origin) / step;
  int lo = static_cast<int>(std::floor(s));
  lo = std::clamp(lo, 0, count - 2);
  return {lo, s - lo};
}

void check_inside(const Grid1D& g, double t, double x) {
  const double tol_t = 1e-9 * g.tau();
  const double tol_x = 1e-9 * g.h();
  if (!(t >= -tol_t && t <= g.t_max + tol_t) || !(x >= g.x_min - tol_x && x <= g.x_max + tol_x)) {
    throw UsageError(fmt::format("point (t={}, x={}) lies outside the solution grid", t, x));
  }
}

double node_derivative(const SolutionField::Storage& u, int k, int j, double h) {
  const int nx = static_cast<int>(u.cols());
  if (j == 0) return (-3.0 * u(k, 0) + 4.0 * u(k, 1) - u(k, 2)) / (2.0 * h);
  if (j == nx - 1) return (3.0 * u(k, nx - 1) - 4.0 * u(k, nx - 2) + u(k, nx - 3)) / (2.0 * h);
  return (u(k, j + 1) - u(k, j - 1)) / (2.0 * h);
}

// Operator weights of L u at node j: lower*u[j-1] + diag*u[j] + upper*u[j+1].
struct Stencil {
  Eigen::VectorXd lower, diag, upper;
};

}  // namespace

double SolutionField::value(double t, double x) const {
  check_inside(grid, t, x);
  const Bracket bt = locate(t, 0.0, grid.tau(), grid.nt + 1);
  const Bracket bx = locate(x, grid.x_min, grid.h(), grid.nx);
  auto row = [&](int k) { return (1.0 - bx.weight) * u(k, bx.lo) + bx.weight * u(k, bx.lo + 1); };
  if (bt.weight == 0.0) return row(bt.lo);
  return (1.0 - bt.weight) * row(bt.lo) + bt.weight * row(bt.lo + 1);
}

double SolutionField::dx_value(double t, double x) const {
  check_inside(grid, t, x);
  const Bracket bt = locate(t, 0.0, grid.tau(), grid.nt + 1);
  const Bracket bx = locate(x, grid.x_min, grid.h(), grid.nx);
  const double h = grid.h();
  auto row = [&](int k) {
    return (1.0 - bx.weight) * node_derivative(u, k, bx.lo, h) + bx.weight * node_derivative(u, k, bx.lo + 1, h);
  };
  if (bt.weight == 0.0) return row(bt.lo);
  return (1.0 - bt.weight) * row(bt.lo) + bt.weight * row(bt.lo + 1);
}

double SolutionField::value_cubic(double t, double x) const {
  check_inside(grid, t, x);
  if (grid.nx < 4) return value(t, x);
  const Bracket bt = locate(t, 0.0, grid.tau(), grid.nt + 1);
  const double s = (x - grid.x_min) / grid.h();
  const int first = std::clamp(static_cast<int>(std::floor(s)) - 1, 0, grid.nx - 4);
  std::array<double, 4> w{};
  for (int a = 0; a < 4; ++a) {
    w[a] = 1.0;
    for (int c = 0; c < 4; ++c) {
      if (c != a) w[a] *= (s - (first + c)) / static_cast<double>(a - c);
    }
  }
  auto row = [&](int k) {
    double acc = 0;
    for (int a = 0; a < 4; ++a) acc += w[a] * u(k, first + a);
    return acc;
  };
  if (bt.weight == 0.0) return row(bt.lo);
  return (1.0 - bt.weight) * row(bt.lo) + bt.weight * row(bt.lo + 1);
}

SolutionField solve_fk(const SdeModel& model, const Observable& f, const Grid1D& grid, const FkOptions& options) {
  grid.check();
  const double slack = 1e-12 * std::max(1.0, model.work_interval.width());
  if (grid.x_min < model.work_interval.lo - slack || grid.x_max > model.work_interval.hi + slack) {
    throw UsageError(fmt::format("grid [{}, {}] is not inside the work interval [{}, {}]", grid.x_min, grid.x_max,
                                 model.work_interval.lo, model.work_interval.hi));
  }
  if (options.boundary == BoundaryCondition::linear_extrapolation && grid.nx < 4) {
    throw ConfigError("linear-extrapolation boundary needs nx >= 4");
  }
  if (options.boundary == BoundaryCondition::dirichlet && !options.dirichlet_value) {
    throw ConfigError("dirichlet boundary requires a boundary value function");
  }

  const int nx = grid.nx;
  const int nt = grid.nt;
  const double h = grid.h();
  const double tau = grid.tau();

  SolutionField field;
  field.grid = grid;
  field.f_label = f.label();
  field.model_fingerprint = model.fingerprint();
  field.u.resize(nt + 1, nx);
  for (int j = 0; j < nx; ++j) field.u(0, j) = f.value(grid.x(j));
  if (!field.u.row(0).allFinite()) throw UsageError("observable is not finite on the grid");

  Stencil op{Eigen::VectorXd::Zero(nx), Eigen::VectorXd::Zero(nx), Eigen::VectorXd::Zero(nx)};
  SolveDiagnostics& diag = field.diagnostics;
  for (int j = 1; j < nx - 1; ++j) {
    const double x = grid.x(j);
    const double b = model.b(x);
    const double s = model.sigma(x);
    if (!(s >= model.sigma_floor)) {
      throw UsageError(fmt::format("sigma({}) = {} is below sigma_floor {}", x, s, model.sigma_floor));
    }
    const double s2 = s * s;
    const double peclet = std::abs(b) * h / s2;
    diag.max_cell_peclet = std::max(diag.max_cell_peclet, peclet);
    const double d = 0.5 * s2 / (h * h);
    if (options.monotone && peclet > 1.0) {
      if (!options.upwind) {
        throw ConfigError(fmt::format(
            "cell Peclet violation at x = {}: |b| h = {} exceeds sigma^2 = {} and upwinding is disabled", x,
            std::abs(b) * h, s2));
      }
      ++diag.upwinded_nodes;
      if (b > 0) {
        op.lower(j) = d;
        op.diag(j) = -2.0 * d - b / h;
        op.upper(j) = d + b / h;
      } else {
        op.lower(j) = d - b / h;
        op.diag(j) = -2.0 * d + b / h;
        op.upper(j) = d;
      }
    } else {
      const double c = b / (2.0 * h);
      op.lower(j) = d - c;
      op.diag(j) = -2.0 * d;
      op.upper(j) = d + c;
    }
  }

  // Reduced operator on the unknowns 1..nx-2 with the boundary relation folded in.
  const int m = nx - 2;
  Eigen::VectorXd red_lower = op.lower.segment(1, m);
  Eigen::VectorXd red_diag = op.diag.segment(1, m);
  Eigen::VectorXd red_upper = op.upper.segment(1, m);
  switch (options.boundary) {
    case BoundaryCondition::linear_extrapolation:
      // u0 = 2 u1 - u2, u[nx-1] = 2 u[nx-2] - u[nx-3]
      red_diag(0) += 2.0 * op.lower(1);
      red_upper(0) -= op.lower(1);
      red_diag(m - 1) += 2.0 * op.upper(nx - 2);
      red_lower(m - 1) -= op.upper(nx - 2);
      break;
    case BoundaryCondition::neumann:
      red_diag(0) += op.lower(1);
      red_diag(m - 1) += op.upper(nx - 2);
      break;
    case BoundaryCondition::dirichlet:
      break;
  }

  diag.m_matrix = true;
  diag.positive_explicit_part = true;
  for (int i = 0; i < m; ++i) {
    if ((i > 0 && red_lower(i) < 0) || (i < m - 1 && red_upper(i) < 0)) diag.m_matrix = false;
    if (1.0 + 0.5 * tau * red_diag(i) < 0) diag.positive_explicit_part = false;
  }

  Eigen::VectorXd sys_lower = -0.5 * tau * red_lower;
  Eigen::VectorXd sys_diag = Eigen::VectorXd::Ones(m) - 0.5 * tau * red_diag;
  Eigen::VectorXd sys_upper = -0.5 * tau * red_upper;
  Eigen::VectorXd rhs(m);
  Eigen::VectorXd scratch(m);

  for (int k = 0; k < nt; ++k) {
    auto prev = field.u.row(k);
    for (int i = 0; i < m; ++i) {
      const int j = i + 1;
      rhs(i) = prev(j) + 0.5 * tau * (op.lower(j) * prev(j - 1) + op.diag(j) * prev(j) + op.upper(j) * prev(j + 1));
    }
    double left_new = 0;
    double right_new = 0;
    if (options.boundary == BoundaryCondition::dirichlet) {
      const double t_new = grid.t(k + 1);
      left_new = options.dirichlet_value(t_new, grid.x(0));
      right_new = options.dirichlet_value(t_new, grid.x(nx - 1));
      rhs(0) += 0.5 * tau * op.lower(1) * left_new;
      rhs(m - 1) += 0.5 * tau * op.upper(nx - 2) * right_new;
    }
    solve_tridiagonal(sys_lower, sys_diag, sys_upper, rhs, scratch);
    if (!rhs.allFinite()) throw NumericalError(fmt::format("non-finite solution at time step {}", k + 1));
    auto next = field.u.row(k + 1);
    next.segment(1, m) = rhs.transpose();
    switch (options.boundary) {
      case BoundaryCondition::linear_extrapolation:
        next(0) = 2.0 * next(1) - next(2);
        next(nx - 1) = 2.0 * next(nx - 2) - next(nx - 3);
        break;
      case BoundaryCondition::neumann:
        next(0) = next(1);
        next(nx - 1) = next(nx - 2);
        break;
      case BoundaryCondition::dirichlet:
        next(0) = left_new;
        next(nx - 1) = right_new;
        break;
    }
  }
  return field;
}

SpatialDerivatives spatial_derivs(const SolutionField& field, int t_index) {
  const Grid1D& g = field.grid;
  if (t_index < 0 || t_index > g.nt) throw UsageError(fmt::format("time index {} out of range", t_index));
  const int nx = g.nx;
  const double h = g.h();
  const auto u = field.u.row(t_index);
  SpatialDerivatives out{Eigen::VectorXd(nx), Eigen::VectorXd(nx)};
  for (int j = 0; j < nx; ++j) out.du(j) = node_derivative(field.u, t_index, j, h);
  for (int j = 1; j < nx - 1; ++j) out.d2u(j) = (u(j + 1) - 2.0 * u(j) + u(j - 1)) / (h * h);
  if (nx >= 4) {
    out.d2u(0) = (2.0 * u(0) - 5.0 * u(1) + 4.0 * u(2) - u(3)) / (h * h);
    out.d2u(nx - 1) = (2.0 * u(nx - 1) - 5.0 * u(nx - 2) + 4.0 * u(nx - 3) - u(nx - 4)) / (h * h);
  } else {
    out.d2u(0) = out.d2u(nx - 1) = out.d2u(1);
  }
  return out;
}

Eigen::VectorXd time_deriv_at_zero(const SolutionField& field) {
  if (field.grid.nt < 2) throw UsageError("time_deriv_at_zero needs at least two time steps");
  return ((-3.0 * field.u.row(0) + 4.0 * field.u.row(1) - field.u.row(2)) / (2.0 * field.grid.tau())).transpose();
}

namespace {

constexpr std::array<char, 8> kMagic{'S', 'D', 'E', 'I', 'D', 'F', 'L', 'D'};
constexpr std::uint32_t kBinaryVersion = 1;

template <typename T>
void put(std::ostream& os, T v) {
  static_assert(std::endian::native == std::endian::little, "binary dump assumes a little-endian host");
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw DataError("field dump: truncated header");
  return v;
}

}  // namespace

void write_field_binary(std::ostream& os, const SolutionField& field) {
  os.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(os, kBinaryVersion);
  put<double>(os, field.grid.x_min);
  put<double>(os, field.grid.x_max);
  put<double>(os, field.grid.t_max);
  put<std::int64_t>(os, field.grid.nx);
  put<std::int64_t>(os, field.grid.nt);
  put<std::uint64_t>(os, field.model_fingerprint);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(field.f_label.size()));
  os.write(field.f_label.data(), static_cast<std::streamsize>(field.f_label.size()));
  os.write(reinterpret_cast<const char*>(field.u.data()),
           static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(field.u.size())));
}

SolutionField read_field_binary(std::istream& is) {
  std::array<char, 8> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic) throw DataError("field dump: bad magic");
  if (get<std::uint32_t>(is) != kBinaryVersion) throw DataError("field dump: unsupported version");
  SolutionField field;
  field.grid.x_min = get<double>(is);
  field.grid.x_max = get<double>(is);
  field.grid.t_max = get<double>(is);
  field.grid.nx = static_cast<int>(get<std::int64_t>(is));
  field.grid.nt = static_cast<int>(get<std::int64_t>(is));
  field.grid.check();
  field.model_fingerprint = get<std::uint64_t>(is);
  const auto len = get<std::uint32_t>(is);
  if (len > 4096) throw DataError("field dump: implausible label length");
  field.f_label.resize(len);
  if (!is.read(field.f_label.data(), len)) throw DataError("field dump: truncated label");
  field.u.resize(field.grid.nt + 1, field.grid.nx);
  if (!is.read(reinterpret_cast<char*>(field.u.data()),
               static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(field.u.size())))) {
    throw DataError("field dump: truncated payload");
  }
  return field;
}

void write_field_csv(std::ostream& os, const SolutionField& field, int t_stride, int x_stride) {
  if (t_stride < 1 || x_stride < 1) throw UsageError("csv strides must be positive");
  const Grid1D& g = field.grid;
  os << "t,x,u\n";
  auto take = [](int i, int last, int stride) { return i % stride == 0 || i == last; };
  for (int k = 0; k <= g.nt; ++k) {
    if (!take(k, g.nt, t_stride)) continue;
    for (int j = 0; j < g.nx; ++j) {
      if (!take(j, g.nx - 1, x_stride)) continue;
      os << csv_number(g.t(k)) << ',' << csv_number(g.x(j)) << ',' << csv_number(field.u(k, j)) << '\n';
    }
  }
}

}  // namespace sdeid
