#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "sdeid/fk_solver.hpp"
#include "sdeid/gallery.hpp"

using namespace sdeid;

namespace {

const Grid1D kReference{-4.0, 4.0, 401, 0.1, 200};

/// Max |u - exact| over nodes with |x - center| <= radius at every time level.
template <typename Exact>
double max_error(const SolutionField& field, Exact exact, double center, double radius) {
  double worst = 0;
  for (int k = 0; k <= field.grid.nt; ++k) {
    for (int j = 0; j < field.grid.nx; ++j) {
      const double x = field.grid.x(j);
      if (std::abs(x - center) > radius) continue;
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

}  // namespace

TEST_CASE("linear data under pure diffusion is stationary") {
  const SolutionField field = solve_fk(brownian(1.0), Observable::monomial(1), kReference);
  CHECK(max_error(field, [](double, double x) { return x; }, 0.0, 4.0) <= 1e-10);
  CHECK(field.u.rows() == 201);
  CHECK(field.u.cols() == 401);
}

TEST_CASE("quadratic data: u = x^2 + t away from the truncation boundary") {
  const SolutionField field = solve_fk(brownian(1.0), Observable::monomial(2), kReference);
  for (int j = 0; j < kReference.nx; ++j) CHECK(field.u(0, j) == kReference.x(j) * kReference.x(j));
  CHECK(max_error(field, [](double t, double x) { return oracle::brownian_second_moment(1.0, x, t); }, 0.0, 2.0) <=
        1e-4);
}

TEST_CASE("OU mean oracle") {
  const SolutionField field = solve_fk(ornstein_uhlenbeck(1, 0.5, 0.2), Observable::monomial(1), kReference);
  CHECK(max_error(field, [](double t, double x) { return oracle::ou_mean(1, 0.5, x, t); }, 0.0, 4.0) <= 1e-4);
}

TEST_CASE("spatial derivatives") {
  SUBCASE("linear data at t = 0") {
    const SolutionField field = solve_fk(ornstein_uhlenbeck(), Observable::monomial(1), kReference);
    const auto d = spatial_derivs(field, 0);
    CHECK((d.du.array() - 1.0).abs().maxCoeff() <= 1e-10);
    CHECK(d.d2u.cwiseAbs().maxCoeff() <= 1e-8);
  }
  SUBCASE("quadratic data at t = 0") {
    const SolutionField field = solve_fk(ornstein_uhlenbeck(), Observable::monomial(2), kReference);
    const auto d = spatial_derivs(field, 0);
    const Eigen::VectorXd x = kReference.nodes();
    CHECK((d.du - 2.0 * x).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((d.d2u.array() - 2.0).abs().maxCoeff() <= 1e-7);
  }
  SUBCASE("quadratic data under diffusion keeps curvature 2") {
    const SolutionField field = solve_fk(brownian(1.0), Observable::monomial(2), kReference);
    for (int k : {1, 100, 200}) {
      const auto d = spatial_derivs(field, k);
      for (int j = 0; j < kReference.nx; ++j) {
        if (std::abs(kReference.x(j)) <= 2.0) CHECK(std::abs(d.d2u(j) - 2.0) <= 1e-6);
      }
    }
  }
  const SolutionField field = solve_fk(brownian(), Observable::monomial(1), kReference);
  CHECK_THROWS_AS(spatial_derivs(field, -1), UsageError);
  CHECK_THROWS_AS(spatial_derivs(field, 201), UsageError);
}

TEST_CASE("short-time identity from the discrete solution") {
  for (const SdeModel& model : {ornstein_uhlenbeck(), geometric_brownian(), wright_fisher()}) {
    CAPTURE(model.name);
    const Grid1D grid = Grid1D::reference(model);
    const Eigen::VectorXd d1 = time_deriv_at_zero(solve_fk(model, Observable::monomial(1), grid));
    const Eigen::VectorXd d2 = time_deriv_at_zero(solve_fk(model, Observable::monomial(2), grid));
    const int margin = grid.nx / 10;  // s^2 violates u_xx = 0 at the boundary
    for (int j = margin; j < grid.nx - margin; ++j) {
      const double x = grid.x(j);
      const double b = model.b(x);
      const double s2 = model.sigma(x) * model.sigma(x);
      // The identity holds for the centred stencil; upwinded nodes carry an O(h) error.
      if (std::abs(b) * grid.h() > s2) continue;
      CHECK(std::abs(d1(j) - b) <= 1e-4);
      CHECK(std::abs(d2(j) - (s2 + 2 * x * b)) <= 1e-4);
    }
  }
  const Eigen::VectorXd flat = time_deriv_at_zero(solve_fk(brownian(0.3), Observable::monomial(1), kReference));
  CHECK(flat.cwiseAbs().maxCoeff() <= 1e-8);
  Grid1D one_step = kReference;
  one_step.nt = 1;
  CHECK_THROWS_AS(time_deriv_at_zero(solve_fk(brownian(), Observable::monomial(1), one_step)), UsageError);
}

TEST_CASE("cell Peclet handling") {
  const SdeModel ou = ornstein_uhlenbeck(1, 0.5, 0.2);  // |b| h > sigma^2 far from mu
  FkOptions strict;
  strict.upwind = false;
  CHECK_THROWS_AS(solve_fk(ou, Observable::monomial(1), kReference, strict), ConfigError);

  const SolutionField upwinded = solve_fk(ou, Observable::monomial(1), kReference);
  CHECK(upwinded.diagnostics.upwinded_nodes > 0);
  CHECK(upwinded.diagnostics.m_matrix);

  FkOptions centred;
  centred.monotone = false;
  const SolutionField plain = solve_fk(ou, Observable::monomial(1), kReference, centred);
  CHECK(plain.diagnostics.upwinded_nodes == 0);
  CHECK_FALSE(plain.diagnostics.m_matrix);
}

TEST_CASE("precondition failures") {
  const SdeModel ou = ornstein_uhlenbeck();
  Grid1D wide = kReference;
  wide.x_max = 5.0;
  CHECK_THROWS_AS(solve_fk(ou, Observable::monomial(1), wide), UsageError);
  Grid1D degenerate = kReference;
  degenerate.nx = 2;
  CHECK_THROWS_AS(solve_fk(ou, Observable::monomial(1), degenerate), UsageError);
  SdeModel bad = ou;
  bad.diffusion = Coefficient::polynomial({0.0, 0.1});  // sigma(0) = 0
  CHECK_THROWS_AS(solve_fk(bad, Observable::monomial(1), kReference), UsageError);
  FkOptions dirichlet;
  dirichlet.boundary = BoundaryCondition::dirichlet;
  CHECK_THROWS_AS(solve_fk(ou, Observable::monomial(1), kReference, dirichlet), ConfigError);
}

TEST_CASE("Dirichlet data from the oracle reproduces u = x^2 + t on the whole grid") {
  FkOptions options;
  options.boundary = BoundaryCondition::dirichlet;
  options.dirichlet_value = [](double t, double x) { return x * x + t; };
  const SolutionField field = solve_fk(brownian(1.0), Observable::monomial(2), kReference, options);
  CHECK(max_error(field, [](double t, double x) { return x * x + t; }, 0.0, 4.0) <= 1e-10);
}

TEST_CASE("second-order convergence when (h, tau) are halved") {
  SUBCASE("OU mean") {
    const SdeModel ou = ornstein_uhlenbeck(1, 0.5, 0.2);
    auto exact = [](double t, double x) { return oracle::ou_mean(1, 0.5, x, t); };
    const double coarse = max_error(solve_fk(ou, Observable::monomial(1), kReference), exact, 0.5, 1.5);
    const double fine = max_error(solve_fk(ou, Observable::monomial(1), refined(kReference)), exact, 0.5, 1.5);
    CHECK(coarse / fine >= 3.5);
  }
  SUBCASE("OU second moment") {
    const SdeModel ou = ornstein_uhlenbeck(1, 0.5, 0.2);
    auto exact = [](double t, double x) { return oracle::ou_second_moment(1, 0.5, 0.2, x, t); };
    const double coarse = max_error(solve_fk(ou, Observable::monomial(2), kReference), exact, 0.5, 1.5);
    const double fine = max_error(solve_fk(ou, Observable::monomial(2), refined(kReference)), exact, 0.5, 1.5);
    CHECK(coarse / fine >= 3.5);
  }
  SUBCASE("smooth bounded data under diffusion") {
    auto exact = [](double t, double x) { return std::sin(x) * std::exp(-0.5 * t); };
    const Grid1D coarse_grid{-4.0, 4.0, 101, 0.1, 50};
    const double coarse = max_error(solve_fk(brownian(1.0), Observable::parse("sin"), coarse_grid), exact, 0.0, 2.0);
    const double fine =
        max_error(solve_fk(brownian(1.0), Observable::parse("sin"), refined(coarse_grid)), exact, 0.0, 2.0);
    CHECK(coarse / fine >= 3.5);
  }
}

TEST_CASE("discrete maximum principle for bounded data") {
  FkOptions reflecting;
  reflecting.boundary = BoundaryCondition::neumann;
  for (const auto& entry : gallery()) {
    const SdeModel model = make_model(entry.name);
    Grid1D grid = Grid1D::reference(model);
    grid.nt = 400;  // tau sigma^2 / h^2 <= 2 on every gallery model, GBM included
    for (const char* label : {"tanh", "gauss", "sin"}) {
      CAPTURE(entry.name);
      CAPTURE(label);
      const SolutionField field = solve_fk(model, Observable::parse(label), grid, reflecting);
      REQUIRE(field.diagnostics.m_matrix);
      REQUIRE(field.diagnostics.positive_explicit_part);
      const double lo = field.u.row(0).minCoeff();
      const double hi = field.u.row(0).maxCoeff();
      const double tol = 10 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi));
      CHECK(field.u.minCoeff() >= lo - tol);
      CHECK(field.u.maxCoeff() <= hi + tol);
    }
  }
}

TEST_CASE("coefficients far from the observation window barely matter at short horizons") {
  const SdeModel ou = ornstein_uhlenbeck();
  const SdeModel far = with_drift_bump(ou, 0.5, 3.0, 0.3);
  const SolutionField a = solve_fk(ou, Observable::monomial(1), kReference);
  const SolutionField b = solve_fk(far, Observable::monomial(1), kReference);
  double worst = 0;
  for (int k = 0; k <= kReference.nt; ++k) {
    for (int j = 0; j < kReference.nx; ++j) {
      if (std::abs(kReference.x(j)) <= 0.5) worst = std::max(worst, std::abs(a.u(k, j) - b.u(k, j)));
    }
  }
  CHECK(worst <= 1e-3);
  CHECK(a.model_fingerprint != b.model_fingerprint);
}

TEST_CASE("interpolation helpers") {
  const SolutionField field = solve_fk(brownian(1.0), Observable::monomial(2), kReference);
  CHECK(field.value(0.05, 0.0) == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(field.value(0.0, 0.01) == doctest::Approx(2e-4).epsilon(1e-9));  // midpoint of nodes 0 and 0.02
  CHECK(field.value(0.1, 4.0) == doctest::Approx(field.u(200, 400)));
  CHECK(field.dx_value(0.05, 0.5) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_THROWS_AS(field.value(0.2, 0.0), UsageError);
  CHECK_THROWS_AS(field.value(0.05, -5.0), UsageError);
}

TEST_CASE("binary dump and CSV slice") {
  const SolutionField field = solve_fk(ornstein_uhlenbeck(), Observable::monomial(2), Grid1D{-4, 4, 41, 0.1, 10});
  std::stringstream buffer;
  write_field_binary(buffer, field);
  const SolutionField back = read_field_binary(buffer);
  CHECK(back.grid == field.grid);
  CHECK(back.u == field.u);
  CHECK(back.f_label == "s^2");
  CHECK(back.model_fingerprint == ornstein_uhlenbeck().fingerprint());

  std::stringstream truncated(buffer.str().substr(0, 40));
  CHECK_THROWS_AS(read_field_binary(truncated), DataError);
  std::stringstream garbage("not a field dump at all");
  CHECK_THROWS_AS(read_field_binary(garbage), DataError);

  std::ostringstream csv;
  write_field_csv(csv, field, 5, 20);
  const std::string text = csv.str();
  CHECK(text.rfind("t,x,u\n0,-4,16\n", 0) == 0);
  // rows 0, 5, 10 and nodes 0, 20, 40
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 3 * 3);
}
