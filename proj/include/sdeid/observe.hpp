#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "sdeid/fk_solver.hpp"
#include "sdeid/model.hpp"
#include "sdeid/observable.hpp"
#include "sdeid/simulate.hpp"

namespace sdeid {

enum class ObservationKind {
  expectation,  // E^x[f(X_t)] for a general f
  moment,       // E^x[X_t^k]
  variance,     // V^x[X_t]
  pointwise,    // E^{x0}[f(X_t)] and its x-derivative at x0
};

std::string to_string(ObservationKind kind);
ObservationKind parse_observation_kind(const std::string& text);

/// Lattice over (0, epsilon] x omega: n_t times epsilon * i / n_t for
/// i = 1..n_t and n_x cell centres of omega (a single x0 for `pointwise`).
struct ObservationConfig {
  double epsilon = 0.1;
  Interval omega{-0.5, 0.5};
  int n_t = 20;
  int n_x = 20;
  ObservationKind kind = ObservationKind::moment;
  int k = 1;        // power for `moment`
  double x0 = 0.0;  // location for `pointwise`

  void check() const;
  std::vector<double> times() const;
  std::vector<double> xs() const;
  bool operator==(const ObservationConfig&) const = default;
};

struct ObservationSample {
  double t = 0;
  double x = 0;
  double value = 0;
  double std_error = 0;
  bool derivative = false;
};

enum class SourceKind { pde, monte_carlo };

struct ObservationSet {
  ObservationConfig config;
  std::vector<ObservationSample> samples;  // t-major, then x (value before derivative)
  SourceKind source = SourceKind::pde;
  std::string f_label;  // "var" for the variance kind
};

/// Noiseless observations from Crank-Nicolson fields on `grid`.
struct PdeSource {
  SdeModel model;
  Grid1D grid;
  FkOptions options;
};

/// Monte Carlo observations: one mc_moment run per lattice x with common
/// random numbers across x.
struct McSource {
  SdeModel model;
  int n_paths = 10000;
  std::uint64_t seed = 1;
  McOptions options;
  /// Half-width of the central difference used for the pointwise derivative.
  double derivative_step = 0.01;
};

using ObservationSource = std::variant<PdeSource, McSource>;

/// The observable implied by the configuration: s^k for `moment`, s for
/// `variance`, `f` otherwise.
Observable observable_for(const ObservationConfig& config, const Observable& f);

ObservationSet extract(const ObservationSource& source, const ObservationConfig& config,
                       const Observable& f = Observable::monomial(1));

/// Sample from already solved fields. `second` is the s^2 field required by
/// the variance kind and ignored otherwise.
ObservationSet extract_from_fields(const SolutionField& field, const ObservationConfig& config,
                                   const SolutionField* second = nullptr);

/// Sup over samples of |a - b|; configurations and observables must match.
double distance(const ObservationSet& a, const ObservationSet& b);

/// CSV `kind,f,t,x,value,stderr,derivative_flag`.
void write_observations_csv(std::ostream& os, const ObservationSet& set);

}  // namespace sdeid
