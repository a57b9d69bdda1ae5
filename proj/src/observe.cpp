#include "sdeid/observe.hpp"

#include <fmt/format.h>

#include <cmath>

#include "sdeid/csv.hpp"
#include "sdeid/stats.hpp"

namespace sdeid {

std::string to_string(ObservationKind kind) {
  switch (kind) {
    case ObservationKind::expectation:
      return "O_f";
    case ObservationKind::moment:
      return "O_k";
    case ObservationKind::variance:
      return "O_v";
    case ObservationKind::pointwise:
      return "O_prime";
  }
  return "?";
}

ObservationKind parse_observation_kind(const std::string& text) {
  for (auto kind : {ObservationKind::expectation, ObservationKind::moment, ObservationKind::variance,
                    ObservationKind::pointwise}) {
    if (text == to_string(kind)) return kind;
  }
  throw UsageError(fmt::format("unknown observation kind '{}' (expected O_f, O_k, O_v, O_prime)", text));
}

void ObservationConfig::check() const {
  if (!(epsilon > 0) || !std::isfinite(epsilon)) throw UsageError("observation: epsilon must be positive");
  if (!(omega.hi > omega.lo)) throw UsageError("observation: omega must be a non-empty interval");
  if (n_t < 1 || n_x < 1) throw UsageError("observation: n_t and n_x must be positive");
  if (kind == ObservationKind::moment && k < 0) throw UsageError("observation: moment power must be >= 0");
  if (kind == ObservationKind::pointwise && !std::isfinite(x0)) throw UsageError("observation: x0 must be finite");
}

std::vector<double> ObservationConfig::times() const {
  std::vector<double> out(static_cast<std::size_t>(n_t));
  for (int i = 1; i <= n_t; ++i) out[static_cast<std::size_t>(i - 1)] = i == n_t ? epsilon : epsilon * i / n_t;
  return out;
}

std::vector<double> ObservationConfig::xs() const {
  if (kind == ObservationKind::pointwise) return {x0};
  const double h = omega.width() / n_x;
  std::vector<double> out(static_cast<std::size_t>(n_x));
  for (int j = 0; j < n_x; ++j) out[static_cast<std::size_t>(j)] = omega.lo + (j + 0.5) * h;
  return out;
}

Observable observable_for(const ObservationConfig& config, const Observable& f) {
  switch (config.kind) {
    case ObservationKind::moment:
      return Observable::monomial(config.k);
    case ObservationKind::variance:
      return Observable::monomial(1);
    default:
      return f;
  }
}

namespace {

void check_coverage(const Grid1D& grid, const ObservationConfig& config) {
  const double slack = 1e-12 * std::max(1.0, grid.t_max);
  if (config.epsilon > grid.t_max + slack) {
    throw UsageError(fmt::format("observation window epsilon = {} exceeds the solved horizon {}", config.epsilon,
                                 grid.t_max));
  }
  if (config.kind == ObservationKind::pointwise) {
    if (!(config.x0 > grid.x_min && config.x0 < grid.x_max)) {
      throw UsageError(fmt::format("x0 = {} is not inside the grid ({}, {})", config.x0, grid.x_min, grid.x_max));
    }
  } else if (config.omega.lo < grid.x_min || config.omega.hi > grid.x_max) {
    throw UsageError(fmt::format("omega ({}, {}) is not covered by the grid [{}, {}]", config.omega.lo,
                                 config.omega.hi, grid.x_min, grid.x_max));
  }
}

ObservationSet from_pde(const PdeSource& src, const ObservationConfig& config, const Observable& f) {
  check_coverage(src.grid, config);
  const Observable g = observable_for(config, f);
  const SolutionField field = solve_fk(src.model, g, src.grid, src.options);
  if (config.kind == ObservationKind::variance) {
    const SolutionField second = solve_fk(src.model, Observable::monomial(2), src.grid, src.options);
    return extract_from_fields(field, config, &second);
  }
  return extract_from_fields(field, config);
}

ObservationSet from_mc(const McSource& src, const ObservationConfig& config, const Observable& f) {
  const Interval& work = src.model.work_interval;
  if (config.kind == ObservationKind::pointwise) {
    if (!(config.x0 - src.derivative_step >= work.lo && config.x0 + src.derivative_step <= work.hi)) {
      throw UsageError("x0 +- derivative step leaves the work interval");
    }
  } else if (!work.contains(config.omega)) {
    throw UsageError("omega is not inside the model's work interval");
  }
  const Observable g = observable_for(config, f);
  const std::vector<double> times = config.times();
  ObservationSet set{config, {}, SourceKind::monte_carlo,
                     config.kind == ObservationKind::variance ? "var" : g.label()};

  if (config.kind == ObservationKind::pointwise) {
    const auto values = mc_moment(src.model, config.x0, times, g, src.n_paths, src.seed, src.options);
    const Eigen::MatrixXd up = sample_observable(src.model, config.x0 + src.derivative_step, times, g, src.n_paths,
                                                 src.seed, src.options);
    const Eigen::MatrixXd down = sample_observable(src.model, config.x0 - src.derivative_step, times, g,
                                                   src.n_paths, src.seed, src.options);
    const Eigen::MatrixXd slope = (up - down) / (2.0 * src.derivative_step);
    for (std::size_t i = 0; i < times.size(); ++i) {
      const SampleSummary s = summarize(slope.row(static_cast<Eigen::Index>(i)).transpose());
      set.samples.push_back({times[i], config.x0, values[i].mean, values[i].std_error, false});
      set.samples.push_back({times[i], config.x0, s.mean, s.stderr_of_mean, true});
    }
    return set;
  }

  const std::vector<double> xs = config.xs();
  std::vector<std::vector<MomentEstimate>> columns;
  columns.reserve(xs.size());
  for (double x : xs) {
    columns.push_back(config.kind == ObservationKind::variance
                          ? mc_variance(src.model, x, times, src.n_paths, src.seed, src.options)
                          : mc_moment(src.model, x, times, g, src.n_paths, src.seed, src.options));
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    for (std::size_t j = 0; j < xs.size(); ++j) {
      set.samples.push_back({times[i], xs[j], columns[j][i].mean, columns[j][i].std_error, false});
    }
  }
  return set;
}

}  // namespace

ObservationSet extract_from_fields(const SolutionField& field, const ObservationConfig& config,
                                   const SolutionField* second) {
  config.check();
  check_coverage(field.grid, config);
  const bool variance = config.kind == ObservationKind::variance;
  if (variance && (!second || second->f_label != "s^2" || field.f_label != "s" || !(second->grid == field.grid))) {
    throw UsageError("variance observations need matching s and s^2 fields");
  }
  if (config.kind == ObservationKind::moment && field.f_label != Observable::monomial(config.k).label()) {
    throw UsageError(fmt::format("field observable '{}' does not match moment k = {}", field.f_label, config.k));
  }
  ObservationSet set{config, {}, SourceKind::pde, variance ? "var" : field.f_label};
  const std::vector<double> times = config.times();
  const std::vector<double> xs = config.xs();
  set.samples.reserve(times.size() * xs.size() * (config.kind == ObservationKind::pointwise ? 2 : 1));
  for (double t : times) {
    for (double x : xs) {
      double value = field.value_cubic(t, x);
      if (variance) value = second->value_cubic(t, x) - value * value;
      set.samples.push_back({t, x, value, 0.0, false});
      if (config.kind == ObservationKind::pointwise) set.samples.push_back({t, x, field.dx_value(t, x), 0.0, true});
    }
  }
  return set;
}

ObservationSet extract(const ObservationSource& source, const ObservationConfig& config, const Observable& f) {
  config.check();
  return std::visit(
      [&](const auto& src) {
        if constexpr (std::is_same_v<std::decay_t<decltype(src)>, PdeSource>) {
          return from_pde(src, config, f);
        } else {
          return from_mc(src, config, f);
        }
      },
      source);
}

double distance(const ObservationSet& a, const ObservationSet& b) {
  if (!(a.config == b.config)) throw UsageError("distance: observation configurations differ");
  if (a.f_label != b.f_label) throw UsageError("distance: observables differ");
  if (a.samples.size() != b.samples.size()) throw UsageError("distance: sample counts differ");
  double sup = 0;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    sup = std::max(sup, std::abs(a.samples[i].value - b.samples[i].value));
  }
  return sup;
}

void write_observations_csv(std::ostream& os, const ObservationSet& set) {
  os << "kind,f,t,x,value,stderr,derivative_flag\n";
  const std::string kind = to_string(set.config.kind);
  for (const auto& s : set.samples) {
    os << kind << ',' << set.f_label << ',' << csv_number(s.t) << ',' << csv_number(s.x) << ','
       << csv_number(s.value) << ',' << csv_number(s.std_error) << ',' << (s.derivative ? 1 : 0) << '\n';
  }
}

}  // namespace sdeid
