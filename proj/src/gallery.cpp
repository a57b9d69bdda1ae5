#include "sdeid/gallery.hpp"

#include <fmt/format.h>

#include <cmath>

namespace sdeid {
namespace {

double param(const ParamMap& params, const GalleryEntry& entry, const std::string& key) {
  if (auto it = params.find(key); it != params.end()) return it->second;
  for (const auto& p : entry.params) {
    if (p.name == key) return p.default_value;
  }
  throw UsageError(fmt::format("model '{}' has no parameter '{}'", entry.name, key));
}

std::vector<GalleryEntry> build_gallery() {
  std::vector<GalleryEntry> entries;
  entries.push_back({"ou", "b(x)=θ(μ−x)", "σ(x)=σ (const)",
                     "Ornstein-Uhlenbeck: noisy relaxation towards μ; work interval [-4, 4]",
                     {{"theta", 1.0, "relaxation rate θ > 0"},
                      {"mu", 0.5, "equilibrium μ"},
                      {"sigma", 0.2, "noise amplitude σ > 0"}},
                     {}});
  entries.back().build = [](const ParamMap& p) {
    const auto& e = gallery_entry("ou");
    return ornstein_uhlenbeck(param(p, e, "theta"), param(p, e, "mu"), param(p, e, "sigma"));
  };

  entries.push_back({"wright_fisher", "b(x)=x[m1−(m1 x+m2(1−x))]", "σ(x)=√(x(1−x)/Ne)",
                     "two-type Wright-Fisher diffusion; σ vanishes at 0 and 1, so the model is restricted to "
                     "[margin, 1−margin] and σ is stored as a C¹ cubic Hermite interpolant",
                     {{"m1", 1.0, "fitness of type 1"},
                      {"m2", 0.5, "fitness of type 2"},
                      {"Ne", 20.0, "effective population size"},
                      {"margin", 0.05, "distance of the work interval from 0 and 1"}},
                     {}});
  entries.back().build = [](const ParamMap& p) {
    const auto& e = gallery_entry("wright_fisher");
    return wright_fisher(param(p, e, "m1"), param(p, e, "m2"), param(p, e, "Ne"), param(p, e, "margin"));
  };

  entries.push_back({"gbm", "b(x)=αx", "σ(x)=βx", "geometric Brownian motion; work interval [0.05, 3]",
                     {{"alpha", 0.1, "growth rate α"}, {"beta", 0.2, "volatility β > 0"}},
                     {}});
  entries.back().build = [](const ParamMap& p) {
    const auto& e = gallery_entry("gbm");
    return geometric_brownian(param(p, e, "alpha"), param(p, e, "beta"));
  };

  entries.push_back({"brownian", "b(x)=0", "σ(x)=σ (const)", "scaled Brownian motion; work interval [-4, 4]",
                     {{"sigma", 1.0, "noise amplitude σ > 0"}},
                     {}});
  entries.back().build = [](const ParamMap& p) { return brownian(param(p, gallery_entry("brownian"), "sigma")); };

  entries.push_back({"constant", "b(x)=b0", "σ(x)=s0", "constant coefficients; work interval [-4, 4]",
                     {{"b0", 0.3, "drift"}, {"s0", 0.5, "diffusion > 0"}},
                     {}});
  entries.back().build = [](const ParamMap& p) {
    const auto& e = gallery_entry("constant");
    return constant_model(param(p, e, "b0"), param(p, e, "s0"));
  };
  return entries;
}

}  // namespace

const std::vector<GalleryEntry>& gallery() {
  static const std::vector<GalleryEntry> entries = build_gallery();
  return entries;
}

const GalleryEntry& gallery_entry(const std::string& name) {
  for (const auto& e : gallery()) {
    if (e.name == name) return e;
  }
  throw UsageError(fmt::format("unknown model '{}'", name));
}

SdeModel make_model(const std::string& name, const ParamMap& params) {
  const auto& entry = gallery_entry(name);
  for (const auto& [key, value] : params) {
    bool known = false;
    for (const auto& p : entry.params) known = known || p.name == key;
    if (!known) throw UsageError(fmt::format("model '{}' has no parameter '{}'", name, key));
  }
  SdeModel model = entry.build(params);
  model.check();
  return model;
}

SdeModel ornstein_uhlenbeck(double theta, double mu, double sigma) {
  if (!(theta > 0) || !(sigma > 0)) throw UsageError("ou: theta and sigma must be positive");
  return {"ou", Coefficient::polynomial({theta * mu, -theta}), Coefficient::constant(sigma), {-4.0, 4.0}};
}

SdeModel geometric_brownian(double alpha, double beta) {
  if (!(beta > 0)) throw UsageError("gbm: beta must be positive");
  return {"gbm", Coefficient::polynomial({0.0, alpha}), Coefficient::polynomial({0.0, beta}), {0.05, 3.0}};
}

SdeModel wright_fisher(double m1, double m2, double effective_size, double margin, double knot_spacing) {
  if (!(effective_size > 0)) throw UsageError("wright_fisher: Ne must be positive");
  if (!(margin > 0 && margin < 0.5)) throw UsageError("wright_fisher: margin must lie in (0, 0.5)");
  if (!(knot_spacing > 0)) throw UsageError("wright_fisher: knot spacing must be positive");
  // x (m1 - m1 x - m2 + m2 x) = (m1 - m2) x - (m1 - m2) x^2
  Coefficient drift = Coefficient::polynomial({0.0, m1 - m2, m2 - m1});

  const double lo = margin;
  const double hi = 1.0 - margin;
  const auto half_count = static_cast<int>(std::floor((0.5 - lo) / knot_spacing + 1e-9));
  std::vector<double> knots;
  for (int k = -half_count; k <= half_count; ++k) knots.push_back(0.5 + k * knot_spacing);
  if (knots.front() - lo > Coefficient::kDefaultMinGap) {
    knots.insert(knots.begin(), lo);
  } else {
    knots.front() = lo;
  }
  if (hi - knots.back() > Coefficient::kDefaultMinGap) {
    knots.push_back(hi);
  } else {
    knots.back() = hi;
  }
  std::vector<double> values;
  std::vector<double> slopes;
  for (double x : knots) {
    const double v = std::sqrt(x * (1.0 - x) / effective_size);
    values.push_back(v);
    slopes.push_back((1.0 - 2.0 * x) / (2.0 * effective_size * v));
  }
  Coefficient diffusion = Coefficient::hermite_cubic(knots, values, slopes);
  return {"wright_fisher", std::move(drift), std::move(diffusion), {lo, hi}};
}

SdeModel brownian(double sigma) {
  if (!(sigma > 0)) throw UsageError("brownian: sigma must be positive");
  return {"brownian", Coefficient::constant(0.0), Coefficient::constant(sigma), {-4.0, 4.0}};
}

SdeModel constant_model(double drift, double sigma) {
  if (!(sigma > 0)) throw UsageError("constant: sigma must be positive");
  return {"constant", Coefficient::constant(drift), Coefficient::constant(sigma), {-4.0, 4.0}};
}

Coefficient bump(double height, double center, double width) {
  if (!(width > 0)) throw UsageError("bump: width must be positive");
  // h (1 - s^2/w^2)^2 with s = x - c, re-expanded about the left edge c - w.
  const double w2 = width * width;
  Coefficient::Coefficients centered(5);
  centered << height, 0.0, -2.0 * height / w2, 0.0, height / (w2 * w2);
  Coefficient::Coefficients zero = Coefficient::Coefficients::Zero(1);
  return Coefficient({center - width, center + width},
                     {zero, Coefficient::taylor_shift(centered, -width), zero});
}

SdeModel with_drift_bump(const SdeModel& model, double height, double center, double width) {
  SdeModel out = model;
  out.name = fmt::format("{}+drift_bump({},{},{})", model.name, height, center, width);
  out.drift = model.drift + bump(height, center, width);
  return out;
}

SdeModel with_variance_bump(const SdeModel& model, double height, double center, double width,
                            int knots_per_half_width) {
  if (knots_per_half_width < 1) throw UsageError("variance bump: need at least one knot per half width");
  const Coefficient shape = bump(height, center, width);
  const int n = 2 * knots_per_half_width;
  std::vector<double> knots(n + 1);
  std::vector<double> values(n + 1);
  std::vector<double> slopes(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double x = center - width + 2.0 * width * i / n;
    const double s = model.sigma(x);
    const double ds = model.diffusion.derivative(x, 1);
    const double v2 = s * s + shape.eval(x);
    if (!(v2 > 0)) throw UsageError("variance bump: perturbed sigma^2 is not positive");
    const double root = std::sqrt(v2);
    knots[i] = x;
    values[i] = root - s;
    slopes[i] = (s * ds + 0.5 * shape.derivative(x, 1)) / root - ds;
  }
  values.front() = values.back() = 0.0;
  slopes.front() = slopes.back() = 0.0;
  SdeModel out = model;
  out.name = fmt::format("{}+variance_bump({},{},{})", model.name, height, center, width);
  out.diffusion = model.diffusion + Coefficient::hermite_cubic(knots, values, slopes, Coefficient::Tail::constant);
  return out;
}

}  // namespace sdeid
