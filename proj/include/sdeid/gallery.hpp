#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "sdeid/model.hpp"

namespace sdeid {

using ParamMap = std::map<std::string, double>;

struct GalleryParam {
  std::string name;
  double default_value;
  std::string meaning;
};

struct GalleryEntry {
  std::string name;
  std::string drift_formula;
  std::string diffusion_formula;
  std::string notes;
  std::vector<GalleryParam> params;
  std::function<SdeModel(const ParamMap&)> build;
};

/// Built-in models: ou, wright_fisher, gbm, brownian, constant.
const std::vector<GalleryEntry>& gallery();

/// Throws UsageError for unknown names or parameters.
const GalleryEntry& gallery_entry(const std::string& name);
SdeModel make_model(const std::string& name, const ParamMap& params = {});

// Direct constructors with the gallery defaults.

/// b(x) = theta (mu - x), sigma constant, work interval [-4, 4].
SdeModel ornstein_uhlenbeck(double theta = 1.0, double mu = 0.5, double sigma = 0.2);

/// b(x) = alpha x, sigma(x) = beta x, work interval [0.05, 3].
SdeModel geometric_brownian(double alpha = 0.1, double beta = 0.2);

/// b(x) = x (m1 - (m1 x + m2 (1 - x))), sigma(x) = sqrt(x (1 - x) / Ne),
/// restricted to [margin, 1 - margin]. sigma is stored as a C^1 cubic
/// Hermite interpolant on knots of spacing `knot_spacing` anchored at 1/2.
SdeModel wright_fisher(double m1 = 1.0, double m2 = 0.5, double effective_size = 20.0, double margin = 0.05,
                       double knot_spacing = 0.025);

/// b = 0, constant sigma, work interval [-4, 4].
SdeModel brownian(double sigma = 1.0);

/// Constant drift and diffusion on [-4, 4].
SdeModel constant_model(double drift, double sigma);

/// Compactly supported C^1 quartic bump h (1 - ((x - c)/w)^2)^2 on [c - w, c + w].
Coefficient bump(double height, double center, double width);

/// Model with b + bump.
SdeModel with_drift_bump(const SdeModel& model, double height, double center, double width);

/// Model whose squared diffusion is sigma^2 + bump. The new sigma is the old
/// one plus a cubic Hermite correction supported on the bump.
SdeModel with_variance_bump(const SdeModel& model, double height, double center, double width,
                            int knots_per_half_width = 20);

}  // namespace sdeid
