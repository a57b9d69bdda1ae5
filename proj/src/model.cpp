#include "sdeid/model.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace sdeid {

double SdeModel::min_sigma() const {
  constexpr int kSamples = 2048;
  double lowest = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kSamples; ++i) {
    lowest = std::min(lowest, sigma(work_interval.lo + work_interval.width() * i / kSamples));
  }
  for (double kappa : diffusion.breakpoints()) {
    if (work_interval.contains(kappa)) lowest = std::min(lowest, sigma(kappa));
  }
  return lowest;
}

void SdeModel::check() const {
  if (!(work_interval.hi > work_interval.lo) || !std::isfinite(work_interval.lo) ||
      !std::isfinite(work_interval.hi)) {
    throw UsageError(fmt::format("model '{}': empty or non-finite work interval", name));
  }
  if (!(sigma_floor > 0)) throw UsageError(fmt::format("model '{}': sigma_floor must be positive", name));
  const double lowest = min_sigma();
  if (!(lowest >= sigma_floor)) {
    throw UsageError(fmt::format("model '{}': diffusion drops to {} below sigma_floor {} on [{}, {}]", name,
                                 lowest, sigma_floor, work_interval.lo, work_interval.hi));
  }
}

std::string SdeModel::serialize() const {
  return fmt::format("name {}\nwork_interval {} {}\nsigma_floor {}\n[drift]\n{}[diffusion]\n{}", name,
                     work_interval.lo, work_interval.hi, sigma_floor, drift.to_text(), diffusion.to_text());
}

std::uint64_t SdeModel::fingerprint() const {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : serialize()) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

}  // namespace sdeid
