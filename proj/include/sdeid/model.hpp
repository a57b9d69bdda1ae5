#pragma once

#include <cstdint>
#include <string>

#include "sdeid/piecewise.hpp"

namespace sdeid {

using Coefficient = PiecewisePolynomial<double>;

struct Interval {
  double lo = 0;
  double hi = 0;

  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
  bool contains(double x) const { return x >= lo && x <= hi; }
  bool contains(const Interval& other) const { return other.lo >= lo && other.hi <= hi; }
  bool operator==(const Interval&) const = default;
};

/// Scalar Ito diffusion dX = b(X) dt + sigma(X) dW restricted for numerics
/// to `work_interval`.
struct SdeModel {
  std::string name;
  Coefficient drift;
  Coefficient diffusion;
  Interval work_interval;
  double sigma_floor = 1e-6;

  double b(double x) const { return drift.eval(x); }
  double sigma(double x) const { return diffusion.eval(x); }

  /// Throws UsageError unless the work interval is non-empty and
  /// sigma >= sigma_floor on it (checked at breakpoints and on a dense grid).
  void check() const;

  /// Smallest sampled sigma on the work interval.
  double min_sigma() const;

  /// Canonical text form; stable across runs and platforms.
  std::string serialize() const;

  /// FNV-1a hash of serialize().
  std::uint64_t fingerprint() const;
};

}  // namespace sdeid
