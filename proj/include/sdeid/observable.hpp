#pragma once

#include <string>

namespace sdeid {

/// The function f in E^x[f(X_t)]: a monomial s^k or one of a few named
/// smooth functions (sin, tanh, gauss = exp(-s^2)).
class Observable {
 public:
  enum class Kind { monomial, sin, tanh, gauss };

  static Observable monomial(int power);
  static Observable named(Kind kind);

  /// Parses "s", "s^k", "sin", "tanh", "gauss". Throws UsageError otherwise.
  static Observable parse(const std::string& label);

  Kind kind() const { return kind_; }
  int power() const { return power_; }
  bool bounded() const { return kind_ != Kind::monomial || power_ == 0; }

  double value(double s) const;
  double d1(double s) const;
  double d2(double s) const;

  /// Canonical label, inverse of parse().
  std::string label() const;

  bool operator==(const Observable&) const = default;

 private:
  Observable(Kind kind, int power) : kind_(kind), power_(power) {}

  Kind kind_;
  int power_;
};

}  // namespace sdeid
