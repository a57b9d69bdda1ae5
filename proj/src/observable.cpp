#include "sdeid/observable.hpp"

#include <cmath>
#include <string>

#include "sdeid/errors.hpp"

namespace sdeid {

Observable Observable::monomial(int power) {
  if (power < 0) throw UsageError("observable: monomial power must be non-negative");
  return {Kind::monomial, power};
}

Observable Observable::named(Kind kind) {
  if (kind == Kind::monomial) throw UsageError("observable: use monomial() for powers");
  return {kind, 0};
}

Observable Observable::parse(const std::string& label) {
  if (label == "s") return monomial(1);
  if (label == "sin") return named(Kind::sin);
  if (label == "tanh") return named(Kind::tanh);
  if (label == "gauss") return named(Kind::gauss);
  if (label.rfind("s^", 0) == 0 && label.size() > 2) {
    std::size_t used = 0;
    int power = -1;
    try {
      power = std::stoi(label.substr(2), &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == label.size() - 2 && power >= 0) return monomial(power);
  }
  throw UsageError("observable: unknown function '" + label + "' (expected s, s^k, sin, tanh, gauss)");
}

double Observable::value(double s) const {
  switch (kind_) {
    case Kind::monomial:
      if (power_ == 1) return s;
      if (power_ == 2) return s * s;
      return std::pow(s, power_);
    case Kind::sin:
      return std::sin(s);
    case Kind::tanh:
      return std::tanh(s);
    case Kind::gauss:
      return std::exp(-s * s);
  }
  return 0;
}

double Observable::d1(double s) const {
  switch (kind_) {
    case Kind::monomial:
      if (power_ == 0) return 0.0;
      if (power_ <= 2) return power_ == 1 ? 1.0 : 2.0 * s;
      return power_ * std::pow(s, power_ - 1);
    case Kind::sin:
      return std::cos(s);
    case Kind::tanh: {
      const double t = std::tanh(s);
      return 1.0 - t * t;
    }
    case Kind::gauss:
      return -2.0 * s * std::exp(-s * s);
  }
  return 0;
}

double Observable::d2(double s) const {
  switch (kind_) {
    case Kind::monomial:
      return power_ < 2 ? 0.0 : power_ * (power_ - 1) * std::pow(s, power_ - 2);
    case Kind::sin:
      return -std::sin(s);
    case Kind::tanh: {
      const double t = std::tanh(s);
      return -2.0 * t * (1.0 - t * t);
    }
    case Kind::gauss:
      return (4.0 * s * s - 2.0) * std::exp(-s * s);
  }
  return 0;
}

std::string Observable::label() const {
  switch (kind_) {
    case Kind::monomial:
      return power_ == 1 ? "s" : "s^" + std::to_string(power_);
    case Kind::sin:
      return "sin";
    case Kind::tanh:
      return "tanh";
    case Kind::gauss:
      return "gauss";
  }
  return "?";
}

}  // namespace sdeid
