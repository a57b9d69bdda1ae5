#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <initializer_list>
#include <istream>
#include <iterator>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "sdeid/errors.hpp"

namespace sdeid {

/// Findings of PiecewisePolynomial::validate(). The function is a member of
/// the admissible class iff `valid()`.
template <typename Scalar>
struct ValidationReport {
  struct GapViolation {
    std::size_t index;  // between breakpoints[index] and breakpoints[index+1]
    Scalar gap;
  };
  struct ContinuityDefect {
    std::size_t index;  // breakpoint index
    Scalar location;
    Scalar magnitude;
  };

  std::vector<GapViolation> gap_violations;
  std::vector<ContinuityDefect> continuity_defects;
  Scalar lipschitz_constant = 0;
  Scalar continuity_tolerance = 0;

  bool valid() const { return gap_violations.empty() && continuity_defects.empty(); }
};

/// Continuous piecewise polynomial on the whole real line.
///
/// Breakpoints k_1 < ... < k_n split the line into n+1 half-open pieces
/// (-inf, k_1), [k_1, k_2), ..., [k_n, +inf). Piece 0 is expanded in powers
/// of (x - k_1); piece j >= 1 in powers of (x - k_j). With no breakpoints
/// there is a single piece expanded about 0.
template <typename Scalar>
class PiecewisePolynomial {
 public:
  using Coefficients = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  static constexpr int kDefaultMaxDegree = 8;
  static constexpr Scalar kDefaultMinGap = Scalar(1e-3);

  PiecewisePolynomial() : PiecewisePolynomial({}, {Coefficients::Zero(1)}) {}

  PiecewisePolynomial(std::vector<Scalar> breakpoints, std::vector<Coefficients> pieces,
                      Scalar min_gap = kDefaultMinGap, int max_degree = kDefaultMaxDegree)
      : breakpoints_(std::move(breakpoints)),
        pieces_(std::move(pieces)),
        min_gap_(min_gap),
        max_degree_(max_degree) {
    if (pieces_.size() != breakpoints_.size() + 1) {
      throw UsageError("piecewise polynomial: need exactly one more piece than breakpoints");
    }
    if (!(min_gap_ > 0)) throw UsageError("piecewise polynomial: min_gap must be positive");
    for (std::size_t j = 0; j < breakpoints_.size(); ++j) {
      if (!std::isfinite(breakpoints_[j])) throw UsageError("piecewise polynomial: non-finite breakpoint");
      if (j > 0 && !(breakpoints_[j] > breakpoints_[j - 1])) {
        throw UsageError("piecewise polynomial: breakpoints must be strictly increasing");
      }
    }
    for (auto& c : pieces_) {
      if (c.size() == 0) c = Coefficients::Zero(1);
      if (c.size() - 1 > max_degree_) {
        throw UsageError("piecewise polynomial: piece degree exceeds cap of " + std::to_string(max_degree_));
      }
      if (!c.allFinite()) throw UsageError("piecewise polynomial: non-finite coefficient");
    }
  }

  static PiecewisePolynomial constant(Scalar value) {
    Coefficients c(1);
    c << value;
    return PiecewisePolynomial({}, {c});
  }

  /// Single polynomial sum_k coeffs[k] x^k.
  static PiecewisePolynomial polynomial(std::span<const Scalar> coeffs) {
    Coefficients c = Eigen::Map<const Coefficients>(coeffs.data(), static_cast<Eigen::Index>(coeffs.size()));
    return PiecewisePolynomial({}, {c});
  }
  static PiecewisePolynomial polynomial(std::initializer_list<Scalar> coeffs) {
    return polynomial(std::span<const Scalar>(coeffs.begin(), coeffs.size()));
  }

  enum class Tail { constant, linear };

  /// Continuous piecewise-linear interpolant through (knots[i], values[i]).
  /// Tails either hold the end value or continue the end segment.
  static PiecewisePolynomial piecewise_linear(std::span<const Scalar> knots, std::span<const Scalar> values,
                                              Tail tail = Tail::constant, Scalar min_gap = kDefaultMinGap) {
    const std::size_t n = knots.size();
    if (n < 2 || values.size() != n) throw UsageError("piecewise_linear: need >= 2 knots with matching values");
    std::vector<Scalar> bp(knots.begin(), knots.end());
    std::vector<Coefficients> pieces(n + 1);
    auto line = [](Scalar v, Scalar slope) {
      Coefficients c(2);
      c << v, slope;
      return c;
    };
    for (std::size_t j = 0; j + 1 < n; ++j) {
      pieces[j + 1] = line(values[j], (values[j + 1] - values[j]) / (knots[j + 1] - knots[j]));
    }
    if (tail == Tail::constant) {
      pieces[0] = line(values[0], 0);
      pieces[n] = line(values[n - 1], 0);
    } else {
      pieces[0] = pieces[1];
      pieces[n] = line(values[n - 1], pieces[n - 1](1));
    }
    return PiecewisePolynomial(std::move(bp), std::move(pieces), min_gap);
  }

  /// C^1 piecewise-cubic Hermite interpolant. Tails continue the end cubics
  /// unless `tail` is constant, in which case they hold the end values.
  static PiecewisePolynomial hermite_cubic(std::span<const Scalar> knots, std::span<const Scalar> values,
                                           std::span<const Scalar> slopes, Tail tail = Tail::linear,
                                           Scalar min_gap = kDefaultMinGap) {
    const std::size_t n = knots.size();
    if (n < 2 || values.size() != n || slopes.size() != n) {
      throw UsageError("hermite_cubic: need >= 2 knots with matching values and slopes");
    }
    std::vector<Scalar> bp(knots.begin(), knots.end());
    std::vector<Coefficients> pieces(n + 1);
    for (std::size_t j = 0; j + 1 < n; ++j) {
      const Scalar h = knots[j + 1] - knots[j];
      const Scalar delta = (values[j + 1] - values[j]) / h;
      Coefficients c(4);
      c << values[j], slopes[j], (3 * delta - 2 * slopes[j] - slopes[j + 1]) / h,
          (slopes[j] + slopes[j + 1] - 2 * delta) / (h * h);
      pieces[j + 1] = c;
    }
    if (tail == Tail::constant) {
      pieces[0] = Coefficients::Constant(1, values[0]);
      pieces[n] = Coefficients::Constant(1, values[n - 1]);
    } else {
      pieces[0] = pieces[1];
      // Re-expand the last cubic about the final knot so the right tail continues it.
      pieces[n] = taylor_shift(pieces[n - 1], knots[n - 1] - knots[n - 2]);
      pieces[n](0) = values[n - 1];
    }
    return PiecewisePolynomial(std::move(bp), std::move(pieces), min_gap);
  }

  const std::vector<Scalar>& breakpoints() const { return breakpoints_; }
  const std::vector<Coefficients>& pieces() const { return pieces_; }
  Scalar min_gap() const { return min_gap_; }
  int max_degree() const { return max_degree_; }

  /// Index of the piece whose half-open interval contains x.
  std::size_t piece_index(Scalar x) const {
    return static_cast<std::size_t>(std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x) -
                                    breakpoints_.begin());
  }

  Scalar anchor(std::size_t piece) const {
    if (breakpoints_.empty()) return 0;
    return piece == 0 ? breakpoints_.front() : breakpoints_[piece - 1];
  }

  Scalar operator()(Scalar x) const { return eval(x); }

  Scalar eval(Scalar x) const {
    if (!std::isfinite(x)) throw UsageError("piecewise polynomial: non-finite argument");
    const std::size_t j = piece_index(x);
    return horner(pieces_[j], x - anchor(j));
  }

  /// Exact derivative of the active piece. At a breakpoint the right piece
  /// is used and `at_breakpoint` (if given) is set.
  Scalar derivative(Scalar x, int order, bool* at_breakpoint = nullptr) const {
    if (order != 1 && order != 2) throw UsageError("derivative order must be 1 or 2");
    if (!std::isfinite(x)) throw UsageError("piecewise polynomial: non-finite argument");
    const std::size_t j = piece_index(x);
    if (at_breakpoint) {
      *at_breakpoint = std::binary_search(breakpoints_.begin(), breakpoints_.end(), x);
    }
    const Coefficients& c = pieces_[j];
    const Scalar s = x - anchor(j);
    Scalar acc = 0;
    for (Eigen::Index k = c.size() - 1; k >= order; --k) {
      const Scalar factor = order == 1 ? Scalar(k) : Scalar(k * (k - 1));
      acc = acc * s + factor * c(k);
    }
    return acc;
  }

  /// Gap, continuity and Lipschitz findings. The Lipschitz constant is the
  /// sampled sup of |f'| over [lo, hi].
  ValidationReport<Scalar> validate(Scalar lo, Scalar hi) const {
    ValidationReport<Scalar> report;
    for (std::size_t j = 0; j + 1 < breakpoints_.size(); ++j) {
      const Scalar gap = breakpoints_[j + 1] - breakpoints_[j];
      if (gap < min_gap_) report.gap_violations.push_back({j, gap});
    }
    Scalar scale = 1;
    for (std::size_t j = 0; j < breakpoints_.size(); ++j) {
      const Scalar kappa = breakpoints_[j];
      const Scalar left = horner(pieces_[j], kappa - anchor(j));
      const Scalar right = pieces_[j + 1](0);
      scale = std::max({scale, std::abs(left), std::abs(right)});
    }
    report.continuity_tolerance = 64 * std::numeric_limits<Scalar>::epsilon() * scale;
    for (std::size_t j = 0; j < breakpoints_.size(); ++j) {
      const Scalar kappa = breakpoints_[j];
      const Scalar defect = std::abs(horner(pieces_[j], kappa - anchor(j)) - pieces_[j + 1](0));
      if (defect > report.continuity_tolerance) report.continuity_defects.push_back({j, kappa, defect});
    }
    report.lipschitz_constant = lipschitz_on(lo, hi);
    return report;
  }

  /// Validation on the span of the breakpoints (or [-1, 1] without any).
  ValidationReport<Scalar> validate() const {
    if (breakpoints_.empty()) return validate(-1, 1);
    const Scalar pad = std::max<Scalar>(1, breakpoints_.back() - breakpoints_.front());
    return validate(breakpoints_.front() - pad, breakpoints_.back() + pad);
  }

  Scalar lipschitz_on(Scalar lo, Scalar hi, int samples_per_piece = 512) const {
    if (!(hi > lo)) return 0;
    Scalar best = 0;
    for (std::size_t j = 0; j < pieces_.size(); ++j) {
      Scalar a = j == 0 ? lo : std::max(lo, breakpoints_[j - 1]);
      Scalar b = j == breakpoints_.size() ? hi : std::min(hi, breakpoints_[j]);
      if (!(b > a)) continue;
      const Coefficients& c = pieces_[j];
      if (c.size() < 2) continue;
      for (int i = 0; i <= samples_per_piece; ++i) {
        const Scalar s = a + (b - a) * Scalar(i) / Scalar(samples_per_piece) - anchor(j);
        Scalar d = 0;
        for (Eigen::Index k = c.size() - 1; k >= 1; --k) d = d * s + Scalar(k) * c(k);
        best = std::max(best, std::abs(d));
      }
    }
    return best;
  }

  /// Pointwise sum. Breakpoints are merged; pieces are re-expanded about the
  /// new anchors.
  friend PiecewisePolynomial operator+(const PiecewisePolynomial& a, const PiecewisePolynomial& b) {
    std::vector<Scalar> bp;
    std::set_union(a.breakpoints_.begin(), a.breakpoints_.end(), b.breakpoints_.begin(), b.breakpoints_.end(),
                   std::back_inserter(bp));
    std::vector<Coefficients> pieces;
    pieces.reserve(bp.size() + 1);
    for (std::size_t j = 0; j <= bp.size(); ++j) {
      const Scalar anchor = bp.empty() ? 0 : (j == 0 ? bp.front() : bp[j - 1]);
      // A point strictly inside the merged piece identifies the operand pieces.
      Scalar probe;
      if (bp.empty()) {
        probe = 0;
      } else if (j == 0) {
        probe = bp.front() - 1;
      } else if (j == bp.size()) {
        probe = bp.back() + 1;
      } else {
        probe = Scalar(0.5) * (bp[j - 1] + bp[j]);
      }
      const std::size_t ia = a.piece_index(probe);
      const std::size_t ib = b.piece_index(probe);
      Coefficients ca = taylor_shift(a.pieces_[ia], anchor - a.anchor(ia));
      Coefficients cb = taylor_shift(b.pieces_[ib], anchor - b.anchor(ib));
      Coefficients sum = Coefficients::Zero(std::max(ca.size(), cb.size()));
      sum.head(ca.size()) += ca;
      sum.head(cb.size()) += cb;
      pieces.push_back(sum);
    }
    return PiecewisePolynomial(std::move(bp), std::move(pieces), std::min(a.min_gap_, b.min_gap_),
                               std::max(a.max_degree_, b.max_degree_));
  }

  PiecewisePolynomial scaled(Scalar factor) const {
    PiecewisePolynomial out = *this;
    for (auto& c : out.pieces_) c *= factor;
    return out;
  }

  /// Text form: optional `# min_gap G max_degree D` header, then one line
  /// per piece, `breakpoint_left coeff0 coeff1 ...`, the first piece using
  /// `-inf` as its left end.
  void write_text(std::ostream& os) const {
    os << "# min_gap " << format_scalar(min_gap_) << " max_degree " << max_degree_ << '\n';
    for (std::size_t j = 0; j < pieces_.size(); ++j) {
      os << (j == 0 ? std::string("-inf") : format_scalar(breakpoints_[j - 1]));
      for (Eigen::Index k = 0; k < pieces_[j].size(); ++k) os << ' ' << format_scalar(pieces_[j](k));
      os << '\n';
    }
  }

  std::string to_text() const {
    std::ostringstream os;
    write_text(os);
    return os.str();
  }

  static PiecewisePolynomial read_text(std::istream& is) {
    Scalar min_gap = kDefaultMinGap;
    int max_degree = kDefaultMaxDegree;
    std::vector<Scalar> bp;
    std::vector<Coefficients> pieces;
    std::string line;
    while (std::getline(is, line)) {
      std::istringstream ls(line);
      std::string head;
      if (!(ls >> head)) continue;
      if (head.front() == '#') {
        std::string key;
        while (ls >> key) {
          if (key == "min_gap") {
            std::string v;
            ls >> v;
            min_gap = parse_scalar(v);
          } else if (key == "max_degree") {
            ls >> max_degree;
          }
        }
        continue;
      }
      if (pieces.empty()) {
        if (head != "-inf") throw DataError("piecewise text: first piece must start at -inf");
      } else {
        bp.push_back(parse_scalar(head));
      }
      std::vector<Scalar> coeffs;
      std::string tok;
      while (ls >> tok) coeffs.push_back(parse_scalar(tok));
      if (coeffs.empty()) throw DataError("piecewise text: piece without coefficients");
      pieces.push_back(Eigen::Map<Coefficients>(coeffs.data(), static_cast<Eigen::Index>(coeffs.size())));
    }
    if (pieces.empty()) throw DataError("piecewise text: no pieces");
    return PiecewisePolynomial(std::move(bp), std::move(pieces), min_gap, max_degree);
  }

  static PiecewisePolynomial from_text(const std::string& text) {
    std::istringstream is(text);
    return read_text(is);
  }

  bool operator==(const PiecewisePolynomial& other) const {
    if (breakpoints_ != other.breakpoints_ || pieces_.size() != other.pieces_.size()) return false;
    for (std::size_t j = 0; j < pieces_.size(); ++j) {
      if (pieces_[j].size() != other.pieces_[j].size() || pieces_[j] != other.pieces_[j]) return false;
    }
    return min_gap_ == other.min_gap_ && max_degree_ == other.max_degree_;
  }

  /// Coefficients of p(s + shift) in powers of s.
  static Coefficients taylor_shift(const Coefficients& c, Scalar shift) {
    Coefficients out = c;
    if (shift == 0) return out;
    const Eigen::Index n = out.size();
    // Repeated synthetic division.
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index k = n - 2; k >= i; --k) out(k) += shift * out(k + 1);
    }
    return out;
  }

 private:
  static Scalar horner(const Coefficients& c, Scalar s) {
    Scalar acc = 0;
    for (Eigen::Index k = c.size() - 1; k >= 0; --k) acc = acc * s + c(k);
    return acc;
  }

  static std::string format_scalar(Scalar v) {
    std::ostringstream os;
    os.precision(std::numeric_limits<Scalar>::max_digits10);
    os << v;
    // Prefer the shortest representation that round-trips.
    for (int p = 1; p < std::numeric_limits<Scalar>::max_digits10; ++p) {
      std::ostringstream probe;
      probe.precision(p);
      probe << v;
      if (parse_scalar(probe.str()) == v) return probe.str();
    }
    return os.str();
  }

  static Scalar parse_scalar(const std::string& s) {
    if (s == "inf" || s == "+inf") return std::numeric_limits<Scalar>::infinity();
    if (s == "-inf") return -std::numeric_limits<Scalar>::infinity();
    const char* begin = s.c_str();
    char* end = nullptr;
    Scalar v;
    if constexpr (std::is_same_v<Scalar, float>) {
      v = std::strtof(begin, &end);
    } else if constexpr (std::is_same_v<Scalar, double>) {
      v = std::strtod(begin, &end);
    } else {
      v = static_cast<Scalar>(std::strtold(begin, &end));
    }
    if (end == begin || *end != '\0') throw DataError("piecewise text: cannot parse number '" + s + "'");
    return v;
  }

  std::vector<Scalar> breakpoints_;
  std::vector<Coefficients> pieces_;
  Scalar min_gap_;
  int max_degree_;
};

}  // namespace sdeid
