#include "sdeid/counter_rng.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <numbers>

namespace sdeid {

double NormalDraws::inverse_cdf(double p) { return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p); }

std::array<double, 2> NormalDraws::pair(std::uint64_t path, std::uint64_t pair_index) const {
  const Philox4x32::Counter ctr{static_cast<std::uint32_t>(pair_index), static_cast<std::uint32_t>(pair_index >> 32),
                                static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)};
  const auto r = Philox4x32::generate(ctr, key_);
  return {inverse_cdf(to_open_unit(r[0], r[1])), inverse_cdf(to_open_unit(r[2], r[3]))};
}

}  // namespace sdeid
