#pragma once

#include <array>
#include <cstdint>

namespace sdeid {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Output is a
/// pure function of (key, counter), so draws do not depend on the order in
/// which workers visit paths.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// Standard normal draws keyed by (seed, path, step). Each Philox block
/// yields the pair for steps 2m and 2m+1.
class NormalDraws {
 public:
  explicit NormalDraws(std::uint64_t seed)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  /// Normals for steps 2*pair_index and 2*pair_index + 1 of `path`.
  std::array<double, 2> pair(std::uint64_t path, std::uint64_t pair_index) const;

  double at(std::uint64_t path, std::uint64_t step) const { return pair(path, step / 2)[step % 2]; }

  /// Uniform in the open interval (0, 1) built from 52 random bits.
  static double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 20) ^ (lo >> 12);
    return (static_cast<double>(bits & ((1ULL << 52) - 1)) + 0.5) * 0x1.0p-52;
  }

  /// Inverse of the standard normal CDF.
  static double inverse_cdf(double p);

 private:
  Philox4x32::Key key_;
};

}  // namespace sdeid
