#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstddef>

namespace sdeid {

namespace detail {

template <typename Scalar>
Scalar pairwise_sum_range(const Scalar* data, Eigen::Index n) {
  constexpr Eigen::Index kLeaf = 32;
  if (n <= kLeaf) {
    Scalar acc = 0;
    for (Eigen::Index i = 0; i < n; ++i) acc += data[i];
    return acc;
  }
  const Eigen::Index half = n / 2;
  return pairwise_sum_range(data, half) + pairwise_sum_range(data + half, n - half);
}

}  // namespace detail

/// Pairwise (cascade) summation; the result depends only on the values and
/// their order.
template <typename Derived>
typename Derived::Scalar pairwise_sum(const Eigen::DenseBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> flat = v.derived().reshaped();
  return detail::pairwise_sum_range(flat.data(), flat.size());
}

struct SampleSummary {
  double mean = 0;
  double variance = 0;  // unbiased
  double stderr_of_mean = 0;
};

template <typename Derived>
SampleSummary summarize(const Eigen::DenseBase<Derived>& v) {
  SampleSummary s;
  const auto n = static_cast<double>(v.size());
  if (v.size() == 0) return s;
  s.mean = pairwise_sum(v) / n;
  if (v.size() > 1) {
    const Eigen::ArrayXd centered = v.derived().array() - s.mean;
    s.variance = pairwise_sum(centered.square().matrix()) / (n - 1);
    s.stderr_of_mean = std::sqrt(s.variance / n);
  }
  return s;
}

}  // namespace sdeid
