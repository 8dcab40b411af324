#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string_view>

namespace dynarag {

// Small numeric helpers shared by the policy and RL code. All of them are
// expression-friendly: they accept any dense Eigen expression and return
// plain column vectors of the same scalar type.

template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  const Scalar m = logits.maxCoeff();
  return m + std::log((logits.array() - m).exp().sum());
}

template <typename Derived>
Eigen::Vector<typename Derived::Scalar, Eigen::Dynamic> softmax(
    const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  const Scalar m = logits.maxCoeff();
  Eigen::Vector<Scalar, Eigen::Dynamic> p = (logits.array() - m).exp();
  p /= p.sum();
  return p;
}

template <typename Derived>
Eigen::Vector<typename Derived::Scalar, Eigen::Dynamic> log_softmax(
    const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  const Scalar lse = log_sum_exp(logits);
  return (logits.array() - lse).matrix();
}

// Entropy of a categorical distribution given in probability space.
template <typename Derived>
typename Derived::Scalar entropy(const Eigen::MatrixBase<Derived>& probs) {
  using Scalar = typename Derived::Scalar;
  Scalar h = 0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    const Scalar p = probs(i);
    if (p > Scalar(0)) h -= p * std::log(p);
  }
  return h;
}

// FNV-1a, used for feature hashing and observation digests. Stable across
// platforms, unlike std::hash.
constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

constexpr std::uint64_t fnv1a(std::string_view data, std::uint64_t h = kFnvOffset) {
  for (char c : data) {
    h ^= static_cast<unsigned char>(c);
    h *= kFnvPrime;
  }
  return h;
}

constexpr std::uint64_t fnv1a_mix(std::uint64_t value, std::uint64_t h) {
  for (int i = 0; i < 8; ++i) {
    h ^= (value >> (8 * i)) & 0xffu;
    h *= kFnvPrime;
  }
  return h;
}

}  // namespace dynarag
