#pragma once

#include <cstddef>
#include <span>

namespace ebstates::detail {

// Fixed-shape pairwise summation: the result depends only on the input
// order, never on how the caller parallelised filling it.
template <typename T>
T pairwise_sum(std::span<const T> v) {
  if (v.size() <= 8) {
    T s{};
    for (const T& x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

template <typename T, typename Container>
T pairwise_sum(const Container& c) {
  return pairwise_sum(std::span<const T>(c.data(), c.size()));
}

}  // namespace ebstates::detail
