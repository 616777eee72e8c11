#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "cope/rotary.hpp"

namespace cope::test {

inline HeadVector random_head(std::mt19937_64& rng, std::size_t d, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  std::vector<double> v(d);
  for (auto& x : v) x = normal(rng);
  return HeadVector(std::move(v));
}

// Natural size of a weighted score: sum_j |q_j| |k_j|.
inline double score_scale(const HeadVector& q, const HeadVector& k) {
  double s = 0.0;
  for (std::size_t j = 0; j < q.chunks(); ++j) s += std::abs(q.chunk(j)) * std::abs(k.chunk(j));
  return s;
}

inline double rel_diff(double a, double b) {
  const double m = std::max(std::abs(a), std::abs(b));
  return m == 0.0 ? 0.0 : std::abs(a - b) / m;
}

// Onset 44 of 64 chunks, carried over to d/2 chunks.
inline std::size_t onset_44_equivalent(int d) { return static_cast<std::size_t>(44 * (d / 2) / 64); }

}  // namespace cope::test
