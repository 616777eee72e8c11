#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "cope/errors.hpp"

namespace cope {

/// A function sampled over relative distance tau.
struct CurveSeries {
  std::vector<double> taus;
  std::vector<double> values;

  std::size_t size() const noexcept { return taus.size(); }

  void validate() const {
    detail::require(taus.size() == values.size(), "CurveSeries: taus and values differ in length");
    detail::require(strictly_increasing(taus), "CurveSeries: taus must be strictly increasing");
  }

  static bool strictly_increasing(std::span<const double> xs) {
    return std::adjacent_find(xs.begin(), xs.end(), [](double a, double b) { return !(a < b); }) ==
           xs.end();
  }
};

using ScoreSeries = CurveSeries;

/// start, start + step, ... up to and including stop (within half a step).
inline std::vector<double> linear_grid(double start, double stop, double step) {
  detail::require(step > 0.0, "linear_grid: step must be > 0");
  detail::require(stop >= start, "linear_grid: stop must be >= start");
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 0.5)) + 1;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = start + step * static_cast<double>(i);
  return out;
}

}  // namespace cope
