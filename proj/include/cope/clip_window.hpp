#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cope/errors.hpp"
#include "cope/freq_table.hpp"

namespace cope {

enum class ClipMode { none, hard, soft };

inline const char* to_string(ClipMode m) {
  switch (m) {
    case ClipMode::none: return "none";
    case ClipMode::hard: return "hard";
    case ClipMode::soft: return "soft";
  }
  return "unknown";
}

inline std::optional<ClipMode> parse_clip_mode(std::string_view s) {
  if (s == "none") return ClipMode::none;
  if (s == "hard") return ClipMode::hard;
  if (s == "soft") return ClipMode::soft;
  return std::nullopt;
}

/// Cosine-decay taper: 1 at and above theta_start, falling to 0 at theta_min.
/// Frequencies below theta_min are fully attenuated.
inline double soft_clip_weight(double theta, double theta_start, double theta_min) {
  if (theta >= theta_start) return 1.0;
  if (theta < theta_min) return 0.0;
  const double x = (theta_start - theta) / (theta_start - theta_min);
  return 0.5 * (1.0 + std::cos(std::numbers::pi * x));
}

/// Per-frequency weights w_j in [0, 1] plus the parameters that produced them.
class ClipWindow {
 public:
  ClipWindow(ClipMode mode, std::size_t onset_index, double theta_start, double theta_min,
             std::vector<double> weights)
      : mode_(mode),
        onset_(onset_index),
        theta_start_(theta_start),
        theta_min_(theta_min),
        weights_(std::move(weights)) {
    for (double w : weights_)
      detail::require(w >= 0.0 && w <= 1.0, "ClipWindow: weights must lie in [0, 1]");
  }

  /// Window with every weight 1, usable on any table (including non-monotone ones).
  static ClipWindow all_pass(std::size_t n) {
    return ClipWindow(ClipMode::none, n, std::numeric_limits<double>::infinity(), 0.0,
                      std::vector<double>(n, 1.0));
  }

  ClipMode mode() const noexcept { return mode_; }
  std::size_t onset_index() const noexcept { return onset_; }
  double theta_start() const noexcept { return theta_start_; }
  double theta_min() const noexcept { return theta_min_; }
  std::span<const double> weights() const noexcept { return weights_; }
  std::size_t size() const noexcept { return weights_.size(); }
  double operator[](std::size_t j) const { return weights_[j]; }

  double total_weight() const noexcept {
    double s = 0.0;
    for (double w : weights_) s += w;
    return s;
  }

  /// Column label such as "rope", "hard_44", "soft_44".
  std::string label() const {
    if (mode_ == ClipMode::none) return "rope";
    return std::string(to_string(mode_)) + "_" + std::to_string(onset_);
  }

 private:
  ClipMode mode_;
  std::size_t onset_;
  double theta_start_;
  double theta_min_;
  std::vector<double> weights_;
};

/// Build the clip window for `table` with attenuation starting at chunk
/// `onset_index`. The table must be strictly decreasing.
///
///   none: all ones
///   hard: 1 below the onset index, 0 from it on
///   soft: cosine taper from theta_start = theta[onset] down to theta_min
///
/// onset_index == d/2 clips nothing in every mode.
inline ClipWindow clip_window(const FreqTable& table, ClipMode mode, std::size_t onset_index) {
  const std::size_t n = table.size();
  detail::require(onset_index <= n, "clip_window: onset_index " + std::to_string(onset_index) +
                                        " outside [0, " + std::to_string(n) + "]");
  detail::require(table.strictly_decreasing(), "clip_window: table frequencies must be strictly decreasing");

  const double theta_min = table[n - 1];
  const double theta_start =
      onset_index < n ? table[onset_index] : std::numeric_limits<double>::infinity();

  std::vector<double> w(n, 1.0);
  if (onset_index < n) {
    switch (mode) {
      case ClipMode::none:
        break;
      case ClipMode::hard:
        for (std::size_t j = onset_index; j < n; ++j) w[j] = 0.0;
        break;
      case ClipMode::soft:
        for (std::size_t j = onset_index; j < n; ++j)
          w[j] = soft_clip_weight(table[j], theta_start, theta_min);
        break;
    }
  }
  return ClipWindow(mode, onset_index, theta_start, theta_min, std::move(w));
}

/// The drop-in form of clipping: scale each frequency by its weight,
/// theta'_j = w_j * theta_j. Hard-clipped chunks become position independent.
inline FreqTable apply_to_frequencies(const FreqTable& table, const ClipWindow& window) {
  detail::require(window.size() == table.size(), "apply_to_frequencies: window length must be d/2");
  std::vector<double> thetas(table.size());
  for (std::size_t j = 0; j < thetas.size(); ++j) thetas[j] = window[j] * table[j];
  return FreqTable(table.dim(), table.base(), std::move(thetas), TableOrigin::clipped);
}

}  // namespace cope
