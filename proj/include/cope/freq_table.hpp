#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cope/errors.hpp"

namespace cope {

/// How a table's frequencies came about. Only `generated` tables satisfy
/// theta_i = base^(-2i/d) and may be rebased.
enum class TableOrigin { generated, scaled, clipped };

inline const char* to_string(TableOrigin origin) {
  switch (origin) {
    case TableOrigin::generated: return "generated";
    case TableOrigin::scaled: return "scaled";
    case TableOrigin::clipped: return "clipped";
  }
  return "unknown";
}

/// Per-chunk rotation frequencies of one attention head.
///
/// A head of dimension d is split into d/2 two-component chunks; chunk i
/// rotates by theta_i radians per position step. Values are immutable once
/// constructed.
class FreqTable {
 public:
  FreqTable(int d, double base, std::vector<double> thetas, TableOrigin origin)
      : d_(d), base_(base), thetas_(std::move(thetas)), origin_(origin) {
    detail::require(d_ >= 2 && d_ % 2 == 0,
                    "FreqTable: d must be an even integer >= 2, got " + std::to_string(d_));
    detail::require(thetas_.size() == static_cast<std::size_t>(d_ / 2),
                    "FreqTable: expected d/2 = " + std::to_string(d_ / 2) + " frequencies, got " +
                        std::to_string(thetas_.size()));
    for (double t : thetas_) {
      detail::require(std::isfinite(t) && t >= 0.0, "FreqTable: frequencies must be finite and >= 0");
      if (origin_ != TableOrigin::clipped)
        detail::require(t > 0.0, "FreqTable: generated and scaled frequencies must be > 0");
    }
  }

  int dim() const noexcept { return d_; }
  std::size_t size() const noexcept { return thetas_.size(); }
  double base() const noexcept { return base_; }
  TableOrigin origin() const noexcept { return origin_; }
  bool is_generated() const noexcept { return origin_ == TableOrigin::generated; }

  std::span<const double> thetas() const noexcept { return thetas_; }
  double operator[](std::size_t i) const { return thetas_[i]; }
  double min_theta() const { return *std::min_element(thetas_.begin(), thetas_.end()); }
  double max_theta() const { return *std::max_element(thetas_.begin(), thetas_.end()); }

  bool strictly_decreasing() const noexcept {
    return std::adjacent_find(thetas_.begin(), thetas_.end(),
                              [](double a, double b) { return !(a > b); }) == thetas_.end();
  }

  friend bool operator==(const FreqTable&, const FreqTable&) = default;

 private:
  int d_;
  double base_;
  std::vector<double> thetas_;
  TableOrigin origin_;
};

/// theta_i = base^(-2i/d) for i in [0, d/2).
inline FreqTable build_freq_table(int d, double base) {
  detail::require(d >= 2 && d % 2 == 0,
                  "build_freq_table: d must be an even integer >= 2, got " + std::to_string(d));
  detail::require(std::isfinite(base) && base > 1.0, "build_freq_table: base must be > 1");
  std::vector<double> thetas(static_cast<std::size_t>(d / 2));
  for (std::size_t i = 0; i < thetas.size(); ++i)
    thetas[i] = std::pow(base, -2.0 * static_cast<double>(i) / static_cast<double>(d));
  return FreqTable(d, base, std::move(thetas), TableOrigin::generated);
}

/// T_i = 2*pi / theta_i.
inline std::vector<double> periods(const FreqTable& table) {
  std::vector<double> out;
  out.reserve(table.size());
  for (double t : table.thetas()) {
    detail::require(t > 0.0, "periods: frequency must be > 0 to have a finite period");
    out.push_back(2.0 * std::numbers::pi / t);
  }
  return out;
}

/// Number of leading dimensions whose chunks complete a full period inside a
/// window of `pretrain_len` positions: 2*ceil((d/2) * log_base(L/2pi)),
/// clamped to [0, d].
inline int critical_dimension(double pretrain_len, int d, double base) {
  detail::require(pretrain_len >= 1.0, "critical_dimension: pretrain_len must be >= 1");
  detail::require(d >= 2 && d % 2 == 0, "critical_dimension: d must be an even integer >= 2");
  detail::require(base > 1.0, "critical_dimension: base must be > 1");
  const double chunks = 0.5 * d * std::log(pretrain_len / (2.0 * std::numbers::pi)) / std::log(base);
  const double raw = 2.0 * std::ceil(chunks);
  return static_cast<int>(std::clamp(raw, 0.0, static_cast<double>(d)));
}

/// Regenerate the schedule of a generated table with a new base (ABF).
inline FreqTable rebase(const FreqTable& table, double new_base) {
  if (!table.is_generated())
    throw invalid_state(std::string("rebase: table is ") + to_string(table.origin()) +
                        ", only generated tables can be rebased");
  return build_freq_table(table.dim(), new_base);
}

}  // namespace cope
