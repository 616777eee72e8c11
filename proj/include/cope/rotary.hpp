#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cope/clip_window.hpp"
#include "cope/curve.hpp"
#include "cope/errors.hpp"
#include "cope/freq_table.hpp"

namespace cope {

/// A d-dimensional query or key, viewed as d/2 chunks
/// (components[2j], components[2j+1]).
class HeadVector {
 public:
  HeadVector() = default;
  explicit HeadVector(std::vector<double> components) : c_(std::move(components)) {
    detail::require(!c_.empty() && c_.size() % 2 == 0, "HeadVector: length must be even and positive");
  }

  std::size_t dim() const noexcept { return c_.size(); }
  std::size_t chunks() const noexcept { return c_.size() / 2; }
  std::span<const double> components() const noexcept { return c_; }
  double operator[](std::size_t i) const { return c_[i]; }

  /// Chunk j as the complex number c[2j] + i c[2j+1].
  std::complex<double> chunk(std::size_t j) const { return {c_[2 * j], c_[2 * j + 1]}; }

  double norm() const {
    double s = 0.0;
    for (double x : c_) s += x * x;
    return std::sqrt(s);
  }

  friend double dot(const HeadVector& a, const HeadVector& b) {
    detail::require(a.dim() == b.dim(), "dot: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) s += a.c_[i] * b.c_[i];
    return s;
  }

  friend bool operator==(const HeadVector&, const HeadVector&) = default;

 private:
  std::vector<double> c_;
};

namespace detail {

inline void check_dims(const HeadVector& v, const FreqTable& table, const char* op) {
  require(v.dim() == static_cast<std::size_t>(table.dim()),
          std::string(op) + ": vector dimension " + std::to_string(v.dim()) +
              " does not match table d = " + std::to_string(table.dim()));
}

inline void check_window(const ClipWindow& window, const FreqTable& table, const char* op) {
  require(window.size() == table.size(), std::string(op) + ": window length must be d/2");
}

}  // namespace detail

/// Rotate every chunk j by position * theta_j.
inline HeadVector rotate(const HeadVector& v, std::int64_t position, const FreqTable& table) {
  detail::check_dims(v, table, "rotate");
  detail::require(position >= 0, "rotate: position must be >= 0");
  std::vector<double> out(v.dim());
  const auto p = static_cast<double>(position);
  for (std::size_t j = 0; j < table.size(); ++j) {
    const double angle = p * table[j];
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const double x = v[2 * j];
    const double y = v[2 * j + 1];
    out[2 * j] = c * x - s * y;
    out[2 * j + 1] = s * x + c * y;
  }
  return HeadVector(std::move(out));
}

/// sum_j w_j <R(n theta_j) q_j, R(m theta_j) k_j>, computed in the rotation
/// form. With an all-pass window this is the plain RoPE score.
inline double attention_score(const HeadVector& q, std::int64_t n, const HeadVector& k, std::int64_t m,
                              const FreqTable& table, const ClipWindow& window) {
  detail::check_dims(q, table, "attention_score");
  detail::check_dims(k, table, "attention_score");
  detail::check_window(window, table, "attention_score");
  const HeadVector qr = rotate(q, n, table);
  const HeadVector kr = rotate(k, m, table);
  double score = 0.0;
  for (std::size_t j = 0; j < table.size(); ++j)
    score += window[j] * (qr[2 * j] * kr[2 * j] + qr[2 * j + 1] * kr[2 * j + 1]);
  return score;
}

/// The score as a weighted sum of complex exponentials at the table's
/// frequencies: sum_j w_j Re[conj(q_j) k_j e^{i theta_j tau}].
///
/// Equals attention_score(q, 0, k, tau) for integer tau; real tau samples the
/// same curve densely.
inline double nudft_score(const HeadVector& q, const HeadVector& k, double tau, const FreqTable& table,
                          const ClipWindow& window) {
  detail::check_dims(q, table, "nudft_score");
  detail::check_dims(k, table, "nudft_score");
  detail::check_window(window, table, "nudft_score");
  double score = 0.0;
  for (std::size_t j = 0; j < table.size(); ++j) {
    const std::complex<double> coeff = std::conj(q.chunk(j)) * k.chunk(j);
    score += window[j] * std::real(coeff * std::polar(1.0, table[j] * tau));
  }
  return score;
}

inline ScoreSeries score_series(const HeadVector& q, const HeadVector& k, std::span<const double> taus,
                                const FreqTable& table, const ClipWindow& window) {
  detail::require(!taus.empty(), "score_series: taus must not be empty");
  detail::require(CurveSeries::strictly_increasing(taus), "score_series: taus must be strictly increasing");
  ScoreSeries out;
  out.taus.assign(taus.begin(), taus.end());
  out.values.reserve(taus.size());
  for (double tau : taus) out.values.push_back(nudft_score(q, k, tau, table, window));
  return out;
}

/// Fold sqrt(w_j) into chunk j. Scoring two folded vectors with an all-pass
/// window reproduces the weighted score, so a stock dot-product kernel works.
inline HeadVector fold_window(const HeadVector& v, const ClipWindow& window) {
  detail::require(window.size() == v.chunks(), "fold_window: window length must be d/2");
  std::vector<double> out(v.components().begin(), v.components().end());
  for (std::size_t j = 0; j < window.size(); ++j) {
    const double r = std::sqrt(window[j]);
    out[2 * j] *= r;
    out[2 * j + 1] *= r;
  }
  return HeadVector(std::move(out));
}

/// Weighted score at one fixed relative distance, with the per-chunk
/// rotation precomputed. Used by the sampling loops.
class RelativeScorer {
 public:
  RelativeScorer(const FreqTable& table, const ClipWindow& window, double tau)
      : wc_(table.size()), ws_(table.size()) {
    detail::check_window(window, table, "RelativeScorer");
    for (std::size_t j = 0; j < table.size(); ++j) {
      wc_[j] = window[j] * std::cos(tau * table[j]);
      ws_[j] = window[j] * std::sin(tau * table[j]);
    }
  }

  std::size_t dim() const noexcept { return 2 * wc_.size(); }

  /// q^T R_tau k under the window. Spans must have length dim().
  double operator()(std::span<const double> q, std::span<const double> k) const noexcept {
    double s = 0.0;
    for (std::size_t j = 0; j < wc_.size(); ++j) {
      const double q0 = q[2 * j], q1 = q[2 * j + 1];
      const double k0 = k[2 * j], k1 = k[2 * j + 1];
      s += wc_[j] * (q0 * k0 + q1 * k1) + ws_[j] * (q1 * k0 - q0 * k1);
    }
    return s;
  }

 private:
  std::vector<double> wc_;
  std::vector<double> ws_;
};

}  // namespace cope
