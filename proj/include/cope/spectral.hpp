#pragma once

#include <cmath>
#include <cstdint>
#include <future>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <boost/random/normal_distribution.hpp>

#include "cope/clip_window.hpp"
#include "cope/curve.hpp"
#include "cope/errors.hpp"
#include "cope/freq_table.hpp"
#include "cope/rotary.hpp"

namespace cope {

// ---------------------------------------------------------------------------
// Semantic decay
// ---------------------------------------------------------------------------

/// sum_i w_i cos(tau * theta_i) at each tau.
inline CurveSeries decay_curve(const FreqTable& table, const ClipWindow& window, std::span<const double> taus) {
  detail::require(window.size() == table.size(), "decay_curve: window length must be d/2");
  detail::require(CurveSeries::strictly_increasing(taus), "decay_curve: taus must be strictly increasing");
  detail::require(taus.empty() || taus.front() >= 0.0, "decay_curve: taus must be >= 0");
  CurveSeries out;
  out.taus.assign(taus.begin(), taus.end());
  out.values.resize(taus.size());
  for (std::size_t t = 0; t < taus.size(); ++t) {
    double s = 0.0;
    for (std::size_t i = 0; i < table.size(); ++i) s += window[i] * std::cos(taus[t] * table[i]);
    out.values[t] = s;
  }
  return out;
}

/// Expected score advantage of a similar key over a random one at distance
/// tau: 2 sigma^2 sum_i w_i cos(tau theta_i).
inline double semantic_gap_analytic(double sigma, const FreqTable& table, const ClipWindow& window, double tau) {
  detail::require(sigma >= 0.0, "semantic_gap_analytic: sigma must be >= 0");
  const double taus[] = {tau};
  return 2.0 * sigma * sigma * decay_curve(table, window, taus).values.front();
}

struct GapEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t n_samples = 0;
  double analytic = 0.0;
  std::string distribution = "gaussian";

  /// |mean - analytic| in units of the standard error.
  double z_score() const { return std::abs(mean - analytic) / std_error; }
};

namespace detail {

// Welford running moments; merge() is Chan's pairwise update.
struct RunningMoments {
  std::int64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
  }

  void merge(const RunningMoments& o) {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    const double total = static_cast<double>(n + o.n);
    const double delta = o.mean - mean;
    mean += delta * static_cast<double>(o.n) / total;
    m2 += o.m2 + delta * delta * static_cast<double>(n) * static_cast<double>(o.n) / total;
    n += o.n;
  }

  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
};

/// Independent engine for substream `stream` of `seed`.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream, std::uint64_t tag = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(tag)};
  return std::mt19937_64(seq);
}

}  // namespace detail

/// Monte Carlo estimate of E[score(q, k') - score(q, k)] with k' = q + eps.
///
/// q and k have i.i.d. Gaussian components (mean mu, std sigma); eps has
/// i.i.d. zero-mean Gaussian components (std sigma_eps). Samples are split
/// into `shards` contiguous blocks, each drawn from its own substream and
/// reduced in shard order, so the result depends only on (seed, n_samples,
/// shards).
inline GapEstimate semantic_gap_montecarlo(double sigma, double mu, double sigma_eps, const FreqTable& table,
                                           const ClipWindow& window, std::int64_t tau, std::int64_t n_samples,
                                           std::uint64_t seed, unsigned shards = 1) {
  detail::require(n_samples >= 2, "semantic_gap_montecarlo: n_samples must be >= 2");
  detail::require(sigma > 0.0, "semantic_gap_montecarlo: sigma must be > 0");
  detail::require(sigma_eps >= 0.0, "semantic_gap_montecarlo: sigma_eps must be >= 0");
  detail::require(shards >= 1, "semantic_gap_montecarlo: shards must be >= 1");
  detail::require(window.size() == table.size(), "semantic_gap_montecarlo: window length must be d/2");

  const RelativeScorer scorer(table, window, static_cast<double>(tau));
  const std::size_t d = scorer.dim();

  auto run_shard = [&](unsigned shard) {
    const auto count = n_samples / shards + (static_cast<std::int64_t>(shard) < n_samples % shards ? 1 : 0);
    auto rng = detail::substream(seed, shard);
    boost::random::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> q(d), k(d), k_similar(d);
    detail::RunningMoments acc;
    for (std::int64_t s = 0; s < count; ++s) {
      for (std::size_t i = 0; i < d; ++i) q[i] = mu + sigma * normal(rng);
      for (std::size_t i = 0; i < d; ++i) k[i] = mu + sigma * normal(rng);
      for (std::size_t i = 0; i < d; ++i) k_similar[i] = q[i] + sigma_eps * normal(rng);
      acc.add(scorer(q, k_similar) - scorer(q, k));
    }
    return acc;
  };

  detail::RunningMoments total;
  if (shards == 1) {
    total = run_shard(0);
  } else {
    std::vector<std::future<detail::RunningMoments>> parts;
    parts.reserve(shards);
    for (unsigned s = 0; s < shards; ++s) parts.push_back(std::async(std::launch::async, run_shard, s));
    for (auto& p : parts) total.merge(p.get());
  }

  GapEstimate est;
  est.mean = total.mean;
  est.std_error = std::sqrt(total.variance() / static_cast<double>(total.n));
  est.n_samples = total.n;
  est.analytic = semantic_gap_analytic(sigma, table, window, static_cast<double>(tau));
  return est;
}

// ---------------------------------------------------------------------------
// Low-pass kernels
// ---------------------------------------------------------------------------

/// Impulse response of the ideal low-pass on |theta| <= theta_c:
/// (theta_c / pi) sinc(theta_c tau / pi).
inline double sinc_kernel_at(double theta_c, double tau) {
  const double x = theta_c * tau;
  if (x == 0.0) return theta_c / std::numbers::pi;
  return std::sin(x) / (std::numbers::pi * tau);
}

inline CurveSeries sinc_kernel(double theta_c, std::span<const double> taus) {
  detail::require(theta_c > 0.0, "sinc_kernel: theta_c must be > 0");
  detail::require(CurveSeries::strictly_increasing(taus), "sinc_kernel: taus must be strictly increasing");
  CurveSeries out;
  out.taus.assign(taus.begin(), taus.end());
  out.values.reserve(taus.size());
  for (double t : taus) out.values.push_back(sinc_kernel_at(theta_c, t));
  return out;
}

/// Impulse response of the soft window's complement, 1 - w(theta), over
/// [0, theta_start] (w = 0 below theta_min):
///
///   K(tau) = (1/pi) int_0^theta_start (1 - w(theta)) cos(theta tau) d theta
///          = (sin(theta_min tau) + sin(theta_start tau)) a^2 / (2 pi tau (a^2 - tau^2))
///
/// with a = pi / (theta_start - theta_min). The tail falls as 1/tau^3.
inline double soft_complement_kernel_at(double theta_start, double theta_min, double tau) {
  const double pi = std::numbers::pi;
  const double a = pi / (theta_start - theta_min);
  const double t = std::abs(tau);
  // Near tau = 0 the cos factor is 1 to within (tau theta)^2 < 1e-12.
  if (t * theta_start < 1e-6) return 0.5 * (theta_min + theta_start) / pi;
  const double denom = a * a - t * t;
  if (std::abs(denom) < 1e-7 * a * a) {
    // Removable singularity at tau = a: L'Hopital on S(t) / (a^2 - t^2).
    const double ds = theta_min * std::cos(theta_min * t) + theta_start * std::cos(theta_start * t);
    return -ds / (4.0 * pi);
  }
  const double s = std::sin(theta_min * t) + std::sin(theta_start * t);
  return s * a * a / (2.0 * pi * t * denom);
}

/// The same kernel by composite Simpson quadrature of the defining integral
/// (at least 1024 panels on the taper).
inline double soft_complement_kernel_quadrature(double theta_start, double theta_min, double tau,
                                                std::size_t panels = 1024) {
  detail::require(panels >= 1024, "soft_complement_kernel_quadrature: need >= 1024 panels");
  if (panels % 2) ++panels;
  const double pi = std::numbers::pi;
  // Flat part [0, theta_min] in closed form.
  const double flat = tau == 0.0 ? theta_min : std::sin(theta_min * tau) / tau;
  const double h = (theta_start - theta_min) / static_cast<double>(panels);
  auto f = [&](double theta) {
    return (1.0 - soft_clip_weight(theta, theta_start, theta_min)) * std::cos(theta * tau);
  };
  double sum = f(theta_min) + f(theta_start);
  for (std::size_t i = 1; i < panels; ++i) sum += f(theta_min + h * static_cast<double>(i)) * (i % 2 ? 4.0 : 2.0);
  return (flat + sum * h / 3.0) / pi;
}

// ---------------------------------------------------------------------------
// Envelope decay
// ---------------------------------------------------------------------------

/// Indices of strict 3-point local maxima of |values| with tau > tau_min.
inline std::vector<std::size_t> envelope_peaks(const CurveSeries& series, double tau_min) {
  std::vector<std::size_t> peaks;
  const auto& v = series.values;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (series.taus[i] <= tau_min) continue;
    const double a = std::abs(v[i]);
    if (a > std::abs(v[i - 1]) && a > std::abs(v[i + 1])) peaks.push_back(i);
  }
  return peaks;
}

/// Three full periods of theta_c, which skips the kernel's main lobe.
inline double default_envelope_tau_min(double theta_c) { return 3.0 * 2.0 * std::numbers::pi / theta_c; }

/// Least-squares slope of log|peak| against log tau over the local maxima of
/// |values| beyond tau_min, negated: p such that the envelope ~ tau^-p.
inline double envelope_decay_exponent(const CurveSeries& series, double tau_min) {
  series.validate();
  const auto peaks = envelope_peaks(series, tau_min);
  if (peaks.size() < 10)
    throw std::invalid_argument("envelope_decay_exponent: need >= 10 local maxima beyond tau_min = " +
                                std::to_string(tau_min) + ", found " + std::to_string(peaks.size()));
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i : peaks) {
    detail::require(series.taus[i] > 0.0, "envelope_decay_exponent: peaks must lie at tau > 0");
    const double x = std::log(series.taus[i]);
    const double y = std::log(std::abs(series.values[i]));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const auto n = static_cast<double>(peaks.size());
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return -slope;
}

}  // namespace cope
