#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "cope/clip_window.hpp"
#include "cope/curve.hpp"
#include "cope/errors.hpp"
#include "cope/freq_table.hpp"
#include "cope/spectral.hpp"

namespace cope {

enum class LeakageMode { hard, soft };

inline const char* to_string(LeakageMode m) { return m == LeakageMode::hard ? "hard" : "soft"; }

inline std::optional<LeakageMode> parse_leakage_mode(std::string_view s) {
  if (s == "hard") return LeakageMode::hard;
  if (s == "soft") return LeakageMode::soft;
  return std::nullopt;
}

/// Error E(tau) introduced by removing the low band of a base signal A(tau).
struct LeakageProfile {
  std::vector<double> taus;
  std::vector<double> base_signal;
  std::vector<double> error;
  LeakageMode mode = LeakageMode::hard;
  double theta_c = 0.0;

  CurveSeries error_series() const { return {taus, error}; }

  /// A + E, the signal after clipping.
  CurveSeries filtered_series() const {
    CurveSeries out{taus, base_signal};
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += error[i];
    return out;
  }
};

namespace detail {

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};
struct FftwPlanDestroy {
  void operator()(fftw_plan p) const noexcept { fftw_destroy_plan(p); }
};
using FftwReal = std::unique_ptr<double[], FftwFree>;
using FftwComplex = std::unique_ptr<fftw_complex[], FftwFree>;
using FftwPlan = std::unique_ptr<std::remove_pointer_t<fftw_plan>, FftwPlanDestroy>;

inline std::size_t next_pow2(std::size_t n) {
  std::size_t m = 1;
  while (m < n) m <<= 1;
  return m;
}

/// y[n] = sum_s x[s] k[n - s] for n in [0, N), where `kernel[l]` holds the
/// even kernel at lag l >= 0. Circular convolution of size >= 2N - 1 has no
/// wrap-around on those outputs.
inline std::vector<double> convolve_even_kernel(const std::vector<double>& x, const std::vector<double>& kernel) {
  const std::size_t n = x.size();
  const std::size_t m = next_pow2(2 * n - 1);
  const std::size_t half = m / 2 + 1;

  FftwReal xr(fftw_alloc_real(m));
  FftwReal kr(fftw_alloc_real(m));
  FftwComplex xf(fftw_alloc_complex(half));
  FftwComplex kf(fftw_alloc_complex(half));
  if (!xr || !kr || !xf || !kf) throw std::bad_alloc();

  std::fill(xr.get(), xr.get() + m, 0.0);
  std::fill(kr.get(), kr.get() + m, 0.0);
  std::copy(x.begin(), x.end(), xr.get());
  for (std::size_t l = 0; l < n; ++l) kr[l] = kernel[l];
  for (std::size_t l = 1; l < n; ++l) kr[m - l] = kernel[l];

  const auto mi = static_cast<int>(m);
  FftwPlan forward(fftw_plan_dft_r2c_1d(mi, xr.get(), xf.get(), FFTW_ESTIMATE));
  FftwPlan inverse(fftw_plan_dft_c2r_1d(mi, xf.get(), xr.get(), FFTW_ESTIMATE));
  fftw_execute(forward.get());
  fftw_execute_dft_r2c(forward.get(), kr.get(), kf.get());
  for (std::size_t i = 0; i < half; ++i) {
    const std::complex<double> a(xf[i][0], xf[i][1]);
    const std::complex<double> b(kf[i][0], kf[i][1]);
    const std::complex<double> c = a * b;
    xf[i][0] = c.real();
    xf[i][1] = c.imag();
  }
  fftw_execute(inverse.get());

  std::vector<double> y(n);
  const double scale = 1.0 / static_cast<double>(m);
  for (std::size_t i = 0; i < n; ++i) y[i] = xr[i] * scale;
  return y;
}

}  // namespace detail

/// Leakage error of clipping the low band of `base_signal`.
///
///   hard: E = -(A * K_hard), K_hard the ideal low-pass on [0, theta_c]
///   soft: E = -(A * K_soft), K_soft the complement of the window's cosine
///         taper (cutoff and floor taken from `window`; theta_c is ignored)
///
/// The convolution is a trapezoid-weighted discrete sum on the uniform grid of
/// `base_signal`, with A taken as zero off the grid. The kernel is zeroed past
/// the last lag where it reaches 1e-6 * theta_c / pi.
///
/// Not thread-safe: FFTW's planner is global.
inline LeakageProfile leakage_error(const CurveSeries& base_signal, double theta_c, LeakageMode mode,
                                    const FreqTable& table, const ClipWindow& window) {
  base_signal.validate();
  const std::size_t n = base_signal.size();
  detail::require(n >= 3, "leakage_error: need at least 3 grid points");
  detail::require(window.size() == table.size(), "leakage_error: window length must be d/2");

  const auto& taus = base_signal.taus;
  const double h = (taus.back() - taus.front()) / static_cast<double>(n - 1);
  for (std::size_t i = 1; i < n; ++i)
    detail::require(std::abs((taus[i] - taus[i - 1]) - h) <= 1e-6 * h, "leakage_error: grid must be uniform");
  detail::require(table.max_theta() * h <= std::numbers::pi / 8.0 * (1.0 + 1e-12),
                  "leakage_error: grid too coarse, need theta_max * h <= pi/8");

  double cutoff = theta_c;
  if (mode == LeakageMode::soft) {
    detail::require(window.mode() == ClipMode::soft && window.onset_index() < window.size() &&
                        window.theta_start() > window.theta_min(),
                    "leakage_error: soft mode needs a soft window with a nondegenerate taper");
    cutoff = window.theta_start();
  }
  detail::require(cutoff > 0.0, "leakage_error: cutoff frequency must be > 0");
  const double span = taus.back() - taus.front();
  detail::require(span >= std::numbers::pi / cutoff,
                  "leakage_error: grid too short for kernel support, span " + std::to_string(span) +
                      " < pi/theta_c = " + std::to_string(std::numbers::pi / cutoff));

  std::vector<double> kernel(n);
  for (std::size_t l = 0; l < n; ++l) {
    const double lag = h * static_cast<double>(l);
    kernel[l] = mode == LeakageMode::hard
                    ? sinc_kernel_at(cutoff, lag)
                    : soft_complement_kernel_at(window.theta_start(), window.theta_min(), lag);
  }
  const double threshold = 1e-6 * cutoff / std::numbers::pi;
  std::size_t last = 0;
  for (std::size_t l = 0; l < n; ++l)
    if (std::abs(kernel[l]) >= threshold) last = l;
  for (std::size_t l = last + 1; l < n; ++l) kernel[l] = 0.0;

  std::vector<double> weighted(base_signal.values);
  for (double& v : weighted) v *= h;
  weighted.front() *= 0.5;
  weighted.back() *= 0.5;

  auto conv = detail::convolve_even_kernel(weighted, kernel);
  for (double& v : conv) v = -v;

  return LeakageProfile{taus, base_signal.values, std::move(conv), mode, cutoff};
}

}  // namespace cope
