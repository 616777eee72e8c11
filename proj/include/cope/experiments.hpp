#pragma once

#include <cmath>
#include <cstdint>
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
#include "cope/kernel.hpp"
#include "cope/leakage.hpp"
#include "cope/report.hpp"
#include "cope/rotary.hpp"
#include "cope/scaling.hpp"
#include "cope/spectral.hpp"

namespace cope {

namespace detail {

inline std::string fmt(double v) { return format_double(v); }

inline void echo_kernel(ReportTable& t, const KernelSpec& k) {
  t.set_meta("clip_mode", to_string(k.mode));
  t.set_meta("clip_onset", std::to_string(k.onset_index));
  t.set_meta("clip_apply", to_string(k.application));
  t.set_meta("clip_order", to_string(k.order));
  t.set_meta("scaling", to_string(k.scaling.method));
  t.set_meta("pretrain_len", fmt(k.scaling.pretrain_len));
  t.set_meta("target_len", fmt(k.scaling.target_len));
  if (k.scaling.method == ScalingMethod::yarn) {
    t.set_meta("yarn_alpha", fmt(k.scaling.yarn_alpha));
    t.set_meta("yarn_beta", fmt(k.scaling.yarn_beta));
  }
  if (k.scaling.method == ScalingMethod::table) t.set_meta("scale_table", k.scaling.table_path.string());
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Frequency reports
// ---------------------------------------------------------------------------

/// Per-chunk theta, period and whether the period exceeds `pretrain_len`.
inline ReportTable period_report(const FreqTable& table, double pretrain_len) {
  const auto T = periods(table);
  std::vector<std::int64_t> idx(table.size());
  std::vector<double> thetas(table.thetas().begin(), table.thetas().end());
  std::vector<bool> ood(table.size());
  std::int64_t ood_count = 0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    idx[i] = static_cast<std::int64_t>(i);
    ood[i] = T[i] > pretrain_len;
    ood_count += ood[i] ? 1 : 0;
  }
  ReportTable out;
  out.add_column("chunk_index", idx).add_column("theta", thetas).add_column("period", T).add_column("ood_flag", ood);
  out.set_meta("d", std::to_string(table.dim()));
  out.set_meta("base", detail::fmt(table.base()));
  out.set_meta("table_origin", to_string(table.origin()));
  out.set_meta("pretrain_len", detail::fmt(pretrain_len));
  out.set_meta("d_ct", std::to_string(critical_dimension(pretrain_len, table.dim(), table.base())));
  out.set_meta("ood_chunks", std::to_string(ood_count));
  return out;
}

/// theta and one weight column per window (named by ClipWindow::label()).
inline ReportTable spectrum_report(const FreqTable& table, std::span<const ClipWindow> windows) {
  std::vector<std::int64_t> idx(table.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<std::int64_t>(i);
  ReportTable out;
  out.add_column("chunk_index", idx);
  out.add_column("theta", std::vector<double>(table.thetas().begin(), table.thetas().end()));
  for (const auto& w : windows) {
    detail::require(w.size() == table.size(), "spectrum_report: window '" + w.label() + "' does not match table");
    out.add_column(w.label(), std::vector<double>(w.weights().begin(), w.weights().end()));
  }
  out.validate();
  out.set_meta("d", std::to_string(table.dim()));
  out.set_meta("base", detail::fmt(table.base()));
  return out;
}

/// Scale factors and the rescaled table for `policy`.
inline ReportTable scale_report(const FreqTable& table, const ScalingPolicy& policy) {
  const auto s = scaling_factors(policy, table);
  const FreqTable scaled = scale_table(table, std::span<const double>(s));
  std::vector<std::int64_t> idx(table.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<std::int64_t>(i);
  ReportTable out;
  out.add_column("chunk_index", idx)
      .add_column("theta", std::vector<double>(table.thetas().begin(), table.thetas().end()))
      .add_column("scale_factor", s)
      .add_column("theta_scaled", std::vector<double>(scaled.thetas().begin(), scaled.thetas().end()))
      .add_column("period", periods(table))
      .add_column("period_scaled", periods(scaled));
  out.set_meta("d", std::to_string(table.dim()));
  out.set_meta("base", detail::fmt(table.base()));
  KernelSpec echo;
  echo.scaling = policy;
  detail::echo_kernel(out, echo);
  return out;
}

// ---------------------------------------------------------------------------
// Semantic decay curves
// ---------------------------------------------------------------------------

/// Decay curve of one method, raw and divided by its value at tau = 0.
struct DecayVariant {
  std::string name;
  CurveSeries raw;
  std::vector<double> normalized;
};

inline DecayVariant decay_variant(std::string name, const FreqTable& table, const KernelSpec& spec,
                                  std::span<const double> taus) {
  const Kernel k = make_kernel(table, spec);
  DecayVariant v{std::move(name), decay_curve(k.table, k.window, taus), {}};
  const double norm = k.window.total_weight();
  v.normalized.reserve(v.raw.size());
  for (double x : v.raw.values) v.normalized.push_back(norm > 0.0 ? x / norm : 0.0);
  return v;
}

/// RoPE, hard clipping and CoPE decay curves on one grid. `spec` supplies
/// onset, application, scaling and order; its mode is overridden per column.
inline ReportTable decay_report(const FreqTable& table, KernelSpec spec, std::span<const double> taus) {
  ReportTable out;
  out.add_column("tau", std::vector<double>(taus.begin(), taus.end()));
  const std::pair<const char*, ClipMode> methods[] = {
      {"rope", ClipMode::none}, {"hardclip", ClipMode::hard}, {"cope", ClipMode::soft}};
  for (const auto& [name, mode] : methods) {
    spec.mode = mode;
    auto v = decay_variant(name, table, spec, taus);
    out.add_column(v.name, v.raw.values);
    out.add_column(v.name + "_normalized", v.normalized);
  }
  out.set_meta("d", std::to_string(table.dim()));
  out.set_meta("base", detail::fmt(table.base()));
  detail::echo_kernel(out, spec);
  out.set_meta("clip_mode", "none,hard,soft");
  return out;
}

// ---------------------------------------------------------------------------
// Semantic gap
// ---------------------------------------------------------------------------

struct GapStudyConfig {
  double sigma = 1.0;
  double mu = 0.0;
  double sigma_eps = 1.0;
  std::int64_t n_samples = 10000;
  std::uint64_t seed = 0;
  unsigned shards = 1;
};

/// Monte Carlo gap against the analytic curve at each tau. Distance index i
/// uses seed + i so the points are independent.
inline ReportTable gap_report(const Kernel& kernel, std::span<const double> taus, const GapStudyConfig& cfg) {
  std::vector<double> tau_col, analytic, mean, se, z;
  std::vector<std::int64_t> n;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const double t = taus[i];
    detail::require(t >= 0.0 && t == std::floor(t), "gap_report: distances must be nonnegative integers");
    const auto est = semantic_gap_montecarlo(cfg.sigma, cfg.mu, cfg.sigma_eps, kernel.table, kernel.window,
                                             static_cast<std::int64_t>(t), cfg.n_samples, cfg.seed + i, cfg.shards);
    tau_col.push_back(t);
    analytic.push_back(est.analytic);
    mean.push_back(est.mean);
    se.push_back(est.std_error);
    z.push_back((est.mean - est.analytic) / est.std_error);
    n.push_back(est.n_samples);
  }
  ReportTable out;
  out.add_column("tau", tau_col)
      .add_column("analytic", analytic)
      .add_column("mc_mean", mean)
      .add_column("mc_std_error", se)
      .add_column("z_score", z)
      .add_column("n_samples", n);
  out.set_meta("distribution", "gaussian");
  out.set_meta("sigma", detail::fmt(cfg.sigma));
  out.set_meta("mu", detail::fmt(cfg.mu));
  out.set_meta("sigma_eps", detail::fmt(cfg.sigma_eps));
  out.set_meta("seed", std::to_string(cfg.seed));
  out.set_meta("shards", std::to_string(cfg.shards));
  return out;
}

// ---------------------------------------------------------------------------
// Similar-key retrieval
// ---------------------------------------------------------------------------

struct RetrievalConfig {
  int d = 128;
  double base = 500000.0;
  KernelSpec kernel{};
  std::vector<double> distances;
  std::int64_t n_trials = 1000;
  int n_distractors = 1;
  double sigma = 1.0;
  double sigma_eps = 1.0;
  double mu = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    detail::require(d >= 2 && d % 2 == 0, "RetrievalConfig: d must be an even integer >= 2");
    detail::require(base > 1.0, "RetrievalConfig: base must be > 1");
    detail::require(n_trials >= 1, "RetrievalConfig: n_trials must be >= 1");
    detail::require(n_distractors >= 1, "RetrievalConfig: n_distractors must be >= 1");
    detail::require(sigma > 0.0, "RetrievalConfig: sigma must be > 0");
    detail::require(sigma_eps >= 0.0, "RetrievalConfig: sigma_eps must be >= 0");
    detail::require(!distances.empty(), "RetrievalConfig: distances must not be empty");
    detail::require(CurveSeries::strictly_increasing(distances), "RetrievalConfig: distances must be strictly increasing");
    for (double t : distances) detail::require(t >= 0.0, "RetrievalConfig: distances must be >= 0");
  }
};

/// Fraction of trials in which the similar key k' = q + eps outscores
/// n_distractors random keys, all placed at the same distance from q.
///
/// Trial t draws from substream t of the seed at every distance, so distances
/// (and configs sharing a seed) are compared on common random numbers. Ties
/// for the maximum are broken uniformly at random from the same substream.
inline ReportTable retrieval_sim(const RetrievalConfig& cfg) {
  cfg.validate();
  const Kernel kernel = make_kernel(build_freq_table(cfg.d, cfg.base), cfg.kernel);
  const auto d = static_cast<std::size_t>(cfg.d);
  const auto nd = static_cast<std::size_t>(cfg.n_distractors);

  std::vector<double> accuracy;
  std::vector<std::int64_t> trials;
  std::vector<double> q(d), similar(d), keys(nd * d), scores(nd);
  for (double tau : cfg.distances) {
    const RelativeScorer score(kernel.table, kernel.window, tau);
    std::int64_t hits = 0;
    for (std::int64_t t = 0; t < cfg.n_trials; ++t) {
      auto rng = detail::substream(cfg.seed, static_cast<std::uint64_t>(t), 0x7e7a);
      boost::random::normal_distribution<double> normal(0.0, 1.0);
      for (auto& x : q) x = cfg.mu + cfg.sigma * normal(rng);
      for (std::size_t i = 0; i < d; ++i) similar[i] = q[i] + cfg.sigma_eps * normal(rng);
      for (auto& x : keys) x = cfg.mu + cfg.sigma * normal(rng);

      const double target = score(q, similar);
      std::size_t ties = 1;
      bool beaten = false;
      for (std::size_t k = 0; k < nd && !beaten; ++k) {
        const double s = score(q, std::span<const double>(keys).subspan(k * d, d));
        if (s > target)
          beaten = true;
        else if (s == target)
          ++ties;
      }
      if (beaten) continue;
      if (ties == 1 || std::uniform_int_distribution<std::size_t>(0, ties - 1)(rng) == 0) ++hits;
    }
    accuracy.push_back(static_cast<double>(hits) / static_cast<double>(cfg.n_trials));
    trials.push_back(cfg.n_trials);
  }

  ReportTable out;
  out.add_column("distance", cfg.distances).add_column("accuracy", accuracy).add_column("n_trials", trials);
  out.set_meta("d", std::to_string(cfg.d));
  out.set_meta("base", detail::fmt(cfg.base));
  detail::echo_kernel(out, cfg.kernel);
  out.set_meta("n_distractors", std::to_string(cfg.n_distractors));
  out.set_meta("sigma", detail::fmt(cfg.sigma));
  out.set_meta("sigma_eps", detail::fmt(cfg.sigma_eps));
  out.set_meta("mu", detail::fmt(cfg.mu));
  out.set_meta("seed", std::to_string(cfg.seed));
  out.set_meta("distribution", "gaussian");
  return out;
}

// ---------------------------------------------------------------------------
// Ringing from hard clipping
// ---------------------------------------------------------------------------

/// sum_j cos(theta_j tau) for |tau| <= support, zero outside.
inline CurveSeries unit_spectrum_signal(const FreqTable& table, std::span<const double> taus, double support) {
  CurveSeries out;
  out.taus.assign(taus.begin(), taus.end());
  out.values.assign(taus.size(), 0.0);
  for (std::size_t t = 0; t < taus.size(); ++t) {
    if (std::abs(taus[t]) > support) continue;
    double s = 0.0;
    for (double th : table.thetas()) s += std::cos(th * taus[t]);
    out.values[t] = s;
  }
  return out;
}

struct RingingConfig {
  std::size_t onset_index = 44;
  // Extent of the synthetic attention signal.
  double signal_support = 8192.0;
  // Half-width of the symmetric analysis grid.
  double tau_max = 600000.0;
};

struct RingingResult {
  LeakageProfile hard;
  LeakageProfile soft;
  double tau_min = 0.0;
  double hard_exponent = 0.0;
  double soft_exponent = 0.0;
  std::size_t hard_peaks = 0;
  std::size_t soft_peaks = 0;
};

/// Hard and soft clipping of a unit-amplitude signal at the onset frequency,
/// on a symmetric grid with theta_max * h = pi/8, plus fitted envelope
/// exponents of both errors.
inline RingingResult ringing_study(const FreqTable& table, const RingingConfig& cfg) {
  detail::require(cfg.onset_index < table.size(), "ringing_study: onset must be below d/2");
  detail::require(cfg.signal_support > 0.0 && cfg.tau_max > cfg.signal_support,
                  "ringing_study: need 0 < signal_support < tau_max");
  const ClipWindow soft = clip_window(table, ClipMode::soft, cfg.onset_index);
  const double theta_c = soft.theta_start();
  const double h = std::numbers::pi / (8.0 * table.max_theta());
  const auto half = static_cast<std::int64_t>(std::floor(cfg.tau_max / h));
  std::vector<double> taus(static_cast<std::size_t>(2 * half + 1));
  for (std::int64_t i = -half; i <= half; ++i) taus[static_cast<std::size_t>(i + half)] = h * static_cast<double>(i);

  const CurveSeries signal = unit_spectrum_signal(table, taus, cfg.signal_support);
  RingingResult r;
  r.hard = leakage_error(signal, theta_c, LeakageMode::hard, table, soft);
  r.soft = leakage_error(signal, theta_c, LeakageMode::soft, table, soft);
  r.tau_min = std::max(default_envelope_tau_min(theta_c), cfg.signal_support);
  const CurveSeries hard_err = r.hard.error_series();
  const CurveSeries soft_err = r.soft.error_series();
  r.hard_peaks = envelope_peaks(hard_err, r.tau_min).size();
  r.soft_peaks = envelope_peaks(soft_err, r.tau_min).size();
  r.hard_exponent = envelope_decay_exponent(hard_err, r.tau_min);
  r.soft_exponent = envelope_decay_exponent(soft_err, r.tau_min);
  return r;
}

/// tau >= 0 half of a ringing study, thinned to about one row per `tau_step`.
inline ReportTable ringing_report(const RingingResult& r, double tau_step) {
  const auto& taus = r.hard.taus;
  const double h = taus[1] - taus[0];
  const auto stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(tau_step / h)));
  const std::size_t zero = taus.size() / 2;
  std::vector<double> tau, base, eh, fh, es, fs;
  for (std::size_t i = zero; i < taus.size(); i += stride) {
    tau.push_back(taus[i]);
    base.push_back(r.hard.base_signal[i]);
    eh.push_back(r.hard.error[i]);
    fh.push_back(r.hard.base_signal[i] + r.hard.error[i]);
    es.push_back(r.soft.error[i]);
    fs.push_back(r.soft.base_signal[i] + r.soft.error[i]);
  }
  ReportTable out;
  out.add_column("tau", tau)
      .add_column("base", base)
      .add_column("error_hard", eh)
      .add_column("filtered_hard", fh)
      .add_column("error_soft", es)
      .add_column("filtered_soft", fs);
  out.set_meta("theta_c", detail::fmt(r.hard.theta_c));
  out.set_meta("grid_step", detail::fmt(h));
  out.set_meta("fit_tau_min", detail::fmt(r.tau_min));
  out.set_meta("hard_exponent", detail::fmt(r.hard_exponent));
  out.set_meta("soft_exponent", detail::fmt(r.soft_exponent));
  out.set_meta("hard_peaks", std::to_string(r.hard_peaks));
  out.set_meta("soft_peaks", std::to_string(r.soft_peaks));
  return out;
}

}  // namespace cope
