#pragma once

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "cope/clip_window.hpp"
#include "cope/experiments.hpp"
#include "cope/freq_table.hpp"
#include "cope/kernel.hpp"
#include "cope/presets.hpp"
#include "cope/report.hpp"
#include "cope/scaling.hpp"
#include "cope/svg_plot.hpp"

namespace cope::cli {

struct RunConfig {
  int d = presets::llama3_head_dim;
  double base = presets::abf_base;
  double pretrain_len = presets::long_context_len;
  // 0 means yarn_factor * pretrain_len.
  double target_len = 0.0;
  std::string scaling = "yarn";
  double yarn_alpha = 1.0;
  double yarn_beta = 32.0;
  std::string scale_table;
  std::string clip = "soft";
  int onset = presets::clip_onset;
  std::string clip_apply = "amplitude";
  std::string clip_order = "clip-then-scale";
  double tau_max = 0.0;
  double tau_step = 0.0;
  std::vector<double> distances;
  double sigma = 1.0;
  double mu = 0.0;
  double sigma_eps = 1.0;
  std::int64_t n_samples = 10000;
  std::int64_t n_trials = 1000;
  int n_distractors = 1;
  unsigned shards = 1;
  std::uint64_t seed = 0;
  double signal_support = 8192.0;
  // The ringing study is set on the pre-rebase table.
  double ringing_base = presets::llama3_base;
  std::string out;
  bool plot = false;
};

namespace detail {

template <typename E, typename Parse>
E parse_enum(const std::string& flag, const std::string& value, Parse parse) {
  const auto v = parse(value);
  if (!v) throw std::invalid_argument(flag + ": unknown value '" + value + "'");
  return *v;
}

inline ScalingPolicy scaling_policy(const RunConfig& c) {
  ScalingPolicy p;
  p.method = parse_enum<ScalingMethod>("--scaling", c.scaling, parse_scaling_method);
  p.pretrain_len = c.pretrain_len;
  p.target_len = c.target_len > 0.0 ? c.target_len : presets::yarn_factor * c.pretrain_len;
  p.yarn_alpha = c.yarn_alpha;
  p.yarn_beta = c.yarn_beta;
  p.table_path = c.scale_table;
  p.validate();
  return p;
}

inline KernelSpec kernel_spec(const RunConfig& c) {
  KernelSpec k;
  k.mode = parse_enum<ClipMode>("--clip", c.clip, parse_clip_mode);
  cope::detail::require(c.onset >= 0, "--onset must be >= 0");
  k.onset_index = static_cast<std::size_t>(c.onset);
  k.application = parse_enum<WindowApplication>("--clip-apply", c.clip_apply, parse_window_application);
  k.order = parse_enum<ClipOrder>("--clip-order", c.clip_order, parse_clip_order);
  k.scaling = scaling_policy(c);
  return k;
}

inline std::vector<double> tau_grid(const RunConfig& c, double default_max, double default_step) {
  const double tmax = c.tau_max > 0.0 ? c.tau_max : default_max;
  const double step = c.tau_step != 0.0 ? c.tau_step : default_step;
  cope::detail::require(step > 0.0, "--tau-step must be > 0");
  cope::detail::require(tmax >= 0.0, "--tau-max must be >= 0");
  return linear_grid(0.0, tmax, step);
}

inline plot::Figure figure_from(const ReportTable& t, const std::string& title, const std::string& x,
                                const std::vector<std::string>& ys, const std::string& y_label) {
  plot::Figure f;
  f.title = title;
  f.x_label = x;
  f.y_label = y_label;
  const auto xs = column_as_doubles(t.column(x));
  for (const auto& y : ys) f.series.push_back({y, xs, column_as_doubles(t.column(y)), false});
  return f;
}

// Every option of the subcommand, given or defaulted, in declaration order.
inline void echo_options(ReportTable& t, const CLI::App& sub) {
  t.set_meta("command", sub.get_name());
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_lnames().empty() ? opt->get_name() : opt->get_lnames().front();
    if (name == "help") continue;
    std::string value;
    if (opt->count() > 0) {
      const auto& res = opt->results();
      for (std::size_t i = 0; i < res.size(); ++i) value += (i ? " " : "") + res[i];
      if (opt->get_type_size() == 0) value = "true";
    } else {
      value = opt->get_type_size() == 0 ? "false" : opt->get_default_str();
    }
    t.set_meta("option." + name, value);
  }
}

}  // namespace detail

/// Parses `args` (without the program name), runs one subcommand and returns
/// the exit status: 0 success, 1 runtime error, 2 usage error.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"Rotary position encoding spectral toolkit", "cope"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from a TOML/INI file");
  app.allow_config_extras(CLI::config_extras_mode::error);

  auto add_table = [&](CLI::App* s) {
    s->add_option("--d", c.d, "Head dimension (even)")->capture_default_str();
    s->add_option("--base", c.base, "Frequency base b")->capture_default_str();
  };
  auto add_scaling = [&](CLI::App* s) {
    s->add_option("--pretrain-len", c.pretrain_len, "Pre-training context length")->capture_default_str();
    s->add_option("--target-len", c.target_len, "Target context length (0: 4x pretrain)")->capture_default_str();
    s->add_option("--scaling", c.scaling, "none|pi|ntk|yarn|table")->capture_default_str();
    s->add_option("--yarn-alpha", c.yarn_alpha)->capture_default_str();
    s->add_option("--yarn-beta", c.yarn_beta)->capture_default_str();
    s->add_option("--scale-table", c.scale_table, "File of d/2 scale factors")->capture_default_str();
  };
  auto add_clip = [&](CLI::App* s, bool with_mode) {
    if (with_mode) s->add_option("--clip", c.clip, "none|hard|soft")->capture_default_str();
    s->add_option("--onset", c.onset, "Clipping onset chunk index")->capture_default_str();
    s->add_option("--clip-apply", c.clip_apply, "amplitude|frequency")->capture_default_str();
    s->add_option("--clip-order", c.clip_order, "clip-then-scale|scale-then-clip")->capture_default_str();
  };
  auto add_taus = [&](CLI::App* s, const char* max_help) {
    s->add_option("--tau-max", c.tau_max, max_help)->capture_default_str();
    s->add_option("--tau-step", c.tau_step, "Distance step (0: subcommand default)")->capture_default_str();
  };
  // --out defaults to <subcommand>.csv.
  auto sub = [&](const char* name, const char* help) {
    CLI::App* s = app.add_subcommand(name, help);
    s->parse_complete_callback([&, name] {
      if (c.out.empty()) c.out = std::string(name) + ".csv";
    });
    return s;
  };

  CLI::App* freqs = sub("freqs", "Frequency table, periods and OOD flags");
  add_table(freqs);
  freqs->add_option("--pretrain-len", c.pretrain_len, "Pre-training context length")->capture_default_str();
  freqs->add_option("--out", c.out, "CSV output path (default freqs.csv)");
  freqs->add_flag("--plot", c.plot, "Also write an SVG next to the CSV");

  CLI::App* critdim = sub("critdim", "Critical dimension");
  add_table(critdim);
  critdim->add_option("--pretrain-len", c.pretrain_len, "Pre-training context length")->capture_default_str();

  CLI::App* scale = sub("scale", "Per-frequency scale factors");
  add_table(scale);
  add_scaling(scale);
  scale->add_option("--out", c.out, "CSV output path (default scale.csv)");
  scale->add_flag("--plot", c.plot, "Also write an SVG next to the CSV");

  CLI::App* decay = sub("decay", "Semantic decay curves for RoPE, hard clipping and CoPE");
  add_table(decay);
  add_scaling(decay);
  add_clip(decay, false);
  add_taus(decay, "Largest distance (0: 262144)");
  decay->add_option("--out", c.out, "CSV output path (default decay.csv)");
  decay->add_flag("--plot", c.plot, "Also write an SVG next to the CSV");

  CLI::App* gap = sub("gap", "Monte Carlo semantic gap against the analytic value");
  add_table(gap);
  add_scaling(gap);
  add_clip(gap, true);
  add_taus(gap, "Largest distance (0: 65536)");
  gap->add_option("--sigma", c.sigma)->capture_default_str();
  gap->add_option("--mu", c.mu)->capture_default_str();
  gap->add_option("--sigma-eps", c.sigma_eps)->capture_default_str();
  gap->add_option("--n-samples", c.n_samples)->capture_default_str();
  gap->add_option("--shards", c.shards)->capture_default_str();
  gap->add_option("--seed", c.seed)->capture_default_str();
  gap->add_option("--out", c.out, "CSV output path (default gap.csv)");
  gap->add_flag("--plot", c.plot, "Also write an SVG next to the CSV");

  CLI::App* ringing = sub("ringing", "Leakage error of hard and soft clipping");
  ringing->add_option("--d", c.d, "Head dimension (even)")->capture_default_str();
  ringing->add_option("--base", c.ringing_base, "Frequency base b")->capture_default_str();
  ringing->add_option("--onset", c.onset, "Clipping onset chunk index")->capture_default_str();
  add_taus(ringing, "Grid half-width (0: 600000)");
  ringing->add_option("--signal-support", c.signal_support, "Extent of the synthetic signal")->capture_default_str();
  ringing->add_option("--out", c.out, "CSV output path (default ringing.csv)");
  ringing->add_flag("--plot", c.plot, "Also write an SVG next to the CSV");

  CLI::App* retrieval = sub("retrieval", "Similar-key retrieval accuracy across distances");
  add_table(retrieval);
  add_scaling(retrieval);
  add_clip(retrieval, true);
  retrieval->add_option("--distances", c.distances, "Distances (default 8k..256k)");
  retrieval->add_option("--sigma", c.sigma)->capture_default_str();
  retrieval->add_option("--mu", c.mu)->capture_default_str();
  retrieval->add_option("--sigma-eps", c.sigma_eps)->capture_default_str();
  retrieval->add_option("--n-trials", c.n_trials)->capture_default_str();
  retrieval->add_option("--n-distractors", c.n_distractors)->capture_default_str();
  retrieval->add_option("--seed", c.seed)->capture_default_str();
  retrieval->add_option("--out", c.out, "CSV output path (default retrieval.csv)");
  retrieval->add_flag("--plot", c.plot, "Also write an SVG next to the CSV");

  CLI::App* spectrum = sub("spectrum", "RoPE, hard clipping and CoPE weight profiles");
  add_table(spectrum);
  spectrum->add_option("--onset", c.onset, "Clipping onset chunk index")->capture_default_str();
  spectrum->add_option("--out", c.out, "CSV output path (default spectrum.csv)");
  spectrum->add_flag("--plot", c.plot, "Also write an SVG next to the CSV");

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return 2;
  }

  CLI::App* chosen = app.get_subcommands().front();
  const std::string cmd = chosen->get_name();
  try {
    ReportTable table;
    std::optional<plot::Figure> fig;
    std::string summary;

    if (cmd == "critdim") {
      out << critical_dimension(c.pretrain_len, c.d, c.base) << "\n";
      return 0;
    }
    const FreqTable base_table = build_freq_table(c.d, c.base);

    if (cmd == "freqs") {
      table = period_report(base_table, c.pretrain_len);
      summary = "d_ct=" + *table.meta("d_ct") + " ood_chunks=" + *table.meta("ood_chunks");
      if (c.plot) {
        fig = detail::figure_from(table, "Periods by chunk", "chunk_index", {"period"}, "period");
        fig->log_y = true;
        fig->h_line = c.pretrain_len;
        const auto flags = column_as_doubles(table.column("ood_flag"));
        const auto first = std::find(flags.begin(), flags.end(), 1.0);
        if (first != flags.end())
          fig->shade_x = {static_cast<double>(first - flags.begin()) - 0.5, static_cast<double>(flags.size()) - 0.5};
      }
    } else if (cmd == "scale") {
      table = scale_report(base_table, detail::scaling_policy(c));
      const auto s = column_as_doubles(table.column("scale_factor"));
      summary = "scale_factor range [" + format_double(*std::min_element(s.begin(), s.end())) + ", " +
                format_double(*std::max_element(s.begin(), s.end())) + "]";
      if (c.plot) {
        fig = detail::figure_from(table, "Frequencies before and after scaling", "chunk_index",
                                  {"theta", "theta_scaled"}, "theta");
        fig->log_y = true;
      }
    } else if (cmd == "decay") {
      const auto taus = detail::tau_grid(c, presets::study_lengths.back(), 64.0);
      table = decay_report(base_table, detail::kernel_spec(c), taus);
      auto min_of = [&](const char* col) {
        const auto v = column_as_doubles(table.column(col));
        return format_double(*std::min_element(v.begin(), v.end()));
      };
      summary = "min normalized: rope=" + min_of("rope_normalized") + " hardclip=" + min_of("hardclip_normalized") +
                " cope=" + min_of("cope_normalized");
      if (c.plot)
        fig = detail::figure_from(table, "Semantic decay", "tau",
                                  {"rope_normalized", "hardclip_normalized", "cope_normalized"}, "normalized sum");
    } else if (cmd == "gap") {
      const auto taus = detail::tau_grid(c, 65536.0, 4096.0);
      const Kernel kernel = make_kernel(base_table, detail::kernel_spec(c));
      GapStudyConfig g{c.sigma, c.mu, c.sigma_eps, c.n_samples, c.seed, c.shards};
      table = gap_report(kernel, taus, g);
      const auto z = column_as_doubles(table.column("z_score"));
      double zmax = 0.0;
      for (double v : z) zmax = std::max(zmax, std::abs(v));
      summary = "max |z| = " + format_double(zmax);
      cope::detail::echo_kernel(table, detail::kernel_spec(c));
      if (c.plot) {
        fig = detail::figure_from(table, "Semantic gap", "tau", {"analytic"}, "gap");
        fig->series.push_back({"mc_mean", column_as_doubles(table.column("tau")),
                               column_as_doubles(table.column("mc_mean")), true});
      }
    } else if (cmd == "ringing") {
      cope::detail::require(c.onset >= 0, "--onset must be >= 0");
      RingingConfig rc;
      rc.onset_index = static_cast<std::size_t>(c.onset);
      rc.signal_support = c.signal_support;
      rc.tau_max = c.tau_max > 0.0 ? c.tau_max : 600000.0;
      const auto r = ringing_study(build_freq_table(c.d, c.ringing_base), rc);
      table = ringing_report(r, c.tau_step != 0.0 ? c.tau_step : 16.0);
      summary = "envelope exponent: hard=" + format_double(r.hard_exponent) +
                " soft=" + format_double(r.soft_exponent);
      if (c.plot)
        fig = detail::figure_from(table, "Leakage error", "tau", {"error_hard", "error_soft"}, "E(tau)");
    } else if (cmd == "retrieval") {
      RetrievalConfig rc;
      rc.d = c.d;
      rc.base = c.base;
      rc.kernel = detail::kernel_spec(c);
      rc.distances = c.distances.empty()
                         ? std::vector<double>(presets::study_lengths.begin(), presets::study_lengths.end())
                         : c.distances;
      rc.n_trials = c.n_trials;
      rc.n_distractors = c.n_distractors;
      rc.sigma = c.sigma;
      rc.sigma_eps = c.sigma_eps;
      rc.mu = c.mu;
      rc.seed = c.seed;
      table = retrieval_sim(rc);
      const auto acc = column_as_doubles(table.column("accuracy"));
      summary = "accuracy " + format_double(acc.front()) + " at distance " + format_double(rc.distances.front()) +
                ", " + format_double(acc.back()) + " at " + format_double(rc.distances.back());
      if (c.plot) {
        fig = detail::figure_from(table, "Similar-key retrieval", "distance", {"accuracy"}, "accuracy");
        fig->series.front().markers = true;
      }
    } else if (cmd == "spectrum") {
      cope::detail::require(c.onset >= 0, "--onset must be >= 0");
      const auto onset = static_cast<std::size_t>(c.onset);
      const std::vector<ClipWindow> windows = {clip_window(base_table, ClipMode::none, onset),
                                               clip_window(base_table, ClipMode::hard, onset),
                                               clip_window(base_table, ClipMode::soft, onset)};
      table = spectrum_report(base_table, windows);
      summary = "windows: " + windows[0].label() + ", " + windows[1].label() + ", " + windows[2].label();
      if (c.plot) {
        std::vector<std::string> ys;
        for (const auto& w : windows) ys.push_back(w.label());
        fig = detail::figure_from(table, "Spectral weights", "chunk_index", ys, "weight");
      }
    }

    detail::echo_options(table, *chosen);
    const std::filesystem::path csv_path = c.out;
    emit_csv(table, csv_path);
    out << cmd << ": wrote " << table.rows() << " rows to " << csv_path.string();
    if (fig) {
      std::filesystem::path svg_path = csv_path;
      svg_path.replace_extension(".svg");
      plot::write_svg(*fig, svg_path);
      out << " and " << svg_path.string();
    }
    out << "; " << summary << "\n";
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  return run(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

}  // namespace cope::cli
