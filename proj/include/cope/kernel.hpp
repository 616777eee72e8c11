#pragma once

#include <optional>
#include <string_view>

#include "cope/clip_window.hpp"
#include "cope/freq_table.hpp"
#include "cope/scaling.hpp"

namespace cope {

/// How a clip window enters the score.
///   amplitude: w_j multiplies chunk j's rotated dot product (spectral filter)
///   frequency: theta_j is replaced by w_j * theta_j (drop-in initialization)
enum class WindowApplication { amplitude, frequency };

/// Whether the window is built on the table before or after test-time scaling.
enum class ClipOrder { clip_then_scale, scale_then_clip };

inline const char* to_string(WindowApplication a) {
  return a == WindowApplication::amplitude ? "amplitude" : "frequency";
}

inline const char* to_string(ClipOrder o) {
  return o == ClipOrder::clip_then_scale ? "clip-then-scale" : "scale-then-clip";
}

inline std::optional<WindowApplication> parse_window_application(std::string_view s) {
  if (s == "amplitude") return WindowApplication::amplitude;
  if (s == "frequency") return WindowApplication::frequency;
  return std::nullopt;
}

inline std::optional<ClipOrder> parse_clip_order(std::string_view s) {
  if (s == "clip-then-scale") return ClipOrder::clip_then_scale;
  if (s == "scale-then-clip") return ClipOrder::scale_then_clip;
  return std::nullopt;
}

struct KernelSpec {
  ClipMode mode = ClipMode::none;
  std::size_t onset_index = 0;
  WindowApplication application = WindowApplication::amplitude;
  ScalingPolicy scaling{};
  ClipOrder order = ClipOrder::clip_then_scale;
};

/// The (table, window) pair actually used for scoring.
struct Kernel {
  FreqTable table;
  ClipWindow window;
};

inline Kernel make_kernel(const FreqTable& table, const KernelSpec& spec) {
  const bool clip_first = spec.order == ClipOrder::clip_then_scale;
  std::optional<ClipWindow> window;
  if (clip_first) window = clip_window(table, spec.mode, spec.onset_index);
  FreqTable scaled = scale_table(table, spec.scaling);
  if (!clip_first) window = clip_window(scaled, spec.mode, spec.onset_index);

  if (spec.application == WindowApplication::amplitude) return {std::move(scaled), std::move(*window)};
  return {apply_to_frequencies(scaled, *window), ClipWindow::all_pass(table.size())};
}

}  // namespace cope
