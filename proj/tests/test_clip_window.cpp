#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "cope/clip_window.hpp"
#include "cope/freq_table.hpp"

using namespace cope;
using Catch::Matchers::WithinAbs;

TEST_CASE("soft weight endpoints and midpoint", "[clip_window]") {
  for (double ts : {1.0, 0.3, 1e-3})
    for (double tm : {0.0, 1e-6, 1e-4}) {
      CHECK_THAT(soft_clip_weight(ts, ts, tm), WithinAbs(1.0, 1e-12));
      CHECK_THAT(soft_clip_weight(tm, ts, tm), WithinAbs(0.0, 1e-12));
      CHECK_THAT(soft_clip_weight(0.5 * (ts + tm), ts, tm), WithinAbs(0.5, 1e-12));
      CHECK(soft_clip_weight(2 * ts, ts, tm) == 1.0);
    }
  CHECK(soft_clip_weight(0.5e-6, 1.0, 1e-6) == 0.0);
}

TEST_CASE("soft weight follows the cosine taper", "[clip_window]") {
  const double ts = 0.2, tm = 0.01;
  for (int i = 0; i <= 100; ++i) {
    const double theta = tm + (ts - tm) * i / 100.0;
    const double expected = 0.5 * (1.0 - std::cos(std::numbers::pi * i / 100.0));
    CHECK_THAT(soft_clip_weight(theta, ts, tm), WithinAbs(expected, 1e-12));
  }
}

TEST_CASE("onset d/2 passes every frequency", "[clip_window]") {
  const auto t = build_freq_table(16, 1e4);
  for (auto mode : {ClipMode::none, ClipMode::hard, ClipMode::soft}) {
    const auto w = clip_window(t, mode, t.size());
    for (double x : w.weights()) CHECK(x == 1.0);
    CHECK(std::isinf(w.theta_start()));
  }
}

TEST_CASE("hard window is a step at the onset", "[clip_window]") {
  const auto t = build_freq_table(128, 500000);
  const auto w = clip_window(t, ClipMode::hard, 44);
  for (std::size_t j = 0; j < 64; ++j) CHECK(w[j] == (j < 44 ? 1.0 : 0.0));
  CHECK(w.label() == "hard_44");
  CHECK(w.total_weight() == 44.0);
}

TEST_CASE("Llama-3 soft window at onset 44", "[clip_window]") {
  const auto t = build_freq_table(128, 500000);
  const auto w = clip_window(t, ClipMode::soft, 44);
  CHECK(w.theta_start() == t[44]);
  CHECK(w.theta_min() == t[63]);
  for (std::size_t j = 0; j <= 44; ++j) CHECK(w[j] == 1.0);
  for (std::size_t j = 45; j < 64; ++j) {
    CHECK(w[j] < w[j - 1]);
    CHECK(w[j] >= 0.0);
  }
  CHECK(w[63] == 0.0);
  CHECK(w.label() == "soft_44");
}

TEST_CASE("none mode is all ones at any onset", "[clip_window]") {
  const auto t = build_freq_table(32, 1e4);
  const auto w = clip_window(t, ClipMode::none, 3);
  for (double x : w.weights()) CHECK(x == 1.0);
  CHECK(w.label() == "rope");
}

TEST_CASE("windows are monotone and bounded", "[clip_window][property]") {
  for (int d : {4, 8, 64, 128, 256})
    for (std::size_t onset = 0; onset <= static_cast<std::size_t>(d / 2); ++onset)
      for (auto mode : {ClipMode::hard, ClipMode::soft}) {
        const auto w = clip_window(build_freq_table(d, 5e5), mode, onset);
        REQUIRE(w.size() == static_cast<std::size_t>(d / 2));
        for (std::size_t j = 0; j < w.size(); ++j) {
          CHECK(w[j] >= 0.0);
          CHECK(w[j] <= 1.0);
          if (j > 0) CHECK(w[j] <= w[j - 1]);
        }
      }
}

TEST_CASE("invalid onset and unordered tables are rejected", "[clip_window]") {
  const auto t = build_freq_table(8, 1e4);
  CHECK_THROWS_AS(clip_window(t, ClipMode::soft, 5), std::invalid_argument);
  const FreqTable unordered(8, 1e4, {1.0, 0.1, 0.2, 0.01}, TableOrigin::scaled);
  CHECK_THROWS_AS(clip_window(unordered, ClipMode::hard, 2), std::invalid_argument);
  CHECK_THROWS_AS(ClipWindow(ClipMode::hard, 0, 1.0, 0.0, {1.5}), std::invalid_argument);
}

TEST_CASE("applying a window to frequencies scales each theta", "[clip_window]") {
  const auto t = build_freq_table(16, 1e4);
  const auto w = clip_window(t, ClipMode::soft, 3);
  const auto c = apply_to_frequencies(t, w);
  CHECK(c.origin() == TableOrigin::clipped);
  for (std::size_t j = 0; j < t.size(); ++j) CHECK(c[j] == w[j] * t[j]);
  CHECK(c[t.size() - 1] == 0.0);
}

TEST_CASE("mode names round-trip", "[clip_window]") {
  for (auto m : {ClipMode::none, ClipMode::hard, ClipMode::soft}) CHECK(parse_clip_mode(to_string(m)) == m);
  CHECK_FALSE(parse_clip_mode("cope").has_value());
}
