#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "cope/freq_table.hpp"

using namespace cope;
using Catch::Matchers::WithinRel;

namespace {

// 2 * (number of chunks whose period fits in the window), clamped to d.
int critical_dimension_by_scan(double L, int d, double base) {
  int fits = 0;
  for (double T : periods(build_freq_table(d, base)))
    if (T <= L) ++fits;
  return std::min(2 * fits, d);
}

}  // namespace

TEST_CASE("small table has the expected frequencies", "[freq_table]") {
  const auto t = build_freq_table(4, 10000.0);
  REQUIRE(t.size() == 2);
  CHECK(t[0] == 1.0);
  CHECK_THAT(t[1], WithinRel(0.01, 1e-15));
  CHECK(t.is_generated());
  CHECK(t.dim() == 4);
}

TEST_CASE("generated tables start at 1 and decrease with increasing periods", "[freq_table]") {
  for (int d : {2, 8, 64, 128, 256})
    for (double base : {10.0, 1e4, 5e5, 1e7}) {
      const auto t = build_freq_table(d, base);
      CHECK(t[0] == 1.0);
      CHECK(t.strictly_decreasing());
      const auto T = periods(t);
      for (std::size_t i = 1; i < T.size(); ++i) CHECK(T[i] > T[i - 1]);
      CHECK_THAT(T[0], WithinRel(2 * std::numbers::pi, 1e-15));
    }
}

TEST_CASE("invalid table parameters are rejected", "[freq_table]") {
  CHECK_THROWS_AS(build_freq_table(3, 1e4), std::invalid_argument);
  CHECK_THROWS_AS(build_freq_table(0, 1e4), std::invalid_argument);
  CHECK_THROWS_AS(build_freq_table(8, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(FreqTable(4, 1e4, {1.0}, TableOrigin::generated), std::invalid_argument);
  CHECK_THROWS_AS(FreqTable(4, 1e4, {1.0, 0.0}, TableOrigin::scaled), std::invalid_argument);
  CHECK_THROWS_AS(FreqTable(4, 1e4, {1.0, NAN}, TableOrigin::clipped), std::invalid_argument);
  CHECK_NOTHROW(FreqTable(4, 1e4, {1.0, 0.0}, TableOrigin::clipped));
}

TEST_CASE("periods need positive frequencies", "[freq_table]") {
  const FreqTable clipped(4, 1e4, {1.0, 0.0}, TableOrigin::clipped);
  CHECK_THROWS_AS(periods(clipped), std::invalid_argument);
}

TEST_CASE("critical dimension of the Llama-3 configuration", "[freq_table]") {
  CHECK(critical_dimension(8192, 128, 500000) == 70);
  CHECK(critical_dimension_by_scan(8192, 128, 500000) == 70);
  int ood = 0;
  for (double T : periods(build_freq_table(128, 500000))) ood += T > 8192 ? 1 : 0;
  CHECK(ood == 29);
}

TEST_CASE("critical dimension is clamped", "[freq_table]") {
  CHECK(critical_dimension(1.0, 128, 500000) == 0);
  CHECK(critical_dimension(1e30, 128, 10.0) == 128);
}

TEST_CASE("critical dimension agrees with a period scan", "[freq_table][property]") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> half(1, 128);
  std::uniform_real_distribution<double> log_base(1.0, 8.0);
  std::uniform_real_distribution<double> log_len(0.0, 7.0);
  for (int i = 0; i < 2000; ++i) {
    const int d = 2 * half(rng);
    const double base = std::pow(10.0, log_base(rng));
    const double L = std::pow(10.0, log_len(rng));
    INFO("d=" << d << " base=" << base << " L=" << L);
    CHECK(critical_dimension(L, d, base) == critical_dimension_by_scan(L, d, base));
  }
}

TEST_CASE("rebase regenerates and refuses derived tables", "[freq_table]") {
  const auto t = build_freq_table(128, 500000);
  CHECK(rebase(t, 1e7) == build_freq_table(128, 1e7));
  const FreqTable scaled(4, 1e4, {0.5, 0.005}, TableOrigin::scaled);
  CHECK_THROWS_AS(rebase(scaled, 1e7), invalid_state);
}
