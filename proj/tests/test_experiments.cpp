#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>

#include "cope/experiments.hpp"
#include "support.hpp"

using namespace cope;
using Catch::Matchers::WithinAbs;

namespace {

double binomial_se(double p, std::int64_t n) { return std::sqrt(p * (1 - p) / static_cast<double>(n)); }

RetrievalConfig small_config() {
  RetrievalConfig c;
  c.d = 64;
  c.base = 5e5;
  c.distances = {0, 1024, 65536};
  c.n_trials = 500;
  c.n_distractors = 3;
  c.sigma_eps = 1.0;
  c.seed = 9;
  return c;
}

std::string to_csv(const ReportTable& t) {
  std::ostringstream out;
  write_csv(t, out);
  return out.str();
}

}  // namespace

TEST_CASE("period report flags the Llama-3 OOD chunks", "[experiments]") {
  const auto r = period_report(build_freq_table(128, 500000), 8192);
  CHECK(r.rows() == 64);
  const auto flags = column_as_doubles(r.column("ood_flag"));
  CHECK(std::count(flags.begin(), flags.end(), 1.0) == 29);
  for (std::size_t i = 0; i < 64; ++i) CHECK(flags[i] == (i >= 35 ? 1.0 : 0.0));
  CHECK(*r.meta("d_ct") == "70");
  const auto none = period_report(build_freq_table(128, 500000), 1e12);
  const auto f2 = column_as_doubles(none.column("ood_flag"));
  CHECK(std::count(f2.begin(), f2.end(), 1.0) == 0);
}

TEST_CASE("spectrum report columns", "[experiments]") {
  const auto t = build_freq_table(128, 500000);
  const std::vector<ClipWindow> w = {clip_window(t, ClipMode::none, 44), clip_window(t, ClipMode::hard, 44),
                                     clip_window(t, ClipMode::soft, 44)};
  const auto r = spectrum_report(t, w);
  const auto rope = column_as_doubles(r.column("rope"));
  const auto hard = column_as_doubles(r.column("hard_44"));
  const auto soft = column_as_doubles(r.column("soft_44"));
  for (std::size_t j = 0; j < 64; ++j) {
    CHECK(rope[j] == 1.0);
    CHECK(hard[j] == (j < 44 ? 1.0 : 0.0));
    if (j <= 44) CHECK(soft[j] == 1.0);
    if (j > 44) CHECK(soft[j] < soft[j - 1]);
  }
  CHECK(soft[63] == 0.0);
  const std::vector<ClipWindow> bad = {ClipWindow::all_pass(10)};
  CHECK_THROWS_AS(spectrum_report(t, bad), std::invalid_argument);
}

TEST_CASE("scale report lists factors and scaled frequencies", "[experiments]") {
  ScalingPolicy p;
  p.method = ScalingMethod::pi;
  p.pretrain_len = 4096;
  p.target_len = 16384;
  const auto r = scale_report(build_freq_table(16, 1e4), p);
  for (double s : column_as_doubles(r.column("scale_factor"))) CHECK(s == 4.0);
  CHECK(*r.meta("scaling") == "pi");
}

TEST_CASE("decay report is normalized at tau = 0", "[experiments]") {
  const auto t = build_freq_table(128, 500000);
  KernelSpec spec;
  spec.onset_index = 44;
  const auto taus = linear_grid(0, 8192, 64);
  for (auto app : {WindowApplication::amplitude, WindowApplication::frequency}) {
    spec.application = app;
    const auto r = decay_report(t, spec, taus);
    CHECK(r.rows() == taus.size());
    for (const char* c : {"rope_normalized", "hardclip_normalized", "cope_normalized"})
      CHECK_THAT(column_as_doubles(r.column(c))[0], WithinAbs(1.0, 1e-14));
    CHECK(*r.meta("clip_apply") == to_string(app));
  }
}

TEST_CASE("gap report agrees with the analytic curve", "[experiments]") {
  const auto t = build_freq_table(8, 5e5);
  const Kernel k{t, clip_window(t, ClipMode::soft, 2)};
  const std::vector<double> taus = {0, 17, 1024};
  GapStudyConfig cfg;
  cfg.n_samples = 5000;
  const auto r = gap_report(k, taus, cfg);
  for (double z : column_as_doubles(r.column("z_score"))) CHECK(std::abs(z) < 4.0);
  const std::vector<double> fractional = {0.5};
  CHECK_THROWS_AS(gap_report(k, fractional, cfg), std::invalid_argument);
}

TEST_CASE("retrieval with a near-exact similar key", "[experiments][retrieval]") {
  RetrievalConfig c;
  c.d = 64;
  c.base = 5e5;
  c.distances = {0};
  c.n_trials = 4000;
  c.n_distractors = 1;
  c.sigma_eps = 1e-9;
  c.seed = 3;
  const double acc = column_as_doubles(retrieval_sim(c).column("accuracy"))[0];

  // Oracle: the similar key wins unless q.k > |q|^2 for the random key.
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> normal;
  const int n = 20000;
  int wins = 0;
  for (int i = 0; i < n; ++i) {
    double qq = 0, qk = 0;
    for (int j = 0; j < 64; ++j) {
      const double q = normal(rng), k = normal(rng);
      qq += q * q;
      qk += q * k;
    }
    wins += qk < qq ? 1 : 0;
  }
  const double p = static_cast<double>(wins) / n;
  CHECK(acc >= 0.95);
  CHECK(std::abs(acc - p) <= 4 * std::hypot(binomial_se(p, 4000), binomial_se(p, n)) + 1e-12);
}

TEST_CASE("all-zero window gives chance accuracy", "[experiments][retrieval]") {
  auto c = small_config();
  c.kernel.mode = ClipMode::hard;
  c.kernel.onset_index = 0;
  c.n_trials = 4000;
  const auto acc = column_as_doubles(retrieval_sim(c).column("accuracy"));
  const double p = 1.0 / (1 + c.n_distractors);
  for (double a : acc) CHECK(std::abs(a - p) <= 3 * binomial_se(p, c.n_trials));
}

TEST_CASE("retrieval accuracy falls with more noise", "[experiments][retrieval]") {
  auto c = small_config();
  c.n_trials = 3000;
  std::vector<double> acc;
  for (double eps : {0.5, 1.5, 4.0}) {
    c.sigma_eps = eps;
    const auto a = column_as_doubles(retrieval_sim(c).column("accuracy"));
    for (double x : a) {
      CHECK(x >= 0.0);
      CHECK(x <= 1.0);
    }
    acc.push_back(a[1]);
  }
  for (std::size_t i = 1; i < acc.size(); ++i)
    CHECK(acc[i] <= acc[i - 1] + 3 * std::hypot(binomial_se(acc[i], c.n_trials), binomial_se(acc[i - 1], c.n_trials)));
}

TEST_CASE("retrieval is reproducible and echoes its configuration", "[experiments][retrieval]") {
  const auto c = small_config();
  const auto a = retrieval_sim(c), b = retrieval_sim(c);
  CHECK(to_csv(a) == to_csv(b));
  for (const char* key : {"d", "base", "clip_mode", "clip_onset", "clip_apply", "clip_order", "scaling",
                          "n_distractors", "sigma", "sigma_eps", "mu", "seed", "distribution"})
    CHECK(a.meta(key) != nullptr);
  CHECK(column_as_doubles(a.column("n_trials"))[0] == 500.0);
  auto other = c;
  other.seed = 10;
  CHECK(to_csv(retrieval_sim(other)) != to_csv(a));
}

TEST_CASE("invalid retrieval configs are rejected", "[experiments][retrieval]") {
  auto c = small_config();
  c.n_trials = 0;
  CHECK_THROWS_AS(retrieval_sim(c), std::invalid_argument);
  c = small_config();
  c.n_distractors = 0;
  CHECK_THROWS_AS(retrieval_sim(c), std::invalid_argument);
  c = small_config();
  c.distances = {10, 10};
  CHECK_THROWS_AS(retrieval_sim(c), std::invalid_argument);
  c = small_config();
  c.kernel.onset_index = 100;
  CHECK_THROWS_AS(retrieval_sim(c), std::invalid_argument);
}

TEST_CASE("unit-spectrum signal has finite support", "[experiments]") {
  const auto t = build_freq_table(8, 1e4);
  const std::vector<double> taus = {-20, -10, 0, 10, 20};
  const auto s = unit_spectrum_signal(t, taus, 10.0);
  CHECK(s.values[0] == 0.0);
  CHECK(s.values[4] == 0.0);
  CHECK(s.values[2] == 4.0);
  CHECK(s.values[1] == s.values[3]);
}
