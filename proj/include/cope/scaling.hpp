#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cope/errors.hpp"
#include "cope/freq_table.hpp"

namespace cope {

enum class ScalingMethod { none, pi, ntk, yarn, table };

inline const char* to_string(ScalingMethod m) {
  switch (m) {
    case ScalingMethod::none: return "none";
    case ScalingMethod::pi: return "pi";
    case ScalingMethod::ntk: return "ntk";
    case ScalingMethod::yarn: return "yarn";
    case ScalingMethod::table: return "table";
  }
  return "unknown";
}

inline std::optional<ScalingMethod> parse_scaling_method(std::string_view s) {
  if (s == "none") return ScalingMethod::none;
  if (s == "pi") return ScalingMethod::pi;
  if (s == "ntk") return ScalingMethod::ntk;
  if (s == "yarn") return ScalingMethod::yarn;
  if (s == "table") return ScalingMethod::table;
  return std::nullopt;
}

/// A context-extension policy producing per-frequency scale factors s_i,
/// applied as theta'_i = theta_i / s_i.
struct ScalingPolicy {
  ScalingMethod method = ScalingMethod::none;
  double pretrain_len = 1.0;
  double target_len = 1.0;
  // Rotation-count thresholds for the YaRN ramp.
  double yarn_alpha = 1.0;
  double yarn_beta = 32.0;
  std::filesystem::path table_path;

  double ratio() const noexcept { return target_len / pretrain_len; }

  void validate() const {
    if (method == ScalingMethod::none || method == ScalingMethod::table) return;
    detail::require(pretrain_len >= 1.0, "ScalingPolicy: pretrain_len must be >= 1");
    detail::require(target_len >= pretrain_len, "ScalingPolicy: target_len must be >= pretrain_len");
    if (method == ScalingMethod::yarn)
      detail::require(yarn_alpha < yarn_beta, "ScalingPolicy: yarn_alpha must be < yarn_beta");
  }
};

/// Reads one factor per line; '#' starts a comment, blank lines are ignored.
inline std::vector<double> parse_scale_table(std::istream& in, std::size_t expected,
                                             std::string_view source = "<stream>") {
  std::vector<double> values;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    const std::string_view token(line.data() + first, last - first + 1);

    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(v))
      throw format_error(std::string(source) + ":" + std::to_string(lineno) +
                         ": not a finite decimal value: '" + std::string(token) + "'");
    values.push_back(v);
  }
  if (values.size() != expected)
    throw format_error(std::string(source) + ": expected " + std::to_string(expected) +
                       " scale factors, found " + std::to_string(values.size()));
  return values;
}

inline std::vector<double> read_scale_table(const std::filesystem::path& path, std::size_t expected) {
  std::ifstream in(path);
  if (!in) throw format_error("cannot open scale table '" + path.string() + "'");
  return parse_scale_table(in, expected, path.string());
}

/// Per-frequency scale factors s_i for `policy` on `table`.
///
/// YaRN bands use the rotation count r_i = L_pre * theta_i / (2 pi):
/// gamma_i = clamp((r_i - alpha) / (beta - alpha), 0, 1) and
/// 1/s_i = (1 - gamma_i) * L_pre / L_t + gamma_i.
inline std::vector<double> scaling_factors(const ScalingPolicy& policy, const FreqTable& table) {
  policy.validate();
  const std::size_t n = table.size();
  const int d = table.dim();
  std::vector<double> s(n, 1.0);
  switch (policy.method) {
    case ScalingMethod::none:
      break;
    case ScalingMethod::pi:
      std::fill(s.begin(), s.end(), policy.ratio());
      break;
    case ScalingMethod::ntk:
      detail::require(d > 2, "scaling_factors: ntk needs d > 2 (exponent 2i/(d-2))");
      for (std::size_t i = 0; i < n; ++i)
        s[i] = std::pow(policy.ratio(), 2.0 * static_cast<double>(i) / static_cast<double>(d - 2));
      break;
    case ScalingMethod::yarn: {
      const double inv_ratio = policy.pretrain_len / policy.target_len;
      for (std::size_t i = 0; i < n; ++i) {
        const double r = policy.pretrain_len * table[i] / (2.0 * std::numbers::pi);
        const double gamma =
            std::clamp((r - policy.yarn_alpha) / (policy.yarn_beta - policy.yarn_alpha), 0.0, 1.0);
        if (gamma == 1.0)
          s[i] = 1.0;
        else if (gamma == 0.0)
          s[i] = policy.ratio();
        else
          s[i] = 1.0 / ((1.0 - gamma) * inv_ratio + gamma);
      }
      break;
    }
    case ScalingMethod::table:
      s = read_scale_table(policy.table_path, n);
      break;
  }
  return s;
}

/// theta'_i = theta_i / s_i. The result keeps d and base but is no longer a
/// generated table.
inline FreqTable scale_table(const FreqTable& table, std::span<const double> factors) {
  detail::require(factors.size() == table.size(), "scale_table: need one factor per frequency");
  std::vector<double> thetas(table.size());
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    detail::require(factors[i] > 0.0 && std::isfinite(factors[i]),
                    "scale_table: scale factor " + std::to_string(i) + " must be finite and > 0");
    thetas[i] = table[i] / factors[i];
  }
  return FreqTable(table.dim(), table.base(), std::move(thetas), TableOrigin::scaled);
}

inline FreqTable scale_table(const FreqTable& table, const ScalingPolicy& policy) {
  if (policy.method == ScalingMethod::none) return table;
  const auto s = scaling_factors(policy, table);
  return scale_table(table, std::span<const double>(s));
}

}  // namespace cope
