#pragma once

#include <array>

namespace cope::presets {

// Llama-3-8B attention head.
inline constexpr int llama3_head_dim = 128;
inline constexpr double llama3_base = 500000.0;
inline constexpr double llama3_pretrain_len = 8192.0;

// Long-context recipe: ABF rebase, clip onset, test-time YaRN factor.
inline constexpr double abf_base = 1.0e7;
inline constexpr double long_context_len = 65536.0;
inline constexpr int clip_onset = 44;
inline constexpr double yarn_factor = 4.0;

// Evaluation lengths 8k ... 256k.
inline constexpr std::array<double, 6> study_lengths = {8192, 16384, 32768, 65536, 131072, 262144};

}  // namespace cope::presets
