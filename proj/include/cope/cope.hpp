#pragma once

#include "cope/clip_window.hpp"
#include "cope/curve.hpp"
#include "cope/errors.hpp"
#include "cope/experiments.hpp"
#include "cope/freq_table.hpp"
#include "cope/kernel.hpp"
#include "cope/leakage.hpp"
#include "cope/presets.hpp"
#include "cope/report.hpp"
#include "cope/rotary.hpp"
#include "cope/scaling.hpp"
#include "cope/spectral.hpp"
#include "cope/svg_plot.hpp"
