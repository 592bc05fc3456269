#pragma once

#include "mswap/cache.hpp"
#include "mswap/evaluate.hpp"
#include "mswap/metrics.hpp"
#include "mswap/phase_detect.hpp"
#include "mswap/random.hpp"
#include "mswap/report.hpp"
#include "mswap/reuse.hpp"
#include "mswap/run.hpp"
#include "mswap/simulator.hpp"
#include "mswap/stat_models.hpp"
#include "mswap/swap_controller.hpp"
#include "mswap/trace.hpp"
