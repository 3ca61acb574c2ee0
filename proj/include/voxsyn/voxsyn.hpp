#pragma once

// Umbrella header for the whole toolkit.

#include "voxsyn/assignment.hpp"
#include "voxsyn/blob_log.hpp"
#include "voxsyn/components.hpp"
#include "voxsyn/convolve.hpp"
#include "voxsyn/digest.hpp"
#include "voxsyn/error.hpp"
#include "voxsyn/eval.hpp"
#include "voxsyn/filters.hpp"
#include "voxsyn/grid.hpp"
#include "voxsyn/io.hpp"
#include "voxsyn/kdtree.hpp"
#include "voxsyn/pairing.hpp"
#include "voxsyn/parallel.hpp"
#include "voxsyn/patches.hpp"
#include "voxsyn/peaks.hpp"
#include "voxsyn/pipeline.hpp"
#include "voxsyn/points.hpp"
#include "voxsyn/rng.hpp"
#include "voxsyn/similarity.hpp"
#include "voxsyn/ssim.hpp"
#include "voxsyn/synthgen.hpp"
#include "voxsyn/targets.hpp"
#include "voxsyn/threshold.hpp"

namespace voxsyn {
inline constexpr const char* kToolVersion = "0.1.0";
}
