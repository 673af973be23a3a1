#pragma once

// Umbrella header for variation-diminishing certification of LTI systems.

#include "kpos/ct.hpp"
#include "kpos/hankel.hpp"
#include "kpos/kpos_check.hpp"
#include "kpos/lti.hpp"
#include "kpos/matrix.hpp"
#include "kpos/step_analysis.hpp"
#include "kpos/variation.hpp"

namespace kpos {
inline constexpr const char* kVersion = "0.1.0";
}
