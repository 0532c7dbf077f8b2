#pragma once

// Umbrella header.

#include "expsamp/errors.hpp"
#include "expsamp/harness.hpp"
#include "expsamp/kernels.hpp"
#include "expsamp/moments.hpp"
#include "expsamp/quadrature.hpp"
#include "expsamp/sampling.hpp"
#include "expsamp/test_functions.hpp"
#include "expsamp/version.hpp"
#include "expsamp/weighting.hpp"
