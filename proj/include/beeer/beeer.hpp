#pragma once

#include "beeer/bundle.hpp"
#include "beeer/config.hpp"
#include "beeer/core.hpp"
#include "beeer/errors.hpp"
#include "beeer/harness.hpp"
#include "beeer/losses.hpp"
#include "beeer/metrics.hpp"
#include "beeer/morphology.hpp"
#include "beeer/perturb.hpp"
#include "beeer/png_io.hpp"
#include "beeer/represent.hpp"
