#pragma once

// Everything except io.hpp, which additionally needs nlohmann/json.

#include "asymptotic.hpp"
#include "core.hpp"
#include "diagnostics.hpp"
#include "distributions.hpp"
#include "estimate.hpp"
#include "montecarlo.hpp"
#include "objective.hpp"
#include "optimize.hpp"
#include "residuals.hpp"
#include "simulate.hpp"
#include "spectral.hpp"
#include "whittle.hpp"
