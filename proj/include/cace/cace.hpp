#pragma once

// Umbrella header for the trial-simulation library.

#include "cace/config.hpp"
#include "cace/core.hpp"
#include "cace/dgm.hpp"
#include "cace/estimators.hpp"
#include "cace/montecarlo.hpp"
#include "cace/report.hpp"
#include "cace/rng.hpp"
#include "cace/scenarios.hpp"
#include "cace/stats.hpp"
#include "cace/types.hpp"
