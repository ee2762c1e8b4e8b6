#pragma once

#include "tsrm/demand.hpp"
#include "tsrm/dp.hpp"
#include "tsrm/experiment.hpp"
#include "tsrm/grid.hpp"
#include "tsrm/lp.hpp"
#include "tsrm/policies.hpp"
#include "tsrm/posterior.hpp"
#include "tsrm/presets.hpp"
#include "tsrm/regret.hpp"
#include "tsrm/rng.hpp"
#include "tsrm/sim.hpp"
