#pragma once

#include "daytrip/amod.hpp"
#include "daytrip/coevolution.hpp"
#include "daytrip/common.hpp"
#include "daytrip/config.hpp"
#include "daytrip/csv.hpp"
#include "daytrip/diaries.hpp"
#include "daytrip/drt.hpp"
#include "daytrip/events.hpp"
#include "daytrip/fixtures.hpp"
#include "daytrip/manifest.hpp"
#include "daytrip/matching.hpp"
#include "daytrip/mincostflow.hpp"
#include "daytrip/network_router.hpp"
#include "daytrip/numfmt.hpp"
#include "daytrip/parallel.hpp"
#include "daytrip/plans.hpp"
#include "daytrip/population.hpp"
#include "daytrip/queue_sim.hpp"
#include "daytrip/replanning.hpp"
#include "daytrip/report.hpp"
#include "daytrip/rng.hpp"
#include "daytrip/scenario.hpp"
#include "daytrip/scoring.hpp"
#include "daytrip/stageio.hpp"
#include "daytrip/synthesis.hpp"
#include "daytrip/transit_router.hpp"
