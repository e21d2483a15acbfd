#pragma once

#include "sentinel/bench.hpp"
#include "sentinel/clustering.hpp"
#include "sentinel/cover.hpp"
#include "sentinel/domain.hpp"
#include "sentinel/error.hpp"
#include "sentinel/explain.hpp"
#include "sentinel/logic.hpp"
#include "sentinel/random.hpp"
#include "sentinel/report.hpp"
#include "sentinel/rollout.hpp"
#include "sentinel/scenario_io.hpp"
