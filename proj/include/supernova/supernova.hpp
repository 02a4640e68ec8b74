#pragma once

#include "supernova/errors.hpp"
#include "supernova/experiment.hpp"
#include "supernova/metrics.hpp"
#include "supernova/placement.hpp"
#include "supernova/random.hpp"
#include "supernova/replication.hpp"
#include "supernova/slot_set.hpp"
#include "supernova/social_graph.hpp"
#include "supernova/trace_model.hpp"
