#pragma once

#include "rankdrift/analytic.hpp"
#include "rankdrift/counting.hpp"
#include "rankdrift/engine.hpp"
#include "rankdrift/errors.hpp"
#include "rankdrift/io.hpp"
#include "rankdrift/ranked_multiset.hpp"
#include "rankdrift/rng.hpp"
#include "rankdrift/scenarios.hpp"
#include "rankdrift/selection.hpp"
#include "rankdrift/stats.hpp"
