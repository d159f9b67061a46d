#pragma once

#include "capsp/apsp.hpp"
#include "capsp/engine.hpp"
#include "capsp/error.hpp"
#include "capsp/generators.hpp"
#include "capsp/graph.hpp"
#include "capsp/primitives.hpp"
#include "capsp/reversed_sinks.hpp"
#include "capsp/scaling.hpp"
#include "capsp/short_range.hpp"
