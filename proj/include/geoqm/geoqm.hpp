#pragma once

#include "geoqm/errors.hpp"
#include "geoqm/time_operator.hpp"
#include "geoqm/linalg.hpp"
#include "geoqm/metric.hpp"
#include "geoqm/evolution.hpp"
#include "geoqm/heisenberg.hpp"
#include "geoqm/bundle.hpp"
#include "geoqm/systems.hpp"
