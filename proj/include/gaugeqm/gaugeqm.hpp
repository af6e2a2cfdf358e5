#pragma once

#include "gaugeqm/action.hpp"
#include "gaugeqm/config.hpp"
#include "gaugeqm/error.hpp"
#include "gaugeqm/fitting.hpp"
#include "gaugeqm/gauge_kg.hpp"
#include "gaugeqm/geometry.hpp"
#include "gaugeqm/interference.hpp"
#include "gaugeqm/linalg.hpp"
#include "gaugeqm/metrics.hpp"
#include "gaugeqm/path.hpp"
#include "gaugeqm/potential.hpp"
#include "gaugeqm/propagator.hpp"
#include "gaugeqm/wavefield.hpp"
#include "gaugeqm/weyl_gauge.hpp"
