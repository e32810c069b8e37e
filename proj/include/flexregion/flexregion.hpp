#pragma once

#include "app.hpp"
#include "baseline.hpp"
#include "devices.hpp"
#include "ffor.hpp"
#include "geometry.hpp"
#include "grid.hpp"
#include "identification.hpp"
#include "linear_power_flow.hpp"
#include "lp.hpp"
#include "parallel.hpp"
#include "svg.hpp"
#include "timeseries.hpp"
