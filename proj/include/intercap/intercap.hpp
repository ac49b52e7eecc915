#pragma once

#include "intercap/gridpmf.hpp"
#include "intercap/normal.hpp"
#include "intercap/fleet.hpp"
#include "intercap/weather_demand.hpp"
#include "intercap/risk_engine.hpp"
#include "intercap/allocation.hpp"
#include "intercap/calibration.hpp"
#include "intercap/oracle.hpp"
#include "intercap/scenario.hpp"
#include "intercap/report.hpp"
