#pragma once

#include "paintpot/angles.hpp"
#include "paintpot/characterize.hpp"
#include "paintpot/cubic.hpp"
#include "paintpot/error.hpp"
#include "paintpot/estimate.hpp"
#include "paintpot/geometry.hpp"
#include "paintpot/io.hpp"
#include "paintpot/sensor_sim.hpp"
#include "paintpot/trajectory.hpp"
