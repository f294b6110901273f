#pragma once

// Umbrella header.

#include "fuelctrl/boundaries.hpp"
#include "fuelctrl/io.hpp"
#include "fuelctrl/minorant.hpp"
#include "fuelctrl/model.hpp"
#include "fuelctrl/oneshot.hpp"
#include "fuelctrl/oracle.hpp"
#include "fuelctrl/roots.hpp"
#include "fuelctrl/simulate.hpp"
#include "fuelctrl/special.hpp"
#include "fuelctrl/transform.hpp"
#include "fuelctrl/valuefn.hpp"
#include "fuelctrl/verify.hpp"
