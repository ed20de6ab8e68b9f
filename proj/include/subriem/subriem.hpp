#pragma once

#include "constants.hpp"
#include "coupling.hpp"
#include "gaussian_coupling.hpp"
#include "group.hpp"
#include "legendre.hpp"
#include "mc.hpp"
#include "measure_change.hpp"
#include "sylvester.hpp"
#include "test_functions.hpp"
