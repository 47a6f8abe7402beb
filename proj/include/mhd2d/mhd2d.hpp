#pragma once

#include "mhd2d/grid.hpp"
#include "mhd2d/operators.hpp"
#include "mhd2d/linalg.hpp"
#include "mhd2d/spectral.hpp"
#include "mhd2d/boundary.hpp"
#include "mhd2d/lifting.hpp"
#include "mhd2d/dynamics.hpp"
#include "mhd2d/estimates.hpp"
#include "mhd2d/scenarios.hpp"
#include "mhd2d/manufactured.hpp"
#include "mhd2d/verify.hpp"
#include "mhd2d/config.hpp"
