#pragma once

#include "covadj/errors.hpp"
#include "covadj/glm.hpp"
#include "covadj/inference.hpp"
#include "covadj/math.hpp"
#include "covadj/quadrature.hpp"
#include "covadj/render.hpp"
#include "covadj/rng.hpp"
#include "covadj/sim_config.hpp"
#include "covadj/simulate.hpp"
#include "covadj/standardize.hpp"
#include "covadj/trial_data.hpp"
#include "covadj/variance.hpp"
