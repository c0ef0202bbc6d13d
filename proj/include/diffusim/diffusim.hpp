#pragma once

#include "diffusim/common.hpp"
#include "diffusim/imat_diffusion.hpp"
#include "diffusim/lms.hpp"
#include "diffusim/metrics.hpp"
#include "diffusim/rng.hpp"
#include "diffusim/scenario.hpp"
#include "diffusim/scenario_config.hpp"
#include "diffusim/simulation.hpp"
#include "diffusim/topology.hpp"
#include "diffusim/transforms.hpp"
#include "diffusim/weights.hpp"
