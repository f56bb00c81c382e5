#pragma once

// Umbrella header for the whole library.

#include "fkhull/error.hpp"
#include "fkhull/model.hpp"
#include "fkhull/hull.hpp"
#include "fkhull/quadrature.hpp"
#include "fkhull/percival.hpp"
#include "fkhull/lattice.hpp"
#include "fkhull/criterion.hpp"
#include "fkhull/config.hpp"
#include "fkhull/experiments.hpp"
#include "fkhull/acceptance.hpp"
