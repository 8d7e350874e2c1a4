#pragma once

// Umbrella header for the whole engine.

#include "tdmech/atlas.hpp"
#include "tdmech/checks.hpp"
#include "tdmech/dual.hpp"
#include "tdmech/dynamics.hpp"
#include "tdmech/expression.hpp"
#include "tdmech/jets.hpp"
#include "tdmech/lagrangian.hpp"
#include "tdmech/riemann.hpp"
#include "tdmech/scenario.hpp"
#include "tdmech/semispray.hpp"
