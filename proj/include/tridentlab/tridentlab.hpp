#pragma once

// Umbrella header.

#include "analytic.hpp"
#include "area_energy.hpp"
#include "grid.hpp"
#include "io.hpp"
#include "mesh.hpp"
#include "solver.hpp"
#include "translator.hpp"
#include "trident.hpp"
#include "width_map.hpp"
