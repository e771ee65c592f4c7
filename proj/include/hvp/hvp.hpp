#pragma once

#include "cli.hpp"
#include "coupling.hpp"
#include "delaunay.hpp"
#include "errors.hpp"
#include "experiments.hpp"
#include "geometry.hpp"
#include "io.hpp"
#include "percolation.hpp"
#include "pointprocess.hpp"
#include "predicates.hpp"
#include "quadrature.hpp"
#include "render.hpp"
#include "rng.hpp"
#include "sweep.hpp"
#include "tiling.hpp"
#include "vec2.hpp"
#include "voronoi.hpp"
