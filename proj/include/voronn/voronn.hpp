#pragma once

#include "voronn/berkson.hpp"
#include "voronn/errors.hpp"
#include "voronn/estimators.hpp"
#include "voronn/io.hpp"
#include "voronn/kdtree.hpp"
#include "voronn/local_poly.hpp"
#include "voronn/parallel.hpp"
#include "voronn/rng.hpp"
#include "voronn/sim.hpp"
