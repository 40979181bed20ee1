#pragma once

#include "hermein/balanced_optimizer.hpp"
#include "hermein/errors.hpp"
#include "hermein/functionals.hpp"
#include "hermein/metric_maps.hpp"
#include "hermein/sphere_geometry.hpp"
#include "hermein/split_bundles.hpp"
