#pragma once

#include "egohand/camera.hpp"
#include "egohand/error.hpp"
#include "egohand/fusion.hpp"
#include "egohand/geometry.hpp"
#include "egohand/io.hpp"
#include "egohand/lift.hpp"
#include "egohand/metrics.hpp"
#include "egohand/preprocess.hpp"
#include "egohand/random.hpp"
#include "egohand/simulation.hpp"
#include "egohand/smoothing.hpp"
