#pragma once

#include "errors.hpp"
#include "geometry.hpp"
#include "specfun.hpp"
#include "scene.hpp"
#include "scene_io.hpp"
#include "forward.hpp"
#include "rng.hpp"
#include "stochastic.hpp"
#include "recover.hpp"
#include "parallel.hpp"
#include "migrate.hpp"
#include "io.hpp"
#include "pipeline.hpp"
