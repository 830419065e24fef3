#pragma once

#include "drmdp/config.hpp"
#include "drmdp/env.hpp"
#include "drmdp/error.hpp"
#include "drmdp/experiments.hpp"
#include "drmdp/kernel.hpp"
#include "drmdp/learner.hpp"
#include "drmdp/metrics.hpp"
#include "drmdp/model.hpp"
#include "drmdp/rng.hpp"
#include "drmdp/solver.hpp"
#include "drmdp/stationary.hpp"
#include "drmdp/table_io.hpp"
