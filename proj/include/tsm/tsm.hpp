#pragma once

#include "cli.hpp"
#include "controller.hpp"
#include "engine.hpp"
#include "estimator.hpp"
#include "friction.hpp"
#include "integrate.hpp"
#include "plant.hpp"
#include "scenario.hpp"
#include "stability.hpp"
