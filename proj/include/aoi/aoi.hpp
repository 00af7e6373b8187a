#pragma once

#include "aoi/analysis.hpp"
#include "aoi/channel.hpp"
#include "aoi/distributions.hpp"
#include "aoi/errors.hpp"
#include "aoi/experiments.hpp"
#include "aoi/random.hpp"
#include "aoi/simulator.hpp"
