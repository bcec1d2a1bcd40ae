#pragma once

#include "pulsenet/analysis.hpp"
#include "pulsenet/cli.hpp"
#include "pulsenet/config.hpp"
#include "pulsenet/engine.hpp"
#include "pulsenet/errors.hpp"
#include "pulsenet/model.hpp"
#include "pulsenet/network.hpp"
#include "pulsenet/random.hpp"
#include "pulsenet/trace_io.hpp"
