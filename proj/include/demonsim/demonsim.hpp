#pragma once

#include "demonsim/config.hpp"
#include "demonsim/dynamics.hpp"
#include "demonsim/emit.hpp"
#include "demonsim/experiment.hpp"
#include "demonsim/state.hpp"
#include "demonsim/thermo.hpp"
#include "demonsim/validate.hpp"
#include "demonsim/version.hpp"
