#pragma once

#include "mjr/cltapprox.hpp"
#include "mjr/core.hpp"
#include "mjr/error.hpp"
#include "mjr/exprlang.hpp"
#include "mjr/model_file.hpp"
#include "mjr/models.hpp"
#include "mjr/moments.hpp"
#include "mjr/odesolve.hpp"
#include "mjr/periodic.hpp"
#include "mjr/resetting.hpp"
#include "mjr/sim.hpp"
#include "mjr/transition.hpp"
#include "mjr/validate.hpp"
