#pragma once

#include "hardedge/errors.hpp"
#include "hardedge/special_functions.hpp"
#include "hardedge/rng.hpp"
#include "hardedge/quadrature.hpp"
#include "hardedge/ensemble.hpp"
#include "hardedge/process.hpp"
#include "hardedge/limit_law.hpp"
#include "hardedge/stats.hpp"
#include "hardedge/verify.hpp"
#include "hardedge/io.hpp"
