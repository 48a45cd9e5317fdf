#pragma once

#include "robusthedge/arbitrage.hpp"
#include "robusthedge/decompose.hpp"
#include "robusthedge/errors.hpp"
#include "robusthedge/lp.hpp"
#include "robusthedge/model.hpp"
#include "robusthedge/model_io.hpp"
#include "robusthedge/numeric.hpp"
#include "robusthedge/oracle.hpp"
#include "robusthedge/polar.hpp"
#include "robusthedge/superhedge.hpp"
