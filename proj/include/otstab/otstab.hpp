#pragma once

#include "otstab/common.hpp"
#include "otstab/costs.hpp"
#include "otstab/measures.hpp"
#include "otstab/entropic.hpp"
#include "otstab/dual_solver.hpp"
#include "otstab/stability.hpp"
#include "otstab/io.hpp"
