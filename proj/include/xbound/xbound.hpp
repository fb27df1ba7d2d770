#pragma once

#include "xbound/model.hpp"
#include "xbound/closedform.hpp"
#include "xbound/solver1d.hpp"
#include "xbound/solver2d.hpp"
#include "xbound/analysis.hpp"
#include "xbound/evolve.hpp"
