#pragma once

// Library umbrella. The command-line layer (virtlev/cli.hpp) is separate
// because it pulls in the vendored CLI11 and JSON headers.

#include "virtlev/core.hpp"
#include "virtlev/special_functions.hpp"
#include "virtlev/weighted_space.hpp"
#include "virtlev/tridiagonal.hpp"
#include "virtlev/free_resolvent.hpp"
#include "virtlev/potential.hpp"
#include "virtlev/threshold_report.hpp"
#include "virtlev/parallel.hpp"
#include "virtlev/jost.hpp"
#include "virtlev/lap_sweep.hpp"
#include "virtlev/perturbation.hpp"
#include "virtlev/discrete_ops.hpp"
#include "virtlev/criticality.hpp"
#include "virtlev/csv.hpp"
