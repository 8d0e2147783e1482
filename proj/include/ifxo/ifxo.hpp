#pragma once

// Umbrella header for the individually-fair clustering toolkit.

#include "ifxo/csv.hpp"
#include "ifxo/dataset.hpp"
#include "ifxo/errors.hpp"
#include "ifxo/fair_round.hpp"
#include "ifxo/format.hpp"
#include "ifxo/lp_model.hpp"
#include "ifxo/lp_solve.hpp"
#include "ifxo/metric.hpp"
#include "ifxo/oracle.hpp"
#include "ifxo/out_round.hpp"
#include "ifxo/pipeline.hpp"
#include "ifxo/rng.hpp"
#include "ifxo/simplex.hpp"
