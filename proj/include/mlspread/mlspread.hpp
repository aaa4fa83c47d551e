#pragma once

#include "mlspread/csv.hpp"
#include "mlspread/dynamics.hpp"
#include "mlspread/experiment.hpp"
#include "mlspread/network.hpp"
#include "mlspread/rng.hpp"
#include "mlspread/scenarios.hpp"
#include "mlspread/stats.hpp"
