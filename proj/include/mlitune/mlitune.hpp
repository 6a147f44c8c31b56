#pragma once

#include "mlitune/errors.hpp"
#include "mlitune/harmonics.hpp"
#include "mlitune/harness.hpp"
#include "mlitune/inverter.hpp"
#include "mlitune/objective.hpp"
#include "mlitune/optimizer.hpp"
#include "mlitune/oracle.hpp"
#include "mlitune/report.hpp"
#include "mlitune/scenario_io.hpp"
