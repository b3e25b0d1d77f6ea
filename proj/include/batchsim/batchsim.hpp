#pragma once

#include "batchsim/blocks.hpp"
#include "batchsim/config.hpp"
#include "batchsim/econ.hpp"
#include "batchsim/errors.hpp"
#include "batchsim/harness.hpp"
#include "batchsim/kernel.hpp"
#include "batchsim/plant.hpp"
#include "batchsim/report_io.hpp"
