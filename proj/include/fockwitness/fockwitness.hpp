#pragma once

#include "fockwitness/errors.hpp"
#include "fockwitness/format.hpp"
#include "fockwitness/moment_table.hpp"
#include "fockwitness/oracle.hpp"
#include "fockwitness/specfun.hpp"
#include "fockwitness/state_spec.hpp"
#include "fockwitness/states.hpp"
#include "fockwitness/sweep.hpp"
#include "fockwitness/verify.hpp"
#include "fockwitness/witnesses.hpp"
