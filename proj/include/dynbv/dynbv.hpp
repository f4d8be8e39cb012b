#pragma once

// Umbrella header.

#include "dynbv/bitstring.hpp"
#include "dynbv/config.hpp"
#include "dynbv/csv.hpp"
#include "dynbv/drift.hpp"
#include "dynbv/environment.hpp"
#include "dynbv/evolve.hpp"
#include "dynbv/harness.hpp"
#include "dynbv/random.hpp"
#include "dynbv/stats.hpp"
