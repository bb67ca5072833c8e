#pragma once

// Umbrella header.
#include "faultlab/analysis.hpp"
#include "faultlab/assembler.hpp"
#include "faultlab/benchmarks.hpp"
#include "faultlab/campaign.hpp"
#include "faultlab/debug_port.hpp"
#include "faultlab/error.hpp"
#include "faultlab/events.hpp"
#include "faultlab/isa.hpp"
#include "faultlab/machine.hpp"
#include "faultlab/persistence.hpp"
#include "faultlab/uarch.hpp"
