#pragma once

#include "dqcalib/dualquat.hpp"
#include "dqcalib/error.hpp"
#include "dqcalib/harness.hpp"
#include "dqcalib/linalg.hpp"
#include "dqcalib/metrics.hpp"
#include "dqcalib/problem.hpp"
#include "dqcalib/solvers.hpp"
#include "dqcalib/synth.hpp"
#include "dqcalib/trajio.hpp"
#include "dqcalib/types.hpp"
#include "dqcalib/version.hpp"
