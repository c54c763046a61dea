#pragma once

#include "qopt/annealer.hpp"
#include "qopt/bench.hpp"
#include "qopt/config.hpp"
#include "qopt/encoders.hpp"
#include "qopt/errors.hpp"
#include "qopt/genetic.hpp"
#include "qopt/instances.hpp"
#include "qopt/problems.hpp"
#include "qopt/qubo.hpp"
#include "qopt/random.hpp"
#include "qopt/result.hpp"
#include "qopt/stats.hpp"
#include "qopt/tuner.hpp"
