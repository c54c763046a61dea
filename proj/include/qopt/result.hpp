#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qopt/encoders.hpp"
#include "qopt/qubo.hpp"

namespace qopt {

struct TracePoint {
  double seconds;
  std::uint64_t iteration;
  double best_energy;

  friend bool operator==(const TracePoint&, const TracePoint&) = default;
};

// Outcome of one solver invocation. best_energy is in the solver's own units:
// QUBO energy for the annealer, minimised natural objective for the GA.
// objective is the natural-form value of the decoded solution (MKP as the
// negated profit sum) and is only set for decodable, feasible solutions.
struct RunResult {
  double best_energy = 0.0;
  BinaryState best_state;
  std::optional<NaturalSolution> decoded;
  std::optional<std::int64_t> objective;
  bool feasible = false;
  double time_to_best = 0.0;
  double elapsed = 0.0;
  std::size_t attempts_completed = 0;
  std::uint64_t iterations = 0;
  std::vector<TracePoint> trace;

  // Equality over everything except wall-clock measurements.
  bool same_outcome(const RunResult& o) const {
    if (trace.size() != o.trace.size()) return false;
    for (std::size_t i = 0; i < trace.size(); ++i)
      if (trace[i].iteration != o.trace[i].iteration ||
          trace[i].best_energy != o.trace[i].best_energy)
        return false;
    return best_energy == o.best_energy && best_state == o.best_state && decoded == o.decoded &&
           objective == o.objective && feasible == o.feasible &&
           attempts_completed == o.attempts_completed && iterations == o.iterations;
  }
};

}  // namespace qopt
