#pragma once

// Uniform random search over solver parameters, scored by the mean best
// objective of repeated short runs, plus the published per-instance settings.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "qopt/bench.hpp"
#include "qopt/config.hpp"
#include "qopt/errors.hpp"
#include "qopt/random.hpp"

namespace qopt {

struct IntRange {
  std::int64_t lo, hi;
};
struct RealRange {
  double lo, hi;
};
struct Choice {
  std::vector<std::string> options;
};

struct Param {
  std::string name;  // a config key
  std::variant<IntRange, RealRange, Choice> domain;
};

struct ParamSpace {
  std::vector<Param> params;

  void validate() const {
    for (const auto& p : params) {
      std::visit(
          [&](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            bool ok = true;
            if constexpr (std::is_same_v<T, Choice>) ok = !d.options.empty();
            else ok = d.lo <= d.hi;
            if (!ok) throw ConfigError("empty domain for parameter " + p.name);
          },
          p.domain);
    }
  }
};

using ParamSet = KeyValues;

inline ParamSet sample(const ParamSpace& space, Rng& rng) {
  ParamSet out;
  for (const auto& p : space.params) {
    std::string value = std::visit(
        [&](const auto& d) -> std::string {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, IntRange>) return std::to_string(rng.between(d.lo, d.hi));
          else if constexpr (std::is_same_v<T, RealRange>)
            return detail::format_double(d.lo + (d.hi - d.lo) * rng.uniform());
          else return d.options[rng.below(d.options.size())];
        },
        p.domain);
    out.emplace_back(p.name, std::move(value));
  }
  return out;
}

inline bool in_space(const ParamSpace& space, const ParamSet& set) {
  if (set.size() != space.params.size()) return false;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& p = space.params[i];
    if (set[i].first != p.name) return false;
    const auto& v = set[i].second;
    const bool ok = std::visit(
        [&](const auto& d) {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, IntRange>) {
            std::int64_t x;
            return detail::parse_number(std::string_view(v), x) && x >= d.lo && x <= d.hi;
          } else if constexpr (std::is_same_v<T, RealRange>) {
            double x;
            return detail::parse_number(std::string_view(v), x) && x >= d.lo && x <= d.hi;
          } else {
            return std::find(d.options.begin(), d.options.end(), v) != d.options.end();
          }
        },
        p.domain);
    if (!ok) return false;
  }
  return true;
}

// Searched ranges. n is the natural problem size.
inline ParamSpace ga_space(Family family, std::size_t n) {
  ParamSpace s;
  const auto ni = static_cast<std::int64_t>(n);
  s.params.push_back({"population_size", IntRange{std::max<std::int64_t>(2, ni), std::max<std::int64_t>(2, 10 * ni)}});
  if (family == Family::mkp)
    s.params.push_back({"crossover", Choice{{"one_point", "two_point", "uniform", "exponential"}}});
  else
    s.params.push_back({"crossover", Choice{{"order", "edge_recombination"}}});
  s.params.push_back({"crossover_rate", RealRange{0.5, 0.9}});
  s.params.push_back({"mutation_rate", RealRange{0.0, 0.2}});
  s.params.push_back({"eliminate_duplicates", Choice{{"true", "false"}}});
  return s;
}

inline ParamSpace da_space() {
  ParamSpace s;
  s.params.push_back({"gs_level", IntRange{0, 100}});
  s.params.push_back({"gs_cutoff", IntRange{0, 1'000'000}});
  s.params.push_back({"num_run", IntRange{1, 16}});
  s.params.push_back({"num_group", IntRange{1, 16}});
  return s;
}

struct TrialRecord {
  std::size_t index = 0;
  ParamSet params;
  double score = std::numeric_limits<double>::infinity();  // lower is better
  double elapsed = 0.0;
  std::string error;
  std::size_t rank = 0;  // 1 = best
};

struct TuneResult {
  ParamSet best;
  std::size_t best_index = 0;
  std::vector<TrialRecord> log;
};

// Generic driver: evaluate(params, trial_index) returns a score to minimise.
// A throwing evaluation is logged and scored +inf.
inline TuneResult tune(const ParamSpace& space,
                       const std::function<double(const ParamSet&, std::size_t)>& evaluate,
                       std::size_t trials, std::uint64_t seed) {
  space.validate();
  if (trials < 1) throw ConfigError("trials must be at least 1");
  Rng rng(mix_seed(seed, 0x74756e65ULL));
  TuneResult res;
  for (std::size_t t = 0; t < trials; ++t) {
    TrialRecord rec;
    rec.index = t;
    rec.params = sample(space, rng);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      rec.score = evaluate(rec.params, t);
      if (std::isnan(rec.score)) rec.score = std::numeric_limits<double>::infinity();
    } catch (const std::exception& e) {
      rec.error = e.what();
      rec.score = std::numeric_limits<double>::infinity();
    }
    rec.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.log.push_back(std::move(rec));
  }
  for (std::size_t t = 1; t < res.log.size(); ++t)
    if (res.log[t].score < res.log[res.best_index].score) res.best_index = t;
  res.best = res.log[res.best_index].params;
  std::vector<std::size_t> order(res.log.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return res.log[a].score < res.log[b].score; });
  for (std::size_t r = 0; r < order.size(); ++r) res.log[order[r]].rank = r + 1;
  return res;
}

struct TuneOptions {
  std::size_t trials = 30;
  std::size_t inner_runs = 20;
  double inner_limit = 1.0;
  std::uint64_t seed = 0;
};

// Scores a configuration by the mean internal (minimised) objective of
// inner_runs seeded runs. An infeasible run makes the score +inf.
inline TuneResult tune_solver(const ProblemInstance& problem, const SolverSpec& base, const ParamSpace& space,
                              const TuneOptions& opt) {
  auto evaluate = [&](const ParamSet& params, std::size_t trial) {
    SolverSpec spec = base;
    for (const auto& [k, v] : params) {
      if (spec.kind == SolverKind::da) set_da_option(spec.da, k, v);
      else set_ga_option(spec.ga, k, v);
    }
    const auto set = run_trials(problem, spec, opt.inner_limit, opt.inner_runs,
                                mix_seed(opt.seed, 0x1000 + static_cast<std::uint64_t>(trial)));
    double sum = 0.0;
    for (const auto& t : set.trials) {
      if (!t.feasible) return std::numeric_limits<double>::infinity();
      sum += maximising(set.family) ? -*t.value : *t.value;
    }
    return sum / static_cast<double>(set.trials.size());
  };
  return tune(space, evaluate, opt.trials, opt.seed);
}

inline std::string trial_log_csv(const TuneResult& res) {
  std::ostringstream out;
  out << "trial_index";
  if (!res.log.empty())
    for (const auto& [k, v] : res.log.front().params) out << ',' << k;
  out << ",score,elapsed,rank\n";
  for (const auto& r : res.log) {
    out << r.index;
    for (const auto& [k, v] : r.params) out << ',' << v;
    out << ',' << detail::format_double(r.score) << ',' << detail::format_double(r.elapsed) << ',' << r.rank
        << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Published settings. DA rows marked "default" map to DaConfig{}.

struct PaperParams {
  GaConfig ga;
  DaConfig da;
  bool da_default = true;
};

inline PaperParams load_paper_params(const std::string& instance) {
  struct GaRow {
    const char* name;
    std::size_t p;
    Crossover c;
    bool dup;
    double a, b;
  };
  static const GaRow ga_rows[] = {
      {"weing1", 67, Crossover::exponential, true, 0.7129, 0.0953},
      {"weing2", 95, Crossover::exponential, true, 0.7186, 0.0283},
      {"weing3", 146, Crossover::one_point, false, 0.8333, 0.1339},
      {"weing4", 147, Crossover::exponential, true, 0.6059, 0.0357},
      {"weing5", 170, Crossover::two_point, true, 0.8660, 0.14408},
      {"weing6", 53, Crossover::one_point, true, 0.7039, 0.02567},
      {"weing7", 175, Crossover::uniform, false, 0.7514, 0.0017},
      {"weing8", 183, Crossover::uniform, false, 0.7230, 0.0835},
      {"had12", 23, Crossover::order, true, 0.8348, 0.1592},
      {"had14", 62, Crossover::order, false, 0.7304, 0.0572},
      {"had16", 72, Crossover::order, false, 0.8935, 0.0461},
      {"had18", 38, Crossover::order, false, 0.7868, 0.1382},
      {"had20", 30, Crossover::order, false, 0.7015, 0.1234},
      {"rou12", 58, Crossover::order, true, 0.6763, 0.0019},
      {"rou15", 31, Crossover::order, false, 0.7025, 0.1108},
      {"rou20", 48, Crossover::order, false, 0.6937, 0.0831},
      {"tai40a", 40, Crossover::order, true, 0.8226, 0.1319},
      {"tai40b", 41, Crossover::order, false, 0.7132, 0.1952},
      {"bays29", 30, Crossover::order, false, 0.5641, 0.1988},
      {"bayg29", 30, Crossover::order, false, 0.6746, 0.1039},
      {"berlin52", 52, Crossover::order, false, 0.8112, 0.1416},
      {"brazil58", 65, Crossover::order, false, 0.6834, 0.1129},
      {"dantzig42", 43, Crossover::order, false, 0.8986, 0.0002},
      {"fri26", 25, Crossover::order, false, 0.8409, 0.0564},
      {"gr17", 64, Crossover::order, false, 0.5015, 0.0284},
      {"gr21", 32, Crossover::order, false, 0.5014, 0.0439},
      {"gr24", 39, Crossover::order, false, 0.5917, 0.1853},
      {"st70", 70, Crossover::order, false, 0.7294, 0.0568},
  };
  struct DaRow {
    const char* name;
    int gs_level;
    std::int64_t gs_cutoff;
    int num_run, num_group;
  };
  static const DaRow da_rows[] = {
      {"weing1", 12, 277512, 14, 2},   {"weing3", 35, 984915, 5, 1},   {"weing6", 43, 791905, 5, 11},
      {"weing8", 100, 312191, 8, 14},  {"tai40a", 67, 621145, 7, 14},  {"tai40b", 48, 383240, 4, 10},
      {"berlin52", 91, 741373, 10, 16}, {"brazil58", 24, 1243, 5, 13}, {"dantzig42", 41, 249453, 15, 15},
      {"st70", 20, 345700, 5, 4},
  };

  for (const auto& g : ga_rows) {
    if (instance != g.name) continue;
    PaperParams out;
    out.ga.population_size = g.p;
    out.ga.crossover = g.c;
    out.ga.mutation = is_permutation_operator(g.c) ? Mutation::inverse : Mutation::bit_flip;
    out.ga.eliminate_duplicates = g.dup;
    out.ga.crossover_rate = g.a;
    out.ga.mutation_rate = g.b;
    for (const auto& d : da_rows) {
      if (instance != d.name) continue;
      out.da.restart_interval_scale = d.gs_level;
      out.da.no_improvement_cutoff = d.gs_cutoff;
      out.da.num_run = d.num_run;
      out.da.num_group = d.num_group;
      out.da_default = false;
    }
    return out;
  }
  throw std::out_of_range("no published parameters for instance '" + instance + "'");
}

}  // namespace qopt
