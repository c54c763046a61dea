#pragma once

// GA over natural representations: bit strings for MKP and permutations for
// QAP/TSP. Parents are drawn uniformly at random; variation comes from
// crossover (probability crossover_rate per pairing) followed by mutation.
// Survival is elitist (parents + offspring truncated to p) or generational.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qopt/errors.hpp"
#include "qopt/problems.hpp"
#include "qopt/random.hpp"
#include "qopt/result.hpp"

namespace qopt {

enum class Crossover { one_point, two_point, uniform, exponential, order, edge_recombination };
enum class Mutation { bit_flip, inverse };

// How P_new replaces P. `generational` discards the parents entirely;
// `elitist` keeps the best population_size of parents and offspring combined.
enum class Survival { generational, elitist };

inline bool is_permutation_operator(Crossover c) {
  return c == Crossover::order || c == Crossover::edge_recombination;
}

inline std::string to_string(Crossover c) {
  switch (c) {
    case Crossover::one_point: return "one_point";
    case Crossover::two_point: return "two_point";
    case Crossover::uniform: return "uniform";
    case Crossover::exponential: return "exponential";
    case Crossover::order: return "order";
    case Crossover::edge_recombination: return "edge_recombination";
  }
  return "?";
}

inline std::optional<Crossover> parse_crossover(std::string s) {
  for (auto& ch : s) {
    ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (ch == ' ' || ch == '-') ch = '_';
  }
  if (s == "one_point") return Crossover::one_point;
  if (s == "two_point") return Crossover::two_point;
  if (s == "uniform") return Crossover::uniform;
  if (s == "exponential") return Crossover::exponential;
  if (s == "order") return Crossover::order;
  if (s == "edge_recombination" || s == "edge") return Crossover::edge_recombination;
  return std::nullopt;
}

inline std::string to_string(Mutation m) { return m == Mutation::bit_flip ? "bit_flip" : "inverse"; }

inline std::optional<Mutation> parse_mutation(std::string s) {
  for (auto& ch : s) {
    ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (ch == ' ' || ch == '-') ch = '_';
  }
  if (s == "bit_flip" || s == "bitflip") return Mutation::bit_flip;
  if (s == "inverse" || s == "inversion") return Mutation::inverse;
  return std::nullopt;
}

inline std::string to_string(Survival s) { return s == Survival::elitist ? "elitist" : "generational"; }

inline std::optional<Survival> parse_survival(const std::string& s) {
  if (s == "elitist") return Survival::elitist;
  if (s == "generational") return Survival::generational;
  return std::nullopt;
}

struct GaConfig {
  std::size_t population_size = 100;
  Crossover crossover = Crossover::order;
  double crossover_rate = 0.9;
  Mutation mutation = Mutation::inverse;
  double mutation_rate = 0.1;
  bool eliminate_duplicates = true;
  Survival survival = Survival::elitist;
  double time_limit = 1.0;
  std::uint64_t seed = 0;
  // Generations without a new best before the population is reseeded at
  // random (the best individual is kept). 0 disables.
  std::uint64_t stagnation_restart = 50;

  std::optional<std::uint64_t> generation_limit;
  std::optional<double> target_fitness;  // stop once best fitness <= target

  void validate(bool permutation_genome) const {
    if (population_size < 2) throw ConfigError("population_size must be at least 2");
    if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0))
      throw ConfigError("crossover_rate must be in [0, 1]");
    if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0))
      throw ConfigError("mutation_rate must be in [0, 1]");
    if (!(time_limit > 0.0)) throw ConfigError("time_limit must be positive");
    if (is_permutation_operator(crossover) != permutation_genome)
      throw ConfigError("crossover " + to_string(crossover) + " does not fit the genome kind");
    if ((mutation == Mutation::inverse) != permutation_genome)
      throw ConfigError("mutation " + to_string(mutation) + " does not fit the genome kind");
  }
};

using PermGenome = std::vector<int>;

// ---------------------------------------------------------------------------
// Binary crossovers. Each returns the pair of complementary children.

template <typename G>
using Children = std::pair<G, G>;

inline void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) throw SizeError("parents differ in length");
}

// Child 1 takes p1[0, cut) and p2[cut, n).
inline Children<BinaryState> crossover_one_point(const BinaryState& p1, const BinaryState& p2,
                                                 std::size_t cut) {
  check_lengths(p1.size(), p2.size());
  if (cut > p1.size()) throw SizeError("cut point out of range");
  BinaryState c1 = p1, c2 = p2;
  for (std::size_t i = cut; i < p1.size(); ++i) std::swap(c1[i], c2[i]);
  return {std::move(c1), std::move(c2)};
}

// Swaps the segment [cut1, cut2).
inline Children<BinaryState> crossover_two_point(const BinaryState& p1, const BinaryState& p2,
                                                 std::size_t cut1, std::size_t cut2) {
  check_lengths(p1.size(), p2.size());
  if (cut1 > cut2 || cut2 > p1.size()) throw SizeError("cut points out of range");
  BinaryState c1 = p1, c2 = p2;
  for (std::size_t i = cut1; i < cut2; ++i) std::swap(c1[i], c2[i]);
  return {std::move(c1), std::move(c2)};
}

inline Children<BinaryState> crossover_uniform(const BinaryState& p1, const BinaryState& p2,
                                               Rng& rng) {
  check_lengths(p1.size(), p2.size());
  BinaryState c1 = p1, c2 = p2;
  for (std::size_t i = 0; i < p1.size(); ++i)
    if (rng.chance(0.5)) std::swap(c1[i], c2[i]);
  return {std::move(c1), std::move(c2)};
}

// Differential-evolution style: a run starting at a uniform index, extended
// with probability 0.5 per step (wrapping), is taken from the other parent.
inline Children<BinaryState> crossover_exponential(const BinaryState& p1, const BinaryState& p2,
                                                   Rng& rng) {
  check_lengths(p1.size(), p2.size());
  BinaryState c1 = p1, c2 = p2;
  const std::size_t n = p1.size();
  if (n == 0) return {std::move(c1), std::move(c2)};
  std::size_t i = rng.below(n);
  std::size_t len = 0;
  do {
    std::swap(c1[i], c2[i]);
    i = (i + 1) % n;
    ++len;
  } while (len < n && rng.chance(0.5));
  return {std::move(c1), std::move(c2)};
}

// ---------------------------------------------------------------------------
// Permutation crossovers.

// The child keeps p1[cut1, cut2) in place; the remaining positions are filled
// left to right with p2's values in p2 order, skipping those already present.
inline PermGenome crossover_order(const PermGenome& p1, const PermGenome& p2, std::size_t cut1,
                                  std::size_t cut2) {
  check_lengths(p1.size(), p2.size());
  const std::size_t n = p1.size();
  if (cut1 >= cut2 || cut2 > n) throw SizeError("order crossover needs 0 <= cut1 < cut2 <= n");
  std::vector<char> used(n + 1, 0);
  PermGenome child(n, 0);
  for (std::size_t i = cut1; i < cut2; ++i) {
    child[i] = p1[i];
    used[static_cast<std::size_t>(p1[i])] = 1;
  }
  std::size_t pos = 0;
  for (int v : p2) {
    if (used[static_cast<std::size_t>(v)]) continue;
    if (pos == cut1) pos = cut2;
    child[pos++] = v;
  }
  return child;
}

// Whitley edge recombination. `on_step` (optional) observes each move as
// (from, to, adjacency_was_nonempty) for instrumentation.
inline PermGenome crossover_edge_recombination(
    const PermGenome& p1, const PermGenome& p2, Rng& rng,
    const std::function<void(int, int, bool)>& on_step = {}) {
  check_lengths(p1.size(), p2.size());
  const std::size_t n = p1.size();
  if (n == 0) return {};
  std::vector<std::vector<int>> adj(n + 1);
  auto link = [&](int a, int b) {
    if (a == b) return;
    auto& v = adj[static_cast<std::size_t>(a)];
    if (std::find(v.begin(), v.end(), b) == v.end()) v.push_back(b);
  };
  for (const auto* p : {&p1, &p2})
    for (std::size_t i = 0; i < n; ++i) {
      link((*p)[i], (*p)[(i + 1) % n]);
      link((*p)[i], (*p)[(i + n - 1) % n]);
    }

  std::vector<char> visited(n + 1, 0);
  PermGenome child;
  child.reserve(n);
  int current = p1[0];
  while (true) {
    child.push_back(current);
    visited[static_cast<std::size_t>(current)] = 1;
    for (auto& v : adj) v.erase(std::remove(v.begin(), v.end(), current), v.end());
    if (child.size() == n) break;
    const auto& options = adj[static_cast<std::size_t>(current)];
    int next = 0;
    if (!options.empty()) {
      std::size_t best = std::numeric_limits<std::size_t>::max();
      std::vector<int> ties;
      for (int c : options) {
        const std::size_t d = adj[static_cast<std::size_t>(c)].size();
        if (d < best) {
          best = d;
          ties.assign(1, c);
        } else if (d == best) {
          ties.push_back(c);
        }
      }
      next = ties[rng.below(ties.size())];
    } else {
      std::vector<int> rest;
      for (std::size_t v = 1; v <= n; ++v)
        if (!visited[v]) rest.push_back(static_cast<int>(v));
      next = rest[rng.below(rest.size())];
    }
    if (on_step) on_step(current, next, !options.empty());
    current = next;
  }
  return child;
}

// ---------------------------------------------------------------------------
// Mutations.

inline void mutate_bitflip(BinaryState& x, double rate, Rng& rng) {
  if (rate <= 0.0) return;
  for (auto& b : x)
    if (rate >= 1.0 || rng.chance(rate)) b ^= 1;
}

// Reverses [begin, end).
inline void reverse_segment(PermGenome& p, std::size_t begin, std::size_t end) {
  if (begin > end || end > p.size()) throw SizeError("segment out of range");
  std::reverse(p.begin() + static_cast<std::ptrdiff_t>(begin),
               p.begin() + static_cast<std::ptrdiff_t>(end));
}

inline void mutate_inverse(PermGenome& p, double rate, Rng& rng) {
  if (p.size() < 2 || rate <= 0.0) return;
  if (rate < 1.0 && !rng.chance(rate)) return;
  std::size_t a = rng.below(p.size());
  std::size_t b = rng.below(p.size());
  if (a > b) std::swap(a, b);
  reverse_segment(p, a, b + 1);
}

// ---------------------------------------------------------------------------

// Removes genome-equal members (keeping first occurrences), then refills to
// `target` distinct members from `fresh` with bounded retries, then from
// `random_genome`. Gives up (returning fewer) only if the genome space is too
// small to hold `target` distinct members.
template <typename G>
std::vector<G> eliminate_duplicates(std::vector<G> pop, std::size_t target,
                                    const std::function<G()>& fresh,
                                    const std::function<G()>& random_genome,
                                    const std::set<G>& exclude = {}) {
  std::set<G> seen = exclude;
  std::vector<G> out;
  out.reserve(target);
  for (auto& g : pop) {
    if (out.size() == target) break;
    if (seen.insert(g).second) out.push_back(std::move(g));
  }
  const std::size_t max_tries = 100 * std::max<std::size_t>(1, target);
  for (std::size_t tries = 0; out.size() < target && fresh && tries < max_tries; ++tries) {
    G g = fresh();
    if (seen.insert(g).second) out.push_back(std::move(g));
  }
  for (std::size_t tries = 0; out.size() < target && tries < max_tries; ++tries) {
    G g = random_genome();
    if (seen.insert(g).second) out.push_back(std::move(g));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fitness (minimised).

// f(x) plus a capacity-excess penalty that makes every infeasible selection
// worse than every feasible one.
inline double mkp_penalized_fitness(const MkpInstance& inst, const BinaryState& x) {
  std::int64_t penalty_unit = 1;
  for (auto p : inst.profits) penalty_unit += p;
  const auto load = mkp_loads(inst, x);
  std::int64_t excess = 0;
  for (std::size_t k = 0; k < load.size(); ++k) excess += std::max<std::int64_t>(0, load[k] - inst.capacities[k]);
  return static_cast<double>(mkp_objective(inst, x) + excess * penalty_unit);
}

namespace detail {

template <typename G>
struct Individual {
  G genome;
  double fitness;
};

template <typename G, typename Fitness, typename RandomGenome, typename Vary>
RunResult run_ga(const GaConfig& cfg, Fitness&& fitness, RandomGenome&& random_genome,
                 Vary&& vary) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  Rng rng(mix_seed(cfg.seed, 0x6761ULL));
  const std::size_t p = cfg.population_size;

  std::function<G()> rand_fn = [&] { return random_genome(rng); };
  std::vector<G> genomes;
  for (std::size_t i = 0; i < p; ++i) genomes.push_back(rand_fn());
  if (cfg.eliminate_duplicates) genomes = eliminate_duplicates<G>(std::move(genomes), p, {}, rand_fn);

  std::vector<Individual<G>> pop;
  auto evaluate = [&](std::vector<G>&& gs) {
    std::vector<Individual<G>> out;
    out.reserve(gs.size());
    for (auto& g : gs) {
      const double f = fitness(g);
      out.push_back({std::move(g), f});
    }
    return out;
  };
  pop = evaluate(std::move(genomes));

  RunResult result;
  result.best_energy = std::numeric_limits<double>::infinity();
  G best;
  std::uint64_t generation = 0;
  auto update_best = [&] {
    for (const auto& ind : pop)
      if (ind.fitness < result.best_energy) {
        result.best_energy = ind.fitness;
        best = ind.genome;
        result.time_to_best = elapsed();
      }
  };
  update_best();

  auto done = [&] {
    if (cfg.target_fitness && result.best_energy <= *cfg.target_fitness) return true;
    if (cfg.generation_limit && generation >= *cfg.generation_limit) return true;
    return elapsed() >= cfg.time_limit;
  };

  std::vector<G> offspring;
  std::uint64_t last_improvement = 0;
  while (!done()) {
    if (cfg.stagnation_restart && generation - last_improvement >= cfg.stagnation_restart) {
      std::vector<G> fresh{best};
      while (fresh.size() < p) fresh.push_back(rand_fn());
      if (cfg.eliminate_duplicates) fresh = eliminate_duplicates<G>(std::move(fresh), p, {}, rand_fn);
      pop = evaluate(std::move(fresh));
      last_improvement = generation;
    }
    auto make_pair = [&]() -> Children<G> {
      const auto& a = pop[rng.below(pop.size())].genome;
      const auto& b = pop[rng.below(pop.size())].genome;
      Children<G> kids = rng.chance(cfg.crossover_rate) ? vary.cross(a, b, rng) : Children<G>{a, b};
      vary.mutate(kids.first, rng);
      vary.mutate(kids.second, rng);
      return kids;
    };
    offspring.clear();
    while (offspring.size() < p) {
      auto kids = make_pair();
      offspring.push_back(std::move(kids.first));
      if (offspring.size() < p) offspring.push_back(std::move(kids.second));
    }
    if (cfg.eliminate_duplicates) {
      std::set<G> exclude;
      if (cfg.survival == Survival::elitist)
        for (const auto& ind : pop) exclude.insert(ind.genome);
      std::function<G()> fresh = [&] { return make_pair().first; };
      offspring = eliminate_duplicates<G>(std::move(offspring), p, fresh, rand_fn, exclude);
    }
    auto children = evaluate(std::move(offspring));
    offspring = {};
    if (cfg.survival == Survival::elitist) {
      for (auto& c : children) pop.push_back(std::move(c));
      std::stable_sort(pop.begin(), pop.end(),
                       [](const auto& x, const auto& y) { return x.fitness < y.fitness; });
      pop.resize(p);
    } else {
      pop = std::move(children);
    }
    ++generation;
    const double before = result.best_energy;
    update_best();
    if (result.best_energy < before) last_improvement = generation;
  }

  result.iterations = generation;
  result.attempts_completed = 1;
  result.elapsed = elapsed();
  if constexpr (std::is_same_v<G, BinaryState>) {
    result.best_state = best;
    result.decoded = NaturalSolution(best);
  } else {
    result.decoded = NaturalSolution(Permutation(best));
  }
  return result;
}

struct BinaryVariation {
  Crossover kind;
  double mutation_rate;

  Children<BinaryState> cross(const BinaryState& a, const BinaryState& b, Rng& rng) const {
    const std::size_t n = a.size();
    switch (kind) {
      case Crossover::one_point: return crossover_one_point(a, b, rng.below(n + 1));
      case Crossover::two_point: {
        std::size_t c1 = rng.below(n + 1), c2 = rng.below(n + 1);
        if (c1 > c2) std::swap(c1, c2);
        return crossover_two_point(a, b, c1, c2);
      }
      case Crossover::uniform: return crossover_uniform(a, b, rng);
      case Crossover::exponential: return crossover_exponential(a, b, rng);
      default: throw ConfigError("not a binary crossover");
    }
  }
  void mutate(BinaryState& x, Rng& rng) const { mutate_bitflip(x, mutation_rate, rng); }
};

struct PermutationVariation {
  Crossover kind;
  double mutation_rate;

  Children<PermGenome> cross(const PermGenome& a, const PermGenome& b, Rng& rng) const {
    if (kind == Crossover::order) {
      const std::size_t n = a.size();
      if (n < 2) return {a, b};
      std::size_t c1 = rng.below(n), c2 = rng.below(n);
      if (c1 > c2) std::swap(c1, c2);
      ++c2;
      return {crossover_order(a, b, c1, c2), crossover_order(b, a, c1, c2)};
    }
    if (kind == Crossover::edge_recombination)
      return {crossover_edge_recombination(a, b, rng), crossover_edge_recombination(b, a, rng)};
    throw ConfigError("not a permutation crossover");
  }
  void mutate(PermGenome& p, Rng& rng) const { mutate_inverse(p, mutation_rate, rng); }
};

inline PermGenome random_permutation(std::size_t n, Rng& rng) {
  PermGenome p(n);
  std::iota(p.begin(), p.end(), 1);
  rng.shuffle(p.begin(), p.end());
  return p;
}

}  // namespace detail

inline RunResult evolve(const ProblemInstance& problem, const GaConfig& cfg) {
  return std::visit(
      [&](const auto& inst) -> RunResult {
        using T = std::decay_t<decltype(inst)>;
        inst.validate();
        if constexpr (std::is_same_v<T, MkpInstance>) {
          cfg.validate(false);
          const std::size_t n = inst.items();
          auto r = detail::run_ga<BinaryState>(
              cfg, [&](const BinaryState& x) { return mkp_penalized_fitness(inst, x); },
              [n](Rng& rng) {
                BinaryState x(n);
                for (auto& b : x) b = static_cast<Bit>(rng.below(2));
                return x;
              },
              detail::BinaryVariation{cfg.crossover, cfg.mutation_rate});
          r.feasible = mkp_feasible(inst, r.best_state);
          if (r.feasible) r.objective = mkp_objective(inst, r.best_state);
          return r;
        } else {
          cfg.validate(true);
          const std::size_t n = [&] {
            if constexpr (std::is_same_v<T, QapInstance>) return inst.size();
            else return inst.cities();
          }();
          auto r = detail::run_ga<PermGenome>(
              cfg,
              [&](const PermGenome& g) {
                const Permutation pi(g);
                if constexpr (std::is_same_v<T, QapInstance>)
                  return static_cast<double>(qap_objective(inst, pi));
                else
                  return static_cast<double>(tsp_objective(inst, pi));
              },
              [n](Rng& rng) { return detail::random_permutation(n, rng); },
              detail::PermutationVariation{cfg.crossover, cfg.mutation_rate});
          r.feasible = true;
          r.objective = static_cast<std::int64_t>(r.best_energy);
          return r;
        }
      },
      problem);
}

}  // namespace qopt
