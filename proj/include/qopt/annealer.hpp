#pragma once

// Software emulation of the first-generation Digital Annealer: every
// iteration evaluates all single-bit flips against the current state in
// parallel, records each flip that passes its own Metropolis test relative to
// an escape offset, and applies one recorded flip chosen uniformly. When no
// flip is recorded the offset grows by offset_increase_rate.
//
// num_run * num_group independent attempts are stepped round-robin. An attempt
// restarts from a fresh random state when its epoch budget (scaled by
// restart_interval_scale) runs out or after no_improvement_cutoff iterations
// without improving on the epoch's best energy.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qopt/encoders.hpp"
#include "qopt/errors.hpp"
#include "qopt/problems.hpp"
#include "qopt/qubo.hpp"
#include "qopt/random.hpp"
#include "qopt/result.hpp"

namespace qopt {

struct DaConfig {
  // Unset temperatures and offset rate are derived from the QUBO; see resolve().
  std::optional<double> initial_temperature;
  std::optional<double> final_temperature;
  double decay_factor = 0.97;
  std::uint64_t temperature_interval = 0;  // 0 means "QUBO size"
  std::optional<double> offset_increase_rate;
  int num_run = 16;
  int num_group = 1;
  int restart_interval_scale = 5;             // gs_level, 0..100
  std::int64_t no_improvement_cutoff = 8000;  // gs_cutoff, 0..1e6; 0 disables
  double time_limit = 1.0;                    // seconds
  std::uint64_t seed = 0;

  // Emulator controls with no hardware counterpart.
  std::optional<std::uint64_t> iteration_limit;  // per attempt
  std::optional<double> target_energy;           // stop once reached
  std::uint64_t trace_every = 0;                 // sample best energy every k iterations of attempt 0

  int attempts() const { return num_run * num_group; }

  void validate() const {
    if (!(time_limit > 0.0)) throw ConfigError("time_limit must be positive");
    if (num_run < 1 || num_run > 16) throw ConfigError("num_run must be in 1..16");
    if (num_group < 1 || num_group > 16) throw ConfigError("num_group must be in 1..16");
    if (restart_interval_scale < 0 || restart_interval_scale > 100)
      throw ConfigError("restart_interval_scale (gs_level) must be in 0..100");
    if (no_improvement_cutoff < 0 || no_improvement_cutoff > 1'000'000)
      throw ConfigError("no_improvement_cutoff (gs_cutoff) must be in 0..1000000");
    if (!(decay_factor > 0.0 && decay_factor < 1.0))
      throw ConfigError("decay_factor must be in (0, 1)");
    if (initial_temperature && !(*initial_temperature > 0.0))
      throw ConfigError("initial_temperature must be positive");
    if (final_temperature && !(*final_temperature > 0.0))
      throw ConfigError("final_temperature must be positive");
    if (initial_temperature && final_temperature && *final_temperature > *initial_temperature)
      throw ConfigError("final_temperature must not exceed initial_temperature");
    if (offset_increase_rate && !(*offset_increase_rate >= 0.0))
      throw ConfigError("offset_increase_rate must be nonnegative");
  }
};

// Fully determined schedule parameters for one QUBO.
struct DaSchedule {
  double initial_temperature;
  double final_temperature;
  double decay_factor;
  std::uint64_t temperature_interval;
  double offset_increase_rate;
  std::uint64_t epoch_iterations;
};

// P_j = exp(min(0, -(delta_e - e_offset) / T))
inline double accept_probability(double delta_e, double e_offset, double temperature) {
  if (!(temperature > 0.0)) throw ConfigError("temperature must be positive");
  const double excess = delta_e - e_offset;
  if (excess <= 0.0) return 1.0;
  return std::exp(-excess / temperature);
}

inline double temperature_at(std::uint64_t iteration, const DaSchedule& s) {
  const double steps = static_cast<double>(iteration / s.temperature_interval);
  return std::max(s.final_temperature, s.initial_temperature * std::pow(s.decay_factor, steps));
}

namespace detail {

// Mean uphill |dE| seen on a 100-step random walk, floored by the largest
// diagonal magnitude scaled down so that flat landscapes still get T > 0.
inline double estimate_initial_temperature(const Couplings& s, std::uint64_t seed) {
  const std::size_t m = s.size();
  double max_diag = 0.0;
  for (std::size_t j = 0; j < m; ++j) max_diag = std::max(max_diag, std::abs(s.diagonal(j)));
  Rng rng(mix_seed(seed, 0xfeedULL));
  BinaryState x(m);
  for (auto& b : x) b = static_cast<Bit>(rng.below(2));
  FieldCache cache(std::shared_ptr<const Couplings>(&s, [](const Couplings*) {}), x);
  double uphill = 0.0;
  int count = 0;
  for (int step = 0; step < 100; ++step) {
    const std::size_t j = rng.below(m);
    const double d = cache.delta(x, j);
    if (d > 0.0) {
      uphill += d;
      ++count;
    }
    cache.apply_flip(x, j);
  }
  double t = count ? uphill / count : 0.0;
  if (!(t > 0.0)) t = max_diag;
  if (!(t > 0.0)) t = 1.0;
  return t;
}

}  // namespace detail

inline DaSchedule resolve(const DaConfig& cfg, const Couplings& s) {
  cfg.validate();
  DaSchedule out{};
  out.initial_temperature = cfg.initial_temperature
                                ? *cfg.initial_temperature
                                : detail::estimate_initial_temperature(s, cfg.seed);
  out.final_temperature =
      cfg.final_temperature ? *cfg.final_temperature : out.initial_temperature * 1e-3;
  out.final_temperature = std::min(out.final_temperature, out.initial_temperature);
  out.decay_factor = cfg.decay_factor;
  out.temperature_interval =
      cfg.temperature_interval ? cfg.temperature_interval : std::max<std::uint64_t>(1, s.size());
  out.offset_increase_rate =
      cfg.offset_increase_rate ? *cfg.offset_increase_rate : out.initial_temperature / 100.0;
  // One epoch lasts long enough to cool from the initial to the final
  // temperature, times (gs_level + 1) / 2; gs_level 0 halves it.
  const double cool_steps =
      std::ceil(std::log(out.final_temperature / out.initial_temperature) / std::log(out.decay_factor));
  const double base = std::max(1.0, cool_steps) * static_cast<double>(out.temperature_interval);
  out.epoch_iterations = static_cast<std::uint64_t>(
      std::max(1.0, base * (cfg.restart_interval_scale + 1) / 2.0));
  return out;
}

// Constraint hook for feasibility-preserving search. allows(x, j) says whether
// flipping bit j keeps the state feasible; on_flip(x, j) is called after a flip
// is applied (x already updated).
struct NoConstraint {
  bool allows(const BinaryState&, std::size_t) const { return true; }
  void on_flip(const BinaryState&, std::size_t) {}
  void reset(const BinaryState&) {}
};

// Resource loads for inequality-mode MKP.
class KnapsackGuard {
 public:
  explicit KnapsackGuard(const MkpInstance& inst) : inst_(&inst), load_(inst.constraints(), 0) {}

  bool allows(const BinaryState& x, std::size_t j) const {
    if (x[j]) return true;
    const auto& w = inst_->weights[j];
    for (std::size_t k = 0; k < load_.size(); ++k)
      if (load_[k] + w[k] > inst_->capacities[k]) return false;
    return true;
  }

  void on_flip(const BinaryState& x, std::size_t j) {
    const auto& w = inst_->weights[j];
    const std::int64_t sign = x[j] ? 1 : -1;
    for (std::size_t k = 0; k < load_.size(); ++k) load_[k] += sign * w[k];
  }

  void reset(const BinaryState& x) { load_ = mkp_loads(*inst_, x); }

  const std::vector<std::int64_t>& loads() const noexcept { return load_; }

 private:
  const MkpInstance* inst_;
  std::vector<std::int64_t> load_;
};

enum class StartState { random, zeros };

namespace detail {

template <typename Guard>
class Attempt {
 public:
  Attempt(std::shared_ptr<const Couplings> couplings, double offset, const DaSchedule& schedule,
          std::int64_t cutoff, std::uint64_t seed, StartState start, Guard guard)
      : schedule_(schedule),
        cutoff_(cutoff),
        start_(start),
        rng_(seed),
        offset_(offset),
        x_(couplings->size(), 0),
        cache_(couplings, x_),
        guard_(std::move(guard)) {
    restart();
    best_energy_ = epoch_best_;
    best_state_ = x_;
  }

  // Runs up to `count` iterations; returns the number executed before either the
  // count or the target energy was reached.
  std::uint64_t step(std::uint64_t count, std::optional<double> target,
                     const std::chrono::steady_clock::time_point& t0) {
    const std::size_t m = x_.size();
    std::uint64_t done = 0;
    for (; done < count; ++done) {
      if (target && best_energy_ <= *target) break;
      const double temperature = temperature_at(epoch_iteration_, schedule_);
      // exp(-38) is below the resolution of uniform(); such flips are rejected
      // without a draw.
      const double hopeless = 38.0 * temperature;
      recorded_.clear();
      for (std::size_t j = 0; j < m; ++j) {
        const double excess = cache_.delta(x_, j) - e_offset_;
        if (excess > 0.0) {
          if (excess >= hopeless) continue;
          const double u = rng_.uniform();
          if (!(u < std::exp(-excess / temperature))) continue;
        }
        if (guard_.allows(x_, j)) recorded_.push_back(j);
      }
      if (!recorded_.empty()) {
        const std::size_t j = recorded_[rng_.below(recorded_.size())];
        current_ += cache_.delta(x_, j);
        cache_.apply_flip(x_, j);
        guard_.on_flip(x_, j);
        e_offset_ = 0.0;
      } else {
        e_offset_ += schedule_.offset_increase_rate;
      }
      ++iterations_;
      ++epoch_iteration_;
      if (current_ < epoch_best_) {
        epoch_best_ = current_;
        since_improvement_ = 0;
        if (current_ < best_energy_) {
          best_energy_ = current_;
          best_state_ = x_;
          best_iteration_ = iterations_;
          best_time_ = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
      } else {
        ++since_improvement_;
      }
      if (epoch_iteration_ >= schedule_.epoch_iterations ||
          (cutoff_ > 0 && since_improvement_ >= static_cast<std::uint64_t>(cutoff_)))
        restart();
    }
    return done;
  }

  double best_energy() const noexcept { return best_energy_; }
  const BinaryState& best_state() const noexcept { return best_state_; }
  double best_time() const noexcept { return best_time_; }
  std::uint64_t iterations() const noexcept { return iterations_; }
  double current_energy() const noexcept { return current_; }
  double e_offset() const noexcept { return e_offset_; }
  const BinaryState& state() const noexcept { return x_; }
  const FieldCache& cache() const noexcept { return cache_; }
  const Guard& guard() const noexcept { return guard_; }

 private:
  void restart() {
    if (start_ == StartState::random)
      for (auto& b : x_) b = static_cast<Bit>(rng_.below(2));
    else
      std::fill(x_.begin(), x_.end(), Bit{0});
    cache_.recompute(x_);
    guard_.reset(x_);
    current_ = offset_;
    const auto& s = cache_.couplings();
    // Energy from scratch via the fields: E = q + sum_j x_j (S_jj + h_j) / 2.
    for (std::size_t j = 0; j < x_.size(); ++j)
      if (x_[j]) current_ += 0.5 * (s.diagonal(j) + cache_.field(j));
    e_offset_ = 0.0;
    epoch_iteration_ = 0;
    since_improvement_ = 0;
    epoch_best_ = current_;
  }

  DaSchedule schedule_;
  std::int64_t cutoff_;
  StartState start_;
  Rng rng_;
  double offset_;
  BinaryState x_;
  FieldCache cache_;
  Guard guard_;
  std::vector<std::size_t> recorded_;
  double current_ = 0.0;
  double e_offset_ = 0.0;
  double epoch_best_ = 0.0;
  double best_energy_ = std::numeric_limits<double>::infinity();
  BinaryState best_state_;
  double best_time_ = 0.0;
  std::uint64_t iterations_ = 0;
  std::uint64_t best_iteration_ = 0;
  std::uint64_t epoch_iteration_ = 0;
  std::uint64_t since_improvement_ = 0;
};

template <typename Guard>
RunResult run_attempts(const QuboMatrix& q, const DaConfig& cfg, StartState start,
                       const Guard& guard_template) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  auto couplings = std::make_shared<const Couplings>(q);
  const DaSchedule schedule = resolve(cfg, *couplings);

  std::vector<Attempt<Guard>> attempts;
  attempts.reserve(static_cast<std::size_t>(cfg.attempts()));
  for (int a = 0; a < cfg.attempts(); ++a)
    attempts.emplace_back(couplings, q.offset(), schedule, cfg.no_improvement_cutoff,
                          mix_seed(cfg.seed, static_cast<std::uint64_t>(a)), start, guard_template);

  RunResult result;
  const std::uint64_t chunk = std::max<std::uint64_t>(16, 4096 / std::max<std::size_t>(1, q.size()));
  const auto deadline = t0 + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                 std::chrono::duration<double>(cfg.time_limit));
  auto reached_target = [&] {
    if (!cfg.target_energy) return false;
    for (const auto& a : attempts)
      if (a.best_energy() <= *cfg.target_energy) return true;
    return false;
  };

  bool running = true;
  while (running) {
    bool any_active = false;
    for (std::size_t a = 0; a < attempts.size() && running; ++a) {
      auto& att = attempts[a];
      std::uint64_t budget = chunk;
      if (cfg.iteration_limit) {
        if (att.iterations() >= *cfg.iteration_limit) continue;
        budget = std::min(budget, *cfg.iteration_limit - att.iterations());
      }
      any_active = true;
      if (a == 0 && cfg.trace_every) {
        for (std::uint64_t left = budget; left > 0;) {
          const std::uint64_t to_mark = cfg.trace_every - att.iterations() % cfg.trace_every;
          const std::uint64_t n = std::min(left, to_mark);
          att.step(n, cfg.target_energy, t0);
          left -= n;
          if (att.iterations() % cfg.trace_every == 0)
            result.trace.push_back(
                {std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(),
                 att.iterations(), att.best_energy()});
          if (cfg.target_energy && att.best_energy() <= *cfg.target_energy) break;
        }
      } else {
        att.step(budget, cfg.target_energy, t0);
      }
      if (reached_target() || std::chrono::steady_clock::now() >= deadline) running = false;
    }
    if (!any_active) running = false;
  }

  std::size_t best = 0;
  for (std::size_t a = 1; a < attempts.size(); ++a)
    if (attempts[a].best_energy() < attempts[best].best_energy()) best = a;
  result.best_energy = attempts[best].best_energy();
  result.best_state = attempts[best].best_state();
  result.time_to_best = attempts[best].best_time();
  result.attempts_completed = attempts.size();
  for (const auto& a : attempts) result.iterations += a.iterations();
  result.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace detail

// Anneals an arbitrary QUBO. feasible is always true and decoded is empty;
// problem-aware wrappers below fill them in.
inline RunResult anneal(const QuboMatrix& q, const DaConfig& cfg) {
  if (q.size() == 0) throw ConfigError("cannot anneal an empty QUBO");
  auto r = detail::run_attempts(q, cfg, StartState::random, NoConstraint{});
  r.feasible = true;
  return r;
}

// Anneals Q = C + alpha G and decodes the best state.
inline RunResult anneal_encoded(const EncodedProblem& enc, const ProblemInstance& problem,
                                const DaConfig& cfg) {
  auto r = anneal(enc.combined(), cfg);
  r.feasible = energy(enc.constraint, r.best_state) == 0.0;
  r.decoded = decode(enc.decoder, r.best_state);
  if (r.decoded) {
    std::visit(
        [&](const auto& inst) {
          using T = std::decay_t<decltype(inst)>;
          if constexpr (std::is_same_v<T, MkpInstance>) {
            const auto& items = std::get<BinaryState>(*r.decoded);
            r.feasible = r.feasible && mkp_feasible(inst, items);
            if (r.feasible) r.objective = mkp_objective(inst, items);
          } else if constexpr (std::is_same_v<T, QapInstance>) {
            r.objective = qap_objective(inst, std::get<Permutation>(*r.decoded));
          } else {
            r.objective = tsp_objective(inst, std::get<Permutation>(*r.decoded));
          }
        },
        problem);
  } else {
    r.feasible = false;
  }
  return r;
}

// MKP with capacities enforced during search instead of through slack
// penalties. c must be the item-bit cost QUBO (size n). Every attempt starts
// from the empty selection and never visits an infeasible state.
inline RunResult anneal_with_inequalities(const QuboMatrix& c, const MkpInstance& inst,
                                          const DaConfig& cfg) {
  inst.validate();
  if (c.size() != inst.items()) throw SizeError("cost QUBO size must equal the item count");
  auto r = detail::run_attempts(c, cfg, StartState::zeros, KnapsackGuard(inst));
  r.decoded = NaturalSolution(r.best_state);
  r.feasible = mkp_feasible(inst, r.best_state);
  if (r.feasible) r.objective = mkp_objective(inst, r.best_state);
  return r;
}

}  // namespace qopt
