#pragma once

// Seeded, time-limited trials of either solver, summary statistics and the
// comparison report (CSV or aligned text).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "qopt/annealer.hpp"
#include "qopt/encoders.hpp"
#include "qopt/genetic.hpp"
#include "qopt/problems.hpp"
#include "qopt/random.hpp"
#include "qopt/stats.hpp"

namespace qopt {

enum class SolverKind { da, ga };
enum class MkpMode { slack, inequality };

inline std::string to_string(SolverKind s) { return s == SolverKind::da ? "DA" : "GA"; }

struct SolverSpec {
  SolverKind kind = SolverKind::da;
  DaConfig da;
  GaConfig ga;
  MkpMode mkp_mode = MkpMode::inequality;
  bool stop_at_optimum = false;  // end a run as soon as the known optimum is found
};

// Sign flip between the minimised internal objective and the reported value:
// MKP profit is reported positive, QAP/TSP as-is.
inline double reported_value(Family f, double internal) { return f == Family::mkp ? -internal : internal; }

// One solver run with the given limit and seed; the instance is encoded here
// when the annealer needs a QUBO.
class Solver {
 public:
  Solver(const ProblemInstance& problem, SolverSpec spec) : problem_(problem), spec_(std::move(spec)) {
    if (spec_.kind == SolverKind::da) {
      const auto* mkp = std::get_if<MkpInstance>(&problem_);
      if (mkp && spec_.mkp_mode == MkpMode::inequality) encoded_ = mkp_encode_items(*mkp);
      else encoded_ = encode(problem_);
    }
  }

  RunResult run(double time_limit, std::uint64_t seed) const {
    const auto opt = known_optimum(problem_);
    if (spec_.kind == SolverKind::ga) {
      GaConfig cfg = spec_.ga;
      cfg.time_limit = time_limit;
      cfg.seed = seed;
      if (spec_.stop_at_optimum && opt) cfg.target_fitness = static_cast<double>(internal_optimum(*opt));
      return evolve(problem_, cfg);
    }
    DaConfig cfg = spec_.da;
    cfg.time_limit = time_limit;
    cfg.seed = seed;
    if (spec_.stop_at_optimum && opt) cfg.target_energy = static_cast<double>(internal_optimum(*opt));
    const auto* mkp = std::get_if<MkpInstance>(&problem_);
    if (mkp && spec_.mkp_mode == MkpMode::inequality)
      return anneal_with_inequalities(encoded_->cost, *mkp, cfg);
    return anneal_encoded(*encoded_, problem_, cfg);
  }

  const std::optional<EncodedProblem>& encoded() const noexcept { return encoded_; }

 private:
  // Catalog optima are in reported units (MKP profit positive).
  std::int64_t internal_optimum(std::int64_t reported) const {
    return family_of(problem_) == Family::mkp ? -reported : reported;
  }

  const ProblemInstance& problem_;
  SolverSpec spec_;
  std::optional<EncodedProblem> encoded_;
};

struct Trial {
  std::optional<double> value;  // reported units, set only for feasible runs
  bool feasible = false;
  double time_to_best = 0.0;
  double elapsed = 0.0;

  friend bool operator==(const Trial&, const Trial&) = default;
};

struct TrialSet {
  std::string instance;
  Family family = Family::tsp;
  SolverKind solver = SolverKind::da;
  double time_limit = 1.0;
  std::optional<std::int64_t> optimum;
  std::vector<Trial> trials;

  std::size_t reps() const noexcept { return trials.size(); }

  std::vector<double> values() const {
    std::vector<double> v;
    for (const auto& t : trials)
      if (t.feasible && t.value) v.push_back(*t.value);
    return v;
  }

  // Equal apart from wall-clock measurements.
  bool same_outcome(const TrialSet& o) const {
    if (instance != o.instance || family != o.family || solver != o.solver ||
        time_limit != o.time_limit || optimum != o.optimum || trials.size() != o.trials.size())
      return false;
    for (std::size_t i = 0; i < trials.size(); ++i)
      if (trials[i].value != o.trials[i].value || trials[i].feasible != o.trials[i].feasible) return false;
    return true;
  }
};

inline std::uint64_t trial_seed(std::uint64_t master, std::size_t rep) {
  return mix_seed(master, static_cast<std::uint64_t>(rep));
}

inline TrialSet run_trials(const ProblemInstance& problem, const SolverSpec& spec, double time_limit,
                           std::size_t reps, std::uint64_t master_seed) {
  if (reps < 1) throw ConfigError("reps must be at least 1");
  const Solver solver(problem, spec);
  TrialSet set;
  set.instance = instance_name(problem);
  set.family = family_of(problem);
  set.solver = spec.kind;
  set.time_limit = time_limit;
  set.optimum = known_optimum(problem);
  for (std::size_t rep = 0; rep < reps; ++rep) {
    RunResult r;
    try {
      r = solver.run(time_limit, trial_seed(master_seed, rep));
    } catch (const std::exception& e) {
      throw std::runtime_error("trial " + std::to_string(rep) + ": " + e.what());
    }
    Trial t;
    t.feasible = r.feasible && r.objective.has_value();
    if (t.feasible) t.value = reported_value(set.family, static_cast<double>(*r.objective));
    t.time_to_best = r.time_to_best;
    t.elapsed = r.elapsed;
    set.trials.push_back(t);
  }
  return set;
}

// ---------------------------------------------------------------------------
// Reporting

struct ReportRow {
  std::string instance;
  Family family = Family::tsp;
  SolverKind solver = SolverKind::da;
  double time_limit = 0.0;
  std::size_t reps = 0;
  std::size_t feasible = 0;
  std::optional<Summary> summary;
  std::optional<double> best;
  std::optional<std::int64_t> optimum;
  bool reached_optimum = false;  // every run hit the optimum
  std::optional<double> t_stat;
  std::optional<double> p_value;
  bool significant = false;  // this side is significantly better than the other
};

inline bool maximising(Family f) { return f == Family::mkp; }

inline std::vector<ReportRow> build_report(const std::vector<TrialSet>& sets) {
  std::vector<ReportRow> rows;
  for (const auto& s : sets) {
    ReportRow r;
    r.instance = s.instance;
    r.family = s.family;
    r.solver = s.solver;
    r.time_limit = s.time_limit;
    r.reps = s.reps();
    r.optimum = s.optimum;
    const auto v = s.values();
    r.feasible = v.size();
    if (!v.empty()) {
      r.summary = summarize(v);
      r.best = maximising(s.family) ? *std::max_element(v.begin(), v.end())
                                    : *std::min_element(v.begin(), v.end());
      r.reached_optimum = r.optimum && v.size() == s.reps() &&
                          std::all_of(v.begin(), v.end(), [&](double x) { return x == *r.optimum; });
    }
    // Compare against the other solver at the same instance and limit.
    for (const auto& o : sets) {
      if (&o == &s || o.instance != s.instance || o.time_limit != s.time_limit || o.solver == s.solver)
        continue;
      const auto w = o.values();
      if (v.size() < 2 || w.size() < 2) break;
      const auto c = t_test(v, w);
      r.t_stat = c.t;
      r.p_value = c.p;
      const bool better = maximising(s.family) ? c.t > 0 : c.t < 0;
      r.significant = c.significant && better;
      break;
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

namespace detail {

inline std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream s;
  if (v == std::floor(v) && std::abs(v) < 1e15) s << static_cast<std::int64_t>(v);
  else s << std::setprecision(6) << v;
  return s.str();
}

inline std::string grouped(double v) {
  const auto r = static_cast<std::int64_t>(std::llround(v));
  std::string digits = std::to_string(r < 0 ? -r : r);
  for (int i = static_cast<int>(digits.size()) - 3; i > 0; i -= 3) digits.insert(static_cast<std::size_t>(i), ",");
  return (r < 0 ? "-" : "") + digits;
}

}  // namespace detail

inline const char* kCsvHeader =
    "instance,family,solver,time_limit_s,reps,mean,stddev,best,optimum,reached_optimum,t_stat,p_value,significant";

inline std::string report_csv(const std::vector<TrialSet>& sets) {
  std::ostringstream out;
  out << kCsvHeader << '\n';
  for (const auto& r : build_report(sets)) {
    out << r.instance << ',' << to_string(r.family) << ',' << to_string(r.solver) << ','
        << detail::num(r.time_limit) << ',' << r.reps << ',';
    if (r.summary) out << detail::num(r.summary->mean) << ',' << detail::num(r.summary->stddev) << ',';
    else out << ",,";
    out << (r.best ? detail::num(*r.best) : "") << ',' << (r.optimum ? std::to_string(*r.optimum) : "") << ','
        << (r.reached_optimum ? "true" : "false") << ',' << (r.t_stat ? detail::num(*r.t_stat) : "") << ','
        << (r.p_value ? detail::num(*r.p_value) : "") << ',' << (r.significant ? "true" : "false") << '\n';
  }
  return out.str();
}

// Instance rows, one "mean (stddev)" column per solver and limit. Values where
// every run reached the optimum are wrapped in ** **; * marks a significant win.
inline std::string report_text(const std::vector<TrialSet>& sets) {
  const auto rows = build_report(sets);
  std::vector<std::pair<double, SolverKind>> columns;
  std::vector<std::string> instances;
  for (const auto& r : rows) {
    if (std::find(columns.begin(), columns.end(), std::pair{r.time_limit, r.solver}) == columns.end())
      columns.emplace_back(r.time_limit, r.solver);
    if (std::find(instances.begin(), instances.end(), r.instance) == instances.end())
      instances.push_back(r.instance);
  }
  std::sort(columns.begin(), columns.end());

  std::vector<std::vector<std::string>> table;
  std::vector<std::string> head{"Instance", "Optimal"};
  for (const auto& [limit, solver] : columns) head.push_back(to_string(solver) + " (" + detail::num(limit) + "s)");
  table.push_back(head);
  for (const auto& name : instances) {
    std::vector<std::string> line{name, ""};
    for (const auto& [limit, solver] : columns) {
      std::string cell = "-";
      for (const auto& r : rows) {
        if (r.instance != name || r.time_limit != limit || r.solver != solver) continue;
        if (r.optimum) line[1] = detail::grouped(static_cast<double>(*r.optimum));
        if (!r.summary) {
          cell = "infeasible";
          break;
        }
        std::string mean = detail::grouped(r.summary->mean);
        if (r.reached_optimum) mean = "**" + mean + "**";
        cell = mean + " (" + detail::grouped(r.summary->stddev) + ")" + (r.significant ? "*" : "");
      }
      line.push_back(cell);
    }
    table.push_back(line);
  }

  std::vector<std::size_t> width(head.size(), 0);
  for (const auto& line : table)
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
  std::ostringstream out;
  for (std::size_t r = 0; r < table.size(); ++r) {
    for (std::size_t c = 0; c < table[r].size(); ++c) {
      if (c) out << "  ";
      out << std::left << std::setw(static_cast<int>(width[c])) << table[r][c];
    }
    out << '\n';
    if (r == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w;
      out << std::string(total + 2 * (width.size() - 1), '-') << '\n';
    }
  }
  out << "\nMean (sample stddev) over feasible runs. ** all runs optimal; * significantly better\n"
         "than the other solver at the same limit (two-sided Welch t-test, p < 0.05).\n";
  return out.str();
}

enum class ReportFormat { csv, text };

inline std::string emit_report(const std::vector<TrialSet>& sets, ReportFormat format) {
  return format == ReportFormat::csv ? report_csv(sets) : report_text(sets);
}

}  // namespace qopt
