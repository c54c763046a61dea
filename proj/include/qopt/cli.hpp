#pragma once

// Command-line driver: encode, solve-da, solve-ga, bench, tune, verify.
// run_cli is callable in-process; tools/qopt.cpp is a thin main().

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qopt/bench.hpp"
#include "qopt/config.hpp"
#include "qopt/encoders.hpp"
#include "qopt/instances.hpp"
#include "qopt/tuner.hpp"

#ifndef QOPT_DEFAULT_CATALOG
#define QOPT_DEFAULT_CATALOG "data/catalog.txt"
#endif

namespace qopt::cli {

enum Exit : int { ok = 0, infeasible = 1, usage = 2, no_feasible = 3, io = 4 };

struct IoFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Loaded {
  ProblemInstance problem;
  std::optional<InstanceDescriptor> descriptor;
};

inline std::filesystem::path catalog_path(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("QOPT_CATALOG")) return env;
  return QOPT_DEFAULT_CATALOG;
}

inline std::optional<Family> family_from_extension(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".tsp") return Family::tsp;
  if (ext == ".dat") return Family::qap;
  return std::nullopt;
}

// --instance is either a catalog name or a file path.
inline Loaded load(const std::string& instance, const std::string& family_flag, const std::string& catalog) {
  std::optional<Family> family;
  if (!family_flag.empty()) family = parse_family(family_flag);
  if (std::filesystem::exists(instance)) {
    if (!family) family = family_from_extension(instance);
    if (!family) throw CLI::ValidationError("--family", "cannot infer the family of " + instance);
    return {load_problem_file(instance, *family), std::nullopt};
  }
  const auto cat = catalog_path(catalog);
  if (!std::filesystem::exists(cat)) throw IoFailure("no such instance file or catalog: " + instance);
  const auto entries = read_catalog(cat);
  for (const auto& d : entries)
    if (d.name == instance) {
      if (family && *family != d.family)
        throw CLI::ValidationError("--family", instance + " is a " + to_string(d.family) + " instance");
      if (!std::filesystem::exists(d.path)) throw IoFailure("data file for " + instance + " is missing: " + d.path.string());
      return {load_instance(d), d};
    }
  throw IoFailure("unknown instance '" + instance + "' (not a file, not in " + cat.string() + ")");
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot write " + path.string());
  out << text;
  if (!out) throw IoFailure("write failed: " + path.string());
}

inline std::string layout_name(Layout l) {
  switch (l) {
    case Layout::mkp_items: return "mkp_items";
    case Layout::mkp_slack: return "mkp_slack";
    case Layout::permutation: return "permutation";
    case Layout::tour_fixed_first: return "tour_fixed_first";
  }
  return "?";
}

inline nlohmann::json solution_json(const std::optional<NaturalSolution>& s) {
  if (!s) return nullptr;
  if (const auto* bits = std::get_if<BinaryState>(&*s)) {
    std::vector<int> v(bits->begin(), bits->end());
    return v;
  }
  return std::get<Permutation>(*s).order();
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"QUBO encoders, Digital Annealer emulator and GA for MKP, QAP and TSP benchmarks"};
  app.require_subcommand(1);
  std::string catalog;
  app.add_option("--catalog", catalog, "instance catalog file (default: $QOPT_CATALOG or the bundled data)");

  // Shared flag storage; each subcommand registers what it uses.
  std::string instance, family, mode = "inequality", config_file, out_path, format = "text";
  std::string solution_file, solver_name = "ga";
  std::vector<std::string> instances;
  std::vector<double> limits{1.0};
  double time_limit = 1.0;
  std::size_t reps = 20, trials = 30;
  std::optional<std::uint64_t> seed, iterations;
  bool stop_at_optimum = false;
  const std::vector<std::string> families{"mkp", "qap", "tsp"};

  auto add_instance = [&](CLI::App* c, bool required = true) {
    auto* o = c->add_option("--instance", instance, "catalog name or instance file");
    if (required) o->required();
    c->add_option("--family", family, "instance family")->check(CLI::IsMember(families));
  };
  auto add_mode = [&](CLI::App* c) {
    c->add_option("--mode", mode, "MKP constraint handling")->check(CLI::IsMember({"slack", "inequality"}));
  };

  auto* encode_cmd = app.add_subcommand("encode", "write C and G QUBO files plus metadata");
  add_instance(encode_cmd);
  encode_cmd->add_option("--mode", mode, "MKP constraint handling")
      ->check(CLI::IsMember({"slack", "inequality"}))
      ->default_val("slack");
  encode_cmd->add_option("--out", out_path, "output directory")->required();

  auto add_solve = [&](const char* name, const char* help) {
    auto* c = app.add_subcommand(name, help);
    add_instance(c);
    add_mode(c);
    c->add_option("--config", config_file, "key=value config file");
    c->add_option("--time", time_limit, "time limit in seconds")->check(CLI::PositiveNumber);
    c->add_option("--seed", seed, "master seed (drawn and printed when omitted)");
    c->add_option("--iterations", iterations, "per-attempt iteration (DA) or generation (GA) cap");
    c->add_flag("--stop-at-optimum", stop_at_optimum, "stop once the catalog optimum is reached");
    c->add_option("--out", out_path, "write a JSON result record here");
    return c;
  };
  auto* da_cmd = add_solve("solve-da", "run the annealer emulator");
  auto* ga_cmd = add_solve("solve-ga", "run the genetic algorithm");

  auto* bench_cmd = app.add_subcommand("bench", "timed DA vs GA trials with the published parameters");
  bench_cmd->add_option("--instance", instances, "catalog names or files")->required();
  bench_cmd->add_option("--family", family, "instance family")->check(CLI::IsMember(families));
  add_mode(bench_cmd);
  bench_cmd->add_option("--time", limits, "time limits in seconds")->delimiter(',');
  bench_cmd->add_option("--reps", reps, "runs per solver and limit")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--seed", seed, "master seed");
  bench_cmd->add_option("--solver", solver_name, "da, ga or both")->check(CLI::IsMember({"da", "ga", "both"}))->default_val("both");
  bench_cmd->add_option("--format", format, "report format")->check(CLI::IsMember({"csv", "text"}));
  bench_cmd->add_option("--out", out_path, "report file (default: stdout)");

  auto* tune_cmd = app.add_subcommand("tune", "random-search parameter tuning");
  add_instance(tune_cmd);
  add_mode(tune_cmd);
  tune_cmd->add_option("--solver", solver_name, "da or ga")->check(CLI::IsMember({"da", "ga"}));
  tune_cmd->add_option("--trials", trials, "sampled configurations")->check(CLI::PositiveNumber);
  tune_cmd->add_option("--reps", reps, "runs per configuration")->check(CLI::PositiveNumber);
  tune_cmd->add_option("--time", time_limit, "time limit per run")->check(CLI::PositiveNumber);
  tune_cmd->add_option("--seed", seed, "master seed");
  tune_cmd->add_option("--out", out_path, "trial log CSV");

  auto* verify_cmd = app.add_subcommand("verify", "check a natural-form solution");
  add_instance(verify_cmd);
  verify_cmd->add_option("--solution", solution_file, "solution file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? Exit::ok : Exit::usage;
  }

  auto resolved_seed = [&] {
    if (seed) return *seed;
    std::random_device rd;
    const std::uint64_t s = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    out << "seed=" << s << '\n';
    return s;
  };
  const MkpMode mkp_mode = mode == "slack" ? MkpMode::slack : MkpMode::inequality;

  try {
    if (encode_cmd->parsed()) {
      const auto loaded = load(instance, family, catalog);
      const auto& p = loaded.problem;
      const auto* mkp = std::get_if<MkpInstance>(&p);
      const EncodedProblem enc = (mkp && mkp_mode == MkpMode::inequality) ? mkp_encode_items(*mkp) : encode(p);
      const std::filesystem::path dir(out_path);
      std::error_code ec;
      std::filesystem::create_directories(dir, ec);
      if (ec) throw IoFailure("cannot create " + dir.string());
      const std::string name = instance_name(p);
      std::ostringstream c, g;
      write_qubo(enc.cost, c);
      write_qubo(enc.constraint, g);
      write_file(dir / (name + ".C.qubo"), c.str());
      write_file(dir / (name + ".G.qubo"), g.str());
      std::ostringstream meta;
      meta << "name = " << name << '\n'
           << "family = " << to_string(family_of(p)) << '\n'
           << "size = " << enc.size() << '\n'
           << "alpha = " << detail::format_double(enc.alpha) << '\n'
           << "layout = " << layout_name(enc.decoder.layout) << '\n'
           << "n = " << enc.decoder.n << '\n';
      for (const auto& b : enc.decoder.slack.blocks) {
        meta << "slack." << b.constraint << " = " << b.first_bit << ':';
        for (std::size_t j = 0; j < b.coefficients.size(); ++j) meta << (j ? "," : "") << b.coefficients[j];
        meta << '\n';
      }
      write_file(dir / (name + ".meta"), meta.str());
      out << name << ": size " << enc.size() << ", alpha " << detail::format_double(enc.alpha) << ", written to "
          << dir.string() << '\n';
      return Exit::ok;
    }

    if (da_cmd->parsed() || ga_cmd->parsed()) {
      const bool is_da = da_cmd->parsed();
      const auto loaded = load(instance, family, catalog);
      const auto& p = loaded.problem;
      SolverSpec spec;
      spec.kind = is_da ? SolverKind::da : SolverKind::ga;
      spec.mkp_mode = mkp_mode;
      spec.stop_at_optimum = stop_at_optimum;
      const auto name = instance_name(p);
      try {
        const auto paper = load_paper_params(name);
        spec.da = paper.da;
        spec.ga = paper.ga;
      } catch (const std::out_of_range&) {
        if (!is_da && family_of(p) == Family::mkp) {
          spec.ga.crossover = Crossover::uniform;
          spec.ga.mutation = Mutation::bit_flip;
        }
      }
      if (!config_file.empty()) {
        const auto kv = parse_key_values(read_file(config_file));
        if (is_da) spec.da = da_config_from(kv, spec.da);
        else spec.ga = ga_config_from(kv, spec.ga);
      }
      if (iterations) {
        spec.da.iteration_limit = *iterations;
        spec.ga.generation_limit = *iterations;
      }
      const std::uint64_t s = resolved_seed();
      const Solver solver(p, spec);
      const RunResult r = solver.run(time_limit, s);
      const Family fam = family_of(p);
      nlohmann::json rec;
      rec["instance"] = name;
      rec["family"] = to_string(fam);
      rec["solver"] = to_string(spec.kind);
      rec["seed"] = s;
      rec["feasible"] = r.feasible;
      if (r.objective) rec["objective"] = static_cast<std::int64_t>(reported_value(fam, static_cast<double>(*r.objective)));
      else rec["objective"] = nullptr;
      rec["solution"] = solution_json(r.decoded);
      rec["energy"] = r.best_energy;
      rec["iterations"] = r.iterations;
      out << "instance=" << name << " solver=" << to_string(spec.kind) << " seed=" << s << " feasible="
          << (r.feasible ? "true" : "false") << " objective="
          << (r.objective ? std::to_string(static_cast<std::int64_t>(reported_value(fam, static_cast<double>(*r.objective))))
                          : std::string("none"))
          << " time_to_best=" << r.time_to_best << " elapsed=" << r.elapsed << '\n';
      if (!out_path.empty()) write_file(out_path, rec.dump(2) + "\n");
      return r.feasible ? Exit::ok : Exit::no_feasible;
    }

    if (bench_cmd->parsed()) {
      const std::uint64_t s = resolved_seed();
      std::vector<TrialSet> sets;
      for (const auto& name : instances) {
        const auto loaded = load(name, family, catalog);
        const auto& p = loaded.problem;
        SolverSpec base;
        base.mkp_mode = mkp_mode;
        try {
          const auto paper = load_paper_params(instance_name(p));
          base.da = paper.da;
          base.ga = paper.ga;
        } catch (const std::out_of_range&) {
          if (family_of(p) == Family::mkp) {
            base.ga.crossover = Crossover::uniform;
            base.ga.mutation = Mutation::bit_flip;
          }
        }
        for (double limit : limits)
          for (SolverKind kind : {SolverKind::da, SolverKind::ga}) {
            if (solver_name != "both" && (kind == SolverKind::da) != (solver_name == "da")) continue;
            SolverSpec spec = base;
            spec.kind = kind;
            err << "bench " << instance_name(p) << ' ' << to_string(kind) << ' ' << limit << "s x" << reps << '\n';
            sets.push_back(run_trials(p, spec, limit, reps, s));
          }
      }
      const auto text = emit_report(sets, format == "csv" ? ReportFormat::csv : ReportFormat::text);
      if (out_path.empty()) out << text;
      else write_file(out_path, text);
      return Exit::ok;
    }

    if (tune_cmd->parsed()) {
      const auto loaded = load(instance, family, catalog);
      const auto& p = loaded.problem;
      SolverSpec base;
      base.kind = solver_name == "da" ? SolverKind::da : SolverKind::ga;
      base.mkp_mode = mkp_mode;
      if (family_of(p) == Family::mkp) {
        base.ga.crossover = Crossover::uniform;
        base.ga.mutation = Mutation::bit_flip;
      }
      const auto space = base.kind == SolverKind::da ? da_space() : ga_space(family_of(p), natural_size(p));
      TuneOptions opt;
      opt.trials = trials;
      opt.inner_runs = reps;
      opt.inner_limit = time_limit;
      opt.seed = resolved_seed();
      const auto res = tune_solver(p, base, space, opt);
      if (!out_path.empty()) write_file(out_path, trial_log_csv(res));
      out << "# best of " << res.log.size() << " trials (trial " << res.best_index << ", score "
          << detail::format_double(res.log[res.best_index].score) << ")\n";
      for (const auto& [k, v] : res.best) out << k << " = " << v << '\n';
      return Exit::ok;
    }

    if (verify_cmd->parsed()) {
      const auto loaded = load(instance, family, catalog);
      const auto& p = loaded.problem;
      const auto text = read_file(solution_file);
      return std::visit(
          [&](const auto& inst) -> int {
            using T = std::decay_t<decltype(inst)>;
            if constexpr (std::is_same_v<T, MkpInstance>) {
              const auto x = parse_selection(text, inst.items());
              const auto load_vec = mkp_loads(inst, x);
              if (const auto k = mkp_violated_constraint(inst, x)) {
                out << "infeasible: constraint " << (*k + 1) << " load " << load_vec[*k] << " exceeds capacity "
                    << inst.capacities[*k] << '\n';
                return Exit::infeasible;
              }
              out << "feasible objective=" << -mkp_objective(inst, x) << '\n';
              return Exit::ok;
            } else {
              const auto order = read_tour_ids(text);
              const std::size_t expected = [&] {
                if constexpr (std::is_same_v<T, QapInstance>) return inst.size();
                else return inst.cities();
              }();
              if (order.size() != expected) {
                out << "infeasible: permutation has " << order.size() << " entries, expected " << expected << '\n';
                return Exit::infeasible;
              }
              std::vector<char> seen(expected, 0);
              for (int v : order) {
                if (v < 1 || static_cast<std::size_t>(v) > expected) {
                  out << "infeasible: entry " << v << " is outside 1.." << expected << '\n';
                  return Exit::infeasible;
                }
                if (seen[v - 1]++) {
                  out << "infeasible: " << v << " appears more than once\n";
                  return Exit::infeasible;
                }
              }
              const Permutation pi(order);
              std::int64_t f = 0;
              if constexpr (std::is_same_v<T, QapInstance>) f = qap_objective(inst, pi);
              else f = tsp_objective(inst, pi);
              out << "feasible objective=" << f << '\n';
              return Exit::ok;
            }
          },
          p);
    }
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return Exit::usage;
  } catch (const IoFailure& e) {
    err << "error: " << e.what() << '\n';
    return Exit::io;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return Exit::io;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return Exit::usage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return Exit::io;
  }
  return Exit::usage;
}

}  // namespace qopt::cli
