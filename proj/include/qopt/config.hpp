#pragma once

// Flat key=value configuration files for DaConfig and GaConfig. Blank lines
// and '#' comments are ignored; unknown keys are errors.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qopt/annealer.hpp"
#include "qopt/errors.hpp"
#include "qopt/genetic.hpp"
#include "qopt/qubo.hpp"

namespace qopt {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

inline KeyValues parse_key_values(std::string_view text) {
  KeyValues out;
  std::size_t lineno = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key=value", lineno);
    auto key = detail::trim(t.substr(0, eq));
    auto value = detail::trim(t.substr(eq + 1));
    if (key.empty()) throw ParseError("empty key", lineno);
    out.emplace_back(std::string(key), std::string(value));
  }
  return out;
}

inline KeyValues read_key_values_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_key_values(ss.str());
}

namespace detail {

template <typename T>
T config_number(const std::string& key, const std::string& value) {
  T v{};
  if (!parse_number(std::string_view(value), v))
    throw ConfigError("invalid value '" + value + "' for " + key);
  return v;
}

inline bool config_bool(const std::string& key, std::string value) {
  for (auto& c : value) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("invalid boolean '" + value + "' for " + key);
}

inline void put(std::ostream& out, const char* key, double v) { out << key << " = " << format_double(v) << '\n'; }
inline void put(std::ostream& out, const char* key, std::uint64_t v) { out << key << " = " << v << '\n'; }
inline void put(std::ostream& out, const char* key, std::int64_t v) { out << key << " = " << v << '\n'; }
inline void put(std::ostream& out, const char* key, int v) { out << key << " = " << v << '\n'; }
inline void put(std::ostream& out, const char* key, const std::string& v) { out << key << " = " << v << '\n'; }

}  // namespace detail

// Applies one setting. gs_level and gs_cutoff are accepted as aliases.
inline void set_da_option(DaConfig& cfg, const std::string& key, const std::string& value) {
  using detail::config_number;
  if (key == "initial_temperature") cfg.initial_temperature = config_number<double>(key, value);
  else if (key == "final_temperature") cfg.final_temperature = config_number<double>(key, value);
  else if (key == "decay_factor") cfg.decay_factor = config_number<double>(key, value);
  else if (key == "temperature_interval") cfg.temperature_interval = config_number<std::uint64_t>(key, value);
  else if (key == "offset_increase_rate") cfg.offset_increase_rate = config_number<double>(key, value);
  else if (key == "num_run") cfg.num_run = config_number<int>(key, value);
  else if (key == "num_group") cfg.num_group = config_number<int>(key, value);
  else if (key == "restart_interval_scale" || key == "gs_level")
    cfg.restart_interval_scale = config_number<int>(key, value);
  else if (key == "no_improvement_cutoff" || key == "gs_cutoff")
    cfg.no_improvement_cutoff = config_number<std::int64_t>(key, value);
  else if (key == "time_limit") cfg.time_limit = config_number<double>(key, value);
  else if (key == "seed") cfg.seed = config_number<std::uint64_t>(key, value);
  else if (key == "iteration_limit") cfg.iteration_limit = config_number<std::uint64_t>(key, value);
  else if (key == "target_energy") cfg.target_energy = config_number<double>(key, value);
  else if (key == "trace_every") cfg.trace_every = config_number<std::uint64_t>(key, value);
  else throw ConfigError("unknown annealer option '" + key + "'");
}

inline void set_ga_option(GaConfig& cfg, const std::string& key, const std::string& value) {
  using detail::config_number;
  if (key == "population_size") cfg.population_size = config_number<std::size_t>(key, value);
  else if (key == "crossover") {
    auto c = parse_crossover(value);
    if (!c) throw ConfigError("unknown crossover '" + value + "'");
    cfg.crossover = *c;
  } else if (key == "crossover_rate") cfg.crossover_rate = config_number<double>(key, value);
  else if (key == "mutation") {
    auto m = parse_mutation(value);
    if (!m) throw ConfigError("unknown mutation '" + value + "'");
    cfg.mutation = *m;
  } else if (key == "mutation_rate") cfg.mutation_rate = config_number<double>(key, value);
  else if (key == "eliminate_duplicates") cfg.eliminate_duplicates = detail::config_bool(key, value);
  else if (key == "survival") {
    auto s = parse_survival(value);
    if (!s) throw ConfigError("unknown survival '" + value + "'");
    cfg.survival = *s;
  } else if (key == "time_limit") cfg.time_limit = config_number<double>(key, value);
  else if (key == "seed") cfg.seed = config_number<std::uint64_t>(key, value);
  else if (key == "stagnation_restart") cfg.stagnation_restart = config_number<std::uint64_t>(key, value);
  else if (key == "generation_limit") cfg.generation_limit = config_number<std::uint64_t>(key, value);
  else if (key == "target_fitness") cfg.target_fitness = config_number<double>(key, value);
  else throw ConfigError("unknown GA option '" + key + "'");
}

inline DaConfig da_config_from(const KeyValues& kv, DaConfig cfg = {}) {
  for (const auto& [k, v] : kv) set_da_option(cfg, k, v);
  cfg.validate();
  return cfg;
}

inline GaConfig ga_config_from(const KeyValues& kv, GaConfig cfg = {}) {
  for (const auto& [k, v] : kv) set_ga_option(cfg, k, v);
  return cfg;
}

inline std::string to_config_text(const DaConfig& cfg) {
  std::ostringstream out;
  if (cfg.initial_temperature) detail::put(out, "initial_temperature", *cfg.initial_temperature);
  if (cfg.final_temperature) detail::put(out, "final_temperature", *cfg.final_temperature);
  detail::put(out, "decay_factor", cfg.decay_factor);
  detail::put(out, "temperature_interval", cfg.temperature_interval);
  if (cfg.offset_increase_rate) detail::put(out, "offset_increase_rate", *cfg.offset_increase_rate);
  detail::put(out, "num_run", cfg.num_run);
  detail::put(out, "num_group", cfg.num_group);
  detail::put(out, "gs_level", cfg.restart_interval_scale);
  detail::put(out, "gs_cutoff", cfg.no_improvement_cutoff);
  detail::put(out, "time_limit", cfg.time_limit);
  detail::put(out, "seed", cfg.seed);
  if (cfg.iteration_limit) detail::put(out, "iteration_limit", *cfg.iteration_limit);
  if (cfg.target_energy) detail::put(out, "target_energy", *cfg.target_energy);
  if (cfg.trace_every) detail::put(out, "trace_every", cfg.trace_every);
  return out.str();
}

inline std::string to_config_text(const GaConfig& cfg) {
  std::ostringstream out;
  detail::put(out, "population_size", static_cast<std::uint64_t>(cfg.population_size));
  detail::put(out, "crossover", to_string(cfg.crossover));
  detail::put(out, "crossover_rate", cfg.crossover_rate);
  detail::put(out, "mutation", to_string(cfg.mutation));
  detail::put(out, "mutation_rate", cfg.mutation_rate);
  detail::put(out, "eliminate_duplicates", std::string(cfg.eliminate_duplicates ? "true" : "false"));
  detail::put(out, "survival", to_string(cfg.survival));
  detail::put(out, "time_limit", cfg.time_limit);
  detail::put(out, "seed", cfg.seed);
  detail::put(out, "stagnation_restart", cfg.stagnation_restart);
  if (cfg.generation_limit) detail::put(out, "generation_limit", *cfg.generation_limit);
  if (cfg.target_fitness) detail::put(out, "target_fitness", *cfg.target_fitness);
  return out.str();
}

inline bool same_config(const DaConfig& a, const DaConfig& b) {
  return to_config_text(a) == to_config_text(b);
}

inline bool same_config(const GaConfig& a, const GaConfig& b) {
  return to_config_text(a) == to_config_text(b);
}

}  // namespace qopt
