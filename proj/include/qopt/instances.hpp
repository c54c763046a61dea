#pragma once

// Readers for TSPLIB, QAPLIB and ORLIB mknap files, tour/solution files, and
// the instance catalog that binds names, sizes and optima to vendored files.

#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "qopt/encoders.hpp"
#include "qopt/errors.hpp"
#include "qopt/problems.hpp"
#include "qopt/qubo.hpp"

namespace qopt {

namespace detail {

inline std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

inline std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t b = 0;
  while (b <= text.size()) {
    auto e = text.find('\n', b);
    if (e == std::string_view::npos) e = text.size();
    out.push_back(text.substr(b, e - b));
    b = e + 1;
  }
  return out;
}

inline bool starts_alpha(std::string_view t) {
  return !t.empty() && std::isalpha(static_cast<unsigned char>(t.front()));
}

struct Token {
  std::string_view text;
  std::size_t line;
};

inline std::int64_t to_int(const Token& t, std::string_view what) {
  std::int64_t v = 0;
  if (!parse_number(t.text, v))
    throw ParseError(std::string(what) + ": expected an integer, found '" + std::string(t.text) + "'",
                     t.line);
  return v;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// TSPLIB

inline std::int64_t tsplib_nint(double x) { return static_cast<std::int64_t>(x + 0.5); }

inline TspInstance parse_tsplib(std::string_view text) {
  std::map<std::string, std::string> spec;
  std::map<std::string, std::vector<detail::Token>> sections;
  std::map<std::string, std::size_t> section_line;
  std::string current;
  std::size_t lineno = 0;

  for (auto raw : detail::lines_of(text)) {
    ++lineno;
    const auto t = detail::trim(raw);
    if (t.empty()) continue;
    if (detail::starts_alpha(t)) {
      current.clear();
      auto colon = t.find(':');
      std::string key = detail::upper(detail::trim(t.substr(0, colon)));
      if (key == "EOF") break;
      if (colon != std::string_view::npos && !detail::trim(t.substr(colon + 1)).empty()) {
        spec[key] = std::string(detail::trim(t.substr(colon + 1)));
        continue;
      }
      if (key.size() > 8 && key.ends_with("_SECTION")) {
        current = key;
        sections[key];
        section_line[key] = lineno;
        continue;
      }
      throw ParseError("unrecognised TSPLIB line '" + std::string(t) + "'", lineno);
    }
    if (current.empty()) throw ParseError("data outside of any section", lineno);
    for (auto tok : detail::split_ws(t)) sections[current].push_back({tok, lineno});
  }

  auto field = [&](const std::string& key) -> std::string {
    auto it = spec.find(key);
    return it == spec.end() ? std::string() : detail::upper(it->second);
  };
  const std::string type = field("TYPE");
  if (type != "TSP") throw ParseError("TYPE must be TSP, found '" + type + "'");
  std::int64_t dim = 0;
  if (!detail::parse_number(std::string_view(spec["DIMENSION"]), dim) || dim < 1)
    throw ParseError("DIMENSION missing or invalid");
  const auto n = static_cast<std::size_t>(dim);

  TspInstance inst;
  inst.name = spec.count("NAME") ? spec["NAME"] : std::string();
  inst.distance.assign(n, std::vector<std::int64_t>(n, 0));
  auto& d = inst.distance;

  const std::string weight_type = field("EDGE_WEIGHT_TYPE");
  if (weight_type == "EUC_2D") {
    auto it = sections.find("NODE_COORD_SECTION");
    if (it == sections.end()) throw ParseError("NODE_COORD_SECTION missing for EUC_2D");
    const auto& tok = it->second;
    if (tok.size() != 3 * n)
      throw ParseError("NODE_COORD_SECTION: expected " + std::to_string(3 * n) + " values, found " +
                           std::to_string(tok.size()),
                       section_line["NODE_COORD_SECTION"]);
    std::vector<double> xs(n), ys(n);
    std::vector<char> seen(n, 0);
    for (std::size_t r = 0; r < n; ++r) {
      const auto id = detail::to_int(tok[3 * r], "NODE_COORD_SECTION");
      if (id < 1 || id > dim || seen[static_cast<std::size_t>(id - 1)])
        throw ParseError("NODE_COORD_SECTION: bad node id", tok[3 * r].line);
      seen[static_cast<std::size_t>(id - 1)] = 1;
      double x = 0, y = 0;
      if (!detail::parse_number(tok[3 * r + 1].text, x) || !detail::parse_number(tok[3 * r + 2].text, y))
        throw ParseError("NODE_COORD_SECTION: bad coordinate", tok[3 * r].line);
      xs[static_cast<std::size_t>(id - 1)] = x;
      ys[static_cast<std::size_t>(id - 1)] = y;
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) d[i][j] = tsplib_nint(std::hypot(xs[i] - xs[j], ys[i] - ys[j]));
  } else if (weight_type == "EXPLICIT") {
    const std::string format = field("EDGE_WEIGHT_FORMAT");
    auto it = sections.find("EDGE_WEIGHT_SECTION");
    if (it == sections.end()) throw ParseError("EDGE_WEIGHT_SECTION missing for EXPLICIT weights");
    const auto& tok = it->second;
    std::size_t expected = 0;
    if (format == "FULL_MATRIX") expected = n * n;
    else if (format == "UPPER_ROW") expected = n * (n - 1) / 2;
    else if (format == "LOWER_DIAG_ROW" || format == "UPPER_DIAG_ROW") expected = n * (n + 1) / 2;
    else throw ParseError("unsupported EDGE_WEIGHT_FORMAT '" + format + "'");
    if (tok.size() != expected)
      throw ParseError("EDGE_WEIGHT_SECTION: expected " + std::to_string(expected) +
                           " values for " + format + ", found " + std::to_string(tok.size()),
                       section_line["EDGE_WEIGHT_SECTION"]);
    std::size_t k = 0;
    auto next = [&] { return detail::to_int(tok[k++], "EDGE_WEIGHT_SECTION"); };
    if (format == "FULL_MATRIX") {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) d[i][j] = next();
    } else if (format == "UPPER_ROW") {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) d[i][j] = d[j][i] = next();
    } else if (format == "UPPER_DIAG_ROW") {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) d[i][j] = d[j][i] = next();
    } else {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) d[i][j] = d[j][i] = next();
    }
  } else {
    throw ParseError("unsupported EDGE_WEIGHT_TYPE '" + weight_type + "'");
  }
  inst.validate();
  return inst;
}

// City ids from a TSPLIB TOUR file (TOUR_SECTION terminated by -1) or a bare
// list of 1-based ids. Not checked for being a permutation.
inline std::vector<int> read_tour_ids(std::string_view text) {
  std::vector<int> order;
  bool in_section = text.find("TOUR_SECTION") == std::string_view::npos;
  std::size_t lineno = 0;
  for (auto raw : detail::lines_of(text)) {
    ++lineno;
    const auto t = detail::trim(raw);
    if (t.empty() || t.front() == '#') continue;
    if (detail::starts_alpha(t)) {
      const auto key = detail::upper(detail::trim(t.substr(0, t.find(':'))));
      if (key == "EOF") break;
      in_section = key == "TOUR_SECTION";
      continue;
    }
    if (!in_section) continue;
    for (auto tok : detail::split_ws(t)) {
      const auto v = detail::to_int({tok, lineno}, "tour");
      if (v == -1) {
        in_section = false;
        break;
      }
      order.push_back(static_cast<int>(v));
    }
  }
  return order;
}

inline Permutation parse_tour(std::string_view text) {
  auto order = read_tour_ids(text);
  if (!Permutation::valid(order)) throw ParseError("tour is not a permutation of 1..n");
  return Permutation(std::move(order));
}

// ---------------------------------------------------------------------------
// QAPLIB: n, then the flow and distance matrices.

inline QapInstance parse_qaplib(std::string_view text) {
  std::vector<detail::Token> tok;
  std::size_t lineno = 0;
  for (auto raw : detail::lines_of(text)) {
    ++lineno;
    for (auto t : detail::split_ws(detail::trim(raw))) tok.push_back({t, lineno});
  }
  if (tok.empty()) throw ParseError("empty QAPLIB file");
  const auto n64 = detail::to_int(tok[0], "QAPLIB size");
  if (n64 < 1) throw ParseError("QAPLIB size must be positive", tok[0].line);
  const auto n = static_cast<std::size_t>(n64);
  const std::size_t expected = 1 + 2 * n * n;
  if (tok.size() != expected)
    throw ParseError("QAPLIB: expected " + std::to_string(expected - 1) + " matrix entries, found " +
                     std::to_string(tok.size() - 1));
  QapInstance inst;
  std::size_t k = 1;
  for (auto* m : {&inst.flow, &inst.distance}) {
    m->assign(n, std::vector<std::int64_t>(n, 0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) (*m)[i][j] = detail::to_int(tok[k++], "QAPLIB matrix");
  }
  return inst;
}

// ---------------------------------------------------------------------------
// ORLIB mknap. Leading prose is skipped up to the first line made only of
// integers. Each instance is: "K n [optimum]" on one line, then n profits,
// K rows of n weights, and K capacities. '//' and '#' start comments.

inline std::vector<MkpInstance> parse_orlib_mknap(std::string_view text) {
  std::vector<std::vector<detail::Token>> rows;
  std::size_t lineno = 0;
  bool started = false;
  for (auto raw : detail::lines_of(text)) {
    ++lineno;
    auto body = raw.substr(0, std::min(raw.find("//"), raw.find('#')));
    auto parts = detail::split_ws(detail::trim(body));
    if (parts.empty()) continue;
    std::vector<detail::Token> row;
    bool numeric = true;
    for (auto p : parts) {
      std::int64_t v;
      numeric = numeric && detail::parse_number(p, v);
      row.push_back({p, lineno});
    }
    if (!started) {
      if (!numeric) continue;
      started = true;
    }
    rows.push_back(std::move(row));
  }

  std::vector<MkpInstance> out;
  std::size_t r = 0, c = 0;
  std::size_t last_line = lineno;
  auto next = [&](std::string_view what) {
    while (r < rows.size() && c >= rows[r].size()) {
      ++r;
      c = 0;
    }
    if (r >= rows.size()) throw ParseError(std::string(what) + ": unexpected end of data", last_line);
    return detail::to_int(rows[r][c++], what);
  };
  auto at_row_start = [&] {
    while (r < rows.size() && c >= rows[r].size()) {
      ++r;
      c = 0;
    }
    return r < rows.size();
  };

  while (at_row_start()) {
    if (c != 0) throw ParseError("mknap: instance header must start a line", rows[r][c].line);
    const auto& header = rows[r];
    if (header.size() != 2 && header.size() != 3)
      throw ParseError("mknap: expected 'K n [optimum]'", header[0].line);
    const auto K = next("constraint count");
    const auto n = next("item count");
    if (K < 1 || n < 1) throw ParseError("mknap: counts must be positive", header[0].line);
    MkpInstance inst;
    if (header.size() == 3) inst.known_optimum = next("optimum");
    for (std::int64_t i = 0; i < n; ++i) inst.profits.push_back(next("profits"));
    inst.weights.assign(static_cast<std::size_t>(n), std::vector<std::int64_t>(static_cast<std::size_t>(K)));
    for (std::int64_t k = 0; k < K; ++k)
      for (std::int64_t i = 0; i < n; ++i)
        inst.weights[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] = next("weights");
    for (std::int64_t k = 0; k < K; ++k) {
      const auto line = at_row_start() ? rows[r][c].line : last_line;
      const auto w = next("capacities");
      if (w < 0) throw ParseError("mknap: negative capacity", line);
      inst.capacities.push_back(w);
    }
    out.push_back(std::move(inst));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Natural-form solution files for verification: whitespace-separated
// integers, or a TSPLIB TOUR file. MKP solutions are n 0/1 values.

inline BinaryState parse_selection(std::string_view text, std::size_t items) {
  BinaryState x;
  std::size_t lineno = 0;
  for (auto raw : detail::lines_of(text)) {
    ++lineno;
    const auto t = detail::trim(raw);
    if (t.empty() || t.front() == '#') continue;
    for (auto tok : detail::split_ws(t)) {
      const auto v = detail::to_int({tok, lineno}, "selection");
      if (v != 0 && v != 1) throw ParseError("selection values must be 0 or 1", lineno);
      x.push_back(static_cast<Bit>(v));
    }
  }
  if (x.size() != items)
    throw ParseError("selection has " + std::to_string(x.size()) + " values, expected " +
                     std::to_string(items));
  return x;
}

// ---------------------------------------------------------------------------
// Catalog. One instance per line:
//   name family format path n m [optimum]
// format records the file variant (e.g. FULL_MATRIX, UPPER_ROW, EUC_2D, QAPLIB,
// MKNAP); path is relative to the catalog file. MKP entries that share a file
// take its instances in catalog order. '-' marks an unknown optimum.

struct InstanceDescriptor {
  std::string name;
  Family family = Family::tsp;
  std::string format;
  std::filesystem::path path;
  std::size_t n = 0;
  std::size_t expected_m = 0;
  std::optional<std::int64_t> optimum;
  std::size_t file_index = 0;  // position among entries sharing `path`
};

inline std::vector<InstanceDescriptor> parse_catalog(std::string_view text,
                                                     const std::filesystem::path& base) {
  std::vector<InstanceDescriptor> out;
  std::map<std::filesystem::path, std::size_t> per_file;
  std::size_t lineno = 0;
  for (auto raw : detail::lines_of(text)) {
    ++lineno;
    const auto t = detail::trim(raw);
    if (t.empty() || t.front() == '#') continue;
    const auto tok = detail::split_ws(t);
    if (tok.size() != 6 && tok.size() != 7)
      throw ParseError("catalog: expected 'name family format path n m [optimum]'", lineno);
    InstanceDescriptor d;
    d.name = std::string(tok[0]);
    auto fam = parse_family(std::string(tok[1]));
    if (!fam) throw ParseError("catalog: unknown family '" + std::string(tok[1]) + "'", lineno);
    d.family = *fam;
    d.format = detail::upper(tok[2]);
    d.path = base / std::string(tok[3]);
    if (!detail::parse_number(tok[4], d.n) || !detail::parse_number(tok[5], d.expected_m))
      throw ParseError("catalog: bad size columns", lineno);
    if (tok.size() == 7 && tok[6] != "-") {
      std::int64_t opt = 0;
      if (!detail::parse_number(tok[6], opt)) throw ParseError("catalog: bad optimum", lineno);
      d.optimum = opt;
    }
    d.file_index = per_file[d.path]++;
    out.push_back(std::move(d));
  }
  return out;
}

inline std::vector<InstanceDescriptor> read_catalog(const std::filesystem::path& file) {
  return parse_catalog(detail::read_text(file), file.parent_path());
}

inline const InstanceDescriptor& find_descriptor(const std::vector<InstanceDescriptor>& catalog,
                                                 std::string_view name) {
  for (const auto& d : catalog)
    if (d.name == name) return d;
  throw std::out_of_range("instance '" + std::string(name) + "' is not in the catalog");
}

// Parses a file of the given family; for mknap files `index` selects the instance.
inline ProblemInstance load_problem_text(std::string_view text, Family family, std::size_t index = 0) {
  switch (family) {
    case Family::tsp: return parse_tsplib(text);
    case Family::qap: return parse_qaplib(text);
    case Family::mkp: {
      auto all = parse_orlib_mknap(text);
      if (index >= all.size())
        throw ParseError("mknap file holds " + std::to_string(all.size()) + " instances, entry " +
                         std::to_string(index + 1) + " requested");
      return std::move(all[index]);
    }
  }
  throw ParseError("unknown family");
}

inline ProblemInstance load_problem_file(const std::filesystem::path& path, Family family,
                                         std::size_t index = 0) {
  auto p = load_problem_text(detail::read_text(path), family, index);
  std::visit(
      [&](auto& inst) {
        if (inst.name.empty()) inst.name = path.stem().string();
      },
      p);
  return p;
}

// Loads a catalog entry; the catalog's name and optimum override file content.
inline ProblemInstance load_instance(const InstanceDescriptor& d) {
  auto p = load_problem_file(d.path, d.family, d.file_index);
  std::visit(
      [&](auto& inst) {
        inst.name = d.name;
        if (d.optimum) inst.known_optimum = d.optimum;
      },
      p);
  return p;
}

// Natural problem size as listed in the instance tables (TSP excludes the fixed city).
inline std::size_t natural_size(const ProblemInstance& p) {
  return std::visit(
      [](const auto& inst) -> std::size_t {
        using T = std::decay_t<decltype(inst)>;
        if constexpr (std::is_same_v<T, MkpInstance>) return inst.items();
        else if constexpr (std::is_same_v<T, QapInstance>) return inst.size();
        else return inst.cities() - 1;
      },
      p);
}

}  // namespace qopt
