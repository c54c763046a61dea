#pragma once

// QUBO energy model E(x) = x^T Q x + q with Q stored upper-triangular, plus
// the effective-field cache that makes single-flip energy changes O(1) to read
// and O(degree) to update.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "qopt/errors.hpp"

namespace qopt {

using Bit = std::uint8_t;
using BinaryState = std::vector<Bit>;

struct QuboEntry {
  std::size_t row;
  std::size_t col;
  double value;

  friend bool operator==(const QuboEntry&, const QuboEntry&) = default;
};

// Immutable upper-triangular sparse QUBO. Entries are sorted by (row, col),
// unique, nonzero and finite; anything not stored is exactly zero.
class QuboMatrix {
 public:
  QuboMatrix() = default;
  explicit QuboMatrix(std::size_t size, double offset = 0.0) : size_(size), offset_(offset) {
    if (!std::isfinite(offset)) throw SizeError("QUBO offset must be finite");
  }

  std::size_t size() const noexcept { return size_; }
  double offset() const noexcept { return offset_; }
  std::span<const QuboEntry> entries() const noexcept { return entries_; }
  std::size_t nonzeros() const noexcept { return entries_.size(); }

  // Coefficient of x_i x_j as stored (i and j may be given in either order).
  double coefficient(std::size_t i, std::size_t j) const {
    if (i >= size_ || j >= size_) throw IndexError("QUBO index out of range");
    if (i > j) std::swap(i, j);
    auto it = std::lower_bound(entries_.begin(), entries_.end(), std::pair{i, j},
                               [](const QuboEntry& e, const std::pair<std::size_t, std::size_t>& k) {
                                 return std::pair{e.row, e.col} < k;
                               });
    if (it != entries_.end() && it->row == i && it->col == j) return it->value;
    return 0.0;
  }

  friend bool operator==(const QuboMatrix&, const QuboMatrix&) = default;

 private:
  friend class QuboBuilder;

  std::size_t size_ = 0;
  double offset_ = 0.0;
  std::vector<QuboEntry> entries_;
};

// Accumulates coefficients; (i, j) and (j, i) fold onto the same upper-triangular cell.
class QuboBuilder {
 public:
  explicit QuboBuilder(std::size_t size) : size_(size) {}

  std::size_t size() const noexcept { return size_; }

  void add(std::size_t i, std::size_t j, double value) {
    if (i >= size_ || j >= size_) throw IndexError("QUBO index out of range");
    if (value == 0.0) return;
    if (i > j) std::swap(i, j);
    cells_[key(i, j)] += value;
  }

  void add_offset(double value) { offset_ += value; }

  QuboMatrix build() const {
    QuboMatrix q(size_, offset_);
    q.entries_.reserve(cells_.size());
    for (const auto& [k, v] : cells_) {
      if (!std::isfinite(v)) throw SizeError("QUBO coefficient must be finite");
      if (v != 0.0) q.entries_.push_back({k / size_, k % size_, v});
    }
    std::sort(q.entries_.begin(), q.entries_.end(), [](const QuboEntry& a, const QuboEntry& b) {
      return std::pair{a.row, a.col} < std::pair{b.row, b.col};
    });
    return q;
  }

 private:
  std::uint64_t key(std::size_t i, std::size_t j) const {
    return static_cast<std::uint64_t>(i) * size_ + j;
  }

  std::size_t size_;
  double offset_ = 0.0;
  std::unordered_map<std::uint64_t, double> cells_;
};

inline void check_state(const QuboMatrix& q, const BinaryState& x) {
  if (x.size() != q.size())
    throw SizeError("state length " + std::to_string(x.size()) + " does not match QUBO size " +
                    std::to_string(q.size()));
}

inline double energy(const QuboMatrix& q, const BinaryState& x) {
  check_state(q, x);
  double e = 0.0;
  for (const auto& [i, j, v] : q.entries())
    if (x[i] && x[j]) e += v;
  return e + q.offset();
}

// Q = C + alpha * G.
inline QuboMatrix aggregate(const QuboMatrix& c, const QuboMatrix& g, double alpha) {
  if (c.size() != g.size()) throw SizeError("cannot aggregate QUBOs of different sizes");
  if (!(alpha >= 0.0)) throw SizeError("penalty weight must be nonnegative");
  QuboBuilder b(c.size());
  for (const auto& [i, j, v] : c.entries()) b.add(i, j, v);
  for (const auto& [i, j, v] : g.entries()) b.add(i, j, alpha * v);
  b.add_offset(c.offset() + alpha * g.offset());
  return b.build();
}

// Symmetrized adjacency view: S_jj = Q_jj and S_ij = S_ji = Q_ij for i != j.
class Couplings {
 public:
  struct Neighbor {
    std::size_t index;
    double weight;
  };

  explicit Couplings(const QuboMatrix& q) : diagonal_(q.size(), 0.0), start_(q.size() + 1, 0) {
    for (const auto& e : q.entries()) {
      if (e.row == e.col) {
        diagonal_[e.row] = e.value;
      } else {
        ++start_[e.row + 1];
        ++start_[e.col + 1];
      }
    }
    for (std::size_t i = 0; i < q.size(); ++i) start_[i + 1] += start_[i];
    neighbors_.resize(start_.back());
    std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
    for (const auto& e : q.entries()) {
      if (e.row == e.col) continue;
      neighbors_[fill[e.row]++] = {e.col, e.value};
      neighbors_[fill[e.col]++] = {e.row, e.value};
    }
  }

  std::size_t size() const noexcept { return diagonal_.size(); }
  double diagonal(std::size_t j) const { return diagonal_[j]; }
  std::span<const Neighbor> neighbors(std::size_t j) const {
    return {neighbors_.data() + start_[j], neighbors_.data() + start_[j + 1]};
  }

 private:
  std::vector<double> diagonal_;
  std::vector<std::size_t> start_;
  std::vector<Neighbor> neighbors_;
};

// Effective fields h_j = S_jj + sum_{i != j} S_ij x_i. Flipping bit j changes
// the energy by (1 - 2 x_j) h_j.
class FieldCache {
 public:
  FieldCache(std::shared_ptr<const Couplings> couplings, const BinaryState& x)
      : couplings_(std::move(couplings)) {
    if (x.size() != couplings_->size()) throw SizeError("state length does not match QUBO size");
    recompute(x);
  }

  void recompute(const BinaryState& x) {
    const auto& s = *couplings_;
    fields_.assign(s.size(), 0.0);
    for (std::size_t j = 0; j < s.size(); ++j) {
      double h = s.diagonal(j);
      for (const auto& [i, w] : s.neighbors(j))
        if (x[i]) h += w;
      fields_[j] = h;
    }
  }

  std::size_t size() const noexcept { return fields_.size(); }
  std::span<const double> fields() const noexcept { return fields_; }
  double field(std::size_t j) const { return fields_[j]; }
  const Couplings& couplings() const noexcept { return *couplings_; }
  const std::shared_ptr<const Couplings>& shared_couplings() const noexcept { return couplings_; }

  double delta(const BinaryState& x, std::size_t j) const {
    return x[j] ? -fields_[j] : fields_[j];
  }

  void apply_flip(BinaryState& x, std::size_t j) {
    x[j] ^= 1;
    const double sign = x[j] ? 1.0 : -1.0;
    for (const auto& [i, w] : couplings_->neighbors(j)) fields_[i] += sign * w;
  }

  friend bool operator==(const FieldCache& a, const FieldCache& b) { return a.fields_ == b.fields_; }

 private:
  std::shared_ptr<const Couplings> couplings_;
  std::vector<double> fields_;
};

inline FieldCache init_fields(const QuboMatrix& q, const BinaryState& x) {
  check_state(q, x);
  return FieldCache(std::make_shared<const Couplings>(q), x);
}

inline double delta_energy(const BinaryState& x, const FieldCache& cache, std::size_t j) {
  if (j >= x.size() || x.size() != cache.size()) throw IndexError("flip index out of range");
  return cache.delta(x, j);
}

inline void apply_flip(BinaryState& x, FieldCache& cache, std::size_t j) {
  if (j >= x.size() || x.size() != cache.size()) throw IndexError("flip index out of range");
  cache.apply_flip(x, j);
}

// ---------------------------------------------------------------------------
// Text format: first line "m q", then one "i j v" per line with i <= j < m.
// Lines starting with '#' and blank lines are ignored. Duplicate cells are
// rejected.

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view tok, T& out) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size();
}

inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace detail

inline QuboMatrix read_qubo(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  std::size_t size = 0;
  std::unique_ptr<QuboBuilder> builder;
  std::unordered_set<std::uint64_t> seen;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto tok = detail::split_ws(t);
    if (!have_header) {
      double offset = 0.0;
      if (tok.size() != 2 || !detail::parse_number(tok[0], size) ||
          !detail::parse_number(tok[1], offset))
        throw ParseError("expected header 'm q'", lineno);
      if (size == 0) throw ParseError("QUBO size must be positive", lineno);
      if (!std::isfinite(offset)) throw ParseError("offset is not finite", lineno);
      builder = std::make_unique<QuboBuilder>(size);
      builder->add_offset(offset);
      have_header = true;
      continue;
    }
    std::size_t i = 0, j = 0;
    double v = 0.0;
    if (tok.size() != 3 || !detail::parse_number(tok[0], i) || !detail::parse_number(tok[1], j) ||
        !detail::parse_number(tok[2], v))
      throw ParseError("expected entry 'i j v'", lineno);
    if (i > j) throw ParseError("entry is below the diagonal (i > j)", lineno);
    if (j >= size) throw ParseError("index exceeds declared size", lineno);
    if (!std::isfinite(v)) throw ParseError("coefficient is not finite", lineno);
    if (!seen.insert(static_cast<std::uint64_t>(i) * size + j).second)
      throw ParseError("duplicate entry (" + std::to_string(i) + ", " + std::to_string(j) + ")",
                       lineno);
    builder->add(i, j, v);
  }
  if (!have_header) throw ParseError("missing header line");
  return builder->build();
}

inline void write_qubo(const QuboMatrix& q, std::ostream& out) {
  out << q.size() << ' ' << detail::format_double(q.offset()) << '\n';
  for (const auto& [i, j, v] : q.entries())
    out << i << ' ' << j << ' ' << detail::format_double(v) << '\n';
}

inline QuboMatrix read_qubo_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_qubo(in);
}

inline void write_qubo_file(const QuboMatrix& q, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_qubo(q, out);
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace qopt
