#pragma once

// Natural representations of the three benchmark families and their
// objective/feasibility functions. All data is integral; objectives are
// evaluated in 64-bit integers.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qopt/errors.hpp"
#include "qopt/qubo.hpp"

namespace qopt {

using Matrix = std::vector<std::vector<std::int64_t>>;

inline bool is_square(const Matrix& m, std::size_t n) {
  if (m.size() != n) return false;
  for (const auto& row : m)
    if (row.size() != n) return false;
  return true;
}

// A permutation of 1..n; pi[i] is the value at position i (0-based position).
class Permutation {
 public:
  Permutation() = default;
  explicit Permutation(std::vector<int> order) : order_(std::move(order)) {
    if (!valid(order_)) throw SizeError("not a permutation of 1..n");
  }

  static Permutation identity(std::size_t n) {
    std::vector<int> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<int>(i + 1);
    return Permutation(std::move(v));
  }

  static bool valid(const std::vector<int>& order) {
    std::vector<char> seen(order.size(), 0);
    for (int v : order) {
      if (v < 1 || static_cast<std::size_t>(v) > order.size() || seen[v - 1]) return false;
      seen[v - 1] = 1;
    }
    return true;
  }

  std::size_t size() const noexcept { return order_.size(); }
  int operator[](std::size_t i) const { return order_[i]; }
  const std::vector<int>& order() const noexcept { return order_; }

  friend bool operator==(const Permutation&, const Permutation&) = default;
  friend auto operator<=>(const Permutation&, const Permutation&) = default;

 private:
  std::vector<int> order_;
};

// ---------------------------------------------------------------------------
// Multi-dimensional knapsack. weights[i][k] is item i's use of resource k.

struct MkpInstance {
  std::string name;
  std::vector<std::int64_t> profits;
  Matrix weights;                        // n x K
  std::vector<std::int64_t> capacities;  // K
  std::optional<std::int64_t> known_optimum;

  std::size_t items() const noexcept { return profits.size(); }
  std::size_t constraints() const noexcept { return capacities.size(); }

  void validate() const {
    if (weights.size() != profits.size()) throw SizeError("MKP weight rows must equal item count");
    for (const auto& row : weights)
      if (row.size() != capacities.size())
        throw SizeError("MKP weight columns must equal constraint count");
    for (auto p : profits)
      if (p <= 0) throw SizeError("MKP profits must be positive");
    for (const auto& row : weights)
      for (auto w : row)
        if (w < 0) throw SizeError("MKP weights must be nonnegative");
    for (auto c : capacities)
      if (c < 0) throw SizeError("MKP capacities must be nonnegative");
  }
};

inline void check_items(const MkpInstance& inst, const BinaryState& x) {
  if (x.size() != inst.items())
    throw SizeError("selection length " + std::to_string(x.size()) + " does not match " +
                    std::to_string(inst.items()) + " items");
}

inline std::int64_t mkp_objective(const MkpInstance& inst, const BinaryState& x) {
  check_items(inst, x);
  std::int64_t f = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i]) f -= inst.profits[i];
  return f;
}

inline std::vector<std::int64_t> mkp_loads(const MkpInstance& inst, const BinaryState& x) {
  check_items(inst, x);
  std::vector<std::int64_t> load(inst.constraints(), 0);
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i])
      for (std::size_t k = 0; k < load.size(); ++k) load[k] += inst.weights[i][k];
  return load;
}

// Index of the first violated capacity, if any.
inline std::optional<std::size_t> mkp_violated_constraint(const MkpInstance& inst,
                                                          const BinaryState& x) {
  const auto load = mkp_loads(inst, x);
  for (std::size_t k = 0; k < load.size(); ++k)
    if (load[k] > inst.capacities[k]) return k;
  return std::nullopt;
}

inline bool mkp_feasible(const MkpInstance& inst, const BinaryState& x) {
  return !mkp_violated_constraint(inst, x).has_value();
}

// ---------------------------------------------------------------------------
// Quadratic assignment: facility i goes to location pi[i].

struct QapInstance {
  std::string name;
  Matrix flow;
  Matrix distance;
  std::optional<std::int64_t> known_optimum;

  std::size_t size() const noexcept { return flow.size(); }

  void validate() const {
    if (!is_square(flow, flow.size()) || !is_square(distance, flow.size()))
      throw SizeError("QAP matrices must be square and of equal size");
  }
};

inline std::int64_t qap_objective(const QapInstance& inst, const Permutation& pi) {
  const std::size_t n = inst.size();
  if (pi.size() != n) throw SizeError("permutation length does not match QAP size");
  std::int64_t f = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& drow = inst.distance[pi[i] - 1];
    for (std::size_t j = 0; j < n; ++j) f += inst.flow[i][j] * drow[pi[j] - 1];
  }
  return f;
}

// ---------------------------------------------------------------------------
// Travelling salesman over cities 1..n; distance may be asymmetric.

struct TspInstance {
  std::string name;
  Matrix distance;
  std::optional<std::int64_t> known_optimum;

  std::size_t cities() const noexcept { return distance.size(); }

  void validate() const {
    if (!is_square(distance, distance.size())) throw SizeError("TSP distance matrix must be square");
    for (std::size_t i = 0; i < distance.size(); ++i) {
      if (distance[i][i] != 0) throw SizeError("TSP distance diagonal must be zero");
      for (auto d : distance[i])
        if (d < 0) throw SizeError("TSP distances must be nonnegative");
    }
  }
};

// Closed tour length visiting pi[0], pi[1], ..., pi[n-1], back to pi[0].
inline std::int64_t tsp_objective(const TspInstance& inst, const Permutation& pi) {
  const std::size_t n = inst.cities();
  if (pi.size() != n) throw SizeError("tour length does not match city count");
  if (n == 0) return 0;
  std::int64_t f = 0;
  for (std::size_t i = 1; i < n; ++i) f += inst.distance[pi[i - 1] - 1][pi[i] - 1];
  return f + inst.distance[pi[n - 1] - 1][pi[0] - 1];
}

// ---------------------------------------------------------------------------

using ProblemInstance = std::variant<MkpInstance, QapInstance, TspInstance>;

enum class Family { mkp, qap, tsp };

inline Family family_of(const ProblemInstance& p) {
  return static_cast<Family>(p.index());
}

inline std::string to_string(Family f) {
  switch (f) {
    case Family::mkp: return "MKP";
    case Family::qap: return "QAP";
    case Family::tsp: return "TSP";
  }
  return "?";
}

inline std::optional<Family> parse_family(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s == "mkp") return Family::mkp;
  if (s == "qap") return Family::qap;
  if (s == "tsp") return Family::tsp;
  return std::nullopt;
}

inline const std::string& instance_name(const ProblemInstance& p) {
  return std::visit([](const auto& inst) -> const std::string& { return inst.name; }, p);
}

inline std::optional<std::int64_t> known_optimum(const ProblemInstance& p) {
  return std::visit([](const auto& inst) { return inst.known_optimum; }, p);
}

}  // namespace qopt
