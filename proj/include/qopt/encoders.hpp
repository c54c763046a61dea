#pragma once

// QUBO formulations of MKP (slack variables), QAP and TSP (two-way one-hot),
// together with the penalty weight and the decoders back to natural form.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "qopt/errors.hpp"
#include "qopt/problems.hpp"
#include "qopt/qubo.hpp"

namespace qopt {

// ---------------------------------------------------------------------------
// Two-way one-hot permutation encoding. Row i of the n x n bit matrix is
// position i; its single set column is pi[i] - 1. Flattened row-major.

inline BinaryState permutation_encode(const Permutation& pi) {
  const std::size_t n = pi.size();
  BinaryState x(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) x[i * n + static_cast<std::size_t>(pi[i] - 1)] = 1;
  return x;
}

inline void check_one_hot_length(const BinaryState& x, std::size_t n) {
  if (x.size() != n * n)
    throw SizeError("one-hot state length " + std::to_string(x.size()) + " is not " +
                    std::to_string(n) + "^2");
}

// nullopt when some row or column does not sum to exactly one.
inline std::optional<Permutation> permutation_decode(const BinaryState& x, std::size_t n) {
  check_one_hot_length(x, n);
  std::vector<int> order(n, 0);
  std::vector<int> col_sum(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    int row_sum = 0;
    for (std::size_t k = 0; k < n; ++k) {
      if (!x[i * n + k]) continue;
      ++row_sum;
      ++col_sum[k];
      order[i] = static_cast<int>(k + 1);
    }
    if (row_sum != 1) return std::nullopt;
  }
  for (int c : col_sum)
    if (c != 1) return std::nullopt;
  return Permutation(std::move(order));
}

// sum_rows (1 - rowsum)^2 + sum_cols (1 - colsum)^2
inline std::int64_t permutation_penalty_value(const BinaryState& x, std::size_t n) {
  check_one_hot_length(x, n);
  std::int64_t g = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::int64_t row = 0, col = 0;
    for (std::size_t k = 0; k < n; ++k) {
      row += x[i * n + k];
      col += x[k * n + i];
    }
    g += (1 - row) * (1 - row) + (1 - col) * (1 - col);
  }
  return g;
}

// The one-hot penalty as a QUBO whose energy equals permutation_penalty_value
// exactly (the 2n constant lives in the offset).
inline QuboMatrix permutation_penalty_qubo(std::size_t n) {
  QuboBuilder g(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t u = i * n + k;
      g.add(u, u, -2.0);
      for (std::size_t l = k + 1; l < n; ++l) g.add(u, i * n + l, 2.0);  // same row
      for (std::size_t j = i + 1; j < n; ++j) g.add(u, j * n + k, 2.0);  // same column
    }
  }
  g.add_offset(2.0 * static_cast<double>(n));
  return g.build();
}

// ---------------------------------------------------------------------------
// Penalty weight: the largest single-flip energy swing the cost QUBO can
// produce, computed per variable from the symmetric coupling view.

inline double penalty_weight(const QuboMatrix& c) {
  const Couplings s(c);
  double alpha = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    double neg = 0.0, pos = 0.0;
    for (const auto& nb : s.neighbors(i)) {
      neg += std::min(nb.weight, 0.0);
      pos += std::max(nb.weight, 0.0);
    }
    alpha = std::max({alpha, -s.diagonal(i) - neg, s.diagonal(i) + pos});
  }
  return alpha;
}

// ---------------------------------------------------------------------------
// MKP slack layout. For capacity W, M = floor(log2 W) and the slack bits carry
// coefficients 1, 2, ..., 2^(M-1), W + 1 - 2^M, which reach exactly {0..W}.

struct SlackBlock {
  std::size_t constraint;
  std::size_t first_bit;
  int exponent;  // M_k
  std::vector<std::int64_t> coefficients;
};

struct SlackLayout {
  std::size_t items = 0;
  std::vector<SlackBlock> blocks;

  std::size_t total_bits() const {
    std::size_t t = items;
    for (const auto& b : blocks) t += b.coefficients.size();
    return t;
  }
};

inline std::vector<std::int64_t> slack_coefficients(std::int64_t capacity) {
  if (capacity < 1) throw EncodingError("capacity must be at least 1 for slack encoding");
  const int m = std::bit_width(static_cast<std::uint64_t>(capacity)) - 1;
  std::vector<std::int64_t> coef;
  for (int j = 0; j < m; ++j) coef.push_back(std::int64_t{1} << j);
  coef.push_back(capacity + 1 - (std::int64_t{1} << m));
  return coef;
}

inline SlackLayout make_slack_layout(const MkpInstance& inst) {
  SlackLayout layout;
  layout.items = inst.items();
  std::size_t next = inst.items();
  for (std::size_t k = 0; k < inst.constraints(); ++k) {
    SlackBlock b;
    b.constraint = k;
    b.first_bit = next;
    b.coefficients = slack_coefficients(inst.capacities[k]);
    b.exponent = static_cast<int>(b.coefficients.size()) - 1;
    next += b.coefficients.size();
    layout.blocks.push_back(std::move(b));
  }
  return layout;
}

// ---------------------------------------------------------------------------

enum class Layout {
  mkp_items,         // bits are the n item selections
  mkp_slack,         // n item bits followed by slack blocks
  permutation,       // n x n one-hot
  tour_fixed_first,  // (N-1) x (N-1) one-hot over cities 2..N, city 1 fixed first
};

struct Decoder {
  Layout layout = Layout::permutation;
  std::size_t n = 0;  // items, or permutation side length
  SlackLayout slack;  // only for mkp_slack
};

using NaturalSolution = std::variant<BinaryState, Permutation>;

struct EncodedProblem {
  QuboMatrix cost;
  QuboMatrix constraint;
  double alpha = 0.0;
  Decoder decoder;

  std::size_t size() const noexcept { return cost.size(); }
  QuboMatrix combined() const { return aggregate(cost, constraint, alpha); }
};

// Item bits of an MKP state regardless of slack layout.
inline BinaryState mkp_items_of(const BinaryState& x, std::size_t items) {
  return BinaryState(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(items));
}

inline Permutation tour_from_reduced(const Permutation& reduced) {
  std::vector<int> tour{1};
  for (int v : reduced.order()) tour.push_back(v + 1);
  return Permutation(std::move(tour));
}

// Encoded one-hot state for a full tour; the tour is rotated so city 1 leads.
inline BinaryState tour_encode(const Permutation& tour) {
  const auto& t = tour.order();
  auto first = std::find(t.begin(), t.end(), 1);
  std::vector<int> reduced;
  for (auto it = first + 1; it != t.end(); ++it) reduced.push_back(*it - 1);
  for (auto it = t.begin(); it != first; ++it) reduced.push_back(*it - 1);
  return permutation_encode(Permutation(std::move(reduced)));
}

// Natural solution for a QUBO state, or nullopt if the one-hot structure is broken.
// MKP layouts always decode (to the item bits), feasibility is checked separately.
inline std::optional<NaturalSolution> decode(const Decoder& d, const BinaryState& x) {
  switch (d.layout) {
    case Layout::mkp_items:
    case Layout::mkp_slack:
      return NaturalSolution(mkp_items_of(x, d.n));
    case Layout::permutation:
      if (auto p = permutation_decode(x, d.n)) return NaturalSolution(*p);
      return std::nullopt;
    case Layout::tour_fixed_first:
      if (auto p = permutation_decode(x, d.n)) return NaturalSolution(tour_from_reduced(*p));
      return std::nullopt;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Encoders.

// Cost QUBO over item bits only: -p_i on the diagonal.
inline QuboMatrix mkp_cost_qubo(const MkpInstance& inst, std::size_t size) {
  QuboBuilder c(size);
  for (std::size_t i = 0; i < inst.items(); ++i)
    c.add(i, i, -static_cast<double>(inst.profits[i]));
  return c.build();
}

inline EncodedProblem mkp_encode_slack(const MkpInstance& inst) {
  inst.validate();
  const SlackLayout layout = make_slack_layout(inst);
  const std::size_t m = layout.total_bits();

  QuboBuilder g(m);
  std::vector<std::pair<std::size_t, double>> terms;
  for (const auto& block : layout.blocks) {
    // (sum_i w_ik x_i + sum_j c_j y_j - W_k)^2 expanded over binary variables.
    const double cap = static_cast<double>(inst.capacities[block.constraint]);
    terms.clear();
    for (std::size_t i = 0; i < inst.items(); ++i)
      if (inst.weights[i][block.constraint] != 0)
        terms.emplace_back(i, static_cast<double>(inst.weights[i][block.constraint]));
    for (std::size_t j = 0; j < block.coefficients.size(); ++j)
      terms.emplace_back(block.first_bit + j, static_cast<double>(block.coefficients[j]));
    for (std::size_t a = 0; a < terms.size(); ++a) {
      g.add(terms[a].first, terms[a].first, terms[a].second * terms[a].second - 2.0 * cap * terms[a].second);
      for (std::size_t b = a + 1; b < terms.size(); ++b)
        g.add(terms[a].first, terms[b].first, 2.0 * terms[a].second * terms[b].second);
    }
    g.add_offset(cap * cap);
  }

  EncodedProblem enc;
  enc.cost = mkp_cost_qubo(inst, m);
  enc.constraint = g.build();
  enc.alpha = penalty_weight(enc.cost);
  enc.decoder = {Layout::mkp_slack, inst.items(), layout};
  return enc;
}

// Item-bit QUBO for inequality-constrained annealing: G is empty, feasibility is
// enforced by the solver.
inline EncodedProblem mkp_encode_items(const MkpInstance& inst) {
  inst.validate();
  EncodedProblem enc;
  enc.cost = mkp_cost_qubo(inst, inst.items());
  enc.constraint = QuboMatrix(inst.items());
  enc.alpha = 0.0;
  enc.decoder = {Layout::mkp_items, inst.items(), {}};
  return enc;
}

// Minimal slack setting absorbing the residual W_k - load_k for a feasible selection.
inline BinaryState mkp_slack_state(const MkpInstance& inst, const BinaryState& items) {
  const SlackLayout layout = make_slack_layout(inst);
  BinaryState x(layout.total_bits(), 0);
  std::copy(items.begin(), items.end(), x.begin());
  const auto load = mkp_loads(inst, items);
  for (const auto& block : layout.blocks) {
    std::int64_t residual = inst.capacities[block.constraint] - load[block.constraint];
    if (residual < 0) continue;
    // Take the last (largest) coefficient first when it fits, then binary-fill the rest.
    const std::size_t last = block.coefficients.size() - 1;
    if (residual >= block.coefficients[last]) {
      x[block.first_bit + last] = 1;
      residual -= block.coefficients[last];
    }
    for (std::size_t j = 0; j < last; ++j)
      if (residual & (std::int64_t{1} << j)) x[block.first_bit + j] = 1;
  }
  return x;
}

inline EncodedProblem qap_encode(const QapInstance& inst) {
  inst.validate();
  const std::size_t n = inst.size();
  QuboBuilder c(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double h = static_cast<double>(inst.flow[i][j]);
      if (h == 0.0) continue;
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l) {
          const auto d = inst.distance[k][l];
          if (d != 0) c.add(i * n + k, j * n + l, h * static_cast<double>(d));
        }
    }
  EncodedProblem enc;
  enc.cost = c.build();
  enc.constraint = permutation_penalty_qubo(n);
  enc.alpha = penalty_weight(enc.cost);
  enc.decoder = {Layout::permutation, n, {}};
  return enc;
}

// City 1 is fixed at the start of the tour. Reduced city r (0-based) is city
// r + 2; bit (k, r) means reduced city r is visited at position k.
inline EncodedProblem tsp_encode(const TspInstance& inst) {
  inst.validate();
  if (inst.cities() < 3) throw EncodingError("TSP encoding needs at least 3 cities");
  const std::size_t n = inst.cities() - 1;
  const auto& d = inst.distance;
  QuboBuilder c(n * n);
  for (std::size_t k = 0; k + 1 < n; ++k)
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        if (a == b || d[a + 1][b + 1] == 0) continue;
        c.add(k * n + a, (k + 1) * n + b, static_cast<double>(d[a + 1][b + 1]));
      }
  for (std::size_t a = 0; a < n; ++a) {
    c.add(a, a, static_cast<double>(d[0][a + 1]));
    c.add((n - 1) * n + a, (n - 1) * n + a, static_cast<double>(d[a + 1][0]));
  }
  EncodedProblem enc;
  enc.cost = c.build();
  enc.constraint = permutation_penalty_qubo(n);
  enc.alpha = penalty_weight(enc.cost);
  enc.decoder = {Layout::tour_fixed_first, n, {}};
  return enc;
}

inline EncodedProblem encode(const ProblemInstance& p) {
  return std::visit(
      [](const auto& inst) -> EncodedProblem {
        using T = std::decay_t<decltype(inst)>;
        if constexpr (std::is_same_v<T, MkpInstance>) return mkp_encode_slack(inst);
        else if constexpr (std::is_same_v<T, QapInstance>) return qap_encode(inst);
        else return tsp_encode(inst);
      },
      p);
}

}  // namespace qopt
