// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qopt/qopt.hpp"

using namespace qopt;

namespace {

const std::string kData = QOPT_DATA_DIR;

struct Verdict {
  bool pass = true;
  std::string detail;
};

const std::vector<InstanceDescriptor>& catalog() {
  static const auto c = read_catalog(kData + "/catalog.txt");
  return c;
}

std::optional<ProblemInstance> try_load(const std::string& name, std::string& why) {
  try {
    return load_instance(find_descriptor(catalog(), name));
  } catch (const std::exception& e) {
    why = e.what();
    return std::nullopt;
  }
}

BinaryState bits_of(std::uint64_t s, std::size_t m) {
  BinaryState x(m);
  for (std::size_t i = 0; i < m; ++i) x[i] = static_cast<Bit>((s >> i) & 1);
  return x;
}

// Dense x^T Q x + offset, independent of the sparse evaluator.
double dense_energy(const std::vector<std::vector<double>>& q, double offset, const BinaryState& x) {
  double e = offset;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i; j < x.size(); ++j)
      if (x[i] && x[j]) e += q[i][j];
  return e;
}

std::vector<std::vector<double>> dense_of(const QuboMatrix& q) {
  std::vector<std::vector<double>> d(q.size(), std::vector<double>(q.size(), 0.0));
  for (const auto& [i, j, v] : q.entries()) d[i][j] = v;
  return d;
}

QuboMatrix random_qubo(std::size_t m, Rng& rng, double density = 0.7) {
  QuboBuilder b(m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i; j < m; ++j)
      if (rng.chance(density)) b.add(i, j, static_cast<double>(rng.between(-10, 10)));
  b.add_offset(static_cast<double>(rng.between(-5, 5)));
  return b.build();
}

double exhaustive_min(const QuboMatrix& q) {
  const auto d = dense_of(q);
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t s = 0; s < (1ull << q.size()); ++s) best = std::min(best, dense_energy(d, q.offset(), bits_of(s, q.size())));
  return best;
}

// ---------------------------------------------------------------------------

Verdict criterion1() {
  Verdict v;
  Rng rng(101);
  std::ostringstream detail;
  for (const char* name : {"gr17", "had12", "rou12", "weing1", "weing2", "weing3", "weing4", "weing5", "weing6"}) {
    std::string why;
    const auto p = try_load(name, why);
    if (!p) {
      v.pass = false;
      detail << name << ": unavailable; ";
      continue;
    }
    const auto enc = std::holds_alternative<MkpInstance>(*p) ? mkp_encode_slack(std::get<MkpInstance>(*p)) : encode(*p);
    const auto cost = dense_of(enc.cost);
    const auto pen = dense_of(enc.constraint);
    int bad = 0;
    for (int s = 0; s < 100; ++s) {
      double objective = 0;
      BinaryState x;
      if (const auto* tsp = std::get_if<TspInstance>(&*p)) {
        std::vector<int> order(tsp->cities());
        std::iota(order.begin(), order.end(), 1);
        rng.shuffle(order.begin(), order.end());
        std::int64_t len = 0;
        for (std::size_t i = 0; i < order.size(); ++i)
          len += tsp->distance[order[i] - 1][order[(i + 1) % order.size()] - 1];
        objective = static_cast<double>(len);
        x = tour_encode(Permutation(order));
      } else if (const auto* qap = std::get_if<QapInstance>(&*p)) {
        const std::size_t n = qap->size();
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 1);
        rng.shuffle(order.begin(), order.end());
        std::int64_t f = 0;
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j) f += qap->flow[i][j] * qap->distance[order[i] - 1][order[j] - 1];
        objective = static_cast<double>(f);
        x = permutation_encode(Permutation(order));
      } else {
        const auto& mkp = std::get<MkpInstance>(*p);
        // Random feasible selection: visit items in random order, keep those that fit.
        std::vector<std::size_t> idx(mkp.items());
        std::iota(idx.begin(), idx.end(), 0);
        rng.shuffle(idx.begin(), idx.end());
        std::vector<std::int64_t> load(mkp.constraints(), 0);
        BinaryState items(mkp.items(), 0);
        std::int64_t profit = 0;
        for (auto i : idx) {
          if (!rng.chance(0.7)) continue;
          bool fits = true;
          for (std::size_t k = 0; k < load.size(); ++k) fits = fits && load[k] + mkp.weights[i][k] <= mkp.capacities[k];
          if (!fits) continue;
          for (std::size_t k = 0; k < load.size(); ++k) load[k] += mkp.weights[i][k];
          items[i] = 1;
          profit += mkp.profits[i];
        }
        objective = -static_cast<double>(profit);
        x = mkp_slack_state(mkp, items);
      }
      if (dense_energy(cost, enc.cost.offset(), x) != objective || dense_energy(pen, enc.constraint.offset(), x) != 0.0)
        ++bad;
    }
    if (bad) {
      v.pass = false;
      detail << name << ": " << bad << " mismatches; ";
    }
  }
  v.detail = detail.str().empty() ? "100 solutions x 9 instances exact" : detail.str();
  return v;
}

Verdict criterion2() {
  Verdict v;
  const auto g = dense_of(permutation_penalty_qubo(3));
  const double off = permutation_penalty_qubo(3).offset();
  std::set<std::vector<int>> perms;
  int zeros = 0;
  for (std::uint64_t s = 0; s < 512; ++s) {
    const auto x = bits_of(s, 9);
    if (dense_energy(g, off, x) != 0.0) continue;
    ++zeros;
    if (const auto p = permutation_decode(x, 3)) perms.insert(p->order());
  }
  if (zeros != 6 || perms.size() != 6) {
    v.pass = false;
    v.detail = "one-hot n=3: " + std::to_string(zeros) + " zero states, " + std::to_string(perms.size()) + " perms; ";
  }

  Rng rng(202);
  int instances = 0, bad = 0;
  for (int t = 0; t < 300; ++t) {
    MkpInstance inst;
    inst.name = "syn";
    const std::size_t n = 1 + rng.below(6), K = 1 + rng.below(2);
    for (std::size_t i = 0; i < n; ++i) {
      inst.profits.push_back(rng.between(1, 9));
      std::vector<std::int64_t> w;
      for (std::size_t k = 0; k < K; ++k) w.push_back(rng.between(0, 9));
      inst.weights.push_back(w);
    }
    for (std::size_t k = 0; k < K; ++k) inst.capacities.push_back(rng.between(1, 15));
    const auto enc = mkp_encode_slack(inst);
    const auto gd = dense_of(enc.constraint);
    const std::size_t slack_bits = enc.size() - n;
    ++instances;
    for (std::uint64_t s = 0; s < (1ull << n); ++s) {
      bool feasible = true;
      for (std::size_t k = 0; k < K; ++k) {
        std::int64_t load = 0;
        for (std::size_t i = 0; i < n; ++i)
          if ((s >> i) & 1) load += inst.weights[i][k];
        feasible = feasible && load <= inst.capacities[k];
      }
      double best = std::numeric_limits<double>::infinity();
      for (std::uint64_t y = 0; y < (1ull << slack_bits); ++y)
        best = std::min(best, dense_energy(gd, enc.constraint.offset(), bits_of(s | (y << n), enc.size())));
      if ((best == 0.0) != feasible || best < 0.0) ++bad;
    }
  }
  if (bad) {
    v.pass = false;
    v.detail += "MKP: " + std::to_string(bad) + " selections disagree";
  }
  if (v.pass) v.detail = "512 one-hot states, " + std::to_string(instances) + " synthetic MKPs exhaustive";
  return v;
}

Verdict criterion3() {
  // Sizes from the instance tables.
  const std::vector<std::pair<const char*, std::size_t>> table = {
      {"weing1", 50},   {"weing2", 50},  {"weing3", 50},    {"weing4", 50},   {"weing5", 50},   {"weing6", 50},
      {"weing7", 131},  {"weing8", 131}, {"had12", 144},    {"had14", 196},   {"had16", 256},   {"had18", 324},
      {"had20", 400},   {"rou12", 144},  {"rou15", 225},    {"rou20", 400},   {"tai40a", 1600}, {"tai40b", 1600},
      {"bays29", 784},  {"bayg29", 784}, {"berlin52", 2601}, {"brazil58", 3249}, {"dantzig42", 1681},
      {"fri26", 625},   {"gr17", 256},   {"gr21", 400},     {"gr24", 529},    {"st70", 4761}};
  Verdict v;
  std::ostringstream detail;
  int matched = 0;
  for (const auto& [name, expected] : table) {
    std::string why;
    const auto p = try_load(name, why);
    if (!p) {
      detail << name << ": unavailable; ";
      continue;
    }
    const auto* mkp = std::get_if<MkpInstance>(&*p);
    const std::size_t got = mkp ? mkp_encode_slack(*mkp).size() : encode(*p).size();
    if (got == expected) ++matched;
    else detail << name << ": " << got << " vs " << expected << "; ";
  }
  v.pass = matched == static_cast<int>(table.size());
  v.detail = std::to_string(matched) + "/" + std::to_string(table.size()) + " rows match" +
             (detail.str().empty() ? "" : "; " + detail.str());
  return v;
}

Verdict criterion4() {
  Rng rng(404);
  Verdict v;
  std::uint64_t checks = 0, bad = 0;
  for (int t = 0; t < 50; ++t) {
    const std::size_t m = 1 + rng.below(12);
    const auto q = random_qubo(m, rng);
    const auto d = dense_of(q);
    for (std::uint64_t s = 0; s < (1ull << m); ++s) {
      const auto x = bits_of(s, m);
      const auto cache = init_fields(q, x);
      const double e = dense_energy(d, q.offset(), x);
      for (std::size_t j = 0; j < m; ++j) {
        auto y = x;
        y[j] ^= 1;
        ++checks;
        if (delta_energy(x, cache, j) != dense_energy(d, q.offset(), y) - e) ++bad;
      }
    }
  }
  v.pass = bad == 0;
  v.detail = std::to_string(checks) + " flips checked, " + std::to_string(bad) + " mismatches";
  return v;
}

Verdict criterion5() {
  Rng rng(505);
  int hits = 0;
  for (int t = 0; t < 100; ++t) {
    const auto q = random_qubo(8, rng);
    DaConfig cfg;
    cfg.seed = 1000 + static_cast<std::uint64_t>(t);
    cfg.num_run = 2;
    cfg.iteration_limit = 4000;
    cfg.time_limit = 10;
    hits += anneal(q, cfg).best_energy == exhaustive_min(q);
  }
  return {hits >= 95, std::to_string(hits) + "/100 optimal"};
}

// Seeded runs that stop at the optimum; gives up once the threshold is out of reach.
struct HitCount {
  int hits = 0, runs = 0;
  double best = std::numeric_limits<double>::quiet_NaN();
  double worst_ttb = 0;
};

HitCount count_hits(const ProblemInstance& p, SolverSpec spec, double limit, int runs, int needed,
                    std::uint64_t master) {
  spec.stop_at_optimum = true;
  const Solver solver(p, spec);
  const auto opt = *known_optimum(p);
  const Family fam = family_of(p);
  HitCount h;
  for (int r = 0; r < runs; ++r) {
    const auto res = solver.run(limit, trial_seed(master, static_cast<std::size_t>(r)));
    ++h.runs;
    if (res.feasible && res.objective) {
      const double value = reported_value(fam, static_cast<double>(*res.objective));
      if (std::isnan(h.best) || (maximising(fam) ? value > h.best : value < h.best)) h.best = value;
      if (value == static_cast<double>(opt)) {
        ++h.hits;
        h.worst_ttb = std::max(h.worst_ttb, res.time_to_best);
      }
    }
    if (h.hits + (runs - h.runs) < needed) break;
  }
  return h;
}

std::string describe(const std::string& name, const HitCount& h, int runs) {
  std::ostringstream s;
  s << name << " " << h.hits << "/" << runs;
  if (h.runs < runs) s << " (stopped after " << h.runs << " runs, best " << h.best << ")";
  else if (h.hits) s << " (max time-to-optimum " << h.worst_ttb << "s)";
  return s.str();
}

Verdict criterion6() {
  Verdict v;
  std::ostringstream detail;
  for (const auto& [name, limit] : std::vector<std::pair<std::string, double>>{{"had12", 1.0}, {"weing1", 2.0}}) {
    std::string why;
    const auto p = try_load(name, why);
    SolverSpec spec;
    spec.kind = SolverKind::ga;
    spec.ga = load_paper_params(name).ga;
    const auto h = count_hits(*p, spec, limit, 20, 18, 6006);
    v.pass = v.pass && h.hits >= 18;
    detail << describe(name, h, 20) << "; ";
  }
  v.detail = detail.str();
  return v;
}

Verdict criterion7() {
  Verdict v;
  std::ostringstream detail;
  for (const char* name : {"gr17", "had12", "weing1"}) {
    std::string why;
    const auto p = try_load(name, why);
    SolverSpec spec;
    spec.kind = SolverKind::da;
    spec.mkp_mode = MkpMode::inequality;
    spec.da = load_paper_params(name).da;
    const auto h = count_hits(*p, spec, 60.0, 20, 16, 7007);
    v.pass = v.pass && h.hits >= 16;
    detail << describe(name, h, 20) << "; ";
    std::fprintf(stderr, "  criterion 7: %s\n", describe(name, h, 20).c_str());
  }
  v.detail = detail.str();
  return v;
}

Verdict criterion8() {
  Verdict v;
  QuboBuilder b(2);
  b.add(0, 0, -3);
  b.add(1, 1, 1);
  b.add(0, 1, 2);
  if (penalty_weight(QuboMatrix(5)) != 0.0 || penalty_weight(b.build()) != 3.0) {
    v.pass = false;
    v.detail = "unit examples differ; ";
  }
  Rng rng(808);
  int bad = 0;
  for (std::size_t m = 1; m <= 10; ++m)
    for (int t = 0; t < 5; ++t) {
      const auto c = random_qubo(m, rng, 0.5);
      const auto d = dense_of(c);
      const double alpha = penalty_weight(c);
      for (std::uint64_t s = 0; s < (1ull << m); ++s) {
        const auto x = bits_of(s, m);
        const double e = dense_energy(d, c.offset(), x);
        for (std::size_t j = 0; j < m; ++j) {
          auto y = x;
          y[j] ^= 1;
          if (std::abs(dense_energy(d, c.offset(), y) - e) > alpha) ++bad;
        }
      }
    }
  if (bad) {
    v.pass = false;
    v.detail += std::to_string(bad) + " flips exceed alpha";
  }
  if (v.pass) v.detail = "examples 0 and 3; dominance over all flips for m = 1..10";
  return v;
}

Verdict criterion9() {
  Verdict v;
  const std::vector<double> a{1, 2, 3, 4}, shuffled{3, 1, 4, 2}, lo{10, 11, 12}, hi{20, 21, 22}, s{1, 2, 3};
  const auto same = t_test(a, a), shuf = t_test(a, shuffled), sep = t_test(lo, hi);
  const auto sum = summarize(s);
  v.pass = same.t == 0.0 && same.p == 1.0 && shuf.t == 0.0 && sep.p < 0.01 && sum.mean == 2.0 && sum.stddev == 1.0;
  std::ostringstream d;
  d << "identical t=" << same.t << " p=" << same.p << "; separated p=" << sep.p << "; {1,2,3} mean " << sum.mean
    << " sd " << sum.stddev;
  v.detail = d.str();
  return v;
}

Verdict criterion10() {
  Verdict v;
  std::ostringstream detail;
  auto check = [&](const std::string& what, bool same) {
    if (!same) {
      v.pass = false;
      detail << what << " differs; ";
    }
  };
  std::string why;
  const auto gr17 = *try_load("gr17", why);
  const auto had12 = *try_load("had12", why);
  const auto weing1 = *try_load("weing1", why);

  DaConfig da;
  da.seed = 31;
  da.iteration_limit = 20000;
  da.time_limit = 60;
  da.trace_every = 500;
  const auto enc = encode(gr17);
  check("anneal gr17", anneal_encoded(enc, gr17, da).same_outcome(anneal_encoded(enc, gr17, da)));
  const auto items = mkp_encode_items(std::get<MkpInstance>(weing1));
  check("anneal_with_inequalities",
        anneal_with_inequalities(items.cost, std::get<MkpInstance>(weing1), da)
            .same_outcome(anneal_with_inequalities(items.cost, std::get<MkpInstance>(weing1), da)));

  for (const auto* p : {&had12, &weing1, &gr17}) {
    auto ga = load_paper_params(instance_name(*p)).ga;
    ga.seed = 32;
    ga.generation_limit = 300;
    ga.time_limit = 60;
    check("evolve " + instance_name(*p), evolve(*p, ga).same_outcome(evolve(*p, ga)));
  }
  auto erx = load_paper_params("gr17").ga;
  erx.crossover = Crossover::edge_recombination;
  erx.generation_limit = 100;
  erx.time_limit = 60;
  check("evolve gr17 edge recombination", evolve(gr17, erx).same_outcome(evolve(gr17, erx)));

  SolverSpec base;
  base.kind = SolverKind::ga;
  base.ga.generation_limit = 30;
  TuneOptions opt;
  opt.trials = 5;
  opt.inner_runs = 2;
  opt.inner_limit = 60;
  opt.seed = 33;
  const auto t1 = tune_solver(had12, base, ga_space(Family::qap, 12), opt);
  const auto t2 = tune_solver(had12, base, ga_space(Family::qap, 12), opt);
  bool same_tune = t1.best == t2.best && t1.log.size() == t2.log.size();
  for (std::size_t i = 0; same_tune && i < t1.log.size(); ++i)
    same_tune = t1.log[i].params == t2.log[i].params && t1.log[i].score == t2.log[i].score &&
                t1.log[i].rank == t2.log[i].rank;
  check("tune", same_tune);

  SolverSpec das;
  das.kind = SolverKind::da;
  das.da.iteration_limit = 5000;
  das.da.num_run = 2;
  check("run_trials", run_trials(had12, das, 60, 3, 34).same_outcome(run_trials(had12, das, 60, 3, 34)));

  v.detail = v.pass ? "DA, DA-inequality, GA (3 families + ERX), tuner, trials" : detail.str();
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"encoding equivalence", criterion1},   {"penalty soundness", criterion2},
      {"QUBO size tables", criterion3},       {"delta-evaluation oracle", criterion4},
      {"annealer on 8-bit landscapes", criterion5}, {"GA reproduction", criterion6},
      {"DA relaxed reproduction", criterion7}, {"penalty-weight formula", criterion8},
      {"statistics", criterion9},             {"determinism", criterion10}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !v.pass;
    std::printf("criterion %2zu %-30s %s  (%.1fs)  %s\n", i + 1, criteria[i].first, v.pass ? "PASS" : "FAIL", secs,
                v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed ? 1 : 0;
}
