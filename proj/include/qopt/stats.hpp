#pragma once

#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "qopt/errors.hpp"

namespace qopt {

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;  // sample (n - 1); 0 for a single sample
  std::size_t count = 0;
};

inline Summary summarize(std::span<const double> xs) {
  if (xs.empty()) throw SizeError("cannot summarize an empty sample");
  Summary s;
  s.count = xs.size();
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

// Two-sided Welch t-test of a against b. t > 0 means a has the larger mean.
struct Comparison {
  Summary a;
  Summary b;
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
  bool significant = false;
  bool degenerate = false;  // both sides have zero variance
};

inline Comparison t_test(std::span<const double> a, std::span<const double> b, double level = 0.05) {
  if (a.size() < 2 || b.size() < 2) throw SizeError("t_test needs at least two samples per side");
  Comparison c;
  c.a = summarize(a);
  c.b = summarize(b);
  const double va = c.a.stddev * c.a.stddev / static_cast<double>(a.size());
  const double vb = c.b.stddev * c.b.stddev / static_cast<double>(b.size());
  const double diff = c.a.mean - c.b.mean;
  if (va + vb == 0.0) {
    c.degenerate = true;
    c.df = static_cast<double>(a.size() + b.size() - 2);
    if (diff == 0.0) return c;
    c.t = std::copysign(std::numeric_limits<double>::infinity(), diff);
    c.p = 0.0;
    c.significant = true;
    return c;
  }
  c.t = diff / std::sqrt(va + vb);
  const double num = (va + vb) * (va + vb);
  const double den = va * va / static_cast<double>(a.size() - 1) + vb * vb / static_cast<double>(b.size() - 1);
  c.df = num / den;
  const boost::math::students_t dist(c.df);
  c.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(c.t)));
  c.p = std::min(1.0, c.p);
  c.significant = c.p < level;
  return c;
}

}  // namespace qopt
