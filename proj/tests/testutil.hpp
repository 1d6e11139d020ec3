#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

// Shared statistical helpers for the test suites. Everything here is exact
// textbook numerics, small enough to verify by inspection.

namespace testutil {

// Lower regularized incomplete gamma P(a, x) by power series; valid for
// x < a + 1.
inline double gamma_series_p(double a, double x) {
  double ap = a;
  double del = 1.0 / a;
  double sum = del;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper regularized incomplete gamma Q(a, x) by Lentz continued fraction;
// valid for x >= a + 1.
inline double gamma_cf_q(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -double(i) * (double(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

inline double regularized_gamma_q(double a, double x) {
  if (a <= 0 || x < 0) throw std::invalid_argument("regularized_gamma_q: bad arguments");
  if (x == 0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_series_p(a, x);
  return gamma_cf_q(a, x);
}

// Upper-tail p-value of a chi-square statistic.
inline double chi_square_p_value(double statistic, int dof) {
  return regularized_gamma_q(0.5 * dof, 0.5 * statistic);
}

// Pearson statistic from observed counts and expected probabilities over the
// same categories. Categories with expected count below `min_expected` are
// pooled into one bucket; zero-probability categories must be empty.
struct ChiSquare {
  double statistic = 0;
  int dof = 0;
  double p_value = 1;
};

inline ChiSquare chi_square_test(std::span<const long> observed,
                                 std::span<const double> probability, long total,
                                 double min_expected = 5.0) {
  if (observed.size() != probability.size())
    throw std::invalid_argument("chi_square_test: size mismatch");
  double stat = 0;
  int cells = 0;
  double pooled_expected = 0;
  long pooled_observed = 0;
  for (size_t i = 0; i < observed.size(); ++i) {
    const double expected = probability[i] * double(total);
    if (probability[i] == 0) {
      if (observed[i] != 0)
        throw std::runtime_error("chi_square_test: draws in a zero-probability cell");
      continue;
    }
    if (expected < min_expected) {
      pooled_expected += expected;
      pooled_observed += observed[i];
      continue;
    }
    const double d = double(observed[i]) - expected;
    stat += d * d / expected;
    ++cells;
  }
  if (pooled_expected >= min_expected) {
    const double d = double(pooled_observed) - pooled_expected;
    stat += d * d / pooled_expected;
    ++cells;
  }
  ChiSquare out;
  out.statistic = stat;
  out.dof = cells - 1;
  out.p_value = out.dof > 0 ? chi_square_p_value(stat, out.dof) : 1.0;
  return out;
}

struct RunningStat {
  long n = 0;
  double mean = 0;
  double m2 = 0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / double(n);
    m2 += d * (x - mean);
  }
  double variance() const { return n > 1 ? m2 / double(n - 1) : 0.0; }
  double std_error() const { return std::sqrt(variance() / double(n)); }
};

}  // namespace testutil
