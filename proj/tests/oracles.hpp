#pragma once

// Reference computations that share no code with the library: power
// series, closed-form two-state Markov results, brute-force quadrature and
// a plain std::<random> simulator.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

// Odd-switch dwell density from |0> as a partial sum of its defining series.
inline double odd_density_series(double tau, double g0, double g1, double T, int terms = 50) {
  const long double x = static_cast<long double>(g0) * g1 * tau * (T - tau);
  long double term = 1.0L, sum = 0.0L;
  for (int n = 1; n <= terms; ++n) {
    sum += term;
    term *= x / (static_cast<long double>(n) * n);
  }
  return static_cast<double>(g0 * std::exp(static_cast<long double>((g1 - g0) * tau - g1 * T)) * sum);
}

// Even (>= 2) switch dwell density from |0>.
inline double even_density_series(double tau, double g0, double g1, double T, int terms = 50) {
  const long double x = static_cast<long double>(g0) * g1 * tau * (T - tau);
  long double term = 1.0L, sum = 0.0L;  // x^(n-1) / (n! (n-1)!)
  for (int n = 1; n <= terms; ++n) {
    sum += term;
    term *= x / (static_cast<long double>(n + 1) * n);
  }
  return static_cast<double>(static_cast<long double>(g0) * g1 * tau *
                             std::exp(static_cast<long double>((g1 - g0) * tau - g1 * T)) * sum);
}

// Two-state chain started in |0>.
inline double prob_even_from_0(double g0, double g1, double T) {
  const double s = g0 + g1;
  if (s == 0.0) return 1.0;
  return (g1 + g0 * std::exp(-s * T)) / s;
}

inline double mean_dwell_from_0(double g0, double g1, double T) {
  const double s = g0 + g1;
  if (s == 0.0) return T;
  return (g1 * T + g0 * (-std::expm1(-s * T)) / s) / s;
}

inline double poisson(int n, double mean) {
  if (mean == 0.0) return n == 0 ? 1.0 : 0.0;
  return std::exp(n * std::log(mean) - mean - std::lgamma(n + 1.0));
}

// Composite Simpson on [a, b] with an even number of intervals.
template <class F>
double simpson(F&& f, double a, double b, int intervals) {
  const double h = (b - a) / intervals;
  double s = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// Density of a sum of n Exp(gamma) variables at x by repeated trapezoid
// convolution on a uniform grid of step h.
inline double erlang_by_convolution(int n, double gamma, double x, int steps) {
  const double h = x / steps;
  std::vector<double> base(steps + 1);
  for (int i = 0; i <= steps; ++i) base[i] = gamma * std::exp(-gamma * i * h);
  std::vector<double> cur(base.begin(), base.end());
  for (int k = 1; k < n; ++k) {
    std::vector<double> next(steps + 1, 0.0);
    for (int i = 1; i <= steps; ++i) {
      double s = 0.5 * (cur[0] * base[i] + cur[i] * base[0]);
      for (int j = 1; j < i; ++j) s += cur[j] * base[i - j];
      next[i] = s * h;
    }
    cur.swap(next);
  }
  return cur[steps];
}

struct Path {
  int initial;
  int final_state;
  int switches;
  double dwell0;
  long count;
};

// Telegraph path plus Poisson count, using only std:: distributions.
class Simulator {
 public:
  Simulator(std::uint64_t seed, double g0, double g1, double l0, double l1, double T)
      : rng_(seed), g_{g0, g1}, l_{l0, l1}, T_(T) {}

  Path run(int initial) {
    Path p{initial, initial, 0, 0.0, 0};
    double t = 0.0;
    int s = initial;
    for (;;) {
      const double hold =
          g_[s] > 0.0 ? std::exponential_distribution<double>(g_[s])(rng_) : INFINITY;
      if (t + hold >= T_) {
        if (s == 0) p.dwell0 += T_ - t;
        break;
      }
      if (s == 0) p.dwell0 += hold;
      t += hold;
      s ^= 1;
      ++p.switches;
    }
    p.final_state = s;
    const double mean = l_[0] * p.dwell0 + l_[1] * (T_ - p.dwell0);
    p.count = mean > 0.0 ? std::poisson_distribution<long>(mean)(rng_) : 0;
    return p;
  }

  Path run_with_prior(double p0) {
    return run(std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < p0 ? 0 : 1);
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
  double g_[2];
  double l_[2];
  double T_;
};

}  // namespace oracle
