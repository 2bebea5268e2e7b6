#pragma once

// Dwell-time statistics of an asymmetric two-state telegraph process
// observed over a fixed window [0, T].
//
// Convention used throughout the library: index i in {0, 1} labels the
// state, gamma_i is the rate of LEAVING state i, lambda_i is the photon
// detection rate while IN state i. tau always denotes the total time spent
// in state |0> during the window.

#include <cmath>
#include <cstdint>

#include "fdro/bessel.hpp"
#include "fdro/errors.hpp"

namespace fdro {

enum class State : std::uint8_t { zero = 0, one = 1 };
enum class Parity : std::uint8_t { even, odd };

constexpr State other(State s) { return s == State::zero ? State::one : State::zero; }
constexpr int index_of(State s) { return static_cast<int>(s); }

struct SwitchingRates {
  double gamma_0 = 0.0;
  double gamma_1 = 0.0;

  double leaving(State s) const { return s == State::zero ? gamma_0 : gamma_1; }
  SwitchingRates swapped() const { return {gamma_1, gamma_0}; }
  void validate() const;
};

struct Window {
  double duration = 0.0;  // T, seconds
  int grid_nodes = 2001;  // Simpson nodes of the base quadrature grid

  void validate() const;
};

// ---------------------------------------------------------------------------
// Scalar kernels

// Density of the sum of n i.i.d. Exp(gamma) increments, evaluated at x.
template <typename Scalar>
Scalar erlang_density(int n, Scalar gamma, Scalar x) {
  if (n < 1) throw DomainError("erlang_density: n must be >= 1");
  if (!(gamma >= Scalar(0)) || !(x >= Scalar(0)))
    throw DomainError("erlang_density: gamma and x must be >= 0");
  if (gamma == Scalar(0)) return Scalar(0);
  const Scalar gx = gamma * x;
  if (gx == Scalar(0)) return n == 1 ? gamma : Scalar(0);
  using std::exp;
  using std::lgamma;
  using std::log;
  return exp(log(gamma) - gx + Scalar(n - 1) * log(gx) - lgamma(Scalar(n)));
}

// P(N_x = n): the smallest number of Exp(gamma) increments whose sum
// exceeds x equals n. N_x - 1 is Poisson(gamma x).
template <typename Scalar>
Scalar exceed_count_pmf(int n, Scalar gamma, Scalar x) {
  if (n < 1) throw DomainError("exceed_count_pmf: n must be >= 1");
  if (!(gamma >= Scalar(0)) || !(x >= Scalar(0)))
    throw DomainError("exceed_count_pmf: gamma and x must be >= 0");
  const Scalar gx = gamma * x;
  if (gx == Scalar(0)) return n == 1 ? Scalar(1) : Scalar(0);
  using std::exp;
  using std::lgamma;
  using std::log;
  return exp(-gx + Scalar(n - 1) * log(gx) - lgamma(Scalar(n)));
}

namespace detail {

// Odd number of switches starting from |0>:
//   g0 exp((g1-g0) tau - g1 T) I0(2 sqrt(g0 g1 tau (T-tau)))
template <typename Scalar>
Scalar odd_density_from_zero(Scalar tau, Scalar g0, Scalar g1, Scalar T) {
  if (g0 == Scalar(0)) return Scalar(0);
  const Scalar outer = (g1 - g0) * tau - g1 * T;
  const Scalar product = g0 * g1 * tau * (T - tau);
  if (!(product > Scalar(0))) return g0 * std::exp(outer);
  const Scalar z = Scalar(2) * std::sqrt(product);
  return g0 * std::exp(outer + z) * bessel_i0e(z);
}

// Even (>= 2) number of switches starting from |0>:
//   exp((g1-g0) tau - g1 T) sqrt(g0 g1 tau / (T-tau)) I1(z)
// rewritten as exp(...) g0 g1 tau (2 I1(z) / z), which is finite at tau = T.
template <typename Scalar>
Scalar even_density_from_zero(Scalar tau, Scalar g0, Scalar g1, Scalar T) {
  if (g0 == Scalar(0) || g1 == Scalar(0) || tau == Scalar(0)) return Scalar(0);
  const Scalar outer = (g1 - g0) * tau - g1 * T;
  const Scalar product = g0 * g1 * tau * (T - tau);
  const Scalar z = product > Scalar(0) ? Scalar(2) * std::sqrt(product) : Scalar(0);
  return std::exp(outer + z) * g0 * g1 * tau * bessel_i1e_over_half_z(z);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Typed densities. All take tau in [0, T].

double dwell_density_odd_given_0(double tau, const SwitchingRates& rates, const Window& window);
double dwell_density_even_given_0(double tau, const SwitchingRates& rates, const Window& window);

// Parity-resolved densities for either initial state; |1> follows from |0>
// by gamma_0 <-> gamma_1, tau <-> T - tau.
double dwell_density_parity(Parity parity, State initial, double tau, const SwitchingRates& rates,
                            const Window& window);

// Distribution of the time spent in |0> given the initial state: an
// absolutely continuous part on [0, T] plus a point mass for the switchless
// path (at tau = T from |0>, at tau = 0 from |1>).
class DwellDensity {
 public:
  DwellDensity(State initial, const SwitchingRates& rates, const Window& window);

  double operator()(double tau) const;
  double even_part(double tau) const;
  double odd_part(double tau) const;

  double boundary_mass() const { return std::exp(-rates_.leaving(initial_) * window_.duration); }
  double boundary_location() const { return initial_ == State::zero ? window_.duration : 0.0; }

  // Quadrature summaries (converged per the library's refinement policy).
  double total_mass() const;
  double mean() const;

  State initial() const { return initial_; }
  const SwitchingRates& rates() const { return rates_; }
  const Window& window() const { return window_; }

 private:
  State initial_;
  SwitchingRates rates_;
  Window window_;
};

DwellDensity dwell_density_given_initial(State initial, const SwitchingRates& rates,
                                         const Window& window);

// Probability that the number of switches has the given parity. Zero
// switches counts as even.
double parity_probability(Parity parity, State initial, const SwitchingRates& rates,
                          const Window& window);

}  // namespace fdro
