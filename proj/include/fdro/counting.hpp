#pragma once

// Photon-count distributions of a two-state emitter whose state switches
// during the counting window, conditioned either on the state at t = 0
// (start) or on the state at t = T (end).

#include <Eigen/Core>
#include <optional>

#include "fdro/core_stats.hpp"

namespace fdro {

struct EmissionRates {
  double lambda_0 = 0.0;  // detected photon rate in |0>, Hz
  double lambda_1 = 0.0;  // detected photon rate in |1>, Hz

  double of(State s) const { return s == State::zero ? lambda_0 : lambda_1; }
  void validate() const;
};

struct StatePriors {
  double p0 = 0.5;

  double p1() const { return 1.0 - p0; }
  double of(State s) const { return s == State::zero ? p0 : p1(); }
  void validate() const;
};

enum class Conditioning : std::uint8_t { start, end };

struct CountParams {
  SwitchingRates rates;
  EmissionRates emission;
  Window window;
  std::optional<StatePriors> priors;  // priors at t = 0, when they entered the result
};

// PMF over photon counts n = 0..n_max.
struct CountDistribution {
  Eigen::VectorXd pmf;
  Conditioning conditioning = Conditioning::start;
  State state = State::zero;
  CountParams params;
  // Mass captured by quadrature and truncation before renormalization.
  double raw_mass = 1.0;

  int n_max() const { return static_cast<int>(pmf.size()) - 1; }
  double operator()(int n) const { return (n >= 0 && n <= n_max()) ? pmf[n] : 0.0; }
  // P(count >= n)
  double tail(int n) const;
};

// log(e^-mu mu^n / n!)
double log_poisson_pmf(int n, double mean);
double poisson_pmf(int n, double mean);
Eigen::VectorXd poisson_pmf_vector(double mean, int n_max);

// ceil(mu + 10 sqrt(mu)) with mu = max(lambda) T, floored at 16 so the
// truncated tail stays below 1e-8 for small means.
int count_truncation(const EmissionRates& emission, const Window& window);

// Joint count/parity masses for both initial states on one shared grid.
// Column order: (|0>, even), (|0>, odd), (|1>, even), (|1>, odd). The
// switchless path is part of the even column.
struct ParityResolvedCounts {
  Eigen::MatrixXd joint;     // (n_max + 1) x 4, entries p(n and parity | initial)
  Eigen::Vector4d parity;    // P(parity | initial), same column order
  SwitchingRates rates;
  EmissionRates emission;
  Window window;

  static constexpr int column(State initial, Parity parity) {
    return 2 * index_of(initial) + (parity == Parity::odd ? 1 : 0);
  }
  // Probability of ending in `final_state` given priors at t = 0.
  double final_probability(State final_state, const StatePriors& priors) const;
  StatePriors final_priors(const StatePriors& priors) const;
};

ParityResolvedCounts parity_resolved_counts(const SwitchingRates& rates,
                                            const EmissionRates& emission, const Window& window);

CountDistribution count_pmf_given_initial(State initial, const ParityResolvedCounts& counts);
CountDistribution count_pmf_given_final(State final_state, const ParityResolvedCounts& counts,
                                        const StatePriors& priors);

CountDistribution count_pmf_given_initial(State initial, const SwitchingRates& rates,
                                          const EmissionRates& emission, const Window& window);
// Priors describe t = 0; when omitted, the steady state of `rates` is used.
CountDistribution count_pmf_given_final(State final_state, const SwitchingRates& rates,
                                        const EmissionRates& emission, const Window& window,
                                        std::optional<StatePriors> priors = std::nullopt);

// gamma_1 -> 0 closed forms (|0> decays at `gamma`, |1> never leaves).
enum class ElectronForm : std::uint8_t { initial_0, initial_1, final_0, final_1 };

CountDistribution count_pmf_electron_simplified(ElectronForm which, double gamma,
                                                const EmissionRates& emission,
                                                const Window& window, const StatePriors& priors);

StatePriors steady_state_priors(const SwitchingRates& rates);
StatePriors decayed_priors(const StatePriors& initial, double gamma, double t);

}  // namespace fdro
