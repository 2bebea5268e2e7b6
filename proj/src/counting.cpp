#include "fdro/counting.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fdro/quadrature.hpp"

namespace fdro {

void EmissionRates::validate() const {
  if (!(lambda_0 >= 0.0) || !std::isfinite(lambda_0))
    throw DomainError("lambda_0 must be finite and >= 0");
  if (!(lambda_1 >= 0.0) || !std::isfinite(lambda_1))
    throw DomainError("lambda_1 must be finite and >= 0");
}

void StatePriors::validate() const {
  if (!(p0 >= 0.0 && p0 <= 1.0)) throw DomainError("prior p0 must lie in [0, 1]");
}

double CountDistribution::tail(int n) const {
  if (n <= 0) return pmf.sum();
  if (n > n_max()) return 0.0;
  return pmf.tail(pmf.size() - n).sum();
}

double log_poisson_pmf(int n, double mean) {
  if (n < 0 || !(mean >= 0.0)) throw DomainError("poisson_pmf: n and mean must be >= 0");
  if (mean == 0.0) return n == 0 ? 0.0 : -INFINITY;
  return n * std::log(mean) - mean - std::lgamma(n + 1.0);
}

double poisson_pmf(int n, double mean) { return std::exp(log_poisson_pmf(n, mean)); }

namespace {

// Adds w * Poisson(. ; mean) over its numerically relevant window to each
// column of `out`. Recurrence runs outward from the mode.
void accumulate_poisson(Eigen::Ref<Eigen::MatrixXd> out, double mean,
                        const Eigen::Ref<const Eigen::RowVectorXd>& w) {
  const int n_max = static_cast<int>(out.rows()) - 1;
  if (mean == 0.0) {
    out.row(0) += w;
    return;
  }
  const double spread = 12.0 * std::sqrt(mean) + 10.0;
  const int lo = std::max(0, static_cast<int>(std::floor(mean - spread)));
  const int hi = std::min(n_max, static_cast<int>(std::ceil(mean + spread)));
  if (lo > hi) return;
  const int mode = std::clamp(static_cast<int>(std::floor(mean)), lo, hi);

  thread_local Eigen::VectorXd column;
  column.resize(hi - lo + 1);
  const double p_mode = poisson_pmf(mode, mean);
  column[mode - lo] = p_mode;
  double p = p_mode;
  for (int n = mode + 1; n <= hi; ++n) {
    p *= mean / n;
    column[n - lo] = p;
  }
  p = p_mode;
  for (int n = mode; n > lo; --n) {
    p *= n / mean;
    column[n - 1 - lo] = p;
  }
  out.middleRows(lo, hi - lo + 1).noalias() += column * w;
}

Eigen::MatrixXd joint_on_grid(const QuadratureGrid& grid, const SwitchingRates& rates,
                              const EmissionRates& emission, const Window& window, int n_max) {
  const double T = window.duration;
  Eigen::MatrixXd joint = Eigen::MatrixXd::Zero(n_max + 1, 4);
  Eigen::RowVectorXd w(4);
  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    const double tau = grid.nodes[j];
    const double mirrored = T - tau;
    w[0] = detail::even_density_from_zero(tau, rates.gamma_0, rates.gamma_1, T);
    w[1] = detail::odd_density_from_zero(tau, rates.gamma_0, rates.gamma_1, T);
    w[2] = detail::even_density_from_zero(mirrored, rates.gamma_1, rates.gamma_0, T);
    w[3] = detail::odd_density_from_zero(mirrored, rates.gamma_1, rates.gamma_0, T);
    w *= grid.weights[j];
    if (w.isZero(0.0)) continue;
    accumulate_poisson(joint, emission.lambda_0 * tau + emission.lambda_1 * mirrored, w);
  }
  return joint;
}

void validate_all(const SwitchingRates& rates, const EmissionRates& emission, const Window& window) {
  rates.validate();
  emission.validate();
  window.validate();
}

CountDistribution make_distribution(Eigen::VectorXd pmf, Conditioning conditioning, State state,
                                    CountParams params) {
  CountDistribution d;
  d.raw_mass = pmf.sum();
  d.pmf = pmf.cwiseMax(0.0);
  if (d.raw_mass > 0.0) d.pmf /= d.pmf.sum();
  d.conditioning = conditioning;
  d.state = state;
  d.params = std::move(params);
  return d;
}

}  // namespace

Eigen::VectorXd poisson_pmf_vector(double mean, int n_max) {
  if (!(mean >= 0.0) || n_max < 0) throw DomainError("poisson_pmf_vector: invalid arguments");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n_max + 1, 1);
  accumulate_poisson(out, mean, Eigen::RowVectorXd::Ones(1));
  return out.col(0);
}

int count_truncation(const EmissionRates& emission, const Window& window) {
  const double mu = std::max(emission.lambda_0, emission.lambda_1) * window.duration;
  const double bound = std::ceil(mu + 10.0 * std::sqrt(mu));
  if (bound > 5e7) throw DomainError("expected photon count too large for a dense PMF");
  return std::max(16, static_cast<int>(bound));
}

double ParityResolvedCounts::final_probability(State final_state, const StatePriors& priors) const {
  const State o = other(final_state);
  return priors.of(final_state) * parity[column(final_state, Parity::even)] +
         priors.of(o) * parity[column(o, Parity::odd)];
}

StatePriors ParityResolvedCounts::final_priors(const StatePriors& priors) const {
  const double f0 = final_probability(State::zero, priors);
  const double f1 = final_probability(State::one, priors);
  return StatePriors{f0 / (f0 + f1)};
}

ParityResolvedCounts parity_resolved_counts(const SwitchingRates& rates,
                                            const EmissionRates& emission, const Window& window) {
  validate_all(rates, emission, window);
  const int n_max = count_truncation(emission, window);
  const double T = window.duration;

  ParityResolvedCounts out;
  out.rates = rates;
  out.emission = emission;
  out.window = window;
  out.joint = integrate_converged(
      window, rates,
      [&](const QuadratureGrid& g) { return joint_on_grid(g, rates, emission, window, n_max); },
      "count PMF");

  // Continuous parity masses on the finest grid are the column sums up to
  // truncation; recompute them directly so truncation does not leak in.
  out.parity = integrate_converged(
      window, rates,
      [&](const QuadratureGrid& g) {
        Eigen::Vector4d m = Eigen::Vector4d::Zero();
        for (Eigen::Index j = 0; j < g.size(); ++j) {
          const double tau = g.nodes[j];
          const double w = g.weights[j];
          m[0] += w * detail::even_density_from_zero(tau, rates.gamma_0, rates.gamma_1, T);
          m[1] += w * detail::odd_density_from_zero(tau, rates.gamma_0, rates.gamma_1, T);
          m[2] += w * detail::even_density_from_zero(T - tau, rates.gamma_1, rates.gamma_0, T);
          m[3] += w * detail::odd_density_from_zero(T - tau, rates.gamma_1, rates.gamma_0, T);
        }
        return m;
      },
      "parity masses");

  const double survive_0 = std::exp(-rates.gamma_0 * T);
  const double survive_1 = std::exp(-rates.gamma_1 * T);
  out.joint.col(0) += survive_0 * poisson_pmf_vector(emission.lambda_0 * T, n_max);
  out.joint.col(2) += survive_1 * poisson_pmf_vector(emission.lambda_1 * T, n_max);
  out.parity[0] += survive_0;
  out.parity[2] += survive_1;
  return out;
}

CountDistribution count_pmf_given_initial(State initial, const ParityResolvedCounts& counts) {
  const int c = ParityResolvedCounts::column(initial, Parity::even);
  Eigen::VectorXd pmf = counts.joint.col(c) + counts.joint.col(c + 1);
  return make_distribution(std::move(pmf), Conditioning::start, initial,
                           CountParams{counts.rates, counts.emission, counts.window, std::nullopt});
}

CountDistribution count_pmf_given_final(State final_state, const ParityResolvedCounts& counts,
                                        const StatePriors& priors) {
  priors.validate();
  const State o = other(final_state);
  const int stay = ParityResolvedCounts::column(final_state, Parity::even);
  const int flip = ParityResolvedCounts::column(o, Parity::odd);
  const double denominator = counts.final_probability(final_state, priors);
  if (!(denominator >= 1e-300)) {
    throw UnreachableStateError(std::string("final state |") +
                                (final_state == State::zero ? "0" : "1") +
                                "> is unreachable for these rates and priors");
  }
  Eigen::VectorXd numerator =
      priors.of(final_state) * counts.joint.col(stay) + priors.of(o) * counts.joint.col(flip);
  return make_distribution(numerator / denominator, Conditioning::end, final_state,
                           CountParams{counts.rates, counts.emission, counts.window, priors});
}

CountDistribution count_pmf_given_initial(State initial, const SwitchingRates& rates,
                                          const EmissionRates& emission, const Window& window) {
  return count_pmf_given_initial(initial, parity_resolved_counts(rates, emission, window));
}

CountDistribution count_pmf_given_final(State final_state, const SwitchingRates& rates,
                                        const EmissionRates& emission, const Window& window,
                                        std::optional<StatePriors> priors) {
  const StatePriors p = priors ? *priors : steady_state_priors(rates);
  return count_pmf_given_final(final_state, parity_resolved_counts(rates, emission, window), p);
}

CountDistribution count_pmf_electron_simplified(ElectronForm which, double gamma,
                                                const EmissionRates& emission,
                                                const Window& window, const StatePriors& priors) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma))
    throw DomainError("gamma must be finite and >= 0");
  emission.validate();
  window.validate();
  priors.validate();
  const double T = window.duration;
  const int n_max = count_truncation(emission, window);
  const SwitchingRates rates{gamma, 0.0};
  const CountParams params{rates, emission, window, priors};

  // int_0^T gamma e^{-gamma t} Poiss(n; lambda_0 t + lambda_1 (T - t)) dt
  auto decayed_part = [&]() -> Eigen::VectorXd {
    if (gamma == 0.0) return Eigen::VectorXd::Zero(n_max + 1);
    return integrate_converged(
        window, rates,
        [&](const QuadratureGrid& g) {
          Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n_max + 1, 1);
          Eigen::RowVectorXd w(1);
          for (Eigen::Index j = 0; j < g.size(); ++j) {
            const double t = g.nodes[j];
            w[0] = g.weights[j] * gamma * std::exp(-gamma * t);
            accumulate_poisson(acc, emission.lambda_0 * t + emission.lambda_1 * (T - t), w);
          }
          return Eigen::VectorXd(acc.col(0));
        },
        "electron decayed component");
  };
  const Eigen::VectorXd bright = poisson_pmf_vector(emission.lambda_0 * T, n_max);
  const Eigen::VectorXd dark = poisson_pmf_vector(emission.lambda_1 * T, n_max);

  switch (which) {
    case ElectronForm::initial_0:
      return make_distribution(decayed_part() + std::exp(-gamma * T) * bright, Conditioning::start,
                               State::zero, params);
    case ElectronForm::initial_1:
      return make_distribution(dark, Conditioning::start, State::one, params);
    case ElectronForm::final_0:
      return make_distribution(bright, Conditioning::end, State::zero, params);
    case ElectronForm::final_1: {
      const double decayed_mass = -std::expm1(-gamma * T);
      const double denominator = priors.p1() + priors.p0 * decayed_mass;
      if (!(denominator >= 1e-300))
        throw UnreachableStateError("final state |1> is unreachable for these rates and priors");
      return make_distribution((priors.p1() * dark + priors.p0 * decayed_part()) / denominator,
                               Conditioning::end, State::one, params);
    }
  }
  throw DomainError("unknown electron form");
}

StatePriors steady_state_priors(const SwitchingRates& rates) {
  rates.validate();
  const double total = rates.gamma_0 + rates.gamma_1;
  if (!(total > 0.0))
    throw DegeneratePriorsError("steady state undefined when both switching rates are zero; "
                                "supply priors explicitly");
  return StatePriors{rates.gamma_1 / total};
}

StatePriors decayed_priors(const StatePriors& initial, double gamma, double t) {
  initial.validate();
  if (!(t >= 0.0) || !(gamma >= 0.0)) throw DomainError("decayed_priors: gamma and t must be >= 0");
  return StatePriors{initial.p0 * std::exp(-gamma * t)};
}

}  // namespace fdro
