#include "fdro/core_stats.hpp"

#include <Eigen/Core>
#include <string>

#include "fdro/quadrature.hpp"

namespace fdro {

void SwitchingRates::validate() const {
  if (!(gamma_0 >= 0.0) || !std::isfinite(gamma_0))
    throw DomainError("gamma_0 must be finite and >= 0");
  if (!(gamma_1 >= 0.0) || !std::isfinite(gamma_1))
    throw DomainError("gamma_1 must be finite and >= 0");
}

void Window::validate() const {
  if (!(duration > 0.0) || !std::isfinite(duration))
    throw DomainError("window duration must be finite and > 0");
  if (grid_nodes < 3 || grid_nodes % 2 == 0)
    throw DomainError("grid_nodes must be an odd integer >= 3, got " + std::to_string(grid_nodes));
}

namespace {

void check_tau(double tau, const Window& window, const char* who) {
  if (!(tau >= 0.0) || !(tau <= window.duration))
    throw DomainError(std::string(who) + ": tau must lie in [0, T]");
}

}  // namespace

double dwell_density_odd_given_0(double tau, const SwitchingRates& rates, const Window& window) {
  rates.validate();
  window.validate();
  check_tau(tau, window, "dwell_density_odd_given_0");
  return detail::odd_density_from_zero(tau, rates.gamma_0, rates.gamma_1, window.duration);
}

double dwell_density_even_given_0(double tau, const SwitchingRates& rates, const Window& window) {
  rates.validate();
  window.validate();
  check_tau(tau, window, "dwell_density_even_given_0");
  return detail::even_density_from_zero(tau, rates.gamma_0, rates.gamma_1, window.duration);
}

double dwell_density_parity(Parity parity, State initial, double tau, const SwitchingRates& rates,
                            const Window& window) {
  rates.validate();
  window.validate();
  check_tau(tau, window, "dwell_density_parity");
  const double T = window.duration;
  if (initial == State::zero) {
    return parity == Parity::odd ? detail::odd_density_from_zero(tau, rates.gamma_0, rates.gamma_1, T)
                                 : detail::even_density_from_zero(tau, rates.gamma_0, rates.gamma_1, T);
  }
  const double mirrored = T - tau;
  return parity == Parity::odd
             ? detail::odd_density_from_zero(mirrored, rates.gamma_1, rates.gamma_0, T)
             : detail::even_density_from_zero(mirrored, rates.gamma_1, rates.gamma_0, T);
}

DwellDensity::DwellDensity(State initial, const SwitchingRates& rates, const Window& window)
    : initial_(initial), rates_(rates), window_(window) {
  rates_.validate();
  window_.validate();
}

double DwellDensity::even_part(double tau) const {
  return dwell_density_parity(Parity::even, initial_, tau, rates_, window_);
}

double DwellDensity::odd_part(double tau) const {
  return dwell_density_parity(Parity::odd, initial_, tau, rates_, window_);
}

double DwellDensity::operator()(double tau) const { return even_part(tau) + odd_part(tau); }

namespace {

// weights . (density, tau * density) on a grid
Eigen::Vector2d continuous_moments(const DwellDensity& d, const QuadratureGrid& grid) {
  Eigen::Vector2d m = Eigen::Vector2d::Zero();
  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    const double tau = grid.nodes[j];
    const double w = grid.weights[j] * d(tau);
    m[0] += w;
    m[1] += w * tau;
  }
  return m;
}

}  // namespace

double DwellDensity::total_mass() const {
  const Eigen::Vector2d m = integrate_converged(
      window_, rates_, [this](const QuadratureGrid& g) { return continuous_moments(*this, g); },
      "dwell density mass");
  return m[0] + boundary_mass();
}

double DwellDensity::mean() const {
  const Eigen::Vector2d m = integrate_converged(
      window_, rates_, [this](const QuadratureGrid& g) { return continuous_moments(*this, g); },
      "dwell density mean");
  return m[1] + boundary_mass() * boundary_location();
}

DwellDensity dwell_density_given_initial(State initial, const SwitchingRates& rates,
                                         const Window& window) {
  return DwellDensity(initial, rates, window);
}

double parity_probability(Parity parity, State initial, const SwitchingRates& rates,
                          const Window& window) {
  const DwellDensity density(initial, rates, window);
  const double even_continuous = integrate_converged(
      window, rates,
      [&](const QuadratureGrid& g) {
        double s = 0.0;
        for (Eigen::Index j = 0; j < g.size(); ++j) s += g.weights[j] * density.even_part(g.nodes[j]);
        return s;
      },
      "parity probability");
  const double even = even_continuous + density.boundary_mass();
  return parity == Parity::even ? even : 1.0 - even;
}

}  // namespace fdro
