#include "fdro/quadrature.hpp"

#include <algorithm>
#include <vector>

namespace fdro {

namespace {

constexpr int kUniformPanels = 64;
constexpr int kMinIntervalsPerGradedPanel = 16;
// A boundary layer thinner than this many base intervals triggers grading.
constexpr double kResolvedIntervalsPerLayer = 40.0;

std::vector<double> panel_breaks(double T, double gamma_max, int base_intervals) {
  std::vector<double> breaks{0.0, T};
  if (gamma_max * T * kResolvedIntervalsPerLayer <= base_intervals) return breaks;

  for (int k = 1; k < kUniformPanels; ++k) breaks.push_back(T * k / kUniformPanels);
  const double limit = T / kUniformPanels;
  for (double x = 1.0 / (gamma_max * 64.0); x < limit; x *= 2.0) {
    breaks.push_back(x);
    breaks.push_back(T - x);
  }
  std::sort(breaks.begin(), breaks.end());
  const double eps = T * 1e-13;
  breaks.erase(std::unique(breaks.begin(), breaks.end(),
                           [eps](double a, double b) { return std::abs(a - b) <= eps; }),
               breaks.end());
  breaks.front() = 0.0;
  breaks.back() = T;
  return breaks;
}

}  // namespace

QuadratureGrid make_grid(const Window& window, const SwitchingRates& rates, int refinement) {
  window.validate();
  rates.validate();
  const double T = window.duration;
  const int base = (window.grid_nodes - 1) << refinement;
  const double gamma_max = std::max(rates.gamma_0, rates.gamma_1);
  const std::vector<double> breaks = panel_breaks(T, gamma_max, base);
  const bool graded = breaks.size() > 2;

  std::vector<int> intervals(breaks.size() - 1);
  Eigen::Index total = 1;
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    const double len = breaks[p + 1] - breaks[p];
    int m = base;
    if (graded) {
      m = 2 * static_cast<int>(std::ceil(base * len / (2.0 * T)));
      m = std::max(m, kMinIntervalsPerGradedPanel << refinement);
    }
    intervals[p] = m;
    total += m;
  }

  QuadratureGrid grid;
  grid.nodes.resize(total);
  grid.weights.setZero(total);
  Eigen::Index at = 0;
  grid.nodes[0] = 0.0;
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    const double a = breaks[p];
    const double b = breaks[p + 1];
    const int m = intervals[p];
    const double h = (b - a) / m;
    for (int i = 0; i <= m; ++i) {
      const double w = (i == 0 || i == m) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      grid.nodes[at + i] = (i == m) ? b : a + h * i;
      grid.weights[at + i] += w * h / 3.0;
    }
    at += m;
  }
  return grid;
}

}  // namespace fdro
