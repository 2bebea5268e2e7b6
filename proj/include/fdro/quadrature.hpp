#pragma once

#include <Eigen/Core>
#include <cmath>
#include <string>
#include <type_traits>

#include "fdro/core_stats.hpp"
#include "fdro/errors.hpp"

namespace fdro {

inline constexpr double kQuadratureRelTol = 1e-6;
inline constexpr int kMaxRefinements = 4;

// Composite Simpson rule on [0, T]. Shared panel endpoints carry summed
// weights, so `weights.dot(f(nodes))` is the whole integral.
struct QuadratureGrid {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;

  Eigen::Index size() const { return nodes.size(); }
};

// Uniform grid with (grid_nodes - 1) * 2^refinement intervals when the
// switching scale is resolved; otherwise panels are graded geometrically
// toward both endpoints to capture exp(-gamma tau) boundary layers.
QuadratureGrid make_grid(const Window& window, const SwitchingRates& rates, int refinement = 0);

namespace detail {

inline double l1_norm(double x) { return std::abs(x); }

template <typename Derived>
double l1_norm(const Eigen::MatrixBase<Derived>& x) {
  return x.cwiseAbs().sum();
}

}  // namespace detail

// Evaluates `eval(grid)` on successively doubled grids until two
// consecutive results agree to kQuadratureRelTol in L1. Returns the finer
// result. Throws ConvergenceError after kMaxRefinements doublings.
template <typename Eval>
auto integrate_converged(const Window& window, const SwitchingRates& rates, Eval&& eval,
                         const std::string& what) {
  using Result = std::decay_t<decltype(eval(std::declval<const QuadratureGrid&>()))>;
  Result coarse = eval(make_grid(window, rates, 0));
  double change = 0.0;
  for (int r = 1; r <= kMaxRefinements; ++r) {
    Result fine = eval(make_grid(window, rates, r));
    const double scale = detail::l1_norm(fine);
    if constexpr (std::is_arithmetic_v<Result>) {
      change = std::abs(fine - coarse);
    } else {
      change = detail::l1_norm(fine - coarse);
    }
    if (scale < 1e-300 || change <= kQuadratureRelTol * scale) return fine;
    change /= scale;
    coarse = std::move(fine);
  }
  throw ConvergenceError(what + ": quadrature did not converge (relative change " +
                         std::to_string(change) + " after " + std::to_string(kMaxRefinements) +
                         " refinements)");
}

}  // namespace fdro
