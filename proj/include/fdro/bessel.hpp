#pragma once

// Exponentially scaled modified Bessel functions of the first kind.
//
//   bessel_i0e(z) = exp(-z) * I0(z)
//   bessel_i1e(z) = exp(-z) * I1(z)
//
// Both stay O(1/sqrt(z)) for large z, so callers can fold exp(+z) into an
// outer exponent and exponentiate once. Power series below the switch
// point, Hankel asymptotic expansion above it.

#include <cmath>
#include <limits>
#include <numbers>

#include "fdro/errors.hpp"

namespace fdro {

namespace detail {

template <typename Scalar>
constexpr Scalar bessel_series_limit() {
  return Scalar(30);
}

// sum_k (z^2/4)^k / (k! (k+nu)!) for nu in {0, 1}; all terms positive.
template <typename Scalar>
Scalar bessel_power_sum(Scalar z, int nu) {
  const Scalar q = z * z / Scalar(4);
  Scalar term = Scalar(1);
  Scalar sum = term;
  for (int k = 1; k < 500; ++k) {
    term *= q / (Scalar(k) * Scalar(k + nu));
    sum += term;
    if (term <= sum * std::numeric_limits<Scalar>::epsilon()) break;
  }
  return sum;
}

// exp(-z) I_nu(z) ~ 1/sqrt(2 pi z) * sum_k (-1)^k a_k(nu) / z^k
template <typename Scalar>
Scalar bessel_scaled_asymptotic(Scalar z, int nu) {
  const Scalar mu = Scalar(4 * nu * nu);
  Scalar term = Scalar(1);
  Scalar sum = term;
  for (int k = 1; k < 200; ++k) {
    const Scalar odd = Scalar(2 * k - 1);
    const Scalar next = -term * (mu - odd * odd) / (Scalar(k) * Scalar(8) * z);
    if (std::abs(next) >= std::abs(term)) break;  // series started to diverge
    term = next;
    sum += term;
    if (std::abs(term) <= std::abs(sum) * std::numeric_limits<Scalar>::epsilon()) break;
  }
  return sum / std::sqrt(Scalar(2) * std::numbers::pi_v<Scalar> * z);
}

}  // namespace detail

template <typename Scalar>
Scalar bessel_i0e(Scalar z) {
  if (!(z >= Scalar(0))) throw DomainError("bessel_i0e: argument must be >= 0");
  if (z <= detail::bessel_series_limit<Scalar>()) {
    return std::exp(-z) * detail::bessel_power_sum(z, 0);
  }
  return detail::bessel_scaled_asymptotic(z, 0);
}

template <typename Scalar>
Scalar bessel_i1e(Scalar z) {
  if (!(z >= Scalar(0))) throw DomainError("bessel_i1e: argument must be >= 0");
  if (z <= detail::bessel_series_limit<Scalar>()) {
    return std::exp(-z) * (z / Scalar(2)) * detail::bessel_power_sum(z, 1);
  }
  return detail::bessel_scaled_asymptotic(z, 1);
}

// exp(-z) * 2 I1(z) / z, finite at z = 0 where it equals 1.
template <typename Scalar>
Scalar bessel_i1e_over_half_z(Scalar z) {
  if (!(z >= Scalar(0))) throw DomainError("bessel_i1e_over_half_z: argument must be >= 0");
  if (z <= detail::bessel_series_limit<Scalar>()) {
    return std::exp(-z) * detail::bessel_power_sum(z, 1);
  }
  return Scalar(2) * detail::bessel_scaled_asymptotic(z, 1) / z;
}

}  // namespace fdro
