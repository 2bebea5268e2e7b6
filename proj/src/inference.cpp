#include "fdro/inference.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace fdro {

void DecisionRule::validate() const {
  if (threshold < 0) throw DomainError("decision threshold must be >= 0");
  if (exclusion_lo && *exclusion_lo < 0) throw DomainError("exclusion_lo must be >= 0");
  if (exclusion_lo && exclusion_hi && *exclusion_lo > *exclusion_hi)
    throw DomainError("exclusion interval must satisfy lo <= hi");
}

bool DecisionRule::discards(int n) const {
  if (!exclusion_lo && !exclusion_hi) return false;
  const int lo = exclusion_lo.value_or(0);
  const int hi = exclusion_hi.value_or(std::numeric_limits<int>::max());
  return n >= lo && n <= hi;
}

DecisionRule selection_rule(State target, int threshold) {
  DecisionRule rule;
  rule.threshold = threshold;
  rule.bright_state = target;
  if (threshold > 0) {
    rule.exclusion_lo = 0;
    rule.exclusion_hi = threshold - 1;
  }
  return rule;
}

void check_compatible(const CountDistribution& a, const CountDistribution& b) {
  if (a.n_max() != b.n_max())
    throw IncompatibleDistributionsError("distributions have different n_max (" +
                                         std::to_string(a.n_max()) + " vs " +
                                         std::to_string(b.n_max()) + ")");
  if (a.conditioning != b.conditioning)
    throw IncompatibleDistributionsError("distributions are conditioned at different times");
}

double likelihood_ratio(int n, const CountDistribution& dist0, const CountDistribution& dist1,
                        std::optional<StatePriors> priors) {
  check_compatible(dist0, dist1);
  double num = dist0(n);
  double den = dist1(n);
  if (priors) {
    num *= priors->p0;
    den *= priors->p1();
  }
  if (den == 0.0) return num == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return num / den;
}

Decision ml_decide(int n, const CountDistribution& dist0, const CountDistribution& dist1,
                   std::optional<StatePriors> priors) {
  const double ratio = likelihood_ratio(n, dist0, dist1, priors);
  if (ratio > 1.0) return Decision::zero;
  if (ratio < 1.0) return Decision::one;
  return Decision::coin_flip;
}

double error_rate_ml(const CountDistribution& dist0, const CountDistribution& dist1,
                     const StatePriors& priors, Weighting weighting) {
  check_compatible(dist0, dist1);
  priors.validate();
  double error = 0.0;
  for (int n = 0; n <= dist0.n_max(); ++n) {
    const double a = priors.p0 * dist0(n);
    const double b = priors.p1() * dist1(n);
    double lhs = a;
    double rhs = b;
    if (weighting == Weighting::unweighted) {
      lhs = dist0(n);
      rhs = dist1(n);
    }
    if (lhs > rhs) {
      error += b;
    } else if (lhs < rhs) {
      error += a;
    } else {
      error += 0.5 * (a + b);
    }
  }
  return error;
}

int ml_crossing(const CountDistribution& dist_target, const CountDistribution& dist_other,
                const StatePriors& priors) {
  check_compatible(dist_target, dist_other);
  const double wt = priors.of(dist_target.state);
  const double wo = priors.of(dist_other.state);
  int n = dist_target.n_max() + 1;
  while (n > 0 && wt * dist_target(n - 1) >= wo * dist_other(n - 1)) --n;
  return n;
}

DecisionMetrics threshold_metrics(const DecisionRule& rule, const CountDistribution& dist_target,
                                  const CountDistribution& dist_other, const StatePriors& priors) {
  check_compatible(dist_target, dist_other);
  rule.validate();
  priors.validate();
  const State target = dist_target.state;
  const double wt = priors.of(target);
  const double wo = priors.of(dist_other.state);
  double kept = 0.0;
  double correct = 0.0;
  double assigned_target = 0.0;
  for (int n = 0; n <= dist_target.n_max(); ++n) {
    if (rule.discards(n)) continue;
    const double mt = wt * dist_target(n);
    const double mo = wo * dist_other(n);
    kept += mt + mo;
    if (rule.assign(n) == target) {
      correct += mt;
      assigned_target += mt + mo;
    } else {
      correct += mo;
    }
  }
  if (!(kept > 0.0)) throw EmptyAcceptanceError("decision rule keeps no probability mass");
  DecisionMetrics m;
  m.efficiency = kept;
  m.fidelity = correct / kept;
  m.error_rate = 1.0 - m.fidelity;
  m.success_rate = assigned_target;
  return m;
}

std::vector<CurvePoint> selection_curve(const CountDistribution& dist_target,
                                        const CountDistribution& dist_other,
                                        const StatePriors& priors) {
  check_compatible(dist_target, dist_other);
  priors.validate();
  const double wt = priors.of(dist_target.state);
  const double wo = priors.of(dist_other.state);
  const int n_max = dist_target.n_max();
  // tails accumulated from the top so small masses keep relative accuracy
  std::vector<double> tail_t(n_max + 2, 0.0), tail_o(n_max + 2, 0.0);
  for (int n = n_max; n >= 0; --n) {
    tail_t[n] = tail_t[n + 1] + wt * dist_target(n);
    tail_o[n] = tail_o[n + 1] + wo * dist_other(n);
  }
  std::vector<CurvePoint> curve;
  for (int n = 0; n <= n_max; ++n) {
    const double kept = tail_t[n] + tail_o[n];
    if (!(kept > 0.0)) break;
    CurvePoint p;
    p.threshold = n;
    p.efficiency = kept;
    p.fidelity = tail_t[n] / kept;
    p.error_rate = tail_o[n] / kept;
    p.success_rate = kept;
    curve.push_back(p);
  }
  return curve;
}

std::vector<CurvePoint> initial_estimate_with_survival(const CountDistribution& dist_target_initial,
                                                       const CountDistribution& dist_other_initial,
                                                       const StatePriors& priors, double gamma,
                                                       const Window& window) {
  if (dist_target_initial.conditioning != Conditioning::start)
    throw IncompatibleDistributionsError("baseline requires start-conditioned distributions");
  if (!(gamma >= 0.0)) throw DomainError("survival rate must be >= 0");
  window.validate();
  const double survival = std::exp(-gamma * window.duration);
  std::vector<CurvePoint> curve = selection_curve(dist_target_initial, dist_other_initial, priors);
  for (CurvePoint& p : curve) {
    p.fidelity *= survival;
    p.error_rate = 1.0 - p.fidelity;
  }
  return curve;
}

}  // namespace fdro
