#pragma once

// Decision rules on photon counts and their figures of merit.

#include <optional>
#include <vector>

#include "fdro/counting.hpp"

namespace fdro {

enum class TiePolicy : std::uint8_t { half_mass, assign_0, assign_1 };

// Counts >= threshold are assigned to `bright_state`, counts below it to the
// other state. Counts inside the optional exclusion interval
// [exclusion_lo, exclusion_hi] are discarded; a missing bound extends the
// interval to 0 or to infinity respectively.
struct DecisionRule {
  int threshold = 0;
  State bright_state = State::one;
  TiePolicy tie_policy = TiePolicy::half_mass;
  std::optional<int> exclusion_lo;
  std::optional<int> exclusion_hi;

  void validate() const;
  bool discards(int n) const;
  State assign(int n) const { return n >= threshold ? bright_state : other(bright_state); }
};

// Keeps only counts >= threshold, all assigned to `target`.
DecisionRule selection_rule(State target, int threshold);

struct DecisionMetrics {
  double error_rate = 0.0;
  double fidelity = 0.0;
  double efficiency = 1.0;    // kept fraction of shots
  double success_rate = 0.0;  // kept and assigned the target state
};

// Which likelihood drives a maximum-likelihood decision.
enum class Weighting : std::uint8_t { prior_weighted, unweighted };

// p(n|0) / p(n|1), optionally times p(0)/p(1). +inf when only the
// denominator vanishes, 0 when only the numerator does, 1 when both do.
double likelihood_ratio(int n, const CountDistribution& dist0, const CountDistribution& dist1,
                        std::optional<StatePriors> priors = std::nullopt);

enum class Decision : std::uint8_t { zero, one, coin_flip };

Decision ml_decide(int n, const CountDistribution& dist0, const CountDistribution& dist1,
                   std::optional<StatePriors> priors = std::nullopt);

// Expected error of the maximum-likelihood rule, weighted by the priors.
// With prior weighting this is sum_n min(p0 p(n|0), p1 p(n|1)). Ties cost
// half their mass.
double error_rate_ml(const CountDistribution& dist0, const CountDistribution& dist1,
                     const StatePriors& priors, Weighting weighting = Weighting::prior_weighted);

// Smallest n such that the prior-weighted target likelihood is at least the
// other's for every count >= n.
int ml_crossing(const CountDistribution& dist_target, const CountDistribution& dist_other,
                const StatePriors& priors);

DecisionMetrics threshold_metrics(const DecisionRule& rule, const CountDistribution& dist_target,
                                  const CountDistribution& dist_other, const StatePriors& priors);

struct CurvePoint {
  int threshold = 0;
  double efficiency = 0.0;
  double error_rate = 0.0;
  double fidelity = 0.0;
  double success_rate = 0.0;
};

// Selection sweep over thresholds 0..n_max; points with no kept mass are
// omitted.
std::vector<CurvePoint> selection_curve(const CountDistribution& dist_target,
                                        const CountDistribution& dist_other,
                                        const StatePriors& priors);

// Baseline: initial-state selection fidelity times the survival
// probability exp(-gamma T).
std::vector<CurvePoint> initial_estimate_with_survival(const CountDistribution& dist_target_initial,
                                                       const CountDistribution& dist_other_initial,
                                                       const StatePriors& priors, double gamma,
                                                       const Window& window);

void check_compatible(const CountDistribution& a, const CountDistribution& b);

}  // namespace fdro
