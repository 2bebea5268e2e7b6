#include "fdro/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <thread>

namespace fdro {

std::string to_string(Quantity q) {
  switch (q) {
    case Quantity::gamma_0: return "gamma_0";
    case Quantity::gamma_1: return "gamma_1";
    case Quantity::lambda_0: return "lambda_0";
    case Quantity::lambda_1: return "lambda_1";
  }
  return "unknown";
}

Quantity quantity_from_string(const std::string& name) {
  for (Quantity q : {Quantity::gamma_0, Quantity::gamma_1, Quantity::lambda_0, Quantity::lambda_1})
    if (to_string(q) == name) return q;
  throw DomainError("unknown calibration quantity '" + name + "'");
}

void CalibrationCurve::validate() const {
  const std::string name = to_string(quantity);
  if (knots.size() < 2) throw DomainError("calibration " + name + ": need at least 2 knots");
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (!std::isfinite(knots[i].first) || !(knots[i].second >= 0.0) ||
        !std::isfinite(knots[i].second))
      throw DomainError("calibration " + name + ": rates must be finite and >= 0");
    if (i > 0 && !(knots[i].first > knots[i - 1].first))
      throw DomainError("calibration " + name + ": control values must be strictly increasing");
  }
}

double interpolate(const CalibrationCurve& curve, double control) {
  curve.validate();
  const auto& k = curve.knots;
  if (!(control >= k.front().first) || !(control <= k.back().first))
    throw RangeError("calibration " + to_string(curve.quantity) + ": control " +
                     std::to_string(control) + " outside [" + std::to_string(k.front().first) +
                     ", " + std::to_string(k.back().first) + "]");
  const auto hi = std::lower_bound(k.begin(), k.end(), control,
                                   [](const auto& knot, double c) { return knot.first < c; });
  if (hi->first == control) return hi->second;
  const auto lo = hi - 1;
  const double f = (control - lo->first) / (hi->first - lo->first);
  return lo->second + f * (hi->second - lo->second);
}

void CalibrationSet::set(CalibrationCurve curve) {
  curve.validate();
  const int i = static_cast<int>(curve.quantity);
  curves[i] = std::move(curve);
}

double CalibrationSet::rate(Quantity q, double control) const {
  const auto& c = get(q);
  return c ? interpolate(*c, control) : 0.0;
}

SwitchingRates CalibrationSet::switching_at(double control) const {
  return {rate(Quantity::gamma_0, control), rate(Quantity::gamma_1, control)};
}

EmissionRates CalibrationSet::emission_at(double control) const {
  return {rate(Quantity::lambda_0, control), rate(Quantity::lambda_1, control)};
}

void CalibrationSet::validate() const {
  bool any = false;
  for (const auto& c : curves) {
    if (c) {
      c->validate();
      any = true;
    }
  }
  if (!any) throw DomainError("calibration set is empty");
}

std::string to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::electron_readout: return "electron_readout";
    case ScenarioKind::electron_preparation: return "electron_preparation";
    case ScenarioKind::charge_preparation: return "charge_preparation";
    case ScenarioKind::nuclear_ssr: return "nuclear_ssr";
  }
  return "unknown";
}

ScenarioKind scenario_kind_from_string(const std::string& name) {
  for (ScenarioKind k : {ScenarioKind::electron_readout, ScenarioKind::electron_preparation,
                         ScenarioKind::charge_preparation, ScenarioKind::nuclear_ssr})
    if (to_string(k) == name) return k;
  throw DomainError("unknown scenario kind '" + name + "'");
}

void Scenario::validate() const {
  if (!(target_fidelity > 0.0 && target_fidelity < 1.0))
    throw DomainError("target_fidelity must lie in (0, 1)");
  priors_at_start.validate();
  if (!(overhead.per_attempt >= 0.0) || !(overhead.per_point >= 0.0) ||
      !(overhead.per_repetition >= 0.0))
    throw DomainError("time overheads must be >= 0");
  if (grid_nodes < 3 || grid_nodes % 2 == 0)
    throw DomainError("grid_nodes must be an odd integer >= 3");
}

double attempts_expected(double success_rate) {
  if (!(success_rate > 0.0))
    throw ImpossiblePreparationError("success rate is zero; preparation never succeeds");
  if (!(success_rate <= 1.0)) throw DomainError("success rate must lie in (0, 1]");
  return 1.0 / success_rate;
}

double total_time(double attempts, double per_attempt, double per_point_overhead) {
  if (!(attempts >= 0.0) || !(per_attempt >= 0.0) || !(per_point_overhead >= 0.0))
    throw DomainError("total_time: inputs must be >= 0");
  return attempts * per_attempt + per_point_overhead;
}

double per_attempt_time(const Scenario& scenario, double duration, int repetitions) {
  return duration + scenario.overhead.per_attempt +
         repetitions * scenario.overhead.per_repetition;
}

SweepPoint evaluate_cell(const Scenario& scenario, const SwitchingRates& rates,
                         const EmissionRates& emission, const Window& window, int repetitions) {
  scenario.validate();
  const State target = scenario.target;
  const State rest = other(target);
  if (emission.of(target) < emission.of(rest))
    throw DomainError("target state must be the bright state (lambda_target >= lambda_other)");

  const ParityResolvedCounts counts = parity_resolved_counts(rates, emission, window);
  CountDistribution dist_target, dist_other;
  StatePriors weights = scenario.priors_at_start;
  if (is_preparation(scenario.kind)) {
    dist_target = count_pmf_given_final(target, counts, scenario.priors_at_start);
    dist_other = count_pmf_given_final(rest, counts, scenario.priors_at_start);
    weights = counts.final_priors(scenario.priors_at_start);
  } else {
    dist_target = count_pmf_given_initial(target, counts);
    dist_other = count_pmf_given_initial(rest, counts);
  }

  SweepPoint p;
  p.duration = window.duration;
  const std::vector<CurvePoint> curve = selection_curve(dist_target, dist_other, weights);
  const CurvePoint* chosen = nullptr;
  const CurvePoint* best = nullptr;
  for (const CurvePoint& c : curve) {
    if (!best || c.fidelity > best->fidelity) best = &c;
    if (c.fidelity >= scenario.target_fidelity) {
      chosen = &c;
      break;
    }
  }
  const double inf = std::numeric_limits<double>::infinity();
  if (!chosen) {
    p.feasible = false;
    p.fidelity = best ? best->fidelity : 0.0;
    p.threshold = best ? best->threshold : 0;
    p.efficiency = best ? best->efficiency : 0.0;
    p.attempts = inf;
    p.total_time = inf;
  } else {
    p.feasible = true;
    p.threshold = chosen->threshold;
    p.fidelity = chosen->fidelity;
    p.efficiency = chosen->efficiency;
    p.attempts = attempts_expected(std::min(1.0, chosen->success_rate));
    const double attempt = per_attempt_time(scenario, window.duration, repetitions);
    p.total_time = scenario.restart == RestartPolicy::postselection
                       ? total_time(p.attempts, attempt + scenario.overhead.per_point, 0.0)
                       : total_time(p.attempts, attempt, scenario.overhead.per_point);
  }
  p.threshold_shift = p.threshold - ml_crossing(dist_target, dist_other, weights);
  return p;
}

namespace {

// Lowest control, then shortest duration, wins ties.
bool better(const SweepPoint& p, const SweepPoint& q) {
  if (p.total_time != q.total_time) return p.total_time < q.total_time;
  if (p.control != q.control) return p.control < q.control;
  return p.duration < q.duration;
}

std::size_t locate_optimum(const SweepResult& r) {
  std::size_t best = r.grid.size();
  double best_fidelity = 0.0;
  for (std::size_t i = 0; i < r.grid.size(); ++i) {
    const SweepPoint& p = r.grid[i];
    best_fidelity = std::max(best_fidelity, p.fidelity);
    if (!p.feasible) continue;
    if (best == r.grid.size() || better(p, r.grid[best])) best = i;
  }
  if (best == r.grid.size())
    throw NoFeasiblePointError("no grid cell reaches the target fidelity (best achieved " +
                                   std::to_string(best_fidelity) + ")",
                               best_fidelity);
  return best;
}

}  // namespace

SweepResult sweep(const Scenario& scenario, const CalibrationSet& calibration,
                  const std::vector<double>& powers, const std::vector<double>& durations) {
  scenario.validate();
  calibration.validate();
  if (powers.empty() || durations.empty()) throw DomainError("sweep grids must be nonempty");
  if (scenario.kind == ScenarioKind::nuclear_ssr)
    throw DomainError("nuclear_ssr sweeps take a repetition grid");

  SweepResult r;
  r.controls = powers;
  r.durations = durations;
  r.grid.resize(powers.size() * durations.size());

  // Rows are independent; results are written to fixed slots.
  const auto policy = std::thread::hardware_concurrency() > 1 ? std::launch::async
                                                              : std::launch::deferred;
  std::vector<std::future<void>> rows;
  for (std::size_t ci = 0; ci < powers.size(); ++ci) {
    rows.push_back(std::async(policy, [&, ci] {
      const double power = powers[ci];
      const SwitchingRates rates = calibration.switching_at(power);
      const EmissionRates emission = calibration.emission_at(power);
      for (std::size_t di = 0; di < durations.size(); ++di) {
        const Window window{durations[di], scenario.grid_nodes};
        SweepPoint p = evaluate_cell(scenario, rates, emission, window);
        p.control = power;
        r.grid[ci * durations.size() + di] = p;
      }
    }));
  }
  for (auto& row : rows) row.get();
  r.optimum = locate_optimum(r);
  return r;
}

AggregateReadout nuclear_repetition_model(int reps, const NuclearRepetition& per_rep,
                                          int grid_nodes) {
  if (reps < 1) throw DomainError("repetitions must be >= 1");
  if (!(per_rep.duration > 0.0)) throw DomainError("repetition duration must be > 0");
  if (!(per_rep.decay_per_rep >= 0.0) || !(per_rep.decay_per_rep < 1.0))
    throw DomainError("decay_per_rep must lie in [0, 1)");
  const double gamma = -std::log1p(-per_rep.decay_per_rep) / per_rep.duration;
  AggregateReadout out;
  out.rates = {gamma, gamma};
  out.emission = {per_rep.lambda_0, per_rep.lambda_1};
  out.window = {reps * per_rep.duration, grid_nodes};
  out.rates.validate();
  out.emission.validate();
  out.window.validate();
  return out;
}

SweepResult sweep(const Scenario& scenario, const NuclearRepetition& per_rep,
                  const std::vector<int>& repetitions) {
  scenario.validate();
  if (repetitions.empty()) throw DomainError("repetition grid must be nonempty");
  SweepResult r;
  r.durations = {per_rep.duration};
  for (int reps : repetitions) {
    const AggregateReadout agg = nuclear_repetition_model(reps, per_rep, scenario.grid_nodes);
    SweepPoint p = evaluate_cell(scenario, agg.rates, agg.emission, agg.window, reps);
    p.control = reps;
    r.controls.push_back(reps);
    r.grid.push_back(p);
  }
  r.optimum = locate_optimum(r);
  return r;
}

}  // namespace fdro
