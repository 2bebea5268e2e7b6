#pragma once

// Parameter sweeps for readout and preparation-by-measurement scenarios.
// For each (control, duration) cell the minimal integer count threshold
// meeting the target fidelity is found; the optimum minimises the expected
// wall-clock time per successful data point.

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fdro/counting.hpp"
#include "fdro/inference.hpp"

namespace fdro {

enum class Quantity : std::uint8_t { gamma_0, gamma_1, lambda_0, lambda_1 };
std::string to_string(Quantity q);
Quantity quantity_from_string(const std::string& name);

// Rate as a function of a control value (laser power in W, or repetitions).
struct CalibrationCurve {
  Quantity quantity = Quantity::gamma_0;
  std::vector<std::pair<double, double>> knots;  // (control, rate), control strictly increasing

  void validate() const;
};

// Piecewise-linear, no extrapolation.
double interpolate(const CalibrationCurve& curve, double control);

// Curves for the four rates; a missing curve means the rate is zero.
struct CalibrationSet {
  std::array<std::optional<CalibrationCurve>, 4> curves;

  void set(CalibrationCurve curve);
  const std::optional<CalibrationCurve>& get(Quantity q) const {
    return curves[static_cast<int>(q)];
  }
  double rate(Quantity q, double control) const;
  SwitchingRates switching_at(double control) const;
  EmissionRates emission_at(double control) const;
  void validate() const;
};

enum class ScenarioKind : std::uint8_t {
  electron_readout,
  electron_preparation,
  charge_preparation,
  nuclear_ssr
};
std::string to_string(ScenarioKind k);
ScenarioKind scenario_kind_from_string(const std::string& name);

// Readout judges the state at the start of the window; every other kind
// prepares the state found at its end.
constexpr bool is_preparation(ScenarioKind k) { return k != ScenarioKind::electron_readout; }

enum class RestartPolicy : std::uint8_t { postselection, on_demand };

// Seconds. per_repetition is added once per repetition (nuclear only).
struct TimeOverhead {
  double per_attempt = 0.0;
  double per_point = 0.0;
  double per_repetition = 0.0;
};

struct Scenario {
  ScenarioKind kind = ScenarioKind::electron_readout;
  double target_fidelity = 0.99;
  StatePriors priors_at_start{0.5};
  TimeOverhead overhead;
  State target = State::zero;
  RestartPolicy restart = RestartPolicy::postselection;
  int grid_nodes = 2001;

  void validate() const;
};

double attempts_expected(double success_rate);
double total_time(double attempts, double per_attempt, double per_point_overhead);

struct SweepPoint {
  double control = 0.0;   // power, or repetitions for nuclear sweeps
  double duration = 0.0;  // readout window T, s
  bool feasible = false;
  int threshold = 0;
  int threshold_shift = 0;  // threshold minus the ML crossing
  double fidelity = 0.0;    // at the chosen threshold, or best achievable when infeasible
  double efficiency = 0.0;
  double attempts = 0.0;
  double total_time = 0.0;  // +inf when infeasible
};

struct SweepResult {
  std::vector<double> controls;
  std::vector<double> durations;
  std::vector<SweepPoint> grid;  // row-major: controls x durations
  std::size_t optimum = 0;

  const SweepPoint& at(std::size_t ci, std::size_t di) const {
    return grid[ci * durations.size() + di];
  }
  const SweepPoint& best() const { return grid[optimum]; }
};

// One cell: distributions for the scenario, minimal feasible threshold,
// attempts and time. `repetitions` multiplies the per-repetition overhead.
SweepPoint evaluate_cell(const Scenario& scenario, const SwitchingRates& rates,
                         const EmissionRates& emission, const Window& window,
                         int repetitions = 0);

// Acquisition plus fixed time of one attempt for the scenario.
double per_attempt_time(const Scenario& scenario, double duration, int repetitions);

SweepResult sweep(const Scenario& scenario, const CalibrationSet& calibration,
                  const std::vector<double>& powers, const std::vector<double>& durations);

struct NuclearRepetition {
  double duration = 0.0;  // one repetition's counting time, s
  double lambda_0 = 0.0;  // Hz
  double lambda_1 = 0.0;  // Hz
  double decay_per_rep = 0.0;  // flip probability per repetition
};

struct AggregateReadout {
  SwitchingRates rates;
  EmissionRates emission;
  Window window;
};

AggregateReadout nuclear_repetition_model(int reps, const NuclearRepetition& per_rep,
                                          int grid_nodes = 2001);

SweepResult sweep(const Scenario& scenario, const NuclearRepetition& per_rep,
                  const std::vector<int>& repetitions);

}  // namespace fdro
