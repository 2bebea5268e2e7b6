#pragma once

// Stochastic reference for the analytic distributions: samples telegraph
// trajectories and photon counts.
//
// Randomness for trajectory i of stream s under seed k comes only from an
// mt19937_64 seeded with seed_seq{k, s, i}; results therefore do not depend
// on how trajectories are partitioned across threads.

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fdro/counting.hpp"

namespace fdro {

using McEngine = std::mt19937_64;

struct McConfig {
  std::uint64_t runs = 10000;
  std::uint64_t seed = 0x5eed;
  std::uint64_t stream_id = 0;

  void validate() const;
};

McEngine trajectory_engine(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t index);

// Uniform on the open interval (0, 1) from 53 random bits.
double uniform_open01(McEngine& engine);
// +inf when rate == 0.
double sample_exponential(McEngine& engine, double rate);
// Inversion below mean 30, transformed rejection (PTRS) above.
std::uint64_t sample_poisson(McEngine& engine, double mean);

struct Trajectory {
  State initial = State::zero;
  State final_state = State::zero;
  std::vector<double> switch_times;  // strictly increasing, inside (0, T)
  double dwell_in_0 = 0.0;
  double duration = 0.0;

  std::size_t switch_count() const { return switch_times.size(); }
};

Trajectory sample_trajectory(McEngine& engine, State initial, const SwitchingRates& rates,
                             const Window& window);
std::uint64_t sample_counts(McEngine& engine, const Trajectory& trajectory,
                            const EmissionRates& emission);

// Compact per-trajectory record.
struct McSample {
  State initial;
  State final_state;
  std::uint32_t switches;
  double dwell_in_0;
  std::uint64_t count;
};

// Trajectories [first, first + count) of the configured stream. Initial
// states are drawn from `priors`.
std::vector<McSample> simulate(const McConfig& config, std::uint64_t first, std::uint64_t count,
                               const SwitchingRates& rates, const EmissionRates& emission,
                               const Window& window, const StatePriors& priors);

enum class ConditionClass : std::uint8_t { initial_0, initial_1, final_0, final_1 };
inline constexpr std::array<ConditionClass, 4> kConditionClasses{
    ConditionClass::initial_0, ConditionClass::initial_1, ConditionClass::final_0,
    ConditionClass::final_1};
std::string to_string(ConditionClass c);

// Integer tallies per conditioning class; mergeable.
struct McTally {
  struct Class {
    std::vector<std::uint64_t> counts;  // n = 0..n_max
    std::uint64_t overflow = 0;         // samples with count > n_max
    std::uint64_t total = 0;

    bool operator==(const Class&) const = default;
  };
  std::array<Class, 4> classes;

  explicit McTally(int n_max = 0);
  void add(const McSample& s);
  void merge(const McTally& other);
  bool operator==(const McTally&) const = default;
};

McTally tally(std::span<const McSample> samples, int n_max);

// One task per stream, merged in stream order.
McTally run_streams(std::span<const McConfig> streams, const SwitchingRates& rates,
                    const EmissionRates& emission, const Window& window,
                    const StatePriors& priors, int n_max);

struct EmpiricalHistogram {
  ConditionClass condition = ConditionClass::initial_0;
  Eigen::VectorXd pmf;     // normalized within the class
  Eigen::VectorXd std_error;  // binomial standard error per bin
  std::uint64_t samples = 0;
  std::uint64_t overflow = 0;
};

struct EmpiricalDistributions {
  std::array<EmpiricalHistogram, 4> classes;
  const EmpiricalHistogram& operator[](ConditionClass c) const {
    return classes[static_cast<int>(c)];
  }
};

EmpiricalHistogram histogram_from_tally(const McTally& t, ConditionClass c);

// Histograms for all four conditioning classes with bins 0..n_max of the
// analytic distributions. Throws InsufficientSamplesError naming the first
// empty class.
EmpiricalDistributions empirical_distributions(const McConfig& config, const SwitchingRates& rates,
                                               const EmissionRates& emission, const Window& window,
                                               const StatePriors& priors);

// Total-variation distance between a histogram and a PMF after merging
// consecutive counts into bins of `bin_width`.
double total_variation(const Eigen::VectorXd& empirical, const Eigen::VectorXd& analytic,
                       int bin_width = 1);

// Repeat-until-success preparation episodes. An attempt succeeds when its
// count is >= threshold. With postselection the per-point cost is paid on
// every attempt; on demand it is paid once after success.
struct EpisodeTiming {
  double per_attempt = 0.0;
  double per_point = 0.0;
  bool postselection = true;
};

struct EpisodeStats {
  std::uint64_t episodes = 0;
  double mean_attempts = 0.0;
  double attempts_stderr = 0.0;
  double mean_time = 0.0;
  double time_stderr = 0.0;
  // Fraction of successful shots whose judged state equals the target.
  double target_fraction = 0.0;
  double target_fraction_stderr = 0.0;
};

EpisodeStats simulate_episodes(const McConfig& config, const SwitchingRates& rates,
                               const EmissionRates& emission, const Window& window,
                               const StatePriors& priors, int threshold, State target,
                               Conditioning judged_at, const EpisodeTiming& timing,
                               std::uint64_t max_attempts = 1000000);

}  // namespace fdro
