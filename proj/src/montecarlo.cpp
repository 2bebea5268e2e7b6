#include "fdro/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

namespace fdro {

void McConfig::validate() const {
  if (runs < 1) throw DomainError("mc.runs must be >= 1");
}

McEngine trajectory_engine(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_id),
                    static_cast<std::uint32_t>(stream_id >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return McEngine(seq);
}

double uniform_open01(McEngine& engine) {
  return (static_cast<double>(engine() >> 11) + 0.5) * 0x1.0p-53;
}

double sample_exponential(McEngine& engine, double rate) {
  if (rate <= 0.0) return std::numeric_limits<double>::infinity();
  return -std::log(uniform_open01(engine)) / rate;
}

std::uint64_t sample_poisson(McEngine& engine, double mean) {
  if (!(mean >= 0.0)) throw DomainError("sample_poisson: mean must be >= 0");
  if (mean == 0.0) return 0;
  if (mean < 30.0) {
    const double u = uniform_open01(engine);
    double p = std::exp(-mean);
    double cdf = p;
    std::uint64_t k = 0;
    while (u > cdf && k < 1000) {
      ++k;
      p *= mean / static_cast<double>(k);
      cdf += p;
    }
    return k;
  }
  // Hormann (1993), PTRS.
  const double smu = std::sqrt(mean);
  const double log_mean = std::log(mean);
  const double b = 0.931 + 2.53 * smu;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = uniform_open01(engine) - 0.5;
    const double v = uniform_open01(engine);
    const double us = 0.5 - std::abs(u);
    const double kd = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(kd);
    if (kd < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -mean + kd * log_mean - std::lgamma(kd + 1.0)) {
      return static_cast<std::uint64_t>(kd);
    }
  }
}

Trajectory sample_trajectory(McEngine& engine, State initial, const SwitchingRates& rates,
                             const Window& window) {
  const double T = window.duration;
  Trajectory tr;
  tr.initial = initial;
  tr.duration = T;
  State state = initial;
  double t = 0.0;
  for (;;) {
    const double hold = sample_exponential(engine, rates.leaving(state));
    const double end = t + hold;
    if (!(end < T)) {
      if (state == State::zero) tr.dwell_in_0 += T - t;
      break;
    }
    if (state == State::zero) tr.dwell_in_0 += hold;
    tr.switch_times.push_back(end);
    t = end;
    state = other(state);
  }
  tr.final_state = state;
  tr.dwell_in_0 = std::clamp(tr.dwell_in_0, 0.0, T);
  return tr;
}

std::uint64_t sample_counts(McEngine& engine, const Trajectory& trajectory,
                            const EmissionRates& emission) {
  const double mean = emission.lambda_0 * trajectory.dwell_in_0 +
                      emission.lambda_1 * (trajectory.duration - trajectory.dwell_in_0);
  return sample_poisson(engine, std::max(0.0, mean));
}

namespace {

McSample draw_sample(McEngine& engine, const SwitchingRates& rates, const EmissionRates& emission,
                     const Window& window, const StatePriors& priors) {
  const State initial = uniform_open01(engine) < priors.p0 ? State::zero : State::one;
  const Trajectory tr = sample_trajectory(engine, initial, rates, window);
  const std::uint64_t count = sample_counts(engine, tr, emission);
  return McSample{tr.initial, tr.final_state, static_cast<std::uint32_t>(tr.switch_count()),
                  tr.dwell_in_0, count};
}

}  // namespace

std::vector<McSample> simulate(const McConfig& config, std::uint64_t first, std::uint64_t count,
                               const SwitchingRates& rates, const EmissionRates& emission,
                               const Window& window, const StatePriors& priors) {
  rates.validate();
  emission.validate();
  window.validate();
  priors.validate();
  std::vector<McSample> out;
  out.reserve(count);
  for (std::uint64_t i = first; i < first + count; ++i) {
    McEngine engine = trajectory_engine(config.seed, config.stream_id, i);
    out.push_back(draw_sample(engine, rates, emission, window, priors));
  }
  return out;
}

std::string to_string(ConditionClass c) {
  switch (c) {
    case ConditionClass::initial_0: return "initial_0";
    case ConditionClass::initial_1: return "initial_1";
    case ConditionClass::final_0: return "final_0";
    case ConditionClass::final_1: return "final_1";
  }
  return "unknown";
}

McTally::McTally(int n_max) {
  for (auto& c : classes) c.counts.assign(static_cast<std::size_t>(n_max) + 1, 0);
}

void McTally::add(const McSample& s) {
  const int classes_hit[2] = {index_of(s.initial), 2 + index_of(s.final_state)};
  for (int ci : classes_hit) {
    Class& c = classes[ci];
    ++c.total;
    if (s.count < c.counts.size()) {
      ++c.counts[s.count];
    } else {
      ++c.overflow;
    }
  }
}

void McTally::merge(const McTally& other) {
  for (std::size_t k = 0; k < classes.size(); ++k) {
    Class& dst = classes[k];
    const Class& src = other.classes[k];
    if (dst.counts.size() != src.counts.size())
      throw DomainError("McTally::merge: histogram sizes differ");
    for (std::size_t n = 0; n < dst.counts.size(); ++n) dst.counts[n] += src.counts[n];
    dst.overflow += src.overflow;
    dst.total += src.total;
  }
}

McTally tally(std::span<const McSample> samples, int n_max) {
  McTally t(n_max);
  for (const McSample& s : samples) t.add(s);
  return t;
}

McTally run_streams(std::span<const McConfig> streams, const SwitchingRates& rates,
                    const EmissionRates& emission, const Window& window,
                    const StatePriors& priors, int n_max) {
  std::vector<std::future<McTally>> tasks;
  tasks.reserve(streams.size());
  for (const McConfig& cfg : streams) {
    cfg.validate();
    tasks.push_back(std::async(std::launch::async, [=, &rates, &emission, &window, &priors] {
      const std::vector<McSample> samples = simulate(cfg, 0, cfg.runs, rates, emission, window, priors);
      return tally(samples, n_max);
    }));
  }
  McTally merged(n_max);
  for (auto& task : tasks) merged.merge(task.get());
  return merged;
}

EmpiricalHistogram histogram_from_tally(const McTally& t, ConditionClass c) {
  const McTally::Class& cls = t.classes[static_cast<int>(c)];
  if (cls.total == 0)
    throw InsufficientSamplesError("no Monte-Carlo samples in conditioning class " + to_string(c));
  EmpiricalHistogram h;
  h.condition = c;
  h.samples = cls.total;
  h.overflow = cls.overflow;
  const auto n = static_cast<Eigen::Index>(cls.counts.size());
  h.pmf.resize(n);
  h.std_error.resize(n);
  const double total = static_cast<double>(cls.total);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double p = static_cast<double>(cls.counts[k]) / total;
    h.pmf[k] = p;
    h.std_error[k] = std::sqrt(p * (1.0 - p) / total);
  }
  return h;
}

EmpiricalDistributions empirical_distributions(const McConfig& config, const SwitchingRates& rates,
                                               const EmissionRates& emission, const Window& window,
                                               const StatePriors& priors) {
  config.validate();
  if (config.runs < 100)
    throw InsufficientSamplesError("empirical_distributions: runs must be >= 100, got " +
                                   std::to_string(config.runs));
  const int n_max = count_truncation(emission, window);
  const std::vector<McSample> samples =
      simulate(config, 0, config.runs, rates, emission, window, priors);
  const McTally t = tally(samples, n_max);
  EmpiricalDistributions out;
  for (ConditionClass c : kConditionClasses)
    out.classes[static_cast<int>(c)] = histogram_from_tally(t, c);
  return out;
}

double total_variation(const Eigen::VectorXd& empirical, const Eigen::VectorXd& analytic,
                       int bin_width) {
  if (bin_width < 1) throw DomainError("total_variation: bin width must be >= 1");
  const Eigen::Index n = std::max(empirical.size(), analytic.size());
  double tv = 0.0;
  for (Eigen::Index lo = 0; lo < n; lo += bin_width) {
    double e = 0.0;
    double a = 0.0;
    for (Eigen::Index k = lo; k < std::min(n, lo + bin_width); ++k) {
      if (k < empirical.size()) e += empirical[k];
      if (k < analytic.size()) a += analytic[k];
    }
    tv += std::abs(e - a);
  }
  return 0.5 * tv;
}

EpisodeStats simulate_episodes(const McConfig& config, const SwitchingRates& rates,
                               const EmissionRates& emission, const Window& window,
                               const StatePriors& priors, int threshold, State target,
                               Conditioning judged_at, const EpisodeTiming& timing,
                               std::uint64_t max_attempts) {
  config.validate();
  rates.validate();
  emission.validate();
  window.validate();
  priors.validate();
  double sum_a = 0.0, sum_a2 = 0.0, sum_t = 0.0, sum_t2 = 0.0;
  std::uint64_t hits = 0;
  for (std::uint64_t e = 0; e < config.runs; ++e) {
    McEngine engine = trajectory_engine(config.seed, config.stream_id, e);
    std::uint64_t attempts = 0;
    for (;;) {
      if (++attempts > max_attempts)
        throw ImpossiblePreparationError("episode exceeded the attempt limit");
      const McSample s = draw_sample(engine, rates, emission, window, priors);
      if (s.count >= static_cast<std::uint64_t>(std::max(threshold, 0))) {
        const State judged = judged_at == Conditioning::start ? s.initial : s.final_state;
        if (judged == target) ++hits;
        break;
      }
    }
    const double a = static_cast<double>(attempts);
    const double time = timing.postselection
                            ? a * (timing.per_attempt + timing.per_point)
                            : a * timing.per_attempt + timing.per_point;
    sum_a += a;
    sum_a2 += a * a;
    sum_t += time;
    sum_t2 += time * time;
  }
  const double n = static_cast<double>(config.runs);
  EpisodeStats st;
  st.episodes = config.runs;
  st.mean_attempts = sum_a / n;
  st.mean_time = sum_t / n;
  const double var_a = std::max(0.0, sum_a2 / n - st.mean_attempts * st.mean_attempts);
  const double var_t = std::max(0.0, sum_t2 / n - st.mean_time * st.mean_time);
  st.attempts_stderr = std::sqrt(var_a / n);
  st.time_stderr = std::sqrt(var_t / n);
  st.target_fraction = static_cast<double>(hits) / n;
  st.target_fraction_stderr = std::sqrt(st.target_fraction * (1.0 - st.target_fraction) / n);
  return st;
}

}  // namespace fdro
