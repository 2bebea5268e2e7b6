// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli/commands.hpp"
#include "fdro/counting.hpp"
#include "fdro/inference.hpp"
#include "fdro/io.hpp"
#include "fdro/montecarlo.hpp"
#include "fdro/optimizer.hpp"

namespace fs = std::filesystem;
using namespace fdro;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double limit_s;  // 0: no runtime limit
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo * std::pow(hi / lo, std::uniform_real_distribution<double>(0.0, 1.0)(rng));
}

const SwitchingRates kDemoRates{500.0, 300.0};
const EmissionRates kDemoEmission{5e3, 40e3};
const Window kDemoWindow{1e-3};
const EmissionRates kCurveEmission{70e3, 100e3};

double curve_error(double gamma, double T) {
  const ParityResolvedCounts c = parity_resolved_counts({gamma, gamma}, kCurveEmission, Window{T});
  const StatePriors pr{0.5};
  return error_rate_ml(count_pmf_given_final(State::zero, c, pr),
                       count_pmf_given_final(State::one, c, pr), c.final_priors(pr));
}

double curve_minimum(double gamma) {
  double best = 2.0, best_T = 0.0;
  for (int k = 0; k <= 40; ++k) {
    const double T = 0.5e-3 + 1e-4 * k;
    const double e = curve_error(gamma, T);
    if (e < best) {
      best = e;
      best_T = T;
    }
  }
  return best_T;
}

Outcome normalization() {
  std::mt19937_64 rng(20261016);
  std::uniform_real_distribution<double> rate(0.0, 1e3);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const SwitchingRates r{rate(rng), rate(rng)};
    const EmissionRates e{log_uniform(rng, 1e3, 1e6), log_uniform(rng, 1e3, 1e6)};
    const Window w{log_uniform(rng, 1e-5, 1e-2)};
    for (State s : {State::zero, State::one})
      worst = std::max(worst, std::abs(dwell_density_given_initial(s, r, w).total_mass() - 1.0));
    const ParityResolvedCounts c = parity_resolved_counts(r, e, w);
    const StatePriors pr = steady_state_priors(r);
    for (const CountDistribution& d :
         {count_pmf_given_initial(State::zero, c), count_pmf_given_initial(State::one, c),
          count_pmf_given_final(State::zero, c, pr), count_pmf_given_final(State::one, c, pr)}) {
      worst = std::max(worst, std::abs(d.raw_mass - 1.0));
      worst = std::max(worst, std::abs(d.pmf.sum() - 1.0));
    }
  }
  return {worst <= 1e-6, "100 draws, worst |mass - 1| = " + fmt("%.2e", worst) + " (tol 1e-6)"};
}

Outcome histograms() {
  const StatePriors pr = steady_state_priors(kDemoRates);
  const ParityResolvedCounts c = parity_resolved_counts(kDemoRates, kDemoEmission, kDemoWindow);
  const CountDistribution analytic[4] = {
      count_pmf_given_initial(State::zero, c), count_pmf_given_initial(State::one, c),
      count_pmf_given_final(State::zero, c, pr), count_pmf_given_final(State::one, c, pr)};
  const McConfig cfg{10000, 0x5eed, 0};
  const EmpiricalDistributions e = empirical_distributions(cfg, kDemoRates, kDemoEmission, kDemoWindow, pr);
  Outcome o;
  std::string binned = "TV(4-count bins)", unit = "TV(unit bins, informational)";
  for (ConditionClass k : kConditionClasses) {
    const int i = static_cast<int>(k);
    const double tv4 = total_variation(e[k].pmf, analytic[i].pmf, 4);
    const double tv1 = total_variation(e[k].pmf, analytic[i].pmf, 1);
    o.pass = o.pass && tv4 < 0.03;
    binned += " " + to_string(k) + "=" + fmt("%.4f", tv4);
    unit += " " + fmt("%.4f", tv1);
  }
  o.detail = "10^4 runs, " + binned + " (tol 0.03); " + unit;
  return o;
}

Outcome error_minima() {
  const double t10 = curve_minimum(10.0), t100 = curve_minimum(100.0);
  const bool ok = std::abs(t10 - 2.5e-3) <= 0.5e-3 + 1e-12 && std::abs(t100 - 1.5e-3) <= 0.5e-3 + 1e-12;
  return {ok, "argmin T: gamma=10 Hz -> " + fmt("%.1f", t10 * 1e3) + " ms (2.5 +- 0.5), gamma=100 Hz -> " +
                  fmt("%.1f", t100 * 1e3) + " ms (1.5 +- 0.5), step 0.1 ms"};
}

Outcome efficiency_ordering() {
  Outcome o;
  int points = 0;
  double worst_order = -1.0, worst_mono = -1.0;
  for (const auto& [gamma, T] : {std::pair{10.0, curve_minimum(10.0)}, std::pair{100.0, curve_minimum(100.0)},
                                 std::pair{10.0, 2.5e-3}, std::pair{100.0, 1.5e-3}}) {
    const ParityResolvedCounts c = parity_resolved_counts({gamma, gamma}, kCurveEmission, Window{T});
    const StatePriors pr{0.5};
    const auto fin = selection_curve(count_pmf_given_final(State::one, c, pr),
                                     count_pmf_given_final(State::zero, c, pr), c.final_priors(pr));
    const auto base = initial_estimate_with_survival(count_pmf_given_initial(State::one, c),
                                                     count_pmf_given_initial(State::zero, c), pr, gamma,
                                                     Window{T});
    if (fin.size() != base.size()) return {false, "curves have different lengths"};
    for (std::size_t i = 0; i < fin.size(); ++i) {
      ++points;
      worst_order = std::max(worst_order, fin[i].error_rate - base[i].error_rate);
      if (i) worst_mono = std::max(worst_mono, fin[i].error_rate - fin[i - 1].error_rate);
    }
  }
  o.pass = worst_order <= 1e-12 && worst_mono <= 1e-12;
  o.detail = std::to_string(points) + " points at the computed and reference optima; max(final - baseline) = " +
             fmt("%.2e", worst_order) + ", max error increase along the sweep = " + fmt("%.2e", worst_mono);
  return o;
}

Outcome limits() {
  const EmissionRates e{70e3, 20e3};
  const Window w{2e-4};
  const StatePriors pr{0.8};
  const double gamma = 3000.0;
  const ParityResolvedCounts c = parity_resolved_counts({gamma, 1e-6}, e, w);
  const std::pair<ElectronForm, CountDistribution> pairs[] = {
      {ElectronForm::initial_0, count_pmf_given_initial(State::zero, c)},
      {ElectronForm::initial_1, count_pmf_given_initial(State::one, c)},
      {ElectronForm::final_0, count_pmf_given_final(State::zero, c, pr)},
      {ElectronForm::final_1, count_pmf_given_final(State::one, c, pr)}};
  double worst_rel = 0.0;
  for (const auto& [form, general] : pairs) {
    const CountDistribution simple = count_pmf_electron_simplified(form, gamma, e, w, pr);
    for (int n = 0; n <= simple.n_max(); ++n)
      if (general(n) > 1e-9) worst_rel = std::max(worst_rel, std::abs(simple(n) - general(n)) / general(n));
  }
  double worst_abs = 0.0;
  const ParityResolvedCounts z = parity_resolved_counts({0.0, 0.0}, e, w);
  const CountDistribution zs[] = {count_pmf_given_initial(State::zero, z), count_pmf_given_initial(State::one, z),
                                  count_pmf_given_final(State::zero, z, pr), count_pmf_given_final(State::one, z, pr),
                                  count_pmf_electron_simplified(ElectronForm::initial_0, 0.0, e, w, pr)};
  for (const CountDistribution& d : zs) {
    const double mean = e.of(d.state) * w.duration;
    for (int n = 0; n <= d.n_max(); ++n) worst_abs = std::max(worst_abs, std::abs(d(n) - poisson_pmf(n, mean)));
  }
  return {worst_rel < 1e-3 && worst_abs < 1e-9,
          "gamma_1=1e-6: max rel diff to simplified forms = " + fmt("%.2e", worst_rel) +
              " (tol 1e-3); gamma=0: max |pmf - Poisson| = " + fmt("%.2e", worst_abs) + " (tol 1e-9)"};
}

Outcome oracle_equivalence() {
  std::mt19937_64 rng(20261016);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  int checks = 0, fails = 0;
  double worst_z = 0.0;
  auto check = [&](double estimate, double exact, double sigma) {
    ++checks;
    const double z = sigma > 0.0 ? std::abs(estimate - exact) / sigma : (estimate == exact ? 0.0 : INFINITY);
    worst_z = std::max(worst_z, z);
    fails += !(z <= 3.0);
  };
  for (int k = 0; k < 20; ++k) {
    const SwitchingRates r{1e3 * u01(rng), 1e3 * u01(rng)};
    const EmissionRates e{log_uniform(rng, 1e3, 1e5), log_uniform(rng, 1e3, 1e5)};
    const Window w{log_uniform(rng, 1e-4, 1e-2)};
    const StatePriors pr{0.2 + 0.6 * u01(rng)};
    const McConfig cfg{100000, 0x5eed, static_cast<std::uint64_t>(k)};
    const std::vector<McSample> samples = simulate(cfg, 0, cfg.runs, r, e, w, pr);

    const ParityResolvedCounts c = parity_resolved_counts(r, e, w);
    const State bright = e.lambda_1 >= e.lambda_0 ? State::one : State::zero;
    const CountDistribution ft = count_pmf_given_final(bright, c, pr);
    const CountDistribution fo = count_pmf_given_final(other(bright), c, pr);
    const StatePriors fp = c.final_priors(pr);
    const int t = ml_crossing(ft, fo, fp);
    const DecisionMetrics m = threshold_metrics(selection_rule(bright, t), ft, fo, fp);

    double n[2] = {0, 0}, even[2] = {0, 0}, s[2] = {0, 0}, s2[2] = {0, 0};
    double kept = 0, good = 0;
    for (const McSample& x : samples) {
      const int i = index_of(x.initial);
      n[i] += 1;
      even[i] += x.switches % 2 == 0;
      s[i] += x.dwell_in_0;
      s2[i] += x.dwell_in_0 * x.dwell_in_0;
      if (x.count >= static_cast<std::uint64_t>(t)) {
        kept += 1;
        good += x.final_state == bright;
      }
    }
    for (State st : {State::zero, State::one}) {
      const int i = index_of(st);
      const double p = c.parity[c.column(st, Parity::even)];
      check(even[i] / n[i], p, std::sqrt(p * (1.0 - p) / n[i]));
      const double mean = s[i] / n[i];
      check(mean, dwell_density_given_initial(st, r, w).mean(),
            std::sqrt(std::max(0.0, s2[i] / n[i] - mean * mean) / n[i]));
    }
    const double total = static_cast<double>(cfg.runs);
    check(kept / total, m.efficiency, std::sqrt(m.efficiency * (1.0 - m.efficiency) / total));
    if (kept > 0) check(good / kept, m.fidelity, std::sqrt(m.fidelity * (1.0 - m.fidelity) / kept));
  }
  return {fails == 0, std::to_string(checks) + " comparisons over 20 draws at 10^5 trajectories, " +
                          std::to_string(fails) + " outside 3 sigma, largest |z| = " + fmt("%.2f", worst_z)};
}

CalibrationSet load_calibration(const fs::path& file) {
  std::ifstream in(file);
  return io::read_calibration_csv(in);
}

Scenario make_scenario(ScenarioKind kind) {
  Scenario s;
  s.kind = kind;
  s.target_fidelity = 0.99;
  s.target = State::one;
  s.priors_at_start = StatePriors{0.5};
  s.overhead = {1e-5, 1e-3, 0.0};
  s.grid_nodes = 401;
  return s;
}

Outcome scenarios() {
  const fs::path data = fs::path(FDRO_SOURCE_DIR) / "data";
  const CalibrationSet electron = load_calibration(data / "calibration_electron_synthetic.csv");
  const CalibrationSet charge = load_calibration(data / "calibration_charge_synthetic.csv");
  std::vector<double> powers, durations;
  for (int i = 1; i <= 40; ++i) powers.push_back(0.125 * i);
  for (int i = 0; i < 30; ++i) durations.push_back(1e-5 * std::pow(100.0, i / 29.0));

  const SweepResult ro = sweep(make_scenario(ScenarioKind::electron_readout), electron, powers, durations);
  const SweepResult ep = sweep(make_scenario(ScenarioKind::electron_preparation), electron, powers, durations);
  const SweepResult cp = sweep(make_scenario(ScenarioKind::charge_preparation), charge, powers, durations);
  std::vector<int> reps;
  for (int i = 1; i <= 400; ++i) reps.push_back(i);
  Scenario ns = make_scenario(ScenarioKind::nuclear_ssr);
  ns.overhead = {1e-4, 1e-3, 2e-6};
  const SweepResult nu = sweep(ns, NuclearRepetition{1e-5, 2e3, 2e4, 1e-4}, reps);
  bool meets = true;
  for (const SweepResult* r : {&ro, &ep, &cp, &nu})
    meets = meets && r->best().feasible && r->best().fidelity >= 0.99 - 1e-9 && r->best().attempts >= 1.0;
  const bool differ = ro.optimum != ep.optimum;

  std::mt19937_64 rng(20261016);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  int draws = 0, faster = 0, mc_agree = 0;
  for (int k = 0; k < 200 && draws < 10; ++k) {
    Scenario s = make_scenario(ScenarioKind::electron_preparation);
    s.target_fidelity = 0.95;
    s.overhead = {1e-5 * u01(rng), 1e-4 + 2e-3 * u01(rng), 0.0};
    s.priors_at_start = StatePriors{0.2 + 0.6 * u01(rng)};
    const SwitchingRates r{500.0 * u01(rng), 500.0 * u01(rng)};
    const EmissionRates e{2e3 + 1e4 * u01(rng), 5e4 + 1e5 * u01(rng)};
    const Window w{1e-4 + 4e-4 * u01(rng), 401};
    Scenario post = s, demand = s;
    demand.restart = RestartPolicy::on_demand;
    const SweepPoint a = evaluate_cell(post, r, e, w);
    if (!a.feasible) continue;
    const SweepPoint b = evaluate_cell(demand, r, e, w);
    ++draws;
    const double attempt = per_attempt_time(s, w.duration, 0);
    const McConfig cfg{10000, 0x5eed, static_cast<std::uint64_t>(k)};
    const EpisodeStats ps = simulate_episodes(cfg, r, e, w, s.priors_at_start, a.threshold, State::one,
                                              Conditioning::end, {attempt, s.overhead.per_point, true});
    const EpisodeStats od = simulate_episodes(cfg, r, e, w, s.priors_at_start, a.threshold, State::one,
                                              Conditioning::end, {attempt, s.overhead.per_point, false});
    faster += b.total_time <= a.total_time && od.mean_time <= ps.mean_time;
    mc_agree += std::abs(ps.mean_time - a.total_time) <= 3.0 * ps.time_stderr &&
                std::abs(od.mean_time - b.total_time) <= 3.0 * od.time_stderr;
  }
  const bool restart_ok = draws == 10 && faster == 10 && mc_agree == 10;
  return {meets && differ && restart_ok,
          std::string("optima meet target: ") + (meets ? "yes" : "no") + "; readout optimum (P=" +
              fmt("%.3g", ro.best().control) + ", T=" + fmt("%.3g", ro.best().duration) +
              " s) vs preparation (P=" + fmt("%.3g", ep.best().control) + ", T=" + fmt("%.3g", ep.best().duration) +
              " s) differ: " + (differ ? "yes" : "no") + "; on-demand <= postselection in " +
              std::to_string(faster) + "/" + std::to_string(draws) + " draws, episode MC within 3 sigma in " +
              std::to_string(mc_agree) + "/" + std::to_string(draws) +
              ""};
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "fdro_acceptance_determinism";
  fs::remove_all(root);
  const fs::path configs = fs::path(FDRO_SOURCE_DIR) / "configs";
  const std::vector<std::pair<std::string, std::string>> jobs = {
      {"pdf", "pdf_example.json"},
      {"mc", "pdf_example.json"},
      {"error-curve", "error_curve_g100.json"},
      {"optimize", "optimize_electron_preparation.json"},
      {"optimize", "optimize_nuclear_ssr.json"}};
  int files = 0;
  for (int rep = 0; rep < 2; ++rep) {
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      const std::string out = (root / std::to_string(rep) / std::to_string(j)).string();
      const std::string config = (configs / jobs[j].second).string();
      std::vector<const char*> argv = {"fdro", jobs[j].first.c_str(), "-c", config.c_str(), "-o", out.c_str()};
      if (jobs[j].first == "mc") argv.push_back("--compare");
      std::ostringstream log, err;
      if (cli::run_cli(static_cast<int>(argv.size()), argv.data(), log, err) != 0)
        return {false, jobs[j].first + " failed: " + err.str()};
    }
  }
  for (const auto& entry : fs::recursive_directory_iterator(root / "0")) {
    if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
    const fs::path twin = root / "1" / fs::relative(entry.path(), root / "0");
    std::ifstream a(entry.path(), std::ios::binary), b(twin, std::ios::binary);
    const std::string sa{std::istreambuf_iterator<char>(a), {}}, sb{std::istreambuf_iterator<char>(b), {}};
    if (sa != sb) return {false, "differs: " + entry.path().filename().string()};
    ++files;
  }
  fs::remove_all(root);
  return {files > 0, std::to_string(files) + " CSV files byte-identical across two runs"};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "normalization suite", 60.0, normalization},
      {2, "histograms vs analytic PMFs", 30.0, histograms},
      {3, "error minima vs window", 60.0, error_minima},
      {4, "selection curve ordering and monotonicity", 30.0, efficiency_ordering},
      {5, "limit equivalences", 0.0, limits},
      {6, "oracle equivalence", 0.0, oracle_equivalence},
      {7, "scenario properties", 0.0, scenarios},
      {8, "determinism", 0.0, determinism},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string timing = fmt("%.2f s", secs);
    if (c.limit_s > 0.0) {
      timing += fmt(" (limit %.0f s)", c.limit_s);
      if (secs > c.limit_s) o.pass = false;
    }
    failed += !o.pass;
    std::printf("[%s] criterion %d %s: %s; %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                timing.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
