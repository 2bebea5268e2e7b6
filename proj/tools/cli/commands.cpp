#include "cli/commands.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <fstream>
#include <functional>
#include <limits>
#include <ostream>

#include "fdro/errors.hpp"
#include "fdro/inference.hpp"
#include "fdro/io.hpp"

namespace fdro::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

template <class T>
const T& require(const std::optional<T>& x, const char* path, const char* command) {
  if (!x) throw ConfigError(path, std::string("section is required for ") + command);
  return *x;
}

class Outputs {
 public:
  Outputs(const RunConfig& cfg, std::ostream& log) : cfg_(cfg), log_(log) {
    fs::create_directories(cfg.output_dir);
  }

  void csv(const std::string& name, const std::function<void(std::ostream&)>& body) {
    if (cfg_.write_csv) write(name, body);
  }
  void json_file(const std::string& name, const json& doc) {
    if (cfg_.write_json) write(name, [&](std::ostream& o) { o << doc.dump(2) << '\n'; });
  }
  std::vector<fs::path> take() { return std::move(written_); }

 private:
  void write(const std::string& name, const std::function<void(std::ostream&)>& body) {
    const fs::path path = cfg_.output_dir / name;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    body(out);
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
    log_ << "wrote " << path.string() << '\n';
    written_.push_back(path);
  }

  const RunConfig& cfg_;
  std::ostream& log_;
  std::vector<fs::path> written_;
};

const char* state_tag(State s) { return s == State::zero ? "0" : "1"; }

State bright_state(const EmissionRates& e) {
  return e.lambda_1 >= e.lambda_0 ? State::one : State::zero;
}

}  // namespace

std::vector<fs::path> cmd_pdf(const RunConfig& cfg, std::ostream& log) {
  const SwitchingRates& rates = require(cfg.rates, "rates", "pdf");
  const EmissionRates& emission = require(cfg.emission, "emission", "pdf");
  const Window window = cfg.window();
  const StatePriors priors = cfg.priors_or_steady_state();

  const ParityResolvedCounts counts = parity_resolved_counts(rates, emission, window);
  Outputs out(cfg, log);
  json dists = json::array();
  for (State s : {State::zero, State::one}) {
    const CountDistribution d = count_pmf_given_initial(s, counts);
    out.csv(std::string("pmf_initial_") + state_tag(s) + ".csv",
            [&](std::ostream& o) { io::write_pmf_csv(o, d); });
    dists.push_back(io::to_json(d));
  }
  for (State s : {State::zero, State::one}) {
    try {
      const CountDistribution d = count_pmf_given_final(s, counts, priors);
      out.csv(std::string("pmf_final_") + state_tag(s) + ".csv",
              [&](std::ostream& o) { io::write_pmf_csv(o, d); });
      dists.push_back(io::to_json(d));
    } catch (const UnreachableStateError& e) {
      log << "skipped final |" << state_tag(s) << ">: " << e.what() << '\n';
    }
  }
  out.json_file("distributions.json",
                json{{"params", io::to_json(CountParams{rates, emission, window, priors})},
                     {"distributions", dists}});
  return out.take();
}

std::vector<fs::path> cmd_mc(const RunConfig& cfg, bool compare, std::ostream& log) {
  const SwitchingRates& rates = require(cfg.rates, "rates", "mc");
  const EmissionRates& emission = require(cfg.emission, "emission", "mc");
  const Window window = cfg.window();
  const StatePriors priors = cfg.priors_or_steady_state();

  const auto start = std::chrono::steady_clock::now();
  const EmpiricalDistributions hist = empirical_distributions(cfg.mc, rates, emission, window, priors);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  Outputs out(cfg, log);
  out.csv("mc_histograms.csv", [&](std::ostream& o) { io::write_histograms_csv(o, hist); });

  json classes = json::object();
  for (ConditionClass c : kConditionClasses)
    classes[to_string(c)] = {{"samples", hist[c].samples}, {"overflow", hist[c].overflow}};
  out.json_file("mc_manifest.json",
                json{{"seed", cfg.mc.seed},
                     {"runs", cfg.mc.runs},
                     {"stream_id", cfg.mc.stream_id},
                     {"params", io::to_json(CountParams{rates, emission, window, priors})},
                     {"classes", classes},
                     {"wall_time_s", wall}});

  if (compare) {
    const ParityResolvedCounts counts = parity_resolved_counts(rates, emission, window);
    out.csv("mc_compare.csv", [&](std::ostream& o) {
      o << "class,samples,tv_unit_bins,tv_binned,bin_width\n";
      for (ConditionClass c : kConditionClasses) {
        const EmpiricalHistogram& h = hist[c];
        if (h.samples == 0) continue;
        std::optional<CountDistribution> d;
        try {
          switch (c) {
            case ConditionClass::initial_0: d = count_pmf_given_initial(State::zero, counts); break;
            case ConditionClass::initial_1: d = count_pmf_given_initial(State::one, counts); break;
            case ConditionClass::final_0: d = count_pmf_given_final(State::zero, counts, priors); break;
            case ConditionClass::final_1: d = count_pmf_given_final(State::one, counts, priors); break;
          }
        } catch (const UnreachableStateError&) {
          continue;
        }
        o << to_string(c) << ',' << h.samples << ','
          << io::format_double(total_variation(h.pmf, d->pmf, 1)) << ','
          << io::format_double(total_variation(h.pmf, d->pmf, cfg.tv_bin_width)) << ','
          << cfg.tv_bin_width << '\n';
      }
    });
  }
  return out.take();
}

std::vector<fs::path> cmd_error_curve(const RunConfig& cfg, std::ostream& log) {
  const SwitchingRates& rates = require(cfg.rates, "rates", "error-curve");
  const EmissionRates& emission = require(cfg.emission, "emission", "error-curve");
  if (cfg.error_durations.empty())
    throw ConfigError("error_curve.T", "grid is required for error-curve");
  const StatePriors priors = cfg.priors_or_steady_state();

  struct Row {
    double T, final_weighted, final_unweighted, initial_weighted;
  };
  std::vector<Row> rows;
  for (double T : cfg.error_durations) {
    const Window window{T, cfg.grid_nodes};
    const ParityResolvedCounts counts = parity_resolved_counts(rates, emission, window);
    const CountDistribution i0 = count_pmf_given_initial(State::zero, counts);
    const CountDistribution i1 = count_pmf_given_initial(State::one, counts);
    const CountDistribution f0 = count_pmf_given_final(State::zero, counts, priors);
    const CountDistribution f1 = count_pmf_given_final(State::one, counts, priors);
    const StatePriors fp = counts.final_priors(priors);
    rows.push_back({T, error_rate_ml(f0, f1, fp, Weighting::prior_weighted),
                    error_rate_ml(f0, f1, fp, Weighting::unweighted),
                    error_rate_ml(i0, i1, priors, Weighting::prior_weighted)});
  }

  double curve_T = rows.front().T;
  double best = std::numeric_limits<double>::infinity();
  for (const Row& r : rows) {
    if (r.final_weighted < best) {
      best = r.final_weighted;
      curve_T = r.T;
    }
  }
  if (cfg.curve_duration) curve_T = *cfg.curve_duration;
  log << "minimum final-state error " << io::format_double(best) << '\n';
  log << "selection curves at T = " << io::format_double(curve_T) << '\n';

  Outputs out(cfg, log);
  out.csv("error_vs_T.csv", [&](std::ostream& o) {
    o << "T,error_final_weighted,error_final_unweighted,error_initial_weighted\n";
    for (const Row& r : rows)
      o << io::format_double(r.T) << ',' << io::format_double(r.final_weighted) << ','
        << io::format_double(r.final_unweighted) << ',' << io::format_double(r.initial_weighted)
        << '\n';
  });

  const Window window{curve_T, cfg.grid_nodes};
  const ParityResolvedCounts counts = parity_resolved_counts(rates, emission, window);
  const State target = bright_state(emission);
  const State dark = other(target);
  const auto final_curve =
      selection_curve(count_pmf_given_final(target, counts, priors),
                      count_pmf_given_final(dark, counts, priors), counts.final_priors(priors));
  const auto baseline = initial_estimate_with_survival(
      count_pmf_given_initial(target, counts), count_pmf_given_initial(dark, counts), priors,
      rates.leaving(target), window);
  out.csv("error_vs_efficiency_final.csv",
          [&](std::ostream& o) { io::write_curve_csv(o, final_curve); });
  out.csv("error_vs_efficiency_baseline.csv",
          [&](std::ostream& o) { io::write_curve_csv(o, baseline); });
  return out.take();
}

std::vector<fs::path> cmd_optimize(const RunConfig& cfg, std::ostream& log) {
  Scenario scenario = require(cfg.scenario, "scenario", "optimize");
  scenario.grid_nodes = cfg.grid_nodes;

  SweepResult result;
  if (scenario.kind == ScenarioKind::nuclear_ssr) {
    const NuclearRepetition& rep = require(cfg.nuclear, "nuclear", "nuclear_ssr");
    if (cfg.repetition_grid.empty())
      throw ConfigError("grids.repetitions", "grid is required for nuclear_ssr");
    result = sweep(scenario, rep, cfg.repetition_grid);
  } else {
    const CalibrationSet& calibration = require(cfg.calibration, "calibration", "optimize");
    if (cfg.power_grid.empty()) throw ConfigError("grids.power", "grid is required for optimize");
    if (cfg.duration_grid.empty())
      throw ConfigError("grids.duration", "grid is required for optimize");
    for (double p : cfg.power_grid) {
      try {
        (void)calibration.switching_at(p);
        (void)calibration.emission_at(p);
      } catch (const RangeError& e) {
        throw ConfigError("grids.power", e.what());
      }
    }
    result = sweep(scenario, calibration, cfg.power_grid, cfg.duration_grid);
  }

  const SweepPoint& best = result.best();
  log << "optimum: control " << io::format_double(best.control) << ", T "
      << io::format_double(best.duration) << ", fidelity " << io::format_double(best.fidelity)
      << ", total time " << io::format_double(best.total_time) << '\n';

  Outputs out(cfg, log);
  for (io::Plane p : {io::Plane::fidelity, io::Plane::threshold_shift, io::Plane::attempts,
                      io::Plane::time}) {
    out.csv("plane_" + io::to_string(p) + ".csv",
            [&](std::ostream& o) { io::write_plane_csv(o, result, p); });
  }
  out.json_file("optimum.json", io::optimum_json(result, scenario));
  return out.take();
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Count statistics and readout optimization for a switching two-level emitter"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> sets;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> runs;
  std::optional<double> target;
  bool compare = false;

  auto common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "JSON configuration file");
    sub->add_option("--set", sets, "Override a config field, e.g. --set rates.gamma_0=100")
        ->take_all();
    sub->add_option("-o,--out", out_dir, "Output directory (overrides output.dir)");
  };

  CLI::App* pdf = app.add_subcommand("pdf", "Analytic count distributions");
  common(pdf);
  CLI::App* mc = app.add_subcommand("mc", "Monte Carlo count histograms");
  common(mc);
  mc->add_option("--seed", seed, "Random seed (overrides mc.seed)");
  mc->add_option("--runs", runs, "Number of trajectories (overrides mc.runs)");
  mc->add_flag("--compare", compare, "Also write total-variation distances to the analytic PMFs");
  CLI::App* curve = app.add_subcommand("error-curve", "Error versus window and selection curves");
  common(curve);
  CLI::App* opt = app.add_subcommand("optimize", "Sweep the control grid for the fastest point");
  common(opt);
  opt->add_option("--target", target, "Target fidelity (overrides scenario.target_fidelity)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    json j = config_path.empty() ? json::object() : read_config_json(config_path);
    for (const std::string& s : sets) apply_override(j, s);
    if (!out_dir.empty()) j["output"]["dir"] = out_dir;
    if (seed) j["mc"]["seed"] = *seed;
    if (runs) j["mc"]["runs"] = *runs;
    if (target) j["scenario"]["target_fidelity"] = *target;
    const fs::path base = config_path.empty() ? fs::current_path() : fs::path(config_path).parent_path();
    const RunConfig cfg = parse_config(j, base);

    if (pdf->parsed()) cmd_pdf(cfg, out);
    if (mc->parsed()) cmd_mc(cfg, compare, out);
    if (curve->parsed()) cmd_error_curve(cfg, out);
    if (opt->parsed()) cmd_optimize(cfg, out);
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InsufficientSamplesError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NoFeasiblePointError& e) {
    err << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const DomainError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ConvergenceError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const UnreachableStateError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace fdro::cli
