#include "cli/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>

#include "fdro/io.hpp"

namespace fdro::cli {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void reject_unknown(const json& obj, const std::string& path, std::set<std::string> allowed) {
  if (!obj.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) throw ConfigError(join(path, key), "unknown field");
}

double number(const json& obj, const std::string& key, const std::string& path) {
  const std::string p = join(path, key);
  if (!obj.contains(key)) throw ConfigError(p, "required field is missing");
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(p, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(p, "must be finite");
  return x;
}

double nonneg(const json& obj, const std::string& key, const std::string& path) {
  const double x = number(obj, key, path);
  if (x < 0.0) throw ConfigError(join(path, key), "must be >= 0");
  return x;
}

double positive(const json& obj, const std::string& key, const std::string& path) {
  const double x = number(obj, key, path);
  if (!(x > 0.0)) throw ConfigError(join(path, key), "must be > 0");
  return x;
}

double probability(const json& obj, const std::string& key, const std::string& path) {
  const double x = number(obj, key, path);
  if (x < 0.0 || x > 1.0) throw ConfigError(join(path, key), "must lie in [0, 1]");
  return x;
}

std::int64_t integer(const json& obj, const std::string& key, const std::string& path) {
  const std::string p = join(path, key);
  if (!obj.contains(key)) throw ConfigError(p, "required field is missing");
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(p, "expected an integer");
  return v.get<std::int64_t>();
}

std::string text(const json& obj, const std::string& key, const std::string& path) {
  const std::string p = join(path, key);
  if (!obj.contains(key)) throw ConfigError(p, "required field is missing");
  if (!obj.at(key).is_string()) throw ConfigError(p, "expected a string");
  return obj.at(key).get<std::string>();
}

StatePriors parse_priors(const json& j, const std::string& path) {
  reject_unknown(j, path, {"p0"});
  return StatePriors{probability(j, "p0", path)};
}

// [x, ...] | {start, stop, count[, scale]} | {start, stop, step}
std::vector<double> parse_grid(const json& j, const std::string& path) {
  std::vector<double> out;
  if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (!j[i].is_number()) throw ConfigError(path + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(j[i].get<double>());
    }
  } else if (j.is_object()) {
    reject_unknown(j, path, {"start", "stop", "count", "step", "scale"});
    const double start = number(j, "start", path);
    const double stop = number(j, "stop", path);
    if (stop < start) throw ConfigError(join(path, "stop"), "must be >= start");
    const std::string scale = j.contains("scale") ? text(j, "scale", path) : "linear";
    if (scale != "linear" && scale != "log") throw ConfigError(join(path, "scale"), "expected 'linear' or 'log'");
    if (j.contains("count") == j.contains("step"))
      throw ConfigError(path, "exactly one of 'count' or 'step' is required");
    if (j.contains("step")) {
      if (scale != "linear") throw ConfigError(join(path, "step"), "step requires linear scale");
      const double step = positive(j, "step", path);
      const auto n = static_cast<std::int64_t>(std::floor((stop - start) / step * (1.0 + 1e-12))) + 1;
      for (std::int64_t i = 0; i < n; ++i) out.push_back(start + step * i);
    } else {
      const std::int64_t count = integer(j, "count", path);
      if (count < 1) throw ConfigError(join(path, "count"), "must be >= 1");
      if (scale == "log" && !(start > 0.0)) throw ConfigError(join(path, "start"), "log grid requires start > 0");
      for (std::int64_t i = 0; i < count; ++i) {
        const double f = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
        out.push_back(scale == "log" ? start * std::pow(stop / start, f) : start + f * (stop - start));
      }
    }
  } else {
    throw ConfigError(path, "expected an array or a range object");
  }
  if (out.empty()) throw ConfigError(path, "grid is empty");
  for (std::size_t i = 0; i < out.size(); ++i)
    if (!std::isfinite(out[i])) throw ConfigError(path + "[" + std::to_string(i) + "]", "must be finite");
  return out;
}

CalibrationSet parse_calibration(const json& j, const std::string& path,
                                 const std::filesystem::path& base_dir) {
  reject_unknown(j, path, {"file", "curves"});
  if (j.contains("file") == j.contains("curves"))
    throw ConfigError(path, "exactly one of 'file' or 'curves' is required");
  try {
    if (j.contains("file")) {
      std::filesystem::path file = text(j, "file", path);
      if (file.is_relative()) file = base_dir / file;
      std::ifstream in(file);
      if (!in) throw ConfigError(join(path, "file"), "cannot open '" + file.string() + "'");
      return io::read_calibration_csv(in);
    }
    const json& curves = j.at("curves");
    const std::string cpath = join(path, "curves");
    reject_unknown(curves, cpath, {"gamma_0", "gamma_1", "lambda_0", "lambda_1"});
    CalibrationSet set;
    for (const auto& [name, knots] : curves.items()) {
      const std::string kp = join(cpath, name);
      if (!knots.is_array()) throw ConfigError(kp, "expected an array of [control, rate] pairs");
      CalibrationCurve c;
      c.quantity = quantity_from_string(name);
      for (const auto& k : knots) {
        if (!k.is_array() || k.size() != 2 || !k[0].is_number() || !k[1].is_number())
          throw ConfigError(kp, "expected [control, rate] pairs");
        c.knots.emplace_back(k[0].get<double>(), k[1].get<double>());
      }
      try {
        set.set(std::move(c));
      } catch (const DomainError& e) {
        throw ConfigError(kp, e.what());
      }
    }
    set.validate();
    return set;
  } catch (const DomainError& e) {
    throw ConfigError(path, e.what());
  }
}

Scenario parse_scenario(const json& j, const std::string& path) {
  reject_unknown(j, path, {"kind", "target_fidelity", "target_state", "priors_at_start",
                           "restart", "overhead"});
  Scenario s;
  try {
    s.kind = scenario_kind_from_string(text(j, "kind", path));
  } catch (const DomainError& e) {
    throw ConfigError(join(path, "kind"), e.what());
  }
  s.target_fidelity = number(j, "target_fidelity", path);
  if (!(s.target_fidelity > 0.0 && s.target_fidelity < 1.0))
    throw ConfigError(join(path, "target_fidelity"), "must lie in (0, 1)");
  if (j.contains("target_state")) {
    const auto t = integer(j, "target_state", path);
    if (t != 0 && t != 1) throw ConfigError(join(path, "target_state"), "must be 0 or 1");
    s.target = t == 0 ? State::zero : State::one;
  }
  if (j.contains("priors_at_start"))
    s.priors_at_start = parse_priors(j.at("priors_at_start"), join(path, "priors_at_start"));
  if (j.contains("restart")) {
    const std::string r = text(j, "restart", path);
    if (r == "postselection") {
      s.restart = RestartPolicy::postselection;
    } else if (r == "on_demand") {
      s.restart = RestartPolicy::on_demand;
    } else {
      throw ConfigError(join(path, "restart"), "expected 'postselection' or 'on_demand'");
    }
  }
  if (j.contains("overhead")) {
    const json& o = j.at("overhead");
    const std::string op = join(path, "overhead");
    reject_unknown(o, op, {"per_attempt", "per_point", "per_repetition"});
    if (o.contains("per_attempt")) s.overhead.per_attempt = nonneg(o, "per_attempt", op);
    if (o.contains("per_point")) s.overhead.per_point = nonneg(o, "per_point", op);
    if (o.contains("per_repetition")) s.overhead.per_repetition = nonneg(o, "per_repetition", op);
  }
  return s;
}

json* walk(json& root, const std::string& dotted, bool create) {
  json* node = &root;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = dotted.find('.', start);
    const std::string key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError(dotted, "malformed override path");
    if (!node->is_object()) {
      if (!create || !node->is_null()) throw ConfigError(dotted, "override path crosses a non-object");
      *node = json::object();
    }
    node = &(*node)[key];
    if (dot == std::string::npos) return node;
    start = dot + 1;
  }
}

}  // namespace

Window RunConfig::window() const {
  if (!duration) throw ConfigError("window.T", "required field is missing");
  return Window{*duration, grid_nodes};
}

StatePriors RunConfig::priors_or_steady_state() const {
  if (priors) return *priors;
  if (!rates) throw ConfigError("rates", "section is required");
  try {
    return steady_state_priors(*rates);
  } catch (const DegeneratePriorsError&) {
    throw ConfigError("priors", "required when both switching rates are zero");
  }
}

void apply_override(json& config, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError(assignment, "override must look like key.path=value");
  const std::string path = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);
  json parsed = json::parse(value, nullptr, false);
  if (parsed.is_discarded()) parsed = value;
  *walk(config, path, true) = std::move(parsed);
}

RunConfig parse_config(const json& j, const std::filesystem::path& base_dir) {
  reject_unknown(j, "", {"rates", "emission", "window", "priors", "mc", "error_curve", "scenario",
                         "calibration", "grids", "nuclear", "output"});
  RunConfig c;
  if (j.contains("rates")) {
    const json& r = j.at("rates");
    reject_unknown(r, "rates", {"gamma_0", "gamma_1"});
    c.rates = SwitchingRates{nonneg(r, "gamma_0", "rates"), nonneg(r, "gamma_1", "rates")};
  }
  if (j.contains("emission")) {
    const json& e = j.at("emission");
    reject_unknown(e, "emission", {"lambda_0", "lambda_1"});
    c.emission = EmissionRates{nonneg(e, "lambda_0", "emission"), nonneg(e, "lambda_1", "emission")};
  }
  if (j.contains("window")) {
    const json& w = j.at("window");
    reject_unknown(w, "window", {"T", "grid_nodes"});
    if (w.contains("T")) c.duration = positive(w, "T", "window");
    if (w.contains("grid_nodes")) {
      const auto n = integer(w, "grid_nodes", "window");
      if (n < 3 || n % 2 == 0 || n > 1000001)
        throw ConfigError("window.grid_nodes", "must be an odd integer in [3, 1000001]");
      c.grid_nodes = static_cast<int>(n);
    }
  }
  if (j.contains("priors")) c.priors = parse_priors(j.at("priors"), "priors");
  if (j.contains("mc")) {
    const json& m = j.at("mc");
    reject_unknown(m, "mc", {"runs", "seed", "stream_id", "tv_bin_width"});
    if (m.contains("runs")) {
      const auto runs = integer(m, "runs", "mc");
      if (runs < 1) throw ConfigError("mc.runs", "must be >= 1");
      c.mc.runs = static_cast<std::uint64_t>(runs);
    }
    if (m.contains("seed")) {
      if (!m.at("seed").is_number_unsigned() && !(m.at("seed").is_number_integer() && m.at("seed").get<std::int64_t>() >= 0))
        throw ConfigError("mc.seed", "expected a non-negative integer");
      c.mc.seed = m.at("seed").get<std::uint64_t>();
    }
    if (m.contains("stream_id")) {
      const auto s = integer(m, "stream_id", "mc");
      if (s < 0) throw ConfigError("mc.stream_id", "must be >= 0");
      c.mc.stream_id = static_cast<std::uint64_t>(s);
    }
    if (m.contains("tv_bin_width")) {
      const auto w = integer(m, "tv_bin_width", "mc");
      if (w < 1) throw ConfigError("mc.tv_bin_width", "must be >= 1");
      c.tv_bin_width = static_cast<int>(w);
    }
  }
  if (j.contains("error_curve")) {
    const json& e = j.at("error_curve");
    reject_unknown(e, "error_curve", {"T", "curve_T"});
    if (!e.contains("T")) throw ConfigError("error_curve.T", "required field is missing");
    c.error_durations = parse_grid(e.at("T"), "error_curve.T");
    for (double t : c.error_durations)
      if (!(t > 0.0)) throw ConfigError("error_curve.T", "durations must be > 0");
    if (e.contains("curve_T")) c.curve_duration = positive(e, "curve_T", "error_curve");
  }
  if (j.contains("scenario")) c.scenario = parse_scenario(j.at("scenario"), "scenario");
  if (j.contains("calibration"))
    c.calibration = parse_calibration(j.at("calibration"), "calibration", base_dir);
  if (j.contains("grids")) {
    const json& g = j.at("grids");
    reject_unknown(g, "grids", {"power", "duration", "repetitions"});
    if (g.contains("power")) c.power_grid = parse_grid(g.at("power"), "grids.power");
    if (g.contains("duration")) {
      c.duration_grid = parse_grid(g.at("duration"), "grids.duration");
      for (double t : c.duration_grid)
        if (!(t > 0.0)) throw ConfigError("grids.duration", "durations must be > 0");
    }
    if (g.contains("repetitions")) {
      for (double r : parse_grid(g.at("repetitions"), "grids.repetitions")) {
        if (r < 1.0 || r != std::floor(r))
          throw ConfigError("grids.repetitions", "repetitions must be integers >= 1");
        c.repetition_grid.push_back(static_cast<int>(r));
      }
    }
  }
  if (j.contains("nuclear")) {
    const json& n = j.at("nuclear");
    reject_unknown(n, "nuclear", {"rep_duration", "lambda_0", "lambda_1", "decay_per_rep"});
    NuclearRepetition r;
    r.duration = positive(n, "rep_duration", "nuclear");
    r.lambda_0 = nonneg(n, "lambda_0", "nuclear");
    r.lambda_1 = nonneg(n, "lambda_1", "nuclear");
    r.decay_per_rep = probability(n, "decay_per_rep", "nuclear");
    if (!(r.decay_per_rep < 1.0)) throw ConfigError("nuclear.decay_per_rep", "must be < 1");
    c.nuclear = r;
  }
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) c.output_dir = env;
  if (j.contains("output")) {
    const json& o = j.at("output");
    reject_unknown(o, "output", {"dir", "formats"});
    if (o.contains("dir")) c.output_dir = text(o, "dir", "output");
    if (o.contains("formats")) {
      const json& f = o.at("formats");
      if (!f.is_array() || f.empty()) throw ConfigError("output.formats", "expected a nonempty array");
      c.write_csv = c.write_json = false;
      for (const auto& x : f) {
        const std::string name = x.is_string() ? x.get<std::string>() : "";
        if (name == "csv") {
          c.write_csv = true;
        } else if (name == "json") {
          c.write_json = true;
        } else {
          throw ConfigError("output.formats", "entries must be 'csv' or 'json'");
        }
      }
    }
  }
  return c;
}

json read_config_json(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError(file.string(), "cannot open config file");
  json j = json::parse(in, nullptr, false, true);
  if (j.is_discarded()) throw ConfigError(file.string(), "not valid JSON");
  return j;
}

RunConfig load_config_file(const std::filesystem::path& file,
                           const std::vector<std::string>& overrides) {
  json j = read_config_json(file);
  for (const std::string& o : overrides) apply_override(j, o);
  return parse_config(j, file.parent_path());
}

}  // namespace fdro::cli
