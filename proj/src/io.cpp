#include "fdro/io.hpp"

#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace fdro::io {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  if (text == "inf") return INFINITY;
  if (text == "-inf") return -INFINITY;
  if (text == "nan") return NAN;
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last)
    throw DomainError("cannot parse number '" + text + "'");
  return value;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    cells.push_back(cell);
  }
  return cells;
}

std::string conditioning_name(Conditioning c) { return c == Conditioning::start ? "start" : "end"; }

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw DomainError("CSV is missing column '" + name + "'");
}

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto cells = split_line(line);
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      if (cells.size() != t.header.size())
        throw DomainError("CSV row has " + std::to_string(cells.size()) + " cells, expected " +
                          std::to_string(t.header.size()));
      t.rows.push_back(std::move(cells));
    }
  }
  if (first) throw DomainError("CSV is empty");
  return t;
}

void write_pmf_csv(std::ostream& out, const CountDistribution& dist) {
  out << "n,pmf\n";
  for (int n = 0; n <= dist.n_max(); ++n) out << n << ',' << format_double(dist.pmf[n]) << '\n';
}

Eigen::VectorXd read_pmf_csv(std::istream& in) {
  const CsvTable t = read_csv(in);
  const std::size_t cn = t.column("n");
  const std::size_t cp = t.column("pmf");
  Eigen::VectorXd pmf = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(t.rows.size()));
  for (const auto& row : t.rows) {
    const auto n = static_cast<Eigen::Index>(parse_double(row[cn]));
    if (n < 0 || n >= pmf.size()) throw DomainError("PMF CSV has out-of-order count index");
    pmf[n] = parse_double(row[cp]);
  }
  return pmf;
}

nlohmann::json to_json(const CountParams& params) {
  nlohmann::json j;
  j["rates"] = {{"gamma_0", params.rates.gamma_0}, {"gamma_1", params.rates.gamma_1}};
  j["emission"] = {{"lambda_0", params.emission.lambda_0},
                   {"lambda_1", params.emission.lambda_1}};
  j["window"] = {{"T", params.window.duration}, {"grid_nodes", params.window.grid_nodes}};
  if (params.priors) j["priors"] = {{"p0", params.priors->p0}};
  return j;
}

nlohmann::json to_json(const CountDistribution& dist) {
  nlohmann::json j;
  j["params"] = to_json(dist.params);
  j["conditioning"] = {{"time", conditioning_name(dist.conditioning)},
                       {"state", index_of(dist.state)},
                       {"raw_mass", dist.raw_mass}};
  j["pmf"] = std::vector<double>(dist.pmf.data(), dist.pmf.data() + dist.pmf.size());
  return j;
}

void write_histograms_csv(std::ostream& out, const EmpiricalDistributions& hist) {
  out << "n,pmf_estimate,stderr,class\n";
  for (const EmpiricalHistogram& h : hist.classes) {
    const std::string cls = to_string(h.condition);
    for (Eigen::Index n = 0; n < h.pmf.size(); ++n)
      out << n << ',' << format_double(h.pmf[n]) << ',' << format_double(h.std_error[n]) << ','
          << cls << '\n';
  }
}

void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve) {
  out << "threshold,efficiency,error_rate,fidelity,success_rate\n";
  for (const CurvePoint& p : curve)
    out << p.threshold << ',' << format_double(p.efficiency) << ','
        << format_double(p.error_rate) << ',' << format_double(p.fidelity) << ','
        << format_double(p.success_rate) << '\n';
}

std::string to_string(Plane p) {
  switch (p) {
    case Plane::fidelity: return "fidelity";
    case Plane::threshold_shift: return "threshold_shift";
    case Plane::attempts: return "attempts";
    case Plane::time: return "time";
  }
  return "unknown";
}

void write_plane_csv(std::ostream& out, const SweepResult& result, Plane plane) {
  out << "control";
  for (double d : result.durations) out << ',' << format_double(d);
  out << '\n';
  for (std::size_t ci = 0; ci < result.controls.size(); ++ci) {
    out << format_double(result.controls[ci]);
    for (std::size_t di = 0; di < result.durations.size(); ++di) {
      const SweepPoint& p = result.at(ci, di);
      out << ',';
      switch (plane) {
        case Plane::fidelity: out << format_double(p.fidelity); break;
        case Plane::threshold_shift: out << p.threshold_shift; break;
        case Plane::attempts: out << format_double(p.attempts); break;
        case Plane::time: out << format_double(p.total_time); break;
      }
    }
    out << '\n';
  }
}

nlohmann::json optimum_json(const SweepResult& result, const Scenario& scenario) {
  const SweepPoint& p = result.best();
  nlohmann::json j;
  j["scenario"] = to_string(scenario.kind);
  j["target_fidelity"] = scenario.target_fidelity;
  j["target_state"] = index_of(scenario.target);
  j["restart"] = scenario.restart == RestartPolicy::postselection ? "postselection" : "on_demand";
  j["optimum"] = {{"index", result.optimum},
                  {"control", p.control},
                  {"duration", p.duration},
                  {"threshold", p.threshold},
                  {"threshold_shift", p.threshold_shift},
                  {"fidelity", p.fidelity},
                  {"efficiency", p.efficiency},
                  {"attempts", p.attempts},
                  {"total_time", p.total_time}};
  return j;
}

CalibrationSet read_calibration_csv(std::istream& in) {
  const CsvTable t = read_csv(in);
  const std::size_t cq = t.column("quantity");
  const std::size_t cc = t.column("control");
  const std::size_t cr = t.column("rate");
  std::map<int, CalibrationCurve> curves;
  for (const auto& row : t.rows) {
    const Quantity q = quantity_from_string(row[cq]);
    CalibrationCurve& c = curves[static_cast<int>(q)];
    c.quantity = q;
    c.knots.emplace_back(parse_double(row[cc]), parse_double(row[cr]));
  }
  CalibrationSet set;
  for (auto& [_, c] : curves) set.set(std::move(c));
  set.validate();
  return set;
}

}  // namespace fdro::io
