#pragma once

// Plot-ready CSV and JSON. Numbers are written with the shortest
// representation that round-trips exactly, independent of locale.

#include <iosfwd>
#include <json.hpp>
#include <string>
#include <vector>

#include "fdro/counting.hpp"
#include "fdro/inference.hpp"
#include "fdro/montecarlo.hpp"
#include "fdro/optimizer.hpp"

namespace fdro::io {

std::string format_double(double x);
double parse_double(const std::string& text);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
};

CsvTable read_csv(std::istream& in);

// columns: n, pmf
void write_pmf_csv(std::ostream& out, const CountDistribution& dist);
Eigen::VectorXd read_pmf_csv(std::istream& in);

nlohmann::json to_json(const CountParams& params);
// fields: params, conditioning, pmf
nlohmann::json to_json(const CountDistribution& dist);

// columns: n, pmf_estimate, stderr, class
void write_histograms_csv(std::ostream& out, const EmpiricalDistributions& hist);

// columns: threshold, efficiency, error_rate, fidelity, success_rate
void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve);

enum class Plane : std::uint8_t { fidelity, threshold_shift, attempts, time };
std::string to_string(Plane p);
// First column holds control values, header row holds durations.
void write_plane_csv(std::ostream& out, const SweepResult& result, Plane plane);
nlohmann::json optimum_json(const SweepResult& result, const Scenario& scenario);

// Long format: quantity, control, rate
CalibrationSet read_calibration_csv(std::istream& in);

}  // namespace fdro::io
