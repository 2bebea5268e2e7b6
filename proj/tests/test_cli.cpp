#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli/commands.hpp"
#include "fdro/io.hpp"

namespace fs = std::filesystem;
using namespace fdro;

namespace {

const fs::path kSource = FDRO_SOURCE_DIR;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "fdro");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fdro_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

io::CsvTable table(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in);
  return io::read_csv(in);
}

std::vector<double> column(const io::CsvTable& t, const std::string& name) {
  std::vector<double> v;
  for (const auto& row : t.rows) v.push_back(io::parse_double(row[t.column(name)]));
  return v;
}

std::string cfg(const std::string& name) { return (kSource / "configs" / name).string(); }

}  // namespace

TEST_CASE("pdf") {
  const fs::path dir = scratch("pdf");
  const Run r = run({"pdf", "-c", cfg("pdf_example.json"), "-o", dir.string()});
  REQUIRE(r.code == 0);
  for (const char* f : {"pmf_initial_0.csv", "pmf_initial_1.csv", "pmf_final_0.csv", "pmf_final_1.csv"}) {
    CAPTURE(f);
    const auto pmf = column(table(dir / f), "pmf");
    double s = 0.0;
    for (double x : pmf) s += x;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-6));
  }
  std::ifstream js(dir / "distributions.json");
  const auto j = nlohmann::json::parse(js);
  CHECK(j.at("distributions").size() == 4);

  SUBCASE("no switching gives Poisson files") {
    const fs::path d2 = scratch("pdf_poisson");
    const Run p = run({"pdf", "-c", cfg("pdf_example.json"), "-o", d2.string(), "--set",
                       "rates.gamma_0=0", "--set", "rates.gamma_1=0", "--set", "priors.p0=0.5"});
    REQUIRE(p.code == 0);
    const auto pmf = column(table(d2 / "pmf_initial_1.csv"), "pmf");
    double worst = 0.0;
    for (std::size_t n = 0; n < pmf.size(); ++n)
      worst = std::max(worst, std::abs(pmf[n] - poisson_pmf(static_cast<int>(n), 40.0)));
    CHECK(worst < 1e-9);
  }
  SUBCASE("unreachable final state is skipped") {
    const fs::path d3 = scratch("pdf_skip");
    const Run p = run({"pdf", "-c", cfg("pdf_example.json"), "-o", d3.string(), "--set",
                       "rates={\"gamma_0\":0,\"gamma_1\":0}", "--set", "priors.p0=1"});
    CHECK(p.code == 0);
    CHECK(fs::exists(d3 / "pmf_final_0.csv"));
    CHECK_FALSE(fs::exists(d3 / "pmf_final_1.csv"));
    CHECK(p.out.find("skipped") != std::string::npos);
  }
}

TEST_CASE("config errors name the field") {
  const Run neg = run({"pdf", "-c", cfg("pdf_example.json"), "--set", "rates.gamma_0=-3"});
  CHECK(neg.code == 2);
  CHECK(neg.err.find("rates.gamma_0") != std::string::npos);
  const Run unknown = run({"pdf", "-c", cfg("pdf_example.json"), "--set", "emission.lambda_2=3"});
  CHECK(unknown.code == 2);
  CHECK(unknown.err.find("emission.lambda_2") != std::string::npos);
  const Run nodes = run({"pdf", "-c", cfg("pdf_example.json"), "--set", "window.grid_nodes=100"});
  CHECK(nodes.code == 2);
  CHECK(nodes.err.find("window.grid_nodes") != std::string::npos);
  const Run missing = run({"pdf", "--set", "rates.gamma_0=1"});
  CHECK(missing.code == 2);
  CHECK(run({"pdf", "-c", "/nonexistent/config.json"}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"--help"}).code == 0);
  const Run degenerate = run({"pdf", "-c", cfg("pdf_example.json"), "--set", "rates.gamma_0=0",
                              "--set", "rates.gamma_1=0"});
  CHECK(degenerate.code == 2);
  CHECK(degenerate.err.find("priors") != std::string::npos);
}

TEST_CASE("output directory precedence") {
  const fs::path env_dir = scratch("env");
  const fs::path flag_dir = scratch("flag");
  ::setenv(cli::kOutputDirEnv, env_dir.string().c_str(), 1);
  const std::string inline_cfg = cfg("pdf_example.json");
  // config names output.dir, so strip it to see the environment default
  CHECK(run({"pdf", "-c", inline_cfg, "--set", "output={}"}).code == 0);
  CHECK(fs::exists(env_dir / "pmf_initial_0.csv"));
  CHECK(run({"pdf", "-c", inline_cfg, "-o", flag_dir.string()}).code == 0);
  CHECK(fs::exists(flag_dir / "pmf_initial_0.csv"));
  ::unsetenv(cli::kOutputDirEnv);
}

TEST_CASE("mc") {
  const fs::path a = scratch("mc_a"), b = scratch("mc_b");
  REQUIRE(run({"mc", "-c", cfg("pdf_example.json"), "-o", a.string(), "--compare"}).code == 0);
  REQUIRE(run({"mc", "-c", cfg("pdf_example.json"), "-o", b.string(), "--compare"}).code == 0);
  for (const char* f : {"mc_histograms.csv", "mc_compare.csv"}) CHECK(slurp(a / f) == slurp(b / f));
  const io::CsvTable cmp = table(a / "mc_compare.csv");
  CHECK(cmp.rows.size() == 4);
  for (double tv : column(cmp, "tv_binned")) CHECK(tv < 0.03);
  std::ifstream js(a / "mc_manifest.json");
  const auto j = nlohmann::json::parse(js);
  CHECK(j.at("seed") == 20240611);
  CHECK(j.at("runs") == 10000);
  CHECK(j.contains("wall_time_s"));

  const fs::path c = scratch("mc_c");
  REQUIRE(run({"mc", "-c", cfg("pdf_example.json"), "-o", c.string(), "--seed", "7"}).code == 0);
  CHECK(slurp(a / "mc_histograms.csv") != slurp(c / "mc_histograms.csv"));

  const Run few = run({"mc", "-c", cfg("pdf_example.json"), "-o", c.string(), "--runs", "10"});
  CHECK(few.code == 2);
  CHECK(few.err.find("runs") != std::string::npos);
  // every path ends in |0> when |0> is absorbing and |1> decays fast
  const Run rare = run({"mc", "-c", cfg("pdf_example.json"), "-o", c.string(), "--set",
                        "rates={\"gamma_0\":0,\"gamma_1\":1e6}", "--set", "priors.p0=0.5"});
  CHECK(rare.code == 2);
  CHECK(rare.err.find("final_1") != std::string::npos);
}

TEST_CASE("error-curve") {
  const fs::path dir = scratch("curve");
  REQUIRE(run({"error-curve", "-c", cfg("error_curve_g10.json"), "-o", dir.string()}).code == 0);
  const io::CsvTable t = table(dir / "error_vs_T.csv");
  const auto T = column(t, "T");
  const auto err = column(t, "error_final_weighted");
  const auto best = std::min_element(err.begin(), err.end()) - err.begin();
  CHECK(std::abs(T[best] - 2.5e-3) <= 0.5e-3);

  const auto fin = table(dir / "error_vs_efficiency_final.csv");
  const auto base = table(dir / "error_vs_efficiency_baseline.csv");
  const auto fe = column(fin, "error_rate"), be = column(base, "error_rate");
  REQUIRE(fe.size() == be.size());
  for (std::size_t i = 0; i < fe.size(); ++i) CHECK(fe[i] <= be[i] + 1e-12);

  const fs::path flat = scratch("curve_flat");
  REQUIRE(run({"error-curve", "-c", cfg("error_curve_g10.json"), "-o", flat.string(), "--set",
               "rates.gamma_0=0", "--set", "rates.gamma_1=0"})
              .code == 0);
  const auto e0 = column(table(flat / "error_vs_T.csv"), "error_final_weighted");
  for (std::size_t i = 1; i < e0.size(); ++i) CHECK(e0[i] <= e0[i - 1] + 1e-12);

  CHECK(run({"error-curve", "-c", cfg("error_curve_g10.json"), "--set", "error_curve.T=[]"}).code == 2);
}

TEST_CASE("optimize") {
  const fs::path ro = scratch("opt_readout"), pr = scratch("opt_prep");
  REQUIRE(run({"optimize", "-c", cfg("optimize_electron_readout.json"), "-o", ro.string()}).code == 0);
  REQUIRE(run({"optimize", "-c", cfg("optimize_electron_preparation.json"), "-o", pr.string()}).code == 0);
  std::ifstream a(ro / "optimum.json"), b(pr / "optimum.json");
  const auto ja = nlohmann::json::parse(a), jb = nlohmann::json::parse(b);
  CHECK(ja.at("optimum").at("fidelity").get<double>() >= 0.99);
  CHECK(jb.at("optimum").at("fidelity").get<double>() >= 0.99);
  CHECK(ja.at("optimum").at("index") != jb.at("optimum").at("index"));
  CHECK(jb.at("optimum").at("control").get<double>() < ja.at("optimum").at("control").get<double>());
  for (const char* f : {"plane_fidelity.csv", "plane_threshold_shift.csv", "plane_attempts.csv", "plane_time.csv"}) {
    const io::CsvTable t = table(ro / f);
    CHECK(t.header.size() == 31);
    CHECK(t.rows.size() == 40);
  }

  const Run empty = run({"optimize", "-c", cfg("optimize_electron_readout.json"), "--set", "grids.power=[]"});
  CHECK(empty.code == 2);
  CHECK(empty.err.find("grids.power") != std::string::npos);
  const Run range = run({"optimize", "-c", cfg("optimize_electron_readout.json"), "--set", "grids.power=[9]"});
  CHECK(range.code == 2);
  const Run infeasible = run({"optimize", "-c", cfg("optimize_electron_readout.json"), "--target",
                              "0.999999999999", "--set", "grids.power=[0.125]"});
  CHECK(infeasible.code == 4);

  const fs::path nuc = scratch("opt_nuclear");
  REQUIRE(run({"optimize", "-c", cfg("optimize_nuclear_ssr.json"), "-o", nuc.string()}).code == 0);
  std::ifstream n(nuc / "optimum.json");
  CHECK(nlohmann::json::parse(n).at("optimum").at("fidelity").get<double>() >= 0.99);
}
