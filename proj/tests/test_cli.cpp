#include "qkd/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>
#include <nlohmann/json.hpp>

using namespace qkd;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("qkdlab_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f.good());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

double parse_field(const std::string& report, const std::string& key) {
  std::istringstream in(report);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(key + " = ", 0) == 0) {
      return std::stod(line.substr(key.size() + 3));
    }
  }
  FAIL("field not found: " << key);
  return 0.0;
}

}  // namespace

TEST_CASE("run command: bb84 with depolarizing noise") {
  cli::RunConfig cfg;
  cfg.protocol = "bb84";
  cfg.dim = 4;
  cfg.noise = "depolarizing:0.05";
  cfg.rounds = 100000;
  cfg.seed = 7;
  cfg.out_dir = temp_dir("run_bb84").string();
  std::ostringstream out, err;
  REQUIRE(cli::cmd_run(cfg, out, err) == 0);
  CHECK(err.str().empty());
  // e_b = (d-1)p/d exactly in analytic mode; e_raw fluctuates around it
  CHECK(parse_field(out.str(), "e_b") == doctest::Approx(0.0375).epsilon(1e-9));
  CHECK(parse_field(out.str(), "e_raw") == doctest::Approx(0.0375).epsilon(0.15));
  CHECK(fs::exists(fs::path(cfg.out_dir) / "detection_matrix.csv"));
  CHECK(fs::exists(fs::path(cfg.out_dir) / "transcript.txt"));
  CHECK(fs::exists(fs::path(cfg.out_dir) / "summary.txt"));
}

TEST_CASE("run command: noiseless chau15") {
  cli::RunConfig cfg;
  cfg.protocol = "chau15";
  cfg.dim = 4;
  cfg.noise = "none";
  cfg.rounds = 30000;
  cfg.seed = 3;
  cfg.out_dir = temp_dir("run_chau").string();
  std::ostringstream out, err;
  REQUIRE(cli::cmd_run(cfg, out, err) == 0);
  CHECK(parse_field(out.str(), "e_b") == 0.0);
  CHECK(parse_field(out.str(), "e_d") == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(parse_field(out.str(), "e_raw") == 0.0);
  CHECK(parse_field(out.str(), "sifting_observed") ==
        doctest::Approx(1.0 / 6.0).epsilon(0.12));
}

TEST_CASE("run command is byte-reproducible") {
  for (const std::string protocol : {"bb84", "singapore"}) {
    cli::RunConfig cfg;
    cfg.protocol = protocol;
    cfg.dim = 2;
    cfg.noise = "rotation:0.15";
    cfg.rounds = 2000;
    cfg.shots = 5000;
    cfg.seed = 99;
    cfg.format = "json";
    cfg.out_dir = temp_dir("repro_a_" + protocol).string();
    std::ostringstream out_a, err;
    REQUIRE(cli::cmd_run(cfg, out_a, err) == 0);
    const auto dir_a = cfg.out_dir;
    cfg.out_dir = temp_dir("repro_b_" + protocol).string();
    std::ostringstream out_b;
    REQUIRE(cli::cmd_run(cfg, out_b, err) == 0);
    CHECK(out_a.str() == out_b.str());
    for (const char* name :
         {"detection_matrix.csv", "transcript.txt", "messages.txt", "summary.json"}) {
      CHECK(slurp(fs::path(dir_a) / name) == slurp(fs::path(cfg.out_dir) / name));
    }
  }
}

TEST_CASE("run command honours QKDLAB_OUT for the default output directory") {
  const fs::path dir = temp_dir("env_out");
  setenv("QKDLAB_OUT", dir.string().c_str(), 1);
  cli::RunConfig cfg;
  cfg.protocol = "bb84";
  cfg.dim = 2;
  cfg.rounds = 50;
  std::ostringstream out, err;
  REQUIRE(cli::cmd_run(cfg, out, err) == 0);
  unsetenv("QKDLAB_OUT");
  CHECK(fs::exists(dir / "summary.txt"));
}

TEST_CASE("run command rejects invalid combinations") {
  cli::RunConfig cfg;
  cfg.protocol = "singapore";
  cfg.dim = 4;
  std::ostringstream out, err;
  CHECK(cli::cmd_run(cfg, out, err) != 0);
  CHECK(err.str().find("unsupported combination") != std::string::npos);
  CHECK(out.str().empty());

  cfg.dim = 2;
  cfg.noise = "warp:0.1";
  std::ostringstream out2, err2;
  CHECK(cli::cmd_run(cfg, out2, err2) != 0);
  CHECK(err2.str().find("unknown noise model") != std::string::npos);
}

TEST_CASE("rates command") {
  {
    cli::RatesConfig cfg;
    cfg.table1 = true;
    std::ostringstream out, err;
    REQUIRE(cli::cmd_rates(cfg, out, err) == 0);
    CHECK(out.str().find("0.8901") != std::string::npos);
    CHECK(out.str().find("0.7250") != std::string::npos);
    CHECK(out.str().find("0.0292") != std::string::npos);
  }
  {
    cli::RatesConfig cfg;
    cfg.protocol = "mub";
    cfg.dim = 4;
    cfg.e_b = 0.0387;
    std::ostringstream out, err;
    REQUIRE(cli::cmd_rates(cfg, out, err) == 0);
    CHECK(parse_field(out.str(), "rate") == doctest::Approx(1.5316).epsilon(0.0005));
  }
  {
    cli::RatesConfig cfg;
    cfg.protocol = "bb84";
    cfg.dim = 2;
    cfg.e_b = 0.0;
    std::ostringstream out, err;
    REQUIRE(cli::cmd_rates(cfg, out, err) == 0);
    CHECK(parse_field(out.str(), "rate") == doctest::Approx(1.0));
  }
}

TEST_CASE("rates formats encode the same numbers") {
  cli::RatesConfig cfg;
  cfg.table1 = true;
  cfg.format = "csv";
  std::ostringstream csv_out, err;
  REQUIRE(cli::cmd_rates(cfg, csv_out, err) == 0);
  cfg.format = "json";
  std::ostringstream json_out;
  REQUIRE(cli::cmd_rates(cfg, json_out, err) == 0);

  const auto rows = nlohmann::json::parse(json_out.str());
  std::istringstream csv(csv_out.str());
  std::string line;
  std::getline(csv, line);  // header
  std::size_t idx = 0;
  while (std::getline(csv, line)) {
    REQUIRE(idx < rows.size());
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    CHECK(cell == rows[idx]["protocol"].get<std::string>());
    std::getline(ss, cell, ',');
    std::getline(ss, cell, ',');  // eb_max
    CHECK(std::stod(cell) == rows[idx]["eb_max"].get<double>());
    std::getline(ss, cell, ',');  // eb
    CHECK(std::stod(cell) == rows[idx]["eb"].get<double>());
    std::getline(ss, cell, ',');  // rate0
    std::getline(ss, cell, ',');  // rate
    CHECK(std::stod(cell) == rows[idx]["rate"].get<double>());
    ++idx;
  }
  CHECK(idx == rows.size());
}

TEST_CASE("thresholds command") {
  std::ostringstream out, err;
  REQUIRE(cli::cmd_thresholds("text", out, err) == 0);
  CHECK(out.str().find("11.00%") != std::string::npos);
  CHECK(out.str().find("18.93%") != std::string::npos);
  CHECK(out.str().find("23.17%") != std::string::npos);
  CHECK(out.str().find("38.93%*") != std::string::npos);
  CHECK(out.str().find("50.00%*") != std::string::npos);
}

TEST_CASE("tomography command: synthetic channels") {
  {
    cli::TomographyConfig cfg;
    cfg.synthetic = "identity";
    cfg.method = "mub";
    cfg.out_dir = temp_dir("tomo_ident").string();
    std::ostringstream out, err;
    REQUIRE(cli::cmd_tomography(cfg, out, err) == 0);
    CHECK(parse_field(out.str(), "fidelity_vs_identity") == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(fs::exists(fs::path(cfg.out_dir) / "chi.csv"));
  }
  {
    cli::TomographyConfig cfg;
    cfg.synthetic = "depolarizing:0.1";
    cfg.method = "sic";
    cfg.out_dir = temp_dir("tomo_depol").string();
    std::ostringstream out, err;
    REQUIRE(cli::cmd_tomography(cfg, out, err) == 0);
    CHECK(parse_field(out.str(), "fidelity_vs_identity") ==
          doctest::Approx(0.925).epsilon(1e-3));
    CHECK(parse_field(out.str(), "reconstruction_fidelity") ==
          doctest::Approx(1.0).epsilon(1e-4));
  }
}

TEST_CASE("tomography command: mutual information report") {
  cli::TomographyConfig cfg;
  cfg.input = std::string(QKDLAB_SOURCE_DIR) + "/data/singapore_pexp_d2.csv";
  cfg.mi = true;
  std::ostringstream out, err;
  REQUIRE(cli::cmd_tomography(cfg, out, err) == 0);
  CHECK(parse_field(out.str(), "mi_anticorrelated") ==
        doctest::Approx(0.408).epsilon(0.001 / 0.408));
  CHECK(parse_field(out.str(), "mi") == doctest::Approx(0.3886).epsilon(0.001));
  CHECK(parse_field(out.str(), "epsilon") == doctest::Approx(0.0137).epsilon(0.002));
  CHECK(parse_field(out.str(), "mi_twirled") == doctest::Approx(0.388).epsilon(0.002));
  CHECK(parse_field(out.str(), "rate") == doctest::Approx(0.374).epsilon(0.002));
}

TEST_CASE("tomography command: loaded detection matrix") {
  // write a synthetic matrix, reload it through the CSV path
  const auto dir = temp_dir("tomo_loaded");
  {
    cli::RunConfig cfg;
    cfg.protocol = "mub";
    cfg.dim = 2;
    cfg.noise = "depolarizing:0.2";
    cfg.rounds = 10;
    cfg.out_dir = dir.string();
    std::ostringstream out, err;
    REQUIRE(cli::cmd_run(cfg, out, err) == 0);
  }
  cli::TomographyConfig cfg;
  cfg.input = (dir / "detection_matrix.csv").string();
  cfg.method = "mub";
  cfg.out_dir = dir.string();
  std::ostringstream out, err;
  REQUIRE(cli::cmd_tomography(cfg, out, err) == 0);
  CHECK(parse_field(out.str(), "fidelity_vs_identity") == doctest::Approx(0.85).epsilon(1e-3));
}

TEST_CASE("tomography command rejects incomplete input") {
  cli::TomographyConfig cfg;
  cfg.mi = true;
  std::ostringstream out, err;
  CHECK(cli::cmd_tomography(cfg, out, err) != 0);
  CHECK(err.str().find("--input") != std::string::npos);
}
