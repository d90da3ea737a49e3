#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#ifndef MAXGRID_CLI_PATH
#define MAXGRID_CLI_PATH "./maxgrid"
#endif

namespace {

int run_cli(const std::string& args, const std::string& stdout_file = "/dev/null") {
  const std::string cmd =
      std::string(MAXGRID_CLI_PATH) + " " + args + " > " + stdout_file + " 2> cli_err.txt";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  out << body;
}

const char* kSmallConfig = R"({
  "schema_version": 1,
  "process": {"components": [{"alpha": 1.0, "c": 1.0, "r": 0.0}]},
  "grids": [{"form": "constant", "param": 1.0}, {"form": "powerlog", "param": 2.0}],
  "case": {"tag": "T21_iv"},
  "estimation": {"lambda": 6.0, "reps": 20000},
  "experiment": {"ln_t_values": [3.0], "reps": 400, "seed": 11, "mesh_epsilon": 0.2},
  "output": {"dir": "cli_out", "formats": ["json", "csv"]}
})";

}  // namespace

TEST_CASE("constants subcommand emits a CSV table") {
  CHECK(run_cli("constants --kind H --alpha 2 --lambda 1 --mesh 0.002 --reps 20000 --seed 7",
                "cli_constants.csv") == 0);
  const std::string csv = slurp("cli_constants.csv");
  CHECK(csv.rfind("kind,alpha,", 0) == 0);
  CHECK(csv.find("H_alpha,2,") != std::string::npos);

  SUBCASE("identical flag sets give identical bytes") {
    CHECK(run_cli("constants --kind H --alpha 2 --lambda 1 --mesh 0.002 --reps 20000 --seed 7",
                  "cli_constants2.csv") == 0);
    CHECK(slurp("cli_constants.csv") == slurp("cli_constants2.csv"));
    std::remove("cli_constants2.csv");
  }
  std::remove("cli_constants.csv");
}

TEST_CASE("missing required flag exits 2 with usage text") {
  CHECK(run_cli("constants --kind H") == 2);
}

TEST_CASE("unknown subcommand exits 2") { CHECK(run_cli("frobnicate") == 2); }

TEST_CASE("verify dry run and config mismatch") {
  write_file("cli_cfg.json", kSmallConfig);
  CHECK(run_cli("verify cli_cfg.json --dry-run") == 0);

  std::string bad(kSmallConfig);
  bad.replace(bad.find("T21_iv"), 6, "T22_i");
  write_file("cli_bad.json", bad);
  CHECK(run_cli("verify cli_bad.json") == 2);
  const std::string err = slurp("cli_err.txt");
  CHECK(err.find("ConfigMismatch") != std::string::npos);
  std::remove("cli_bad.json");
}

TEST_CASE("verify writes reports; sweep and plot consume them") {
  write_file("cli_cfg.json", kSmallConfig);
  const int rc = run_cli("verify cli_cfg.json", "cli_verify.txt");
  CHECK(rc == 0);
  const std::string out = slurp("cli_verify.txt");
  CHECK(out.find("T=") != std::string::npos);
  CHECK(out.find("sup_dist=") != std::string::npos);
  CHECK(out.find("reps=400") != std::string::npos);

  SUBCASE("byte-identical reports across worker counts") {
    CHECK(run_cli("--workers 1 verify cli_cfg.json --out cli_w1") == 0);
    CHECK(run_cli("--workers 4 verify cli_cfg.json --out cli_w4") == 0);
    CHECK(slurp("cli_w1/report.json") == slurp("cli_w4/report.json"));
    CHECK(slurp("cli_w1/report.csv") == slurp("cli_w4/report.csv"));
  }
  SUBCASE("plot emits nonempty deterministic SVG files") {
    CHECK(run_cli("plot cli_out/report.json --out cli_plots") == 0);
    const std::string svg = slurp("cli_plots/distance_vs_lnT.svg");
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.size() > 100);
    CHECK(run_cli("plot cli_out/report.json --out cli_plots2") == 0);
    CHECK(slurp("cli_plots2/distance_vs_lnT.svg") == svg);
  }
  SUBCASE("report summarizes a stored report") {
    CHECK(run_cli("report cli_out/report.json", "cli_rep.txt") == 0);
    CHECK(slurp("cli_rep.txt").find("sup_dist=") != std::string::npos);
    std::remove("cli_rep.txt");
  }
  SUBCASE("malformed report exits 2") {
    write_file("cli_broken.json", "{not json");
    CHECK(run_cli("plot cli_broken.json --out cli_plots3") == 2);
    std::remove("cli_broken.json");
  }
}
