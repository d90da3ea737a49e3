#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "maxgrid/config_io.hpp"
#include "maxgrid/harness.hpp"

using namespace maxgrid;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig config;
  config.process.components = {CorrelationModel{1.0, 1.0, 0.0}};
  config.process.cross = {0.0};
  config.process.horizon_T = std::exp(3.0);
  config.grid1 = {GridSpec::Form::ConstantSpacing, 1.0};
  config.grid2 = {GridSpec::Form::PowerLogSpacing, 2.0};
  config.theorem_case.tag = TheoremCase::Tag::T21_iv;
  config.t_values = {std::exp(3.0)};
  config.reps = 600;
  config.seed = 314;
  config.mesh_epsilon = 0.2;
  config.const_reps = 20000;
  config.const_lambda = 6.0;
  config.workers = 1;
  return config;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("run_experiment produces a coherent report") {
  const auto config = small_config();
  const auto report = run_experiment(config);
  REQUIRE(report.per_t.size() == 1);
  const auto& hc = report.per_t.front();
  CHECK(hc.resolution.a == doctest::Approx(std::sqrt(6.0)));
  CHECK(hc.resolution.g1.kind == SupportKind::Sparse);
  CHECK(hc.resolution.g2.kind == SupportKind::Dense);
  CHECK(hc.points.size() == 125);
  CHECK(hc.sup_distance >= 0.0);
  CHECK(hc.sup_distance < 0.5);
  for (const auto& rp : hc.points) {
    CHECK(rp.empirical >= 0.0);
    CHECK(rp.empirical <= 1.0);
    CHECK(rp.theoretical >= 0.0);
    CHECK(rp.theoretical <= 1.0);
  }
  // empirical CDF is monotone along the x axis holding the rest fixed
  for (std::size_t i = 0; i + 25 < hc.points.size(); i += 25)
    CHECK(hc.points[i].empirical <= hc.points[i + 25].empirical + 1e-12);
}

TEST_CASE("experiment reports are deterministic and worker-independent") {
  auto config = small_config();
  const auto r1 = run_experiment(config);
  const auto r2 = run_experiment(config);
  CHECK(report_json(r1) == report_json(r2));
  config.workers = 4;
  const auto r4 = run_experiment(config);
  CHECK(report_json(r1) == report_json(r4));
}

TEST_CASE("grid kinds must match the theorem case") {
  auto config = small_config();
  config.theorem_case.tag = TheoremCase::Tag::T22_i;  // wants two Pickands grids
  CHECK_THROWS_AS(run_experiment(config), Error);
}

TEST_CASE("convergence sweep needs a ladder") {
  auto config = small_config();
  CHECK_THROWS_AS(convergence_sweep(config), Error);
}

TEST_CASE("independence check") {
  SUBCASE("comonotone pair flags strong dependence") {
    auto config = small_config();
    // Pickands grid engineered to coincide with the sparse grid: D = (2 ln T)^{1/alpha}
    config.grid2 = {GridSpec::Form::PickandsSpacing, std::sqrt(6.0) * std::sqrt(6.0)};
    config.theorem_case.tag = TheoremCase::Tag::T21_iii;
    config.reps = 8000;
    // centered lattice: fine enough that both marginals hit the 0.5 quantile
    config.lattice_axis = {-0.5, -0.25, 0.0, 0.25, 0.5, 0.75, 1.0};
    const auto res = independence_check(config);
    CHECK(res.gap > 0.2);
  }
  SUBCASE("empty lattice gives zero gap") {
    auto config = small_config();
    config.grid2 = {GridSpec::Form::PickandsSpacing, 1.0};
    config.theorem_case.tag = TheoremCase::Tag::T21_iii;
    config.lattice_axis.clear();
    config.reps = 50;
    CHECK(independence_check(config).gap == 0.0);
  }
  SUBCASE("strong dependence is rejected") {
    auto config = small_config();
    config.process.components[0].r_long = 1.0;
    config.process.cross = {1.0};
    config.grid2 = {GridSpec::Form::PickandsSpacing, 1.0};
    config.theorem_case.tag = TheoremCase::Tag::T21_iii;
    CHECK_THROWS_AS(independence_check(config), Error);
  }
}

TEST_CASE("non-uniform tail check") {
  const CorrelationModel model{1.0, 1.0, 0.0};
  SUBCASE("a single far point reduces to the plain Gaussian tail") {
    const std::vector<double> pts{0.0};
    const auto res = tail_check_lemma_a5(model, pts, 2.7, 1.0, 200000, 2024, 1);
    CHECK(res.n_points == 1);
    CHECK(std::abs(res.ratio - 1.0) < 0.13);
  }
  SUBCASE("levels outside the meaningful window are rejected") {
    const std::vector<double> pts{0.0, 1.0, 2.5};
    CHECK_THROWS_AS(tail_check_lemma_a5(model, pts, 0.5, 3.0, 1000, 1), Error);
  }
  SUBCASE("too few exceedance events throw") {
    const std::vector<double> pts{0.0};
    CHECK_THROWS_AS(tail_check_lemma_a5(model, pts, 2.7, 1.0, 2000, 1), Error);
  }
}

TEST_CASE("report export and import") {
  const auto report = run_experiment(small_config());
  const std::string json_path = "test_report.json";
  const std::string csv_path = "test_report.csv";
  export_report(report, ReportFormat::Json, json_path);
  export_report(report, ReportFormat::Csv, csv_path);

  SUBCASE("round trip preserves the report") {
    const auto back = import_report_json(json_path);
    CHECK(report_json(back) == report_json(report));
  }
  SUBCASE("re-export is byte identical") {
    export_report(report, ReportFormat::Json, "test_report2.json");
    CHECK(slurp(json_path) == slurp("test_report2.json"));
    std::remove("test_report2.json");
  }
  SUBCASE("csv carries the documented schema") {
    const std::string csv = slurp(csv_path);
    CHECK(csv.rfind("T,point_index,x1,y1_1,y2_1,empirical,theoretical,stderr,sup_distance",
                    0) == 0);
  }
  std::remove(json_path.c_str());
  std::remove(csv_path.c_str());
}

TEST_CASE("strict config parsing") {
  const std::string good = R"({
    "schema_version": 1,
    "process": {"components": [{"alpha": 1.0, "c": 1.0, "r": 0.0}]},
    "grids": [{"form": "constant", "param": 1.0}, {"form": "powerlog", "param": 2.0}],
    "case": {"tag": "T21_iv"},
    "experiment": {"ln_t_values": [3.0], "reps": 100, "seed": 5}
  })";
  const auto rc = parse_run_config(good);
  CHECK(rc.experiment.t_values.front() == doctest::Approx(std::exp(3.0)));
  CHECK(rc.experiment.reps == 100);

  SUBCASE("unknown keys are rejected") {
    std::string bad = good;
    bad.insert(bad.rfind('}'), R"(, "extra": 1)");
    CHECK_THROWS_AS(parse_run_config(bad), Error);
  }
  SUBCASE("unsupported schema version is rejected") {
    std::string bad = good;
    bad.replace(bad.find("\"schema_version\": 1"), 19, "\"schema_version\": 9");
    CHECK_THROWS_AS(parse_run_config(bad), Error);
  }
  SUBCASE("both T forms at once are rejected") {
    std::string bad = good;
    bad.replace(bad.find("\"ln_t_values\": [3.0]"), 20,
                "\"ln_t_values\": [3.0], \"t_values\": [20.0]");
    CHECK_THROWS_AS(parse_run_config(bad), Error);
  }
}
