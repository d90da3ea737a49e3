#include <doctest.h>

#include <cmath>

#include "maxgrid/pickands.hpp"
#include "maxgrid/stats.hpp"

using namespace maxgrid;

TEST_CASE("drifted field sample anchors at zero and subtracts the drift exactly") {
  const SimulationMesh mesh{0.05, 41};
  const auto field = drifted_field_sample(1.5, mesh, 99);
  CHECK(field[0] == 0.0);
  // rebuild from the identical fBm path
  auto engine = make_fbm_engine(0.75, mesh);
  std::vector<double> b(mesh.n_points);
  engine->generate(99, b);
  for (std::size_t k = 0; k < mesh.n_points; ++k) {
    const double expected = std::sqrt(2.0) * b[k] - std::pow(0.05 * k, 1.5);
    CHECK(field[k] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("field maxima support structure") {
  SUBCASE("lambda = 0 leaves only t = 0") {
    const auto b = field_maxima(1.0, 0.0, 0.25, true, std::vector<double>{0.5}, 20, 1);
    for (std::size_t r = 0; r < b.reps; ++r) {
      CHECK(b.at(r, 0) == 0.0);
      CHECK(b.at(r, 1) == 0.0);
    }
  }
  SUBCASE("grid coarser than lambda keeps only the origin") {
    const auto b = field_maxima(1.0, 4.0, 0.25, false, std::vector<double>{8.0}, 50, 2);
    for (std::size_t r = 0; r < b.reps; ++r) CHECK(b.at(r, 0) == 0.0);
  }
  SUBCASE("every maximum is nonnegative and grids are dominated") {
    const auto b = field_maxima(1.0, 8.0, 0.125, true, std::vector<double>{0.5, 1.0}, 400, 3);
    for (std::size_t r = 0; r < b.reps; ++r) {
      CHECK(b.at(r, 0) >= 0.0);
      CHECK(b.at(r, 1) <= b.at(r, 0));   // D = 0.5
      CHECK(b.at(r, 2) <= b.at(r, 1));   // D = 1.0 grid nests in D = 0.5
      CHECK(b.at_half(r, 0) <= b.at(r, 0));
    }
  }
  SUBCASE("off-mesh grid spacing is rejected") {
    CHECK_THROWS_AS(field_maxima(1.0, 4.0, 0.3, false, std::vector<double>{1.0}, 2, 1),
                    Error);
  }
}

TEST_CASE("H_alpha estimator sanity") {
  SUBCASE("alpha = 2 at lambda = 1 against the exact finite-lambda value") {
    // E exp(max) = lambda / sqrt(pi) + 1 exactly for the degenerate line field
    const auto e = estimate_H_alpha(2.0, 1.0, 0.001, 100000, 17);
    CHECK(std::abs(e.value - (1.0 / std::sqrt(M_PI) + 1.0)) < 4.0 * e.stderr_);
  }
  SUBCASE("single replication reports zero stderr, flagged") {
    const auto e = estimate_H_alpha(1.0, 2.0, 0.05, 1, 3);
    CHECK(e.stderr_ == 0.0);
    CHECK(e.low_confidence);
    CHECK(std::isfinite(e.value));
  }
}

TEST_CASE("H_D estimator against an independent dense-MC oracle (alpha = 1, D = 1)") {
  // estimator at mesh = D; oracle on halved mesh with 10x replications
  const auto est = estimate_H_D(1.0, 1.0, 8.0, 20000, 101, 1, 1.0);
  const auto oracle = estimate_H_D(1.0, 1.0, 8.0, 200000, 202, 1, 0.5);
  CHECK(std::abs(est.value - oracle.value) <
        3.0 * std::sqrt(est.stderr_ * est.stderr_ + oracle.stderr_ * oracle.stderr_));
}

TEST_CASE("grid-constant monotonicity under common random numbers") {
  ConstantBatch batch(1.0, 8.0, 0.125, true, {0.5, 1.0}, 3000, 5);
  CHECK(batch.h_d(1.0).value <= batch.h_d(0.5).value);
  CHECK(batch.h_d(0.5).value <= batch.h_alpha().value);
}

TEST_CASE("saturation and translation identities are exact per batch") {
  ConstantBatch batch(1.0, 8.0, 0.25, true, {0.5, 1.0}, 2000, 7);
  const auto& b = batch.batch();
  double max_mc = 0.0, max_md = 0.0;
  for (std::size_t r = 0; r < b.reps; ++r) {
    max_mc = std::max(max_mc, b.at(r, 0));
    max_md = std::max(max_md, b.at(r, b.grid_index(0.5)));
  }

  SUBCASE("x = y = w collapses onto the grid maximum") {
    const double w = 0.7;
    CHECK(batch.h_xy(0.5, w, w).value ==
          doctest::Approx(std::exp(-w) * batch.h_d(0.5).value).epsilon(1e-12));
  }
  SUBCASE("x saturated: H^{x,y} -> e^{-y} H_D") {
    const double x = -(max_mc + 40.0), y = 0.3;
    CHECK(batch.h_xy(0.5, x, y).value ==
          doctest::Approx(std::exp(-y) * batch.h_d(0.5).value).epsilon(1e-12));
  }
  SUBCASE("y saturated: H^{x,y} -> e^{-x} H_alpha") {
    const double y = -(max_md + 40.0), x = -0.4;
    CHECK(batch.h_xy(0.5, x, y).value ==
          doctest::Approx(std::exp(-x) * batch.h_alpha().value).epsilon(1e-12));
  }
  SUBCASE("translation multiplies by e^{-c}") {
    for (double c : {-1.0, std::log(2.0), 2.0}) {
      CHECK(batch.h_xy(0.5, 0.2 + c, -0.1 + c).value ==
            doctest::Approx(std::exp(-c) * batch.h_xy(0.5, 0.2, -0.1).value).epsilon(1e-12));
      CHECK(batch.h_z1z2(0.5, 1.0, 0.1 + c, 0.4 + c).value ==
            doctest::Approx(std::exp(-c) * batch.h_z1z2(0.5, 1.0, 0.1, 0.4).value)
                .epsilon(1e-12));
    }
  }
  SUBCASE("two-grid saturation reduces to the single-grid constant") {
    const double z1 = -(max_md + 80.0);
    CHECK(batch.h_z1z2(0.5, 1.0, z1, 0.2).value ==
          doctest::Approx(std::exp(-0.2) * batch.h_d(1.0).value).epsilon(1e-12));
  }
  SUBCASE("three-argument saturations match the remark limits") {
    const double sat = -(max_mc + 80.0);
    CHECK(batch.h_x_z1z2(0.5, 1.0, sat, 0.1, 0.2).value ==
          doctest::Approx(batch.h_z1z2(0.5, 1.0, 0.1, 0.2).value).epsilon(1e-12));
    CHECK(batch.h_x_z1z2(0.5, 1.0, 0.15, sat, sat).value ==
          doctest::Approx(std::exp(-0.15) * batch.h_alpha().value).epsilon(1e-12));
  }
  SUBCASE("nested support with common offset") {
    const double w = 0.25;
    CHECK(batch.h_z1z2(0.5, 1.0, w, w).value ==
          doctest::Approx(std::exp(-w) * batch.h_d(1.0).value).epsilon(1e-12));
  }
  SUBCASE("monotone in each offset") {
    CHECK(batch.h_xy(0.5, 0.0, 0.0).value >= batch.h_xy(0.5, 0.5, 0.0).value);
    CHECK(batch.h_xy(0.5, 0.0, 0.0).value >= batch.h_xy(0.5, 0.0, 0.5).value);
    CHECK(batch.h_x_z1z2(0.5, 1.0, 0.0, 0.0, 0.0).value >=
          batch.h_x_z1z2(0.5, 1.0, 0.0, 0.0, 0.7).value);
  }
  SUBCASE("positivity for finite offsets") {
    CHECK(batch.h_z1z2(0.5, 1.0, 3.0, -2.0).value > 0.0);
    CHECK(batch.h_x_z1z2(0.5, 1.0, 1.0, 2.0, 3.0).value > 0.0);
  }
}

TEST_CASE("equal spacings are rejected") {
  CHECK_THROWS_AS(estimate_H_D1D2(1.0, 0.5, 0.5, 0.0, 0.0, 8.0, 0.25, 10, 1), Error);
}

TEST_CASE("anchored grid constant matches the alpha = 2 closed form") {
  for (double d : {0.25, 0.5, 1.0}) {
    const auto a = anchored_grid_constant(2.0, d, 6.0, 200000, 7);
    CHECK(a.anchored);
    CHECK(std::abs(a.value - h_d2_closed_form(d)) < 0.035 * h_d2_closed_form(d));
  }
}

TEST_CASE("tail probability check behaviour") {
  SUBCASE("monotone in the level and saturation in x") {
    TailCheckOptions opts;
    opts.const_reps = 50000;
    opts.const_lambda = 8.0;
    const auto lo = tail_prob_check(1.0, 1.0, 0.5, 0.0, 2.0, 2.9, 20000, 31, opts);
    const auto hi = tail_prob_check(1.0, 1.0, 0.5, 0.0, 2.0, 3.2, 20000, 31, opts);
    CHECK(hi.empirical < lo.empirical);
    // saturated x removes the second constraint: counts match the single grid
    const auto sat = tail_prob_check(1.0, 1.0, 0.5, -60.0, 2.0, 2.9, 20000, 31, opts);
    CHECK(sat.events >= lo.events);
  }
  SUBCASE("insufficient exceedances throw") {
    TailCheckOptions opts;
    opts.const_reps = 20000;
    opts.const_lambda = 8.0;
    CHECK_THROWS_AS(tail_prob_check(1.0, 1.0, 0.5, 0.0, 2.0, 2.9, 500, 1, opts), Error);
  }
}

TEST_CASE("constants CSV schema") {
  const auto e = estimate_H_alpha(1.0, 2.0, 0.1, 50, 1);
  const std::string csv = constants_csv(std::vector<ConstantEstimate>{e});
  CHECK(csv.rfind("kind,alpha,D1,D2,x,z1,z2,lambda,mesh,reps,value,stderr\n", 0) == 0);
  CHECK(csv.find("H_alpha,1,") != std::string::npos);
}
