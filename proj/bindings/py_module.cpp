#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "maxgrid/config_io.hpp"
#include "maxgrid/gp_sim.hpp"
#include "maxgrid/harness.hpp"
#include "maxgrid/limit_laws.hpp"
#include "maxgrid/pickands.hpp"

namespace py = pybind11;
using namespace maxgrid;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
  return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

py::dict estimate_dict(const ConstantEstimate& e) {
  py::dict d;
  d["kind"] = e.kind;
  d["alpha"] = e.alpha;
  d["d1"] = e.d1;
  d["d2"] = e.d2;
  d["x"] = e.x;
  d["z1"] = e.z1;
  d["z2"] = e.z2;
  d["lambda"] = e.lambda;
  d["mesh"] = e.mesh;
  d["reps"] = e.reps;
  d["value"] = e.value;
  d["stderr"] = e.stderr_;
  d["value_half"] = e.value_half;
  d["value_extrapolated"] = e.value_extrapolated;
  d["low_confidence"] = e.low_confidence;
  return d;
}

PathEngineKind engine_from(const std::string& name) {
  if (name == "auto") return PathEngineKind::Auto;
  if (name == "circulant") return PathEngineKind::Circulant;
  if (name == "recursive") return PathEngineKind::Recursive;
  throw Error(ErrorKind::Usage, "unknown engine '" + name + "'");
}

GridSpec grid_from(const std::string& form, double param) {
  GridSpec g;
  if (form == "constant")
    g.form = GridSpec::Form::ConstantSpacing;
  else if (form == "pickands")
    g.form = GridSpec::Form::PickandsSpacing;
  else if (form == "powerlog")
    g.form = GridSpec::Form::PowerLogSpacing;
  else
    throw Error(ErrorKind::Usage, "unknown grid form '" + form + "'");
  g.param = param;
  return g;
}

py::array_t<double> batch_to_array(const PathBatch& batch) {
  py::array_t<double> out({batch.reps, batch.p, batch.mesh.n_points});
  std::memcpy(out.mutable_data(), batch.values.data(), batch.values.size() * sizeof(double));
  if (batch.p == 1) return out.reshape({batch.reps, batch.mesh.n_points});
  return out;
}

}  // namespace

PYBIND11_MODULE(maxgrid, m) {
  m.doc() = "max-discretisation simulation laboratory for stationary Gaussian processes";

  py::register_exception<Error>(m, "MaxgridError");

  m.def(
      "covariance_sequence",
      [](double alpha, double c, double h, std::size_t n) {
        return to_array(covariance_sequence({alpha, c, 0.0}, {h, n}));
      },
      py::arg("alpha"), py::arg("c"), py::arg("h"), py::arg("n"),
      "lag covariances exp(-C (k h)^alpha) for k = 0..n-1");

  m.def(
      "circulant_embed",
      [](const std::vector<double>& cov) { return to_array(circulant_embed(cov)); },
      py::arg("cov"), "eigenvalues of the minimal circulant extension");

  m.def(
      "sample_scalar_paths",
      [](double alpha, double c, double h, std::size_t n, std::size_t reps,
         std::uint64_t seed, const std::string& engine, unsigned workers) {
        return batch_to_array(
            sample_scalar_paths({alpha, c, 0.0}, {h, n}, reps, seed, engine_from(engine),
                                workers));
      },
      py::arg("alpha"), py::arg("c"), py::arg("h"), py::arg("n"), py::arg("reps"),
      py::arg("seed"), py::arg("engine") = "auto", py::arg("workers") = 1);

  m.def(
      "sample_fbm",
      [](double hurst, double h, std::size_t n, std::size_t reps, std::uint64_t seed,
         unsigned workers) {
        return batch_to_array(sample_fbm(hurst, {h, n}, reps, seed, workers));
      },
      py::arg("hurst"), py::arg("h"), py::arg("n"), py::arg("reps"), py::arg("seed"),
      py::arg("workers") = 1);

  m.def(
      "field_maxima",
      [](double alpha, double lambda, double mesh, bool continuous,
         const std::vector<double>& ds, std::size_t reps, std::uint64_t seed,
         unsigned workers) {
        const auto b = field_maxima(alpha, lambda, mesh, continuous, ds, reps, seed, workers);
        py::array_t<double> out({b.reps, b.n_supports()});
        std::memcpy(out.mutable_data(), b.full.data(), b.full.size() * sizeof(double));
        return out;
      },
      py::arg("alpha"), py::arg("lambda_"), py::arg("mesh"), py::arg("continuous") = true,
      py::arg("ds") = std::vector<double>{}, py::arg("reps") = 1000, py::arg("seed") = 1,
      py::arg("workers") = 1,
      "per-replication maxima of the drifted field over mesh and grids");

  py::class_<ConstantBatch>(m, "ConstantBatch",
                            "common-random-number maxima batch for the Pickands-type "
                            "constant estimators")
      .def(py::init([](double alpha, double lambda, double mesh, bool continuous,
                       std::vector<double> ds, std::size_t reps, std::uint64_t seed,
                       unsigned workers) {
             return ConstantBatch(alpha, lambda, mesh, continuous, std::move(ds), reps,
                                  seed, workers);
           }),
           py::arg("alpha"), py::arg("lambda_"), py::arg("mesh"),
           py::arg("continuous") = true, py::arg("ds") = std::vector<double>{},
           py::arg("reps") = 1000, py::arg("seed") = 1, py::arg("workers") = 1)
      .def("h_alpha", [](const ConstantBatch& b) { return estimate_dict(b.h_alpha()); })
      .def("h_d", [](const ConstantBatch& b, double d) { return estimate_dict(b.h_d(d)); })
      .def("h_xy",
           [](const ConstantBatch& b, double d, double x, double y) {
             return estimate_dict(b.h_xy(d, x, y));
           })
      .def("h_z1z2",
           [](const ConstantBatch& b, double d1, double d2, double z1, double z2) {
             return estimate_dict(b.h_z1z2(d1, d2, z1, z2));
           })
      .def("h_x_z1z2", [](const ConstantBatch& b, double d1, double d2, double x, double z1,
                          double z2) { return estimate_dict(b.h_x_z1z2(d1, d2, x, z1, z2)); });

  m.def(
      "estimate_h_alpha",
      [](double alpha, double lambda, double mesh, std::size_t reps, std::uint64_t seed,
         unsigned workers) {
        return estimate_dict(estimate_H_alpha(alpha, lambda, mesh, reps, seed, workers));
      },
      py::arg("alpha"), py::arg("lambda_"), py::arg("mesh"), py::arg("reps"),
      py::arg("seed"), py::arg("workers") = 1);

  m.def(
      "estimate_h_d",
      [](double alpha, double d, double lambda, std::size_t reps, std::uint64_t seed,
         unsigned workers, double mesh) {
        return estimate_dict(estimate_H_D(alpha, d, lambda, reps, seed, workers, mesh));
      },
      py::arg("alpha"), py::arg("d"), py::arg("lambda_"), py::arg("reps"), py::arg("seed"),
      py::arg("workers") = 1, py::arg("mesh") = 0.0);

  m.def(
      "anchored_grid_constant",
      [](double alpha, double d, double lambda, std::size_t reps, std::uint64_t seed,
         unsigned workers) {
        const auto a = anchored_grid_constant(alpha, d, lambda, reps, seed, workers);
        py::dict out;
        out["value"] = a.value;
        out["kappa"] = a.kappa1;
        out["anchored"] = a.anchored;
        out["raw"] = estimate_dict(a.raw);
        return out;
      },
      py::arg("alpha"), py::arg("d"), py::arg("lambda_") = 6.0, py::arg("reps") = 400000,
      py::arg("seed") = 1, py::arg("workers") = 1);

  m.def("known_h_alpha", &known_h_alpha, py::arg("alpha"));
  m.def("h_d2_closed_form", &h_d2_closed_form, py::arg("d"));

  m.def(
      "classify_grid",
      [](const std::string& form, double param, double alpha) {
        const GridKind k = classify_grid(grid_from(form, param), alpha);
        py::tuple out(2);
        switch (k.tag) {
          case GridKind::Tag::Sparse: out[0] = "sparse"; out[1] = py::none(); break;
          case GridKind::Tag::Pickands: out[0] = "pickands"; out[1] = py::cast(k.d); break;
          case GridKind::Tag::Dense: out[0] = "dense"; out[1] = py::none(); break;
        }
        return out;
      },
      py::arg("form"), py::arg("param"), py::arg("alpha") = 1.0);

  m.def(
      "norm_constants",
      [](double t, double alpha, double c, const std::string& kind, double delta,
         double h_constant) {
        SupportKind sk;
        if (kind == "continuous")
          sk = SupportKind::Continuous;
        else if (kind == "sparse")
          sk = SupportKind::Sparse;
        else if (kind == "pickands")
          sk = SupportKind::Pickands;
        else if (kind == "dense")
          sk = SupportKind::Dense;
        else
          throw Error(ErrorKind::Usage, "unknown support kind '" + kind + "'");
        const auto nc = norm_constants(t, alpha, c, sk, delta, h_constant);
        return py::make_tuple(nc.a, nc.b);
      },
      py::arg("t"), py::arg("alpha"), py::arg("c"), py::arg("kind"),
      py::arg("delta") = std::numeric_limits<double>::quiet_NaN(),
      py::arg("h_constant") = std::numeric_limits<double>::quiet_NaN());

  m.def(
      "f_case",
      [](const std::string& tag, double x, double y1, double y2, double theta1,
         double theta2, double d1, double d2, const ConstantBatch* batch) {
        TheoremCase tc;
        tc.tag = case_tag_from_name(tag);
        tc.theta1 = theta1;
        tc.theta2 = theta2;
        tc.d1 = d1;
        tc.d2 = d2;
        if (batch != nullptr) {
          BatchCaseConstants constants(*batch);
          return f_case(tc, &constants, x, y1, y2);
        }
        return f_case(tc, nullptr, x, y1, y2);
      },
      py::arg("tag"), py::arg("x"), py::arg("y1"), py::arg("y2"), py::arg("theta1") = 0.0,
      py::arg("theta2") = 0.0, py::arg("d1") = std::numeric_limits<double>::quiet_NaN(),
      py::arg("d2") = std::numeric_limits<double>::quiet_NaN(),
      py::arg("constants") = static_cast<const ConstantBatch*>(nullptr));

  m.def(
      "eval_g",
      [](const std::vector<double>& r_diag, const std::vector<double>& mixing_cov,
         const std::string& tag, const std::vector<double>& x, const std::vector<double>& y1,
         const std::vector<double>& y2, const std::string& method, unsigned gh_order,
         std::size_t mc_reps, std::uint64_t mc_seed, double theta1, double theta2, double d1,
         double d2, const ConstantBatch* batch) {
        PiterbargParams params;
        params.r_diag = r_diag;
        params.mixing.p = r_diag.size();
        params.mixing.cov = mixing_cov;
        if (params.mixing.cov.empty()) {
          params.mixing.cov.assign(params.p() * params.p(), 0.0);
          for (std::size_t k = 0; k < params.p(); ++k)
            params.mixing.cov[k * params.p() + k] = 1.0;
        }
        TheoremCase tc;
        tc.tag = case_tag_from_name(tag);
        tc.theta1 = theta1;
        tc.theta2 = theta2;
        tc.d1 = d1;
        tc.d2 = d2;
        Integration integ;
        if (method == "auto")
          integ.method = Integration::Method::Auto;
        else if (method == "closed")
          integ.method = Integration::Method::ClosedForm;
        else if (method == "gauss_hermite")
          integ.method = Integration::Method::GaussHermite;
        else if (method == "monte_carlo")
          integ.method = Integration::Method::MonteCarlo;
        else
          throw Error(ErrorKind::Usage, "unknown integration method '" + method + "'");
        integ.gh_order = gh_order;
        integ.mc_reps = mc_reps;
        integ.mc_seed = mc_seed;
        if (batch != nullptr) {
          BatchCaseConstants constants(*batch);
          return eval_G(params, std::span<const TheoremCase>(&tc, 1), &constants, x, y1, y2,
                        integ);
        }
        return eval_G(params, std::span<const TheoremCase>(&tc, 1), nullptr, x, y1, y2,
                      integ);
      },
      py::arg("r_diag"), py::arg("mixing_cov") = std::vector<double>{}, py::arg("tag") = "T21_i",
      py::arg("x") = std::vector<double>{}, py::arg("y1") = std::vector<double>{},
      py::arg("y2") = std::vector<double>{}, py::arg("method") = "auto",
      py::arg("gh_order") = 64, py::arg("mc_reps") = 100000, py::arg("mc_seed") = 1,
      py::arg("theta1") = 0.0, py::arg("theta2") = 0.0,
      py::arg("d1") = std::numeric_limits<double>::quiet_NaN(),
      py::arg("d2") = std::numeric_limits<double>::quiet_NaN(),
      py::arg("constants") = static_cast<const ConstantBatch*>(nullptr));

  m.def(
      "tail_prob_check",
      [](double alpha, double d1, double d2, double x, double s, double u, std::size_t reps,
         std::uint64_t seed, unsigned workers) {
        TailCheckOptions opts;
        opts.workers = workers;
        const auto res = tail_prob_check(alpha, d1, d2, x, s, u, reps, seed, opts);
        py::dict out;
        out["ratio"] = res.ratio;
        out["empirical"] = res.empirical;
        out["predicted"] = res.predicted;
        out["events"] = res.events;
        return out;
      },
      py::arg("alpha"), py::arg("d1"), py::arg("d2"), py::arg("x"), py::arg("s"),
      py::arg("u"), py::arg("reps"), py::arg("seed"), py::arg("workers") = 1);

  m.def(
      "tail_check_lemma_a5",
      [](double alpha, double c, const std::vector<double>& points, double u, double s,
         std::size_t reps, std::uint64_t seed, unsigned workers) {
        const auto res =
            tail_check_lemma_a5({alpha, c, 0.0}, points, u, s, reps, seed, workers);
        py::dict out;
        out["ratio"] = res.ratio;
        out["empirical"] = res.empirical;
        out["predicted"] = res.predicted;
        out["n_points"] = res.n_points;
        out["events"] = res.events;
        return out;
      },
      py::arg("alpha"), py::arg("c"), py::arg("points"), py::arg("u"), py::arg("s"),
      py::arg("reps"), py::arg("seed"), py::arg("workers") = 1);

  m.def(
      "run_experiment_json",
      [](const std::string& config_json) {
        const RunConfigFile rc = parse_run_config(config_json);
        return report_json(run_experiment(rc.experiment));
      },
      py::arg("config_json"),
      "run a verification experiment from a config document; returns the JSON report");

  m.def(
      "independence_check_json",
      [](const std::string& config_json) {
        const RunConfigFile rc = parse_run_config(config_json);
        const auto res = independence_check(rc.experiment);
        py::dict out;
        out["gap"] = res.gap;
        out["T"] = res.T;
        out["reps"] = res.reps;
        return out;
      },
      py::arg("config_json"));
}
