#include "maxgrid/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <set>
#include <sstream>

#include <json.hpp>

#include "maxgrid/parallel.hpp"
#include "maxgrid/stats.hpp"

namespace maxgrid {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

double common_alpha(const VectorProcessSpec& spec) {
  const double alpha = spec.components.front().alpha;
  for (const auto& cm : spec.components)
    if (cm.alpha != alpha)
      throw Error(ErrorKind::ConfigMismatch, "experiment components must share alpha");
  return alpha;
}

double common_c(const VectorProcessSpec& spec) {
  const double c = spec.components.front().c;
  for (const auto& cm : spec.components)
    if (cm.c != c)
      throw Error(ErrorKind::ConfigMismatch, "experiment components must share C");
  return c;
}

void check_case_against_kinds(const TheoremCase& tc, const GridKind& k1, const GridKind& k2) {
  using Tag = TheoremCase::Tag;
  using GT = GridKind::Tag;
  auto want = [&](GT a, GT b) { return k1.tag == a && k2.tag == b; };
  bool ok = false;
  switch (tc.tag) {
    case Tag::T21_i:
    case Tag::T21_ii: ok = want(GT::Sparse, GT::Sparse); break;
    case Tag::T21_iii: ok = want(GT::Sparse, GT::Pickands); break;
    case Tag::T21_iv: ok = want(GT::Sparse, GT::Dense); break;
    case Tag::T22_i: ok = want(GT::Pickands, GT::Pickands) && k1.d != k2.d; break;
    case Tag::T22_ii: ok = want(GT::Pickands, GT::Dense); break;
    case Tag::T22_iii: ok = want(GT::Dense, GT::Dense); break;
  }
  if (!ok)
    throw Error(ErrorKind::ConfigMismatch,
                std::string("grid kinds do not match theorem case ") + case_name(tc.tag));
}

struct ResolvedHorizon {
  HorizonResolution res;
  std::vector<std::size_t> strides;
  TheoremCase tc;  // with d1/d2 filled from the grid resolution
  std::unique_ptr<ConstantBatch> batch;
  std::unique_ptr<BatchCaseConstants> case_constants;
};

// Mesh/grid/location-constant resolution for one horizon. The continuous
// maximum is realized on the mesh; every non-sparse support is normalized with
// the estimated constant at its actual Pickands-scale resolution.
ResolvedHorizon resolve_horizon(const ExperimentConfig& config, double T,
                                std::size_t t_index) {
  const double alpha = common_alpha(config.process);
  const double c = common_c(config.process);
  const std::size_t p = config.process.p();

  ResolvedHorizon rh;
  rh.res.T = T;
  rh.res.a = a_norm(T);

  const double scale = std::pow(2.0 * std::log(T), 1.0 / alpha) * std::pow(c, 1.0 / alpha);
  const double pick_unit = 1.0 / scale;

  const GridKind kind1 = classify_grid(config.grid1, alpha);
  const GridKind kind2 = classify_grid(config.grid2, alpha);
  check_case_against_kinds(config.theorem_case, kind1, kind2);

  const double delta1 = resolved_spacing(config.grid1, T, alpha);
  const double delta2 = resolved_spacing(config.grid2, T, alpha);

  // mesh step: exact divisor of the smaller grid spacing, capped by the policy
  const double h_cap = config.mesh_epsilon * pick_unit;
  const double delta_min = std::min(delta1, delta2);
  const double m_req = std::ceil(delta_min / h_cap - 1e-12);
  const double h = delta_min / std::max(1.0, m_req);
  rh.res.mesh.spacing = h;
  rh.res.mesh.n_points = static_cast<std::size_t>(std::floor(T / h + 1e-12)) + 1;

  auto resolve_grid = [&](const GridSpec&, const GridKind& kind, double delta) {
    SupportResolution sr;
    sr.requested_spacing = delta;
    const double ratio = delta / h;
    const std::size_t stride = static_cast<std::size_t>(std::llround(ratio));
    sr.stride = std::max<std::size_t>(1, stride);
    sr.spacing = static_cast<double>(sr.stride) * h;
    sr.snapped = std::abs(sr.spacing - delta) > 1e-9 * delta;
    sr.d_pickands = sr.spacing * scale;
    switch (kind.tag) {
      case GridKind::Tag::Sparse: sr.kind = SupportKind::Sparse; break;
      case GridKind::Tag::Pickands: sr.kind = SupportKind::Pickands; break;
      case GridKind::Tag::Dense: sr.kind = SupportKind::Dense; break;
    }
    return sr;
  };

  rh.res.cont.kind = SupportKind::Continuous;
  rh.res.cont.spacing = h;
  rh.res.cont.requested_spacing = h;
  rh.res.cont.stride = 1;
  rh.res.cont.d_pickands = h * scale;
  rh.res.g1 = resolve_grid(config.grid1, kind1, delta1);
  rh.res.g2 = resolve_grid(config.grid2, kind2, delta2);
  rh.strides = {rh.res.g1.stride, rh.res.g2.stride};

  // constants needed at the realized resolutions
  std::set<double> ds;
  ds.insert(rh.res.cont.d_pickands);
  for (const SupportResolution* sr : {&rh.res.g1, &rh.res.g2})
    if (sr->kind == SupportKind::Pickands || sr->kind == SupportKind::Dense)
      ds.insert(sr->d_pickands);

  std::vector<double> ds_vec(ds.begin(), ds.end());
  rh.batch = std::make_unique<ConstantBatch>(
      alpha, config.const_lambda, rh.res.cont.d_pickands, /*include_continuous=*/true, ds_vec,
      config.const_reps, child_seed(config.seed, 3000 + t_index),
      config.workers == 0 ? default_workers() : config.workers);
  rh.case_constants =
      std::make_unique<BatchCaseConstants>(*rh.batch, config.const_extrapolated);

  const bool anchor = config.const_anchor && !std::isnan(known_h_alpha(alpha));
  auto h_of = [&](double d) {
    if (auto it = rh.res.constants.find(d); it != rh.res.constants.end()) return it->second;
    double v;
    ConstantEstimate record;
    if (anchor) {
      // short window keeps exp(max) light-tailed; biases cancel in the ratio
      const auto a = anchored_grid_constant(
          alpha, d, 6.0, std::max<std::size_t>(config.const_reps, 800000),
          child_seed(config.seed, 5000 + t_index),
          config.workers == 0 ? default_workers() : config.workers);
      v = a.value;
      record = a.raw;
      record.value = a.value;
    } else {
      record = rh.batch->h_d(d);
      v = config.const_extrapolated ? record.value_extrapolated : record.value;
    }
    if (!(v > 0.0))
      throw Error(ErrorKind::MissingConstant,
                  "estimated constant at D = " + fmt(d) + " is not positive");
    rh.res.constants[d] = v;
    rh.res.constant_records.push_back(record);
    return v;
  };

  auto fill_b = [&](SupportResolution& sr) {
    sr.b.resize(p);
    for (std::size_t k = 0; k < p; ++k) {
      switch (sr.kind) {
        case SupportKind::Sparse:
          sr.b[k] = norm_constants(T, alpha, c, SupportKind::Sparse, sr.spacing).b;
          break;
        case SupportKind::Continuous:
        case SupportKind::Pickands:
        case SupportKind::Dense:
          sr.b[k] = norm_constants(T, alpha, c, sr.kind, sr.spacing, h_of(sr.d_pickands)).b;
          break;
      }
    }
  };
  fill_b(rh.res.cont);
  fill_b(rh.res.g1);
  fill_b(rh.res.g2);

  rh.tc = config.theorem_case;
  auto fill_case_d = [&](double& dst, const SupportResolution& sr) {
    if (sr.kind != SupportKind::Pickands) return;
    if (!std::isnan(dst) && std::abs(dst - sr.d_pickands) > 1e-9 * sr.d_pickands)
      throw Error(ErrorKind::ConfigMismatch,
                  "configured case D does not match the grid resolution");
    dst = sr.d_pickands;
  };
  fill_case_d(rh.tc.d1, rh.res.g1);
  fill_case_d(rh.tc.d2, rh.res.g2);
  return rh;
}

std::vector<LatticePoint> lattice_points_for(const ExperimentConfig& config) {
  if (!config.lattice_points.empty()) return config.lattice_points;
  std::vector<LatticePoint> pts;
  const std::size_t p = config.process.p();
  for (double v : config.lattice_axis)
    for (double w : config.lattice_axis)
      for (double s : config.lattice_axis) {
        LatticePoint pt;
        pt.x.assign(p, v);
        pt.y1.assign(p, w);
        pt.y2.assign(p, s);
        pts.push_back(std::move(pt));
      }
  return pts;
}

json config_to_json(const ExperimentConfig& config) {
  json j;
  j["schema_version"] = 1;
  json comps = json::array();
  for (const auto& cm : config.process.components)
    comps.push_back({{"alpha", cm.alpha}, {"c", cm.c}, {"r", cm.r_long}});
  j["process"]["components"] = comps;
  j["process"]["cross"] = config.process.cross;
  auto grid_json = [](const GridSpec& g) {
    json gj;
    switch (g.form) {
      case GridSpec::Form::ConstantSpacing: gj["form"] = "constant"; break;
      case GridSpec::Form::PickandsSpacing: gj["form"] = "pickands"; break;
      case GridSpec::Form::PowerLogSpacing: gj["form"] = "powerlog"; break;
    }
    gj["param"] = g.param;
    return gj;
  };
  j["grids"] = json::array({grid_json(config.grid1), grid_json(config.grid2)});
  j["case"]["tag"] = case_name(config.theorem_case.tag);
  j["case"]["theta1"] = config.theorem_case.theta1;
  j["case"]["theta2"] = config.theorem_case.theta2;
  j["experiment"]["t_values"] = config.t_values;
  j["experiment"]["reps"] = config.reps;
  j["experiment"]["seed"] = config.seed;
  j["experiment"]["mesh_epsilon"] = config.mesh_epsilon;
  j["experiment"]["lattice_axis"] = config.lattice_axis;
  j["estimation"]["lambda"] = config.const_lambda;
  j["estimation"]["reps"] = config.const_reps;
  j["estimation"]["extrapolate"] = config.const_extrapolated;
  j["estimation"]["anchor"] = config.const_anchor;
  return j;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (t_values.empty()) throw Error(ErrorKind::Usage, "need at least one horizon T");
  VectorProcessSpec proc = process;
  if (!(proc.horizon_T > 0.0)) proc.horizon_T = t_values.back();
  proc.validate();
  grid1.validate();
  grid2.validate();
  for (double t : t_values)
    if (!(t > 1.0)) throw Error(ErrorKind::Usage, "every horizon must exceed 1");
  if (reps == 0) throw Error(ErrorKind::Usage, "reps must be positive");
  if (!(mesh_epsilon > 0.0)) throw Error(ErrorKind::Usage, "mesh_epsilon must be > 0");
}

ComparisonReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  const std::size_t p = config.process.p();
  const unsigned workers = config.workers == 0 ? default_workers() : config.workers;
  const auto lattice = lattice_points_for(config);

  ComparisonReport report;
  report.config_json = config_to_json(config).dump();
  {
    std::ostringstream hex;
    hex << std::hex << fnv1a64(report.config_json);
    report.config_hash = hex.str();
  }
  report.seed = config.seed;
  report.reps = config.reps;

  PiterbargParams params;
  params.r_diag.resize(p);
  for (std::size_t k = 0; k < p; ++k) params.r_diag[k] = config.process.r(k, k);
  params.mixing = config.process.mixing();

  for (std::size_t ti = 0; ti < config.t_values.size(); ++ti) {
    const double T = config.t_values[ti];
    ResolvedHorizon rh = resolve_horizon(config, T, ti);

    VectorProcessSpec spec_t = config.process;
    spec_t.horizon_T = T;
    const MaximaBatch maxima =
        joint_maxima(spec_t, rh.res.mesh, rh.strides, config.reps,
                     child_seed(config.seed, 1000 + ti), config.engine, workers);

    // normalized maxima per replication and component
    const double a = rh.res.a;
    std::vector<double> xn(config.reps * p), y1n(config.reps * p), y2n(config.reps * p);
    for (std::size_t r = 0; r < config.reps; ++r)
      for (std::size_t k = 0; k < p; ++k) {
        xn[r * p + k] = a * (maxima.at(r, k, 0) - rh.res.cont.b[k]);
        y1n[r * p + k] = a * (maxima.at(r, k, 1) - rh.res.g1.b[k]);
        y2n[r * p + k] = a * (maxima.at(r, k, 2) - rh.res.g2.b[k]);
      }

    HorizonComparison hc;
    hc.resolution = rh.res;
    hc.resolved_case = rh.tc;
    const Integration integ{Integration::Method::Auto, 64, 200000,
                            child_seed(config.seed, 4000 + ti)};
    for (const auto& pt : lattice) {
      std::size_t count = 0;
      for (std::size_t r = 0; r < config.reps; ++r) {
        bool ok = true;
        for (std::size_t k = 0; k < p && ok; ++k)
          ok = xn[r * p + k] <= pt.x[k] && y1n[r * p + k] <= pt.y1[k] &&
               y2n[r * p + k] <= pt.y2[k];
        count += ok ? 1 : 0;
      }
      ReportPoint rp;
      rp.pt = pt;
      rp.empirical = static_cast<double>(count) / static_cast<double>(config.reps);
      rp.theoretical = eval_G(params, std::span<const TheoremCase>(&rh.tc, 1),
                              rh.case_constants.get(), pt.x, pt.y1, pt.y2, integ);
      rp.binom_stderr = std::sqrt(rp.empirical * (1.0 - rp.empirical) /
                                  static_cast<double>(config.reps));
      hc.sup_distance = std::max(hc.sup_distance, std::abs(rp.empirical - rp.theoretical));
      hc.points.push_back(std::move(rp));
    }
    report.per_t.push_back(std::move(hc));
  }
  return report;
}

std::vector<double> convergence_sweep(const ExperimentConfig& config) {
  if (config.t_values.size() < 3)
    throw Error(ErrorKind::Usage, "convergence sweep needs at least 3 horizons");
  const ComparisonReport report = run_experiment(config);
  std::vector<double> out;
  for (const auto& hc : report.per_t) out.push_back(hc.sup_distance);
  return out;
}

IndependenceResult independence_check(const ExperimentConfig& config) {
  config.validate();
  if (config.process.p() != 1)
    throw Error(ErrorKind::Usage, "independence check is defined for p = 1");
  for (std::size_t k = 0; k < config.process.p(); ++k)
    if (config.process.r(k, k) != 0.0)
      throw Error(ErrorKind::Usage, "independence check needs all r_kk = 0");
  const double alpha = common_alpha(config.process);
  const GridKind k1 = classify_grid(config.grid1, alpha);
  const GridKind k2 = classify_grid(config.grid2, alpha);
  if (k1.tag != GridKind::Tag::Sparse || k2.tag == GridKind::Tag::Sparse)
    throw Error(ErrorKind::ConfigMismatch,
                "independence check wants grid1 sparse and grid2 Pickands or dense");

  const std::size_t ti = config.t_values.size() - 1;
  const double T = config.t_values[ti];
  ResolvedHorizon rh = resolve_horizon(config, T, ti);
  VectorProcessSpec spec_t = config.process;
  spec_t.horizon_T = T;
  const unsigned workers = config.workers == 0 ? default_workers() : config.workers;
  const MaximaBatch maxima =
      joint_maxima(spec_t, rh.res.mesh, rh.strides, config.reps,
                   child_seed(config.seed, 1000 + ti), config.engine, workers);

  const double a = rh.res.a;
  std::vector<double> y1n(config.reps), y2n(config.reps);
  for (std::size_t r = 0; r < config.reps; ++r) {
    y1n[r] = a * (maxima.at(r, 0, 1) - rh.res.g1.b[0]);
    y2n[r] = a * (maxima.at(r, 0, 2) - rh.res.g2.b[0]);
  }

  IndependenceResult res;
  res.T = T;
  res.reps = config.reps;
  for (double w : config.lattice_axis)
    for (double s : config.lattice_axis) {
      std::size_t joint = 0, m1 = 0, m2 = 0;
      for (std::size_t r = 0; r < config.reps; ++r) {
        const bool a1 = y1n[r] <= w;
        const bool a2 = y2n[r] <= s;
        joint += (a1 && a2) ? 1 : 0;
        m1 += a1 ? 1 : 0;
        m2 += a2 ? 1 : 0;
      }
      const double n = static_cast<double>(config.reps);
      const double gap = std::abs(static_cast<double>(joint) / n -
                                  (static_cast<double>(m1) / n) * (static_cast<double>(m2) / n));
      res.gap = std::max(res.gap, gap);
    }
  return res;
}

LemmaA5Result tail_check_lemma_a5(const CorrelationModel& model,
                                  std::span<const double> points, double u, double s_horizon,
                                  std::size_t reps, std::uint64_t seed, unsigned workers) {
  model.validate();
  if (!(u > 0.0)) throw Error(ErrorKind::Usage, "level u must be > 0");
  std::vector<double> pts;
  for (double t : points)
    if (t >= 0.0 && t <= s_horizon) pts.push_back(t);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const std::size_t n = pts.size();
  if (n == 0) throw Error(ErrorKind::Usage, "empty point set");

  const double predicted = static_cast<double>(n) * norm_sf(u);
  if (!(predicted > 1e-3) || !(predicted < 1e-1))
    throw Error(ErrorKind::Usage, "expected exceedance probability " + fmt(predicted) +
                                      " outside (1e-3, 1e-1)");

  // exact simulation on the point set via dense Cholesky
  std::vector<double> l(n * n, 0.0);
  {
    std::vector<double> cov(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) cov[i * n + j] = model.kernel(pts[i] - pts[j]);
    for (std::size_t j = 0; j < n; ++j) {
      double d = cov[j * n + j];
      for (std::size_t k = 0; k < j; ++k) d -= l[j * n + k] * l[j * n + k];
      if (d <= 0.0) throw Error(ErrorKind::NonPsd, "point-set covariance is not PD");
      l[j * n + j] = std::sqrt(d);
      for (std::size_t i = j + 1; i < n; ++i) {
        double s = cov[i * n + j];
        for (std::size_t k = 0; k < j; ++k) s -= l[i * n + k] * l[j * n + k];
        l[i * n + j] = s / l[j * n + j];
      }
    }
  }

  std::vector<std::uint8_t> hit(reps, 0);
  parallel_for(reps, workers, [&](std::size_t lo, std::size_t hi) {
    std::vector<double> z(n);
    for (std::size_t r = lo; r < hi; ++r) {
      NormalSampler g(component_stream_seed(replication_seed(seed, r), 0));
      for (std::size_t i = 0; i < n; ++i) z[i] = g();
      bool exceed = false;
      for (std::size_t i = 0; i < n && !exceed; ++i) {
        double x = 0.0;
        for (std::size_t k = 0; k <= i; ++k) x += l[i * n + k] * z[k];
        exceed = x > u;
      }
      hit[r] = exceed ? 1 : 0;
    }
  });
  std::size_t events = 0;
  for (auto v : hit) events += v;
  if (events < 50)
    throw Error(ErrorKind::InsufficientExceedances,
                "only " + std::to_string(events) + " exceedances (< 50)");

  LemmaA5Result res;
  res.n_points = n;
  res.events = events;
  res.empirical = static_cast<double>(events) / static_cast<double>(reps);
  res.predicted = predicted;
  res.ratio = res.empirical / predicted;
  return res;
}

namespace {

json support_json(const SupportResolution& sr) {
  json j;
  switch (sr.kind) {
    case SupportKind::Continuous: j["kind"] = "continuous"; break;
    case SupportKind::Sparse: j["kind"] = "sparse"; break;
    case SupportKind::Pickands: j["kind"] = "pickands"; break;
    case SupportKind::Dense: j["kind"] = "dense"; break;
  }
  j["spacing"] = sr.spacing;
  j["requested_spacing"] = sr.requested_spacing;
  j["snapped"] = sr.snapped;
  j["stride"] = sr.stride;
  j["d_pickands"] = sr.d_pickands;
  j["b"] = sr.b;
  return j;
}

SupportResolution support_from_json(const json& j) {
  SupportResolution sr;
  const std::string kind = j.at("kind").get<std::string>();
  sr.kind = kind == "continuous" ? SupportKind::Continuous
            : kind == "sparse"   ? SupportKind::Sparse
            : kind == "pickands" ? SupportKind::Pickands
                                 : SupportKind::Dense;
  sr.spacing = j.at("spacing").get<double>();
  sr.requested_spacing = j.at("requested_spacing").get<double>();
  sr.snapped = j.at("snapped").get<bool>();
  sr.stride = j.at("stride").get<std::size_t>();
  sr.d_pickands = j.at("d_pickands").get<double>();
  sr.b = j.at("b").get<std::vector<double>>();
  return sr;
}

}  // namespace

std::string report_json(const ComparisonReport& report) {
  json j;
  j["schema_version"] = 1;
  j["config"] = json::parse(report.config_json);
  j["config_hash"] = report.config_hash;
  j["seed"] = report.seed;
  j["reps"] = report.reps;
  json per_t = json::array();
  for (const auto& hc : report.per_t) {
    json t;
    t["T"] = hc.resolution.T;
    t["a"] = hc.resolution.a;
    t["mesh_spacing"] = hc.resolution.mesh.spacing;
    t["mesh_points"] = hc.resolution.mesh.n_points;
    t["continuous"] = support_json(hc.resolution.cont);
    t["grid1"] = support_json(hc.resolution.g1);
    t["grid2"] = support_json(hc.resolution.g2);
    json consts = json::array();
    for (const auto& [d, v] : hc.resolution.constants)
      consts.push_back({{"d", d}, {"value", v}});
    t["constants"] = consts;
    json records = json::array();
    for (const auto& e : hc.resolution.constant_records) {
      records.push_back({{"id", constant_estimate_id(e)},
                         {"kind", e.kind},
                         {"alpha", e.alpha},
                         {"d1", e.d1},
                         {"d2", e.d2},
                         {"x", e.x},
                         {"z1", e.z1},
                         {"z2", e.z2},
                         {"lambda", e.lambda},
                         {"mesh", e.mesh},
                         {"reps", e.reps},
                         {"value", e.value},
                         {"stderr", e.stderr_},
                         {"value_half", e.value_half},
                         {"value_extrapolated", e.value_extrapolated},
                         {"low_confidence", e.low_confidence}});
    }
    t["constant_records"] = records;
    t["case"] = {{"tag", case_name(hc.resolved_case.tag)},
                 {"theta1", hc.resolved_case.theta1},
                 {"theta2", hc.resolved_case.theta2},
                 {"d1", hc.resolved_case.d1},
                 {"d2", hc.resolved_case.d2}};
    t["sup_distance"] = hc.sup_distance;
    json pts = json::array();
    for (const auto& rp : hc.points) {
      pts.push_back({{"x", rp.pt.x},
                     {"y1", rp.pt.y1},
                     {"y2", rp.pt.y2},
                     {"empirical", rp.empirical},
                     {"theoretical", rp.theoretical},
                     {"stderr", rp.binom_stderr}});
    }
    t["points"] = pts;
    per_t.push_back(std::move(t));
  }
  j["per_t"] = per_t;
  return j.dump(2) + "\n";
}

ComparisonReport import_report_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw Error(ErrorKind::Usage, std::string("malformed report: ") + e.what());
  }
  ComparisonReport report;
  report.config_json = j.at("config").dump();
  report.config_hash = j.at("config_hash").get<std::string>();
  report.seed = j.at("seed").get<std::uint64_t>();
  report.reps = j.at("reps").get<std::size_t>();
  for (const auto& t : j.at("per_t")) {
    HorizonComparison hc;
    hc.resolution.T = t.at("T").get<double>();
    hc.resolution.a = t.at("a").get<double>();
    hc.resolution.mesh.spacing = t.at("mesh_spacing").get<double>();
    hc.resolution.mesh.n_points = t.at("mesh_points").get<std::size_t>();
    hc.resolution.cont = support_from_json(t.at("continuous"));
    hc.resolution.g1 = support_from_json(t.at("grid1"));
    hc.resolution.g2 = support_from_json(t.at("grid2"));
    for (const auto& cv : t.at("constants"))
      hc.resolution.constants[cv.at("d").get<double>()] = cv.at("value").get<double>();
    auto dget = [](const json& obj, const char* key) {
      const auto& v = obj.at(key);
      return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
    };
    if (t.contains("constant_records")) {
      for (const auto& rj : t.at("constant_records")) {
        ConstantEstimate e;
        e.kind = rj.at("kind").get<std::string>();
        e.alpha = dget(rj, "alpha");
        e.d1 = dget(rj, "d1");
        e.d2 = dget(rj, "d2");
        e.x = dget(rj, "x");
        e.z1 = dget(rj, "z1");
        e.z2 = dget(rj, "z2");
        e.lambda = dget(rj, "lambda");
        e.mesh = dget(rj, "mesh");
        e.reps = rj.at("reps").get<std::size_t>();
        e.value = dget(rj, "value");
        e.stderr_ = dget(rj, "stderr");
        e.value_half = dget(rj, "value_half");
        e.value_extrapolated = dget(rj, "value_extrapolated");
        e.low_confidence = rj.at("low_confidence").get<bool>();
        hc.resolution.constant_records.push_back(std::move(e));
      }
    }
    if (t.contains("case")) {
      const auto& cj = t.at("case");
      hc.resolved_case.tag = case_tag_from_name(cj.at("tag").get<std::string>());
      hc.resolved_case.theta1 = dget(cj, "theta1");
      hc.resolved_case.theta2 = dget(cj, "theta2");
      hc.resolved_case.d1 = dget(cj, "d1");
      hc.resolved_case.d2 = dget(cj, "d2");
    }
    hc.sup_distance = t.at("sup_distance").get<double>();
    for (const auto& pj : t.at("points")) {
      ReportPoint rp;
      rp.pt.x = pj.at("x").get<std::vector<double>>();
      rp.pt.y1 = pj.at("y1").get<std::vector<double>>();
      rp.pt.y2 = pj.at("y2").get<std::vector<double>>();
      rp.empirical = pj.at("empirical").get<double>();
      rp.theoretical = pj.at("theoretical").get<double>();
      rp.binom_stderr = pj.at("stderr").get<double>();
      hc.points.push_back(std::move(rp));
    }
    report.per_t.push_back(std::move(hc));
  }
  return report;
}

std::string report_csv(const ComparisonReport& report) {
  std::ostringstream out;
  const std::size_t p = report.per_t.empty() || report.per_t.front().points.empty()
                            ? 1
                            : report.per_t.front().points.front().pt.x.size();
  out << "T,point_index";
  for (std::size_t k = 0; k < p; ++k) out << ",x" << (k + 1);
  for (std::size_t k = 0; k < p; ++k) out << ",y1_" << (k + 1);
  for (std::size_t k = 0; k < p; ++k) out << ",y2_" << (k + 1);
  out << ",empirical,theoretical,stderr,sup_distance\n";
  for (const auto& hc : report.per_t) {
    std::size_t idx = 0;
    for (const auto& rp : hc.points) {
      out << fmt(hc.resolution.T) << ',' << idx++;
      for (double v : rp.pt.x) out << ',' << fmt(v);
      for (double v : rp.pt.y1) out << ',' << fmt(v);
      for (double v : rp.pt.y2) out << ',' << fmt(v);
      out << ',' << fmt(rp.empirical) << ',' << fmt(rp.theoretical) << ','
          << fmt(rp.binom_stderr) << ',' << fmt(hc.sup_distance) << "\n";
    }
  }
  return out.str();
}

void export_report(const ComparisonReport& report, ReportFormat format,
                   const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path);
  out << (format == ReportFormat::Json ? report_json(report) : report_csv(report));
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

}  // namespace maxgrid
