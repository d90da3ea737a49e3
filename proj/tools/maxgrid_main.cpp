#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "maxgrid/config_io.hpp"
#include "maxgrid/gp_sim.hpp"
#include "maxgrid/harness.hpp"
#include "maxgrid/parallel.hpp"
#include "maxgrid/pickands.hpp"

namespace {

using maxgrid::Error;
using maxgrid::ErrorKind;

void print_error_json(const Error& e) {
  nlohmann::json j;
  j["error"] = e.kind_name();
  j["message"] = e.what();
  std::cerr << j.dump() << "\n";
}

int run_constants(const std::string& kind, double alpha, double d1, double d2, double x,
                  double z1, double z2, double lambda, double mesh, std::size_t reps,
                  std::uint64_t seed, unsigned workers, const std::string& offsets_lattice,
                  const std::string& out_path) {
  using namespace maxgrid;
  std::vector<ConstantEstimate> rows;

  std::vector<double> offsets{0.0};
  if (!offsets_lattice.empty()) {
    // lo:hi:step
    double lo, hi, step;
    char c1, c2;
    std::istringstream ss(offsets_lattice);
    if (!(ss >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0)
      throw Error(ErrorKind::Usage, "--offsets-lattice wants lo:hi:step");
    offsets.clear();
    for (double v = lo; v <= hi + 1e-12; v += step) offsets.push_back(v);
  }

  if (kind == "H") {
    rows.push_back(estimate_H_alpha(alpha, lambda, mesh, reps, seed, workers));
  } else if (kind == "HD") {
    rows.push_back(estimate_H_D(alpha, d1, lambda, reps, seed, workers,
                                mesh > 0 ? mesh : 0.0));
  } else if (kind == "Hxy") {
    ConstantBatch batch(alpha, lambda, mesh, true, {d1}, reps, seed, workers);
    for (double off : offsets) rows.push_back(batch.h_xy(d1, x + off, z1 + off));
  } else if (kind == "HD1D2") {
    ConstantBatch batch(alpha, lambda, mesh, false, {d1, d2}, reps, seed, workers);
    for (double off : offsets) rows.push_back(batch.h_z1z2(d1, d2, z1 + off, z2 + off));
  } else if (kind == "HxZ12") {
    ConstantBatch batch(alpha, lambda, mesh, true, {d1, d2}, reps, seed, workers);
    for (double off : offsets)
      rows.push_back(batch.h_x_z1z2(d1, d2, x + off, z1 + off, z2 + off));
  } else {
    throw Error(ErrorKind::Usage, "unknown --kind (H, HD, Hxy, HD1D2, HxZ12)");
  }

  const std::string csv = constants_csv(rows);
  if (out_path.empty()) {
    std::cout << csv;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot open " + out_path);
    out << csv;
  }
  return 0;
}

int run_simulate(const std::string& model, double alpha, double c, double hurst, double h,
                 std::size_t n, std::size_t reps, std::uint64_t seed, unsigned workers,
                 const std::string& engine, const std::string& out_path) {
  using namespace maxgrid;
  SimulationMesh mesh{h, n};
  PathEngineKind kind = PathEngineKind::Auto;
  if (engine == "circulant")
    kind = PathEngineKind::Circulant;
  else if (engine == "recursive")
    kind = PathEngineKind::Recursive;
  else if (engine != "auto")
    throw Error(ErrorKind::Usage, "unknown --engine (auto, circulant, recursive)");

  PathBatch batch;
  if (model == "gp") {
    batch = sample_scalar_paths(CorrelationModel{alpha, c, 0.0}, mesh, reps, seed, kind,
                                workers);
  } else if (model == "fbm") {
    batch = sample_fbm(hurst, mesh, reps, seed, workers);
  } else {
    throw Error(ErrorKind::Usage, "unknown --model (gp, fbm)");
  }
  dump_paths_csv(batch, out_path);
  std::cout << "wrote " << out_path << " reps=" << reps << " n=" << n << "\n";
  return 0;
}

int run_verify(const std::string& config_path, bool dry_run, std::string out_dir,
               unsigned workers_override) {
  using namespace maxgrid;
  RunConfigFile rc = load_run_config(config_path);
  if (workers_override > 0) rc.experiment.workers = workers_override;
  if (!out_dir.empty()) rc.output_dir = out_dir;

  if (dry_run) {
    std::cout << "config ok: " << case_name(rc.experiment.theorem_case.tag) << " p="
              << rc.experiment.process.p() << " horizons=" << rc.experiment.t_values.size()
              << " reps=" << rc.experiment.reps << "\n";
    return 0;
  }

  const auto start = std::chrono::steady_clock::now();
  const ComparisonReport report = run_experiment(rc.experiment);
  const auto elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::filesystem::create_directories(rc.output_dir);
  for (const ReportFormat f : rc.formats) {
    const std::string name = f == ReportFormat::Json ? "report.json" : "report.csv";
    export_report(report, f, rc.output_dir + "/" + name);
  }

  for (const auto& hc : report.per_t)
    std::cout << "T=" << hc.resolution.T << " sup_dist=" << hc.sup_distance
              << " reps=" << report.reps << "\n";
  std::cerr << "verify runtime_seconds=" << elapsed << "\n";

  const auto& acc = rc.experiment.acceptance;
  bool pass = true;
  if (acc.max_final_sup_distance)
    pass = pass && report.per_t.back().sup_distance <= *acc.max_final_sup_distance;
  if (acc.require_trend && report.per_t.size() >= 2)
    pass = pass && report.per_t.back().sup_distance <= report.per_t.front().sup_distance;
  return pass ? 0 : 4;
}

int run_sweep(const std::string& config_path, unsigned workers_override) {
  using namespace maxgrid;
  RunConfigFile rc = load_run_config(config_path);
  if (workers_override > 0) rc.experiment.workers = workers_override;
  const std::vector<double> distances = convergence_sweep(rc.experiment);
  for (std::size_t i = 0; i < distances.size(); ++i)
    std::cout << "T=" << rc.experiment.t_values[i] << " sup_dist=" << distances[i]
              << " reps=" << rc.experiment.reps << "\n";
  bool pass = distances.back() <= distances.front();
  if (rc.experiment.acceptance.max_final_sup_distance)
    pass = pass && distances.back() <= *rc.experiment.acceptance.max_final_sup_distance;
  return pass ? 0 : 4;
}

// minimal deterministic SVG line plot
std::string svg_plot(const std::vector<std::pair<double, double>>& a,
                     const std::vector<std::pair<double, double>>& b,
                     const std::string& label_a, const std::string& label_b,
                     const std::string& title) {
  const double w = 640, hgt = 420, m = 50;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  auto scan = [&](const std::vector<std::pair<double, double>>& pts) {
    for (auto [x, y] : pts) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  };
  scan(a);
  if (!b.empty()) scan(b);
  if (xmax <= xmin) xmax = xmin + 1;
  if (ymax <= ymin) ymax = ymin + 1;
  auto px = [&](double x) { return m + (x - xmin) / (xmax - xmin) * (w - 2 * m); };
  auto py = [&](double y) { return hgt - m - (y - ymin) / (ymax - ymin) * (hgt - 2 * m); };
  std::ostringstream out;
  out.precision(6);
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << hgt
      << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
  out << "<text x='" << w / 2 << "' y='20' text-anchor='middle' font-size='14'>" << title
      << "</text>\n";
  auto line = [&](const std::vector<std::pair<double, double>>& pts, const char* color) {
    if (pts.empty()) return;
    out << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='";
    for (auto [x, y] : pts) out << px(x) << ',' << py(y) << ' ';
    out << "'/>\n";
    for (auto [x, y] : pts)
      out << "<circle cx='" << px(x) << "' cy='" << py(y) << "' r='2.5' fill='" << color
          << "'/>\n";
  };
  line(a, "#1f77b4");
  line(b, "#d62728");
  out << "<text x='" << m << "' y='" << hgt - 12 << "' font-size='12' fill='#1f77b4'>"
      << label_a << "</text>\n";
  if (!b.empty())
    out << "<text x='" << w / 2 << "' y='" << hgt - 12 << "' font-size='12' fill='#d62728'>"
        << label_b << "</text>\n";
  out << "</svg>\n";
  return out.str();
}

int run_plot(const std::string& report_path, const std::string& out_dir) {
  using namespace maxgrid;
  const ComparisonReport report = import_report_json(report_path);
  std::filesystem::create_directories(out_dir);

  // sup distance vs ln T
  std::vector<std::pair<double, double>> dist;
  for (const auto& hc : report.per_t)
    dist.push_back({std::log(hc.resolution.T), hc.sup_distance});
  {
    std::ofstream out(out_dir + "/distance_vs_lnT.svg", std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot open plot file");
    out << svg_plot(dist, {}, "sup distance", "", "sup distance vs ln T");
  }

  // CDF slice along x with the y-coordinates at their median lattice value
  for (std::size_t ti = 0; ti < report.per_t.size(); ++ti) {
    const auto& hc = report.per_t[ti];
    if (hc.points.empty()) continue;
    std::vector<double> y1s;
    for (const auto& rp : hc.points) y1s.push_back(rp.pt.y1[0]);
    std::sort(y1s.begin(), y1s.end());
    const double ymid = y1s[y1s.size() / 2];
    std::vector<std::pair<double, double>> emp, theo;
    for (const auto& rp : hc.points)
      if (rp.pt.y1[0] == ymid && rp.pt.y2[0] == ymid) {
        emp.push_back({rp.pt.x[0], rp.empirical});
        theo.push_back({rp.pt.x[0], rp.theoretical});
      }
    std::sort(emp.begin(), emp.end());
    std::sort(theo.begin(), theo.end());
    std::ofstream out(out_dir + "/cdf_slice_T" + std::to_string(ti) + ".svg",
                      std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot open plot file");
    out << svg_plot(emp, theo, "empirical", "theoretical",
                    "joint CDF slice at T index " + std::to_string(ti));
  }
  std::cout << "wrote plots to " << out_dir << "\n";
  return 0;
}

int run_report(const std::string& report_path, const std::string& csv_out) {
  using namespace maxgrid;
  const ComparisonReport report = import_report_json(report_path);
  for (const auto& hc : report.per_t)
    std::cout << "T=" << hc.resolution.T << " sup_dist=" << hc.sup_distance
              << " reps=" << report.reps << "\n";
  if (!csv_out.empty()) export_report(report, ReportFormat::Csv, csv_out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"max-discretisation simulation laboratory for stationary Gaussian processes"};
  app.require_subcommand(1);
  unsigned workers = 0;
  app.add_option("--workers", workers, "worker threads (default: MAXGRID_WORKERS or cores)");

  // constants
  auto* c_cmd = app.add_subcommand("constants", "estimate Pickands-type constants");
  std::string kind = "H";
  double alpha = 1.0, d1 = 1.0, d2 = 0.5, xoff = 0.0, z1 = 0.0, z2 = 0.0;
  double lambda = 12.0, mesh = 0.01;
  std::size_t reps = 20000;
  std::uint64_t seed = 1;
  std::string offsets_lattice, out_path;
  c_cmd->add_option("--kind", kind, "H | HD | Hxy | HD1D2 | HxZ12");
  c_cmd->add_option("--alpha", alpha, "roughness exponent in (0,2]")->required();
  c_cmd->add_option("--d1", d1, "first grid step (Pickands units)");
  c_cmd->add_option("--d2", d2, "second grid step");
  c_cmd->add_option("--x", xoff, "continuous offset");
  c_cmd->add_option("--z1", z1, "first grid offset");
  c_cmd->add_option("--z2", z2, "second grid offset");
  c_cmd->add_option("--lambda", lambda, "truncation horizon");
  c_cmd->add_option("--mesh", mesh, "field mesh step");
  c_cmd->add_option("--reps", reps, "replications");
  c_cmd->add_option("--seed", seed, "root seed");
  c_cmd->add_option("--offsets-lattice", offsets_lattice, "lo:hi:step common offset sweep");
  c_cmd->add_option("--out", out_path, "write CSV here instead of stdout");

  // simulate
  auto* s_cmd = app.add_subcommand("simulate", "sample paths and dump them as CSV");
  std::string model = "gp", engine = "auto", sim_out = "paths.csv";
  double c_scale = 1.0, hurst = 0.5, h_step = 0.01;
  std::size_t n_points = 256, sim_reps = 4;
  std::uint64_t sim_seed = 1;
  double sim_alpha = 1.0;
  s_cmd->add_option("--model", model, "gp | fbm");
  s_cmd->add_option("--alpha", sim_alpha, "roughness exponent (gp)");
  s_cmd->add_option("--c", c_scale, "local scale C (gp)");
  s_cmd->add_option("--hurst", hurst, "Hurst index (fbm)");
  s_cmd->add_option("--step", h_step, "mesh step");
  s_cmd->add_option("--n", n_points, "mesh points");
  s_cmd->add_option("--reps", sim_reps, "replications");
  s_cmd->add_option("--seed", sim_seed, "root seed");
  s_cmd->add_option("--engine", engine, "auto | circulant | recursive");
  s_cmd->add_option("--out", sim_out, "output CSV path");

  // verify / sweep
  auto* v_cmd = app.add_subcommand("verify", "run a verification experiment from a config");
  std::string config_path, out_dir;
  bool dry_run = false;
  v_cmd->add_option("config", config_path, "run configuration JSON")->required();
  v_cmd->add_flag("--dry-run", dry_run, "validate the config and exit");
  v_cmd->add_option("--out", out_dir, "output directory (overrides config)");

  auto* w_cmd = app.add_subcommand("sweep", "convergence sweep over the config's T ladder");
  std::string sweep_config;
  w_cmd->add_option("config", sweep_config, "run configuration JSON")->required();

  // plot / report
  auto* p_cmd = app.add_subcommand("plot", "emit SVG plots from a stored report");
  std::string plot_report, plot_out = "plots";
  p_cmd->add_option("report", plot_report, "report.json path")->required();
  p_cmd->add_option("--out", plot_out, "output directory");

  auto* r_cmd = app.add_subcommand("report", "summarize a stored report");
  std::string rep_path, rep_csv;
  r_cmd->add_option("report", rep_path, "report.json path")->required();
  r_cmd->add_option("--csv", rep_csv, "also write the CSV form here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n" << app.help() << "\n";
    return 2;
  }

  try {
    if (*c_cmd)
      return run_constants(kind, alpha, d1, d2, xoff, z1, z2, lambda, mesh, reps, seed,
                           workers == 0 ? 1 : workers, offsets_lattice, out_path);
    if (*s_cmd)
      return run_simulate(model, sim_alpha, c_scale, hurst, h_step, n_points, sim_reps,
                          sim_seed, workers == 0 ? 1 : workers, engine, sim_out);
    if (*v_cmd) return run_verify(config_path, dry_run, out_dir, workers);
    if (*w_cmd) return run_sweep(sweep_config, workers);
    if (*p_cmd) return run_plot(plot_report, plot_out);
    if (*r_cmd) return run_report(rep_path, rep_csv);
  } catch (const Error& e) {
    print_error_json(e);
    return e.exit_code();
  } catch (const std::exception& e) {
    nlohmann::json j;
    j["error"] = "Internal";
    j["message"] = e.what();
    std::cerr << j.dump() << "\n";
    return 3;
  }
  return 2;
}
