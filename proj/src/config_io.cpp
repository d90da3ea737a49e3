#include "maxgrid/config_io.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

namespace maxgrid {

namespace {

using nlohmann::json;

void require_keys(const json& j, const std::string& where,
                  const std::set<std::string>& allowed) {
  if (!j.is_object()) throw Error(ErrorKind::Usage, where + " must be an object");
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key))
      throw Error(ErrorKind::Usage, "unknown key '" + key + "' in " + where);
}

GridSpec parse_grid(const json& j, const std::string& where) {
  require_keys(j, where, {"form", "param"});
  GridSpec g;
  const std::string form = j.at("form").get<std::string>();
  if (form == "constant")
    g.form = GridSpec::Form::ConstantSpacing;
  else if (form == "pickands")
    g.form = GridSpec::Form::PickandsSpacing;
  else if (form == "powerlog")
    g.form = GridSpec::Form::PowerLogSpacing;
  else
    throw Error(ErrorKind::Usage, "unknown grid form '" + form + "' in " + where);
  g.param = j.at("param").get<double>();
  g.validate();
  return g;
}

}  // namespace

RunConfigFile parse_run_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const std::exception& e) {
    throw Error(ErrorKind::Usage, std::string("config is not valid JSON: ") + e.what());
  }
  require_keys(j, "config",
               {"schema_version", "process", "grids", "case", "estimation", "experiment",
                "output"});
  const int version = j.at("schema_version").get<int>();
  if (version != 1)
    throw Error(ErrorKind::Usage, "unsupported schema_version " + std::to_string(version));

  RunConfigFile out;
  ExperimentConfig& config = out.experiment;

  const json& proc = j.at("process");
  require_keys(proc, "process", {"components", "cross"});
  for (const auto& cj : proc.at("components")) {
    require_keys(cj, "process.components[]", {"alpha", "c", "r"});
    CorrelationModel cm;
    cm.alpha = cj.at("alpha").get<double>();
    cm.c = cj.at("c").get<double>();
    cm.r_long = cj.value("r", 0.0);
    config.process.components.push_back(cm);
  }
  const std::size_t p = config.process.components.size();
  if (proc.contains("cross")) {
    const auto& cross = proc.at("cross");
    if (cross.is_array() && !cross.empty() && cross.front().is_array()) {
      for (const auto& row : cross)
        for (const auto& v : row) config.process.cross.push_back(v.get<double>());
    } else {
      config.process.cross = cross.get<std::vector<double>>();
    }
  }
  if (config.process.cross.empty()) {
    config.process.cross.assign(p * p, 0.0);
    for (std::size_t k = 0; k < p; ++k)
      config.process.cross[k * p + k] = config.process.components[k].r_long;
  }

  const auto& grids = j.at("grids");
  if (!grids.is_array() || grids.size() != 2)
    throw Error(ErrorKind::Usage, "grids must be an array of exactly two entries");
  config.grid1 = parse_grid(grids[0], "grids[0]");
  config.grid2 = parse_grid(grids[1], "grids[1]");

  const json& cs = j.at("case");
  require_keys(cs, "case", {"tag", "theta1", "theta2"});
  config.theorem_case.tag = case_tag_from_name(cs.at("tag").get<std::string>());
  config.theorem_case.theta1 = cs.value("theta1", 0.0);
  config.theorem_case.theta2 = cs.value("theta2", 0.0);

  if (j.contains("estimation")) {
    const json& est = j.at("estimation");
    require_keys(est, "estimation", {"lambda", "reps", "extrapolate", "anchor"});
    config.const_lambda = est.value("lambda", config.const_lambda);
    config.const_reps = est.value("reps", config.const_reps);
    config.const_extrapolated = est.value("extrapolate", config.const_extrapolated);
    config.const_anchor = est.value("anchor", config.const_anchor);
  }

  const json& exp = j.at("experiment");
  require_keys(exp, "experiment",
               {"t_values", "ln_t_values", "reps", "seed", "mesh_epsilon", "lattice_axis",
                "workers", "engine", "acceptance"});
  if (exp.contains("t_values") == exp.contains("ln_t_values"))
    throw Error(ErrorKind::Usage, "give exactly one of t_values, ln_t_values");
  if (exp.contains("t_values"))
    config.t_values = exp.at("t_values").get<std::vector<double>>();
  else
    for (double lt : exp.at("ln_t_values").get<std::vector<double>>())
      config.t_values.push_back(std::exp(lt));
  config.process.horizon_T = config.t_values.back();
  config.reps = exp.at("reps").get<std::size_t>();
  config.seed = exp.value("seed", std::uint64_t{1});
  config.mesh_epsilon = exp.value("mesh_epsilon", config.mesh_epsilon);
  if (exp.contains("lattice_axis"))
    config.lattice_axis = exp.at("lattice_axis").get<std::vector<double>>();
  config.workers = exp.value("workers", 0u);
  if (exp.contains("engine")) {
    const std::string eng = exp.at("engine").get<std::string>();
    if (eng == "auto")
      config.engine = PathEngineKind::Auto;
    else if (eng == "circulant")
      config.engine = PathEngineKind::Circulant;
    else if (eng == "recursive")
      config.engine = PathEngineKind::Recursive;
    else
      throw Error(ErrorKind::Usage, "unknown engine '" + eng + "'");
  }
  if (exp.contains("acceptance")) {
    const json& acc = exp.at("acceptance");
    require_keys(acc, "experiment.acceptance", {"max_sup_distance", "require_trend"});
    if (acc.contains("max_sup_distance"))
      config.acceptance.max_final_sup_distance = acc.at("max_sup_distance").get<double>();
    config.acceptance.require_trend = acc.value("require_trend", false);
  }

  if (j.contains("output")) {
    const json& outj = j.at("output");
    require_keys(outj, "output", {"dir", "formats"});
    out.output_dir = outj.value("dir", std::string("."));
    if (outj.contains("formats")) {
      out.formats.clear();
      for (const auto& f : outj.at("formats")) {
        const std::string name = f.get<std::string>();
        if (name == "json")
          out.formats.push_back(ReportFormat::Json);
        else if (name == "csv")
          out.formats.push_back(ReportFormat::Csv);
        else
          throw Error(ErrorKind::Usage, "unknown output format '" + name + "'");
      }
    }
  }

  config.validate();
  return out;
}

RunConfigFile load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_run_config(text);
}

}  // namespace maxgrid
