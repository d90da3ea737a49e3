#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "maxgrid/gp_sim.hpp"
#include "maxgrid/limit_laws.hpp"
#include "maxgrid/pickands.hpp"

namespace maxgrid {

struct AcceptancePredicates {
  std::optional<double> max_final_sup_distance;  // last T must come in at or below
  bool require_trend = false;                    // last distance <= first distance
};

struct ExperimentConfig {
  VectorProcessSpec process;  // horizon_T is overridden by each T value
  GridSpec grid1, grid2;
  TheoremCase theorem_case;
  std::vector<double> t_values;
  std::size_t reps = 10000;
  std::uint64_t seed = 1;

  // continuous-max mesh policy: spacing <= mesh_epsilon Pickands units
  double mesh_epsilon = 0.05;

  // evaluation lattice: axis values broadcast over components for each of the
  // three roles (x, y1, y2); explicit points take precedence when non-empty
  std::vector<double> lattice_axis = {-2.0, -0.875, 0.25, 1.375, 2.5};
  std::vector<LatticePoint> lattice_points;

  unsigned workers = 0;  // 0 -> default_workers()
  PathEngineKind engine = PathEngineKind::Auto;

  // Pickands-type constant estimation backing the location constants
  double const_lambda = 12.0;
  std::size_t const_reps = 400000;
  bool const_extrapolated = false;
  // anchor grid constants at the known H_alpha (alpha in {1,2}) via the local
  // sqrt(D) decay model; falls back to the direct estimator otherwise
  bool const_anchor = true;

  AcceptancePredicates acceptance;

  void validate() const;
};

// Per-horizon resolution of mesh, grids and location constants.
struct SupportResolution {
  SupportKind kind = SupportKind::Continuous;
  double spacing = 0.0;            // time units (mesh step for the continuous proxy)
  double requested_spacing = 0.0;  // before snapping to the mesh
  bool snapped = false;
  std::size_t stride = 1;          // mesh stride (1 for the continuous proxy)
  double d_pickands = 0.0;         // spacing in Pickands units
  std::vector<double> b;           // location constant per component
};

struct HorizonResolution {
  double T = 0.0;
  double a = 0.0;
  SimulationMesh mesh;
  SupportResolution cont, g1, g2;
  std::map<double, double> constants;            // Pickands D -> value used
  std::vector<ConstantEstimate> constant_records;  // provenance records
};

struct ReportPoint {
  LatticePoint pt;
  double empirical = 0.0;
  double theoretical = 0.0;
  double binom_stderr = 0.0;
};

struct HorizonComparison {
  HorizonResolution resolution;
  TheoremCase resolved_case;
  double sup_distance = 0.0;
  std::vector<ReportPoint> points;
};

struct ComparisonReport {
  std::string config_json;  // resolved configuration, canonical form
  std::string config_hash;  // fnv1a-64 of config_json
  std::uint64_t seed = 0;
  std::size_t reps = 0;
  std::vector<HorizonComparison> per_t;
};

// One full verification experiment: simulate, normalize, compare against the
// limiting distribution on the lattice, per horizon.
ComparisonReport run_experiment(const ExperimentConfig& config);

// Distances per horizon; requires at least 3 horizons. The acceptance reading
// is trend + threshold, not strict monotonicity.
std::vector<double> convergence_sweep(const ExperimentConfig& config);

struct IndependenceResult {
  double gap = 0.0;
  double T = 0.0;
  std::size_t reps = 0;
};

// max over the 2D lattice of |joint CDF - product of marginals| for the
// (sparse-grid max, other max) pair; requires all r_kk = 0.
IndependenceResult independence_check(const ExperimentConfig& config);

struct LemmaA5Result {
  double ratio = 0.0;
  double empirical = 0.0;
  double predicted = 0.0;  // N * Phibar(u)
  std::size_t n_points = 0;
  std::size_t events = 0;
};

// Tail of the maximum over a non-uniform sparse point set against N Phibar(u).
LemmaA5Result tail_check_lemma_a5(const CorrelationModel& model,
                                  std::span<const double> points, double u, double s_horizon,
                                  std::size_t reps, std::uint64_t seed, unsigned workers = 1);

enum class ReportFormat { Csv, Json };
void export_report(const ComparisonReport& report, ReportFormat format,
                   const std::string& path);
ComparisonReport import_report_json(const std::string& path);
std::string report_json(const ComparisonReport& report);
std::string report_csv(const ComparisonReport& report);

}  // namespace maxgrid
