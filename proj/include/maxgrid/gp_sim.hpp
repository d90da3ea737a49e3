#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "maxgrid/grid.hpp"
#include "maxgrid/process.hpp"
#include "maxgrid/rng.hpp"

namespace maxgrid {

// lag covariances exp(-C (k h)^alpha), k = 0 .. n_points-1
std::vector<double> covariance_sequence(const CorrelationModel& model,
                                        const SimulationMesh& mesh);

// Eigenvalues of the minimal circulant extension (length 2(n-1)) of a lag
// covariance vector. Throws NonEmbeddable when an eigenvalue falls below
// -1e-10 * embedding_length.
std::vector<double> circulant_embed(std::span<const double> cov);

enum class PathEngineKind { Auto, Circulant, Recursive };

// Generates one scalar path per (seed); implementations are immutable after
// construction and safe to call concurrently.
class ScalarPathEngine {
 public:
  virtual ~ScalarPathEngine() = default;
  virtual std::size_t n_points() const = 0;
  virtual void generate(std::uint64_t seed, std::span<double> out) const = 0;
};

// Exact stationary sampler for the exp-power kernel. Auto selects the O(n)
// recursive engine for alpha == 1 and circulant embedding otherwise.
std::unique_ptr<ScalarPathEngine> make_stationary_engine(const CorrelationModel& model,
                                                         const SimulationMesh& mesh,
                                                         PathEngineKind kind = PathEngineKind::Auto);

// Exact fractional Brownian motion on the mesh, B(0) = 0, Var B(t) = t^{2H}.
std::unique_ptr<ScalarPathEngine> make_fbm_engine(double hurst, const SimulationMesh& mesh);

struct PathBatch {
  SimulationMesh mesh;
  std::size_t reps = 0;
  std::size_t p = 1;
  std::uint64_t root_seed = 0;
  std::vector<double> values;  // reps * p * n_points

  std::span<const double> path(std::size_t rep, std::size_t comp) const {
    const std::size_t n = mesh.n_points;
    return {values.data() + (rep * p + comp) * n, n};
  }
  std::span<double> path(std::size_t rep, std::size_t comp) {
    const std::size_t n = mesh.n_points;
    return {values.data() + (rep * p + comp) * n, n};
  }
};

PathBatch sample_scalar_paths(const CorrelationModel& model, const SimulationMesh& mesh,
                              std::size_t reps, std::uint64_t seed,
                              PathEngineKind kind = PathEngineKind::Auto, unsigned workers = 1);

// Random-effect construction: X_k(t) = sqrt(1 - rho_kk) eta_k(t) + sqrt(rho_kk) Z_k
// with rho_kl(T) = r_kl / ln T and Z ~ N(0, MixingVector.cov).
PathBatch sample_vector_paths(const VectorProcessSpec& spec, const SimulationMesh& mesh,
                              std::size_t reps, std::uint64_t seed,
                              PathEngineKind kind = PathEngineKind::Auto, unsigned workers = 1);

PathBatch sample_fbm(double hurst, const SimulationMesh& mesh, std::size_t reps,
                     std::uint64_t seed, unsigned workers = 1);

// Per-replication maxima of the vector process over the full mesh (support 0)
// and each stride-subsampled grid, without materializing paths.
struct MaximaBatch {
  std::size_t reps = 0;
  std::size_t p = 1;
  std::size_t supports = 1;
  std::vector<double> values;  // reps * p * supports

  double at(std::size_t rep, std::size_t comp, std::size_t support) const {
    return values[(rep * p + comp) * supports + support];
  }
};

MaximaBatch joint_maxima(const VectorProcessSpec& spec, const SimulationMesh& mesh,
                         std::span<const std::size_t> grid_strides, std::size_t reps,
                         std::uint64_t seed, PathEngineKind kind = PathEngineKind::Auto,
                         unsigned workers = 1);

// Seed plumbing shared by all samplers (exposed for reproducibility tests).
inline std::uint64_t replication_seed(std::uint64_t root, std::size_t rep) {
  return derive_seed(root, static_cast<std::uint64_t>(rep));
}
inline std::uint64_t component_stream_seed(std::uint64_t rep_seed, std::size_t comp) {
  return child_seed(rep_seed, 1 + comp);
}
inline std::uint64_t mixing_stream_seed(std::uint64_t rep_seed) { return child_seed(rep_seed, 0); }

// mesh indices of the grid points, using the batch horizon as T
std::vector<std::size_t> subsample_grid(const PathBatch& batch, const GridSpec& grid,
                                        double alpha);

// CSV path dump, columns rep<i>_k<j>, rows = time points.
void dump_paths_csv(const PathBatch& batch, const std::string& path);

}  // namespace maxgrid
