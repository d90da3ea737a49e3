#include "maxgrid/gp_sim.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <limits>
#include <mutex>

#include "maxgrid/parallel.hpp"
#include "maxgrid/rng.hpp"

namespace maxgrid {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Forward c2c FFT of fixed size; plan creation serialized, execution reentrant.
class Fft {
 public:
  explicit Fft(std::size_t m) : m_(m) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    std::vector<std::complex<double>> tmp(m);
    plan_ = fftw_plan_dft_1d(static_cast<int>(m),
                             reinterpret_cast<fftw_complex*>(tmp.data()),
                             reinterpret_cast<fftw_complex*>(tmp.data()), FFTW_FORWARD,
                             FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  ~Fft() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  std::size_t size() const { return m_; }
  void forward(std::complex<double>* buf) const {
    fftw_execute_dft(plan_, reinterpret_cast<fftw_complex*>(buf),
                     reinterpret_cast<fftw_complex*>(buf));
  }

 private:
  std::size_t m_;
  fftw_plan plan_;
};

std::size_t next_pow2(std::size_t v) {
  std::size_t p = 1;
  while (p < v) p <<= 1;
  return p;
}

std::vector<double> circulant_eigenvalues(std::span<const double> half, std::size_t m) {
  // half holds lags 0 .. m/2; build the even extension and transform
  std::vector<std::complex<double>> buf(m);
  for (std::size_t j = 0; j <= m / 2; ++j) buf[j] = half[j];
  for (std::size_t j = m / 2 + 1; j < m; ++j) buf[j] = half[m - j];
  Fft fft(m);
  fft.forward(buf.data());
  std::vector<double> eig(m);
  for (std::size_t j = 0; j < m; ++j) eig[j] = buf[j].real();
  return eig;
}

// Spectral weights for exact stationary sampling; doubles the embedding on
// negative eigenvalues, up to 64x.
class CirculantEngine : public ScalarPathEngine {
 public:
  CirculantEngine(std::function<double(std::size_t)> lag_cov, std::size_t n)
      : n_(n) {
    std::size_t m = std::max<std::size_t>(2, next_pow2(2 * (n - 1)));
    for (int attempt = 0;; ++attempt) {
      std::vector<double> half(m / 2 + 1);
      for (std::size_t j = 0; j <= m / 2; ++j) half[j] = lag_cov(j);
      auto eig = circulant_eigenvalues(half, m);
      const double tol = 1e-10 * static_cast<double>(m);
      const double min_eig = *std::min_element(eig.begin(), eig.end());
      if (min_eig >= -tol) {
        scale_.resize(m);
        for (std::size_t j = 0; j < m; ++j)
          scale_[j] = std::sqrt(std::max(eig[j], 0.0) / static_cast<double>(m));
        fft_ = std::make_unique<Fft>(m);
        return;
      }
      if (attempt >= 6)
        throw Error(ErrorKind::NonEmbeddable,
                    "circulant embedding failed: min eigenvalue " + std::to_string(min_eig) +
                        " after " + std::to_string(attempt) + " doublings");
      m <<= 1;
    }
  }

  std::size_t n_points() const override { return n_; }

  void generate(std::uint64_t seed, std::span<double> out) const override {
    const std::size_t m = fft_->size();
    thread_local std::vector<std::complex<double>> buf;
    buf.resize(m);
    NormalSampler z(seed);
    for (std::size_t j = 0; j < m; ++j) buf[j] = {scale_[j] * z(), scale_[j] * z()};
    fft_->forward(buf.data());
    for (std::size_t k = 0; k < n_; ++k) out[k] = buf[k].real();
  }

 private:
  std::size_t n_;
  std::vector<double> scale_;
  std::unique_ptr<Fft> fft_;
};

// alpha == 1 exp-power kernel is AR(1) on a uniform mesh: exact and O(n).
class RecursiveExpEngine : public ScalarPathEngine {
 public:
  RecursiveExpEngine(double c, const SimulationMesh& mesh)
      : n_(mesh.n_points), phi_(std::exp(-c * mesh.spacing)),
        sd_(std::sqrt(1.0 - phi_ * phi_)) {}

  std::size_t n_points() const override { return n_; }

  void generate(std::uint64_t seed, std::span<double> out) const override {
    NormalSampler z(seed);
    double x = z();
    out[0] = x;
    for (std::size_t k = 1; k < n_; ++k) {
      x = phi_ * x + sd_ * z();
      out[k] = x;
    }
  }

 private:
  std::size_t n_;
  double phi_;
  double sd_;
};

// Brownian special case H = 1/2: independent increments.
class BrownianEngine : public ScalarPathEngine {
 public:
  BrownianEngine(const SimulationMesh& mesh)
      : n_(mesh.n_points), sqrt_h_(std::sqrt(mesh.spacing)) {}
  std::size_t n_points() const override { return n_; }
  void generate(std::uint64_t seed, std::span<double> out) const override {
    NormalSampler z(seed);
    double x = 0.0;
    out[0] = 0.0;
    for (std::size_t k = 1; k < n_; ++k) {
      x += sqrt_h_ * z();
      out[k] = x;
    }
  }

 private:
  std::size_t n_;
  double sqrt_h_;
};

// Degenerate H = 1 case: B(t) = t * N(0,1).
class LineEngine : public ScalarPathEngine {
 public:
  LineEngine(const SimulationMesh& mesh) : n_(mesh.n_points), h_(mesh.spacing) {}
  std::size_t n_points() const override { return n_; }
  void generate(std::uint64_t seed, std::span<double> out) const override {
    NormalSampler z(seed);
    const double slope = z();
    for (std::size_t k = 0; k < n_; ++k) out[k] = slope * static_cast<double>(k) * h_;
  }

 private:
  std::size_t n_;
  double h_;
};

// Exact fGn (unit variance) via circulant embedding, cumulated to fBm.
class FgnCumsumEngine : public ScalarPathEngine {
 public:
  FgnCumsumEngine(double hurst, const SimulationMesh& mesh)
      : n_(mesh.n_points), scale_(std::pow(mesh.spacing, hurst)) {
    const double two_h = 2.0 * hurst;
    auto gamma = [two_h](std::size_t k) {
      const double kd = static_cast<double>(k);
      return 0.5 * (std::pow(kd + 1.0, two_h) - 2.0 * std::pow(kd, two_h) +
                    std::pow(std::abs(kd - 1.0), two_h));
    };
    inner_ = std::make_unique<CirculantEngine>(gamma, n_ - 1);
  }

  std::size_t n_points() const override { return n_; }

  void generate(std::uint64_t seed, std::span<double> out) const override {
    thread_local std::vector<double> fgn;
    fgn.resize(n_ - 1);
    inner_->generate(seed, fgn);
    out[0] = 0.0;
    double acc = 0.0;
    for (std::size_t k = 1; k < n_; ++k) {
      acc += fgn[k - 1];
      out[k] = scale_ * acc;
    }
  }

 private:
  std::size_t n_;
  double scale_;
  std::unique_ptr<CirculantEngine> inner_;
};

}  // namespace

std::vector<double> covariance_sequence(const CorrelationModel& model,
                                        const SimulationMesh& mesh) {
  model.validate();
  mesh.validate();
  std::vector<double> cov(mesh.n_points);
  for (std::size_t k = 0; k < mesh.n_points; ++k)
    cov[k] = model.kernel(static_cast<double>(k) * mesh.spacing);
  return cov;
}

std::vector<double> circulant_embed(std::span<const double> cov) {
  if (cov.size() < 2) throw Error(ErrorKind::Usage, "need at least 2 lags to embed");
  const std::size_t m = 2 * (cov.size() - 1);
  auto eig = circulant_eigenvalues(cov, m);
  const double tol = 1e-10 * static_cast<double>(m);
  const double min_eig = *std::min_element(eig.begin(), eig.end());
  if (min_eig < -tol)
    throw Error(ErrorKind::NonEmbeddable,
                "minimal circulant extension has eigenvalue " + std::to_string(min_eig));
  return eig;
}

std::unique_ptr<ScalarPathEngine> make_stationary_engine(const CorrelationModel& model,
                                                         const SimulationMesh& mesh,
                                                         PathEngineKind kind) {
  model.validate();
  mesh.validate();
  if (kind == PathEngineKind::Recursive && model.alpha != 1.0)
    throw Error(ErrorKind::Usage, "recursive engine requires alpha == 1");
  const bool recursive =
      kind == PathEngineKind::Recursive || (kind == PathEngineKind::Auto && model.alpha == 1.0);
  if (recursive) return std::make_unique<RecursiveExpEngine>(model.c, mesh);
  auto cov = [model, h = mesh.spacing](std::size_t k) {
    return model.kernel(static_cast<double>(k) * h);
  };
  return std::make_unique<CirculantEngine>(cov, mesh.n_points);
}

std::unique_ptr<ScalarPathEngine> make_fbm_engine(double hurst, const SimulationMesh& mesh) {
  mesh.validate();
  if (!(hurst > 0.0) || !(hurst <= 1.0))
    throw Error(ErrorKind::Usage, "Hurst index must be in (0, 1]");
  if (hurst == 1.0) return std::make_unique<LineEngine>(mesh);
  if (hurst == 0.5) return std::make_unique<BrownianEngine>(mesh);
  return std::make_unique<FgnCumsumEngine>(hurst, mesh);
}

namespace {

PathBatch run_batch(const ScalarPathEngine& engine, const SimulationMesh& mesh,
                    std::size_t reps, std::uint64_t seed, unsigned workers) {
  PathBatch batch;
  batch.mesh = mesh;
  batch.reps = reps;
  batch.p = 1;
  batch.root_seed = seed;
  batch.values.resize(reps * mesh.n_points);
  parallel_for(reps, workers, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t r = lo; r < hi; ++r)
      engine.generate(component_stream_seed(replication_seed(seed, r), 0),
                      batch.path(r, 0));
  });
  return batch;
}

}  // namespace

PathBatch sample_scalar_paths(const CorrelationModel& model, const SimulationMesh& mesh,
                              std::size_t reps, std::uint64_t seed, PathEngineKind kind,
                              unsigned workers) {
  auto engine = make_stationary_engine(model, mesh, kind);
  return run_batch(*engine, mesh, reps, seed, workers);
}

PathBatch sample_fbm(double hurst, const SimulationMesh& mesh, std::size_t reps,
                     std::uint64_t seed, unsigned workers) {
  auto engine = make_fbm_engine(hurst, mesh);
  return run_batch(*engine, mesh, reps, seed, workers);
}

namespace {

struct VectorSampler {
  const VectorProcessSpec& spec;
  std::vector<std::unique_ptr<ScalarPathEngine>> engines;
  std::vector<double> chol;      // p x p factor of the mixing covariance
  std::vector<double> sqrt_rho;  // per component
  std::vector<double> sqrt_one_minus_rho;

  VectorSampler(const VectorProcessSpec& s, const SimulationMesh& mesh, PathEngineKind kind)
      : spec(s) {
    spec.validate();
    const std::size_t p = spec.p();
    for (std::size_t k = 0; k < p; ++k) {
      CorrelationModel short_range = spec.components[k];
      short_range.r_long = 0.0;  // eta_k is the pure short-range part
      engines.push_back(make_stationary_engine(short_range, mesh, kind));
    }
    chol = spec.mixing().psd_factor();
    for (std::size_t k = 0; k < p; ++k) {
      const double rho = spec.rho(k, spec.horizon_T);
      sqrt_rho.push_back(std::sqrt(rho));
      sqrt_one_minus_rho.push_back(std::sqrt(1.0 - rho));
    }
  }

  // Correlated mixing draws for one replication.
  void draw_z(std::uint64_t rep_seed, std::span<double> z) const {
    const std::size_t p = spec.p();
    NormalSampler g(mixing_stream_seed(rep_seed));
    thread_local std::vector<double> iid;
    iid.resize(p);
    for (std::size_t k = 0; k < p; ++k) iid[k] = g();
    for (std::size_t k = 0; k < p; ++k) {
      double s = 0.0;
      for (std::size_t l = 0; l <= k; ++l) s += chol[k * p + l] * iid[l];
      z[k] = s;
    }
  }
};

}  // namespace

PathBatch sample_vector_paths(const VectorProcessSpec& spec, const SimulationMesh& mesh,
                              std::size_t reps, std::uint64_t seed, PathEngineKind kind,
                              unsigned workers) {
  VectorSampler vs(spec, mesh, kind);
  const std::size_t p = spec.p();
  const std::size_t n = mesh.n_points;
  PathBatch batch;
  batch.mesh = mesh;
  batch.reps = reps;
  batch.p = p;
  batch.root_seed = seed;
  batch.values.resize(reps * p * n);
  parallel_for(reps, workers, [&](std::size_t lo, std::size_t hi) {
    std::vector<double> z(p);
    for (std::size_t r = lo; r < hi; ++r) {
      const std::uint64_t rs = replication_seed(seed, r);
      vs.draw_z(rs, z);
      for (std::size_t k = 0; k < p; ++k) {
        auto out = batch.path(r, k);
        vs.engines[k]->generate(component_stream_seed(rs, k), out);
        const double a = vs.sqrt_one_minus_rho[k];
        const double b = vs.sqrt_rho[k] * z[k];
        for (double& v : out) v = a * v + b;
      }
    }
  });
  return batch;
}

MaximaBatch joint_maxima(const VectorProcessSpec& spec, const SimulationMesh& mesh,
                         std::span<const std::size_t> grid_strides, std::size_t reps,
                         std::uint64_t seed, PathEngineKind kind, unsigned workers) {
  VectorSampler vs(spec, mesh, kind);
  const std::size_t p = spec.p();
  const std::size_t n = mesh.n_points;
  const std::size_t supports = 1 + grid_strides.size();
  for (std::size_t s : grid_strides)
    if (s == 0) throw Error(ErrorKind::Usage, "grid stride must be >= 1");

  MaximaBatch out;
  out.reps = reps;
  out.p = p;
  out.supports = supports;
  out.values.resize(reps * p * supports);

  parallel_for(reps, workers, [&](std::size_t lo, std::size_t hi) {
    std::vector<double> buf(n);
    std::vector<double> z(p);
    std::vector<double> eta_max(supports);
    for (std::size_t r = lo; r < hi; ++r) {
      const std::uint64_t rs = replication_seed(seed, r);
      vs.draw_z(rs, z);
      for (std::size_t k = 0; k < p; ++k) {
        vs.engines[k]->generate(component_stream_seed(rs, k), buf);
        std::fill(eta_max.begin(), eta_max.end(),
                  -std::numeric_limits<double>::infinity());
        double m0 = buf[0];
        for (std::size_t i = 1; i < n; ++i) m0 = std::max(m0, buf[i]);
        eta_max[0] = m0;
        for (std::size_t g = 0; g < grid_strides.size(); ++g) {
          const std::size_t stride = grid_strides[g];
          double mg = buf[0];
          for (std::size_t i = stride; i < n; i += stride) mg = std::max(mg, buf[i]);
          eta_max[1 + g] = mg;
        }
        // max(sqrt(1-rho) eta + sqrt(rho) Z) = sqrt(1-rho) max(eta) + sqrt(rho) Z
        const double a = vs.sqrt_one_minus_rho[k];
        const double b = vs.sqrt_rho[k] * z[k];
        for (std::size_t s = 0; s < supports; ++s)
          out.values[(r * p + k) * supports + s] = a * eta_max[s] + b;
      }
    }
  });
  return out;
}

std::vector<std::size_t> subsample_grid(const PathBatch& batch, const GridSpec& grid,
                                        double alpha) {
  const double t = batch.mesh.horizon();
  const double delta = resolved_spacing(grid, t, alpha);
  return subsample_indices(batch.mesh, delta);
}

void dump_paths_csv(const PathBatch& batch, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path);
  out << "t";
  for (std::size_t r = 0; r < batch.reps; ++r)
    for (std::size_t k = 0; k < batch.p; ++k) out << ",rep" << r << "_k" << k;
  out << "\n";
  out.precision(17);
  for (std::size_t i = 0; i < batch.mesh.n_points; ++i) {
    out << static_cast<double>(i) * batch.mesh.spacing;
    for (std::size_t r = 0; r < batch.reps; ++r)
      for (std::size_t k = 0; k < batch.p; ++k) out << ',' << batch.path(r, k)[i];
    out << "\n";
  }
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

}  // namespace maxgrid
