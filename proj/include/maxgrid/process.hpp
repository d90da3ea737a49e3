#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "maxgrid/errors.hpp"

namespace maxgrid {

// Short-range correlation family exp(-C|t|^alpha). The kernel satisfies
// 1 - r(t) = C|t|^alpha + o(|t|^alpha) near 0 and r(t) < 1 for t != 0;
// r_long is the long-range parameter r with r(T) ln T -> r under the
// strong-dependence construction.
struct CorrelationModel {
  double alpha = 1.0;
  double c = 1.0;
  double r_long = 0.0;

  void validate() const {
    if (!(alpha > 0.0) || !(alpha <= 2.0))
      throw Error(ErrorKind::Usage, "alpha must be in (0, 2]");
    if (!(c > 0.0)) throw Error(ErrorKind::Usage, "local scale C must be > 0");
    if (!(r_long >= 0.0) || !std::isfinite(r_long))
      throw Error(ErrorKind::Usage, "long-range parameter r must be finite and >= 0");
  }

  double kernel(double t) const { return std::exp(-c * std::pow(std::abs(t), alpha)); }
};

struct SimulationMesh {
  double spacing = 0.0;
  std::size_t n_points = 0;

  void validate() const {
    if (!(spacing > 0.0)) throw Error(ErrorKind::Usage, "mesh spacing must be > 0");
    if (n_points < 2) throw Error(ErrorKind::Usage, "mesh needs at least 2 points");
  }

  double horizon() const { return spacing * static_cast<double>(n_points - 1); }

  // smallest mesh covering [0, horizon] with spacing <= max_spacing
  static SimulationMesh covering(double horizon, double max_spacing) {
    SimulationMesh m;
    m.spacing = max_spacing;
    m.n_points = static_cast<std::size_t>(std::floor(horizon / max_spacing + 1e-12)) + 1;
    if (m.n_points < 2) m.n_points = 2;
    return m;
  }
};

// Covariance of the mixing vector Z: cov(k,l) = r_kl / sqrt(r_kk r_ll),
// zero whenever r_kk * r_ll == 0.
struct MixingVector {
  std::size_t p = 0;
  std::vector<double> cov;  // p x p row-major

  double at(std::size_t k, std::size_t l) const { return cov[k * p + l]; }

  // Cholesky-like factor L with C = L L^T; tolerates semi-definite input by
  // zeroing degenerate pivots, throws NonPSD if a pivot is materially negative.
  std::vector<double> psd_factor() const {
    const double tol = 1e-10;
    std::vector<double> l(p * p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
      double d = at(j, j);
      for (std::size_t k = 0; k < j; ++k) d -= l[j * p + k] * l[j * p + k];
      if (d < -tol) throw Error(ErrorKind::NonPsd, "mixing covariance is not PSD");
      if (d <= tol) {
        l[j * p + j] = 0.0;
        continue;
      }
      l[j * p + j] = std::sqrt(d);
      for (std::size_t i = j + 1; i < p; ++i) {
        double s = at(i, j);
        for (std::size_t k = 0; k < j; ++k) s -= l[i * p + k] * l[j * p + k];
        l[i * p + j] = s / l[j * p + j];
      }
    }
    return l;
  }
};

// p jointly stationary unit-variance components with cross-dependence matrix
// (r_kl); the diagonal holds each component's own long-range parameter.
struct VectorProcessSpec {
  std::vector<CorrelationModel> components;
  std::vector<double> cross;  // p x p row-major, r_kl >= 0
  double horizon_T = 0.0;

  std::size_t p() const { return components.size(); }
  double r(std::size_t k, std::size_t l) const { return cross[k * p() + l]; }

  void validate() const {
    const std::size_t n = p();
    if (n == 0) throw Error(ErrorKind::Usage, "process needs at least one component");
    if (cross.size() != n * n) throw Error(ErrorKind::Usage, "cross matrix must be p x p");
    if (!(horizon_T > 0.0)) throw Error(ErrorKind::Usage, "horizon T must be > 0");
    for (const auto& cm : components) cm.validate();
    for (std::size_t k = 0; k < n; ++k) {
      if (std::abs(r(k, k) - components[k].r_long) > 1e-12)
        throw Error(ErrorKind::Usage, "cross diagonal must equal each component's r_long");
      for (std::size_t l = 0; l < n; ++l) {
        if (!(r(k, l) >= 0.0) || !std::isfinite(r(k, l)))
          throw Error(ErrorKind::Usage, "cross entries must be finite and >= 0");
        if (std::abs(r(k, l) - r(l, k)) > 1e-12)
          throw Error(ErrorKind::Usage, "cross matrix must be symmetric");
        if (k != l && r(k, k) * r(l, l) == 0.0 && r(k, l) != 0.0)
          throw Error(ErrorKind::Usage,
                      "cross entry must be 0 when a diagonal long-range parameter is 0");
      }
    }
    if (horizon_T > 1.0) {
      const double lt = std::log(horizon_T);
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l)
          if (k != l && r(k, l) / lt >= 1.0)
            throw Error(ErrorKind::Usage, "induced cross-correlation must stay below 1");
    }
    mixing().psd_factor();  // throws NonPSD if inconsistent
  }

  MixingVector mixing() const {
    const std::size_t n = p();
    MixingVector mv;
    mv.p = n;
    mv.cov.assign(n * n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t l = 0; l < n; ++l) {
        const double denom = r(k, k) * r(l, l);
        mv.cov[k * n + l] = denom > 0.0 ? r(k, l) / std::sqrt(denom) : (k == l ? 1.0 : 0.0);
      }
    }
    return mv;
  }

  // rho_kk(T) = r_kk / ln T, the variance share of the common level shift
  double rho(std::size_t k, double T) const {
    const double lt = std::log(T);
    if (!(lt > components[k].r_long))
      throw Error(ErrorKind::InvalidHorizon, "need ln T > r_kk for the random-effect mixture");
    return components[k].r_long / lt;
  }
};

}  // namespace maxgrid
