#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "maxgrid/errors.hpp"
#include "maxgrid/process.hpp"

namespace maxgrid {

// Uniform grids containing t = 0. Three parametric forms:
//   ConstantSpacing:  delta(T) = delta0
//   PickandsSpacing:  delta(T) = D (2 ln T)^{-1/alpha}
//   PowerLogSpacing:  delta(T) = (2 ln T)^{-beta/alpha}
struct GridSpec {
  enum class Form { ConstantSpacing, PickandsSpacing, PowerLogSpacing };
  Form form = Form::ConstantSpacing;
  double param = 1.0;  // delta0, D, or beta

  void validate() const {
    switch (form) {
      case Form::ConstantSpacing:
        if (!(param > 0.0)) throw Error(ErrorKind::Usage, "constant spacing must be > 0");
        break;
      case Form::PickandsSpacing:
        if (!(param > 0.0)) throw Error(ErrorKind::Usage, "Pickands D must be > 0");
        break;
      case Form::PowerLogSpacing:
        if (!(param > 0.0)) throw Error(ErrorKind::Usage, "beta must be > 0");
        break;
    }
  }
};

struct GridKind {
  enum class Tag { Sparse, Pickands, Dense };
  Tag tag = Tag::Sparse;
  double d = 0.0;  // only for Pickands

  bool operator==(const GridKind& o) const { return tag == o.tag && (tag != Tag::Pickands || d == o.d); }
};

// Evaluates D = lim (2 ln T)^{1/alpha} delta(T) symbolically.
inline GridKind classify_grid(const GridSpec& grid, double /*alpha*/) {
  grid.validate();
  switch (grid.form) {
    case GridSpec::Form::ConstantSpacing:
      return {GridKind::Tag::Sparse, 0.0};
    case GridSpec::Form::PickandsSpacing:
      return {GridKind::Tag::Pickands, grid.param};
    case GridSpec::Form::PowerLogSpacing:
      if (grid.param == 1.0)
        throw Error(ErrorKind::UnclassifiableGrid,
                    "beta = 1 is degenerate; use PickandsSpacing instead");
      return grid.param > 1.0 ? GridKind{GridKind::Tag::Dense, 0.0}
                              : GridKind{GridKind::Tag::Sparse, 0.0};
  }
  throw Error(ErrorKind::Usage, "unknown grid form");
}

// The actual spacing delta(T) of the grid at horizon T.
inline double resolved_spacing(const GridSpec& grid, double T, double alpha) {
  grid.validate();
  if (!(T > 1.0)) throw Error(ErrorKind::Usage, "grid spacing needs T > 1");
  const double l2t = 2.0 * std::log(T);
  switch (grid.form) {
    case GridSpec::Form::ConstantSpacing:
      return grid.param;
    case GridSpec::Form::PickandsSpacing:
      return grid.param * std::pow(l2t, -1.0 / alpha);
    case GridSpec::Form::PowerLogSpacing:
      return std::pow(l2t, -grid.param / alpha);
  }
  throw Error(ErrorKind::Usage, "unknown grid form");
}

// Numeric diagnostic for the symbolic classification: (2 ln T)^{1/alpha} delta(T)
// along a probe schedule of horizons.
inline std::vector<double> grid_scale_probe(const GridSpec& grid, double alpha,
                                            std::span<const double> t_schedule) {
  std::vector<double> out;
  out.reserve(t_schedule.size());
  for (double t : t_schedule) {
    const double s = std::pow(2.0 * std::log(t), 1.0 / alpha);
    out.push_back(s * resolved_spacing(grid, t, alpha));
  }
  return out;
}

// Mesh indices {k : k*h in grid}: requires the grid spacing to be an integer
// multiple of the mesh step within relative tolerance 1e-9.
inline std::size_t subsample_stride(const SimulationMesh& mesh, double grid_spacing) {
  mesh.validate();
  if (!(grid_spacing > 0.0)) throw Error(ErrorKind::Usage, "grid spacing must be > 0");
  const double ratio = grid_spacing / mesh.spacing;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * ratio)
    throw Error(ErrorKind::GridMeshMismatch,
                "grid spacing " + std::to_string(grid_spacing) +
                    " is not an integer multiple of mesh step " + std::to_string(mesh.spacing));
  return static_cast<std::size_t>(rounded);
}

inline std::vector<std::size_t> subsample_indices(const SimulationMesh& mesh,
                                                  double grid_spacing) {
  const std::size_t stride = subsample_stride(mesh, grid_spacing);
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < mesh.n_points; k += stride) idx.push_back(k);
  return idx;
}

}  // namespace maxgrid
