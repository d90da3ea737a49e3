#pragma once

#include <vector>

namespace maxgrid {

// Nodes/weights for \int e^{-t^2} g(t) dt (physicists' convention).
// E[g(Z)] for Z ~ N(0,1) is then pi^{-1/2} sum_i w_i g(sqrt(2) t_i).
struct GaussHermite {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussHermite gauss_hermite(unsigned order);

}  // namespace maxgrid
