#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace maxgrid {

// Neumaier compensated summation; sequential in index order, so reductions are
// independent of how work was scheduled across workers.
inline double compensated_sum(std::span<const double> xs) {
  double s = 0.0, c = 0.0;
  for (double x : xs) {
    const double t = s + x;
    if (std::abs(s) >= std::abs(x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
  }
  return s + c;
}

struct MeanVar {
  double mean = 0.0;
  double var = 0.0;
  double stderr_of_mean = 0.0;
  std::size_t n = 0;
};

inline MeanVar mean_var(std::span<const double> xs) {
  MeanVar mv;
  mv.n = xs.size();
  if (mv.n == 0) return mv;
  mv.mean = compensated_sum(xs) / static_cast<double>(mv.n);
  if (mv.n == 1) return mv;
  double s = 0.0, c = 0.0;
  for (double x : xs) {
    const double d = (x - mv.mean) * (x - mv.mean);
    const double t = s + d;
    c += (std::abs(s) >= d) ? (s - t) + d : (d - t) + s;
    s = t;
  }
  mv.var = (s + c) / static_cast<double>(mv.n - 1);
  mv.stderr_of_mean = std::sqrt(mv.var / static_cast<double>(mv.n));
  return mv;
}

inline double norm_pdf(double x) { return std::exp(-0.5 * x * x) * 0.3989422804014327; }

// survival function of N(0,1)
inline double norm_sf(double x) { return 0.5 * std::erfc(x * 0.7071067811865476); }

inline double gumbel_cdf(double x) { return std::exp(-std::exp(-x)); }

inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace maxgrid
