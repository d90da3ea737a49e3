#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "maxgrid/grid.hpp"
#include "maxgrid/pickands.hpp"
#include "maxgrid/process.hpp"

namespace maxgrid {

inline double a_norm(double T) {
  if (!(T > 1.0)) throw Error(ErrorKind::Usage, "normalization needs T > 1");
  return std::sqrt(2.0 * std::log(T));
}

struct NormConstants {
  double a = 0.0;
  double b = 0.0;
};

enum class SupportKind { Continuous, Sparse, Pickands, Dense };

// Location constants:
//   sparse:              b = a - ln(a delta sqrt(2 pi)) / a
//   Pickands/continuous: b = a + ln((2 pi)^{-1/2} C^{1/alpha} H a^{-1+2/alpha}) / a
// where H is H_{D,alpha} for a Pickands grid and H_alpha for dense/continuous.
NormConstants norm_constants(double T, double alpha, double c, SupportKind kind,
                             double delta = std::numeric_limits<double>::quiet_NaN(),
                             double h_constant = std::numeric_limits<double>::quiet_NaN());

struct TheoremCase {
  enum class Tag { T21_i, T21_ii, T21_iii, T21_iv, T22_i, T22_ii, T22_iii };
  Tag tag = Tag::T21_i;
  double theta1 = 0.0;  // T21_ii only
  double theta2 = 0.0;
  double d1 = std::numeric_limits<double>::quiet_NaN();  // Pickands spacing of grid 1
  double d2 = std::numeric_limits<double>::quiet_NaN();  // Pickands spacing of grid 2

  bool needs_constants() const {
    return tag == Tag::T21_iii || tag == Tag::T22_i || tag == Tag::T22_ii;
  }
};

const char* case_name(TheoremCase::Tag tag);
TheoremCase::Tag case_tag_from_name(const std::string& name);

// Estimated Pickands-type constants consumed by the case exponents.
class CaseConstants {
 public:
  virtual ~CaseConstants() = default;
  virtual double h_alpha() const = 0;
  virtual double h_d(double d) const = 0;
  virtual double h_xy(double d, double x, double y) const = 0;
  virtual double h_z1z2(double d1, double d2, double z1, double z2) const = 0;
  virtual double h_x_z1z2(double d1, double d2, double x, double z1, double z2) const = 0;
};

// Backed by one common-random-number maxima batch; comparative identities are
// exact per batch.
class BatchCaseConstants : public CaseConstants {
 public:
  explicit BatchCaseConstants(const ConstantBatch& batch, bool extrapolated = false)
      : cb_(&batch), extrapolated_(extrapolated) {}
  double h_alpha() const override;
  double h_d(double d) const override;
  double h_xy(double d, double x, double y) const override;
  double h_z1z2(double d1, double d2, double z1, double z2) const override;
  double h_x_z1z2(double d1, double d2, double x, double z1, double z2) const override;

 private:
  double pick(const ConstantEstimate& e) const {
    return extrapolated_ ? e.value_extrapolated : e.value;
  }
  const ConstantBatch* cb_;
  bool extrapolated_;
};

// Case exponent f(x, y1, y2), exactly as printed per theorem case; arguments
// are clamped to [-40, 40] before exponentials.
double f_case(const TheoremCase& c, const CaseConstants* constants, double x, double y1,
              double y2);

struct PiterbargParams {
  std::vector<double> r_diag;
  MixingVector mixing;

  std::size_t p() const { return r_diag.size(); }
  bool weakly_dependent() const {
    for (double r : r_diag)
      if (r != 0.0) return false;
    return true;
  }
};

struct Integration {
  enum class Method { Auto, ClosedForm, GaussHermite, MonteCarlo };
  Method method = Method::Auto;
  unsigned gh_order = 64;
  std::size_t mc_reps = 100000;
  std::uint64_t mc_seed = 1;
};

// G(x, y1, y2) = E exp(-sum_k f(x_k, y_k1, y_k2) e^{-r_kk + sqrt(2 r_kk) Z_k}).
// All r_kk = 0 collapses to exp(-sum f); p = 1 with r > 0 uses Gauss-Hermite;
// dependent p > 1 uses Monte Carlo over Z.
double eval_G(const PiterbargParams& params, std::span<const TheoremCase> cases,
              const CaseConstants* constants, std::span<const double> x,
              std::span<const double> y1, std::span<const double> y2,
              const Integration& integ = {});

using GEvaluator = std::function<double(std::span<const double>, std::span<const double>,
                                        std::span<const double>)>;

struct LatticePoint {
  std::vector<double> x, y1, y2;
};

// max over sample points of |G(. + ln n)^n - G(.)|
double check_max_stability(const GEvaluator& g, unsigned n, std::span<const LatticePoint> points);

// Diagnostic counterpart: the identity applied inside the mixture, i.e. with the
// conditional distribution given Z. Exact for every case by shift-homogeneity.
double check_max_stability_conditional(const PiterbargParams& params,
                                       std::span<const TheoremCase> cases,
                                       const CaseConstants* constants, unsigned n,
                                       std::span<const LatticePoint> points,
                                       unsigned gh_order = 64);

// Marginal CDF of one of the 3p coordinates with the others at +40.
double gumbel_marginal(const GEvaluator& g, std::size_t p, std::size_t coord, double z);

// Stable identifier for a constant estimate record (content hash of its row).
std::string constant_estimate_id(const ConstantEstimate& e);

// JSON description of a theorem case: tag, parameters, and the constant values
// it consumes, with provenance ids pointing at the estimate records.
std::string theorem_case_json(const TheoremCase& tc,
                              std::span<const ConstantEstimate> constants);

}  // namespace maxgrid
