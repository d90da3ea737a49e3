#include "maxgrid/limit_laws.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "maxgrid/gauss_hermite.hpp"
#include "maxgrid/rng.hpp"
#include "maxgrid/stats.hpp"

namespace maxgrid {

namespace {

constexpr double kArgClamp = 40.0;
constexpr double kInvSqrt2Pi = 0.3989422804014327;

double clamp_arg(double v) { return std::clamp(v, -kArgClamp, kArgClamp); }

}  // namespace

NormConstants norm_constants(double T, double alpha, double c, SupportKind kind, double delta,
                             double h_constant) {
  if (!(alpha > 0.0) || !(alpha <= 2.0)) throw Error(ErrorKind::Usage, "alpha must be in (0,2]");
  if (!(c > 0.0)) throw Error(ErrorKind::Usage, "C must be > 0");
  NormConstants nc;
  nc.a = a_norm(T);
  switch (kind) {
    case SupportKind::Sparse:
      if (!(delta > 0.0))
        throw Error(ErrorKind::MissingConstant, "sparse normalization needs the grid spacing");
      nc.b = nc.a - std::log(nc.a * delta * std::sqrt(2.0 * M_PI)) / nc.a;
      return nc;
    case SupportKind::Pickands:
    case SupportKind::Dense:
    case SupportKind::Continuous: {
      if (!(h_constant > 0.0))
        throw Error(ErrorKind::MissingConstant,
                    "normalization needs a positive Pickands-type constant");
      const double inner = kInvSqrt2Pi * std::pow(c, 1.0 / alpha) * h_constant *
                           std::pow(nc.a, -1.0 + 2.0 / alpha);
      nc.b = nc.a + std::log(inner) / nc.a;
      return nc;
    }
  }
  throw Error(ErrorKind::Usage, "unknown support kind");
}

const char* case_name(TheoremCase::Tag tag) {
  switch (tag) {
    case TheoremCase::Tag::T21_i: return "T21_i";
    case TheoremCase::Tag::T21_ii: return "T21_ii";
    case TheoremCase::Tag::T21_iii: return "T21_iii";
    case TheoremCase::Tag::T21_iv: return "T21_iv";
    case TheoremCase::Tag::T22_i: return "T22_i";
    case TheoremCase::Tag::T22_ii: return "T22_ii";
    case TheoremCase::Tag::T22_iii: return "T22_iii";
  }
  return "unknown";
}

TheoremCase::Tag case_tag_from_name(const std::string& name) {
  if (name == "T21_i") return TheoremCase::Tag::T21_i;
  if (name == "T21_ii") return TheoremCase::Tag::T21_ii;
  if (name == "T21_iii") return TheoremCase::Tag::T21_iii;
  if (name == "T21_iv") return TheoremCase::Tag::T21_iv;
  if (name == "T22_i") return TheoremCase::Tag::T22_i;
  if (name == "T22_ii") return TheoremCase::Tag::T22_ii;
  if (name == "T22_iii") return TheoremCase::Tag::T22_iii;
  throw Error(ErrorKind::Usage, "unknown theorem case: " + name);
}

double BatchCaseConstants::h_alpha() const { return pick(cb_->h_alpha()); }
double BatchCaseConstants::h_d(double d) const { return pick(cb_->h_d(d)); }
double BatchCaseConstants::h_xy(double d, double x, double y) const {
  return pick(cb_->h_xy(d, x, y));
}
double BatchCaseConstants::h_z1z2(double d1, double d2, double z1, double z2) const {
  return pick(cb_->h_z1z2(d1, d2, z1, z2));
}
double BatchCaseConstants::h_x_z1z2(double d1, double d2, double x, double z1,
                                    double z2) const {
  return pick(cb_->h_x_z1z2(d1, d2, x, z1, z2));
}

double f_case(const TheoremCase& c, const CaseConstants* k, double x, double y1, double y2) {
  x = clamp_arg(x);
  y1 = clamp_arg(y1);
  y2 = clamp_arg(y2);
  if (c.needs_constants() && k == nullptr)
    throw Error(ErrorKind::MissingConstant,
                std::string(case_name(c.tag)) + " needs estimated constants");
  switch (c.tag) {
    case TheoremCase::Tag::T21_i:
      return std::exp(-x) + std::exp(-y1) + std::exp(-y2);
    case TheoremCase::Tag::T21_ii: {
      if (!(c.theta1 >= 0.0) || !(c.theta2 >= 0.0))
        throw Error(ErrorKind::Usage, "theta parameters must be >= 0");
      const double theta = c.theta2 - c.theta1;
      double f = std::exp(-x) + std::exp(-y1) + std::exp(-y2);
      if (y1 > y2 + theta)
        f -= std::exp(-y1 - c.theta1);
      else
        f -= std::exp(-y2 - c.theta2);
      return f;
    }
    case TheoremCase::Tag::T21_iii: {
      const double ha = k->h_alpha();
      const double hd2 = k->h_d(c.d2);
      return std::exp(-x) + std::exp(-y1) + std::exp(-y2) -
             k->h_xy(c.d2, std::log(ha) + x, std::log(hd2) + y2);
    }
    case TheoremCase::Tag::T21_iv:
      return std::exp(-y1) + std::exp(-std::min(x, y2));
    case TheoremCase::Tag::T22_i: {
      if (c.d1 == c.d2) throw Error(ErrorKind::EqualSpacings, "T22_i needs D1 != D2");
      const double ha = k->h_alpha();
      const double h1 = k->h_d(c.d1);
      const double h2 = k->h_d(c.d2);
      const double la = std::log(ha), l1 = std::log(h1), l2 = std::log(h2);
      return std::exp(-x) + std::exp(-y1) + std::exp(-y2) -
             k->h_xy(c.d1, la + x, l1 + y1) - k->h_xy(c.d2, la + x, l2 + y2) -
             k->h_z1z2(c.d1, c.d2, l1 + y1, l2 + y2) +
             k->h_x_z1z2(c.d1, c.d2, la + x, l1 + y1, l2 + y2);
    }
    case TheoremCase::Tag::T22_ii: {
      const double m = std::min(x, y2);
      const double ha = k->h_alpha();
      const double h1 = k->h_d(c.d1);
      return std::exp(-m) + std::exp(-y1) -
             k->h_xy(c.d1, std::log(ha) + m, std::log(h1) + y1);
    }
    case TheoremCase::Tag::T22_iii:
      return std::exp(-std::min(x, std::min(y1, y2)));
  }
  throw Error(ErrorKind::Usage, "unknown theorem case");
}

namespace {

std::vector<double> case_exponents(const PiterbargParams& params,
                                   std::span<const TheoremCase> cases,
                                   const CaseConstants* constants, std::span<const double> x,
                                   std::span<const double> y1, std::span<const double> y2) {
  const std::size_t p = params.p();
  if (x.size() != p || y1.size() != p || y2.size() != p)
    throw Error(ErrorKind::Usage, "argument vectors must have length p");
  if (cases.size() != p && cases.size() != 1)
    throw Error(ErrorKind::Usage, "need one theorem case per component (or one shared)");
  std::vector<double> f(p);
  for (std::size_t k = 0; k < p; ++k) {
    const TheoremCase& c = cases.size() == 1 ? cases[0] : cases[k];
    f[k] = f_case(c, constants, x[k], y1[k], y2[k]);
  }
  return f;
}

double mixture_value(const PiterbargParams& params, std::span<const double> f,
                     const Integration& integ) {
  const std::size_t p = params.p();
  Integration::Method method = integ.method;
  if (method == Integration::Method::Auto) {
    if (params.weakly_dependent())
      method = Integration::Method::ClosedForm;
    else if (p == 1)
      method = Integration::Method::GaussHermite;
    else
      method = Integration::Method::MonteCarlo;
  }

  switch (method) {
    case Integration::Method::ClosedForm: {
      if (!params.weakly_dependent())
        throw Error(ErrorKind::Usage, "closed form needs all r_kk = 0");
      double s = 0.0;
      for (double fk : f) s += fk;
      return std::exp(-s);
    }
    case Integration::Method::GaussHermite: {
      if (p != 1)
        throw Error(ErrorKind::Usage, "Gauss-Hermite integration is for p = 1");
      const double r = params.r_diag[0];
      if (r == 0.0) return std::exp(-f[0]);
      const GaussHermite gh = gauss_hermite(integ.gh_order);
      const double sqrt2r = std::sqrt(2.0 * r);
      double acc = 0.0;
      for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
        const double z = std::sqrt(2.0) * gh.nodes[i];
        acc += gh.weights[i] * std::exp(-f[0] * std::exp(-r + sqrt2r * z));
      }
      return acc / std::sqrt(M_PI);
    }
    case Integration::Method::MonteCarlo: {
      const auto chol = params.mixing.psd_factor();
      NormalSampler g(integ.mc_seed);
      std::vector<double> iid(p), z(p);
      std::vector<double> samples(integ.mc_reps);
      for (std::size_t rep = 0; rep < integ.mc_reps; ++rep) {
        for (std::size_t k = 0; k < p; ++k) iid[k] = g();
        double s = 0.0;
        for (std::size_t k = 0; k < p; ++k) {
          double zk = 0.0;
          for (std::size_t l = 0; l <= k; ++l) zk += chol[k * p + l] * iid[l];
          const double r = params.r_diag[k];
          s += f[k] * std::exp(-r + std::sqrt(2.0 * r) * zk);
        }
        samples[rep] = std::exp(-s);
      }
      return mean_var(samples).mean;
    }
    case Integration::Method::Auto:
      break;
  }
  throw Error(ErrorKind::Usage, "unresolved integration method");
}

}  // namespace

double eval_G(const PiterbargParams& params, std::span<const TheoremCase> cases,
              const CaseConstants* constants, std::span<const double> x,
              std::span<const double> y1, std::span<const double> y2,
              const Integration& integ) {
  if (params.mixing.p != params.p())
    throw Error(ErrorKind::Usage, "mixing covariance size must match r_diag");
  const auto f = case_exponents(params, cases, constants, x, y1, y2);
  return mixture_value(params, f, integ);
}

double check_max_stability(const GEvaluator& g, unsigned n,
                           std::span<const LatticePoint> points) {
  if (n < 1) throw Error(ErrorKind::Usage, "n must be >= 1");
  const double shift = std::log(static_cast<double>(n));
  double worst = 0.0;
  std::vector<double> xs, y1s, y2s;
  for (const auto& pt : points) {
    const double base = g(pt.x, pt.y1, pt.y2);
    xs = pt.x;
    y1s = pt.y1;
    y2s = pt.y2;
    for (auto& v : xs) v += shift;
    for (auto& v : y1s) v += shift;
    for (auto& v : y2s) v += shift;
    const double shifted = g(xs, y1s, y2s);
    worst = std::max(worst, std::abs(std::pow(shifted, static_cast<double>(n)) - base));
  }
  return worst;
}

double check_max_stability_conditional(const PiterbargParams& params,
                                       std::span<const TheoremCase> cases,
                                       const CaseConstants* constants, unsigned n,
                                       std::span<const LatticePoint> points,
                                       unsigned gh_order) {
  if (n < 1) throw Error(ErrorKind::Usage, "n must be >= 1");
  const double shift = std::log(static_cast<double>(n));
  const GaussHermite gh = gauss_hermite(gh_order);
  const std::size_t p = params.p();
  double worst = 0.0;
  std::vector<double> xs, y1s, y2s;
  for (const auto& pt : points) {
    const auto f0 = case_exponents(params, cases, constants, pt.x, pt.y1, pt.y2);
    xs = pt.x;
    y1s = pt.y1;
    y2s = pt.y2;
    for (auto& v : xs) v += shift;
    for (auto& v : y1s) v += shift;
    for (auto& v : y2s) v += shift;
    const auto fs = case_exponents(params, cases, constants, xs, y1s, y2s);
    // conditional on Z = z the distribution is exp(-sum f_k w_k(z)); the
    // shifted version to the n-th power must match node by node
    for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
      const double z = std::sqrt(2.0) * gh.nodes[i];
      double s0 = 0.0, s1 = 0.0;
      for (std::size_t k = 0; k < p; ++k) {
        const double r = params.r_diag[k];
        const double w = std::exp(-r + std::sqrt(2.0 * r) * z);
        s0 += f0[k] * w;
        s1 += fs[k] * w;
      }
      const double direct = std::exp(-s0);
      const double powered = std::pow(std::exp(-s1), static_cast<double>(n));
      worst = std::max(worst, std::abs(powered - direct));
    }
  }
  return worst;
}

double gumbel_marginal(const GEvaluator& g, std::size_t p, std::size_t coord, double z) {
  if (coord >= 3 * p) throw Error(ErrorKind::Usage, "coordinate out of range");
  std::vector<double> x(p, kArgClamp), y1(p, kArgClamp), y2(p, kArgClamp);
  const std::size_t role = coord / p;
  const std::size_t k = coord % p;
  (role == 0 ? x : role == 1 ? y1 : y2)[k] = z;
  return g(x, y1, y2);
}

std::string constant_estimate_id(const ConstantEstimate& e) {
  const std::string row = constants_csv(std::span<const ConstantEstimate>(&e, 1));
  std::ostringstream out;
  out << e.kind << '-' << std::hex << fnv1a64(row);
  return out.str();
}

std::string theorem_case_json(const TheoremCase& tc,
                              std::span<const ConstantEstimate> constants) {
  nlohmann::json j;
  j["tag"] = case_name(tc.tag);
  if (tc.tag == TheoremCase::Tag::T21_ii) {
    j["theta1"] = tc.theta1;
    j["theta2"] = tc.theta2;
  }
  if (!std::isnan(tc.d1)) j["d1"] = tc.d1;
  if (!std::isnan(tc.d2)) j["d2"] = tc.d2;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& e : constants) {
    nlohmann::json r;
    r["id"] = constant_estimate_id(e);
    r["kind"] = e.kind;
    if (!std::isnan(e.d1)) r["d1"] = e.d1;
    if (!std::isnan(e.d2)) r["d2"] = e.d2;
    r["value"] = e.value;
    r["stderr"] = e.stderr_;
    r["lambda"] = e.lambda;
    r["reps"] = e.reps;
    rows.push_back(std::move(r));
  }
  j["constants"] = rows;
  return j.dump();
}

}  // namespace maxgrid
