#pragma once

#include <cmath>
#include <cstdint>

namespace maxgrid {

inline constexpr std::uint64_t kGolden64 = 0x9e3779b97f4a7c15ULL;

// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Counter-based seed splitting: the per-replication seed is a pure function of
// (root, counter), so worker scheduling cannot change any stream.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t counter) {
  return mix64(root + kGolden64 * (counter + 1));
}

// Sub-stream within one replication (component paths, mixing vector, ...).
inline std::uint64_t child_seed(std::uint64_t seed, std::uint64_t tag) {
  return mix64(seed ^ mix64(kGolden64 * (tag + 0x632be59bd9b4e019ULL)));
}

class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed) {
    // splitmix64 expansion of the seed, as recommended by the generator authors
    std::uint64_t x = seed;
    for (auto& si : s_) {
      x += kGolden64;
      si = mix64(x);
    }
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // uniform on [0,1), 53-bit resolution
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // uniform on (0,1), never 0, safe for log()
  double uniform_pos() { return (static_cast<double>(next() >> 12) + 0.5) * 0x1.0p-52; }

 private:
  static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }
  std::uint64_t s_[4];
};

namespace detail {

// Marsaglia-Tsang ziggurat tables, 128 layers.
struct ZigguratTables {
  std::uint32_t kn[128];
  double wn[128];
  double fn[128];

  ZigguratTables() {
    const double m1 = 2147483648.0;
    double dn = 3.442619855899;
    double tn = dn;
    const double vn = 9.91256303526217e-3;

    const double q = vn / std::exp(-0.5 * dn * dn);
    kn[0] = static_cast<std::uint32_t>((dn / q) * m1);
    kn[1] = 0;
    wn[0] = q / m1;
    wn[127] = dn / m1;
    fn[0] = 1.0;
    fn[127] = std::exp(-0.5 * dn * dn);
    for (int i = 126; i >= 1; --i) {
      dn = std::sqrt(-2.0 * std::log(vn / dn + std::exp(-0.5 * dn * dn)));
      kn[i + 1] = static_cast<std::uint32_t>((dn / tn) * m1);
      tn = dn;
      fn[i] = std::exp(-0.5 * dn * dn);
      wn[i] = dn / m1;
    }
  }
};

inline const ZigguratTables& ziggurat() {
  static const ZigguratTables tables;
  return tables;
}

}  // namespace detail

// Standard normal sampler (ziggurat fast path, exact tail via Marsaglia's method).
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : rng_(seed) {}

  double operator()() {
    const auto& t = detail::ziggurat();
    for (;;) {
      const std::uint64_t u = rng_.next();
      const std::int32_t hz = static_cast<std::int32_t>(u >> 32);
      const std::uint32_t iz = static_cast<std::uint32_t>(hz) & 127u;
      if (mag32(hz) < t.kn[iz]) return hz * t.wn[iz];
      const double x = fix(hz, iz);
      if (!std::isnan(x)) return x;
    }
  }

  double uniform01() { return rng_.uniform01(); }
  std::uint64_t next_u64() { return rng_.next(); }

 private:
  static std::uint32_t mag32(std::int32_t hz) {
    return hz < 0 ? static_cast<std::uint32_t>(-static_cast<std::int64_t>(hz))
                  : static_cast<std::uint32_t>(hz);
  }

  double fix(std::int32_t hz, std::uint32_t iz) {
    const auto& t = detail::ziggurat();
    constexpr double r = 3.442619855899;
    for (;;) {
      double x = hz * t.wn[iz];
      if (iz == 0) {
        double xx, yy;
        do {
          xx = -std::log(rng_.uniform_pos()) / r;
          yy = -std::log(rng_.uniform_pos());
        } while (yy + yy < xx * xx);
        return hz > 0 ? r + xx : -(r + xx);
      }
      if (t.fn[iz] + rng_.uniform01() * (t.fn[iz - 1] - t.fn[iz]) < std::exp(-0.5 * x * x))
        return x;
      const std::uint64_t u = rng_.next();
      hz = static_cast<std::int32_t>(u >> 32);
      iz = static_cast<std::uint32_t>(hz) & 127u;
      if (mag32(hz) < t.kn[iz]) return hz * t.wn[iz];
    }
  }

  Xoshiro256pp rng_;
};

}  // namespace maxgrid
