#ifndef GRIDREACH_RNG_HPP
#define GRIDREACH_RNG_HPP

// Deterministic random sampling helpers.  The mt19937_64 output stream is
// pinned by the standard, but the standard *distributions* are not, so we
// map raw engine output to doubles ourselves; results are identical across
// toolchains, which keeps goldens and seeded tests portable.

#include <cmath>
#include <cstdint>
#include <random>

namespace gridreach {

// splitmix64 — used to mix several seed components into one engine seed.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::mt19937_64 make_rng(std::uint64_t a, std::uint64_t b = 0,
                                std::uint64_t c = 0) {
  return std::mt19937_64(mix_seed(a ^ mix_seed(b ^ mix_seed(c))));
}

// Uniform in [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& g) {
  return std::ldexp(static_cast<double>(g() >> 11), -53);
}

inline double uniform(std::mt19937_64& g, double lo, double hi) {
  return lo + (hi - lo) * uniform01(g);
}

// Standard normal via Box–Muller (the pair's second half is discarded so
// call sites stay stateless).
inline double normal(std::mt19937_64& g) {
  double u1 = uniform01(g);
  while (u1 <= 0.0) u1 = uniform01(g);
  const double u2 = uniform01(g);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.14159265358979323846 * u2);
}

}  // namespace gridreach

#endif
