#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace bpp {

/* splitmix64 finalizer; also used to hash seed components. */
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t h, std::uint64_t x) {
  return mix64(h ^ (x + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
}

inline std::uint64_t hash_str(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/* Deterministic across platforms; every distribution below is hand-rolled on
   top of the raw 64-bit stream so that a fixed seed reproduces runs bit for
   bit regardless of the standard library in use.  Fresh statistically
   independent streams come from derive(), keyed by call-site labels. */
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(mix64(seed ^ 0x6a09e667f3bcc909ULL)) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  Rng derive(std::uint64_t label) const {
    return Rng(hash_combine(state_, label));
  }

  /* uniform on (0,1); never returns an endpoint */
  double uniform() {
    while (true) {
      const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
      if (u > 0.0) return u;
    }
  }

  std::uint64_t uniform_int(std::uint64_t n) {  // on {0,...,n-1}
    const std::uint64_t lim = ~std::uint64_t{0} - ~std::uint64_t{0} % n;
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= lim);
    return v % n;
  }

  double exponential() { return -std::log(uniform()); }

  double normal() {  // Box-Muller, one deviate per pair of uniforms
    const double r = std::sqrt(2.0 * exponential());
    const double a = 6.283185307179586476925286766559 * uniform();
    return r * std::cos(a);
  }

  /* Marsaglia-Tsang; shape < 1 via the boost u^(1/shape). */
  double gamma(double shape, double rate = 1.0) {
    if (shape < 1.0) {
      const double u = uniform();
      return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    while (true) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
    }
  }

  double chi_squared(double df) { return 2.0 * gamma(0.5 * df); }

  double student_t(double nu) { return normal() / std::sqrt(chi_squared(nu) / nu); }

  double beta(double a, double b) {
    const double x = gamma(a);
    const double y = gamma(b);
    return x / (x + y);
  }

 private:
  std::uint64_t state_;
};

inline std::uint64_t derive_seed(std::uint64_t global, std::string_view id,
                                 std::uint64_t replicate) {
  std::uint64_t h = mix64(global);
  h = hash_combine(h, hash_str(id));
  h = hash_combine(h, replicate);
  return h;
}

}  // namespace bpp
