#pragma once
// Seeded random stream with distribution code pinned here rather than taken
// from <random>, whose distributions are implementation-defined. Episode
// files must come out byte-identical for the same seed on any toolchain.

#include <cmath>
#include <cstdint>
#include <random>

#include "fbench/geometry.hpp"

namespace fbench {

class Rng {
 public:
  Rng() : engine_(0) {}
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Derive an independent stream, e.g. for perception vs. world noise.
  static Rng stream(std::uint64_t seed, std::uint64_t stream_id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream_id), 0x9e3779b9u};
    Rng r;
    r.engine_.seed(seq);
    return r;
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  int uniform_int(int n) { return static_cast<int>(uniform() * n); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Box-Muller; the spare deviate is cached so the stream stays 1:1 with calls.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * kPi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * kPi * u2);
  }

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

  /// Normal truncated to |x| <= bound_sigmas * sigma by resampling.
  double truncated_normal(double sigma, double bound_sigmas) {
    if (sigma <= 0.0) return 0.0;
    for (;;) {
      const double z = normal();
      if (std::abs(z) <= bound_sigmas) return z * sigma;
    }
  }

  Vec3 unit_vector() {
    for (;;) {
      Vec3 v(normal(), normal(), normal());
      const double n = v.norm();
      if (n > 1e-9) return v / n;
    }
  }

  bool operator==(const Rng& o) const {
    return engine_ == o.engine_ && has_spare_ == o.has_spare_ && (!has_spare_ || spare_ == o.spare_);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace fbench
