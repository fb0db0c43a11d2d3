#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "rerope/linalg.hpp"

namespace rerope {

/// Deterministic random source. Draws go through hand-rolled mappings from
/// raw mt19937_64 output so sequences are identical across standard library
/// implementations (std::uniform_real_distribution is not portable).
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 42) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  Vec3 vec3(double lo, double hi) {
    const double a = uniform(lo, hi);
    const double b = uniform(lo, hi);
    const double c = uniform(lo, hi);
    return {a, b, c};
  }

  /// Uniform rotation, Shoemake's subgroup algorithm.
  Quaternion unit_quaternion() {
    const double u1 = uniform();
    const double u2 = uniform();
    const double u3 = uniform();
    const double two_pi = 2.0 * std::numbers::pi;
    const double r1 = std::sqrt(1.0 - u1);
    const double r2 = std::sqrt(u1);
    return {r2 * std::cos(two_pi * u3), r1 * std::sin(two_pi * u2),
            r1 * std::cos(two_pi * u2), r2 * std::sin(two_pi * u3)};
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rerope
