#pragma once

// Seeded RNG with explicitly-coded distributions. std::mt19937_64 has a
// standardized output sequence, but std::uniform_real_distribution does not,
// so reproducible-bytes runs must roll their own double conversion.

#include <cmath>
#include <cstdint>
#include <random>

namespace solvgeo {

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // Uniform in [0, 1) with 53 random bits.
    double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    // Log-uniform in [lo, hi], lo > 0.
    double log_uniform(double lo, double hi) {
        return std::exp(uniform(std::log(lo), std::log(hi)));
    }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(eng_() % static_cast<std::uint64_t>(hi - lo + 1));
    }

    double sign() { return unit() < 0.5 ? -1.0 : 1.0; }

    std::uint64_t raw() { return eng_(); }

  private:
    std::mt19937_64 eng_;
};

}  // namespace solvgeo
