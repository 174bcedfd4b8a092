#ifndef RMNOISE_RNG_HPP
#define RMNOISE_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "rmnoise/types.hpp"

namespace rmnoise {

// Repo-wide generator: mt19937_64 engine with explicit Box-Muller normals and
// inverse-transform exponentials, so every draw is fully specified by the
// seed and results are bit-identical across runs and thread counts.
inline constexpr const char* kRngName = "mt19937_64/boxmuller";

// Replicate seed = splitmix64 output stream of the run seed at the given
// index: finalize(seed + (index+1) * 0x9E3779B97F4A7C15).
inline std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + (index + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // uniform on [0, 1) with 53-bit resolution
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // uniform on (0, 1]; safe as a log argument
    double uniform_pos() {
        return static_cast<double>((eng_() >> 11) + 1) * 0x1.0p-53;
    }

    double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

    // Box-Muller pair of independent standard normals
    Vec2 normal_pair() {
        const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
        const double phi = 2.0 * std::numbers::pi * uniform01();
        return {r * std::cos(phi), r * std::sin(phi)};
    }

  private:
    std::mt19937_64 eng_;
};

}  // namespace rmnoise

#endif
