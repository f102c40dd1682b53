#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace fiberlab {

// Seeded RNG with explicit bit-to-double mapping. std::*_distribution is
// implementation-defined, so all sampling goes through these helpers to keep
// the byte-identical-output contract independent of the standard library.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t bits() { return engine_(); }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform in [-1, 1]
    double symmetric() { return 2.0 * uniform() - 1.0; }

    // index sampled proportionally to probs (assumed nonnegative, summing to ~1)
    int sample(std::span<const double> probs) {
        double u = uniform();
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(probs.size()) - 1;
    }

    int uniform_int(int n) { return static_cast<int>(bits() % static_cast<std::uint64_t>(n)); }

  private:
    std::mt19937_64 engine_;
};

// Per-block seed derivation for parallel/batched work: stable across runs.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t x = master + 0x9E3779B97F4A7C15ULL * (index + 1);
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
}

}  // namespace fiberlab
