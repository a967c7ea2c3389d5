#pragma once
// Deterministic random number generation. All stochastic code in the library
// draws through Rng so that a (base_seed, stream) pair fully determines every
// output byte, independent of platform RNG library details.

#include <cmath>
#include <cstdint>
#include <random>

namespace gm1 {

// Derives an independent stream seed from a base seed and a stream index
// using the splitmix64 finalizer over base + (stream+1)*golden-gamma.
// Documented splitting contract: different streams give unrelated sequences.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + (stream + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    // Uniform on [-spread, +spread].
    double uniform_sym(double spread) {
        return (2.0 * uniform() - 1.0) * spread;
    }

    // Standard normal via Box-Muller (explicit implementation: the C++
    // standard does not pin std::normal_distribution's algorithm).
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 6.283185307179586476925286766559 * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace gm1
