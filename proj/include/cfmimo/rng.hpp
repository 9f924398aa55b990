#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace cfmimo {

/// Deterministic random stream. All distributions are generated from raw
/// mt19937_64 words through fixed arithmetic, so identical seeds give identical
/// sequences on every platform/stdlib.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : gen_(seed) {}

    /// Independent worker stream derived from a master seed (splitmix64 mix).
    static RngStream fork(std::uint64_t master, std::uint64_t stream_id) {
        std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream_id + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return RngStream(z ^ (z >> 31));
    }

    std::uint64_t next_u64() { return gen_(); }

    double uniform() {  // [0, 1)
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    int uniform_int(int n) {  // [0, n)
        return static_cast<int>(gen_() % static_cast<std::uint64_t>(n));
    }

    double normal() {  // standard normal, Box-Muller (cosine branch)
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    /// CN(0, variance): circularly symmetric complex Gaussian.
    std::complex<double> complex_normal(double variance) {
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-variance * std::log(u1));
        return {r * std::cos(2.0 * M_PI * u2), r * std::sin(2.0 * M_PI * u2)};
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace cfmimo
