#pragma once

#include <cstdint>
#include <random>

namespace odenet {

// Uniform doubles from mt19937_64, mapped by hand instead of through
// std::uniform_real_distribution, whose output is implementation-defined.
// Every randomized routine in the library draws through this so that a seed
// pins results across standard libraries.
class UniformSource {
public:
    explicit UniformSource(std::uint64_t seed) : gen_(seed) {}

    // [0, 1)
    double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // [-scale, scale)
    double symmetric(double scale) { return scale * (2.0 * unit() - 1.0); }

    // {0, 1, ..., n-1}
    std::uint64_t index(std::uint64_t n) { return gen_() % n; }

private:
    std::mt19937_64 gen_;
};

// splitmix64 step; derives independent seed streams (per component, per
// escalation attempt, ...) from one user seed.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace odenet
