#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace sglarma {

/// Seeded random stream used everywhere in the library.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. All derived variates (uniforms, bounded integers, Poisson,
/// normal) are computed here rather than through <random> distributions,
/// whose algorithms are implementation-defined. Results are therefore
/// bit-identical across standard libraries given the same seed.
class Rng {
public:
    static constexpr const char* kName = "mt19937_64/sglarma-v1";

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound), rejection-sampled to avoid modulo bias.
    std::uint64_t uniform_index(std::uint64_t bound);

    /// Standard normal via Box-Muller (no cached second variate).
    double normal();

    /// Poisson(mean): sequential inversion for mean <= 10, PTRS
    /// transformed rejection (Hormann 1993) above.
    std::uint64_t poisson(double mean);

    /// Draws `k` distinct indices from [0, n) by a partial Fisher-Yates
    /// shuffle; the result is sorted ascending.
    std::vector<int> subset(int n, int k);

    /// Full random permutation of [0, n).
    std::vector<int> permutation(int n);

private:
    std::mt19937_64 engine_;
};

}  // namespace sglarma
