#include "sglarma/rng.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sglarma {

std::uint64_t Rng::uniform_index(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("uniform_index: bound must be positive");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t draw = engine_();
    while (draw >= limit) draw = engine_();
    return draw % bound;
}

double Rng::normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::uint64_t Rng::poisson(double mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean))
        throw std::invalid_argument("poisson: mean must be finite and nonnegative");
    if (mean == 0.0) return 0;

    if (mean <= 10.0) {
        double prob = std::exp(-mean);
        double u = uniform();
        std::uint64_t k = 0;
        // The tail mass beyond k = 1000 is below double precision for mean <= 10.
        while (u > prob && k < 1000) {
            u -= prob;
            ++k;
            prob *= mean / static_cast<double>(k);
        }
        return k;
    }

    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);

    for (;;) {
        const double u = uniform() - 0.5;
        const double v = uniform();
        const double us = 0.5 - std::fabs(u);
        const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
        if (k < 0.0 || (us < 0.013 && v > us)) continue;
        if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
            -mean + k * loglam - std::lgamma(k + 1.0))
            return static_cast<std::uint64_t>(k);
    }
}

std::vector<int> Rng::subset(int n, int k) {
    if (k < 0 || k > n) throw std::invalid_argument("subset: k out of range");
    std::vector<int> pool(static_cast<std::size_t>(n));
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < k; ++i) {
        const auto j = i + static_cast<int>(uniform_index(static_cast<std::uint64_t>(n - i)));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(static_cast<std::size_t>(k));
    std::sort(pool.begin(), pool.end());
    return pool;
}

std::vector<int> Rng::permutation(int n) {
    std::vector<int> out(static_cast<std::size_t>(n));
    std::iota(out.begin(), out.end(), 0);
    for (int i = n - 1; i > 0; --i) {
        const auto j = static_cast<int>(uniform_index(static_cast<std::uint64_t>(i + 1)));
        std::swap(out[i], out[j]);
    }
    return out;
}

}  // namespace sglarma
