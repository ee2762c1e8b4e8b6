#pragma once

#include <cstdint>
#include <random>

namespace tsrm {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for trial `index` of an experiment. Depends only on its inputs, so
/// trial streams are independent of how trials are scheduled.
inline std::uint64_t stream_seed(std::uint64_t base_seed, std::uint64_t index) {
    return splitmix64(splitmix64(base_seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

inline double uniform01(Rng& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double gamma_draw(Rng& rng, double shape, double scale) {
    return std::gamma_distribution<double>(shape, scale)(rng);
}

inline double beta_draw(Rng& rng, double a, double b) {
    const double x = gamma_draw(rng, a, 1.0);
    const double y = gamma_draw(rng, b, 1.0);
    return x / (x + y);
}

inline long long poisson_draw(Rng& rng, double mean) {
    if (!(mean > 0.0)) return 0;
    return std::poisson_distribution<long long>(mean)(rng);
}

}  // namespace tsrm
