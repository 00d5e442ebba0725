#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <random>

namespace hct {

// splitmix64 finalizer; decorrelates derived seeds from structured inputs.
inline std::uint64_t mix_bits(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derives an independent seed stream from (seed, tag). Used to give every
// tree node, class table, and generator its own deterministic stream so
// results do not depend on evaluation order or thread count.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
    return mix_bits(seed ^ mix_bits(tag + 0x632be59bd9b4e019ULL));
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t tag) {
    return std::mt19937_64(mix_seed(seed, tag));
}

// Standard-normal direction vector.
inline Eigen::VectorXd gaussian_vector(int dim, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = normal(rng);
    return v;
}

}  // namespace hct
