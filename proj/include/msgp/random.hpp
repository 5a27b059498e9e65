#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

namespace msgp {

using Rng = std::mt19937_64;

// splitmix64, used to derive independent sub-stream seeds from one seed.
inline std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline double rand_uniform(Rng& rng, double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double rand_normal(Rng& rng) {
    return std::normal_distribution<double>(0.0, 1.0)(rng);
}

inline Eigen::MatrixXd randn_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    std::normal_distribution<double> dist(0.0, 1.0);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
    return m;
}

inline Eigen::VectorXd randn_vector(Rng& rng, Eigen::Index n) {
    Eigen::VectorXd v(n);
    std::normal_distribution<double> dist(0.0, 1.0);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = dist(rng);
    return v;
}

}  // namespace msgp
