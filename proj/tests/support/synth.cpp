#include "support/synth.hpp"

#include <krr/solver.hpp>

#include <random>
#include <vector>

namespace synth {

krr::kernels::Dataset xor_blobs(Index n, double noise, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> jitter(0.0, noise);
    const double centers[4][2] = {{0, 0}, {4, 4}, {0, 4}, {4, 0}};

    krr::kernels::Dataset data;
    data.x.resize(n, 2);
    data.labels.resize(std::size_t(n));
    std::vector<int> indices(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        const int cell = int(i % 4);
        data.x(i, 0) = centers[cell][0] + jitter(gen);
        data.x(i, 1) = centers[cell][1] + jitter(gen);
        const bool positive = cell < 2;
        data.labels[std::size_t(i)] = positive ? 1.0 : -1.0;
        indices[std::size_t(i)] = positive ? 1 : 0;
    }
    data.label_map = {-1.0, 1.0};
    data.y = krr::solver::rlsc_encode(indices, 2);
    return data;
}

Matrix sphere_inputs(Index n, Index d, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix x(n, d);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < d; ++j) x(i, j) = normal(gen);
        x.row(i) /= x.row(i).norm();
    }
    return x;
}

}  // namespace synth
