// Synthetic problem generators shared by the unit, CLI, and acceptance tests.
#pragma once

#include <krr/kernels.hpp>
#include <krr/types.hpp>

#include <cstdint>

namespace synth {

using krr::Index;
using krr::Matrix;
using krr::Vector;

// Two-class XOR-layout blobs in the plane: labels +1 at (0,0)/(4,4) and -1 at
// (0,4)/(4,0), Gaussian noise on top. A Gaussian-kernel model separates it;
// a linear one cannot.
krr::kernels::Dataset xor_blobs(Index n, double noise, std::uint64_t seed);

// Low-dimensional inputs for polynomial-kernel instances: rows drawn on the
// unit sphere in R^d so kernel entries stay O(1).
Matrix sphere_inputs(Index n, Index d, std::uint64_t seed);

}  // namespace synth
