#pragma once

#include <krr/kernels.hpp>
#include <krr/types.hpp>

#include <cstdint>
#include <optional>
#include <vector>

namespace krr::sketches {

// Stage k of a chain draws its tables from master_seed + (k+1) * kStageSeedStride,
// so stages are reproducible and statistically independent of one another.
inline constexpr std::uint64_t kStageSeedStride = 0x9E3779B97F4A7C15ULL;
// The adaptive sizing loop re-seeds each attempt with master_seed + attempt * kAttemptSeedStride.
inline constexpr std::uint64_t kAttemptSeedStride = 0xD1B54A32D192ED03ULL;

/// Random Fourier features for the Gaussian kernel:
///   phi(x)_i = sqrt(2/s) cos(w_i'x + b_i),  w ~ N(0, sigma^-2 I), b ~ U[0, 2pi)
/// so that E[phi(x)'phi(z)] = exp(-|x-z|^2 / 2 sigma^2).
struct RffMap {
    Matrix w;  // s x d frequencies
    Vector b;  // s phases
    std::uint64_t seed = 0;

    RffMap(Index input_dim, Index features, double sigma, std::uint64_t seed);

    Index input_dim() const { return w.cols(); }
    Index output_dim() const { return w.rows(); }
    Vector apply(const Vector& x) const;
};

/// CountSketch with explicit tables: z_i = sum_{j : h(j) = i} g(j) x_j.
Vector countsketch_apply(const std::vector<std::uint32_t>& h, const std::vector<double>& g,
                         const Vector& x, Index s);

/// TensorSketch of degree q: a CountSketch of the q-fold tensor power v_q(x)
/// with bucket hash H(i_1..i_q) = sum_j h_j(i_j) mod s and sign
/// G(i_1..i_q) = prod_j g_j(i_j). Applied fast as the circular convolution of
/// the q per-mode CountSketches, via FFT, in O(q (d + s log s)).
struct TensorSketchMap {
    int degree = 1;
    Index in_dim = 0;
    Index out_dim = 0;
    std::vector<std::vector<std::uint32_t>> hash;  // q tables [d] -> [s]
    std::vector<std::vector<double>> sign;         // q tables [d] -> {-1, +1}
    std::uint64_t seed = 0;

    TensorSketchMap(Index input_dim, Index features, int degree, std::uint64_t seed);

    Index input_dim() const { return in_dim; }
    Index output_dim() const { return out_dim; }
    Vector apply(const Vector& x) const;
};

/// Subsampled randomized Walsh-Hadamard transform S = (1/sqrt(s)) P H D.
/// The input is zero-padded to the next power of two m; D is a random sign
/// diagonal, H the unnormalized WHT, and P samples s rows uniformly with
/// replacement. E[|Sx|^2] = |x|^2.
struct SrhtMap {
    Index in_dim = 0;
    Index padded_dim = 0;
    Index out_dim = 0;
    Vector sign;               // D, +/-1 entries, length padded_dim
    std::vector<Index> rows;   // sampled indices into [0, padded_dim)
    std::uint64_t seed = 0;

    SrhtMap(Index input_dim, Index features, std::uint64_t seed);

    Index input_dim() const { return in_dim; }
    Index output_dim() const { return out_dim; }
    Vector apply(const Vector& x) const;
    /// The s x input_dim matrix realizing apply(). Small sizes only.
    Matrix dense() const;
};

/// Dense Gaussian projection x -> (1/sqrt(s)) G x with G standard normal.
struct GaussianMap {
    Matrix proj;  // s x input_dim, standard normal entries
    std::uint64_t seed = 0;

    GaussianMap(Index input_dim, Index features, std::uint64_t seed);

    Index input_dim() const { return proj.cols(); }
    Index output_dim() const { return proj.rows(); }
    Vector apply(const Vector& x) const;
    /// The scaled s x input_dim matrix realizing apply().
    Matrix dense() const;
};

enum class FeatureMapKind { RandomFourier, TensorSketch };

/// Recipe for a sketch chain: one feature map stage of size s1, then an
/// optional SRHT level (s2 > 0) and an optional Gaussian level (s3 > 0),
/// with s1 >= s2 >= s3 over the stages present.
struct ChainSpec {
    FeatureMapKind first = FeatureMapKind::RandomFourier;
    Index s1 = 0;
    Index s2 = 0;  // 0 = no SRHT level
    Index s3 = 0;  // 0 = no Gaussian level

    void validate() const;
    Index output_dim() const;
    /// Rescales every stage proportionally so the final output size becomes
    /// `target` (used by the adaptive doubling loop).
    ChainSpec scaled_to(Index target) const;
};

/// A realized chain: immutable after construction, pure to apply. Serving a
/// polynomial kernel, the TensorSketch stage consumes the augmented
/// representation [sqrt(gamma) x ; sqrt(offset)] internally, so callers pass
/// raw inputs everywhere.
struct SketchChain {
    kernels::KernelSpec kernel;
    Index in_dim = 0;
    Index out_dim = 0;
    std::optional<RffMap> rff;
    std::optional<TensorSketchMap> tensor;
    std::optional<SrhtMap> srht;
    std::optional<GaussianMap> gauss;

    Index input_dim() const { return in_dim; }
    Index output_dim() const { return out_dim; }
    Vector apply(const Vector& x) const;
    /// Z with row i = apply(x_i); an n = 0 input yields a 0 x s matrix.
    Matrix apply_rows(const Matrix& x) const;
};

/// Draws all stage tables from seeds derived from master_seed. The feature
/// map must match the kernel family (RFF <-> Gaussian, TensorSketch <->
/// Polynomial).
SketchChain realize_chain(const ChainSpec& spec, const kernels::KernelSpec& kernel,
                          Index input_dim, std::uint64_t master_seed);

}  // namespace krr::sketches
