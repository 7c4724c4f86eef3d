#pragma once

#include <krr/types.hpp>

#include <cstdint>
#include <functional>

namespace krr::numerics {

/// Eigendecomposition of a symmetric matrix. Eigenvalues are sorted in
/// descending order; eigenvector i is the column paired with eigenvalues[i].
struct EigenResult {
    Vector eigenvalues;
    Matrix eigenvectors;
};

/// Lower-triangular L with L L^T = a. Throws NotPositiveDefinite when the
/// factorization hits a non-positive pivot; retry policy (jitter) is the
/// caller's business.
Matrix cholesky(const Matrix& a);

enum class Side { Left, Right };

/// Solves l X = b (Side::Left) or X l = b (Side::Right); `transpose` replaces
/// l by l^T. l must be lower-triangular with a positive diagonal; entries
/// above the diagonal are ignored. Throws SingularTriangular when a diagonal
/// entry is below 1e-300.
Matrix triangular_solve(const Matrix& l, const Matrix& b, Side side = Side::Left,
                        bool transpose = false);

/// Unnormalized Walsh-Hadamard transform, H_m x for the recursive H_m with
/// H_2 = [[+1,+1],[+1,-1]]. Length must be a power of two. O(m log m).
/// Note H_m^2 = m I, so fwht(fwht(x)) / m recovers x.
Vector fwht(Vector x);

/// Forward FFT of a real signal. The input is zero-padded to the next power
/// of two, and the spectrum of the padded signal is returned.
ComplexVector fft_forward(const Vector& x);

/// Inverse of fft_forward: takes a power-of-two spectrum and returns the
/// first n samples of the inverse transform (real parts).
Vector fft_inverse(const ComplexVector& spectrum, Index n);

/// Circular convolution of two equal-length vectors, computed via padded
/// FFTs with an explicit wrap back to the declared length.
Vector circular_convolution(const Vector& a, const Vector& b);

/// Symmetric eigendecomposition (full, dense). Intended for desk-scale
/// inputs, n up to a few thousand. Throws NoConvergence if the iteration
/// fails, DimensionMismatch for non-square input.
EigenResult symmetric_eigen(const Matrix& a);

struct SpectralNormEstimate {
    double value = 0.0;
    int iterations = 0;
    // false = the iteration cap was hit; value is the best estimate so far.
    bool converged = false;
};

/// Largest eigenvalue of the symmetric PSD operator realized by `apply`,
/// estimated by power iteration from a seeded random start vector with
/// relative-change stopping. Deterministic given the seed. The estimate is a
/// lower bound up to the tolerance, except on the measure-zero event that
/// the start vector is orthogonal to the top eigenspace.
SpectralNormEstimate power_iteration_spectral_norm(
    const std::function<Vector(const Vector&)>& apply, Index dim, double tol = 1e-4,
    int max_iter = 500, std::uint64_t seed = 0);

}  // namespace krr::numerics
