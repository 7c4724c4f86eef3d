#pragma once

#include <krr/kernels.hpp>
#include <krr/sketches.hpp>
#include <krr/types.hpp>

#include <cstdint>
#include <vector>

namespace krr::precond {

/// Woodbury form of (Z Z' + lambda_p I_n)^-1. With L L' = Z'Z + lambda_p I_s
/// and U = L^-1 Z', the inverse is lambda_p^-1 (I - U'U), so applying it
/// costs two matrix-vector products with the s x n factor U.
struct Preconditioner {
    Matrix u;  // s x n
    double lambda_p = 1.0;

    Index sketch_size() const { return u.rows(); }
    Index dim() const { return u.cols(); }
    Vector apply(const Vector& x) const;
    Matrix apply_columns(const Matrix& x) const;
};

/// Builds the preconditioner from the realized sketch Z (n x s). On a
/// Cholesky failure, retries once with 1e-12 * trace / s added to the
/// diagonal, then escalates NotPositiveDefinite.
Preconditioner build_preconditioner(const Matrix& z, double lambda_p);

/// Outcome of the two-condition preconditioner quality test. P projects onto
/// the eigenvectors of Z Z' with eigenvalue above 0.05 lambda. Condition 1
/// bounds |(I-P) K (I-P)| by 0.1 lambda (power iteration); condition 2
/// requires all eigenvalues of Sigma^-1 (B'KB) Sigma^-1 in [0.9, 1.1], which
/// is the quadratic-form comparison of K and Z Z' restricted to range(P).
struct QualityReport {
    bool passed = false;
    double cond1_value = 0.0;
    double cond2_ratio_low = 1.0;
    double cond2_ratio_high = 1.0;
    Index rank_of_p = 0;
    Index sketch_size = 0;
    double lambda = 0.0;
    double cond1_threshold = 0.0;        // 0.1 * lambda
    double spectrum_cut = 0.0;           // 0.05 * lambda
    double ratio_low_threshold = 0.9;
    double ratio_high_threshold = 1.1;
};

/// Orthonormal basis of the span of left singular vectors of z whose squared
/// singular value exceeds `cut`, with the matching eigenvalues of Z Z'.
/// Computed through the s x s Gram Z'Z; singular values below 1e-10 of the
/// largest are treated as zero.
struct SpectralBasis {
    Matrix basis;        // n x k, orthonormal columns
    Vector eigenvalues;  // k eigenvalues of Z Z', descending
};
SpectralBasis retained_left_singular_basis(const Matrix& z, double cut);

QualityReport quality_test(const Matrix& k, const Matrix& z, double lambda);

enum class AdaptiveStatus { Passed, BudgetExhausted };

/// Result of the doubling loop. On BudgetExhausted the s_max attempt is
/// returned anyway (flagged), with the full per-attempt report history.
struct AdaptiveResult {
    AdaptiveStatus status = AdaptiveStatus::BudgetExhausted;
    Preconditioner preconditioner;
    Matrix z;
    Index final_size = 0;
    std::vector<QualityReport> history;

    bool passed() const { return status == AdaptiveStatus::Passed; }
};

/// Default first probe for the doubling loop: max(64, ceil(n / 64)), so at
/// most ~7 doublings reach n.
Index default_initial_sketch_size(Index n);

/// Starts at s0, tests the realized sketch, and doubles until quality_test
/// passes or s_max is reached. Every attempt draws a fresh seed derived from
/// master_seed.
AdaptiveResult adaptive_build(const Matrix& k, const Matrix& x,
                              const sketches::ChainSpec& chain_template,
                              const kernels::KernelSpec& kernel, double lambda,
                              double lambda_p, Index s0, Index s_max,
                              std::uint64_t master_seed);

}  // namespace krr::precond
