#include <krr/precond.hpp>

#include <krr/numerics.hpp>

#include <algorithm>
#include <cmath>

namespace krr::precond {

Vector Preconditioner::apply(const Vector& x) const {
    if (x.size() != u.cols()) throw DimensionMismatch("Preconditioner: dimension mismatch");
    return (x - u.transpose() * (u * x)) / lambda_p;
}

Matrix Preconditioner::apply_columns(const Matrix& x) const {
    if (x.rows() != u.cols()) throw DimensionMismatch("Preconditioner: dimension mismatch");
    return (x - u.transpose() * (u * x)) / lambda_p;
}

Preconditioner build_preconditioner(const Matrix& z, double lambda_p) {
    if (!(lambda_p > 0.0)) throw NonPositiveLambda("build_preconditioner: lambda_p must be positive");
    const Index s = z.cols();
    Matrix gram = z.transpose() * z;
    gram.diagonal().array() += lambda_p;

    Matrix l;
    try {
        l = numerics::cholesky(gram);
    } catch (const NotPositiveDefinite&) {
        // lambda_p > 0 makes the true Gram positive definite, so a failure
        // here is round-off; retry once with a tiny diagonal shift.
        gram.diagonal().array() += 1e-12 * gram.trace() / double(s);
        l = numerics::cholesky(gram);
    }

    Preconditioner p;
    p.lambda_p = lambda_p;
    p.u = numerics::triangular_solve(l, z.transpose());  // L U = Z'
    return p;
}

SpectralBasis retained_left_singular_basis(const Matrix& z, double cut) {
    const auto eig = numerics::symmetric_eigen(z.transpose() * z);
    const double max_ev = eig.eigenvalues.size() > 0 ? std::max(0.0, eig.eigenvalues[0]) : 0.0;
    // sigma < 1e-10 sigma_max counts as zero; the retained set additionally
    // requires the Z Z' eigenvalue (= sigma^2) to clear the cut.
    const double zero_floor = 1e-20 * max_ev;
    Index k = 0;
    while (k < eig.eigenvalues.size() && eig.eigenvalues[k] > cut &&
           eig.eigenvalues[k] > zero_floor)
        ++k;

    SpectralBasis out;
    out.eigenvalues = eig.eigenvalues.head(k);
    out.basis.resize(z.rows(), k);
    for (Index i = 0; i < k; ++i)
        out.basis.col(i) = z * eig.eigenvectors.col(i) / std::sqrt(eig.eigenvalues[i]);
    return out;
}

QualityReport quality_test(const Matrix& k, const Matrix& z, double lambda) {
    if (k.rows() != k.cols() || k.rows() != z.rows())
        throw DimensionMismatch("quality_test: K and Z dimensions do not match");
    if (!(lambda > 0.0)) throw NonPositiveLambda("quality_test: lambda must be positive");

    QualityReport report;
    report.lambda = lambda;
    report.sketch_size = z.cols();
    report.spectrum_cut = 0.05 * lambda;
    report.cond1_threshold = 0.1 * lambda;

    const SpectralBasis basis = retained_left_singular_basis(z, report.spectrum_cut);
    const Matrix& b = basis.basis;
    report.rank_of_p = b.cols();

    // Condition 1: |(I - P) K (I - P)| <= 0.1 lambda by power iteration.
    const auto deflated = [&](const Vector& v) {
        Vector w = v - b * (b.transpose() * v);
        w = k * w;
        w -= b * (b.transpose() * w);
        return w;
    };
    report.cond1_value =
        numerics::power_iteration_spectral_norm(deflated, k.rows(), 1e-4, 500, /*seed=*/7).value;

    // Condition 2, exact on range(P): eigenvalues of Sigma^-1 (B'KB) Sigma^-1.
    if (report.rank_of_p > 0) {
        const Vector inv_sigma = basis.eigenvalues.cwiseSqrt().cwiseInverse();
        Matrix m = b.transpose() * k * b;
        m = inv_sigma.asDiagonal() * m * inv_sigma.asDiagonal();
        m = ((m + m.transpose()) / 2.0).eval();
        const auto eig = numerics::symmetric_eigen(m);
        report.cond2_ratio_high = eig.eigenvalues[0];
        report.cond2_ratio_low = eig.eigenvalues[eig.eigenvalues.size() - 1];
    }

    report.passed = report.cond1_value <= report.cond1_threshold &&
                    report.cond2_ratio_low >= report.ratio_low_threshold &&
                    report.cond2_ratio_high <= report.ratio_high_threshold;
    return report;
}

Index default_initial_sketch_size(Index n) {
    return std::max<Index>(64, (n + 63) / 64);
}

AdaptiveResult adaptive_build(const Matrix& k, const Matrix& x,
                              const sketches::ChainSpec& chain_template,
                              const kernels::KernelSpec& kernel, double lambda,
                              double lambda_p, Index s0, Index s_max,
                              std::uint64_t master_seed) {
    if (s0 < 1) throw std::invalid_argument("adaptive_build: s0 must be at least 1");
    if (s_max < s0) throw std::invalid_argument("adaptive_build: s_max must be >= s0");

    AdaptiveResult result;
    Index s = s0;
    for (int attempt = 0;; ++attempt) {
        const std::uint64_t seed =
            master_seed + std::uint64_t(attempt) * sketches::kAttemptSeedStride;
        const auto chain =
            sketches::realize_chain(chain_template.scaled_to(s), kernel, x.cols(), seed);
        result.z = chain.apply_rows(x);
        QualityReport report = quality_test(k, result.z, lambda);
        result.history.push_back(report);
        result.final_size = s;
        if (report.passed) {
            result.status = AdaptiveStatus::Passed;
            break;
        }
        if (s >= s_max) {
            result.status = AdaptiveStatus::BudgetExhausted;
            break;
        }
        s = std::min(2 * s, s_max);
    }
    result.preconditioner = build_preconditioner(result.z, lambda_p);
    return result;
}

}  // namespace krr::precond
