#pragma once

#include <krr/types.hpp>

#include <cstdint>
#include <vector>

namespace krr::kernels {

enum class KernelFamily { Gaussian, Polynomial };

/// Kernel family plus hyperparameters.
///   Gaussian:   k(x,z) = exp(-|x-z|^2 / 2 sigma^2)
///   Polynomial: k(x,z) = (gamma x'z + offset)^degree
struct KernelSpec {
    KernelFamily family = KernelFamily::Gaussian;
    double sigma = 1.0;
    double gamma = 1.0;
    double offset = 0.0;
    int degree = 1;

    static KernelSpec gaussian(double sigma);
    static KernelSpec polynomial(double gamma, double offset, int degree);

    // sigma > 0 (Gaussian); degree >= 1, offset >= 0 (Polynomial).
    void validate() const;
};

/// Training data. For classification, y holds the one-vs-all +/-1 encoding,
/// labels the raw per-sample class labels, and label_map maps class index to
/// the original label value. For regression, labels/label_map are empty and
/// y holds the raw targets.
struct Dataset {
    Matrix x;
    Matrix y;
    std::vector<double> labels;
    std::vector<double> label_map;

    bool classification() const { return !label_map.empty(); }
    Index n() const { return x.rows(); }
    Index dim() const { return x.cols(); }
    Index targets() const { return y.cols(); }
};

double kernel_eval(const KernelSpec& spec, const Vector& x, const Vector& z);

/// The non-homogeneous polynomial kernel is reduced to the homogeneous case
/// by appending a constant feature: x -> [sqrt(gamma) x ; sqrt(offset)].
/// Both the Gram matrix and TensorSketch consume this same representation so
/// kernel and sketch agree. Gaussian inputs pass through unchanged.
Matrix augmented_inputs(const KernelSpec& spec, const Matrix& x);
Vector augmented_point(const KernelSpec& spec, const Vector& x);

/// n x n Gram matrix K_ij = k(x_i, x_j). The upper triangle is computed and
/// mirrored, so symmetry is exact.
Matrix gram_matrix(const KernelSpec& spec, const Matrix& x);

/// Rectangular kernel matrix K_ij = k(a_i, b_j).
Matrix cross_gram(const KernelSpec& spec, const Matrix& a, const Matrix& b);

/// Statistical dimension sum_i e_i / (e_i + lambda) from the eigenvalues of
/// K. Tiny negative eigenvalues (round-off) are clamped to zero. Value lies
/// in [0, n]. Throws NonPositiveLambda for lambda <= 0.
double statistical_dimension(const Vector& eigenvalues, double lambda);

/// Sketch size ceil(4 (2 + 3^degree) s_lambda^2 / delta) sufficient for the
/// constant-iteration guarantee at failure probability delta in (0, 1].
std::int64_t theoretical_sketch_size(int degree, double s_lambda, double delta);

}  // namespace krr::kernels
