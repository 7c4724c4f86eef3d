#include <krr/kernels.hpp>

#include <algorithm>
#include <cmath>

namespace krr::kernels {

namespace {

double ipow(double base, int exponent) {
    double r = base;
    for (int i = 1; i < exponent; ++i) r *= base;
    return r;
}

}  // namespace

KernelSpec KernelSpec::gaussian(double sigma) {
    KernelSpec spec;
    spec.family = KernelFamily::Gaussian;
    spec.sigma = sigma;
    spec.validate();
    return spec;
}

KernelSpec KernelSpec::polynomial(double gamma, double offset, int degree) {
    KernelSpec spec;
    spec.family = KernelFamily::Polynomial;
    spec.gamma = gamma;
    spec.offset = offset;
    spec.degree = degree;
    spec.validate();
    return spec;
}

void KernelSpec::validate() const {
    if (family == KernelFamily::Gaussian) {
        if (!(sigma > 0.0)) throw std::invalid_argument("KernelSpec: sigma must be positive");
    } else {
        if (degree < 1) throw std::invalid_argument("KernelSpec: degree must be at least 1");
        if (offset < 0.0) throw std::invalid_argument("KernelSpec: offset must be non-negative");
        if (!(gamma > 0.0)) throw std::invalid_argument("KernelSpec: gamma must be positive");
    }
}

double kernel_eval(const KernelSpec& spec, const Vector& x, const Vector& z) {
    if (x.size() != z.size()) throw DimensionMismatch("kernel_eval: input dimensions differ");
    spec.validate();
    if (spec.family == KernelFamily::Gaussian) {
        const double d2 = (x - z).squaredNorm();
        return std::exp(-d2 / (2.0 * spec.sigma * spec.sigma));
    }
    return ipow(spec.gamma * x.dot(z) + spec.offset, spec.degree);
}

Matrix augmented_inputs(const KernelSpec& spec, const Matrix& x) {
    if (spec.family != KernelFamily::Polynomial) return x;
    Matrix out(x.rows(), x.cols() + 1);
    out.leftCols(x.cols()) = std::sqrt(spec.gamma) * x;
    out.col(x.cols()).setConstant(std::sqrt(spec.offset));
    return out;
}

Vector augmented_point(const KernelSpec& spec, const Vector& x) {
    if (spec.family != KernelFamily::Polynomial) return x;
    Vector out(x.size() + 1);
    out.head(x.size()) = std::sqrt(spec.gamma) * x;
    out[x.size()] = std::sqrt(spec.offset);
    return out;
}

Matrix gram_matrix(const KernelSpec& spec, const Matrix& x) {
    spec.validate();
    const Index n = x.rows();
    Matrix k(n, n);
    if (spec.family == KernelFamily::Gaussian) {
        const Vector sq = x.rowwise().squaredNorm();
        const Matrix p = x * x.transpose();
        const double scale = 1.0 / (2.0 * spec.sigma * spec.sigma);
        for (Index i = 0; i < n; ++i) {
            k(i, i) = 1.0;
            for (Index j = i + 1; j < n; ++j) {
                const double d2 = std::max(0.0, sq[i] + sq[j] - 2.0 * p(i, j));
                const double v = std::exp(-d2 * scale);
                k(i, j) = v;
                k(j, i) = v;
            }
        }
    } else {
        const Matrix xa = augmented_inputs(spec, x);
        const Matrix p = xa * xa.transpose();
        for (Index i = 0; i < n; ++i) {
            for (Index j = i; j < n; ++j) {
                const double v = ipow(p(i, j), spec.degree);
                k(i, j) = v;
                k(j, i) = v;
            }
        }
    }
    return k;
}

Matrix cross_gram(const KernelSpec& spec, const Matrix& a, const Matrix& b) {
    spec.validate();
    if (a.cols() != b.cols()) throw DimensionMismatch("cross_gram: input dimensions differ");
    Matrix k(a.rows(), b.rows());
    if (spec.family == KernelFamily::Gaussian) {
        const Vector sqa = a.rowwise().squaredNorm();
        const Vector sqb = b.rowwise().squaredNorm();
        const Matrix p = a * b.transpose();
        const double scale = 1.0 / (2.0 * spec.sigma * spec.sigma);
        for (Index i = 0; i < a.rows(); ++i)
            for (Index j = 0; j < b.rows(); ++j)
                k(i, j) = std::exp(-std::max(0.0, sqa[i] + sqb[j] - 2.0 * p(i, j)) * scale);
    } else {
        const Matrix p = augmented_inputs(spec, a) * augmented_inputs(spec, b).transpose();
        for (Index i = 0; i < a.rows(); ++i)
            for (Index j = 0; j < b.rows(); ++j) k(i, j) = ipow(p(i, j), spec.degree);
    }
    return k;
}

double statistical_dimension(const Vector& eigenvalues, double lambda) {
    if (!(lambda > 0.0)) throw NonPositiveLambda("statistical_dimension: lambda must be positive");
    double sum = 0.0;
    for (Index i = 0; i < eigenvalues.size(); ++i) {
        const double e = std::max(0.0, eigenvalues[i]);
        sum += e / (e + lambda);
    }
    return sum;
}

std::int64_t theoretical_sketch_size(int degree, double s_lambda, double delta) {
    if (!(delta > 0.0) || delta > 1.0)
        throw InvalidDelta("theoretical_sketch_size: delta must lie in (0, 1]");
    if (s_lambda < 0.0)
        throw std::invalid_argument("theoretical_sketch_size: s_lambda must be non-negative");
    if (degree < 1) throw std::invalid_argument("theoretical_sketch_size: degree must be >= 1");
    const double bound = 4.0 * (2.0 + std::pow(3.0, degree)) * s_lambda * s_lambda / delta;
    return std::int64_t(std::ceil(bound));
}

}  // namespace krr::kernels
