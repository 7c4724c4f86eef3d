#include <krr/numerics.hpp>

#include <bit>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

namespace krr::numerics {

namespace {

bool is_pow2(std::size_t m) { return m > 0 && std::has_single_bit(m); }

std::size_t next_pow2(std::size_t m) { return std::bit_ceil(std::max<std::size_t>(m, 1)); }

// Iterative radix-2 Cooley-Tukey, in place. n must be a power of two.
void fft_in_place(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * std::numbers::pi / double(len);
        const std::complex<double> wlen = std::polar(1.0, ang);
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                const std::complex<double> u = a[i + j];
                const std::complex<double> v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse) {
        for (auto& v : a) v /= double(n);
    }
}

}  // namespace

Matrix cholesky(const Matrix& a) {
    if (a.rows() != a.cols()) throw DimensionMismatch("cholesky: matrix must be square");
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() != Eigen::Success)
        throw NotPositiveDefinite("cholesky: non-positive pivot encountered");
    return llt.matrixL();
}

Matrix triangular_solve(const Matrix& l, const Matrix& b, Side side, bool transpose) {
    if (l.rows() != l.cols()) throw DimensionMismatch("triangular_solve: L must be square");
    const Index expected = side == Side::Left ? b.rows() : b.cols();
    if (l.rows() != expected)
        throw DimensionMismatch("triangular_solve: dimensions of L and B do not match");
    if (l.diagonal().cwiseAbs().minCoeff() < 1e-300)
        throw SingularTriangular("triangular_solve: diagonal entry below 1e-300");

    const auto tri = l.triangularView<Eigen::Lower>();
    Matrix x = b;
    if (side == Side::Left) {
        if (transpose)
            tri.transpose().solveInPlace(x);
        else
            tri.solveInPlace(x);
    } else {
        if (transpose)
            tri.transpose().solveInPlace<Eigen::OnTheRight>(x);
        else
            tri.solveInPlace<Eigen::OnTheRight>(x);
    }
    return x;
}

Vector fwht(Vector x) {
    const std::size_t m = std::size_t(x.size());
    if (!is_pow2(m)) throw LengthNotPowerOfTwo("fwht: length must be a power of two");
    for (std::size_t h = 1; h < m; h <<= 1) {
        for (std::size_t i = 0; i < m; i += 2 * h) {
            for (std::size_t j = i; j < i + h; ++j) {
                const double u = x[Index(j)];
                const double v = x[Index(j + h)];
                x[Index(j)] = u + v;
                x[Index(j + h)] = u - v;
            }
        }
    }
    return x;
}

ComplexVector fft_forward(const Vector& x) {
    const std::size_t p = next_pow2(std::size_t(x.size()));
    std::vector<std::complex<double>> a(p, {0.0, 0.0});
    for (Index i = 0; i < x.size(); ++i) a[std::size_t(i)] = {x[i], 0.0};
    fft_in_place(a, false);
    const Index out_len = Index(p);
    ComplexVector out(out_len);
    for (Index i = 0; i < out_len; ++i) out[i] = a[std::size_t(i)];
    return out;
}

Vector fft_inverse(const ComplexVector& spectrum, Index n) {
    const std::size_t p = std::size_t(spectrum.size());
    if (!is_pow2(p)) throw LengthNotPowerOfTwo("fft_inverse: spectrum length must be a power of two");
    if (n < 0 || std::size_t(n) > p)
        throw DimensionMismatch("fft_inverse: requested length exceeds spectrum size");
    std::vector<std::complex<double>> a(p);
    for (std::size_t i = 0; i < p; ++i) a[i] = spectrum[Index(i)];
    fft_in_place(a, true);
    Vector out(n);
    for (Index i = 0; i < n; ++i) out[i] = a[std::size_t(i)].real();
    return out;
}

Vector circular_convolution(const Vector& a, const Vector& b) {
    if (a.size() != b.size())
        throw DimensionMismatch("circular_convolution: lengths differ");
    const std::size_t m = std::size_t(a.size());
    if (m == 0) return Vector(0);
    // At power-of-two length the length-m transform is circular already;
    // otherwise compute the linear convolution padded to 2m-1 and wrap.
    const std::size_t p = is_pow2(m) ? m : next_pow2(2 * m - 1);
    std::vector<std::complex<double>> fa(p, {0.0, 0.0});
    std::vector<std::complex<double>> fb(p, {0.0, 0.0});
    for (std::size_t i = 0; i < m; ++i) {
        fa[i] = {a[Index(i)], 0.0};
        fb[i] = {b[Index(i)], 0.0};
    }
    fft_in_place(fa, false);
    fft_in_place(fb, false);
    for (std::size_t i = 0; i < p; ++i) fa[i] *= fb[i];
    fft_in_place(fa, true);
    Vector out = Vector::Zero(Index(m));
    for (std::size_t t = 0; t < p; ++t) out[Index(t % m)] += fa[t].real();
    return out;
}

EigenResult symmetric_eigen(const Matrix& a) {
    if (a.rows() != a.cols()) throw DimensionMismatch("symmetric_eigen: matrix must be square");
    Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    if (es.info() != Eigen::Success)
        throw NoConvergence("symmetric_eigen: eigensolver did not converge");
    // Eigen sorts ascending; flip to descending.
    EigenResult result;
    result.eigenvalues = es.eigenvalues().reverse();
    result.eigenvectors = es.eigenvectors().rowwise().reverse();
    return result;
}

SpectralNormEstimate power_iteration_spectral_norm(
    const std::function<Vector(const Vector&)>& apply, Index dim, double tol, int max_iter,
    std::uint64_t seed) {
    if (dim < 1) throw DimensionMismatch("power_iteration: dim must be positive");
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector v(dim);
    for (Index i = 0; i < dim; ++i) v[i] = normal(gen);
    v.normalize();

    SpectralNormEstimate est;
    double prev = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        const Vector w = apply(v);
        const double rayleigh = v.dot(w);
        est.value = rayleigh;
        est.iterations = it;
        const double norm_w = w.norm();
        if (norm_w == 0.0) {
            // Operator annihilates the iterate: spectral norm estimate 0.
            est.value = 0.0;
            est.converged = true;
            return est;
        }
        if (it > 1 && std::abs(rayleigh - prev) <= tol * std::abs(rayleigh)) {
            est.converged = true;
            return est;
        }
        prev = rayleigh;
        v = w / norm_w;
    }
    est.converged = false;
    return est;
}

}  // namespace krr::numerics
