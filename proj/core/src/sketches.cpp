#include <krr/sketches.hpp>

#include <krr/numerics.hpp>

#include <bit>
#include <cmath>
#include <numbers>
#include <random>

namespace krr::sketches {

namespace {

using kernels::KernelFamily;

Index next_pow2(Index m) { return Index(std::bit_ceil(std::uint64_t(std::max<Index>(m, 1)))); }

std::uint64_t stage_seed(std::uint64_t master, int stage) {
    return master + std::uint64_t(stage + 1) * kStageSeedStride;
}

}  // namespace

RffMap::RffMap(Index input_dim, Index features, double sigma, std::uint64_t seed)
    : w(features, input_dim), b(features), seed(seed) {
    if (features < 1) throw std::invalid_argument("RffMap: need at least one feature");
    if (!(sigma > 0.0)) throw std::invalid_argument("RffMap: sigma must be positive");
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> freq(0.0, 1.0 / sigma);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    // Fixed draw order: W row by row, then b.
    for (Index i = 0; i < features; ++i)
        for (Index j = 0; j < input_dim; ++j) w(i, j) = freq(gen);
    for (Index i = 0; i < features; ++i) b[i] = phase(gen);
}

Vector RffMap::apply(const Vector& x) const {
    if (x.size() != w.cols()) throw DimensionMismatch("RffMap: input dimension mismatch");
    const double scale = std::sqrt(2.0 / double(w.rows()));
    return scale * ((w * x + b).array().cos()).matrix();
}

Vector countsketch_apply(const std::vector<std::uint32_t>& h, const std::vector<double>& g,
                         const Vector& x, Index s) {
    if (Index(h.size()) != x.size() || g.size() != h.size())
        throw DimensionMismatch("countsketch_apply: table sizes do not cover the input");
    Vector z = Vector::Zero(s);
    for (Index j = 0; j < x.size(); ++j) z[Index(h[std::size_t(j)])] += g[std::size_t(j)] * x[j];
    return z;
}

TensorSketchMap::TensorSketchMap(Index input_dim, Index features, int degree, std::uint64_t seed)
    : degree(degree), in_dim(input_dim), out_dim(features), seed(seed) {
    if (features < 1) throw std::invalid_argument("TensorSketchMap: need at least one feature");
    if (degree < 1) throw std::invalid_argument("TensorSketchMap: degree must be >= 1");
    std::mt19937_64 gen(seed);
    std::uniform_int_distribution<std::uint32_t> bucket(0, std::uint32_t(features - 1));
    std::uniform_int_distribution<int> coin(0, 1);
    hash.resize(std::size_t(degree));
    sign.resize(std::size_t(degree));
    // Fixed draw order per mode: full hash table, then full sign table.
    for (int mode = 0; mode < degree; ++mode) {
        auto& h = hash[std::size_t(mode)];
        auto& g = sign[std::size_t(mode)];
        h.resize(std::size_t(input_dim));
        g.resize(std::size_t(input_dim));
        for (auto& v : h) v = bucket(gen);
        for (auto& v : g) v = coin(gen) ? 1.0 : -1.0;
    }
}

Vector TensorSketchMap::apply(const Vector& x) const {
    if (x.size() != in_dim) throw DimensionMismatch("TensorSketchMap: input dimension mismatch");
    if (degree == 1) return countsketch_apply(hash[0], sign[0], x, out_dim);

    const Index s = out_dim;
    // At power-of-two s the length-s product of spectra is circular already;
    // otherwise pad so the q-fold linear convolution fits, then wrap mod s.
    const bool pow2 = std::has_single_bit(std::uint64_t(s));
    const Index padded = pow2 ? s : next_pow2(Index(degree) * (s - 1) + 1);

    ComplexVector spectrum;
    for (int mode = 0; mode < degree; ++mode) {
        Vector cs = countsketch_apply(hash[std::size_t(mode)], sign[std::size_t(mode)], x, s);
        Vector padded_cs = Vector::Zero(padded);
        padded_cs.head(s) = cs;
        const ComplexVector f = numerics::fft_forward(padded_cs);
        spectrum = (mode == 0) ? f : ComplexVector(spectrum.cwiseProduct(f));
    }
    const Vector conv = numerics::fft_inverse(spectrum, padded);
    Vector out = Vector::Zero(s);
    for (Index t = 0; t < padded; ++t) out[t % s] += conv[t];
    return out;
}

SrhtMap::SrhtMap(Index input_dim, Index features, std::uint64_t seed)
    : in_dim(input_dim),
      padded_dim(next_pow2(input_dim)),
      out_dim(features),
      sign(next_pow2(input_dim)),
      seed(seed) {
    if (features < 1) throw std::invalid_argument("SrhtMap: need at least one feature");
    if (input_dim < 1) throw std::invalid_argument("SrhtMap: input dimension must be positive");
    std::mt19937_64 gen(seed);
    std::uniform_int_distribution<int> coin(0, 1);
    std::uniform_int_distribution<Index> row(0, padded_dim - 1);
    // Fixed draw order: D, then the sampled rows (uniform with replacement).
    for (Index i = 0; i < padded_dim; ++i) sign[i] = coin(gen) ? 1.0 : -1.0;
    rows.resize(std::size_t(features));
    for (auto& r : rows) r = row(gen);
}

Vector SrhtMap::apply(const Vector& x) const {
    if (x.size() > padded_dim) throw DimensionMismatch("SrhtMap: input dimension mismatch");
    Vector padded = Vector::Zero(padded_dim);
    padded.head(x.size()) = x;
    padded.array() *= sign.array();
    const Vector mixed = numerics::fwht(std::move(padded));
    const double scale = 1.0 / std::sqrt(double(out_dim));
    Vector out(out_dim);
    for (Index i = 0; i < out_dim; ++i) out[i] = scale * mixed[rows[std::size_t(i)]];
    return out;
}

Matrix SrhtMap::dense() const {
    // H(a, b) = (-1)^popcount(a & b) for the Sylvester ordering.
    const double scale = 1.0 / std::sqrt(double(out_dim));
    Matrix s(out_dim, in_dim);
    for (Index i = 0; i < out_dim; ++i) {
        const std::uint64_t r = std::uint64_t(rows[std::size_t(i)]);
        for (Index j = 0; j < in_dim; ++j) {
            const int parity = std::popcount(r & std::uint64_t(j)) & 1;
            s(i, j) = scale * (parity ? -1.0 : 1.0) * sign[j];
        }
    }
    return s;
}

GaussianMap::GaussianMap(Index input_dim, Index features, std::uint64_t seed)
    : proj(features, input_dim), seed(seed) {
    if (features < 1) throw std::invalid_argument("GaussianMap: need at least one feature");
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Index i = 0; i < features; ++i)
        for (Index j = 0; j < input_dim; ++j) proj(i, j) = normal(gen);
}

Vector GaussianMap::apply(const Vector& x) const {
    if (x.size() != proj.cols()) throw DimensionMismatch("GaussianMap: input dimension mismatch");
    return (proj * x) / std::sqrt(double(proj.rows()));
}

Matrix GaussianMap::dense() const { return proj / std::sqrt(double(proj.rows())); }

void ChainSpec::validate() const {
    if (s1 < 1) throw std::invalid_argument("ChainSpec: s1 must be at least 1");
    if (s2 < 0 || s3 < 0) throw std::invalid_argument("ChainSpec: stage sizes must be non-negative");
    Index prev = s1;
    if (s2 > 0) {
        if (s2 > prev) throw std::invalid_argument("ChainSpec: stage sizes must be non-increasing");
        prev = s2;
    }
    if (s3 > 0 && s3 > prev)
        throw std::invalid_argument("ChainSpec: stage sizes must be non-increasing");
}

Index ChainSpec::output_dim() const {
    if (s3 > 0) return s3;
    if (s2 > 0) return s2;
    return s1;
}

ChainSpec ChainSpec::scaled_to(Index target) const {
    validate();
    if (target < 1) throw std::invalid_argument("ChainSpec: target size must be at least 1");
    const double factor = double(target) / double(output_dim());
    const auto scale = [&](Index v) {
        return std::max(target, Index(std::ceil(double(v) * factor)));
    };
    ChainSpec out = *this;
    out.s1 = scale(s1);
    if (s2 > 0) out.s2 = scale(s2);
    if (s3 > 0) out.s3 = scale(s3);
    if (out.s3 > 0)
        out.s3 = target;
    else if (out.s2 > 0)
        out.s2 = target;
    else
        out.s1 = target;
    out.validate();
    return out;
}

Vector SketchChain::apply(const Vector& x) const {
    if (x.size() != in_dim) throw DimensionMismatch("SketchChain: input dimension mismatch");
    Vector v;
    if (tensor) {
        v = tensor->apply(kernels::augmented_point(kernel, x));
    } else {
        v = rff->apply(x);
    }
    if (srht) v = srht->apply(v);
    if (gauss) v = gauss->apply(v);
    return v;
}

Matrix SketchChain::apply_rows(const Matrix& x) const {
    Matrix z(x.rows(), out_dim);
    for (Index i = 0; i < x.rows(); ++i) z.row(i) = apply(x.row(i).transpose()).transpose();
    return z;
}

SketchChain realize_chain(const ChainSpec& spec, const kernels::KernelSpec& kernel,
                          Index input_dim, std::uint64_t master_seed) {
    spec.validate();
    kernel.validate();
    if (spec.first == FeatureMapKind::RandomFourier && kernel.family != KernelFamily::Gaussian)
        throw std::invalid_argument("realize_chain: random Fourier features serve the Gaussian kernel");
    if (spec.first == FeatureMapKind::TensorSketch && kernel.family != KernelFamily::Polynomial)
        throw std::invalid_argument("realize_chain: TensorSketch serves the polynomial kernel");

    SketchChain chain;
    chain.kernel = kernel;
    chain.in_dim = input_dim;
    Index prev = spec.s1;
    if (spec.first == FeatureMapKind::RandomFourier) {
        chain.rff.emplace(input_dim, spec.s1, kernel.sigma, stage_seed(master_seed, 0));
    } else {
        const Index d_aug = input_dim + 1;  // augmented representation
        chain.tensor.emplace(d_aug, spec.s1, kernel.degree, stage_seed(master_seed, 0));
    }
    if (spec.s2 > 0) {
        chain.srht.emplace(prev, spec.s2, stage_seed(master_seed, 1));
        prev = spec.s2;
    }
    if (spec.s3 > 0) {
        chain.gauss.emplace(prev, spec.s3, stage_seed(master_seed, 2));
        prev = spec.s3;
    }
    chain.out_dim = prev;
    return chain;
}

}  // namespace krr::sketches
