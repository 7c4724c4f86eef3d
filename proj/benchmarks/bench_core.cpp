#include <krr/kernels.hpp>
#include <krr/numerics.hpp>
#include <krr/precond.hpp>
#include <krr/sketches.hpp>
#include <krr/solver.hpp>

#include <benchmark/benchmark.h>

#include <random>

using namespace krr;

namespace {

Matrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = normal(gen);
    return m;
}

void BM_GramGaussian(benchmark::State& state) {
    const Index n = state.range(0);
    const Matrix x = random_matrix(n, 16, 1);
    const auto kernel = kernels::KernelSpec::gaussian(1.0);
    for (auto _ : state) benchmark::DoNotOptimize(kernels::gram_matrix(kernel, x));
    state.SetComplexityN(n);
}
BENCHMARK(BM_GramGaussian)->Arg(256)->Arg(512)->Arg(1024)->Complexity(benchmark::oNSquared);

void BM_Fwht(benchmark::State& state) {
    const Index m = state.range(0);
    const Vector x = random_matrix(m, 1, 2).col(0);
    for (auto _ : state) benchmark::DoNotOptimize(numerics::fwht(x));
}
BENCHMARK(BM_Fwht)->Arg(1 << 10)->Arg(1 << 12)->Arg(1 << 14);

void BM_TensorSketchApply(benchmark::State& state) {
    const Index s = state.range(0);
    const sketches::TensorSketchMap map(128, s, 3, 3);
    const Vector x = random_matrix(128, 1, 4).col(0);
    for (auto _ : state) benchmark::DoNotOptimize(map.apply(x));
}
BENCHMARK(BM_TensorSketchApply)->Arg(256)->Arg(1024)->Arg(4096);

void BM_RffRows(benchmark::State& state) {
    const Index n = state.range(0);
    const auto kernel = kernels::KernelSpec::gaussian(1.0);
    sketches::ChainSpec spec;
    spec.first = sketches::FeatureMapKind::RandomFourier;
    spec.s1 = 256;
    const auto chain = sketches::realize_chain(spec, kernel, 16, 5);
    const Matrix x = random_matrix(n, 16, 6);
    for (auto _ : state) benchmark::DoNotOptimize(chain.apply_rows(x));
}
BENCHMARK(BM_RffRows)->Arg(512)->Arg(2048);

void BM_BuildPreconditioner(benchmark::State& state) {
    const Index n = state.range(0);
    const Matrix z = random_matrix(n, n / 8, 7);
    for (auto _ : state) benchmark::DoNotOptimize(precond::build_preconditioner(z, 0.1));
}
BENCHMARK(BM_BuildPreconditioner)->Arg(512)->Arg(1024)->Arg(2048);

void BM_PcgSolve(benchmark::State& state) {
    const Index n = state.range(0);
    const Matrix m = random_matrix(n, n, 8);
    Matrix a = m * m.transpose() / double(n);
    a.diagonal().array() += 1.0;
    const Vector y = random_matrix(n, 1, 9).col(0);
    const auto apply = [&](const Vector& v) -> Vector { return a * v; };
    for (auto _ : state)
        benchmark::DoNotOptimize(solver::pcg_solve(apply, nullptr, y, 1e-8, 500));
}
BENCHMARK(BM_PcgSolve)->Arg(512)->Arg(1024);

void BM_QualityTest(benchmark::State& state) {
    const Index n = state.range(0);
    const auto kernel = kernels::KernelSpec::gaussian(1.0);
    const Matrix x = random_matrix(n, 8, 10);
    const Matrix k = kernels::gram_matrix(kernel, x);
    sketches::ChainSpec spec;
    spec.first = sketches::FeatureMapKind::RandomFourier;
    spec.s1 = n / 8;
    const auto chain = sketches::realize_chain(spec, kernel, 8, 11);
    const Matrix z = chain.apply_rows(x);
    for (auto _ : state) benchmark::DoNotOptimize(precond::quality_test(k, z, 1.0));
}
BENCHMARK(BM_QualityTest)->Arg(256)->Arg(512);

}  // namespace

BENCHMARK_MAIN();
