// Acceptance suite: one quantitative check per criterion, one PASS/FAIL line
// each, nonzero exit if anything fails.

#include <krr/io.hpp>
#include <krr/kernels.hpp>
#include <krr/numerics.hpp>
#include <krr/precond.hpp>
#include <krr/sketches.hpp>
#include <krr/solver.hpp>

#include "support/oracles.hpp"
#include "support/synth.hpp"
#include "support/tempdir.hpp"

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace krr;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(KRR_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return (status != -1 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// 1. Woodbury correctness of the preconditioner apply.
bool woodbury_correctness(std::string& detail) {
    const double shifts[] = {1e-3, 1e-1, 10.0};
    double worst = 0.0;
    for (std::uint64_t trial = 0; trial < 50; ++trial) {
        const double lambda_p = shifts[trial % 3];
        const Matrix z = oracles::random_matrix(300, 50, 1000 + trial);
        const auto p = precond::build_preconditioner(z, lambda_p);
        const Vector x = oracles::random_vector(300, 2000 + trial);
        const Vector mx = p.apply(x);
        const Vector round_trip = z * (z.transpose() * mx) + lambda_p * mx;
        worst = std::max(worst, (round_trip - x).norm() / x.norm());
    }
    std::ostringstream os;
    os << "max relative identity error " << worst << " over 50 cases (limit 1e-8)";
    detail = os.str();
    return worst <= 1e-8;
}

// 2. TensorSketch FFT path vs the explicit tensor-power CountSketch.
bool tensorsketch_oracle(std::string& detail) {
    double worst = 0.0;
    for (Index d = 2; d <= 6; ++d)
        for (int q = 1; q <= 3; ++q)
            for (Index s : {4, 8, 16})
                for (std::uint64_t seed = 0; seed < 20; ++seed) {
                    const sketches::TensorSketchMap map(d, s, q, 31337 + seed);
                    const Vector x = oracles::random_vector(d, 77 + seed);
                    const Vector fast = map.apply(x);
                    const Vector slow = oracles::explicit_tensorsketch(map, x);
                    worst = std::max(worst, (fast - slow).cwiseAbs().maxCoeff());
                }
    std::ostringstream os;
    os << "max |fft - explicit| " << worst << " over (d,q,s) grid x 20 seeds (limit 1e-12)";
    detail = os.str();
    return worst <= 1e-12;
}

// 3. Unbiasedness of all four transforms.
bool unbiasedness(std::string& detail) {
    std::ostringstream os;
    bool ok = true;

    {  // RFF: mean of phi(x)'phi(z) over 50 maps vs the Gaussian kernel
        const double sigma = 1.1;
        const Vector x = oracles::random_vector(5, 1, 0.5);
        const Vector z = oracles::random_vector(5, 2, 0.5);
        const double target = std::exp(-(x - z).squaredNorm() / (2.0 * sigma * sigma));
        std::vector<double> estimates;
        for (int m = 0; m < 50; ++m) {
            const sketches::RffMap map(5, 2000, sigma, std::uint64_t(100 + m));
            estimates.push_back(map.apply(x).dot(map.apply(z)));
        }
        double mean = 0.0, var = 0.0;
        for (double e : estimates) mean += e;
        mean /= double(estimates.size());
        for (double e : estimates) var += (e - mean) * (e - mean);
        var /= double(estimates.size() - 1);
        const double se = std::sqrt(var / double(estimates.size()));
        const bool pass = std::abs(mean - target) <= 3.0 * se;
        os << "rff |mean-k|=" << std::abs(mean - target) << " (3se=" << 3.0 * se << ")";
        ok = ok && pass;
    }
    {  // TensorSketch: mean of phi(x)'phi(z) over 200 maps vs (x'z)^q
        const int q = 2;
        const Vector x = oracles::random_vector(5, 3, 0.6);
        const Vector z = oracles::random_vector(5, 4, 0.6);
        const double target = std::pow(x.dot(z), q);
        std::vector<double> estimates;
        for (int m = 0; m < 200; ++m) {
            const sketches::TensorSketchMap map(5, 64, q, std::uint64_t(500 + m));
            estimates.push_back(map.apply(x).dot(map.apply(z)));
        }
        double mean = 0.0, var = 0.0;
        for (double e : estimates) mean += e;
        mean /= double(estimates.size());
        for (double e : estimates) var += (e - mean) * (e - mean);
        var /= double(estimates.size() - 1);
        const double se = std::sqrt(var / double(estimates.size()));
        const bool pass = std::abs(mean - target) <= 3.0 * se;
        os << "; ts |mean-k|=" << std::abs(mean - target) << " (3se=" << 3.0 * se << ")";
        ok = ok && pass;
    }
    {  // SRHT and Gaussian: mean squared norm within 5%
        const Vector x = oracles::random_vector(64, 5);
        double srht_mean = 0.0, gauss_mean = 0.0;
        for (int t = 0; t < 500; ++t) {
            srht_mean += sketches::SrhtMap(64, 16, std::uint64_t(3000 + t)).apply(x).squaredNorm();
            gauss_mean +=
                sketches::GaussianMap(64, 16, std::uint64_t(4000 + t)).apply(x).squaredNorm();
        }
        srht_mean /= 500.0;
        gauss_mean /= 500.0;
        const double srht_err = std::abs(srht_mean - x.squaredNorm()) / x.squaredNorm();
        const double gauss_err = std::abs(gauss_mean - x.squaredNorm()) / x.squaredNorm();
        os << "; srht norm err " << srht_err << ", gaussian norm err " << gauss_err
           << " (limit 0.05)";
        ok = ok && srht_err <= 0.05 && gauss_err <= 0.05;
    }
    detail = os.str();
    return ok;
}

// 4. The two-sided spectral sandwich gives convergence within 13 iterations.
bool iteration_bound(std::string& detail) {
    const Index n = 512;
    const double lambda = 0.05;
    Vector spectrum(n);
    for (Index i = 0; i < n; ++i) spectrum[i] = 80.0 * std::exp(-0.05 * double(i));
    const Matrix q = oracles::random_orthogonal(n, 8);
    const Matrix k = q * spectrum.asDiagonal() * q.transpose();

    std::mt19937_64 gen(9);
    std::uniform_real_distribution<double> factor(0.8, 1.25);
    Vector perturbed(n);
    for (Index i = 0; i < n; ++i) perturbed[i] = spectrum[i] * factor(gen);
    const Matrix z = q * perturbed.cwiseSqrt().asDiagonal();

    Matrix a = k;
    a.diagonal().array() += lambda;
    Matrix b = z * z.transpose();
    b.diagonal().array() += lambda;
    const Vector pencil = oracles::generalized_eigenvalues(a, b);
    if (pencil.minCoeff() < 2.0 / 3.0 || pencil.maxCoeff() > 2.0) {
        detail = "construction failed the sandwich certificate";
        return false;
    }

    const auto p = precond::build_preconditioner(z, lambda);
    const Vector y = oracles::random_vector(n, 10);
    const Vector exact = oracles::dense_spd_solve(a, y);
    const double initial = solver::energy_norm_error(Vector::Zero(n), exact, k, lambda);

    int needed = -1;
    const auto observer = [&](int it, const Vector& c) {
        if (needed < 0 && solver::energy_norm_error(c, exact, k, lambda) <= 1e-6 * initial)
            needed = it;
    };
    solver::pcg_solve([&](const Vector& v) -> Vector { return a * v; },
                      [&](const Vector& v) -> Vector { return p.apply(v); }, y, 1e-14, 100,
                      observer);
    std::ostringstream os;
    os << "pencil in [" << pencil.minCoeff() << ", " << pencil.maxCoeff()
       << "], energy error 1e-6 reached at iteration " << needed << " (limit 13)";
    detail = os.str();
    return needed >= 1 && needed <= 13;
}

// 5. Wherever the quality test passes, the pencil lies within 1 +/- 0.95.
bool quality_test_soundness(std::string& detail) {
    const auto kernel = kernels::KernelSpec::polynomial(1.0, 0.5, 2);
    int passing = 0;
    double lo = 1.0, hi = 1.0;
    for (std::uint64_t inst = 0; inst < 20; ++inst) {
        const Index n = 256 + Index(inst % 5) * 64;  // 256..512
        const Matrix x = synth::sphere_inputs(n, 6, 42 + inst);
        const Matrix k = kernels::gram_matrix(kernel, x);
        const double lambda = 0.02 * numerics::symmetric_eigen(k).eigenvalues[0];

        sketches::ChainSpec chain;
        chain.first = sketches::FeatureMapKind::TensorSketch;
        chain.s1 = 32;
        const auto result =
            precond::adaptive_build(k, x, chain, kernel, lambda, lambda, 32, n, 7000 + inst);
        if (!result.passed()) continue;
        ++passing;

        Matrix a = k;
        a.diagonal().array() += lambda;
        Matrix b = result.z * result.z.transpose();
        b.diagonal().array() += lambda;
        const Vector pencil = oracles::generalized_eigenvalues(a, b);
        lo = std::min(lo, pencil.minCoeff());
        hi = std::max(hi, pencil.maxCoeff());
    }
    std::ostringstream os;
    os << passing << "/20 instances passed the quality test; pencil range [" << lo << ", " << hi
       << "] (required within [0.05, 1.95])";
    detail = os.str();
    return passing == 20 && lo >= 0.05 && hi <= 1.95;
}

// 6. Preconditioning cuts iterations by at least 3x on a fast-decay instance.
bool preconditioning_advantage(std::string& detail) {
    const Index n = 2000;
    const double lambda = 1e-3 * double(n);
    const double tau = 1e-5;
    const auto kernel = kernels::KernelSpec::gaussian(1.0);
    const auto data = synth::xor_blobs(n, 0.6, 77);
    const Matrix k = kernels::gram_matrix(kernel, data.x);
    const Vector y = data.y.col(0);

    Matrix a = k;
    a.diagonal().array() += lambda;
    const Vector exact = oracles::dense_spd_solve(a, y);
    const double exact_energy = solver::energy_norm_error(Vector::Zero(n), exact, k, lambda);

    sketches::ChainSpec chain;
    chain.first = sketches::FeatureMapKind::RandomFourier;
    chain.s1 = 64;
    const auto adaptive = precond::adaptive_build(
        k, data.x, chain, kernel, lambda, lambda,
        precond::default_initial_sketch_size(n), n, 11);

    const auto apply_a = [&](const Vector& v) -> Vector { return a * v; };
    const auto apply_m = [&](const Vector& v) -> Vector {
        return adaptive.preconditioner.apply(v);
    };
    const auto with = solver::pcg_solve(apply_a, apply_m, y, tau, 1000);
    const auto without = solver::pcg_solve(apply_a, nullptr, y, tau, 1000);

    const double err_with = solver::energy_norm_error(with.solution, exact, k, lambda);
    const double err_without = solver::energy_norm_error(without.solution, exact, k, lambda);

    std::ostringstream os;
    os << "iterations " << with.stats.iterations << " vs " << without.stats.iterations
       << " (need <= 1/3), relative energy errors " << err_with / exact_energy << " / "
       << err_without / exact_energy << " (limit " << 10.0 * tau << ")";
    detail = os.str();
    return with.stats.converged && without.stats.converged &&
           3 * with.stats.iterations <= without.stats.iterations &&
           err_with <= 10.0 * tau * exact_energy && err_without <= 10.0 * tau * exact_energy;
}

// 7. Statistical dimension against the dense trace definition; monotone in lambda.
bool statistical_dimension_checks(std::string& detail) {
    double worst = 0.0;
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
        const Index n = 30 + Index(trial % 4) * 10;
        const Matrix m = oracles::random_matrix(n, n, 600 + trial);
        const Matrix k = m * m.transpose();
        const double lambda = 0.5 + double(trial % 7) * 0.3;
        const auto eig = numerics::symmetric_eigen(k);
        const double sd = kernels::statistical_dimension(eig.eigenvalues, lambda);

        Matrix shifted = k;
        shifted.diagonal().array() += lambda;
        const double reference = (shifted.inverse() * k).trace();
        worst = std::max(worst, std::abs(sd - reference));
    }

    bool monotone = true;
    const Matrix m = oracles::random_matrix(40, 40, 901);
    const auto eig = numerics::symmetric_eigen(m * m.transpose());
    double prev = kernels::statistical_dimension(eig.eigenvalues, 1e-4);
    for (int i = 1; i < 10; ++i) {
        const double lambda = 1e-4 * std::pow(10.0, i * 0.8);
        const double cur = kernels::statistical_dimension(eig.eigenvalues, lambda);
        monotone = monotone && cur <= prev + 1e-12;
        prev = cur;
    }
    std::ostringstream os;
    os << "max |formula - trace| " << worst << " over 20 matrices (limit 1e-10), monotone="
       << (monotone ? "yes" : "no");
    detail = os.str();
    return worst <= 1e-10 && monotone;
}

// 8. Three-level chain equals the explicit composed matrix product.
bool multilevel_chain_consistency(std::string& detail) {
    const auto kernel = kernels::KernelSpec::polynomial(1.0, 0.5, 2);
    sketches::ChainSpec spec;
    spec.first = sketches::FeatureMapKind::TensorSketch;
    spec.s1 = 1024;
    spec.s2 = 256;
    spec.s3 = 128;
    const Matrix x = 0.5 * oracles::random_matrix(64, 8, 12);
    const auto chain = sketches::realize_chain(spec, kernel, 8, 321);

    Matrix z1(64, 1024);
    for (Index i = 0; i < 64; ++i)
        z1.row(i) = chain.tensor
                        ->apply(kernels::augmented_point(kernel, x.row(i).transpose()))
                        .transpose();
    const Matrix expected =
        z1 * chain.srht->dense().transpose() * chain.gauss->dense().transpose();
    const Matrix z = chain.apply_rows(x);
    const double err = (z - expected).cwiseAbs().maxCoeff();
    std::ostringstream os;
    os << "max |chain - explicit product| " << err << " on 64 rows (limit 1e-10)";
    detail = os.str();
    return err <= 1e-10;
}

// 9. CLI end to end: convergence, training error, bitwise determinism.
bool cli_end_to_end(std::string& detail) {
    testutil::TempDir dir("acceptance_cli");
    const Index n = 500;
    const auto data = synth::xor_blobs(n, 0.6, 99);
    io::write_libsvm(dir.file("toy.svm"), data.x, data.labels);

    const double lambda = 0.01;
    const std::string train_cmd = "train --data " + dir.file("toy.svm").string() +
                                  " --kernel gaussian --sigma 1.0 --lambda 0.01 --s1 64"
                                  " --seed 5 --model-out ";
    const int rc1 = run_cli(train_cmd + dir.file("m1.krrm").string());
    const int rc2 = run_cli(train_cmd + dir.file("m2.krrm").string());
    if (rc1 != 0 || rc2 != 0) {
        detail = "train exited with " + std::to_string(rc1) + "/" + std::to_string(rc2);
        return false;
    }
    const bool identical = slurp(dir.file("m1.krrm")) == slurp(dir.file("m2.krrm"));

    const auto model = io::load_model(dir.file("m1.krrm"));
    const double err = io::error_rate(solver::predict_labels(model, data.x), data.labels);

    // dense direct-solve oracle achieves the same bar on this instance
    const auto kernel = kernels::KernelSpec::gaussian(1.0);
    Matrix a = kernels::gram_matrix(kernel, data.x);
    a.diagonal().array() += lambda;
    solver::KrrModel direct;
    direct.kernel = kernel;
    direct.x = data.x;
    direct.c = oracles::dense_spd_solve(a, data.y);
    direct.label_map = data.label_map;
    const double direct_err = io::error_rate(solver::predict_labels(direct, data.x), data.labels);

    std::ostringstream os;
    os << "train error " << err << " (oracle " << direct_err
       << ", limit 0.05), models bitwise identical: " << (identical ? "yes" : "no");
    detail = os.str();
    return err <= 0.05 && direct_err <= 0.05 && identical;
}

// 10. Solving the exact system beats sketch-and-solve at s = n/16.
bool sketch_and_solve_gap(std::string& detail) {
    const Index n = 512;
    const Index s = n / 16;
    const auto kernel = kernels::KernelSpec::gaussian(1.0);
    int wins = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto train_data = synth::xor_blobs(n, 0.6, 2000 + seed);
        const auto test_data = synth::xor_blobs(256, 0.6, 3000 + seed);

        sketches::ChainSpec chain;
        chain.first = sketches::FeatureMapKind::RandomFourier;
        chain.s1 = s;

        solver::SolverConfig cfg;
        cfg.lambda = 0.01;
        cfg.tau = 1e-5;
        cfg.chain = chain;
        cfg.seed = seed;
        const auto full = solver::train(train_data, kernel, cfg);
        const double full_mse = io::mean_squared_error(
            solver::predict_scores(full.model, test_data.x), test_data.y);

        const auto baseline =
            solver::train_random_features_baseline(train_data, kernel, chain, cfg.lambda, seed);
        const double baseline_mse = io::mean_squared_error(
            solver::baseline_predict_scores(baseline, test_data.x), test_data.y);

        if (full_mse <= baseline_mse) ++wins;
    }
    std::ostringstream os;
    os << "full KRR beat the random-features baseline on " << wins << "/10 seeds (need >= 8)";
    detail = os.str();
    return wins >= 8;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<bool(std::string&)> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "Woodbury preconditioner correctness", woodbury_correctness},
        {2, "TensorSketch FFT/explicit equivalence", tensorsketch_oracle},
        {3, "Unbiasedness of RFF, TensorSketch, SRHT, Gaussian", unbiasedness},
        {4, "Sandwich certificate gives <= 13 PCG iterations", iteration_bound},
        {5, "Quality-test soundness on polynomial instances", quality_test_soundness},
        {6, "Preconditioning advantage at n = 2000", preconditioning_advantage},
        {7, "Statistical dimension formula and monotonicity", statistical_dimension_checks},
        {8, "Multi-level chain matrix consistency", multilevel_chain_consistency},
        {9, "CLI end-to-end determinism and accuracy", cli_end_to_end},
        {10, "Sketch-to-precondition beats sketch-and-solve", sketch_and_solve_gap},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        const auto start = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = false;
        try {
            ok = criterion.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cout << (ok ? "PASS" : "FAIL") << "  criterion " << criterion.id << ": "
                  << criterion.name << " - " << detail << "  [" << std::fixed
                  << std::setprecision(1) << secs << "s]" << std::defaultfloat << "\n";
        if (!ok) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
