// End-to-end tests that drive the installed CLI binary.

#include <krr/io.hpp>
#include <krr/kernels.hpp>
#include <krr/solver.hpp>

#include "support/oracles.hpp"
#include "support/synth.hpp"
#include "support/tempdir.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

using namespace krr;

namespace {

int run_cli(const std::string& args, const std::filesystem::path& capture = {}) {
    std::string cmd = std::string(KRR_CLI_PATH) + " " + args;
    if (capture.empty())
        cmd += " >/dev/null 2>&1";
    else
        cmd += " >" + capture.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("train/eval on the four-point xor corners reaches zero training error") {
    testutil::TempDir dir("cli_xor");
    const auto data = synth::xor_blobs(4, 0.0, 1);
    io::write_libsvm(dir.file("xor.svm"), data.x, data.labels);

    const double lambda = 0.01;
    const auto model_path = dir.file("xor.krrm");
    const int rc = run_cli("train --data " + dir.file("xor.svm").string() +
                           " --kernel gaussian --sigma 1.0 --lambda 0.01 --s1 4 --seed 7"
                           " --model-out " + model_path.string());
    CHECK(rc == 0);

    // independent anchor: the dense 4x4 solve also classifies perfectly
    const auto kernel = kernels::KernelSpec::gaussian(1.0);
    Matrix a = kernels::gram_matrix(kernel, data.x);
    a.diagonal().array() += lambda;
    const Matrix c = oracles::dense_spd_solve(a, data.y);
    const Matrix scores = kernels::gram_matrix(kernel, data.x) * c;
    for (Index i = 0; i < 4; ++i)
        CHECK((scores(i, 1) > scores(i, 0)) == (data.labels[std::size_t(i)] > 0));

    const auto out = dir.file("eval.txt");
    CHECK(run_cli("eval --data " + dir.file("xor.svm").string() + " --model " +
                      model_path.string(),
                  out) == 0);
    CHECK(slurp(out).find("error rate: 0") != std::string::npos);
}

TEST_CASE("identical seeds produce identical models, different seeds do not") {
    testutil::TempDir dir("cli_det");
    const auto data = synth::xor_blobs(80, 0.5, 3);
    io::write_libsvm(dir.file("d.svm"), data.x, data.labels);

    const std::string common = "train --data " + dir.file("d.svm").string() +
                               " --kernel gaussian --sigma 1.2 --lambda 0.01 --s1 16";
    CHECK(run_cli(common + " --seed 42 --model-out " + dir.file("m1.krrm").string()) == 0);
    CHECK(run_cli(common + " --seed 42 --model-out " + dir.file("m2.krrm").string()) == 0);
    CHECK(run_cli(common + " --seed 43 --model-out " + dir.file("m3.krrm").string()) == 0);

    CHECK(slurp(dir.file("m1.krrm")) == slurp(dir.file("m2.krrm")));
    CHECK(slurp(dir.file("m1.krrm")) != slurp(dir.file("m3.krrm")));
}

TEST_CASE("model round trip through the CLI keeps predictions bitwise identical") {
    testutil::TempDir dir("cli_rt");
    const auto data = synth::xor_blobs(40, 0.4, 9);
    io::write_libsvm(dir.file("d.svm"), data.x, data.labels);
    CHECK(run_cli("train --data " + dir.file("d.svm").string() +
                  " --kernel gaussian --sigma 1.0 --lambda 0.05 --s1 8 --seed 1"
                  " --model-out " + dir.file("m.krrm").string()) == 0);

    const auto m1 = io::load_model(dir.file("m.krrm"));
    io::save_model(dir.file("m_again.krrm"), m1);
    const auto m2 = io::load_model(dir.file("m_again.krrm"));
    const Matrix s1 = solver::predict_scores(m1, data.x);
    const Matrix s2 = solver::predict_scores(m2, data.x);
    CHECK((s1 - s2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("predict with a wider query dimension exits with the data error code") {
    testutil::TempDir dir("cli_dim");
    const auto data = synth::xor_blobs(20, 0.3, 5);
    io::write_libsvm(dir.file("d.svm"), data.x, data.labels);
    CHECK(run_cli("train --data " + dir.file("d.svm").string() +
                  " --kernel gaussian --lambda 0.1 --s1 8"
                  " --model-out " + dir.file("m.krrm").string()) == 0);

    std::ofstream wide(dir.file("wide.svm"));
    wide << "1 1:0.5 5:1.0\n";  // d = 5 > model d = 2
    wide.close();
    CHECK(run_cli("predict --data " + dir.file("wide.svm").string() + " --model " +
                  dir.file("m.krrm").string()) == 2);

    // narrower libsvm queries are padded, not rejected
    std::ofstream narrow(dir.file("narrow.svm"));
    narrow << "1 1:0.5\n";
    narrow.close();
    CHECK(run_cli("predict --data " + dir.file("narrow.svm").string() + " --model " +
                  dir.file("m.krrm").string()) == 0);
}

TEST_CASE("statdim prints n/2 for a unit-diagonal kernel at lambda 1") {
    testutil::TempDir dir("cli_sd");
    // far-apart points and a narrow kernel: K is numerically the identity
    Matrix x(10, 1);
    for (Index i = 0; i < 10; ++i) x(i, 0) = double(i) * 100.0;
    std::vector<double> labels(10, 1.0);
    labels[0] = -1.0;
    io::write_libsvm(dir.file("far.svm"), x, labels);

    const auto out = dir.file("sd.txt");
    CHECK(run_cli("statdim --data " + dir.file("far.svm").string() +
                      " --kernel gaussian --sigma 0.01 --lambda 1.0",
                  out) == 0);
    const double value = std::stod(slurp(out));
    CHECK(value == doctest::Approx(5.0).epsilon(1e-9));
}

TEST_CASE("bench prints all three rows") {
    testutil::TempDir dir("cli_bench");
    const auto train_data = synth::xor_blobs(64, 0.5, 11);
    const auto test_data = synth::xor_blobs(32, 0.5, 12);
    io::write_libsvm(dir.file("train.svm"), train_data.x, train_data.labels);
    io::write_libsvm(dir.file("test.svm"), test_data.x, test_data.labels);

    const auto out = dir.file("bench.txt");
    CHECK(run_cli("bench --data " + dir.file("train.svm").string() + " --test " +
                      dir.file("test.svm").string() +
                      " --kernel gaussian --sigma 1.0 --lambda 0.01 --s1 16 --seed 2",
                  out) == 0);
    const std::string text = slurp(out);
    CHECK(text.find("pcg+precond") != std::string::npos);
    CHECK(text.find("plain-cg") != std::string::npos);
    CHECK(text.find("random-features") != std::string::npos);
}

TEST_CASE("json output carries the report schema keys") {
    testutil::TempDir dir("cli_json");
    const auto data = synth::xor_blobs(32, 0.4, 13);
    io::write_libsvm(dir.file("d.svm"), data.x, data.labels);

    const auto out = dir.file("train.json");
    CHECK(run_cli("train --data " + dir.file("d.svm").string() +
                      " --kernel gaussian --lambda 0.05 --s1 8 --seed 3 --json"
                      " --model-out " + dir.file("m.krrm").string(),
                  out) == 0);
    const std::string text = slurp(out);
    for (const char* key :
         {"\"command\"", "\"config\"", "\"per_rhs\"", "\"metric\"", "\"wall_time_sec\"",
          "\"iterations\"", "\"residual\"", "\"converged\""})
        CHECK(text.find(key) != std::string::npos);
}

TEST_CASE("csv regression path works end to end") {
    testutil::TempDir dir("cli_csv");
    std::ofstream csv(dir.file("r.csv"));
    csv << "y,f1\n";
    for (int i = 0; i < 24; ++i) {
        const double t = double(i) / 4.0;
        csv << (std::sin(t) + 0.5) << "," << t << "\n";
    }
    csv.close();

    CHECK(run_cli("train --data " + dir.file("r.csv").string() +
                  " --format csv --header --task regress --kernel gaussian --sigma 1.0"
                  " --lambda 0.001 --s1 8 --model-out " + dir.file("m.krrm").string()) == 0);
    const auto out = dir.file("eval.txt");
    CHECK(run_cli("eval --data " + dir.file("r.csv").string() +
                      " --format csv --header --model " + dir.file("m.krrm").string(),
                  out) == 0);
    const std::string text = slurp(out);
    REQUIRE(text.find("mse: ") != std::string::npos);
    const double mse = std::stod(text.substr(text.find("mse: ") + 5));
    CHECK(mse <= 1e-3);
}

TEST_CASE("an iteration-starved train exits 3 but still writes the model") {
    testutil::TempDir dir("cli_nc");
    const auto data = synth::xor_blobs(60, 0.5, 21);
    io::write_libsvm(dir.file("d.svm"), data.x, data.labels);
    const auto model_path = dir.file("m.krrm");
    CHECK(run_cli("train --data " + dir.file("d.svm").string() +
                  " --kernel gaussian --sigma 0.8 --lambda 1e-8 --s1 4 --tau 1e-12"
                  " --max-iter 1 --model-out " + model_path.string()) == 3);
    CHECK(std::filesystem::exists(model_path));
    CHECK_NOTHROW(io::load_model(model_path));
}

TEST_CASE("usage errors exit 1") {
    CHECK(run_cli("train") == 1);                      // missing required flags
    CHECK(run_cli("definitely-not-a-subcommand") == 1);
    CHECK(run_cli("--help") == 0);
}
