// Command-line front end: train, predict, eval, bench, statdim.
//
// Exit codes: 0 success, 1 usage error, 2 data/numeric error,
// 3 training did not converge (the model is still written).

#include <krr/io.hpp>
#include <krr/kernels.hpp>
#include <krr/numerics.hpp>
#include <krr/precond.hpp>
#include <krr/sketches.hpp>
#include <krr/solver.hpp>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using json = nlohmann::json;
using krr::Index;
using krr::Matrix;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNotConverged = 3;

struct Options {
    // data
    std::string data_path;
    std::string test_path;
    std::string format = "libsvm";
    std::string task = "classify";
    bool csv_header = false;
    // kernel
    std::string kernel = "gaussian";
    double sigma = 1.0;
    double gamma = 1.0;
    double offset = 0.0;
    int degree = 2;
    // solver
    double lambda = 0.01;
    std::optional<double> lambda_p;
    std::optional<double> tau;
    int max_iter = 1000;
    std::uint64_t seed = 0;
    // sketch
    std::string sketch;  // empty = pick by kernel
    Index s1 = 0;        // 0 = auto
    Index s2 = 0;
    Index s3 = 0;
    bool adaptive = false;
    Index s0 = 0;
    Index s_max = 0;
    // misc
    std::string model_path;
    std::string out_path;
    double delta = 0.1;
    bool emit_json = false;
};

krr::io::Format parse_format(const Options& opt) {
    return opt.format == "csv" ? krr::io::Format::Csv : krr::io::Format::Libsvm;
}

krr::io::Task parse_task(const Options& opt) {
    return opt.task == "regress" ? krr::io::Task::Regress : krr::io::Task::Classify;
}

krr::kernels::KernelSpec make_kernel(const Options& opt) {
    if (opt.kernel == "gaussian") return krr::kernels::KernelSpec::gaussian(opt.sigma);
    return krr::kernels::KernelSpec::polynomial(opt.gamma, opt.offset, opt.degree);
}

krr::sketches::ChainSpec make_chain(const Options& opt, Index n) {
    krr::sketches::ChainSpec chain;
    const std::string kind =
        !opt.sketch.empty() ? opt.sketch : (opt.kernel == "gaussian" ? "rff" : "tensorsketch");
    chain.first = kind == "rff" ? krr::sketches::FeatureMapKind::RandomFourier
                                : krr::sketches::FeatureMapKind::TensorSketch;
    chain.s1 = opt.s1 > 0 ? opt.s1 : std::max<Index>(64, (n + 7) / 8);
    chain.s2 = opt.s2;
    chain.s3 = opt.s3;
    chain.validate();
    return chain;
}

krr::solver::SolverConfig make_solver_config(const Options& opt, Index n) {
    krr::solver::SolverConfig cfg;
    cfg.lambda = opt.lambda;
    cfg.lambda_p = opt.lambda_p;
    cfg.tau = opt.tau ? *opt.tau : (parse_task(opt) == krr::io::Task::Classify ? 1e-3 : 1e-5);
    cfg.max_iter = opt.max_iter;
    cfg.seed = opt.seed;
    cfg.chain = make_chain(opt, n);
    cfg.adaptive = opt.adaptive;
    cfg.s0 = opt.s0;
    cfg.s_max = opt.s_max;
    return cfg;
}

json config_json(const Options& opt, const krr::solver::SolverConfig& cfg) {
    json j;
    j["kernel"] = opt.kernel;
    if (opt.kernel == "gaussian") {
        j["sigma"] = opt.sigma;
    } else {
        j["gamma"] = opt.gamma;
        j["offset"] = opt.offset;
        j["degree"] = opt.degree;
    }
    j["lambda"] = cfg.lambda;
    j["lambda_p"] = cfg.lambda_p.value_or(cfg.lambda);
    j["tau"] = cfg.tau;
    j["max_iter"] = cfg.max_iter;
    j["seed"] = cfg.seed;
    j["task"] = opt.task;
    j["sketch"] = cfg.chain.first == krr::sketches::FeatureMapKind::RandomFourier
                      ? "rff"
                      : "tensorsketch";
    j["s1"] = cfg.chain.s1;
    j["s2"] = cfg.chain.s2;
    j["s3"] = cfg.chain.s3;
    j["adaptive"] = cfg.adaptive;
    return j;
}

json per_rhs_json(const krr::solver::PcgReport& report) {
    json arr = json::array();
    for (const auto& rhs : report.per_rhs)
        arr.push_back({{"iterations", rhs.iterations},
                       {"residual", rhs.final_residual},
                       {"converged", rhs.converged}});
    return arr;
}

void print_report(const krr::solver::PcgReport& report) {
    for (std::size_t i = 0; i < report.per_rhs.size(); ++i) {
        const auto& rhs = report.per_rhs[i];
        std::cout << "  rhs " << i << ": " << rhs.iterations << " iterations, residual "
                  << std::scientific << std::setprecision(3) << rhs.final_residual
                  << std::defaultfloat << (rhs.converged ? "" : "  [not converged]") << "\n";
    }
    std::cout << "  total matvecs: " << report.total_matvecs << ", solve time: " << std::fixed
              << std::setprecision(3) << report.wall_time_sec << " s\n"
              << std::defaultfloat;
}

double train_metric(const krr::solver::KrrModel& model, const krr::kernels::Dataset& data) {
    if (model.classification())
        return krr::io::error_rate(krr::solver::predict_labels(model, data.x), data.labels);
    return krr::io::mean_squared_error(krr::solver::predict_scores(model, data.x), data.y);
}

int cmd_train(const Options& opt) {
    const auto data = krr::io::load_dataset(opt.data_path, parse_format(opt), parse_task(opt),
                                            opt.csv_header);
    const auto kernel = make_kernel(opt);
    const auto cfg = make_solver_config(opt, data.n());

    const auto start = std::chrono::steady_clock::now();
    const auto result = krr::solver::train(data, kernel, cfg);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    krr::io::save_model(opt.model_path, result.model);
    const double metric = train_metric(result.model, data);

    if (opt.emit_json) {
        json j;
        j["command"] = "train";
        j["config"] = config_json(opt, cfg);
        j["per_rhs"] = per_rhs_json(result.report);
        j["metric"] = metric;
        j["wall_time_sec"] = wall;
        j["sketch_size"] = result.sketch_size;
        j["quality_passed"] = result.quality_passed;
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "trained on " << data.n() << " points (d=" << data.dim()
                  << ", rhs=" << data.targets() << "), sketch size " << result.sketch_size;
        if (cfg.adaptive)
            std::cout << (result.quality_passed ? " (quality test passed)"
                                                : " (quality test NOT passed)");
        std::cout << "\n";
        print_report(result.report);
        std::cout << "  train " << (data.classification() ? "error rate: " : "mse: ") << metric
                  << "\n  model written to " << opt.model_path << "\n";
    }
    return result.report.all_converged() ? kExitOk : kExitNotConverged;
}

// Loads query data matching the model's task; libsvm rows narrower than the
// model are padded with zeros (absent sparse features), wider ones are an
// error.
Matrix load_query_inputs(const Options& opt, const krr::solver::KrrModel& model,
                         krr::kernels::Dataset* data_out) {
    const auto task = model.classification() ? krr::io::Task::Classify : krr::io::Task::Regress;
    auto data = krr::io::load_dataset(opt.data_path, parse_format(opt), task, opt.csv_header);
    Matrix x = data.x;
    if (x.cols() < model.x.cols() && parse_format(opt) == krr::io::Format::Libsvm) {
        Matrix padded = Matrix::Zero(x.rows(), model.x.cols());
        padded.leftCols(x.cols()) = x;
        x = padded;
    }
    if (x.cols() != model.x.cols())
        throw krr::DimensionMismatch("query dimension " + std::to_string(x.cols()) +
                                     " does not match model dimension " +
                                     std::to_string(model.x.cols()));
    if (data_out) *data_out = std::move(data);
    return x;
}

int cmd_predict(const Options& opt) {
    const auto model = krr::io::load_model(opt.model_path);
    const Matrix xq = load_query_inputs(opt, model, nullptr);

    const auto start = std::chrono::steady_clock::now();
    const Matrix scores = krr::solver::predict_scores(model, xq);
    std::vector<double> labels;
    if (model.classification()) labels = krr::solver::predict_labels(model, xq);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!opt.out_path.empty()) {
        file.open(opt.out_path);
        if (!file) throw std::runtime_error("cannot write '" + opt.out_path + "'");
        out = &file;
    }

    if (opt.emit_json) {
        json j;
        j["command"] = "predict";
        j["config"] = {{"model", opt.model_path}, {"data", opt.data_path}};
        j["per_rhs"] = json::array();
        j["metric"] = nullptr;
        j["wall_time_sec"] = wall;
        if (model.classification()) {
            j["predictions"] = labels;
        } else {
            std::vector<double> values(scores.data(), scores.data() + scores.size());
            j["predictions"] = values;
        }
        *out << j.dump(2) << "\n";
    } else {
        out->precision(17);
        if (model.classification()) {
            for (double label : labels) *out << label << "\n";
        } else {
            for (Index i = 0; i < scores.rows(); ++i) {
                for (Index j = 0; j < scores.cols(); ++j)
                    *out << (j ? " " : "") << scores(i, j);
                *out << "\n";
            }
        }
    }
    return kExitOk;
}

int cmd_eval(const Options& opt) {
    const auto model = krr::io::load_model(opt.model_path);
    krr::kernels::Dataset data;
    const Matrix xq = load_query_inputs(opt, model, &data);

    const auto start = std::chrono::steady_clock::now();
    double metric = 0.0;
    if (model.classification()) {
        metric = krr::io::error_rate(krr::solver::predict_labels(model, xq), data.labels);
    } else {
        metric = krr::io::mean_squared_error(krr::solver::predict_scores(model, xq), data.y);
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (opt.emit_json) {
        json j;
        j["command"] = "eval";
        j["config"] = {{"model", opt.model_path}, {"data", opt.data_path}};
        j["per_rhs"] = json::array();
        j["metric"] = metric;
        j["wall_time_sec"] = wall;
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << (model.classification() ? "error rate: " : "mse: ") << metric << "\n";
    }
    return kExitOk;
}

int cmd_bench(const Options& opt) {
    const auto task = parse_task(opt);
    const auto data = krr::io::load_dataset(opt.data_path, parse_format(opt), task,
                                            opt.csv_header);
    std::optional<krr::kernels::Dataset> test;
    if (!opt.test_path.empty())
        test = krr::io::load_dataset(opt.test_path, parse_format(opt), task, opt.csv_header);

    const auto kernel = make_kernel(opt);
    const auto cfg = make_solver_config(opt, data.n());
    const double lambda_p = cfg.lambda_p.value_or(cfg.lambda);
    const Matrix k = krr::kernels::gram_matrix(kernel, data.x);

    struct Row {
        std::string name;
        int iterations = 0;
        bool has_iterations = true;
        double time_sec = 0.0;
        double train_metric = 0.0;
        std::optional<double> test_metric;
    };
    std::vector<Row> rows;

    const auto metric_for = [&](const krr::solver::KrrModel& model,
                                const krr::kernels::Dataset& d) {
        if (model.classification())
            return krr::io::error_rate(krr::solver::predict_labels(model, d.x), d.labels);
        return krr::io::mean_squared_error(krr::solver::predict_scores(model, d.x), d.y);
    };
    const auto make_model = [&](Matrix c) {
        krr::solver::KrrModel m;
        m.kernel = kernel;
        m.x = data.x;
        m.c = std::move(c);
        m.label_map = data.label_map;
        m.lambda = cfg.lambda;
        m.seed = cfg.seed;
        return m;
    };

    json per_rhs = json::array();
    {  // preconditioned PCG (sketch + Woodbury preconditioner)
        const auto start = std::chrono::steady_clock::now();
        std::optional<krr::precond::Preconditioner> precond;
        if (cfg.adaptive) {
            const Index s0 =
                cfg.s0 > 0 ? cfg.s0 : krr::precond::default_initial_sketch_size(data.n());
            const Index s_max =
                cfg.s_max > 0 ? std::min(cfg.s_max, data.n()) : std::max(data.n(), s0);
            precond = krr::precond::adaptive_build(k, data.x, cfg.chain, kernel, cfg.lambda,
                                                   lambda_p, std::min(s0, s_max), s_max,
                                                   cfg.seed)
                          .preconditioner;
        } else {
            const auto chain =
                krr::sketches::realize_chain(cfg.chain, kernel, data.dim(), cfg.seed);
            precond = krr::precond::build_preconditioner(chain.apply_rows(data.x), lambda_p);
        }
        auto [c, report] =
            krr::solver::solve_regularized(k, data.y, cfg.lambda, precond, cfg.tau, cfg.max_iter);
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const auto model = make_model(std::move(c));
        Row row{"pcg+precond", report.max_iterations(), true, wall, metric_for(model, data), {}};
        if (test) row.test_metric = metric_for(model, *test);
        rows.push_back(row);
        per_rhs = per_rhs_json(report);
    }
    {  // plain CG, no preconditioner
        const auto start = std::chrono::steady_clock::now();
        auto [c, report] = krr::solver::solve_regularized(k, data.y, cfg.lambda, std::nullopt,
                                                          cfg.tau, cfg.max_iter);
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const auto model = make_model(std::move(c));
        Row row{"plain-cg", report.max_iterations(), true, wall, metric_for(model, data), {}};
        if (test) row.test_metric = metric_for(model, *test);
        rows.push_back(row);
    }
    {  // sketch-and-solve random features baseline
        const auto start = std::chrono::steady_clock::now();
        const auto model = krr::solver::train_random_features_baseline(data, kernel, cfg.chain,
                                                                       cfg.lambda, cfg.seed);
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const auto metric_for_baseline = [&](const krr::kernels::Dataset& d) {
            if (model.classification())
                return krr::io::error_rate(krr::solver::baseline_predict_labels(model, d.x),
                                           d.labels);
            return krr::io::mean_squared_error(krr::solver::baseline_predict_scores(model, d.x),
                                               d.y);
        };
        Row row{"random-features", 0, false, wall, metric_for_baseline(data), {}};
        if (test) row.test_metric = metric_for_baseline(*test);
        rows.push_back(row);
    }

    if (opt.emit_json) {
        json j;
        j["command"] = "bench";
        j["config"] = config_json(opt, cfg);
        j["per_rhs"] = per_rhs;
        j["metric"] = rows.front().train_metric;
        j["wall_time_sec"] = rows.front().time_sec;
        json jrows = json::array();
        for (const auto& row : rows) {
            json r = {{"name", row.name},
                      {"time_sec", row.time_sec},
                      {"train_metric", row.train_metric}};
            r["iterations"] = row.has_iterations ? json(row.iterations) : json(nullptr);
            r["test_metric"] = row.test_metric ? json(*row.test_metric) : json(nullptr);
            jrows.push_back(r);
        }
        j["rows"] = jrows;
        std::cout << j.dump(2) << "\n";
    } else {
        const char* metric_name = task == krr::io::Task::Classify ? "error" : "mse";
        std::cout << std::left << std::setw(18) << "method" << std::right << std::setw(12)
                  << "iterations" << std::setw(12) << "time (s)" << std::setw(16)
                  << (std::string("train ") + metric_name) << std::setw(16)
                  << (std::string("test ") + metric_name) << "\n";
        for (const auto& row : rows) {
            std::cout << std::left << std::setw(18) << row.name << std::right << std::setw(12);
            if (row.has_iterations)
                std::cout << row.iterations;
            else
                std::cout << "-";
            std::cout << std::setw(12) << std::fixed << std::setprecision(3) << row.time_sec
                      << std::setw(16) << std::setprecision(6) << row.train_metric
                      << std::setw(16);
            if (row.test_metric)
                std::cout << *row.test_metric;
            else
                std::cout << "-";
            std::cout << std::defaultfloat << "\n";
        }
    }
    return kExitOk;
}

int cmd_statdim(const Options& opt) {
    const auto data = krr::io::load_dataset(opt.data_path, parse_format(opt), parse_task(opt),
                                            opt.csv_header);
    const auto kernel = make_kernel(opt);

    const auto start = std::chrono::steady_clock::now();
    const Matrix k = krr::kernels::gram_matrix(kernel, data.x);
    const auto eig = krr::numerics::symmetric_eigen(k);
    const double sd = krr::kernels::statistical_dimension(eig.eigenvalues, opt.lambda);
    std::optional<std::int64_t> sketch_bound;
    if (kernel.family == krr::kernels::KernelFamily::Polynomial)
        sketch_bound = krr::kernels::theoretical_sketch_size(kernel.degree, sd, opt.delta);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (opt.emit_json) {
        json j;
        j["command"] = "statdim";
        j["config"] = {{"lambda", opt.lambda}, {"delta", opt.delta}, {"kernel", opt.kernel}};
        j["per_rhs"] = json::array();
        j["metric"] = sd;
        j["wall_time_sec"] = wall;
        j["theoretical_sketch_size"] = sketch_bound ? json(*sketch_bound) : json(nullptr);
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << sd << "\n";
        if (sketch_bound)
            std::cout << "theoretical sketch size (delta=" << opt.delta << "): " << *sketch_bound
                      << "\n";
    }
    return kExitOk;
}

void add_data_options(CLI::App* cmd, Options& opt, bool with_task) {
    cmd->add_option("--data", opt.data_path, "input data file")->required();
    cmd->add_option("--format", opt.format, "input format")
        ->check(CLI::IsMember({"libsvm", "csv"}))
        ->capture_default_str();
    cmd->add_flag("--header", opt.csv_header, "skip one CSV header line");
    if (with_task)
        cmd->add_option("--task", opt.task, "problem type")
            ->check(CLI::IsMember({"classify", "regress"}))
            ->capture_default_str();
}

void add_kernel_options(CLI::App* cmd, Options& opt) {
    cmd->add_option("--kernel", opt.kernel, "kernel family")
        ->check(CLI::IsMember({"gaussian", "poly"}))
        ->capture_default_str();
    cmd->add_option("--sigma", opt.sigma, "Gaussian bandwidth")->capture_default_str();
    cmd->add_option("--gamma", opt.gamma, "polynomial scale")->capture_default_str();
    cmd->add_option("--offset", opt.offset, "polynomial offset c")->capture_default_str();
    cmd->add_option("--degree", opt.degree, "polynomial degree q")->capture_default_str();
    cmd->add_option("--lambda", opt.lambda, "ridge parameter")->capture_default_str();
}

void add_solver_options(CLI::App* cmd, Options& opt) {
    cmd->add_option("--lambda-p", opt.lambda_p,
                    "preconditioner shift (default: lambda; 10*lambda is a reasonable "
                    "rule of thumb)");
    cmd->add_option("--sketch", opt.sketch, "feature map (default chosen by kernel)")
        ->check(CLI::IsMember({"rff", "tensorsketch"}));
    cmd->add_option("--s1", opt.s1, "feature map size (0 = auto)");
    cmd->add_option("--s2", opt.s2, "SRHT level size (0 = skip)");
    cmd->add_option("--s3", opt.s3, "Gaussian level size (0 = skip)");
    cmd->add_flag("--adaptive", opt.adaptive, "double the sketch until the quality test passes");
    cmd->add_option("--s0", opt.s0, "adaptive: first probe size (0 = auto)");
    cmd->add_option("--s-max", opt.s_max, "adaptive: size cap (0 = n)");
    cmd->add_option("--tau", opt.tau,
                    "residual tolerance (default 1e-3 classify, 1e-5 regress)");
    cmd->add_option("--max-iter", opt.max_iter, "PCG iteration cap")->capture_default_str();
    cmd->add_option("--seed", opt.seed, "master seed; fixes all randomness")
        ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kernel ridge regression via sketch-preconditioned conjugate gradients"};
    app.require_subcommand(1);
    Options opt;

    auto* train = app.add_subcommand("train", "fit a model and write it to disk");
    add_data_options(train, opt, true);
    add_kernel_options(train, opt);
    add_solver_options(train, opt);
    train->add_option("--model-out", opt.model_path, "output model file")->required();
    train->add_flag("--json", opt.emit_json, "machine-readable report");

    auto* predict = app.add_subcommand("predict", "score new inputs with a saved model");
    add_data_options(predict, opt, false);
    predict->add_option("--model", opt.model_path, "model file")->required();
    predict->add_option("--out", opt.out_path, "write predictions here instead of stdout");
    predict->add_flag("--json", opt.emit_json, "machine-readable report");

    auto* eval = app.add_subcommand("eval", "report error rate / MSE on labeled data");
    add_data_options(eval, opt, false);
    eval->add_option("--model", opt.model_path, "model file")->required();
    eval->add_flag("--json", opt.emit_json, "machine-readable report");

    auto* bench = app.add_subcommand(
        "bench", "compare preconditioned PCG, plain CG, and the random-features baseline");
    add_data_options(bench, opt, true);
    add_kernel_options(bench, opt);
    add_solver_options(bench, opt);
    bench->add_option("--test", opt.test_path, "held-out data for the test metric column");
    bench->add_flag("--json", opt.emit_json, "machine-readable report");

    auto* statdim = app.add_subcommand(
        "statdim", "statistical dimension of the kernel matrix and the sketch-size bound");
    add_data_options(statdim, opt, true);
    add_kernel_options(statdim, opt);
    statdim->add_option("--delta", opt.delta, "failure probability for the size bound")
        ->capture_default_str();
    statdim->add_flag("--json", opt.emit_json, "machine-readable report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (app.got_subcommand(train)) return cmd_train(opt);
        if (app.got_subcommand(predict)) return cmd_predict(opt);
        if (app.got_subcommand(eval)) return cmd_eval(opt);
        if (app.got_subcommand(bench)) return cmd_bench(opt);
        if (app.got_subcommand(statdim)) return cmd_statdim(opt);
    } catch (const krr::DimensionMismatch& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::invalid_argument& e) {
        // bad hyperparameters / flag combinations
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
