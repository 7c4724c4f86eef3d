#include <krr/solver.hpp>

#include <krr/numerics.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>

namespace krr::solver {

bool PcgReport::all_converged() const {
    return std::all_of(per_rhs.begin(), per_rhs.end(),
                       [](const RhsStats& s) { return s.converged; });
}

int PcgReport::max_iterations() const {
    int m = 0;
    for (const auto& s : per_rhs) m = std::max(m, s.iterations);
    return m;
}

PcgResult pcg_solve(const LinearOperator& apply_a, const LinearOperator& preconditioner,
                    const Vector& y, double tau, int max_iter,
                    const std::function<void(int, const Vector&)>& observer) {
    if (!(tau > 0.0)) throw std::invalid_argument("pcg_solve: tau must be positive");
    if (max_iter < 1) throw std::invalid_argument("pcg_solve: max_iter must be at least 1");

    PcgResult out;
    out.solution = Vector::Zero(y.size());
    const double norm_y = y.norm();
    if (norm_y == 0.0) {
        out.stats.converged = true;
        return out;
    }

    Vector r = y;  // residual of the all-zeros start
    Vector z = preconditioner ? preconditioner(r) : r;
    Vector p = z;
    double rz = r.dot(z);

    for (int it = 1; it <= max_iter; ++it) {
        const Vector ap = apply_a(p);
        const double pap = p.dot(ap);
        if (!(pap > 0.0))
            throw BreakdownDetected("pcg_solve: p'Ap <= 0, operator is not positive definite");
        const double alpha = rz / pap;
        out.solution += alpha * p;
        r -= alpha * ap;

        const double rel = r.norm() / norm_y;
        out.stats.iterations = it;
        out.stats.final_residual = rel;
        out.stats.residual_history.push_back(rel);
        if (observer) observer(it, out.solution);
        if (rel <= tau) {
            out.stats.converged = true;
            return out;
        }

        z = preconditioner ? preconditioner(r) : r;
        const double rz_next = r.dot(z);
        p = z + (rz_next / rz) * p;
        rz = rz_next;
    }
    out.stats.converged = false;
    return out;
}

std::pair<Matrix, PcgReport> solve_regularized(
    const Matrix& k, const Matrix& y, double lambda,
    const std::optional<precond::Preconditioner>& preconditioner, double tau, int max_iter) {
    if (k.rows() != k.cols() || k.rows() != y.rows())
        throw DimensionMismatch("solve_regularized: K and Y dimensions do not match");

    const LinearOperator apply_a = [&](const Vector& v) -> Vector {
        return k * v + lambda * v;
    };
    LinearOperator apply_m;
    if (preconditioner)
        apply_m = [&](const Vector& v) -> Vector { return preconditioner->apply(v); };

    Matrix c(y.rows(), y.cols());
    PcgReport report;
    const auto start = std::chrono::steady_clock::now();
    for (Index j = 0; j < y.cols(); ++j) {
        PcgResult res = pcg_solve(apply_a, apply_m, y.col(j), tau, max_iter);
        c.col(j) = res.solution;
        report.total_matvecs += res.stats.iterations;
        report.per_rhs.push_back(std::move(res.stats));
    }
    report.wall_time_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {std::move(c), std::move(report)};
}

TrainResult train(const kernels::Dataset& data, const kernels::KernelSpec& kernel,
                  const SolverConfig& cfg) {
    if (data.n() < 1) throw std::invalid_argument("train: dataset is empty");
    if (!(cfg.lambda > 0.0)) throw NonPositiveLambda("train: lambda must be positive");

    const Matrix k = kernels::gram_matrix(kernel, data.x);
    const double lambda_p = cfg.lambda_p.value_or(cfg.lambda);

    TrainResult result;
    std::optional<precond::Preconditioner> preconditioner;
    if (cfg.adaptive) {
        const Index s0 = cfg.s0 > 0 ? cfg.s0 : precond::default_initial_sketch_size(data.n());
        const Index s_max = cfg.s_max > 0 ? std::min(cfg.s_max, data.n())
                                          : std::max<Index>(data.n(), s0);
        auto adaptive = precond::adaptive_build(k, data.x, cfg.chain, kernel, cfg.lambda,
                                                lambda_p, std::min(s0, s_max), s_max, cfg.seed);
        result.sketch_size = adaptive.final_size;
        result.quality_passed = adaptive.passed();
        result.quality_history = std::move(adaptive.history);
        preconditioner = std::move(adaptive.preconditioner);
    } else {
        const auto chain = sketches::realize_chain(cfg.chain, kernel, data.dim(), cfg.seed);
        const Matrix z = chain.apply_rows(data.x);
        result.sketch_size = z.cols();
        preconditioner = precond::build_preconditioner(z, lambda_p);
    }

    auto [c, report] = solve_regularized(k, data.y, cfg.lambda, preconditioner, cfg.tau,
                                         cfg.max_iter);
    result.model.kernel = kernel;
    result.model.x = data.x;
    result.model.c = std::move(c);
    result.model.label_map = data.label_map;
    result.model.lambda = cfg.lambda;
    result.model.seed = cfg.seed;
    result.report = std::move(report);
    return result;
}

Matrix predict_scores(const KrrModel& model, const Matrix& xq) {
    if (xq.cols() != model.x.cols())
        throw DimensionMismatch("predict: query dimension does not match the model");
    return kernels::cross_gram(model.kernel, xq, model.x) * model.c;
}

std::vector<double> predict_labels(const KrrModel& model, const Matrix& xq) {
    if (!model.classification()) throw UnknownLabel("predict_labels: model has no label map");
    const Matrix scores = predict_scores(model, xq);
    if (std::size_t(scores.cols()) != model.label_map.size())
        throw UnknownLabel("predict_labels: score width does not match the label map");
    std::vector<double> labels;
    labels.reserve(std::size_t(scores.rows()));
    for (int idx : rlsc_decode(scores)) labels.push_back(model.label_map[std::size_t(idx)]);
    return labels;
}

Matrix rlsc_encode(const std::vector<int>& class_indices, int num_classes) {
    if (num_classes < 2) throw std::invalid_argument("rlsc_encode: need at least two classes");
    Matrix y = Matrix::Constant(Index(class_indices.size()), num_classes, -1.0);
    for (Index i = 0; i < y.rows(); ++i) {
        const int c = class_indices[std::size_t(i)];
        if (c < 0 || c >= num_classes) throw UnknownLabel("rlsc_encode: class index out of range");
        y(i, c) = 1.0;
    }
    return y;
}

std::vector<int> rlsc_decode(const Matrix& scores) {
    std::vector<int> out;
    out.reserve(std::size_t(scores.rows()));
    for (Index i = 0; i < scores.rows(); ++i) {
        int best = 0;
        for (Index j = 1; j < scores.cols(); ++j)
            if (scores(i, j) > scores(i, best)) best = int(j);
        out.push_back(best);
    }
    return out;
}

RandomFeaturesModel train_random_features_baseline(const kernels::Dataset& data,
                                                   const kernels::KernelSpec& kernel,
                                                   const sketches::ChainSpec& chain,
                                                   double lambda, std::uint64_t seed) {
    if (!(lambda > 0.0)) throw NonPositiveLambda("baseline: lambda must be positive");
    RandomFeaturesModel model;
    model.chain = sketches::realize_chain(chain, kernel, data.dim(), seed);
    model.label_map = data.label_map;
    model.lambda = lambda;

    const Matrix z = model.chain.apply_rows(data.x);
    Matrix gram = z.transpose() * z;
    gram.diagonal().array() += lambda;
    const Matrix l = numerics::cholesky(gram);
    const Matrix rhs = z.transpose() * data.y;
    const Matrix forward = numerics::triangular_solve(l, rhs);
    model.w = numerics::triangular_solve(l, forward, numerics::Side::Left, /*transpose=*/true);
    return model;
}

Matrix baseline_predict_scores(const RandomFeaturesModel& model, const Matrix& xq) {
    return model.chain.apply_rows(xq) * model.w;
}

std::vector<double> baseline_predict_labels(const RandomFeaturesModel& model, const Matrix& xq) {
    if (!model.classification()) throw UnknownLabel("baseline: model has no label map");
    const Matrix scores = baseline_predict_scores(model, xq);
    if (std::size_t(scores.cols()) != model.label_map.size())
        throw UnknownLabel("baseline: score width does not match the label map");
    std::vector<double> labels;
    labels.reserve(std::size_t(scores.rows()));
    for (int idx : rlsc_decode(scores)) labels.push_back(model.label_map[std::size_t(idx)]);
    return labels;
}

double energy_norm_error(const Vector& c, const Vector& c_ref, const Matrix& k, double lambda) {
    if (c.size() != c_ref.size() || c.size() != k.rows() || k.rows() != k.cols())
        throw DimensionMismatch("energy_norm_error: dimensions do not match");
    const Vector d = c - c_ref;
    return std::sqrt(std::max(0.0, d.dot(k * d) + lambda * d.squaredNorm()));
}

}  // namespace krr::solver
