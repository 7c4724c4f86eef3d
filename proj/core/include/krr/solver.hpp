#pragma once

#include <krr/kernels.hpp>
#include <krr/precond.hpp>
#include <krr/sketches.hpp>
#include <krr/types.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace krr::solver {

using LinearOperator = std::function<Vector(const Vector&)>;

struct SolverConfig {
    double tau = 1e-5;  // residual tolerance; 1e-3 for classification, 1e-5 for regression
    int max_iter = 1000;
    double lambda = 1e-2;
    std::optional<double> lambda_p;  // preconditioner shift; defaults to lambda
    sketches::ChainSpec chain;
    bool adaptive = false;
    Index s0 = 0;     // adaptive first probe; 0 = default heuristic
    Index s_max = 0;  // adaptive cap; 0 = n
    std::uint64_t seed = 0;
};

struct RhsStats {
    int iterations = 0;
    double final_residual = 0.0;  // |y - A c| / |y|
    bool converged = false;
    std::vector<double> residual_history;
};

struct PcgReport {
    std::vector<RhsStats> per_rhs;
    long long total_matvecs = 0;
    double wall_time_sec = 0.0;

    bool all_converged() const;
    int max_iterations() const;
};

struct PcgResult {
    Vector solution;
    RhsStats stats;
};

/// Textbook preconditioned conjugate gradients on the SPD operator apply_a,
/// starting from the all-zeros vector, stopping when |y - A c| <= tau |y| or
/// at max_iter (reported via the converged flag, not an exception). Pass a
/// null preconditioner for plain CG. The optional observer sees every
/// iterate. Throws BreakdownDetected when p'Ap <= 0.
PcgResult pcg_solve(const LinearOperator& apply_a, const LinearOperator& preconditioner,
                    const Vector& y, double tau, int max_iter,
                    const std::function<void(int, const Vector&)>& observer = nullptr);

/// Trained model: f(x) = sum_i C_i. k(x_i, x), one coefficient column per
/// right-hand side.
struct KrrModel {
    kernels::KernelSpec kernel;
    Matrix x;  // n x d support inputs
    Matrix c;  // n x t coefficients
    std::vector<double> label_map;  // empty = regression
    double lambda = 0.0;
    std::uint64_t seed = 0;

    bool classification() const { return !label_map.empty(); }
};

struct TrainResult {
    KrrModel model;
    PcgReport report;
    Index sketch_size = 0;
    bool quality_passed = true;  // meaningful when cfg.adaptive is set
    std::vector<precond::QualityReport> quality_history;
};

/// Shared solve path: per-column PCG on (K + lambda I) C = Y reusing one
/// operator and one preconditioner (pass std::nullopt for plain CG).
std::pair<Matrix, PcgReport> solve_regularized(
    const Matrix& k, const Matrix& y, double lambda,
    const std::optional<precond::Preconditioner>& preconditioner, double tau, int max_iter);

/// End-to-end training: assembles K, realizes the sketch chain (or runs the
/// adaptive doubling loop), builds the preconditioner, and solves one PCG per
/// target column. Non-convergence is recorded per RHS; a model is always
/// returned.
TrainResult train(const kernels::Dataset& data, const kernels::KernelSpec& kernel,
                  const SolverConfig& cfg);

/// Scores = K(Xq, X) C, one column per target.
Matrix predict_scores(const KrrModel& model, const Matrix& xq);

/// Classification only: row-wise argmax of the scores mapped through the
/// label map; ties resolve to the lowest class index.
std::vector<double> predict_labels(const KrrModel& model, const Matrix& xq);

/// One-vs-all +/-1 encoding of class indices into an n x t target matrix.
Matrix rlsc_encode(const std::vector<int>& class_indices, int num_classes);

/// Row-wise argmax, ties to the lowest index.
std::vector<int> rlsc_decode(const Matrix& scores);

/// Sketch-and-solve baseline: f(x) = phi(x)' (Z'Z + lambda I_s)^-1 Z'y. The
/// realized chain is stored with the model so queries use the same map.
struct RandomFeaturesModel {
    sketches::SketchChain chain;
    Matrix w;  // s x t weights
    std::vector<double> label_map;
    double lambda = 0.0;

    bool classification() const { return !label_map.empty(); }
};

RandomFeaturesModel train_random_features_baseline(const kernels::Dataset& data,
                                                   const kernels::KernelSpec& kernel,
                                                   const sketches::ChainSpec& chain,
                                                   double lambda, std::uint64_t seed);

Matrix baseline_predict_scores(const RandomFeaturesModel& model, const Matrix& xq);
std::vector<double> baseline_predict_labels(const RandomFeaturesModel& model, const Matrix& xq);

/// sqrt((c - c_ref)' (K + lambda I) (c - c_ref)): the norm in which the PCG
/// iteration bound is stated. Used by verification, not by the stopping rule.
double energy_norm_error(const Vector& c, const Vector& c_ref, const Matrix& k, double lambda);

}  // namespace krr::solver
