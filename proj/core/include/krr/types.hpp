#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace krr {

// All dense storage is row-major 64-bit floats so that sample matrices and
// model files share one raw layout.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;
using Index = Eigen::Index;

struct DimensionMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NotPositiveDefinite : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularTriangular : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LengthNotPowerOfTwo : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NoConvergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonPositiveLambda : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct InvalidDelta : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown by the conjugate gradient loop when p'Ap <= 0, i.e. the operator is
// not positive definite (or round-off has destroyed the iteration).
struct BreakdownDetected : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnknownLabel : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    ParseError(const std::string& what, long line)
        : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line(line) {}
    long line;
};

struct EmptyFile : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace krr
