#pragma once

#include <krr/kernels.hpp>
#include <krr/solver.hpp>
#include <krr/types.hpp>

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace krr::io {

inline constexpr const char* kToolVersion = "0.1.0";

enum class Format { Libsvm, Csv };
enum class Task { Classify, Regress };

/// LIBSVM/SVMLight sparse text: "<label> <index>:<value> ...", 1-based
/// indices. Rows are densified to d = the largest index seen. In Classify
/// mode the labels become a one-vs-all encoding (at least two distinct
/// labels required). Throws ParseError (with line number) or EmptyFile.
kernels::Dataset parse_libsvm(const std::filesystem::path& path, Task task);

/// CSV: first column is the target, remaining columns are features; set
/// `header` to skip one leading line.
kernels::Dataset parse_csv(const std::filesystem::path& path, Task task, bool header = false);

kernels::Dataset load_dataset(const std::filesystem::path& path, Format format, Task task,
                              bool csv_header = false);

/// Writes rows in LIBSVM format, omitting zero features.
void write_libsvm(const std::filesystem::path& path, const Matrix& x,
                  std::span<const double> labels);

// Model file layout (little-endian):
//   bytes 0..3   magic "KRRM"
//   u32          format version (1)
//   u32          metadata length in bytes
//   ...          UTF-8 JSON metadata (kernel, lambda, n, d, t, label map,
//                seed, tool version)
//   n*d f64      X, row-major
//   n*t f64      C, row-major
// Declared sizes must match the payload length exactly.
void save_model(const std::filesystem::path& path, const solver::KrrModel& model);
solver::KrrModel load_model(const std::filesystem::path& path);

struct Metrics {
    double value = 0.0;  // error rate (classification) or mean squared error
    bool classification = false;
    int iterations = 0;
    double wall_time_sec = 0.0;
};

/// Fraction of mismatched labels, in [0, 1].
double error_rate(std::span<const double> predicted, std::span<const double> truth);

/// Mean over all entries of (scores - targets)^2.
double mean_squared_error(const Matrix& scores, const Matrix& targets);

}  // namespace krr::io
