#include <krr/io.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

static_assert(std::endian::native == std::endian::little,
              "model files are little-endian; add byte swapping for this platform");

namespace krr::io {

namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'K', 'R', 'R', 'M'};
constexpr std::uint32_t kFormatVersion = 1;

struct RawRow {
    double label;
    std::vector<std::pair<Index, double>> features;  // 0-based index, value
};

double parse_double(const std::string& token, long line) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(token, &pos);
        if (pos != token.size()) throw std::invalid_argument(token);
        return v;
    } catch (const std::exception&) {
        throw ParseError("cannot parse number '" + token + "'", line);
    }
}

kernels::Dataset assemble(std::vector<RawRow> rows, Index d, Task task) {
    kernels::Dataset data;
    const Index n = Index(rows.size());
    data.x = Matrix::Zero(n, d);
    for (Index i = 0; i < n; ++i)
        for (const auto& [idx, value] : rows[std::size_t(i)].features) data.x(i, idx) = value;

    if (task == Task::Regress) {
        data.y.resize(n, 1);
        for (Index i = 0; i < n; ++i) data.y(i, 0) = rows[std::size_t(i)].label;
        return data;
    }

    data.labels.reserve(std::size_t(n));
    for (const auto& row : rows) data.labels.push_back(row.label);
    std::map<double, int> classes;
    for (double label : data.labels) classes.emplace(label, 0);
    if (classes.size() < 2)
        throw std::runtime_error("classification data needs at least two distinct labels");
    int next = 0;
    for (auto& [label, idx] : classes) {
        idx = next++;
        data.label_map.push_back(label);
    }
    std::vector<int> indices;
    indices.reserve(std::size_t(n));
    for (double label : data.labels) indices.push_back(classes.at(label));
    data.y = solver::rlsc_encode(indices, int(classes.size()));
    return data;
}

json kernel_to_json(const kernels::KernelSpec& spec) {
    if (spec.family == kernels::KernelFamily::Gaussian)
        return {{"family", "gaussian"}, {"sigma", spec.sigma}};
    return {{"family", "polynomial"},
            {"gamma", spec.gamma},
            {"offset", spec.offset},
            {"degree", spec.degree}};
}

kernels::KernelSpec kernel_from_json(const json& j) {
    const std::string family = j.at("family").get<std::string>();
    if (family == "gaussian") return kernels::KernelSpec::gaussian(j.at("sigma").get<double>());
    if (family == "polynomial")
        return kernels::KernelSpec::polynomial(j.at("gamma").get<double>(),
                                               j.at("offset").get<double>(),
                                               j.at("degree").get<int>());
    throw std::runtime_error("model file: unknown kernel family '" + family + "'");
}

void write_exact(std::ofstream& out, const void* data, std::size_t bytes) {
    out.write(static_cast<const char*>(data), std::streamsize(bytes));
}

void read_exact(std::ifstream& in, void* data, std::size_t bytes, const char* what) {
    in.read(static_cast<char*>(data), std::streamsize(bytes));
    if (std::size_t(in.gcount()) != bytes)
        throw std::runtime_error(std::string("model file: truncated while reading ") + what);
}

}  // namespace

kernels::Dataset parse_libsvm(const std::filesystem::path& path, Task task) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");

    std::vector<RawRow> rows;
    Index d = 0;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ss(line);
        std::string token;
        if (!(ss >> token)) continue;  // blank line
        RawRow row;
        row.label = parse_double(token, lineno);
        while (ss >> token) {
            const auto colon = token.find(':');
            if (colon == std::string::npos)
                throw ParseError("expected index:value, got '" + token + "'", lineno);
            const double raw_idx = parse_double(token.substr(0, colon), lineno);
            const Index idx = Index(raw_idx);
            if (double(idx) != raw_idx || idx < 1)
                throw ParseError("feature index must be a positive integer, got '" +
                                     token.substr(0, colon) + "'",
                                 lineno);
            const double value = parse_double(token.substr(colon + 1), lineno);
            row.features.emplace_back(idx - 1, value);
            d = std::max(d, idx);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw EmptyFile("no data rows in '" + path.string() + "'");
    return assemble(std::move(rows), d, task);
}

kernels::Dataset parse_csv(const std::filesystem::path& path, Task task, bool header) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");

    std::vector<RawRow> rows;
    Index d = -1;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (header && lineno == 1) continue;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.empty()) continue;
        if (cells.size() < 2) throw ParseError("need a target and at least one feature", lineno);
        if (d < 0)
            d = Index(cells.size()) - 1;
        else if (Index(cells.size()) - 1 != d)
            throw ParseError("inconsistent column count", lineno);
        RawRow row;
        row.label = parse_double(cells[0], lineno);
        for (Index j = 0; j < d; ++j)
            row.features.emplace_back(j, parse_double(cells[std::size_t(j) + 1], lineno));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw EmptyFile("no data rows in '" + path.string() + "'");
    return assemble(std::move(rows), d, task);
}

kernels::Dataset load_dataset(const std::filesystem::path& path, Format format, Task task,
                              bool csv_header) {
    return format == Format::Libsvm ? parse_libsvm(path, task)
                                    : parse_csv(path, task, csv_header);
}

void write_libsvm(const std::filesystem::path& path, const Matrix& x,
                  std::span<const double> labels) {
    if (std::size_t(x.rows()) != labels.size())
        throw DimensionMismatch("write_libsvm: label count does not match rows");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out.precision(17);
    for (Index i = 0; i < x.rows(); ++i) {
        out << labels[std::size_t(i)];
        for (Index j = 0; j < x.cols(); ++j)
            if (x(i, j) != 0.0) out << ' ' << (j + 1) << ':' << x(i, j);
        out << '\n';
    }
}

void save_model(const std::filesystem::path& path, const solver::KrrModel& model) {
    json meta;
    meta["kernel"] = kernel_to_json(model.kernel);
    meta["lambda"] = model.lambda;
    meta["n"] = model.x.rows();
    meta["d"] = model.x.cols();
    meta["t"] = model.c.cols();
    meta["label_map"] = model.label_map;
    meta["seed"] = model.seed;
    meta["tool_version"] = kToolVersion;
    const std::string text = meta.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    write_exact(out, kMagic, sizeof(kMagic));
    const std::uint32_t version = kFormatVersion;
    const std::uint32_t meta_len = std::uint32_t(text.size());
    write_exact(out, &version, sizeof(version));
    write_exact(out, &meta_len, sizeof(meta_len));
    write_exact(out, text.data(), text.size());
    write_exact(out, model.x.data(), sizeof(double) * std::size_t(model.x.size()));
    write_exact(out, model.c.data(), sizeof(double) * std::size_t(model.c.size()));
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

solver::KrrModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");

    char magic[4];
    read_exact(in, magic, sizeof(magic), "magic");
    if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("model file: bad magic");
    std::uint32_t version = 0;
    std::uint32_t meta_len = 0;
    read_exact(in, &version, sizeof(version), "version");
    if (version != kFormatVersion)
        throw std::runtime_error("model file: unsupported version " + std::to_string(version));
    read_exact(in, &meta_len, sizeof(meta_len), "metadata length");
    std::string text(meta_len, '\0');
    read_exact(in, text.data(), meta_len, "metadata");

    json meta;
    try {
        meta = json::parse(text);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("model file: bad metadata: ") + e.what());
    }

    solver::KrrModel model;
    model.kernel = kernel_from_json(meta.at("kernel"));
    model.lambda = meta.at("lambda").get<double>();
    model.seed = meta.at("seed").get<std::uint64_t>();
    model.label_map = meta.at("label_map").get<std::vector<double>>();
    const Index n = meta.at("n").get<Index>();
    const Index d = meta.at("d").get<Index>();
    const Index t = meta.at("t").get<Index>();
    if (n < 1 || d < 0 || t < 1) throw std::runtime_error("model file: invalid dimensions");

    model.x.resize(n, d);
    model.c.resize(n, t);
    read_exact(in, model.x.data(), sizeof(double) * std::size_t(n * d), "X");
    read_exact(in, model.c.data(), sizeof(double) * std::size_t(n * t), "C");
    // Declared sizes must account for every payload byte.
    in.peek();
    if (!in.eof()) throw std::runtime_error("model file: trailing bytes after payload");
    if (!model.x.allFinite() || !model.c.allFinite())
        throw std::runtime_error("model file: non-finite entries");
    return model;
}

double error_rate(std::span<const double> predicted, std::span<const double> truth) {
    if (predicted.size() != truth.size())
        throw DimensionMismatch("error_rate: size mismatch");
    if (predicted.empty()) return 0.0;
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i)
        if (predicted[i] != truth[i]) ++wrong;
    return double(wrong) / double(predicted.size());
}

double mean_squared_error(const Matrix& scores, const Matrix& targets) {
    if (scores.rows() != targets.rows() || scores.cols() != targets.cols())
        throw DimensionMismatch("mean_squared_error: shape mismatch");
    if (scores.size() == 0) return 0.0;
    return (scores - targets).squaredNorm() / double(scores.size());
}

}  // namespace krr::io
