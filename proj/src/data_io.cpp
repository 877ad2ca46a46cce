#include "lava/data_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <string_view>

namespace lava {

namespace {

static_assert(std::endian::native == std::endian::little, "binary matrix I/O assumes a little-endian host");

constexpr std::array<char, 8> kMagic = {'L', 'A', 'V', 'A', 'M', 'A', 'T', '1'};

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            cells.push_back(trim(line.substr(start)));
            break;
        }
        cells.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return cells;
}

std::optional<double> parse_number(std::string_view cell) {
    if (!cell.empty() && cell.front() == '+') {
        cell.remove_prefix(1);
    }
    double value = 0.0;
    const auto* end = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(cell.data(), end, value);
    if (ec != std::errc() || ptr != end || cell.empty()) {
        return std::nullopt;
    }
    return value;
}

void put_u64(std::ostream& out, std::uint64_t v) {
    std::array<char, 8> bytes{};
    std::memcpy(bytes.data(), &v, 8);
    out.write(bytes.data(), 8);
}

template <typename T>
void save_binary(const Matrix<T>& matrix, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    out.write(kMagic.data(), kMagic.size());
    put_u64(out, matrix.rows());
    put_u64(out, matrix.cols());
    std::vector<float> payload(matrix.values().begin(), matrix.values().end());
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size() * sizeof(float)));
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

template <typename T>
void save_delimited(const Matrix<T>& matrix, const std::filesystem::path& path) {
    std::string text;
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
        for (std::size_t c = 0; c < matrix.cols(); ++c) {
            if (c > 0) {
                text += ',';
            }
            text += format_double(static_cast<double>(matrix(r, c)));
        }
        text += '\n';
    }
    write_text_file(path, text);
}

std::vector<float> load_binary_payload(const std::filesystem::path& path, std::uint64_t& rows, std::uint64_t& cols) {
    const std::string bytes = read_text_file(path);
    if (bytes.size() < kBinaryHeaderBytes || std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
        throw FormatError("bad binary matrix header: " + path.string());
    }
    std::memcpy(&rows, bytes.data() + 8, 8);
    std::memcpy(&cols, bytes.data() + 16, 8);
    if (rows == 0 || cols == 0) {
        throw FormatError("empty matrix (" + std::to_string(rows) + "x" + std::to_string(cols) + "): " + path.string());
    }
    if (cols > (bytes.size() - kBinaryHeaderBytes) / sizeof(float) / rows ||
        bytes.size() != kBinaryHeaderBytes + rows * cols * sizeof(float)) {
        throw FormatError("binary payload size does not match header dimensions: " + path.string());
    }
    std::vector<float> payload(rows * cols);
    std::memcpy(payload.data(), bytes.data() + kBinaryHeaderBytes, payload.size() * sizeof(float));
    for (std::size_t i = 0; i < payload.size(); ++i) {
        if (!std::isfinite(payload[i])) {
            throw DataError("non-finite value at row " + std::to_string(i / cols) + ": " + path.string());
        }
    }
    return payload;
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open: " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    out << text;
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

MatrixFormat format_for(const std::filesystem::path& path) {
    return path.extension() == ".bin" ? MatrixFormat::binary : MatrixFormat::delimited;
}

DelimitedTable parse_delimited(const std::string& text) {
    DelimitedTable table;
    std::vector<double> values;
    std::size_t cols = 0;
    std::size_t rows = 0;
    std::size_t line_no = 0;
    std::string_view rest(text);
    bool first = true;
    while (!rest.empty()) {
        const auto nl = rest.find('\n');
        std::string_view line = rest.substr(0, nl);
        rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto cells = split(line, ',');
        if (first) {
            first = false;
            cols = cells.size();
            bool numeric = true;
            for (const auto cell : cells) {
                numeric = numeric && parse_number(cell).has_value();
            }
            if (!numeric) {
                table.header.emplace(cells.begin(), cells.end());
                continue;
            }
        }
        if (cells.size() != cols) {
            throw FormatError("row " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                              " cells, expected " + std::to_string(cols));
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const auto v = parse_number(cells[c]);
            if (!v) {
                throw FormatError("row " + std::to_string(line_no) + " column " + std::to_string(c + 1) +
                                  ": not a number");
            }
            if (!std::isfinite(*v)) {
                throw DataError("row " + std::to_string(line_no) + " column " + std::to_string(c + 1) +
                                ": non-finite value");
            }
            values.push_back(*v);
        }
        ++rows;
    }
    if (rows == 0 || cols == 0) {
        throw FormatError("empty matrix");
    }
    table.values = RealMatrix(rows, cols, std::move(values));
    return table;
}

RealMatrix load_matrix(const std::filesystem::path& path, MatrixFormat format) {
    if (format == MatrixFormat::binary) {
        std::uint64_t rows = 0;
        std::uint64_t cols = 0;
        auto payload = load_binary_payload(path, rows, cols);
        return RealMatrix(rows, cols, std::vector<double>(payload.begin(), payload.end()));
    }
    try {
        return parse_delimited(read_text_file(path)).values;
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

RealMatrix load_matrix(const std::filesystem::path& path) { return load_matrix(path, format_for(path)); }

FloatMatrix load_float_matrix(const std::filesystem::path& path) {
    if (format_for(path) == MatrixFormat::binary) {
        std::uint64_t rows = 0;
        std::uint64_t cols = 0;
        auto payload = load_binary_payload(path, rows, cols);
        return FloatMatrix(rows, cols, std::move(payload));
    }
    return load_matrix(path).cast<float>();
}

void save_matrix(const RealMatrix& matrix, const std::filesystem::path& path, MatrixFormat format) {
    if (format == MatrixFormat::binary) {
        save_binary(matrix, path);
    } else {
        save_delimited(matrix, path);
    }
}

void save_matrix(const FloatMatrix& matrix, const std::filesystem::path& path, MatrixFormat format) {
    if (format == MatrixFormat::binary) {
        save_binary(matrix, path);
    } else {
        save_delimited(matrix, path);
    }
}

void save_matrix(const RealMatrix& matrix, const std::filesystem::path& path) {
    save_matrix(matrix, path, format_for(path));
}

FeatureMatrix load_features(const std::filesystem::path& path) {
    FeatureMatrix features;
    if (format_for(path) == MatrixFormat::binary) {
        features.values = load_matrix(path, MatrixFormat::binary);
    } else {
        DelimitedTable table;
        try {
            table = parse_delimited(read_text_file(path));
        } catch (const FormatError& e) {
            throw FormatError(path.string() + ": " + e.what());
        } catch (const DataError& e) {
            throw DataError(path.string() + ": " + e.what());
        }
        features.values = std::move(table.values);
        if (table.header) {
            features.names = std::move(*table.header);
        }
    }
    if (features.names.empty()) {
        for (std::size_t j = 0; j < features.values.cols(); ++j) {
            features.names.push_back("f" + std::to_string(j));
        }
    }
    validate_features(features, features.values.rows());
    return features;
}

RealMatrix load_embeddings(const std::filesystem::path& path) {
    auto embeddings = load_matrix(path);
    validate_embeddings(embeddings);
    return embeddings;
}

SampleLabels load_labels(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    SampleLabels labels;
    std::string_view rest(text);
    bool first = true;
    while (!rest.empty()) {
        const auto nl = rest.find('\n');
        const auto line = trim(rest.substr(0, nl));
        rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
        if (line.empty()) {
            continue;
        }
        if (first) {
            labels.name = std::string(line);
            first = false;
        } else {
            labels.labels.emplace_back(line);
        }
    }
    if (labels.labels.empty()) {
        throw FormatError("label file has no labels: " + path.string());
    }
    return labels;
}

void validate_embeddings(const RealMatrix& embeddings) {
    if (embeddings.rows() == 0 || embeddings.cols() == 0) {
        throw DataError("embedding matrix is empty");
    }
    for (const double v : embeddings.values()) {
        if (!std::isfinite(v)) {
            throw DataError("embedding matrix contains non-finite values");
        }
    }
}

void validate_features(const FeatureMatrix& features, std::size_t expected_rows) {
    if (features.values.rows() != expected_rows) {
        throw DataError("feature matrix has " + std::to_string(features.values.rows()) + " rows, expected " +
                        std::to_string(expected_rows));
    }
    if (features.names.size() != features.values.cols()) {
        throw DataError("feature name count does not match column count");
    }
    std::set<std::string> seen;
    for (const auto& name : features.names) {
        if (!seen.insert(name).second) {
            throw DataError("duplicate feature name: " + name);
        }
    }
    for (const double v : features.values.values()) {
        if (!std::isfinite(v)) {
            throw DataError("feature matrix contains non-finite values");
        }
    }
}

}  // namespace lava
