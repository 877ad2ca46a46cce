#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lava/matrix.hpp"

namespace lava {

enum class MatrixFormat { delimited, binary };

// "LAVAMAT1", u64 rows, u64 cols (little-endian), then rows*cols f32 values.
inline constexpr std::size_t kBinaryHeaderBytes = 24;

struct DelimitedTable {
    RealMatrix values;
    std::optional<std::vector<std::string>> header;
};

struct FeatureMatrix {
    RealMatrix values;
    std::vector<std::string> names;

    std::size_t samples() const noexcept { return values.rows(); }
    std::size_t features() const noexcept { return values.cols(); }
};

struct SampleLabels {
    std::string name;
    std::vector<std::string> labels;
};

// Chooses the format from the extension: ".bin" is binary, anything else delimited.
MatrixFormat format_for(const std::filesystem::path& path);

RealMatrix load_matrix(const std::filesystem::path& path, MatrixFormat format);
RealMatrix load_matrix(const std::filesystem::path& path);
DelimitedTable parse_delimited(const std::string& text);

void save_matrix(const RealMatrix& matrix, const std::filesystem::path& path, MatrixFormat format);
void save_matrix(const FloatMatrix& matrix, const std::filesystem::path& path, MatrixFormat format);
void save_matrix(const RealMatrix& matrix, const std::filesystem::path& path);

FloatMatrix load_float_matrix(const std::filesystem::path& path);

// Feature names come from the delimited header when present, "f0".."fD-1" otherwise.
FeatureMatrix load_features(const std::filesystem::path& path);
RealMatrix load_embeddings(const std::filesystem::path& path);

// One column of text; the first line is the label name.
SampleLabels load_labels(const std::filesystem::path& path);

void validate_embeddings(const RealMatrix& embeddings);
void validate_features(const FeatureMatrix& features, std::size_t expected_rows);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace lava
