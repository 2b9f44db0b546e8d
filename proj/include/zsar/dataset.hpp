#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "zsar/gaussian.hpp"
#include "zsar/linalg.hpp"

namespace zsar {

using ClassId = int;

struct Dataset {
    Matrix features;              // N x D
    std::vector<ClassId> labels;  // one per feature row, in [0, C)
    Matrix attributes;            // C x K, row c describes class c
    std::vector<std::string> class_names;
    std::map<std::string, std::string> metadata;

    Eigen::Index n_classes() const { return attributes.rows(); }

    /// Throws DataValidationError when any invariant fails.
    void validate() const;

    /// Row indices whose label is `c`, in file order.
    std::vector<Eigen::Index> rows_of(ClassId c) const;
};

struct Split {
    int split_id = 0;
    std::vector<ClassId> seen_classes;
    std::vector<ClassId> unseen_classes;
    std::uint64_t seed = 0;

    /// Disjointness and range checks against a dataset with `n_classes` classes.
    void validate(Eigen::Index n_classes) const;
};

// ---- binary matrix format ---------------------------------------------------
// "ZSAR" | u16 version = 1 | u32 rows | u32 cols | rows*cols f64, all little-endian,
// row-major, no padding.

inline constexpr char kMatrixMagic[4] = {'Z', 'S', 'A', 'R'};
inline constexpr std::uint16_t kMatrixVersion = 1;

std::string encode_matrix(const Matrix& m);
Matrix decode_matrix(const std::string& bytes, const std::string& source = "<memory>");

void write_matrix(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix(const std::filesystem::path& path);

/// Binary if the file starts with the magic, otherwise comma-separated text.
Matrix read_matrix_any(const std::filesystem::path& path);

std::vector<ClassId> read_labels_csv(const std::filesystem::path& path);
void write_labels_csv(const std::filesystem::path& path, const std::vector<ClassId>& labels);

Matrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);

std::vector<Split> read_splits_csv(const std::filesystem::path& path);
void write_splits_csv(const std::filesystem::path& path, const std::vector<Split>& splits);

Dataset load_dataset(const std::filesystem::path& features_path, const std::filesystem::path& labels_path,
                     const std::filesystem::path& attrs_path);

/// Writes the three dataset files (features.zsm, labels.csv, attributes.zsm) into `dir`.
void save_dataset(const std::filesystem::path& dir, const Dataset& data);

/// Standardizes each feature dimension to zero mean and unit variance and
/// records "standardized" = "true" in the metadata.
void standardize_features(Dataset& data);

// ---- splits and synthetic worlds ---------------------------------------------

std::vector<Split> generate_splits(int n_classes, int n_seen, int n_splits, std::uint64_t seed);

enum class AttributeScheme { RandomUnit, OneHot };

const char* to_string(AttributeScheme scheme);
AttributeScheme parse_attribute_scheme(const std::string& name);

struct SyntheticWorldSpec {
    int n_classes = 25;
    int dim_d = 16;
    int dim_k = 8;
    Matrix w_true;  // D x K
    double noise_scale = 1.0;
    int examples_per_class = 600;
    AttributeScheme attribute_scheme = AttributeScheme::RandomUnit;
    std::uint64_t seed = 7;

    void validate() const;

    /// 25 classes, D = 16, K = 8, unit noise, 600 rows per class and
    /// w_true ~ N(0, 2^2) drawn from `seed`.
    static SyntheticWorldSpec planted(std::uint64_t seed);
};

/// D x K matrix with i.i.d. N(0, scale^2) entries.
Matrix random_weight_matrix(int dim_d, int dim_k, double scale, std::uint64_t seed);

/// Class means are w_true * a_c, variances noise_scale^2; rows are grouped by class.
std::pair<Dataset, std::vector<ClassGaussian>> generate_synthetic(const SyntheticWorldSpec& spec);

}  // namespace zsar
