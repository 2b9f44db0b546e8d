#include "zsar/dataset.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "zsar/errors.hpp"
#include "zsar/rng.hpp"

namespace zsar {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kHeaderBytes = 4 + 2 + 4 + 4;

template <typename T>
void put_le(std::string& out, T value) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                 std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint16_t>>;
    const auto bits = std::bit_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
    }
}

template <typename T>
T get_le(const std::string& in, std::size_t offset) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                 std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint16_t>>;
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        bits |= static_cast<U>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
    }
    return std::bit_cast<T>(bits);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw LoadError(path.string(), 0, "cannot open file");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw LoadError(path.string(), 0, "cannot open file for writing");
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw LoadError(path.string(), 0, "write failed");
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        fields.push_back(trim(line.substr(start, pos == std::string_view::npos ? line.npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return fields;
}

template <typename T>
T parse_number(std::string_view field, const fs::path& path, long long line) {
    T value{};
    const auto* first = field.data();
    const auto* last = field.data() + field.size();
    if (!field.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || field.empty()) {
        throw LoadError(path.string(), line, "cannot parse '" + std::string(field) + "'");
    }
    if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(value)) {
            throw LoadError(path.string(), line, "non-finite value");
        }
    }
    return value;
}

// Calls `fn(line_number, line)` for every non-blank line (1-based numbering).
template <typename Fn>
void for_each_line(const std::string& text, Fn&& fn) {
    std::istringstream in(text);
    std::string line;
    long long number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto view = trim(line);
        if (view.empty()) continue;
        fn(number, view);
    }
}

std::string format_double(double v) {
    std::ostringstream out;
    out << std::setprecision(17) << v;
    return out.str();
}

}  // namespace

// ---- Dataset / Split ---------------------------------------------------------

void Dataset::validate() const {
    if (features.rows() == 0) {
        throw DataValidationError("dataset has no feature rows");
    }
    if (static_cast<Eigen::Index>(labels.size()) != features.rows()) {
        throw DataValidationError("dataset has " + std::to_string(features.rows()) + " feature rows but " +
                                  std::to_string(labels.size()) + " labels");
    }
    if (attributes.rows() == 0) {
        throw DataValidationError("dataset has no attribute rows");
    }
    if (!features.allFinite() || !attributes.allFinite()) {
        throw DataValidationError("dataset contains non-finite values");
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= attributes.rows()) {
            throw DataValidationError("label " + std::to_string(labels[i]) + " at row " + std::to_string(i) +
                                      " is outside [0, " + std::to_string(attributes.rows()) + ")");
        }
    }
    if (!class_names.empty() && static_cast<Eigen::Index>(class_names.size()) != attributes.rows()) {
        throw DataValidationError("class_names does not match the attribute row count");
    }
}

std::vector<Eigen::Index> Dataset::rows_of(ClassId c) const {
    std::vector<Eigen::Index> rows;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == c) rows.push_back(static_cast<Eigen::Index>(i));
    }
    return rows;
}

void Split::validate(Eigen::Index n_classes) const {
    if (seen_classes.empty() || unseen_classes.empty()) {
        throw ConfigError("split " + std::to_string(split_id) + " needs both seen and unseen classes");
    }
    std::set<ClassId> seen;
    for (ClassId c : seen_classes) {
        if (c < 0 || c >= n_classes) throw ConfigError("split class id " + std::to_string(c) + " out of range");
        if (!seen.insert(c).second) throw ConfigError("split lists seen class " + std::to_string(c) + " twice");
    }
    std::set<ClassId> unseen;
    for (ClassId c : unseen_classes) {
        if (c < 0 || c >= n_classes) throw ConfigError("split class id " + std::to_string(c) + " out of range");
        if (seen.count(c) != 0) {
            throw ConfigError("split " + std::to_string(split_id) + ": class " + std::to_string(c) +
                              " is both seen and unseen");
        }
        if (!unseen.insert(c).second) throw ConfigError("split lists unseen class " + std::to_string(c) + " twice");
    }
}

// ---- binary matrices -----------------------------------------------------------

std::string encode_matrix(const Matrix& m) {
    if (m.rows() > UINT32_MAX || m.cols() > UINT32_MAX) {
        throw DimensionError("matrix too large for the binary format");
    }
    std::string out;
    out.reserve(kHeaderBytes + static_cast<std::size_t>(m.size()) * 8);
    out.append(kMatrixMagic, 4);
    put_le<std::uint16_t>(out, kMatrixVersion);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            put_le<double>(out, m(i, j));
        }
    }
    return out;
}

Matrix decode_matrix(const std::string& bytes, const std::string& source) {
    if (bytes.size() < kHeaderBytes) {
        throw LoadError(source, static_cast<long long>(bytes.size()), "truncated header");
    }
    if (std::memcmp(bytes.data(), kMatrixMagic, 4) != 0) {
        throw LoadError(source, 0, "magic mismatch (expected \"ZSAR\")");
    }
    const auto version = get_le<std::uint16_t>(bytes, 4);
    if (version != kMatrixVersion) {
        throw LoadError(source, 4, "unsupported format version " + std::to_string(version));
    }
    const auto rows = get_le<std::uint32_t>(bytes, 6);
    const auto cols = get_le<std::uint32_t>(bytes, 10);
    const std::size_t expected = kHeaderBytes + static_cast<std::size_t>(rows) * cols * 8;
    if (bytes.size() != expected) {
        throw LoadError(source, static_cast<long long>(std::min(bytes.size(), expected)),
                        "payload size " + std::to_string(bytes.size()) + " does not match " +
                            std::to_string(rows) + "x" + std::to_string(cols) + " header");
    }
    Matrix m(rows, cols);
    std::size_t offset = kHeaderBytes;
    for (std::uint32_t i = 0; i < rows; ++i) {
        for (std::uint32_t j = 0; j < cols; ++j, offset += 8) {
            const double v = get_le<double>(bytes, offset);
            if (!std::isfinite(v)) {
                throw LoadError(source, static_cast<long long>(offset), "non-finite value");
            }
            m(i, j) = v;
        }
    }
    return m;
}

void write_matrix(const fs::path& path, const Matrix& m) {
    write_file(path, encode_matrix(m));
}

Matrix read_matrix(const fs::path& path) {
    return decode_matrix(read_file(path), path.string());
}

Matrix read_matrix_any(const fs::path& path) {
    const std::string bytes = read_file(path);
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), kMatrixMagic, 4) == 0) {
        return decode_matrix(bytes, path.string());
    }
    return read_matrix_csv(path);
}

// ---- CSV -------------------------------------------------------------------------

std::vector<ClassId> read_labels_csv(const fs::path& path) {
    std::vector<ClassId> labels;
    for_each_line(read_file(path), [&](long long line, std::string_view text) {
        const ClassId label = parse_number<ClassId>(text, path, line);
        if (label < 0) throw LoadError(path.string(), line, "negative label");
        labels.push_back(label);
    });
    return labels;
}

void write_labels_csv(const fs::path& path, const std::vector<ClassId>& labels) {
    std::string out;
    for (ClassId label : labels) {
        out += std::to_string(label);
        out += '\n';
    }
    write_file(path, out);
}

Matrix read_matrix_csv(const fs::path& path) {
    std::vector<std::vector<double>> rows;
    for_each_line(read_file(path), [&](long long line, std::string_view text) {
        std::vector<double> row;
        for (auto field : split_commas(text)) row.push_back(parse_number<double>(field, path, line));
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw LoadError(path.string(), line,
                            "expected " + std::to_string(rows.front().size()) + " columns, got " +
                                std::to_string(row.size()));
        }
        rows.push_back(std::move(row));
    });
    Matrix m(static_cast<Eigen::Index>(rows.size()),
             rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return m;
}

void write_matrix_csv(const fs::path& path, const Matrix& m) {
    std::string out;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j > 0) out += ',';
            out += format_double(m(i, j));
        }
        out += '\n';
    }
    write_file(path, out);
}

std::vector<Split> read_splits_csv(const fs::path& path) {
    std::map<int, Split> by_id;
    bool first = true;
    for_each_line(read_file(path), [&](long long line, std::string_view text) {
        const auto fields = split_commas(text);
        if (first) {
            first = false;
            if (!fields.empty() && fields[0] == "split_id") return;  // header
        }
        if (fields.size() != 3) {
            throw LoadError(path.string(), line, "expected split_id,class_id,role");
        }
        const int id = parse_number<int>(fields[0], path, line);
        const ClassId c = parse_number<ClassId>(fields[1], path, line);
        Split& split = by_id[id];
        split.split_id = id;
        if (fields[2] == "seen") {
            split.seen_classes.push_back(c);
        } else if (fields[2] == "unseen") {
            split.unseen_classes.push_back(c);
        } else {
            throw LoadError(path.string(), line, "role must be seen or unseen, got '" + std::string(fields[2]) + "'");
        }
    });
    std::vector<Split> splits;
    for (auto& [id, split] : by_id) {
        std::sort(split.seen_classes.begin(), split.seen_classes.end());
        std::sort(split.unseen_classes.begin(), split.unseen_classes.end());
        splits.push_back(std::move(split));
    }
    return splits;
}

void write_splits_csv(const fs::path& path, const std::vector<Split>& splits) {
    std::string out = "split_id,class_id,role\n";
    for (const auto& split : splits) {
        for (ClassId c : split.seen_classes) out += std::to_string(split.split_id) + "," + std::to_string(c) + ",seen\n";
        for (ClassId c : split.unseen_classes) {
            out += std::to_string(split.split_id) + "," + std::to_string(c) + ",unseen\n";
        }
    }
    write_file(path, out);
}

// ---- dataset files -------------------------------------------------------------

Dataset load_dataset(const fs::path& features_path, const fs::path& labels_path, const fs::path& attrs_path) {
    Dataset data;
    data.features = read_matrix_any(features_path);
    data.labels = read_labels_csv(labels_path);
    data.attributes = read_matrix_any(attrs_path);

    if (static_cast<Eigen::Index>(data.labels.size()) != data.features.rows()) {
        throw LoadError(labels_path.string(), static_cast<long long>(data.labels.size()),
                        "label count " + std::to_string(data.labels.size()) + " does not match " +
                            std::to_string(data.features.rows()) + " feature rows");
    }
    if (data.attributes.rows() == 0) {
        throw LoadError(attrs_path.string(), 0, "no attribute rows");
    }
    for (std::size_t i = 0; i < data.labels.size(); ++i) {
        if (data.labels[i] >= data.attributes.rows()) {
            throw LoadError(labels_path.string(), static_cast<long long>(i + 1),
                            "label " + std::to_string(data.labels[i]) + " out of range for " +
                                std::to_string(data.attributes.rows()) + " classes");
        }
    }
    data.validate();
    return data;
}

void save_dataset(const fs::path& dir, const Dataset& data) {
    data.validate();
    fs::create_directories(dir);
    write_matrix(dir / "features.zsm", data.features);
    write_labels_csv(dir / "labels.csv", data.labels);
    write_matrix(dir / "attributes.zsm", data.attributes);
}

void standardize_features(Dataset& data) {
    const double n = static_cast<double>(data.features.rows());
    const Eigen::RowVectorXd mean = data.features.colwise().sum() / n;
    data.features.rowwise() -= mean;
    const Eigen::RowVectorXd stddev = (data.features.array().square().colwise().sum() / n).sqrt();
    for (Eigen::Index d = 0; d < data.features.cols(); ++d) {
        if (stddev(d) > 0.0) data.features.col(d) /= stddev(d);
    }
    data.metadata["standardized"] = "true";
}

// ---- splits / synthetic ----------------------------------------------------------

std::vector<Split> generate_splits(int n_classes, int n_seen, int n_splits, std::uint64_t seed) {
    if (n_seen <= 0 || n_seen >= n_classes) {
        throw ConfigError("n_seen must be in (0, " + std::to_string(n_classes) + "), got " + std::to_string(n_seen));
    }
    if (n_splits < 1) throw ConfigError("n_splits must be >= 1");
    std::vector<Split> splits;
    for (int s = 0; s < n_splits; ++s) {
        Split split;
        split.split_id = s;
        split.seed = derive_seed(seed, static_cast<std::uint64_t>(s));
        Rng rng(split.seed);
        std::vector<ClassId> perm(static_cast<std::size_t>(n_classes));
        for (int c = 0; c < n_classes; ++c) perm[static_cast<std::size_t>(c)] = c;
        rng.shuffle(perm);
        split.seen_classes.assign(perm.begin(), perm.begin() + n_seen);
        split.unseen_classes.assign(perm.begin() + n_seen, perm.end());
        std::sort(split.seen_classes.begin(), split.seen_classes.end());
        std::sort(split.unseen_classes.begin(), split.unseen_classes.end());
        splits.push_back(std::move(split));
    }
    return splits;
}

const char* to_string(AttributeScheme scheme) {
    return scheme == AttributeScheme::OneHot ? "one_hot" : "random_unit";
}

AttributeScheme parse_attribute_scheme(const std::string& name) {
    if (name == "random_unit") return AttributeScheme::RandomUnit;
    if (name == "one_hot") return AttributeScheme::OneHot;
    throw ConfigError("unknown attribute scheme '" + name + "'");
}

void SyntheticWorldSpec::validate() const {
    if (n_classes < 2) throw ConfigError("synthetic world needs at least 2 classes");
    if (dim_d < 1 || dim_k < 1) throw ConfigError("synthetic dimensions must be positive");
    if (w_true.rows() != dim_d || w_true.cols() != dim_k) {
        throw ConfigError("w_true must be " + std::to_string(dim_d) + "x" + std::to_string(dim_k));
    }
    if (!w_true.allFinite()) throw ConfigError("w_true has non-finite entries");
    if (!(noise_scale > 0.0)) throw ConfigError("noise_scale must be positive");
    if (examples_per_class < 1) throw ConfigError("examples_per_class must be >= 1");
    if (attribute_scheme == AttributeScheme::OneHot && dim_k < n_classes) {
        throw ConfigError("one_hot attributes need dim_k >= n_classes");
    }
}

SyntheticWorldSpec SyntheticWorldSpec::planted(std::uint64_t seed) {
    SyntheticWorldSpec spec;
    spec.seed = seed;
    spec.w_true = random_weight_matrix(spec.dim_d, spec.dim_k, 2.0, derive_seed(seed, 0xA11CE));
    return spec;
}

Matrix random_weight_matrix(int dim_d, int dim_k, double scale, std::uint64_t seed) {
    Rng rng(seed);
    Matrix w(dim_d, dim_k);
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
        for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = scale * rng.normal();
    }
    return w;
}

std::pair<Dataset, std::vector<ClassGaussian>> generate_synthetic(const SyntheticWorldSpec& spec) {
    spec.validate();
    Rng attr_rng(derive_seed(spec.seed, 0));
    Dataset data;
    data.attributes = Matrix::Zero(spec.n_classes, spec.dim_k);
    for (int c = 0; c < spec.n_classes; ++c) {
        if (spec.attribute_scheme == AttributeScheme::OneHot) {
            data.attributes(c, c) = 1.0;
            continue;
        }
        double norm = 0.0;
        while (norm == 0.0) {
            for (int k = 0; k < spec.dim_k; ++k) data.attributes(c, k) = attr_rng.normal();
            norm = data.attributes.row(c).norm();
        }
        data.attributes.row(c) /= norm;
    }

    const Eigen::Index total = static_cast<Eigen::Index>(spec.n_classes) * spec.examples_per_class;
    data.features.resize(total, spec.dim_d);
    data.labels.reserve(static_cast<std::size_t>(total));
    std::vector<ClassGaussian> truth;
    const Vector variance = Vector::Constant(spec.dim_d, spec.noise_scale * spec.noise_scale);
    Eigen::Index row = 0;
    for (int c = 0; c < spec.n_classes; ++c) {
        const Vector mean = spec.w_true * data.attributes.row(c).transpose();
        truth.push_back(ClassGaussian::from_variance(mean, variance));
        // Sampled directly with noise_scale: the ground-truth gaussian is floored,
        // the generator is not.
        Rng rng(derive_seed(spec.seed, 1 + static_cast<std::uint64_t>(c)));
        for (int i = 0; i < spec.examples_per_class; ++i, ++row) {
            for (int d = 0; d < spec.dim_d; ++d) {
                data.features(row, d) = mean(d) + spec.noise_scale * rng.normal();
            }
            data.labels.push_back(c);
        }
    }
    data.metadata["generator"] = "planted_linear";
    data.metadata["seed"] = std::to_string(spec.seed);
    data.metadata["attribute_scheme"] = to_string(spec.attribute_scheme);
    data.validate();
    return {std::move(data), std::move(truth)};
}

}  // namespace zsar
