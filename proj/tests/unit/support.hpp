#pragma once

// Hand-rolled generators and brute-force oracles shared by the unit suites.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "zsar/dataset.hpp"
#include "zsar/linalg.hpp"
#include "zsar/rng.hpp"

namespace testing {

using zsar::Matrix;
using zsar::Vector;

inline Matrix random_matrix(zsar::Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = scale * rng.normal();
    return m;
}

inline Vector random_vector(zsar::Rng& rng, Eigen::Index n, double scale = 1.0) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = scale * rng.normal();
    return v;
}

// G G^T with G n x r, so rank <= r: PSD but possibly singular.
inline Matrix random_psd(zsar::Rng& rng, Eigen::Index n, Eigen::Index rank) {
    const Matrix g = random_matrix(rng, n, rank);
    return g * g.transpose();
}

inline Matrix random_pd(zsar::Rng& rng, Eigen::Index n, double shift = 0.5) {
    Matrix m = random_psd(rng, n, n);
    m.diagonal().array() += shift;
    return m;
}

inline int uniform_int(zsar::Rng& rng, int lo, int hi) {
    return lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
}

inline std::vector<zsar::ClassId> random_labels(zsar::Rng& rng, std::size_t n, int n_classes) {
    std::vector<zsar::ClassId> out(n);
    for (auto& l : out) l = static_cast<zsar::ClassId>(rng.below(static_cast<std::uint64_t>(n_classes)));
    return out;
}

// Fresh, empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("zsar_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

// 64-bit FNV-1a over a byte string.
inline std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline zsar::Split first_n_seen(int n_classes, int n_seen) {
    zsar::Split s;
    for (int c = 0; c < n_classes; ++c) (c < n_seen ? s.seen_classes : s.unseen_classes).push_back(c);
    return s;
}

}  // namespace testing
