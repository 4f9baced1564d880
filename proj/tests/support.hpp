#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "genclust/expression.hpp"
#include "genclust/matrix.hpp"
#include "genclust/random.hpp"

namespace support {

using genclust::Matrix;

inline Matrix random_matrix(genclust::Rng& rng, std::size_t rows, std::size_t cols, double lo = -5.0,
                            double hi = 5.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Matrix m(rows, cols);
    for (auto& v : m.values()) {
        v = u(rng);
    }
    return m;
}

inline std::vector<int> random_labels(genclust::Rng& rng, std::size_t n, int k) {
    std::uniform_int_distribution<int> u(1, k);
    std::vector<int> labels(n);
    for (auto& l : labels) {
        l = u(rng);
    }
    return labels;
}

struct Blobs {
    Matrix points;
    std::vector<int> labels;
};

/// Isotropic unit-variance blobs on a square grid with `spacing` between
/// neighboring centers; points are interleaved by blob.
inline Blobs gaussian_blobs(std::size_t n, double spacing, std::uint64_t seed) {
    const double centers[4][2] = {{0, 0}, {spacing, 0}, {0, spacing}, {spacing, spacing}};
    genclust::Rng rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Blobs b{Matrix(n, 2), std::vector<int>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = i % 4;
        b.points(i, 0) = centers[c][0] + g(rng);
        b.points(i, 1) = centers[c][1] + g(rng);
        b.labels[i] = static_cast<int>(c) + 1;
    }
    return b;
}

inline genclust::ExpressionMatrix blob_dataset(std::uint64_t seed = 2024) {
    auto b = gaussian_blobs(200, 8.0, seed);
    return genclust::ExpressionMatrix(b.points, {}, {}, b.labels);
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& tag) {
    static std::random_device rd;
    auto dir = std::filesystem::temp_directory_path() / ("genclust_" + tag + "_" + std::to_string(rd()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline bool rel_close(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

} // namespace support
