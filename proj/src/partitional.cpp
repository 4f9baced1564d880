#include "genclust/partitional.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "genclust/random.hpp"

namespace genclust {

void RunConfig::validate(std::size_t n) const {
    if (k < 2) {
        throw Error("k must be at least 2 (got " + std::to_string(k) + ")");
    }
    if (static_cast<std::size_t>(k) > n) {
        throw Error("k = " + std::to_string(k) + " exceeds the number of objects (" + std::to_string(n) + ")");
    }
    if (max_iters < 1) {
        throw Error("max_iters must be positive");
    }
    if (!(tol >= 0.0)) {
        throw Error("tol must be non-negative");
    }
    if (!(fuzzifier > 1.0) || !std::isfinite(fuzzifier)) {
        throw Error("fuzzifier m must be greater than 1");
    }
}

Matrix initial_centers(const Matrix& data, int k, std::uint64_t seed) {
    Rng rng(seed);
    const auto idx = sample_distinct(rng, data.rows(), static_cast<std::size_t>(k));
    Matrix centers(idx.size(), data.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        std::ranges::copy(data.row(idx[i]), centers.row(i).begin());
    }
    return centers;
}

namespace {

double assign(const Matrix& data, const Matrix& centers, std::vector<int>& labels) {
    double total = 0.0;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        std::size_t best = 0;
        double best_d = squared_euclidean(data.row(i), centers.row(0));
        for (std::size_t c = 1; c < centers.rows(); ++c) {
            const double d = squared_euclidean(data.row(i), centers.row(c));
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        labels[i] = static_cast<int>(best) + 1;
        total += best_d;
    }
    return total;
}

double max_shift(const Matrix& a, const Matrix& b) {
    double m = 0.0;
    for (std::size_t c = 0; c < a.rows(); ++c) {
        m = std::max(m, std::sqrt(squared_euclidean(a.row(c), b.row(c))));
    }
    return m;
}

// Means of the current labeling. Each empty cluster takes the point farthest
// from its own center (among clusters with more than one member).
Matrix update_centers(const Matrix& data, std::vector<int>& labels, int k) {
    auto sizes = cluster_sizes(labels, k);
    if (std::find(sizes.begin(), sizes.end(), 0U) == sizes.end()) {
        return cluster_means(data, labels, k);
    }
    Matrix means(static_cast<std::size_t>(k), data.cols(), 0.0);
    for (std::size_t i = 0; i < data.rows(); ++i) {
        auto c = means.row(static_cast<std::size_t>(labels[i] - 1));
        const auto x = data.row(i);
        for (std::size_t t = 0; t < x.size(); ++t) {
            c[t] += x[t];
        }
    }
    for (std::size_t c = 0; c < sizes.size(); ++c) {
        if (sizes[c] > 0) {
            for (auto& v : means.row(c)) {
                v /= static_cast<double>(sizes[c]);
            }
        }
    }
    for (std::size_t empty = 0; empty < sizes.size(); ++empty) {
        if (sizes[empty] != 0) {
            continue;
        }
        std::size_t far = data.rows();
        double far_d = -1.0;
        for (std::size_t i = 0; i < data.rows(); ++i) {
            const auto own = static_cast<std::size_t>(labels[i] - 1);
            if (sizes[own] < 2) {
                continue;
            }
            const double d = squared_euclidean(data.row(i), means.row(own));
            if (d > far_d) {
                far_d = d;
                far = i;
            }
        }
        if (far == data.rows()) {
            throw Error("k-means: cannot repair empty cluster");
        }
        --sizes[static_cast<std::size_t>(labels[far] - 1)];
        labels[far] = static_cast<int>(empty) + 1;
        sizes[empty] = 1;
    }
    return cluster_means(data, labels, k);
}

} // namespace

KMeansResult kmeans_run(const Matrix& data, const RunConfig& cfg) {
    cfg.validate(data.rows());
    return kmeans_run(data, cfg, initial_centers(data, cfg.k, cfg.seed));
}

KMeansResult kmeans_run(const Matrix& data, const RunConfig& cfg, Matrix centers) {
    cfg.validate(data.rows());
    if (centers.rows() != static_cast<std::size_t>(cfg.k) || centers.cols() != data.cols()) {
        throw Error("k-means: initial centers have the wrong shape");
    }
    KMeansResult result;
    std::vector<int> labels(data.rows());
    result.history.push_back(assign(data, centers, labels));

    int it = 0;
    while (it < cfg.max_iters) {
        ++it;
        Matrix next = update_centers(data, labels, cfg.k);
        const double shift = max_shift(centers, next);
        centers = std::move(next);
        std::vector<int> next_labels(data.rows());
        result.history.push_back(assign(data, centers, next_labels));
        const bool changed = next_labels != labels;
        labels = std::move(next_labels);
        if (!changed || shift < cfg.tol) {
            break;
        }
    }
    // Final means (and repair of any cluster emptied by the last assignment).
    centers = update_centers(data, labels, cfg.k);

    const auto map = relabel_by_first_appearance(labels, cfg.k);
    Matrix ordered(centers.rows(), centers.cols());
    for (std::size_t old = 0; old < map.size(); ++old) {
        std::ranges::copy(centers.row(old), ordered.row(static_cast<std::size_t>(map[old])).begin());
    }
    result.partition = make_partition(std::move(labels), std::move(ordered));
    result.objective = kmeans_objective(data, result.partition);
    result.history.push_back(result.objective);
    result.iterations = it;
    return result;
}

double kmeans_objective(const Matrix& data, const Partition& partition) {
    if (partition.labels.size() != data.rows()) {
        throw Error("k-means objective: label count does not match row count");
    }
    const Matrix centers =
        partition.centers ? *partition.centers : cluster_means(data, partition.labels, partition.k);
    double total = 0.0;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        const int l = partition.labels[i];
        if (l < 1 || l > partition.k) {
            throw Error("k-means objective: label " + std::to_string(l) + " out of range");
        }
        total += squared_euclidean(data.row(i), centers.row(static_cast<std::size_t>(l - 1)));
    }
    return total;
}

MembershipMatrix fcm_memberships(const Matrix& data, const Matrix& centers, double m) {
    if (centers.cols() != data.cols()) {
        throw Error("fcm: center dimension does not match data");
    }
    const std::size_t k = centers.rows();
    const std::size_t n = data.rows();
    const double e = 1.0 / (m - 1.0);
    MembershipMatrix out{Matrix(k, n, 0.0), m};
    std::vector<double> d2(k);
    for (std::size_t j = 0; j < n; ++j) {
        std::size_t coincident = k;
        for (std::size_t i = 0; i < k; ++i) {
            d2[i] = squared_euclidean(data.row(j), centers.row(i));
            if (d2[i] == 0.0 && coincident == k) {
                coincident = i;
            }
        }
        if (coincident < k) {
            out.u(coincident, j) = 1.0;
            continue;
        }
        for (std::size_t i = 0; i < k; ++i) {
            double s = 0.0;
            for (std::size_t t = 0; t < k; ++t) {
                s += std::pow(d2[i] / d2[t], e);
            }
            out.u(i, j) = 1.0 / s;
        }
    }
    return out;
}

Matrix fcm_centers(const Matrix& data, const MembershipMatrix& u) {
    const std::size_t k = u.clusters();
    Matrix centers(k, data.cols(), 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        double wsum = 0.0;
        auto c = centers.row(i);
        for (std::size_t j = 0; j < data.rows(); ++j) {
            const double w = std::pow(u.u(i, j), u.m);
            wsum += w;
            const auto x = data.row(j);
            for (std::size_t t = 0; t < x.size(); ++t) {
                c[t] += w * x[t];
            }
        }
        if (!(wsum > 0.0)) {
            throw Error("fcm: cluster " + std::to_string(i + 1) + " has zero total membership");
        }
        for (auto& v : c) {
            v /= wsum;
        }
    }
    return centers;
}

double fcm_objective(const Matrix& data, const MembershipMatrix& u, const Matrix& centers) {
    if (u.points() != data.rows() || u.clusters() != centers.rows() || centers.cols() != data.cols()) {
        throw Error("fcm objective: dimension mismatch");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < u.clusters(); ++i) {
        for (std::size_t j = 0; j < u.points(); ++j) {
            total += std::pow(u.u(i, j), u.m) * squared_euclidean(data.row(j), centers.row(i));
        }
    }
    return total;
}

FcmResult fcm_run(const Matrix& data, const RunConfig& cfg) {
    cfg.validate(data.rows());
    return fcm_run(data, cfg, initial_centers(data, cfg.k, cfg.seed));
}

FcmResult fcm_run(const Matrix& data, const RunConfig& cfg, Matrix centers) {
    cfg.validate(data.rows());
    if (centers.rows() != static_cast<std::size_t>(cfg.k) || centers.cols() != data.cols()) {
        throw Error("fcm: initial centers have the wrong shape");
    }
    FcmResult result;
    int it = 0;
    while (it < cfg.max_iters) {
        ++it;
        const auto u = fcm_memberships(data, centers, cfg.fuzzifier);
        result.history.push_back(fcm_objective(data, u, centers));
        Matrix next = fcm_centers(data, u);
        const double shift = max_shift(centers, next);
        centers = std::move(next);
        if (shift < cfg.tol) {
            break;
        }
    }
    auto u = fcm_memberships(data, centers, cfg.fuzzifier);
    result.objective = fcm_objective(data, u, centers);
    result.history.push_back(result.objective);
    result.iterations = it;

    auto labels = argmax_labels(u);
    auto map = relabel_by_first_appearance(labels, cfg.k);
    // Clusters that won no point go last, in their original order.
    int next = *std::max_element(map.begin(), map.end()) + 1;
    for (auto& slot : map) {
        if (slot < 0) {
            slot = next++;
        }
    }
    const std::size_t k = static_cast<std::size_t>(cfg.k);
    MembershipMatrix ordered{Matrix(k, data.rows()), cfg.fuzzifier};
    Matrix ordered_centers(k, data.cols());
    for (std::size_t old = 0; old < k; ++old) {
        const auto row = static_cast<std::size_t>(map[old]);
        for (std::size_t j = 0; j < data.rows(); ++j) {
            ordered.u(row, j) = u.u(old, j);
        }
        std::ranges::copy(centers.row(old), ordered_centers.row(row).begin());
    }
    const int used = *std::max_element(labels.begin(), labels.end());
    Matrix used_centers(static_cast<std::size_t>(used), data.cols());
    for (std::size_t c = 0; c < static_cast<std::size_t>(used); ++c) {
        std::ranges::copy(ordered_centers.row(c), used_centers.row(c).begin());
    }
    result.partition = make_partition(std::move(labels), std::move(used_centers));
    result.membership = std::move(ordered);
    result.centers = std::move(ordered_centers);
    return result;
}

} // namespace genclust
