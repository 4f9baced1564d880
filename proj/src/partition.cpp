#include "genclust/partition.hpp"

#include <algorithm>
#include <string>

namespace genclust {

Partition make_partition(std::vector<int> labels, std::optional<Matrix> centers) {
    if (labels.empty()) {
        throw Error("partition: empty label vector");
    }
    const int k = *std::max_element(labels.begin(), labels.end());
    for (const int l : labels) {
        if (l < 1) {
            throw Error("partition: label " + std::to_string(l) + " out of range");
        }
    }
    const auto sizes = cluster_sizes(labels, k);
    for (std::size_t c = 0; c < sizes.size(); ++c) {
        if (sizes[c] == 0) {
            throw Error("partition: cluster " + std::to_string(c + 1) + " is empty");
        }
    }
    if (centers && centers->rows() != static_cast<std::size_t>(k)) {
        throw Error("partition: center count does not match k");
    }
    return Partition{std::move(labels), std::move(centers), k};
}

std::vector<int> relabel_by_first_appearance(std::vector<int>& labels, int max_label) {
    std::vector<int> map(static_cast<std::size_t>(max_label), -1);
    int next = 0;
    for (auto& l : labels) {
        auto& slot = map[static_cast<std::size_t>(l - 1)];
        if (slot < 0) {
            slot = next++;
        }
        l = slot + 1;
    }
    return map;
}

MembershipMatrix crisp_membership(std::span<const int> labels, int k, double m) {
    MembershipMatrix out{Matrix(static_cast<std::size_t>(k), labels.size(), 0.0), m};
    for (std::size_t j = 0; j < labels.size(); ++j) {
        if (labels[j] < 1 || labels[j] > k) {
            throw Error("crisp_membership: label out of range");
        }
        out.u(static_cast<std::size_t>(labels[j] - 1), j) = 1.0;
    }
    return out;
}

std::vector<int> argmax_labels(const MembershipMatrix& u) {
    std::vector<int> labels(u.points());
    for (std::size_t j = 0; j < u.points(); ++j) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < u.clusters(); ++i) {
            if (u.u(i, j) > u.u(best, j)) {
                best = i;
            }
        }
        labels[j] = static_cast<int>(best) + 1;
    }
    return labels;
}

std::vector<std::size_t> cluster_sizes(std::span<const int> labels, int k) {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
    for (const int l : labels) {
        if (l < 1 || l > k) {
            throw Error("label " + std::to_string(l) + " out of range 1.." + std::to_string(k));
        }
        ++sizes[static_cast<std::size_t>(l - 1)];
    }
    return sizes;
}

Matrix cluster_means(const Matrix& data, std::span<const int> labels, int k) {
    if (labels.size() != data.rows()) {
        throw Error("label count does not match row count");
    }
    const auto sizes = cluster_sizes(labels, k);
    Matrix centers(static_cast<std::size_t>(k), data.cols(), 0.0);
    for (std::size_t i = 0; i < data.rows(); ++i) {
        auto c = centers.row(static_cast<std::size_t>(labels[i] - 1));
        const auto x = data.row(i);
        for (std::size_t t = 0; t < x.size(); ++t) {
            c[t] += x[t];
        }
    }
    for (std::size_t c = 0; c < sizes.size(); ++c) {
        if (sizes[c] == 0) {
            throw Error("cluster " + std::to_string(c + 1) + " is empty");
        }
        for (auto& v : centers.row(c)) {
            v /= static_cast<double>(sizes[c]);
        }
    }
    return centers;
}

} // namespace genclust
