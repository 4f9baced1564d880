#pragma once

#include <optional>
#include <span>
#include <vector>

#include "genclust/matrix.hpp"

namespace genclust {

/// Hard clustering: labels in 1..k, every cluster non-empty.
struct Partition {
    std::vector<int> labels;
    std::optional<Matrix> centers; ///< k x d when known
    int k = 0;

    [[nodiscard]] std::size_t size() const noexcept { return labels.size(); }
};

/// Validates labels and returns a Partition with k = max label. Throws when
/// a label is outside 1..k or a cluster is empty.
Partition make_partition(std::vector<int> labels, std::optional<Matrix> centers = std::nullopt);

/// Renumbers labels 1.. by first appearance. Returns the mapping
/// old-1 -> new-1 (or -1 for labels that never appear); `labels` may use
/// any positive ids up to `max_label`.
std::vector<int> relabel_by_first_appearance(std::vector<int>& labels, int max_label);

/// Fuzzy memberships, K x n; column j sums to 1.
struct MembershipMatrix {
    Matrix u;
    double m = 2.0;

    [[nodiscard]] std::size_t clusters() const noexcept { return u.rows(); }
    [[nodiscard]] std::size_t points() const noexcept { return u.cols(); }
};

/// 0/1 memberships for a hard partition.
MembershipMatrix crisp_membership(std::span<const int> labels, int k, double m = 2.0);

/// Per-column argmax, ties to the lowest cluster; labels are 1-based and not
/// compacted (a cluster may win no point).
std::vector<int> argmax_labels(const MembershipMatrix& u);

/// Cluster means; throws if a cluster in 1..k is empty.
Matrix cluster_means(const Matrix& data, std::span<const int> labels, int k);

/// Per-cluster member counts, index 0 for label 1.
std::vector<std::size_t> cluster_sizes(std::span<const int> labels, int k);

} // namespace genclust
