#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "genclust/metric.hpp"
#include "genclust/partition.hpp"

namespace genclust {

enum class Linkage { Single, Complete, Average, Weighted, Centroid, Median, Ward };

Linkage parse_linkage(std::string_view name);
std::string linkage_name(Linkage method);

/// Centroid, median and Ward assume Euclidean geometry.
constexpr bool is_geometric(Linkage method) noexcept {
    return method == Linkage::Centroid || method == Linkage::Median || method == Linkage::Ward;
}

/// Heights are non-decreasing for these linkages.
constexpr bool is_monotone(Linkage method) noexcept {
    return method != Linkage::Centroid && method != Linkage::Median;
}

/// One agglomeration step. Leaves are 0..n-1; the cluster formed by merge s
/// gets id n + s. first < second.
struct Merge {
    std::size_t first = 0;
    std::size_t second = 0;
    double height = 0.0;
    std::size_t size = 0;
};

struct Dendrogram {
    std::vector<Merge> merges; ///< n - 1 entries
    std::size_t leaf_count = 0;
};

/// Agglomerates with the Lance-Williams recurrence. At each step the pair
/// with the smallest dissimilarity merges; ties go to the lexicographically
/// smallest (id, id) pair. `source` is the metric that produced `dist`;
/// geometric linkages require Euclidean and work on squared distances
/// internally, reporting square-rooted heights.
Dendrogram linkage_build(const DistanceMatrix& dist, Linkage method,
                         MetricKind source = MetricKind::Euclidean);

/// Undo the last k - 1 merges. Labels 1..k by first appearance in leaf order.
Partition cut_tree(const Dendrogram& tree, std::size_t k);

} // namespace genclust
