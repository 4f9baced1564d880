#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "genclust/matrix.hpp"

namespace genclust {

enum class MetricKind {
    Euclidean,
    SqEuclidean,
    Seuclidean,
    Cityblock,
    Mahalanobis,
    Minkowski,
    Cosine,
    Correlation,
    Spearman,
    Hamming,
    Jaccard,
    Chebychev,
};

/// Dataset-level statistics some metrics need.
struct MetricContext {
    std::vector<double> inv_std;  ///< Seuclidean: 1 / per-dimension sample std
    Matrix inv_cov;               ///< Mahalanobis: (cov + eps I)^-1
};

/// A distance function plus whatever it was prepared with. Immutable after
/// construction.
class Metric {
public:
    explicit Metric(MetricKind kind, double p = 2.0);

    /// "euclidean", "seuclidean", "minkowski:3", ...
    static Metric parse(std::string_view name);

    /// Computes the context (per-dimension std or regularized inverse
    /// covariance) from the rows of `data`. No-op for other kinds.
    [[nodiscard]] Metric prepared(const Matrix& data) const;

    [[nodiscard]] MetricKind kind() const noexcept { return kind_; }
    [[nodiscard]] double exponent() const noexcept { return p_; }
    [[nodiscard]] bool needs_context() const noexcept;
    [[nodiscard]] bool has_context() const noexcept { return ctx_ != nullptr; }
    [[nodiscard]] std::string name() const;

    /// Regularized inverse covariance / per-dimension scale set directly.
    [[nodiscard]] Metric with_context(MetricContext ctx) const;

    [[nodiscard]] double distance(std::span<const double> x, std::span<const double> y) const;

private:
    MetricKind kind_;
    double p_;
    std::shared_ptr<const MetricContext> ctx_;
};

/// Symmetric n x n matrix with zero diagonal.
using DistanceMatrix = Matrix;

/// Pairwise distances between the rows of `data`. Prepares the metric's
/// context from `data` when it has none.
DistanceMatrix pairwise(const Metric& metric, const Matrix& data);

/// Ranks with ties averaged (1-based), as used by Spearman correlation.
std::vector<double> average_ranks(std::span<const double> v);

} // namespace genclust
