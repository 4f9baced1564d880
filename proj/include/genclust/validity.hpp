#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "genclust/matrix.hpp"
#include "genclust/partition.hpp"

namespace genclust {

// External indices -------------------------------------------------------

/// Unordered pair counts between a reference labeling T and a clustering C.
struct PairCounts {
    std::uint64_t a = 0; ///< together in T and in C
    std::uint64_t b = 0; ///< together in T only
    std::uint64_t c = 0; ///< together in C only
    std::uint64_t d = 0; ///< apart in both

    [[nodiscard]] std::uint64_t total() const noexcept { return a + b + c + d; }
    bool operator==(const PairCounts&) const = default;
};

/// Counts from the contingency table; labels may be any integers.
PairCounts pair_counts(std::span<const int> t, std::span<const int> c);

/// sqrt((b + c) / (a + b)). Not symmetric in its arguments.
double minkowski_ext(const PairCounts& pc);
double minkowski_ext(std::span<const int> t, std::span<const int> c);

/// 2(ad - bc) / ((a + b)(b + d) + (a + c)(c + d)), as printed in the pair
/// count form. Can go negative for anti-correlated labelings.
double adjusted_rand(const PairCounts& pc);
double adjusted_rand(std::span<const int> t, std::span<const int> c);

/// 100 (a + d) / (a + b + c + d).
double percent_correct(const PairCounts& pc);
double percent_correct(std::span<const int> t, std::span<const int> c);

// Internal indices (Euclidean) -------------------------------------------

/// sum_k sum_i u_ki^m ||z_k - x_i||^2 with m = u.m.
double j_index(const Matrix& data, const MembershipMatrix& u, const Matrix& centers);

/// Davies-Bouldin with squared scatter and squared center separation;
/// centers are cluster means.
double db_index(const Matrix& data, const Partition& partition);

/// Smallest between-cluster point distance over the largest cluster diameter.
double dunn_index(const Matrix& data, const Partition& partition);

/// sum u^2 D^2 / (n * min center separation^2).
double xb_index(const Matrix& data, const MembershipMatrix& u, const Matrix& centers);

/// ((1/K) * (E_1 / E_K) * D_K)^p with unsquared distances; E_1 is the total
/// distance to the grand mean.
double i_index(const Matrix& data, const MembershipMatrix& u, const Matrix& centers, double p = 2.0);

/// Mean silhouette width; points in singleton clusters score 0.
double silhouette(const Matrix& data, const Partition& partition);

// Index registry -----------------------------------------------------------

enum class IndexName { J, DB, Dunn, XB, I, Silhouette, MinkowskiExt, ARI, PercentCorrect };
enum class Direction { Maximize, Minimize };

struct IndexSpec {
    IndexName name = IndexName::Silhouette;
    double p = 2.0; ///< I index exponent

    /// "j", "db", "dunn", "xb", "i", "silhouette", "minkowski", "ari", "percent"
    static IndexSpec parse(std::string_view name);
    [[nodiscard]] std::string canonical() const;
    [[nodiscard]] Direction direction() const noexcept;
    [[nodiscard]] bool internal() const noexcept;

    /// True when `a` is strictly better than `b`.
    [[nodiscard]] bool better(double a, double b) const noexcept {
        return direction() == Direction::Maximize ? a > b : a < b;
    }
};

/// Fuzzy state attached to a clustering (FCM); J, XB and I use it instead of
/// the crisp lifting when present.
struct FuzzyState {
    MembershipMatrix membership;
    Matrix centers;
};

/// Evaluates an internal index on a clustering result. Crisp partitions are
/// lifted to 0/1 memberships with cluster-mean centers. Throws
/// DegenerateError where the index is undefined.
double evaluate_internal(const IndexSpec& spec, const Matrix& data, const Partition& partition,
                         const std::optional<FuzzyState>& fuzzy = std::nullopt);

double evaluate_external(const IndexSpec& spec, std::span<const int> truth, std::span<const int> labels);

} // namespace genclust
