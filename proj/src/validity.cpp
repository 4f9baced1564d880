#include "genclust/validity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace genclust {

namespace {

std::uint64_t choose2(std::uint64_t x) {
    return x < 2 ? 0 : x * (x - 1) / 2;
}

void require_k2(int k, const char* index) {
    if (k < 2) {
        throw DegenerateError(std::string(index) + " needs at least 2 clusters");
    }
}

void check_shapes(const Matrix& data, const MembershipMatrix& u, const Matrix& centers) {
    if (u.points() != data.rows() || u.clusters() != centers.rows() || centers.cols() != data.cols()) {
        throw Error("index: membership/center/data dimensions do not match");
    }
}

double dist(std::span<const double> x, std::span<const double> y) {
    return std::sqrt(squared_euclidean(x, y));
}

} // namespace

PairCounts pair_counts(std::span<const int> t, std::span<const int> c) {
    if (t.size() != c.size()) {
        throw Error("pair_counts: label vectors differ in length");
    }
    if (t.size() < 2) {
        throw Error("pair_counts: need at least 2 objects");
    }
    std::map<std::pair<int, int>, std::uint64_t> joint;
    std::map<int, std::uint64_t> rows;
    std::map<int, std::uint64_t> cols;
    for (std::size_t i = 0; i < t.size(); ++i) {
        ++joint[{t[i], c[i]}];
        ++rows[t[i]];
        ++cols[c[i]];
    }
    std::uint64_t same_both = 0, same_t = 0, same_c = 0;
    for (const auto& [_, v] : joint) {
        same_both += choose2(v);
    }
    for (const auto& [_, v] : rows) {
        same_t += choose2(v);
    }
    for (const auto& [_, v] : cols) {
        same_c += choose2(v);
    }
    PairCounts pc;
    pc.a = same_both;
    pc.b = same_t - same_both;
    pc.c = same_c - same_both;
    pc.d = choose2(t.size()) - pc.a - pc.b - pc.c;
    return pc;
}

double minkowski_ext(const PairCounts& pc) {
    if (pc.a + pc.b == 0) {
        throw DegenerateError("minkowski index undefined: reference labeling has no co-clustered pair");
    }
    return std::sqrt(static_cast<double>(pc.b + pc.c) / static_cast<double>(pc.a + pc.b));
}

double minkowski_ext(std::span<const int> t, std::span<const int> c) {
    return minkowski_ext(pair_counts(t, c));
}

double adjusted_rand(const PairCounts& pc) {
    const double a = static_cast<double>(pc.a);
    const double b = static_cast<double>(pc.b);
    const double c = static_cast<double>(pc.c);
    const double d = static_cast<double>(pc.d);
    const double den = (a + b) * (b + d) + (a + c) * (c + d);
    if (den == 0.0) {
        throw DegenerateError("adjusted rand index undefined: zero denominator");
    }
    return 2.0 * (a * d - b * c) / den;
}

double adjusted_rand(std::span<const int> t, std::span<const int> c) {
    return adjusted_rand(pair_counts(t, c));
}

double percent_correct(const PairCounts& pc) {
    return 100.0 * static_cast<double>(pc.a + pc.d) / static_cast<double>(pc.total());
}

double percent_correct(std::span<const int> t, std::span<const int> c) {
    return percent_correct(pair_counts(t, c));
}

double j_index(const Matrix& data, const MembershipMatrix& u, const Matrix& centers) {
    check_shapes(data, u, centers);
    double total = 0.0;
    for (std::size_t k = 0; k < u.clusters(); ++k) {
        for (std::size_t i = 0; i < u.points(); ++i) {
            const double w = u.u(k, i);
            if (w != 0.0) {
                total += std::pow(w, u.m) * squared_euclidean(centers.row(k), data.row(i));
            }
        }
    }
    return total;
}

double db_index(const Matrix& data, const Partition& partition) {
    require_k2(partition.k, "DB index");
    const Matrix centers = cluster_means(data, partition.labels, partition.k);
    const auto sizes = cluster_sizes(partition.labels, partition.k);
    const auto k = static_cast<std::size_t>(partition.k);
    std::vector<double> scatter(k, 0.0);
    for (std::size_t i = 0; i < data.rows(); ++i) {
        const auto c = static_cast<std::size_t>(partition.labels[i] - 1);
        scatter[c] += squared_euclidean(data.row(i), centers.row(c));
    }
    for (std::size_t c = 0; c < k; ++c) {
        scatter[c] /= static_cast<double>(sizes[c]);
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        double r = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < k; ++j) {
            if (i == j) {
                continue;
            }
            const double dij = squared_euclidean(centers.row(i), centers.row(j));
            if (dij == 0.0) {
                throw DegenerateError("DB index undefined: clusters " + std::to_string(i + 1) + " and " +
                                      std::to_string(j + 1) + " have coincident centers");
            }
            r = std::max(r, (scatter[i] + scatter[j]) / dij);
        }
        sum += r;
    }
    return sum / static_cast<double>(k);
}

double dunn_index(const Matrix& data, const Partition& partition) {
    require_k2(partition.k, "Dunn index");
    cluster_sizes(partition.labels, partition.k);
    if (partition.labels.size() != data.rows()) {
        throw Error("Dunn index: label count does not match row count");
    }
    double min_between = std::numeric_limits<double>::infinity();
    double max_diameter = 0.0;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        for (std::size_t j = i + 1; j < data.rows(); ++j) {
            const double d = dist(data.row(i), data.row(j));
            if (partition.labels[i] == partition.labels[j]) {
                max_diameter = std::max(max_diameter, d);
            } else {
                min_between = std::min(min_between, d);
            }
        }
    }
    if (max_diameter == 0.0) {
        throw DegenerateError("Dunn index undefined: every cluster has zero diameter");
    }
    return min_between / max_diameter;
}

double xb_index(const Matrix& data, const MembershipMatrix& u, const Matrix& centers) {
    check_shapes(data, u, centers);
    require_k2(static_cast<int>(centers.rows()), "XB index");
    double sigma = 0.0;
    for (std::size_t k = 0; k < u.clusters(); ++k) {
        for (std::size_t i = 0; i < u.points(); ++i) {
            const double w = u.u(k, i);
            sigma += w * w * squared_euclidean(centers.row(k), data.row(i));
        }
    }
    double sep = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < centers.rows(); ++k) {
        for (std::size_t l = k + 1; l < centers.rows(); ++l) {
            sep = std::min(sep, squared_euclidean(centers.row(k), centers.row(l)));
        }
    }
    if (sep == 0.0) {
        throw DegenerateError("XB index undefined: coincident centers");
    }
    return sigma / (static_cast<double>(data.rows()) * sep);
}

double i_index(const Matrix& data, const MembershipMatrix& u, const Matrix& centers, double p) {
    check_shapes(data, u, centers);
    const std::size_t k = centers.rows();
    require_k2(static_cast<int>(k), "I index");
    std::vector<double> mean(data.cols(), 0.0);
    for (std::size_t i = 0; i < data.rows(); ++i) {
        for (std::size_t t = 0; t < data.cols(); ++t) {
            mean[t] += data(i, t);
        }
    }
    for (auto& v : mean) {
        v /= static_cast<double>(data.rows());
    }
    double e1 = 0.0;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        e1 += dist(data.row(i), mean);
    }
    double ek = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t i = 0; i < data.rows(); ++i) {
            ek += u.u(c, i) * dist(centers.row(c), data.row(i));
        }
    }
    if (ek == 0.0) {
        throw DegenerateError("I index undefined: E_K = 0");
    }
    double dk = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b) {
            dk = std::max(dk, dist(centers.row(a), centers.row(b)));
        }
    }
    return std::pow(e1 / ek * dk / static_cast<double>(k), p);
}

double silhouette(const Matrix& data, const Partition& partition) {
    require_k2(partition.k, "Silhouette index");
    if (partition.labels.size() != data.rows()) {
        throw Error("Silhouette index: label count does not match row count");
    }
    const auto sizes = cluster_sizes(partition.labels, partition.k);
    const std::size_t n = data.rows();
    std::vector<double> sums(static_cast<std::size_t>(partition.k));
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto own = static_cast<std::size_t>(partition.labels[i] - 1);
        if (sizes[own] == 1) {
            continue;
        }
        std::fill(sums.begin(), sums.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) {
                sums[static_cast<std::size_t>(partition.labels[j] - 1)] += dist(data.row(i), data.row(j));
            }
        }
        const double a = sums[own] / static_cast<double>(sizes[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < sums.size(); ++c) {
            if (c != own) {
                b = std::min(b, sums[c] / static_cast<double>(sizes[c]));
            }
        }
        const double m = std::max(a, b);
        total += m > 0.0 ? (b - a) / m : 0.0;
    }
    return total / static_cast<double>(n);
}

namespace {

struct IndexInfo {
    IndexName name;
    std::string_view key;
    Direction direction;
    bool internal;
};

constexpr IndexInfo kIndices[] = {
    {IndexName::J, "j", Direction::Minimize, true},
    {IndexName::DB, "db", Direction::Minimize, true},
    {IndexName::Dunn, "dunn", Direction::Maximize, true},
    {IndexName::XB, "xb", Direction::Minimize, true},
    {IndexName::I, "i", Direction::Maximize, true},
    {IndexName::Silhouette, "silhouette", Direction::Maximize, true},
    {IndexName::MinkowskiExt, "minkowski", Direction::Minimize, false},
    {IndexName::ARI, "ari", Direction::Maximize, false},
    {IndexName::PercentCorrect, "percent", Direction::Maximize, false},
};

const IndexInfo& info(IndexName name) {
    return kIndices[static_cast<std::size_t>(name)];
}

} // namespace

IndexSpec IndexSpec::parse(std::string_view name) {
    for (const auto& entry : kIndices) {
        if (entry.key == name) {
            return IndexSpec{entry.name};
        }
    }
    throw Error("unknown validity index '" + std::string(name) + "'");
}

std::string IndexSpec::canonical() const {
    return std::string(info(name).key);
}

Direction IndexSpec::direction() const noexcept {
    return info(name).direction;
}

bool IndexSpec::internal() const noexcept {
    return info(name).internal;
}

double evaluate_internal(const IndexSpec& spec, const Matrix& data, const Partition& partition,
                         const std::optional<FuzzyState>& fuzzy) {
    if (!spec.internal()) {
        throw Error("'" + spec.canonical() + "' is not an internal index");
    }
    auto lifted = [&]() {
        return FuzzyState{crisp_membership(partition.labels, partition.k),
                          cluster_means(data, partition.labels, partition.k)};
    };
    switch (spec.name) {
    case IndexName::DB:
        return db_index(data, partition);
    case IndexName::Dunn:
        return dunn_index(data, partition);
    case IndexName::Silhouette:
        return silhouette(data, partition);
    case IndexName::J:
    case IndexName::XB:
    case IndexName::I: {
        const FuzzyState state = fuzzy ? *fuzzy : lifted();
        if (spec.name == IndexName::J) {
            return j_index(data, state.membership, state.centers);
        }
        if (spec.name == IndexName::XB) {
            return xb_index(data, state.membership, state.centers);
        }
        return i_index(data, state.membership, state.centers, spec.p);
    }
    default:
        break;
    }
    throw Error("unhandled internal index");
}

double evaluate_external(const IndexSpec& spec, std::span<const int> truth, std::span<const int> labels) {
    const auto pc = pair_counts(truth, labels);
    switch (spec.name) {
    case IndexName::MinkowskiExt:
        return minkowski_ext(pc);
    case IndexName::ARI:
        return adjusted_rand(pc);
    case IndexName::PercentCorrect:
        return percent_correct(pc);
    default:
        throw Error("'" + spec.canonical() + "' is not an external index");
    }
}

} // namespace genclust
