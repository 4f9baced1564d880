#include "genclust/hierarchical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

namespace genclust {

namespace {

constexpr std::string_view kLinkageNames[] = {"single", "complete", "average", "weighted",
                                              "centroid", "median", "ward"};

struct PairKey {
    double d;
    std::size_t lo;
    std::size_t hi;

    bool operator<(const PairKey& o) const noexcept {
        return std::tie(d, lo, hi) < std::tie(o.d, o.lo, o.hi);
    }
};

} // namespace

Linkage parse_linkage(std::string_view name) {
    for (std::size_t i = 0; i < std::size(kLinkageNames); ++i) {
        if (kLinkageNames[i] == name) {
            return static_cast<Linkage>(i);
        }
    }
    throw Error("unknown linkage method '" + std::string(name) + "'");
}

std::string linkage_name(Linkage method) {
    return std::string(kLinkageNames[static_cast<std::size_t>(method)]);
}

Dendrogram linkage_build(const DistanceMatrix& dist, Linkage method, MetricKind source) {
    const std::size_t n = dist.rows();
    if (dist.cols() != n) {
        throw Error("linkage: distance matrix is not square");
    }
    if (is_geometric(method) && source != MetricKind::Euclidean) {
        throw Error("linkage: method '" + linkage_name(method) + "' requires the euclidean metric");
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double v = dist(i, j);
            if (std::isnan(v)) {
                throw Error("linkage: NaN distance at (" + std::to_string(i) + ", " + std::to_string(j) + ")");
            }
            if (v != dist(j, i)) {
                throw Error("linkage: distance matrix is not symmetric");
            }
        }
    }

    const bool squared = is_geometric(method);
    Matrix d = dist;
    if (squared) {
        for (auto& v : d.values()) {
            v *= v;
        }
    }

    std::vector<std::size_t> id(n);
    std::iota(id.begin(), id.end(), 0);
    std::vector<std::size_t> size(n, 1);
    std::vector<bool> active(n, true);
    std::vector<std::size_t> nn(n, n);
    std::vector<double> nn_d(n, std::numeric_limits<double>::infinity());

    auto key = [&](std::size_t i, std::size_t j) {
        return PairKey{d(i, j), std::min(id[i], id[j]), std::max(id[i], id[j])};
    };
    auto refresh = [&](std::size_t i) {
        nn[i] = n;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i || !active[j]) {
                continue;
            }
            if (nn[i] == n || key(i, j) < key(i, nn[i])) {
                nn[i] = j;
            }
        }
        nn_d[i] = nn[i] == n ? std::numeric_limits<double>::infinity() : d(i, nn[i]);
    };
    for (std::size_t i = 0; i < n; ++i) {
        refresh(i);
    }

    Dendrogram tree;
    tree.leaf_count = n;
    for (std::size_t step = 0; step + 1 < n; ++step) {
        std::size_t a = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (active[i] && nn[i] != n && (a == n || key(i, nn[i]) < key(a, nn[a]))) {
                a = i;
            }
        }
        std::size_t b = nn[a];
        if (b < a) {
            std::swap(a, b);
        }
        const double dab = d(a, b);
        const double na = static_cast<double>(size[a]);
        const double nb = static_cast<double>(size[b]);

        for (std::size_t k = 0; k < n; ++k) {
            if (!active[k] || k == a || k == b) {
                continue;
            }
            const double dak = d(a, k);
            const double dbk = d(b, k);
            const double nk = static_cast<double>(size[k]);
            double v = 0.0;
            switch (method) {
            case Linkage::Single:
                v = std::min(dak, dbk);
                break;
            case Linkage::Complete:
                v = std::max(dak, dbk);
                break;
            case Linkage::Average:
                v = (na * dak + nb * dbk) / (na + nb);
                break;
            case Linkage::Weighted:
                v = 0.5 * (dak + dbk);
                break;
            case Linkage::Centroid:
                v = (na * dak + nb * dbk) / (na + nb) - na * nb * dab / ((na + nb) * (na + nb));
                break;
            case Linkage::Median:
                v = 0.5 * dak + 0.5 * dbk - 0.25 * dab;
                break;
            case Linkage::Ward:
                v = ((na + nk) * dak + (nb + nk) * dbk - nk * dab) / (na + nb + nk);
                break;
            }
            v = std::max(v, 0.0);
            d(a, k) = v;
            d(k, a) = v;
        }

        Merge merge;
        merge.first = std::min(id[a], id[b]);
        merge.second = std::max(id[a], id[b]);
        merge.height = squared ? std::sqrt(dab) : dab;
        merge.size = size[a] + size[b];
        tree.merges.push_back(merge);

        active[b] = false;
        size[a] += size[b];
        id[a] = n + step;

        refresh(a);
        for (std::size_t k = 0; k < n; ++k) {
            if (!active[k] || k == a) {
                continue;
            }
            if (nn[k] == a || nn[k] == b) {
                refresh(k);
            } else if (key(k, a) < key(k, nn[k])) {
                nn[k] = a;
                nn_d[k] = d(k, a);
            }
        }
    }
    return tree;
}

Partition cut_tree(const Dendrogram& tree, std::size_t k) {
    const std::size_t n = tree.leaf_count;
    if (k < 1 || k > n) {
        throw Error("cut_tree: k = " + std::to_string(k) + " out of range 1.." + std::to_string(n));
    }
    if (tree.merges.size() + 1 != n) {
        throw Error("cut_tree: dendrogram has " + std::to_string(tree.merges.size()) + " merges for " +
                    std::to_string(n) + " leaves");
    }
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    // Representative leaf of every cluster id.
    std::vector<std::size_t> rep(2 * n - 1);
    std::iota(rep.begin(), rep.begin() + static_cast<std::ptrdiff_t>(n), 0);
    for (std::size_t s = 0; s + k < n; ++s) {
        const auto& m = tree.merges[s];
        if (m.first >= n + s || m.second >= n + s) {
            throw Error("cut_tree: merge " + std::to_string(s) + " references a future cluster");
        }
        const std::size_t ra = find(rep[m.first]);
        const std::size_t rb = find(rep[m.second]);
        parent[rb] = ra;
        rep[n + s] = ra;
    }
    std::vector<int> labels(n);
    std::vector<int> code(n, 0);
    int next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = find(i);
        if (code[r] == 0) {
            code[r] = ++next;
        }
        labels[i] = code[r];
    }
    return make_partition(std::move(labels));
}

} // namespace genclust
