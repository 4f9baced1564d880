#pragma once

// Deliberately naive reference implementations. None of these call into the
// library beyond the Matrix container.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <vector>

#include "genclust/matrix.hpp"

namespace oracle {

using genclust::Matrix;
using Grid = std::vector<std::vector<double>>; // u[k][i]

inline double dist(const Matrix& m, std::size_t i, const std::vector<double>& z) {
    double s = 0.0;
    for (std::size_t c = 0; c < m.cols(); ++c) {
        s += (m(i, c) - z[c]) * (m(i, c) - z[c]);
    }
    return std::sqrt(s);
}

inline double dist(const Matrix& m, std::size_t i, std::size_t j) {
    double s = 0.0;
    for (std::size_t c = 0; c < m.cols(); ++c) {
        s += (m(i, c) - m(j, c)) * (m(i, c) - m(j, c));
    }
    return std::sqrt(s);
}

inline double dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) {
        s += (a[c] - b[c]) * (a[c] - b[c]);
    }
    return std::sqrt(s);
}

// Pair counting ---------------------------------------------------------------

struct Counts {
    std::uint64_t a = 0, b = 0, c = 0, d = 0;
};

inline Counts enumerate_pairs(const std::vector<int>& t, const std::vector<int>& c) {
    Counts r;
    for (std::size_t i = 0; i < t.size(); ++i) {
        for (std::size_t j = i + 1; j < t.size(); ++j) {
            const bool st = t[i] == t[j];
            const bool sc = c[i] == c[j];
            if (st && sc) {
                ++r.a;
            } else if (st) {
                ++r.b;
            } else if (sc) {
                ++r.c;
            } else {
                ++r.d;
            }
        }
    }
    return r;
}

inline double minkowski(const Counts& p) {
    return std::sqrt(static_cast<double>(p.b + p.c) / static_cast<double>(p.a + p.b));
}

inline double ari(const Counts& p) {
    const double a = p.a, b = p.b, c = p.c, d = p.d;
    return 2.0 * (a * d - b * c) / ((a + b) * (b + d) + (a + c) * (c + d));
}

inline double percent(const Counts& p) {
    return 100.0 * static_cast<double>(p.a + p.d) / static_cast<double>(p.a + p.b + p.c + p.d);
}

// Internal indices --------------------------------------------------------------

inline std::vector<std::vector<double>> means(const Matrix& x, const std::vector<int>& labels, int k) {
    std::vector<std::vector<double>> z(k, std::vector<double>(x.cols(), 0.0));
    std::vector<double> count(k, 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        count[labels[i] - 1] += 1.0;
        for (std::size_t c = 0; c < x.cols(); ++c) {
            z[labels[i] - 1][c] += x(i, c);
        }
    }
    for (int q = 0; q < k; ++q) {
        for (auto& v : z[q]) {
            v /= count[q];
        }
    }
    return z;
}

inline Grid crisp(const std::vector<int>& labels, int k) {
    Grid u(k, std::vector<double>(labels.size(), 0.0));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        u[labels[i] - 1][i] = 1.0;
    }
    return u;
}

inline double j_index(const Matrix& x, const Grid& u, const std::vector<std::vector<double>>& z, double m) {
    double s = 0.0;
    for (std::size_t q = 0; q < z.size(); ++q) {
        for (std::size_t i = 0; i < x.rows(); ++i) {
            const double dd = dist(x, i, z[q]);
            s += std::pow(u[q][i], m) * dd * dd;
        }
    }
    return s;
}

inline double db_index(const Matrix& x, const std::vector<int>& labels, int k) {
    const auto z = means(x, labels, k);
    std::vector<double> scatter(k, 0.0);
    std::vector<double> size(k, 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double dd = dist(x, i, z[labels[i] - 1]);
        scatter[labels[i] - 1] += dd * dd;
        size[labels[i] - 1] += 1.0;
    }
    double total = 0.0;
    for (int p = 0; p < k; ++p) {
        double worst = -1.0;
        for (int q = 0; q < k; ++q) {
            if (p == q) {
                continue;
            }
            const double sep = dist(z[p], z[q]);
            worst = std::max(worst, (scatter[p] / size[p] + scatter[q] / size[q]) / (sep * sep));
        }
        total += worst;
    }
    return total / k;
}

inline double dunn_index(const Matrix& x, const std::vector<int>& labels) {
    double cross = std::numeric_limits<double>::infinity();
    double diam = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = i + 1; j < x.rows(); ++j) {
            const double dd = dist(x, i, j);
            if (labels[i] == labels[j]) {
                diam = std::max(diam, dd);
            } else {
                cross = std::min(cross, dd);
            }
        }
    }
    return cross / diam;
}

inline double xb_index(const Matrix& x, const Grid& u, const std::vector<std::vector<double>>& z) {
    double sigma = 0.0;
    for (std::size_t q = 0; q < z.size(); ++q) {
        for (std::size_t i = 0; i < x.rows(); ++i) {
            const double dd = dist(x, i, z[q]);
            sigma += u[q][i] * u[q][i] * dd * dd;
        }
    }
    double sep = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < z.size(); ++p) {
        for (std::size_t q = p + 1; q < z.size(); ++q) {
            sep = std::min(sep, std::pow(dist(z[p], z[q]), 2));
        }
    }
    return sigma / (static_cast<double>(x.rows()) * sep);
}

inline double i_index(const Matrix& x, const Grid& u, const std::vector<std::vector<double>>& z, double p) {
    std::vector<double> grand(x.cols(), 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t c = 0; c < x.cols(); ++c) {
            grand[c] += x(i, c) / static_cast<double>(x.rows());
        }
    }
    double e1 = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        e1 += dist(x, i, grand);
    }
    double ek = 0.0;
    for (std::size_t q = 0; q < z.size(); ++q) {
        for (std::size_t i = 0; i < x.rows(); ++i) {
            ek += u[q][i] * dist(x, i, z[q]);
        }
    }
    double dk = 0.0;
    for (std::size_t a = 0; a < z.size(); ++a) {
        for (std::size_t b = a + 1; b < z.size(); ++b) {
            dk = std::max(dk, dist(z[a], z[b]));
        }
    }
    return std::pow(e1 / ek * dk / static_cast<double>(z.size()), p);
}

inline double silhouette(const Matrix& x, const std::vector<int>& labels, int k) {
    double total = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        std::vector<double> sum(k, 0.0);
        std::vector<double> cnt(k, 0.0);
        for (std::size_t j = 0; j < x.rows(); ++j) {
            if (j != i) {
                sum[labels[j] - 1] += dist(x, i, j);
                cnt[labels[j] - 1] += 1.0;
            }
        }
        const int own = labels[i] - 1;
        if (cnt[own] == 0.0) {
            continue;
        }
        const double a = sum[own] / cnt[own];
        double b = std::numeric_limits<double>::infinity();
        for (int q = 0; q < k; ++q) {
            if (q != own && cnt[q] > 0.0) {
                b = std::min(b, sum[q] / cnt[q]);
            }
        }
        const double m = std::max(a, b);
        total += m == 0.0 ? 0.0 : (b - a) / m;
    }
    return total / static_cast<double>(x.rows());
}

inline double sse(const Matrix& x, const std::vector<int>& labels, int k) {
    const auto z = means(x, labels, k);
    double s = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        s += std::pow(dist(x, i, z[labels[i] - 1]), 2);
    }
    return s;
}

// Agglomeration ---------------------------------------------------------------------

enum class Method { Single, Complete, Average, Weighted, Centroid, Median, Ward };

struct Step {
    std::size_t first, second;
    double height;
    std::size_t size;
};

/// Recomputes every inter-cluster dissimilarity from the cluster contents at
/// each step. `points` is needed only for the geometric methods.
inline std::vector<Step> agglomerate(const Matrix& dist_matrix, const Matrix& points, Method method) {
    const std::size_t n = dist_matrix.rows();
    struct Node {
        std::vector<std::size_t> leaves;
        std::map<std::size_t, double> weight; // balanced-tree leaf weights
        std::vector<double> median;           // midpoint-of-children center
    };
    std::map<std::size_t, Node> active;
    for (std::size_t i = 0; i < n; ++i) {
        Node node{{i}, {{i, 1.0}}, {}};
        if (points.rows() == n) {
            node.median.assign(points.row(i).begin(), points.row(i).end());
        }
        active.emplace(i, node);
    }
    auto centroid = [&](const Node& node) {
        std::vector<double> c(points.cols(), 0.0);
        for (const auto l : node.leaves) {
            for (std::size_t q = 0; q < points.cols(); ++q) {
                c[q] += points(l, q) / static_cast<double>(node.leaves.size());
            }
        }
        return c;
    };
    auto measure = [&](const Node& a, const Node& b) {
        switch (method) {
        case Method::Single: {
            double v = std::numeric_limits<double>::infinity();
            for (auto i : a.leaves) {
                for (auto j : b.leaves) {
                    v = std::min(v, dist_matrix(i, j));
                }
            }
            return v;
        }
        case Method::Complete: {
            double v = 0.0;
            for (auto i : a.leaves) {
                for (auto j : b.leaves) {
                    v = std::max(v, dist_matrix(i, j));
                }
            }
            return v;
        }
        case Method::Average: {
            double v = 0.0;
            for (auto i : a.leaves) {
                for (auto j : b.leaves) {
                    v += dist_matrix(i, j);
                }
            }
            return v / static_cast<double>(a.leaves.size() * b.leaves.size());
        }
        case Method::Weighted: {
            double v = 0.0;
            for (const auto& [i, wi] : a.weight) {
                for (const auto& [j, wj] : b.weight) {
                    v += wi * wj * dist_matrix(i, j);
                }
            }
            return v;
        }
        case Method::Centroid:
            return dist(centroid(a), centroid(b));
        case Method::Median:
            return dist(a.median, b.median);
        case Method::Ward: {
            const double na = static_cast<double>(a.leaves.size());
            const double nb = static_cast<double>(b.leaves.size());
            return std::sqrt(2.0 * na * nb / (na + nb)) * dist(centroid(a), centroid(b));
        }
        }
        return 0.0;
    };

    std::vector<Step> steps;
    for (std::size_t s = 0; s + 1 < n; ++s) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 0;
        for (auto it = active.begin(); it != active.end(); ++it) {
            for (auto jt = std::next(it); jt != active.end(); ++jt) {
                const double v = measure(it->second, jt->second);
                if (v < best) {
                    best = v;
                    bi = it->first;
                    bj = jt->first;
                }
            }
        }
        Node merged;
        const Node& a = active.at(bi);
        const Node& b = active.at(bj);
        merged.leaves = a.leaves;
        merged.leaves.insert(merged.leaves.end(), b.leaves.begin(), b.leaves.end());
        for (const auto& [l, w] : a.weight) {
            merged.weight[l] = w / 2.0;
        }
        for (const auto& [l, w] : b.weight) {
            merged.weight[l] = w / 2.0;
        }
        if (!a.median.empty()) {
            merged.median.resize(a.median.size());
            for (std::size_t q = 0; q < a.median.size(); ++q) {
                merged.median[q] = (a.median[q] + b.median[q]) / 2.0;
            }
        }
        steps.push_back({bi, bj, best, merged.leaves.size()});
        active.erase(bi);
        active.erase(bj);
        active.emplace(n + s, std::move(merged));
    }
    return steps;
}

/// Sorted edge weights of a minimum spanning tree (Prim).
inline std::vector<double> mst_weights(const Matrix& d) {
    const std::size_t n = d.rows();
    std::vector<bool> in(n, false);
    std::vector<double> key(n, std::numeric_limits<double>::infinity());
    key[0] = 0.0;
    std::vector<double> edges;
    for (std::size_t it = 0; it < n; ++it) {
        std::size_t u = n;
        for (std::size_t v = 0; v < n; ++v) {
            if (!in[v] && (u == n || key[v] < key[u])) {
                u = v;
            }
        }
        in[u] = true;
        if (it > 0) {
            edges.push_back(key[u]);
        }
        for (std::size_t v = 0; v < n; ++v) {
            if (!in[v]) {
                key[v] = std::min(key[v], d(u, v));
            }
        }
    }
    std::sort(edges.begin(), edges.end());
    return edges;
}

// Multi-objective ------------------------------------------------------------------

inline bool dominates(const std::array<double, 2>& a, const std::array<double, 2>& b) {
    return a[0] <= b[0] && a[1] <= b[1] && (a[0] < b[0] || a[1] < b[1]);
}

/// Rank of each point by repeated peeling of the non-dominated set.
inline std::vector<int> ranks(const std::vector<std::array<double, 2>>& pts) {
    std::vector<int> rank(pts.size(), -1);
    std::size_t assigned = 0;
    for (int r = 0; assigned < pts.size(); ++r) {
        std::vector<std::size_t> layer;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (rank[i] != -1) {
                continue;
            }
            bool dominated = false;
            for (std::size_t j = 0; j < pts.size() && !dominated; ++j) {
                dominated = j != i && rank[j] == -1 && dominates(pts[j], pts[i]);
            }
            if (!dominated) {
                layer.push_back(i);
            }
        }
        for (auto i : layer) {
            rank[i] = r;
        }
        assigned += layer.size();
    }
    return rank;
}

/// Best relabeling of `labels` (values 1..k) onto `reference` by trying every
/// permutation; returns perm with perm[c - 1] = new label of cluster c.
inline std::vector<int> best_permutation(const std::vector<int>& reference, const std::vector<int>& labels, int k,
                                         std::size_t* overlap = nullptr) {
    std::vector<int> perm(k);
    std::iota(perm.begin(), perm.end(), 1);
    std::vector<int> best = perm;
    std::size_t best_overlap = 0;
    bool first = true;
    do {
        std::size_t o = 0;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            o += perm[labels[i] - 1] == reference[i];
        }
        if (first || o > best_overlap) {
            best_overlap = o;
            best = perm;
            first = false;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    if (overlap) {
        *overlap = best_overlap;
    }
    return best;
}

/// The training rule written out per point: plurality over all argmax votes
/// (unique maximum required), then the share of solutions voting for it with
/// max membership >= alpha must exceed beta.
inline std::vector<int> vote(const std::vector<Grid>& front, double alpha, double beta) {
    const std::size_t n = front.front().front().size();
    const std::size_t k = front.front().size();
    std::vector<int> out(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<int> votes(k, 0);
        std::vector<int> confident(k, 0);
        for (const auto& u : front) {
            std::size_t arg = 0;
            for (std::size_t q = 1; q < k; ++q) {
                if (u[q][i] > u[arg][i]) {
                    arg = q;
                }
            }
            ++votes[arg];
            if (u[arg][i] >= alpha) {
                ++confident[arg];
            }
        }
        const int top = *std::max_element(votes.begin(), votes.end());
        if (std::count(votes.begin(), votes.end(), top) != 1) {
            continue;
        }
        const auto winner = static_cast<std::size_t>(std::find(votes.begin(), votes.end(), top) - votes.begin());
        if (static_cast<double>(confident[winner]) / static_cast<double>(front.size()) > beta) {
            out[i] = static_cast<int>(winner) + 1;
        }
    }
    return out;
}

} // namespace oracle
