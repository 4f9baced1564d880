#include "genclust/moc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "genclust/partitional.hpp"
#include "genclust/random.hpp"
#include "genclust/validity.hpp"

namespace genclust {

void GaConfig::validate() const {
    if (population_size < 4 || population_size % 2 != 0) {
        throw Error("population_size must be an even integer >= 4");
    }
    if (generations < 1) {
        throw Error("generations must be positive");
    }
    auto prob = [](double v, const char* name) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw Error(std::string(name) + " must lie in [0, 1]");
        }
    };
    prob(p_crossover, "p_crossover");
    prob(p_mutation, "p_mutation");
    prob(alpha, "alpha");
    prob(beta, "beta");
    if (!(svm_weight > 0.0) || !std::isfinite(svm_weight)) {
        throw Error("svm_weight must be positive");
    }
    if (!(fuzzifier > 1.0) || !std::isfinite(fuzzifier)) {
        throw Error("fuzzifier m must be greater than 1");
    }
    if (svm_epochs < 1) {
        throw Error("svm_epochs must be positive");
    }
}

ChromosomeEvaluation evaluate_chromosome(const Matrix& data, const Matrix& centers, double m) {
    if (centers.rows() < 2) {
        throw Error("chromosome needs at least 2 centers");
    }
    for (std::size_t a = 0; a < centers.rows(); ++a) {
        for (std::size_t b = a + 1; b < centers.rows(); ++b) {
            if (std::sqrt(squared_euclidean(centers.row(a), centers.row(b))) < 1e-12) {
                throw DegenerateError("chromosome has coincident centers");
            }
        }
    }
    ChromosomeEvaluation out;
    out.membership = fcm_memberships(data, centers, m);
    out.objectives = {j_index(data, out.membership, centers), xb_index(data, out.membership, centers)};
    return out;
}

bool dominates(const Objectives& a, const Objectives& b) noexcept {
    bool strict = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] > b[i]) {
            return false;
        }
        strict = strict || a[i] < b[i];
    }
    return strict;
}

std::vector<std::vector<std::size_t>> nondominated_sort(std::span<const Objectives> points) {
    const std::size_t n = points.size();
    std::vector<std::vector<std::size_t>> dominated_by(n);
    std::vector<std::size_t> count(n, 0);
    std::vector<std::vector<std::size_t>> fronts(1);
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = 0; q < n; ++q) {
            if (dominates(points[p], points[q])) {
                dominated_by[p].push_back(q);
            } else if (dominates(points[q], points[p])) {
                ++count[p];
            }
        }
        if (count[p] == 0) {
            fronts[0].push_back(p);
        }
    }
    while (!fronts.back().empty()) {
        std::vector<std::size_t> next;
        for (const auto p : fronts.back()) {
            for (const auto q : dominated_by[p]) {
                if (--count[q] == 0) {
                    next.push_back(q);
                }
            }
        }
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(next));
    }
    fronts.pop_back();
    return fronts;
}

std::vector<double> crowding_distance(std::span<const Objectives> points, std::span<const std::size_t> front) {
    const std::size_t n = front.size();
    std::vector<double> dist(n, 0.0);
    if (n <= 2) {
        std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
        return dist;
    }
    std::vector<std::size_t> order(n);
    for (std::size_t obj = 0; obj < std::tuple_size_v<Objectives>; ++obj) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return points[front[a]][obj] < points[front[b]][obj];
        });
        const double lo = points[front[order.front()]][obj];
        const double hi = points[front[order.back()]][obj];
        dist[order.front()] = std::numeric_limits<double>::infinity();
        dist[order.back()] = std::numeric_limits<double>::infinity();
        if (!(hi > lo)) {
            continue;
        }
        for (std::size_t i = 1; i + 1 < n; ++i) {
            dist[order[i]] += (points[front[order[i + 1]]][obj] - points[front[order[i - 1]]][obj]) / (hi - lo);
        }
    }
    return dist;
}

namespace {

struct Individual {
    Matrix centers;
    Objectives objectives{};
    MembershipMatrix membership;
};

struct Ranking {
    std::vector<std::size_t> rank;
    std::vector<double> crowding;
};

Ranking rank_population(std::span<const Objectives> objectives) {
    Ranking r{std::vector<std::size_t>(objectives.size()), std::vector<double>(objectives.size())};
    const auto fronts = nondominated_sort(objectives);
    for (std::size_t f = 0; f < fronts.size(); ++f) {
        const auto cd = crowding_distance(objectives, fronts[f]);
        for (std::size_t i = 0; i < fronts[f].size(); ++i) {
            r.rank[fronts[f][i]] = f;
            r.crowding[fronts[f][i]] = cd[i];
        }
    }
    return r;
}

std::vector<Objectives> objectives_of(const std::vector<Individual>& pop) {
    std::vector<Objectives> out;
    out.reserve(pop.size());
    for (const auto& ind : pop) {
        out.push_back(ind.objectives);
    }
    return out;
}

bool evaluate_into(const Matrix& data, Individual& ind, double m) {
    try {
        auto ev = evaluate_chromosome(data, ind.centers, m);
        ind.objectives = ev.objectives;
        ind.membership = std::move(ev.membership);
        return true;
    } catch (const DegenerateError&) {
        return false;
    }
}

} // namespace

ParetoFront nsga2_run(const Matrix& data, int k, const GaConfig& cfg) {
    cfg.validate();
    if (k < 2 || static_cast<std::size_t>(k) > data.rows()) {
        throw Error("k = " + std::to_string(k) + " out of range 2.." + std::to_string(data.rows()));
    }
    const std::size_t pop_size = static_cast<std::size_t>(cfg.population_size);
    const std::size_t d = data.cols();
    const std::size_t genes = static_cast<std::size_t>(k) * d;

    std::vector<double> sigma(d);
    for (std::size_t t = 0; t < d; ++t) {
        double lo = data(0, t), hi = data(0, t);
        for (std::size_t i = 1; i < data.rows(); ++i) {
            lo = std::min(lo, data(i, t));
            hi = std::max(hi, data(i, t));
        }
        sigma[t] = 0.1 * (hi - lo);
    }

    Rng rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<Individual> pop(pop_size);
    for (auto& ind : pop) {
        bool ok = false;
        for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
            const auto idx = sample_distinct(rng, data.rows(), static_cast<std::size_t>(k));
            ind.centers = Matrix(static_cast<std::size_t>(k), d);
            for (std::size_t c = 0; c < idx.size(); ++c) {
                std::ranges::copy(data.row(idx[c]), ind.centers.row(c).begin());
            }
            ok = evaluate_into(data, ind, cfg.fuzzifier);
        }
        if (!ok) {
            throw Error("nsga2: cannot draw " + std::to_string(k) + " distinct centers from the data");
        }
    }

    auto objectives = objectives_of(pop);
    Ranking ranking = rank_population(objectives);

    for (int gen = 0; gen < cfg.generations; ++gen) {
        std::uniform_int_distribution<std::size_t> pick(0, pop_size - 1);
        auto tournament = [&]() {
            const std::size_t a = pick(rng);
            const std::size_t b = pick(rng);
            if (ranking.rank[a] != ranking.rank[b]) {
                return ranking.rank[a] < ranking.rank[b] ? a : b;
            }
            return ranking.crowding[b] > ranking.crowding[a] ? b : a;
        };

        // All random draws for the generation happen here, before any
        // evaluation, so evaluation order cannot affect the stream.
        std::vector<Individual> children(pop_size);
        std::vector<std::size_t> parent_of(pop_size);
        for (std::size_t i = 0; i < pop_size; i += 2) {
            const std::size_t p1 = tournament();
            const std::size_t p2 = tournament();
            Matrix c1 = pop[p1].centers;
            Matrix c2 = pop[p2].centers;
            if (unit(rng) < cfg.p_crossover && genes > 1) {
                std::uniform_int_distribution<std::size_t> cut_dist(1, genes - 1);
                const std::size_t cut = cut_dist(rng);
                auto v1 = c1.values();
                auto v2 = c2.values();
                std::swap_ranges(v1.begin() + static_cast<std::ptrdiff_t>(cut), v1.end(),
                                 v2.begin() + static_cast<std::ptrdiff_t>(cut));
            }
            for (Matrix* c : {&c1, &c2}) {
                auto v = c->values();
                for (std::size_t g = 0; g < genes; ++g) {
                    if (unit(rng) < cfg.p_mutation) {
                        v[g] += sigma[g % d] * gauss(rng);
                    }
                }
            }
            children[i].centers = std::move(c1);
            children[i + 1].centers = std::move(c2);
            parent_of[i] = p1;
            parent_of[i + 1] = p2;
        }
        for (std::size_t i = 0; i < pop_size; ++i) {
            if (!evaluate_into(data, children[i], cfg.fuzzifier)) {
                children[i] = pop[parent_of[i]];
            }
        }

        std::vector<Individual> merged = std::move(pop);
        merged.insert(merged.end(), std::make_move_iterator(children.begin()),
                      std::make_move_iterator(children.end()));
        const auto merged_obj = objectives_of(merged);
        const auto fronts = nondominated_sort(merged_obj);

        std::vector<std::size_t> survivors;
        survivors.reserve(pop_size);
        for (const auto& front : fronts) {
            if (survivors.size() + front.size() <= pop_size) {
                survivors.insert(survivors.end(), front.begin(), front.end());
                continue;
            }
            const auto cd = crowding_distance(merged_obj, front);
            std::vector<std::size_t> order(front.size());
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return cd[a] > cd[b]; });
            for (std::size_t i = 0; survivors.size() < pop_size; ++i) {
                survivors.push_back(front[order[i]]);
            }
            break;
        }
        pop.clear();
        for (const auto s : survivors) {
            pop.push_back(std::move(merged[s]));
        }
        objectives = objectives_of(pop);
        ranking = rank_population(objectives);
    }

    ParetoFront front;
    const auto fronts = nondominated_sort(objectives);
    for (const auto i : fronts.front()) {
        const bool duplicate = std::any_of(front.solutions.begin(), front.solutions.end(), [&](const auto& s) {
            return s.chromosome.objectives == pop[i].objectives;
        });
        if (!duplicate) {
            front.solutions.push_back({Chromosome{pop[i].centers, pop[i].objectives}, pop[i].membership});
        }
    }
    return front;
}

std::vector<std::size_t> max_overlap_assignment(const std::vector<std::vector<std::size_t>>& table) {
    const std::size_t n = table.size();
    for (const auto& row : table) {
        if (row.size() != n) {
            throw Error("assignment: table must be square");
        }
    }
    if (n == 0) {
        return {};
    }
    std::size_t top = 0;
    for (const auto& row : table) {
        top = std::max(top, *std::max_element(row.begin(), row.end()));
    }
    // Hungarian method on cost[c][r] = top - table[r][c], 1-based.
    using Cost = long long;
    const Cost inf = std::numeric_limits<Cost>::max() / 4;
    auto cost = [&](std::size_t c, std::size_t r) {
        return static_cast<Cost>(top) - static_cast<Cost>(table[r - 1][c - 1]);
    };
    std::vector<Cost> u(n + 1, 0), v(n + 1, 0);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<Cost> minv(n + 1, inf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const std::size_t i0 = p[j0];
            Cost delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) {
                    continue;
                }
                const Cost cur = cost(i0, j) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> assignment(n);
    for (std::size_t j = 1; j <= n; ++j) {
        assignment[p[j] - 1] = j - 1;
    }
    return assignment;
}

ParetoFront align_labels(ParetoFront front) {
    if (front.solutions.size() < 2) {
        return front;
    }
    const auto k = front.solutions.front().membership.clusters();
    const auto reference = argmax_labels(front.solutions.front().membership);
    for (std::size_t s = 1; s < front.solutions.size(); ++s) {
        auto& sol = front.solutions[s];
        if (sol.membership.clusters() != k) {
            throw Error("align_labels: solutions have different cluster counts");
        }
        const auto labels = argmax_labels(sol.membership);
        std::vector<std::vector<std::size_t>> table(k, std::vector<std::size_t>(k, 0));
        for (std::size_t i = 0; i < labels.size(); ++i) {
            ++table[static_cast<std::size_t>(reference[i] - 1)][static_cast<std::size_t>(labels[i] - 1)];
        }
        const auto assign = max_overlap_assignment(table);
        MembershipMatrix u{Matrix(k, sol.membership.points()), sol.membership.m};
        Matrix centers(k, sol.chromosome.centers.cols());
        for (std::size_t c = 0; c < k; ++c) {
            for (std::size_t j = 0; j < u.points(); ++j) {
                u.u(assign[c], j) = sol.membership.u(c, j);
            }
            std::ranges::copy(sol.chromosome.centers.row(c), centers.row(assign[c]).begin());
        }
        sol.membership = std::move(u);
        sol.chromosome.centers = std::move(centers);
    }
    return front;
}

VoteResult fuzzy_majority_vote(const ParetoFront& front, double alpha, double beta) {
    if (front.solutions.empty()) {
        throw Error("fuzzy_majority_vote: empty front");
    }
    const std::size_t k = front.solutions.front().membership.clusters();
    const std::size_t n = front.solutions.front().membership.points();
    const double total = static_cast<double>(front.solutions.size());

    std::vector<std::vector<int>> argmax;
    argmax.reserve(front.solutions.size());
    for (const auto& s : front.solutions) {
        argmax.push_back(argmax_labels(s.membership));
    }

    VoteResult out{std::vector<int>(n, 0), std::vector<bool>(n, false), 0, false};
    std::vector<bool> seen(k, false);
    std::vector<std::size_t> votes(k);
    for (std::size_t i = 0; i < n; ++i) {
        std::fill(votes.begin(), votes.end(), 0);
        for (const auto& labels : argmax) {
            ++votes[static_cast<std::size_t>(labels[i] - 1)];
        }
        const auto top = std::max_element(votes.begin(), votes.end());
        if (std::count(votes.begin(), votes.end(), *top) > 1) {
            continue;
        }
        const auto plurality = static_cast<std::size_t>(top - votes.begin());
        std::size_t confident = 0;
        for (std::size_t s = 0; s < argmax.size(); ++s) {
            if (static_cast<std::size_t>(argmax[s][i] - 1) == plurality &&
                front.solutions[s].membership.u(plurality, i) >= alpha) {
                ++confident;
            }
        }
        if (static_cast<double>(confident) / total > beta) {
            out.labels[i] = static_cast<int>(plurality) + 1;
            out.mask[i] = true;
            ++out.training_size;
            seen[plurality] = true;
        }
    }
    out.covers_all_clusters = std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
    return out;
}

void LinearSvm::fit(const Matrix& x, std::span<const int> y, double weight, int epochs, std::uint64_t seed) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    if (y.size() != n || n == 0) {
        throw Error("svm: label count does not match sample count");
    }
    classes_.assign(y.begin(), y.end());
    std::sort(classes_.begin(), classes_.end());
    classes_.erase(std::unique(classes_.begin(), classes_.end()), classes_.end());
    if (classes_.size() < 2) {
        throw Error("svm: training set has a single class");
    }

    mean_.assign(d, 0.0);
    scale_.assign(d, 1.0);
    for (std::size_t t = 0; t < d; ++t) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            s += x(i, t);
        }
        mean_[t] = s / static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            ss += (x(i, t) - mean_[t]) * (x(i, t) - mean_[t]);
        }
        const double sd = std::sqrt(ss / static_cast<double>(n));
        scale_[t] = sd > 0.0 ? 1.0 / sd : 1.0;
    }
    Matrix z(n, d + 1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t t = 0; t < d; ++t) {
            z(i, t) = (x(i, t) - mean_[t]) * scale_[t];
        }
        z(i, d) = 1.0;
    }

    const double lambda = 1.0 / (weight * static_cast<double>(n));
    const double radius = 1.0 / std::sqrt(lambda);
    w_ = Matrix(classes_.size(), d + 1, 0.0);
    Rng rng(seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t c = 0; c < classes_.size(); ++c) {
        auto w = w_.row(c);
        std::size_t step = 0;
        for (int e = 0; e < epochs; ++e) {
            std::shuffle(order.begin(), order.end(), rng);
            for (const auto i : order) {
                ++step;
                const double eta = 1.0 / (lambda * static_cast<double>(step));
                const double target = y[i] == classes_[c] ? 1.0 : -1.0;
                const auto zi = z.row(i);
                double score = 0.0;
                for (std::size_t t = 0; t <= d; ++t) {
                    score += w[t] * zi[t];
                }
                const double shrink = 1.0 - eta * lambda;
                for (std::size_t t = 0; t <= d; ++t) {
                    w[t] *= shrink;
                }
                if (target * score < 1.0) {
                    for (std::size_t t = 0; t <= d; ++t) {
                        w[t] += eta * target * zi[t];
                    }
                }
                double norm = 0.0;
                for (const double v : w) {
                    norm += v * v;
                }
                norm = std::sqrt(norm);
                if (norm > radius) {
                    for (auto& v : w) {
                        v *= radius / norm;
                    }
                }
            }
        }
    }
}

int LinearSvm::predict(std::span<const double> x) const {
    const std::size_t d = mean_.size();
    if (x.size() != d) {
        throw Error("svm: feature dimension mismatch");
    }
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < classes_.size(); ++c) {
        const auto w = w_.row(c);
        double s = w[d];
        for (std::size_t t = 0; t < d; ++t) {
            s += w[t] * (x[t] - mean_[t]) * scale_[t];
        }
        if (s > best_score) {
            best_score = s;
            best = c;
        }
    }
    return classes_[best];
}

Partition train_and_classify(const Matrix& data, std::span<const int> train_labels,
                             const std::vector<bool>& train_mask, double svm_weight, int epochs,
                             std::uint64_t seed) {
    const std::size_t n = data.rows();
    if (train_labels.size() != n || train_mask.size() != n) {
        throw Error("train_and_classify: label/mask length does not match data");
    }
    std::vector<std::size_t> train;
    for (std::size_t i = 0; i < n; ++i) {
        if (train_mask[i]) {
            train.push_back(i);
        }
    }
    if (train.empty()) {
        throw Error("train_and_classify: empty training set");
    }
    std::vector<int> labels(n, 0);
    for (const auto i : train) {
        labels[i] = train_labels[i];
    }
    if (train.size() < n) {
        Matrix x(train.size(), data.cols());
        std::vector<int> y;
        for (std::size_t r = 0; r < train.size(); ++r) {
            std::ranges::copy(data.row(train[r]), x.row(r).begin());
            y.push_back(train_labels[train[r]]);
        }
        LinearSvm svm;
        svm.fit(x, y, svm_weight, epochs, seed);
        for (std::size_t i = 0; i < n; ++i) {
            if (!train_mask[i]) {
                labels[i] = svm.predict(data.row(i));
            }
        }
    } else {
        std::vector<int> distinct(labels.begin(), labels.end());
        std::sort(distinct.begin(), distinct.end());
        if (std::unique(distinct.begin(), distinct.end()) - distinct.begin() < 2) {
            throw Error("train_and_classify: training set has a single class");
        }
    }
    const int k = *std::max_element(labels.begin(), labels.end());
    relabel_by_first_appearance(labels, k);
    return make_partition(std::move(labels));
}

namespace {

Partition argmax_partition(const MembershipMatrix& u) {
    auto labels = argmax_labels(u);
    relabel_by_first_appearance(labels, static_cast<int>(u.clusters()));
    return make_partition(std::move(labels));
}

} // namespace

MocResult consensus_partition(const Matrix& data, ParetoFront front, const GaConfig& cfg) {
    if (front.solutions.empty()) {
        throw Error("consensus: empty front");
    }
    MocResult result;
    result.front = align_labels(std::move(front));
    const auto vote = fuzzy_majority_vote(result.front, cfg.alpha, cfg.beta);
    result.training_size = vote.training_size;

    std::string reason;
    if (vote.training_size == 0) {
        reason = "empty training set";
    } else if (!vote.covers_all_clusters) {
        reason = "training set misses a cluster";
    } else {
        try {
            result.partition = train_and_classify(data, vote.labels, vote.mask, cfg.svm_weight, cfg.svm_epochs,
                                                  mix64(cfg.seed ^ 0x5356u));
            return result;
        } catch (const Error& e) {
            reason = e.what();
        }
    }
    const auto& sols = result.front.solutions;
    std::size_t best = 0;
    for (std::size_t s = 1; s < sols.size(); ++s) {
        if (sols[s].chromosome.objectives[1] < sols[best].chromosome.objectives[1]) {
            best = s;
        }
    }
    result.partition = argmax_partition(sols[best].membership);
    result.fallback = true;
    result.fallback_reason = reason;
    return result;
}

MocResult mocsvm_run(const Matrix& data, int k, const GaConfig& cfg) {
    return consensus_partition(data, nsga2_run(data, k, cfg), cfg);
}

} // namespace genclust
