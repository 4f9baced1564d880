#include <doctest.h>

#include <algorithm>
#include <set>

#include "genclust/error.hpp"
#include "genclust/moc.hpp"
#include "genclust/partitional.hpp"
#include "genclust/validity.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace genclust;

namespace {

const Matrix kLine{{0}, {1}, {10}, {11}};

/// Membership from the Bezdek update written out directly.
oracle::Grid memberships(const Matrix& x, const Matrix& z, double m) {
    oracle::Grid u(z.rows(), std::vector<double>(x.rows()));
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t k = 0; k < z.rows(); ++k) {
            const double dk = squared_euclidean(x.row(i), z.row(k));
            double s = 0.0;
            for (std::size_t l = 0; l < z.rows(); ++l) {
                s += std::pow(dk / squared_euclidean(x.row(i), z.row(l)), 1.0 / (m - 1.0));
            }
            u[k][i] = 1.0 / s;
        }
    }
    return u;
}

std::vector<std::vector<double>> rows_of(const Matrix& m) {
    std::vector<std::vector<double>> out;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        out.emplace_back(m.row(r).begin(), m.row(r).end());
    }
    return out;
}

FrontSolution solution(const oracle::Grid& u) {
    MembershipMatrix mm{Matrix(u.size(), u.front().size()), 2.0};
    for (std::size_t k = 0; k < u.size(); ++k) {
        for (std::size_t i = 0; i < u[k].size(); ++i) {
            mm.u(k, i) = u[k][i];
        }
    }
    return FrontSolution{Chromosome{Matrix(u.size(), 1), {}}, mm};
}

oracle::Grid random_grid(Rng& rng, std::size_t k, std::size_t n) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    oracle::Grid u(k, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            u[c][i] = std::pow(unit(rng), 3.0);
            s += u[c][i];
        }
        for (std::size_t c = 0; c < k; ++c) {
            u[c][i] /= s;
        }
    }
    return u;
}

std::vector<int> argmax_of(const MembershipMatrix& u) {
    return argmax_labels(u);
}

bool same_grouping(const std::vector<int>& a, const std::vector<int>& b) {
    return adjusted_rand(a, b) == 1.0;
}

} // namespace

TEST_CASE("chromosome evaluation matches the written-out objectives") {
    const Matrix centers{{0.5}, {10.5}};
    const auto ev = evaluate_chromosome(kLine, centers, 2.0);
    const auto u = memberships(kLine, centers, 2.0);
    CHECK(ev.objectives[0] == doctest::Approx(oracle::j_index(kLine, u, rows_of(centers), 2.0)).epsilon(1e-12));
    CHECK(ev.objectives[1] == doctest::Approx(oracle::xb_index(kLine, u, rows_of(centers))).epsilon(1e-12));
    // memberships are within 0.003 of crisp here, so XB sits next to 1/400
    CHECK(std::abs(ev.objectives[1] - 0.0025) < 1e-4);

    Rng rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        const auto x = support::random_matrix(rng, 12, 3);
        const auto z = support::random_matrix(rng, 3, 3);
        const double m = 1.5 + 0.5 * (trial % 3);
        const auto e = evaluate_chromosome(x, z, m);
        const auto g = memberships(x, z, m);
        CHECK(support::rel_close(e.objectives[0], oracle::j_index(x, g, rows_of(z), m), 1e-9));
        CHECK(support::rel_close(e.objectives[1], oracle::xb_index(x, g, rows_of(z)), 1e-9));
    }

    const auto exact = evaluate_chromosome(kLine, kLine, 2.0);
    CHECK(exact.objectives[0] == 0.0);
    CHECK_THROWS_AS(evaluate_chromosome(kLine, Matrix{{3}, {3}}, 2.0), DegenerateError);
}

TEST_CASE("non-dominated sorting matches the pairwise oracle") {
    const std::vector<Objectives> fixed{{1, 5}, {2, 3}, {4, 1}, {3, 4}, {5, 5}, {2, 3}};
    const auto fronts = nondominated_sort(fixed);
    REQUIRE(fronts.size() == 3);
    CHECK(fronts[0] == std::vector<std::size_t>{0, 1, 2, 5});
    CHECK(fronts[1] == std::vector<std::size_t>{3});
    CHECK(fronts[2] == std::vector<std::size_t>{4});

    Rng rng(12);
    std::uniform_int_distribution<int> coord(0, 9);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<Objectives> pts(5 + trial % 30);
        std::vector<std::array<double, 2>> raw;
        for (auto& p : pts) {
            p = {static_cast<double>(coord(rng)), static_cast<double>(coord(rng))};
            raw.push_back(p);
        }
        const auto want = oracle::ranks(raw);
        const auto got = nondominated_sort(pts);
        std::vector<int> rank(pts.size(), -1);
        for (std::size_t r = 0; r < got.size(); ++r) {
            CHECK(std::is_sorted(got[r].begin(), got[r].end()));
            for (auto i : got[r]) {
                rank[i] = static_cast<int>(r);
            }
        }
        CHECK(rank == want);
    }
}

TEST_CASE("crowding distance") {
    const std::vector<Objectives> pts{{1, 5}, {2, 3}, {4, 1}};
    const std::vector<std::size_t> front{0, 1, 2};
    const auto cd = crowding_distance(pts, front);
    CHECK(std::isinf(cd[0]));
    CHECK(std::isinf(cd[2]));
    CHECK(cd[1] == doctest::Approx(3.0 / 3.0 + 4.0 / 4.0));
}

TEST_CASE("nsga-ii fronts are non-dominated and reproducible") {
    const auto b = support::gaussian_blobs(60, 5.0, 7);
    GaConfig cfg;
    cfg.population_size = 20;
    cfg.generations = 15;
    cfg.seed = 3;
    const auto f1 = nsga2_run(b.points, 3, cfg);
    const auto f2 = nsga2_run(b.points, 3, cfg);
    REQUIRE(!f1.solutions.empty());
    REQUIRE(f1.solutions.size() == f2.solutions.size());
    std::set<std::pair<double, double>> seen;
    for (std::size_t i = 0; i < f1.solutions.size(); ++i) {
        const auto& a = f1.solutions[i].chromosome;
        CHECK(a.centers == f2.solutions[i].chromosome.centers);
        CHECK(a.objectives == f2.solutions[i].chromosome.objectives);
        CHECK(a.centers.rows() == 3);
        CHECK(seen.insert({a.objectives[0], a.objectives[1]}).second);
        for (const auto& other : f1.solutions) {
            CHECK_FALSE(oracle::dominates(other.chromosome.objectives, a.objectives));
        }
    }
    cfg.population_size = 1;
    CHECK_THROWS_AS(nsga2_run(b.points, 3, cfg), Error);
}

TEST_CASE("optimal assignment agrees with permutation search") {
    Rng rng(31);
    for (int trial = 0; trial < 60; ++trial) {
        const int k = 2 + trial % 3;
        const auto ref = support::random_labels(rng, 6 + trial % 5, k);
        const auto other = support::random_labels(rng, ref.size(), k);
        std::vector<std::vector<std::size_t>> table(k, std::vector<std::size_t>(k, 0));
        for (std::size_t i = 0; i < ref.size(); ++i) {
            ++table[ref[i] - 1][other[i] - 1];
        }
        const auto assign = max_overlap_assignment(table);
        std::size_t got = 0;
        for (int c = 0; c < k; ++c) {
            got += table[assign[c]][c];
        }
        std::size_t best = 0;
        oracle::best_permutation(ref, other, k, &best);
        CHECK(got == best);
        std::vector<std::size_t> sorted = assign;
        std::sort(sorted.begin(), sorted.end());
        for (int c = 0; c < k; ++c) {
            CHECK(sorted[c] == static_cast<std::size_t>(c));
        }
    }
}

TEST_CASE("label alignment") {
    const oracle::Grid a{{0.9, 0.8, 0.1, 0.2, 0.3}, {0.1, 0.2, 0.9, 0.8, 0.7}};
    const oracle::Grid flipped{a[1], a[0]};
    ParetoFront front{{solution(a), solution(flipped)}};
    const auto aligned = align_labels(front);
    CHECK(argmax_of(aligned.solutions[1].membership) == argmax_of(aligned.solutions[0].membership));
    CHECK(argmax_of(aligned.solutions[1].membership) == std::vector<int>{1, 1, 2, 2, 2});

    Rng rng(8);
    for (int trial = 0; trial < 30; ++trial) {
        ParetoFront f;
        for (int s = 0; s < 3; ++s) {
            f.solutions.push_back(solution(random_grid(rng, 3, 9)));
        }
        const auto out = align_labels(f);
        const auto ref = argmax_of(out.solutions[0].membership);
        CHECK(ref == argmax_of(f.solutions[0].membership));
        for (std::size_t s = 0; s < 3; ++s) {
            const auto before = argmax_of(f.solutions[s].membership);
            const auto after = argmax_of(out.solutions[s].membership);
            // structure kept
            for (std::size_t i = 0; i < before.size(); ++i) {
                for (std::size_t j = 0; j < before.size(); ++j) {
                    CHECK((before[i] == before[j]) == (after[i] == after[j]));
                }
            }
            std::size_t best = 0;
            oracle::best_permutation(ref, before, 3, &best);
            std::size_t got = 0;
            for (std::size_t i = 0; i < ref.size(); ++i) {
                got += after[i] == ref[i];
            }
            CHECK(got == best);
        }
    }
}

TEST_CASE("voting by hand") {
    // point 4 (0-based) votes cluster 2 twice with 0.8 and 0.7, cluster 1 once
    oracle::Grid s1{{0.9, 0.9, 0.1, 0.2, 0.2}, {0.1, 0.1, 0.9, 0.8, 0.8}};
    oracle::Grid s2{{0.9, 0.6, 0.2, 0.1, 0.3}, {0.1, 0.4, 0.8, 0.9, 0.7}};
    oracle::Grid s3{{0.8, 0.4, 0.3, 0.4, 0.6}, {0.2, 0.6, 0.7, 0.6, 0.4}};
    ParetoFront front{{solution(s1), solution(s2), solution(s3)}};
    const auto v = fuzzy_majority_vote(front, 0.5, 0.5);
    CHECK(v.labels[4] == 2);
    CHECK(v.mask[4]);
    CHECK(v.labels == oracle::vote({s1, s2, s3}, 0.5, 0.5));
    CHECK(v.labels == std::vector<int>{1, 1, 2, 2, 2});
    CHECK(v.covers_all_clusters);

    const auto strict = fuzzy_majority_vote(front, 0.85, 0.5);
    CHECK(strict.labels == oracle::vote({s1, s2, s3}, 0.85, 0.5));
    CHECK(strict.labels == std::vector<int>{1, 0, 0, 0, 0});

    const auto single = fuzzy_majority_vote(ParetoFront{{solution(s3)}}, 0.0, 0.0);
    CHECK(single.training_size == 5);

    oracle::Grid tie1{{0.9}, {0.1}};
    oracle::Grid tie2{{0.1}, {0.9}};
    CHECK(fuzzy_majority_vote(ParetoFront{{solution(tie1), solution(tie2)}}, 0.0, 0.0).training_size == 0);

    oracle::Grid exact{{1.0, 0.9}, {0.0, 0.1}};
    const auto boundary = fuzzy_majority_vote(ParetoFront{{solution(exact)}}, 1.0, 0.0);
    CHECK(boundary.mask == std::vector<bool>{true, false});
}

TEST_CASE("voting agrees with the rule oracle and shrinks with the thresholds") {
    Rng rng(19);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<oracle::Grid> grids;
        ParetoFront front;
        for (int s = 0; s < 1 + trial % 5; ++s) {
            grids.push_back(random_grid(rng, 3, 15));
            front.solutions.push_back(solution(grids.back()));
        }
        const double alpha = unit(rng);
        const double beta = unit(rng);
        CHECK(fuzzy_majority_vote(front, alpha, beta).labels == oracle::vote(grids, alpha, beta));

        std::size_t prev = front.solutions.front().membership.points() + 1;
        for (double a = 0.0; a <= 1.0; a += 0.05) {
            const auto size = fuzzy_majority_vote(front, a, 0.3).training_size;
            CHECK(size <= prev);
            prev = size;
        }
        prev = front.solutions.front().membership.points() + 1;
        for (double b = 0.0; b <= 1.0; b += 0.05) {
            const auto size = fuzzy_majority_vote(front, 0.4, b).training_size;
            CHECK(size <= prev);
            prev = size;
        }
    }
}

TEST_CASE("classifier") {
    const auto b = support::gaussian_blobs(80, 8.0, 2);
    std::vector<bool> mask(80);
    std::vector<int> train(80, 0);
    for (std::size_t i = 0; i < 80; ++i) {
        mask[i] = i % 3 != 0;
        if (mask[i]) {
            train[i] = b.labels[i];
        }
    }
    const auto p = train_and_classify(b.points, train, mask, 1.0, 50, 7);
    // nearest training centroid for every held-out point
    std::vector<int> tl;
    for (std::size_t i = 0; i < 80; ++i) {
        tl.push_back(mask[i] ? b.labels[i] : 0);
    }
    std::vector<std::array<double, 3>> sums(4, {0, 0, 0});
    for (std::size_t i = 0; i < 80; ++i) {
        if (mask[i]) {
            sums[tl[i] - 1][0] += b.points(i, 0);
            sums[tl[i] - 1][1] += b.points(i, 1);
            sums[tl[i] - 1][2] += 1;
        }
    }
    std::vector<int> nearest(80);
    for (std::size_t i = 0; i < 80; ++i) {
        double best = 1e300;
        for (int c = 0; c < 4; ++c) {
            const double dx = b.points(i, 0) - sums[c][0] / sums[c][2];
            const double dy = b.points(i, 1) - sums[c][1] / sums[c][2];
            if (dx * dx + dy * dy < best) {
                best = dx * dx + dy * dy;
                nearest[i] = c + 1;
            }
        }
    }
    CHECK(nearest == b.labels);
    CHECK(same_grouping(p.labels, nearest));

    std::vector<bool> all(4, true);
    const auto same = train_and_classify(kLine, std::vector<int>{2, 2, 1, 1}, all, 1.0);
    CHECK(same_grouping(same.labels, {2, 2, 1, 1}));

    const auto again = train_and_classify(b.points, train, mask, 1.0, 50, 7);
    CHECK(again.labels == p.labels);
    CHECK_THROWS_AS(train_and_classify(kLine, std::vector<int>{1, 1, 0, 0}, std::vector<bool>{true, true, false, false},
                                       1.0),
                    Error);
}

TEST_CASE("mocsvm recovers separated blobs deterministically") {
    const auto b = support::gaussian_blobs(200, 8.0, 2024);
    GaConfig cfg;
    cfg.population_size = 30;
    cfg.generations = 30;
    cfg.seed = 11;
    const auto r1 = mocsvm_run(b.points, 4, cfg);
    const auto r2 = mocsvm_run(b.points, 4, cfg);
    CHECK(r1.partition.labels == r2.partition.labels);
    CHECK(adjusted_rand(b.labels, r1.partition.labels) >= 0.95);
    if (!r1.fallback) {
        CHECK(r1.partition.k == 4);
    }
}

TEST_CASE("single-solution front collapses to its argmax partition") {
    const auto b = support::gaussian_blobs(40, 8.0, 6);
    const auto fc = fcm_run(b.points, RunConfig{2, 100, 1e-9, 1});
    ParetoFront front;
    front.solutions.push_back(FrontSolution{Chromosome{fc.centers, {}}, fc.membership});
    GaConfig cfg;
    const auto r = consensus_partition(b.points, front, cfg);
    CHECK_FALSE(r.fallback);
    CHECK(r.training_size == 40);
    CHECK(same_grouping(r.partition.labels, argmax_labels(fc.membership)));
}
