#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "genclust/matrix.hpp"
#include "genclust/partition.hpp"

namespace genclust {

struct GaConfig {
    int population_size = 50;
    int generations = 100;
    double p_crossover = 0.8;
    double p_mutation = 0.01;
    double alpha = 0.5;      ///< membership threshold for voting
    double beta = 0.5;       ///< vote-fraction threshold
    double svm_weight = 1.0; ///< soft-margin C; the hinge-loss sum is scaled by it
    double fuzzifier = 2.0;
    int svm_epochs = 50;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Objective pair, both minimized: {J_m, XB}.
using Objectives = std::array<double, 2>;

struct Chromosome {
    Matrix centers; ///< k x d
    Objectives objectives{};
};

struct ChromosomeEvaluation {
    Objectives objectives{};
    MembershipMatrix membership;
};

/// Memberships from one FCM update at the chromosome's centers, then J_m
/// (exponent m) and XB (exponent 2). Throws when two centers are closer than
/// 1e-12.
ChromosomeEvaluation evaluate_chromosome(const Matrix& data, const Matrix& centers, double m);

/// `a` Pareto-dominates `b` (minimization).
bool dominates(const Objectives& a, const Objectives& b) noexcept;

/// Fronts of indices into `points`, best first. Index order within a front
/// is ascending.
std::vector<std::vector<std::size_t>> nondominated_sort(std::span<const Objectives> points);

/// Crowding distance of each member of `front` (same order); boundary
/// points get +inf.
std::vector<double> crowding_distance(std::span<const Objectives> points, std::span<const std::size_t> front);

struct FrontSolution {
    Chromosome chromosome;
    MembershipMatrix membership;
};

/// Mutually non-dominated solutions sharing the same k.
struct ParetoFront {
    std::vector<FrontSolution> solutions;
};

/// NSGA-II over center-encoded chromosomes: binary tournament on
/// (rank, crowding), single-point crossover on the flattened centers,
/// per-gene Gaussian mutation (sigma = 0.1 x the dimension's range),
/// elitist survival. Returns the final rank-1 front without duplicate
/// objective pairs.
ParetoFront nsga2_run(const Matrix& data, int k, const GaConfig& cfg);

/// Optimal assignment maximizing total overlap; assignment[c] is the row
/// cluster matched to column cluster c (0-based). Square tables only.
std::vector<std::size_t> max_overlap_assignment(const std::vector<std::vector<std::size_t>>& table);

/// Renumbers the clusters of every solution to best match the first
/// solution's argmax partition.
ParetoFront align_labels(ParetoFront front);

struct VoteResult {
    std::vector<int> labels;    ///< voted cluster, 0 when not in the training set
    std::vector<bool> mask;     ///< training membership
    std::size_t training_size = 0;
    bool covers_all_clusters = false;
};

/// Point i trains iff the fraction of front solutions whose argmax is the
/// point's plurality cluster with max membership >= alpha exceeds beta.
/// The plurality is taken over the argmax votes of all solutions; a tied
/// plurality keeps the point out.
VoteResult fuzzy_majority_vote(const ParetoFront& front, double alpha, double beta);

/// One-vs-rest linear max-margin classifier trained by epoch-based
/// subgradient descent (Pegasos with a constant bias feature).
class LinearSvm {
public:
    void fit(const Matrix& x, std::span<const int> y, double weight, int epochs, std::uint64_t seed);
    [[nodiscard]] int predict(std::span<const double> x) const;
    [[nodiscard]] const std::vector<int>& classes() const noexcept { return classes_; }

private:
    std::vector<int> classes_;
    std::vector<double> mean_;
    std::vector<double> scale_;
    Matrix w_; ///< classes x (d + 1), last column is the bias
};

/// Fits on the masked points and predicts the rest; training points keep
/// their voted labels. Throws when the training set has fewer than 2 classes.
Partition train_and_classify(const Matrix& data, std::span<const int> train_labels,
                             const std::vector<bool>& train_mask, double svm_weight, int epochs = 50,
                             std::uint64_t seed = 0);

struct MocResult {
    Partition partition;
    ParetoFront front; ///< aligned
    std::size_t training_size = 0;
    bool fallback = false;
    std::string fallback_reason;
};

/// Alignment, voting and classification on an existing front. Falls back to
/// the best-XB solution's argmax partition when voting or training fails.
MocResult consensus_partition(const Matrix& data, ParetoFront front, const GaConfig& cfg);

MocResult mocsvm_run(const Matrix& data, int k, const GaConfig& cfg);

} // namespace genclust
