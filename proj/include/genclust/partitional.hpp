#pragma once

#include <cstdint>
#include <vector>

#include "genclust/matrix.hpp"
#include "genclust/partition.hpp"

namespace genclust {

struct RunConfig {
    int k = 2;
    int max_iters = 100;
    double tol = 1e-6;          ///< on the largest center displacement
    std::uint64_t seed = 0;
    double fuzzifier = 2.0;     ///< FCM only

    void validate(std::size_t n) const;
};

struct KMeansResult {
    Partition partition;        ///< labels by first appearance, centers = means
    double objective = 0.0;
    int iterations = 0;
    std::vector<double> history; ///< objective after every assignment step
};

struct FcmResult {
    MembershipMatrix membership; ///< rows ordered like partition clusters
    Matrix centers;
    Partition partition;         ///< argmax labels, compacted by first appearance
    double objective = 0.0;
    int iterations = 0;
    std::vector<double> history; ///< J_m after every membership update
};

/// K distinct rows drawn with the seeded generator.
Matrix initial_centers(const Matrix& data, int k, std::uint64_t seed);

/// Lloyd iterations on squared Euclidean distance.
KMeansResult kmeans_run(const Matrix& data, const RunConfig& cfg);
KMeansResult kmeans_run(const Matrix& data, const RunConfig& cfg, Matrix centers);

/// Sum of squared distances of each point to its cluster center; centers are
/// the partition's when present, else cluster means.
double kmeans_objective(const Matrix& data, const Partition& partition);

/// Bezdek membership update at fixed centers. A point that coincides with a
/// center gets full membership in the first such center.
MembershipMatrix fcm_memberships(const Matrix& data, const Matrix& centers, double m);

/// Centers as u^m-weighted means.
Matrix fcm_centers(const Matrix& data, const MembershipMatrix& u);

/// J_m = sum_i sum_j u_ij^m ||x_j - c_i||^2.
double fcm_objective(const Matrix& data, const MembershipMatrix& u, const Matrix& centers);

FcmResult fcm_run(const Matrix& data, const RunConfig& cfg);
FcmResult fcm_run(const Matrix& data, const RunConfig& cfg, Matrix centers);

} // namespace genclust
