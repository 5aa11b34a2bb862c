#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "game/groups.hpp"
#include "game/linalg.hpp"
#include "game/observation.hpp"

namespace game {

/// Per-row integer class ids in [0, k).
using LabelVector = std::vector<int>;

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

enum class ScoreNormalization {
    UnitNorm,    ///< each latent score row scaled to unit l2 norm
    Standardize, ///< each score coordinate centered and scaled to unit variance
};

/// Crossed-group generator: row i in observed group g and hidden subcluster s is
///   x_i = mu_g + nu_s + u_i V_g^T + (1 - beta) z_i W_s^T + noise.
struct SyntheticSpec {
    std::size_t n = 1000;
    std::size_t m = 500;
    std::size_t num_groups = 10;
    std::size_t num_subclusters = 5;
    std::size_t group_rank = 3;
    std::size_t subcluster_rank = 3;
    double beta = 0.0;
    double noise_sigma = 0.1;
    std::uint64_t seed = 0;
    ScoreNormalization scores = ScoreNormalization::UnitNorm;
};

void validate(const SyntheticSpec& spec);

struct SyntheticComponents {
    Matrix group_means;                 ///< |G| x m
    Matrix subcluster_means;            ///< |S| x m
    std::vector<Matrix> group_bases;     ///< m x group_rank, orthonormal
    std::vector<Matrix> subcluster_bases; ///< m x subcluster_rank, orthonormal
    Matrix group_scores;                ///< n x group_rank
    Matrix subcluster_scores;           ///< n x subcluster_rank
    Matrix group_component;             ///< rows u_i V_g^T
    Matrix subcluster_component;        ///< rows (1 - beta) z_i W_s^T
    Matrix noise;
};

struct SyntheticData {
    Matrix X;
    Matrix signal; ///< X without noise
    GroupStructure groups;
    LabelVector group_labels;
    LabelVector hidden;
    SyntheticComponents components;
};

/// Rows are split evenly over groups and, independently, over subclusters,
/// then shuffled.
SyntheticData generate_crossed_groups(const SyntheticSpec& spec);

/// Disjoint row groups, each an exact low-rank block with its own random
/// right subspace, plus Gaussian noise.
struct PlantedSpec {
    std::vector<std::size_t> group_sizes{100, 100};
    std::size_t m = 60;
    std::size_t rank = 2;
    /// Per-entry scale of the left factors.
    double signal_scale = 1.0;
    double noise_sigma = 0.1;
    std::uint64_t seed = 0;
};

struct PlantedData {
    Matrix X;
    Matrix signal;
    GroupStructure groups;
    std::vector<Matrix> right_bases; ///< m x rank per group
};

PlantedData generate_planted_groups(const PlantedSpec& spec);

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

/// Root mean squared error over the test cells.
double rmse_on(const ObservationMask& test, const Matrix& x, const Matrix& w_hat);

double frobenius_error(const Matrix& truth, const Matrix& estimate);
double relative_frobenius_error(const Matrix& truth, const Matrix& estimate);

/// Count of singular values above 1e-6 * sigma_1.
Eigen::Index default_subspace_rank(const Matrix& block);

/// Top-r right singular vectors (m x r).
Matrix right_subspace(const Matrix& block, Eigen::Index r);

/// Procrustes distance between top-r_c right singular subspaces of each block
/// of truth and estimate. Empty ranks means default_subspace_rank of truth.
std::vector<double> per_group_subspace_error(const GroupStructure& g, const Matrix& truth,
                                             const Matrix& estimate,
                                             std::span<const Eigen::Index> ranks = {});

/// Grassmann distance per block, same subspaces as above.
std::vector<double> per_group_grassmann(const GroupStructure& g, const Matrix& truth,
                                        const Matrix& estimate,
                                        std::span<const Eigen::Index> ranks = {},
                                        GrassmannMetric metric = GrassmannMetric::Geodesic);

/// Fills unobserved cells with their column's observed mean (0 for empty columns).
Matrix column_mean_impute(const Matrix& x, const ObservationMask& mask);

// ---------------------------------------------------------------------------
// Clustering
// ---------------------------------------------------------------------------

struct KMeansOptions {
    std::size_t restarts = 10;
    std::size_t max_iters = 100;
    std::uint64_t seed = 0;
};

/// Lloyd iterations from k-means++ seeds; best restart by within-cluster SS.
LabelVector kmeans(const Matrix& points, std::size_t k, const KMeansOptions& options = {});

/// Sum of squared distances of rows to their cluster centroid.
double within_cluster_ss(const Matrix& points, std::span<const int> labels);

/// Pair-counting adjusted Rand index. Identical trivial partitions score 1.
double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

/// I(a; b) / sqrt(H(a) H(b)) in nats; 0 when either entropy is 0.
double normalized_mutual_information(std::span<const int> a, std::span<const int> b);

} // namespace game
