#include "game/evalbench.hpp"

#include <cmath>
#include <numeric>
#include <utility>

#include "game/rng.hpp"

namespace game {

namespace {

Matrix gaussian(RandomStream& rng, Eigen::Index rows, Eigen::Index cols, double scale) {
    Matrix out(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = scale * rng.normal();
    return out;
}

Matrix orthonormal_gaussian(RandomStream& rng, Eigen::Index rows, Eigen::Index cols) {
    const Matrix raw = gaussian(rng, rows, cols, 1.0);
    Eigen::HouseholderQR<Matrix> qr(raw);
    return qr.householderQ() * Matrix::Identity(rows, cols);
}

// Balanced labels (i mod k) shuffled with Fisher-Yates.
LabelVector balanced_labels(RandomStream& rng, std::size_t n, std::size_t k) {
    LabelVector labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % k);
    for (std::size_t i = n; i > 1; --i) std::swap(labels[i - 1], labels[rng.below(i)]);
    return labels;
}

Matrix latent_scores(RandomStream& rng, std::size_t n, std::size_t rank, ScoreNormalization how) {
    Matrix scores = gaussian(rng, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(rank), 1.0);
    if (how == ScoreNormalization::UnitNorm) {
        for (Eigen::Index i = 0; i < scores.rows(); ++i) {
            const double norm = scores.row(i).norm();
            if (norm > 0.0) scores.row(i) /= norm;
        }
    } else {
        for (Eigen::Index j = 0; j < scores.cols(); ++j) {
            auto col = scores.col(j);
            col.array() -= col.mean();
            const double sd = std::sqrt(col.squaredNorm() / static_cast<double>(col.size()));
            if (sd > 0.0) col /= sd;
        }
    }
    return scores;
}

} // namespace

void validate(const SyntheticSpec& spec) {
    require(spec.n >= 1 && spec.m >= 1, "synthetic: n and m must be >= 1");
    require(spec.num_groups >= 1 && spec.num_groups <= spec.n,
            "synthetic: number of groups must lie in [1, n]");
    require(spec.num_subclusters >= 1 && spec.num_subclusters <= spec.n,
            "synthetic: number of subclusters must lie in [1, n]");
    require(spec.group_rank >= 1 && spec.group_rank <= spec.m,
            "synthetic: group rank must lie in [1, m]");
    require(spec.subcluster_rank >= 1 && spec.subcluster_rank <= spec.m,
            "synthetic: subcluster rank must lie in [1, m]");
    require(spec.beta >= 0.0 && spec.beta <= 1.0, "synthetic: beta must lie in [0, 1]");
    require(std::isfinite(spec.noise_sigma) && spec.noise_sigma >= 0.0,
            "synthetic: noise sigma must be >= 0");
}

SyntheticData generate_crossed_groups(const SyntheticSpec& spec) {
    validate(spec);
    RandomStream rng(spec.seed, streams::synthetic);
    const auto n = static_cast<Eigen::Index>(spec.n);
    const auto m = static_cast<Eigen::Index>(spec.m);
    const double mean_scale = 1.0 / std::sqrt(static_cast<double>(spec.m));

    LabelVector group_labels = balanced_labels(rng, spec.n, spec.num_groups);
    LabelVector hidden = balanced_labels(rng, spec.n, spec.num_subclusters);

    SyntheticComponents parts;
    parts.group_means = gaussian(rng, static_cast<Eigen::Index>(spec.num_groups), m, mean_scale);
    parts.subcluster_means =
        gaussian(rng, static_cast<Eigen::Index>(spec.num_subclusters), m, mean_scale);
    for (std::size_t g = 0; g < spec.num_groups; ++g)
        parts.group_bases.push_back(
            orthonormal_gaussian(rng, m, static_cast<Eigen::Index>(spec.group_rank)));
    for (std::size_t s = 0; s < spec.num_subclusters; ++s)
        parts.subcluster_bases.push_back(
            orthonormal_gaussian(rng, m, static_cast<Eigen::Index>(spec.subcluster_rank)));
    parts.group_scores = latent_scores(rng, spec.n, spec.group_rank, spec.scores);
    parts.subcluster_scores = latent_scores(rng, spec.n, spec.subcluster_rank, spec.scores);

    parts.group_component.resize(n, m);
    parts.subcluster_component.resize(n, m);
    Matrix signal(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto g = static_cast<std::size_t>(group_labels[static_cast<std::size_t>(i)]);
        const auto s = static_cast<std::size_t>(hidden[static_cast<std::size_t>(i)]);
        parts.group_component.row(i) = parts.group_scores.row(i) * parts.group_bases[g].transpose();
        parts.subcluster_component.row(i) =
            (1.0 - spec.beta) * (parts.subcluster_scores.row(i) *
                                 parts.subcluster_bases[s].transpose());
        signal.row(i) = parts.group_means.row(static_cast<Eigen::Index>(g)) +
                        parts.subcluster_means.row(static_cast<Eigen::Index>(s)) +
                        parts.group_component.row(i) + parts.subcluster_component.row(i);
    }
    parts.noise = gaussian(rng, n, m, spec.noise_sigma);
    Matrix x = signal + parts.noise;

    GroupStructure groups = GroupStructure::from_labels(group_labels, "g");
    return {std::move(x), std::move(signal), std::move(groups), std::move(group_labels),
            std::move(hidden), std::move(parts)};
}

PlantedData generate_planted_groups(const PlantedSpec& spec) {
    require(!spec.group_sizes.empty(), "planted: need at least one group");
    require(spec.m >= 1 && spec.rank >= 1 && spec.rank <= spec.m, "planted: rank must lie in [1, m]");
    require(spec.noise_sigma >= 0.0 && spec.signal_scale > 0.0, "planted: invalid scales");
    RandomStream rng(spec.seed, streams::synthetic);
    const std::size_t n = std::accumulate(spec.group_sizes.begin(), spec.group_sizes.end(),
                                          std::size_t{0});
    const auto m = static_cast<Eigen::Index>(spec.m);
    const auto r = static_cast<Eigen::Index>(spec.rank);

    Matrix signal(static_cast<Eigen::Index>(n), m);
    std::vector<Category> cats;
    std::vector<Matrix> bases;
    std::size_t offset = 0;
    for (std::size_t g = 0; g < spec.group_sizes.size(); ++g) {
        const std::size_t size = spec.group_sizes[g];
        require(size >= spec.rank, "planted: group smaller than rank");
        Matrix basis = orthonormal_gaussian(rng, m, r);
        const Matrix left = gaussian(rng, static_cast<Eigen::Index>(size), r, spec.signal_scale);
        signal.middleRows(static_cast<Eigen::Index>(offset), static_cast<Eigen::Index>(size)) =
            left * basis.transpose();
        std::vector<std::size_t> rows(size);
        std::iota(rows.begin(), rows.end(), offset);
        cats.push_back({"g" + std::to_string(g), std::move(rows)});
        bases.push_back(std::move(basis));
        offset += size;
    }
    Matrix x = signal + gaussian(rng, static_cast<Eigen::Index>(n), m, spec.noise_sigma);
    return {std::move(x), std::move(signal), GroupStructure(n, std::move(cats)), std::move(bases)};
}

} // namespace game
