#include "game/evalbench.hpp"

#include <algorithm>
#include <cmath>

namespace game {

namespace {

constexpr double subspace_rank_cut = 1e-6;

void require_same_shape(const Matrix& a, const Matrix& b, const char* who) {
    require(a.rows() == b.rows() && a.cols() == b.cols(),
            std::string(who) + ": matrices differ in shape");
}

std::vector<Eigen::Index> resolve_ranks(const GroupStructure& g, const Matrix& truth,
                                        std::span<const Eigen::Index> ranks) {
    std::vector<Eigen::Index> out;
    if (ranks.empty()) {
        for (std::size_t c = 0; c < g.size(); ++c)
            out.push_back(std::max<Eigen::Index>(1, default_subspace_rank(extract_rows(g, c, truth))));
        return out;
    }
    require(ranks.size() == g.size(), "subspace metrics: one rank per category required");
    for (std::size_t c = 0; c < g.size(); ++c) {
        const auto limit = std::min<Eigen::Index>(
            static_cast<Eigen::Index>(g.category(c).rows.size()), truth.cols());
        require(ranks[c] >= 1 && ranks[c] <= limit,
                "subspace metrics: rank " + std::to_string(ranks[c]) + " for category '" +
                    g.category(c).id + "' exceeds min(n_c, m) = " + std::to_string(limit));
        out.push_back(ranks[c]);
    }
    return out;
}

} // namespace

double rmse_on(const ObservationMask& test, const Matrix& x, const Matrix& w_hat) {
    require(!test.is_empty(), "rmse_on: empty test mask");
    require_same_shape(x, w_hat, "rmse_on");
    require(static_cast<std::size_t>(x.rows()) == test.rows() &&
                static_cast<std::size_t>(x.cols()) == test.cols(),
            "rmse_on: mask shape does not match");
    double total = 0.0;
    for (std::size_t idx : test.linear()) {
        const auto i = static_cast<Eigen::Index>(idx / test.cols());
        const auto j = static_cast<Eigen::Index>(idx % test.cols());
        const double d = w_hat(i, j) - x(i, j);
        total += d * d;
    }
    return std::sqrt(total / static_cast<double>(test.size()));
}

double frobenius_error(const Matrix& truth, const Matrix& estimate) {
    require_same_shape(truth, estimate, "frobenius_error");
    return (estimate - truth).norm();
}

double relative_frobenius_error(const Matrix& truth, const Matrix& estimate) {
    const double scale = truth.norm();
    require(scale > 0.0, "relative_frobenius_error: truth is zero");
    return frobenius_error(truth, estimate) / scale;
}

Eigen::Index default_subspace_rank(const Matrix& block) {
    return numerical_rank<double>(singular_values(block), subspace_rank_cut);
}

Matrix right_subspace(const Matrix& block, Eigen::Index r) {
    const auto svd = svd_full(block);
    require(r >= 1 && r <= svd.V.cols(), "right_subspace: rank out of range");
    return svd.V.leftCols(r);
}

std::vector<double> per_group_subspace_error(const GroupStructure& g, const Matrix& truth,
                                             const Matrix& estimate,
                                             std::span<const Eigen::Index> ranks) {
    require_same_shape(truth, estimate, "per_group_subspace_error");
    const auto r = resolve_ranks(g, truth, ranks);
    std::vector<double> out;
    for (std::size_t c = 0; c < g.size(); ++c)
        out.push_back(procrustes_subspace_error(right_subspace(extract_rows(g, c, estimate), r[c]),
                                                right_subspace(extract_rows(g, c, truth), r[c])));
    return out;
}

std::vector<double> per_group_grassmann(const GroupStructure& g, const Matrix& truth,
                                        const Matrix& estimate,
                                        std::span<const Eigen::Index> ranks,
                                        GrassmannMetric metric) {
    require_same_shape(truth, estimate, "per_group_grassmann");
    const auto r = resolve_ranks(g, truth, ranks);
    std::vector<double> out;
    for (std::size_t c = 0; c < g.size(); ++c)
        out.push_back(grassmann_distance(right_subspace(extract_rows(g, c, estimate), r[c]),
                                         right_subspace(extract_rows(g, c, truth), r[c]), metric));
    return out;
}

Matrix column_mean_impute(const Matrix& x, const ObservationMask& mask) {
    require(static_cast<std::size_t>(x.rows()) == mask.rows() &&
                static_cast<std::size_t>(x.cols()) == mask.cols(),
            "column_mean_impute: shape mismatch");
    Matrix out = x;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        double sum = 0.0;
        std::size_t count = 0;
        for (Eigen::Index i = 0; i < x.rows(); ++i)
            if (mask.contains(static_cast<std::size_t>(i), static_cast<std::size_t>(j))) {
                sum += x(i, j);
                ++count;
            }
        const double mean = count ? sum / static_cast<double>(count) : 0.0;
        for (Eigen::Index i = 0; i < x.rows(); ++i)
            if (!mask.contains(static_cast<std::size_t>(i), static_cast<std::size_t>(j)))
                out(i, j) = mean;
    }
    return out;
}

} // namespace game
