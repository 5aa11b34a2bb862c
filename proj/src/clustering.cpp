#include "game/evalbench.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <utility>

#include "game/rng.hpp"

namespace game {

namespace {

struct Clustering {
    LabelVector labels;
    double wcss = std::numeric_limits<double>::infinity();
};

double squared_distance(const Matrix& points, Eigen::Index i, const Matrix& centers,
                        Eigen::Index c) {
    return (points.row(i) - centers.row(c)).squaredNorm();
}

Matrix plus_plus_seeds(const Matrix& points, std::size_t k, RandomStream& rng) {
    const Eigen::Index n = points.rows();
    Matrix centers(static_cast<Eigen::Index>(k), points.cols());
    centers.row(0) = points.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
    Vector nearest(n);
    for (Eigen::Index i = 0; i < n; ++i) nearest(i) = squared_distance(points, i, centers, 0);
    for (std::size_t c = 1; c < k; ++c) {
        const double total = nearest.sum();
        Eigen::Index pick = 0;
        if (total > 0.0) {
            double target = rng.uniform() * total;
            pick = n - 1;
            for (Eigen::Index i = 0; i < n; ++i) {
                target -= nearest(i);
                if (target < 0.0) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
        }
        const auto cc = static_cast<Eigen::Index>(c);
        centers.row(cc) = points.row(pick);
        for (Eigen::Index i = 0; i < n; ++i)
            nearest(i) = std::min(nearest(i), squared_distance(points, i, centers, cc));
    }
    return centers;
}

Clustering lloyd(const Matrix& points, Matrix centers, std::size_t max_iters) {
    const Eigen::Index n = points.rows();
    const Eigen::Index k = centers.rows();
    Clustering out;
    out.labels.assign(static_cast<std::size_t>(n), -1);
    Vector dist(n);
    for (std::size_t it = 0; it < max_iters; ++it) {
        bool changed = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            Eigen::Index best = 0;
            double best_d = squared_distance(points, i, centers, 0);
            for (Eigen::Index c = 1; c < k; ++c) {
                const double d = squared_distance(points, i, centers, c);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            dist(i) = best_d;
            auto& label = out.labels[static_cast<std::size_t>(i)];
            if (label != static_cast<int>(best)) {
                label = static_cast<int>(best);
                changed = true;
            }
        }
        if (!changed && it > 0) break;

        Matrix sums = Matrix::Zero(k, points.cols());
        std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto c = out.labels[static_cast<std::size_t>(i)];
            sums.row(c) += points.row(i);
            ++counts[static_cast<std::size_t>(c)];
        }
        for (Eigen::Index c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) {
                centers.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
            } else {
                // Empty cluster: move it to the point farthest from its center.
                Eigen::Index far = 0;
                dist.maxCoeff(&far);
                centers.row(c) = points.row(far);
                dist(far) = 0.0;
            }
        }
    }
    out.wcss = within_cluster_ss(points, out.labels);
    return out;
}

double choose2(double x) { return 0.5 * x * (x - 1.0); }

void require_pair(std::span<const int> a, std::span<const int> b, const char* who) {
    require(a.size() == b.size(), std::string(who) + ": labelings differ in length (" +
                                      std::to_string(a.size()) + " vs " +
                                      std::to_string(b.size()) + ")");
    require(!a.empty(), std::string(who) + ": empty labelings");
}

struct Contingency {
    std::map<std::pair<int, int>, double> joint;
    std::map<int, double> rows;
    std::map<int, double> cols;
};

Contingency contingency(std::span<const int> a, std::span<const int> b) {
    Contingency t;
    for (std::size_t i = 0; i < a.size(); ++i) {
        t.joint[{a[i], b[i]}] += 1.0;
        t.rows[a[i]] += 1.0;
        t.cols[b[i]] += 1.0;
    }
    return t;
}

} // namespace

double within_cluster_ss(const Matrix& points, std::span<const int> labels) {
    require(labels.size() == static_cast<std::size_t>(points.rows()),
            "within_cluster_ss: one label per row required");
    std::map<int, std::pair<Vector, std::size_t>> centroids;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto [it, fresh] = centroids.try_emplace(labels[i], Vector::Zero(points.cols()), 0);
        it->second.first += points.row(static_cast<Eigen::Index>(i)).transpose();
        ++it->second.second;
    }
    for (auto& [label, acc] : centroids) acc.first /= static_cast<double>(acc.second);
    double total = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i)
        total += (points.row(static_cast<Eigen::Index>(i)).transpose() - centroids[labels[i]].first)
                     .squaredNorm();
    return total;
}

LabelVector kmeans(const Matrix& points, std::size_t k, const KMeansOptions& options) {
    require(k >= 1, "kmeans: k must be >= 1");
    require(k <= static_cast<std::size_t>(points.rows()),
            "kmeans: k = " + std::to_string(k) + " exceeds number of points " +
                std::to_string(points.rows()));
    require(points.allFinite(), "kmeans: points must be finite");
    RandomStream rng(options.seed, streams::kmeans);
    Clustering best;
    for (std::size_t r = 0; r < std::max<std::size_t>(1, options.restarts); ++r) {
        Clustering run = lloyd(points, plus_plus_seeds(points, k, rng), options.max_iters);
        if (run.wcss < best.wcss) best = std::move(run);
    }
    return best.labels;
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
    require_pair(a, b, "adjusted_rand_index");
    const Contingency t = contingency(a, b);
    double index = 0.0, sum_rows = 0.0, sum_cols = 0.0;
    for (const auto& [cell, count] : t.joint) index += choose2(count);
    for (const auto& [label, count] : t.rows) sum_rows += choose2(count);
    for (const auto& [label, count] : t.cols) sum_cols += choose2(count);
    const double total = choose2(static_cast<double>(a.size()));
    const double expected = total > 0.0 ? sum_rows * sum_cols / total : 0.0;
    const double maximum = 0.5 * (sum_rows + sum_cols);
    if (maximum == expected) return 1.0;
    return (index - expected) / (maximum - expected);
}

double normalized_mutual_information(std::span<const int> a, std::span<const int> b) {
    require_pair(a, b, "normalized_mutual_information");
    const Contingency t = contingency(a, b);
    const double n = static_cast<double>(a.size());
    auto entropy = [n](const std::map<int, double>& marginal) {
        double h = 0.0;
        for (const auto& [label, count] : marginal) h -= (count / n) * std::log(count / n);
        return h;
    };
    const double ha = entropy(t.rows);
    const double hb = entropy(t.cols);
    if (ha <= 0.0 || hb <= 0.0) return 0.0;
    double mi = 0.0;
    for (const auto& [cell, count] : t.joint) {
        const double pa = t.rows.at(cell.first) / n;
        const double pb = t.cols.at(cell.second) / n;
        const double p = count / n;
        mi += p * std::log(p / (pa * pb));
    }
    return std::clamp(mi / std::sqrt(ha * hb), 0.0, 1.0);
}

} // namespace game
