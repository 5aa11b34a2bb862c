#include "game/groups.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

namespace game {

namespace {

std::vector<double> uniform_weights(std::size_t count) {
    return std::vector<double>(count, count == 0 ? 0.0 : 1.0 / static_cast<double>(count));
}

void require_matrix_rows(const GroupStructure& g, const Matrix& w, const char* who) {
    require(static_cast<std::size_t>(w.rows()) == g.n(),
            std::string(who) + ": matrix has " + std::to_string(w.rows()) +
                " rows, group structure has " + std::to_string(g.n()));
}

} // namespace

GroupStructure::GroupStructure(std::size_t n, std::vector<Category> categories)
    : GroupStructure(n, std::move(categories), {}) {}

GroupStructure::GroupStructure(std::size_t n, std::vector<Category> categories,
                               std::span<const double> raw_weights)
    : n_(n), categories_(std::move(categories)), kappa_(n, 0) {
    require(n >= 1, "GroupStructure: need at least one row");
    require(!categories_.empty(), "GroupStructure: need at least one category");
    std::set<std::string> seen;
    for (Category& c : categories_) {
        require(seen.insert(c.id).second, "GroupStructure: duplicate category id '" + c.id + "'");
        require(!c.rows.empty(), "GroupStructure: category '" + c.id + "' is empty");
        std::sort(c.rows.begin(), c.rows.end());
        require(std::adjacent_find(c.rows.begin(), c.rows.end()) == c.rows.end(),
                "GroupStructure: category '" + c.id + "' lists a row twice");
        require(c.rows.back() < n, "GroupStructure: category '" + c.id + "' has row " +
                                       std::to_string(c.rows.back()) + " >= n = " +
                                       std::to_string(n));
        for (std::size_t r : c.rows) ++kappa_[r];
    }
    if (raw_weights.empty()) {
        weights_ = uniform_weights(categories_.size());
    } else {
        require(raw_weights.size() == categories_.size(),
                "GroupStructure: one weight per category required");
        weights_ = normalize_weights(raw_weights);
    }
}

GroupStructure GroupStructure::from_labels(std::span<const int> labels, const std::string& prefix) {
    std::map<int, std::vector<std::size_t>> by_label;
    for (std::size_t i = 0; i < labels.size(); ++i) by_label[labels[i]].push_back(i);
    std::vector<Category> cats;
    for (auto& [label, rows] : by_label)
        cats.push_back({prefix + std::to_string(label), std::move(rows)});
    return GroupStructure(labels.size(), std::move(cats));
}

GroupStructure GroupStructure::all_rows(std::size_t n, const std::string& id) {
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return GroupStructure(n, {{id, std::move(rows)}});
}

std::size_t GroupStructure::index_of(const std::string& id) const {
    for (std::size_t k = 0; k < categories_.size(); ++k)
        if (categories_[k].id == id) return k;
    throw LookupError("unknown category '" + id + "'");
}

GroupStructure GroupStructure::with_weights(std::span<const double> raw_weights) const {
    return GroupStructure(n_, categories_, raw_weights);
}

GroupStructure GroupStructure::with_catch_all(const std::string& id) const {
    std::vector<std::size_t> uncovered;
    for (std::size_t i = 0; i < n_; ++i)
        if (kappa_[i] == 0) uncovered.push_back(i);
    if (uncovered.empty()) return *this;
    auto cats = categories_;
    cats.push_back({id, std::move(uncovered)});
    return GroupStructure(n_, std::move(cats));
}

CoverStats validate_cover(const GroupStructure& g) {
    const auto& kappa = g.multiplicity();
    for (std::size_t i = 0; i < kappa.size(); ++i)
        if (kappa[i] == 0)
            throw CoverError(i, "cover violation: row " + std::to_string(i) +
                                    " belongs to no category");
    const auto [lo, hi] = std::minmax_element(kappa.begin(), kappa.end());
    return {*lo, *hi};
}

Matrix extract_rows(const GroupStructure& g, std::size_t index, const Matrix& w) {
    require_matrix_rows(g, w, "extract_rows");
    const auto& rows = g.category(index).rows;
    Matrix out(static_cast<Eigen::Index>(rows.size()), w.cols());
    for (std::size_t k = 0; k < rows.size(); ++k)
        out.row(static_cast<Eigen::Index>(k)) = w.row(static_cast<Eigen::Index>(rows[k]));
    return out;
}

Matrix extract_rows(const GroupStructure& g, const std::string& id, const Matrix& w) {
    return extract_rows(g, g.index_of(id), w);
}

Matrix embed_rows(const GroupStructure& g, std::size_t index, const Matrix& b) {
    const auto& rows = g.category(index).rows;
    require(static_cast<std::size_t>(b.rows()) == rows.size(),
            "embed_rows: block has " + std::to_string(b.rows()) + " rows, category '" +
                g.category(index).id + "' has " + std::to_string(rows.size()));
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(g.n()), b.cols());
    for (std::size_t k = 0; k < rows.size(); ++k)
        out.row(static_cast<Eigen::Index>(rows[k])) = b.row(static_cast<Eigen::Index>(k));
    return out;
}

Matrix embed_rows(const GroupStructure& g, const std::string& id, const Matrix& b) {
    return embed_rows(g, g.index_of(id), b);
}

std::vector<double> normalize_weights(std::span<const double> raw) {
    require(!raw.empty(), "normalize_weights: no weights");
    double total = 0.0;
    for (double r : raw) {
        require(std::isfinite(r) && r >= 0.0, "normalize_weights: weights must be finite and >= 0");
        total += r;
    }
    require(total > 0.0, "normalize_weights: weights sum to zero");
    std::vector<double> out(raw.begin(), raw.end());
    for (double& w : out) w /= total;
    return out;
}

std::vector<std::size_t> category_sample_counts(const GroupStructure& g,
                                                const ObservationMask& mask) {
    require(mask.rows() == g.n(), "category_sample_counts: mask and groups disagree on n");
    std::vector<std::size_t> out;
    out.reserve(g.size());
    for (const Category& c : g.categories()) out.push_back(mask.count_in_rows(c.rows));
    return out;
}

std::vector<double> lambda_heuristic(const GroupStructure& g, const ObservationMask& mask,
                                     const LambdaRule& rule) {
    require(rule.sigma >= 0.0 && rule.R >= 0.0, "lambda_heuristic: sigma and R must be >= 0");
    require(rule.scale > 0.0, "lambda_heuristic: scale must be > 0");
    require(!mask.is_empty(), "lambda_heuristic: empty observation mask");
    require(mask.rows() == g.n(), "lambda_heuristic: mask and groups disagree on n");

    const auto [kappa_min, kappa_max] = validate_cover(g);
    (void)kappa_max;
    const double N = static_cast<double>(mask.size());
    const double n = static_cast<double>(g.n());
    const double m = static_cast<double>(mask.cols());
    const double kmin = static_cast<double>(kappa_min);

    std::vector<double> out;
    out.reserve(g.size());
    for (const Category& c : g.categories()) {
        const double nc = static_cast<double>(c.rows.size());
        const double log_d = std::log(nc + m);
        const double subgaussian =
            rule.sigma / kmin * std::sqrt((N * nc / n) * log_d / std::min(nc, m));
        const double subexponential = rule.R * log_d / kmin;
        out.push_back(rule.scale * (subgaussian + subexponential));
    }
    return out;
}

PenaltySplit split_penalties(std::span<const double> lambdas) {
    require(!lambdas.empty(), "split_penalties: no penalties");
    double total = 0.0;
    for (double l : lambdas) {
        require(std::isfinite(l) && l >= 0.0, "split_penalties: penalties must be >= 0");
        total += l;
    }
    if (total == 0.0) return {0.0, uniform_weights(lambdas.size())};
    return {total, normalize_weights(lambdas)};
}

GridSelection select_on_grid(std::span<const double> grid,
                             const std::function<double(double)>& loss) {
    require(!grid.empty(), "select_on_grid: empty grid");
    GridSelection out{grid.front(), {}};
    double best = std::numeric_limits<double>::infinity();
    for (double point : grid) {
        const double value = loss(point);
        out.losses.push_back(value);
        if (value < best) {
            best = value;
            out.best = point;
        }
    }
    return out;
}

} // namespace game
