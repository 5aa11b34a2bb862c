#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "game/linalg.hpp"
#include "game/observation.hpp"

namespace game {

struct Category {
    std::string id;
    /// Sorted, unique row indices I_c.
    std::vector<std::size_t> rows;
};

/// Overlapping row categories over an n-row matrix with convex weights.
/// Row multiplicities are computed at construction; the cover requirement is
/// checked separately by validate_cover so that callers can repair it.
class GroupStructure {
public:
    /// Weights default to uniform. Throws ValidationError on empty
    /// categories, out-of-range or duplicate rows, or repeated ids.
    GroupStructure(std::size_t n, std::vector<Category> categories);
    GroupStructure(std::size_t n, std::vector<Category> categories, std::span<const double> raw_weights);

    /// One category per distinct label, ids "<prefix><label>", ordered by label.
    static GroupStructure from_labels(std::span<const int> labels, const std::string& prefix = "g");
    /// A single category holding every row.
    static GroupStructure all_rows(std::size_t n, const std::string& id = "all");

    std::size_t n() const noexcept { return n_; }
    std::size_t size() const noexcept { return categories_.size(); }
    const std::vector<Category>& categories() const noexcept { return categories_; }
    const Category& category(std::size_t index) const { return categories_.at(index); }
    /// Throws LookupError for unknown ids.
    std::size_t index_of(const std::string& id) const;

    const std::vector<double>& weights() const noexcept { return weights_; }
    const std::vector<int>& multiplicity() const noexcept { return kappa_; }

    GroupStructure with_weights(std::span<const double> raw_weights) const;
    /// Adds a category holding every uncovered row (no-op when covered).
    GroupStructure with_catch_all(const std::string& id = "__uncovered__") const;

private:
    std::size_t n_;
    std::vector<Category> categories_;
    std::vector<double> weights_;
    std::vector<int> kappa_;
};

struct CoverStats {
    int kappa_min;
    int kappa_max;
};

/// Throws CoverError naming the first row that belongs to no category.
CoverStats validate_cover(const GroupStructure& g);

/// D_c W: rows of W in I_c, in I_c order.
Matrix extract_rows(const GroupStructure& g, const std::string& id, const Matrix& w);
Matrix extract_rows(const GroupStructure& g, std::size_t index, const Matrix& w);

/// D_c^T B: an n x m matrix with rows I_c taken from B and zeros elsewhere.
Matrix embed_rows(const GroupStructure& g, const std::string& id, const Matrix& b);
Matrix embed_rows(const GroupStructure& g, std::size_t index, const Matrix& b);

/// raw / sum(raw). Throws on negative entries or a zero sum.
std::vector<double> normalize_weights(std::span<const double> raw);

/// N_c = number of observed cells in the rows of each category.
std::vector<std::size_t> category_sample_counts(const GroupStructure& g, const ObservationMask& mask);

struct LambdaRule {
    double sigma = 1.0; ///< sub-Gaussian noise scale
    double R = 0.0;     ///< sub-exponential tail scale
    double scale = 1.0; ///< user multiplier
};

/// Per-category penalty from observable statistics:
///   scale * [ sigma/kappa_min * sqrt((N n_c / n) log d_c / min(n_c, m)) + R log d_c / kappa_min ]
/// with N = |mask|, d_c = n_c + m.
std::vector<double> lambda_heuristic(const GroupStructure& g, const ObservationMask& mask,
                                     const LambdaRule& rule);

struct PenaltySplit {
    double lambda;              ///< global lambda = sum of per-category lambdas
    std::vector<double> alphas; ///< lambda_c / lambda (uniform when lambda = 0)
};

/// Splits per-category penalties into the (lambda, alpha) parametrization.
PenaltySplit split_penalties(std::span<const double> lambdas);

struct GridSelection {
    double best;
    std::vector<double> losses;
};

/// Evaluates loss at every grid point and returns the minimizer (first on ties).
GridSelection select_on_grid(std::span<const double> grid, const std::function<double(double)>& loss);

} // namespace game
