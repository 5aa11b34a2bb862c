#include "game/observation.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <numeric>
#include <string>

namespace game {

namespace {

void require_probability(double p, const char* who) {
    require(std::isfinite(p) && p >= 0.0 && p <= 1.0,
            std::string(who) + ": probability must lie in [0, 1]");
}

void require_same_grid(const ObservationMask& a, const ObservationMask& b, const char* who) {
    require(a.rows() == b.rows() && a.cols() == b.cols(),
            std::string(who) + ": masks cover different grids");
}

} // namespace

ObservationMask::ObservationMask(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), indicator_(Matrix::Zero(static_cast<Eigen::Index>(rows),
                                                        static_cast<Eigen::Index>(cols))) {
    require(rows >= 1 && cols >= 1, "ObservationMask: grid must be at least 1 x 1");
}

ObservationMask::ObservationMask(std::size_t rows, std::size_t cols, std::span<const Cell> cells)
    : ObservationMask(rows, cols) {
    linear_.reserve(cells.size());
    for (const Cell& c : cells) {
        require(c.row < rows && c.col < cols,
                "ObservationMask: cell (" + std::to_string(c.row) + ", " + std::to_string(c.col) +
                    ") outside " + std::to_string(rows) + " x " + std::to_string(cols));
        linear_.push_back(c.row * cols + c.col);
    }
    std::sort(linear_.begin(), linear_.end());
    const auto dup = std::adjacent_find(linear_.begin(), linear_.end());
    require(dup == linear_.end(), "ObservationMask: duplicate cell (" +
                                      std::to_string(dup == linear_.end() ? 0 : *dup / cols) +
                                      ", " +
                                      std::to_string(dup == linear_.end() ? 0 : *dup % cols) + ")");
    for (std::size_t idx : linear_)
        indicator_(static_cast<Eigen::Index>(idx / cols), static_cast<Eigen::Index>(idx % cols)) =
            1.0;
}

ObservationMask ObservationMask::from_linear(std::size_t rows, std::size_t cols,
                                             std::vector<std::size_t> sorted_linear) {
    ObservationMask out(rows, cols);
    for (std::size_t idx : sorted_linear)
        out.indicator_(static_cast<Eigen::Index>(idx / cols),
                       static_cast<Eigen::Index>(idx % cols)) = 1.0;
    out.linear_ = std::move(sorted_linear);
    return out;
}

ObservationMask ObservationMask::full(std::size_t rows, std::size_t cols) {
    std::vector<std::size_t> all(rows * cols);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return from_linear(rows, cols, std::move(all));
}

ObservationMask ObservationMask::empty(std::size_t rows, std::size_t cols) {
    return from_linear(rows, cols, {});
}

ObservationMask ObservationMask::from_indicator(const Matrix& indicator) {
    const auto rows = static_cast<std::size_t>(indicator.rows());
    const auto cols = static_cast<std::size_t>(indicator.cols());
    std::vector<std::size_t> linear;
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            if (indicator(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) != 0.0)
                linear.push_back(i * cols + j);
    return from_linear(rows, cols, std::move(linear));
}

std::vector<Cell> ObservationMask::cells() const {
    std::vector<Cell> out;
    out.reserve(linear_.size());
    for (std::size_t idx : linear_) out.push_back({idx / cols_, idx % cols_});
    return out;
}

std::size_t ObservationMask::count_in_rows(std::span<const std::size_t> rows) const {
    std::size_t total = 0;
    for (std::size_t r : rows) {
        require(r < rows_, "count_in_rows: row index out of range");
        total += static_cast<std::size_t>(
            (indicator_.row(static_cast<Eigen::Index>(r)).array() != 0.0).count());
    }
    return total;
}

Matrix project_observed(const ObservationMask& mask, const Matrix& a) {
    require(static_cast<std::size_t>(a.rows()) == mask.rows() &&
                static_cast<std::size_t>(a.cols()) == mask.cols(),
            "project_observed: matrix is " + std::to_string(a.rows()) + " x " +
                std::to_string(a.cols()) + ", mask is " + std::to_string(mask.rows()) + " x " +
                std::to_string(mask.cols()));
    return a.cwiseProduct(mask.indicator());
}

ObservationMask thin_mask(const ObservationMask& base, double keep_prob, std::uint64_t seed) {
    require_probability(keep_prob, "thin_mask");
    const CounterRng rng(seed, streams::uniform_mask);
    std::vector<std::size_t> kept;
    kept.reserve(base.size());
    for (std::size_t idx : base.linear())
        if (rng.uniform(idx) < keep_prob) kept.push_back(idx);
    return ObservationMask::from_linear(base.rows(), base.cols(), std::move(kept));
}

ObservationMask sample_uniform_mask(std::size_t rows, std::size_t cols, double keep_prob,
                                    std::uint64_t seed) {
    require_probability(keep_prob, "sample_uniform_mask");
    return thin_mask(ObservationMask::full(rows, cols), keep_prob, seed);
}

ObservationMask mask_block_rows(const ObservationMask& base,
                                std::span<const std::size_t> target_rows, double drop_prob,
                                std::uint64_t seed) {
    require_probability(drop_prob, "mask_block_rows");
    std::vector<char> target(base.rows(), 0);
    for (std::size_t r : target_rows) {
        require(r < base.rows(), "mask_block_rows: target row " + std::to_string(r) +
                                     " out of range (n = " + std::to_string(base.rows()) + ")");
        target[r] = 1;
    }
    const CounterRng rng(seed, streams::block_mask);
    std::vector<std::size_t> kept;
    kept.reserve(base.size());
    for (std::size_t idx : base.linear()) {
        if (target[idx / base.cols()] && rng.uniform(idx) < drop_prob) continue;
        kept.push_back(idx);
    }
    return ObservationMask::from_linear(base.rows(), base.cols(), std::move(kept));
}

HoldoutSplit split_holdout(const ObservationMask& mask, double test_frac, std::uint64_t seed) {
    require(std::isfinite(test_frac) && test_frac > 0.0 && test_frac < 1.0,
            "split_holdout: test fraction must lie in (0, 1)");
    const auto& linear = mask.linear();
    const auto n_test = static_cast<std::size_t>(
        std::llround(test_frac * static_cast<double>(linear.size())));

    // Rank cells by a keyed hash; the n_test smallest keys form the test set.
    const CounterRng rng(seed, streams::holdout);
    std::vector<std::size_t> order(linear.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto key = [&](std::size_t pos) { return rng.bits(linear[pos]); };
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto ka = key(a), kb = key(b);
        return ka != kb ? ka < kb : linear[a] < linear[b];
    });

    std::vector<char> in_test(linear.size(), 0);
    for (std::size_t t = 0; t < n_test; ++t) in_test[order[t]] = 1;
    std::vector<std::size_t> train, test;
    train.reserve(linear.size() - n_test);
    test.reserve(n_test);
    for (std::size_t pos = 0; pos < linear.size(); ++pos)
        (in_test[pos] ? test : train).push_back(linear[pos]);
    return {ObservationMask::from_linear(mask.rows(), mask.cols(), std::move(train)),
            ObservationMask::from_linear(mask.rows(), mask.cols(), std::move(test))};
}

ObservationMask mask_difference(const ObservationMask& a, const ObservationMask& b) {
    require_same_grid(a, b, "mask_difference");
    std::vector<std::size_t> out;
    std::set_difference(a.linear().begin(), a.linear().end(), b.linear().begin(),
                        b.linear().end(), std::back_inserter(out));
    return ObservationMask::from_linear(a.rows(), a.cols(), std::move(out));
}

ObservationMask mask_union(const ObservationMask& a, const ObservationMask& b) {
    require_same_grid(a, b, "mask_union");
    std::vector<std::size_t> out;
    std::set_union(a.linear().begin(), a.linear().end(), b.linear().begin(), b.linear().end(),
                   std::back_inserter(out));
    return ObservationMask::from_linear(a.rows(), a.cols(), std::move(out));
}

} // namespace game
