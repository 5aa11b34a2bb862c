#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "game/linalg.hpp"

namespace game {

struct Cell {
    std::size_t row;
    std::size_t col;
    friend bool operator==(const Cell&, const Cell&) = default;
};

/// Binary observation set over an n x m grid. Cells are kept as sorted
/// row-major linear indices alongside a dense 0/1 indicator used by the
/// projection.
class ObservationMask {
public:
    /// Throws ValidationError on out-of-range or duplicate cells.
    ObservationMask(std::size_t rows, std::size_t cols, std::span<const Cell> cells);

    static ObservationMask full(std::size_t rows, std::size_t cols);
    static ObservationMask empty(std::size_t rows, std::size_t cols);
    /// Builds from already sorted, unique linear indices.
    static ObservationMask from_linear(std::size_t rows, std::size_t cols,
                                       std::vector<std::size_t> sorted_linear);
    /// Cells whose indicator entry is nonzero.
    static ObservationMask from_indicator(const Matrix& indicator);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return linear_.size(); }
    bool is_empty() const noexcept { return linear_.empty(); }

    bool contains(std::size_t row, std::size_t col) const {
        return row < rows_ && col < cols_ && indicator_(row, col) != 0.0;
    }
    const std::vector<std::size_t>& linear() const noexcept { return linear_; }
    std::vector<Cell> cells() const;
    const Matrix& indicator() const noexcept { return indicator_; }

    /// Observed cells whose row is in the given set.
    std::size_t count_in_rows(std::span<const std::size_t> rows) const;

    friend bool operator==(const ObservationMask& a, const ObservationMask& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.linear_ == b.linear_;
    }

private:
    ObservationMask(std::size_t rows, std::size_t cols);

    std::size_t rows_;
    std::size_t cols_;
    std::vector<std::size_t> linear_;
    Matrix indicator_;
};

/// P_Omega: keeps observed entries, zeroes the rest.
Matrix project_observed(const ObservationMask& mask, const Matrix& a);

/// Keeps each cell of base independently with probability keep_prob.
ObservationMask thin_mask(const ObservationMask& base, double keep_prob, std::uint64_t seed);

/// Each of the rows x cols cells observed independently with probability keep_prob.
ObservationMask sample_uniform_mask(std::size_t rows, std::size_t cols, double keep_prob,
                                    std::uint64_t seed);

/// Drops base cells in target rows independently with probability drop_prob.
ObservationMask mask_block_rows(const ObservationMask& base,
                                std::span<const std::size_t> target_rows, double drop_prob,
                                std::uint64_t seed);

struct HoldoutSplit {
    ObservationMask train;
    ObservationMask test;
};

/// Random partition of mask with |test| = round(test_frac * |mask|).
HoldoutSplit split_holdout(const ObservationMask& mask, double test_frac, std::uint64_t seed);

/// Cells in a but not in b.
ObservationMask mask_difference(const ObservationMask& a, const ObservationMask& b);
ObservationMask mask_union(const ObservationMask& a, const ObservationMask& b);

} // namespace game
