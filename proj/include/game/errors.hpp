#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace game {

/// Bad shapes, out-of-range parameters, non-finite data.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A row that belongs to no category.
class CoverError : public ValidationError {
public:
    CoverError(std::size_t row, const std::string& what)
        : ValidationError(what), row_(row) {}
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

/// Unknown category id.
class LookupError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// The iteration produced a non-finite iterate.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(std::size_t iteration, const std::string& what)
        : std::runtime_error(what), iteration_(iteration) {}
    std::size_t iteration() const noexcept { return iteration_; }

private:
    std::size_t iteration_;
};

inline void require(bool cond, const std::string& message) {
    if (!cond) throw ValidationError(message);
}

} // namespace game
