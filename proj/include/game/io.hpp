#pragma once

// File formats used by the command-line tool.
//
//   matrix  dense CSV (no header, blank cell = unobserved) or triplet CSV with
//           header "row,col,value"; detected from the first line
//   mask    CSV with header "row,col", zero-based
//   groups  CSV with header "row,category", one line per membership
//   labels  CSV with header "row,label"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>

#include "game/evalbench.hpp"
#include "game/groups.hpp"
#include "game/linalg.hpp"
#include "game/observation.hpp"

namespace game::io {

/// Thrown for unreadable files and malformed content.
class ParseError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

struct LoadedMatrix {
    Matrix values; ///< unobserved cells hold NaN
    ObservationMask observed;
    bool triplet = false;
};

struct Shape {
    std::size_t rows;
    std::size_t cols;
};

/// Triplet files take their shape from `shape` when given, else max index + 1.
LoadedMatrix read_matrix(const std::filesystem::path& path, std::optional<Shape> shape = {});
/// Dense CSV, 17 significant digits, NaN cells written blank.
void write_matrix(const std::filesystem::path& path, const Matrix& m);

ObservationMask read_mask(const std::filesystem::path& path, Shape shape);
void write_mask(const std::filesystem::path& path, const ObservationMask& mask);

/// Categories ordered by first appearance.
GroupStructure read_groups(const std::filesystem::path& path, std::size_t n);
void write_groups(const std::filesystem::path& path, const GroupStructure& g);

LabelVector read_labels(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path, const LabelVector& labels);

/// Shortest form that round-trips via 17 significant digits.
std::string format_double(double value);

} // namespace game::io
