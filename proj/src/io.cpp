#include "game/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <vector>

namespace game::io {

namespace {

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write '" + path.string() + "'");
    return out;
}

std::string where(const std::filesystem::path& path, std::size_t line) {
    return path.string() + ":" + std::to_string(line);
}

double parse_real(const std::string& text, const std::filesystem::path& path, std::size_t line) {
    double value = 0.0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end)
        throw ParseError(where(path, line) + ": '" + text + "' is not a number");
    return value;
}

std::size_t parse_index(const std::string& text, const std::filesystem::path& path,
                        std::size_t line) {
    std::size_t value = 0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end || text.empty())
        throw ParseError(where(path, line) + ": '" + text + "' is not a nonnegative index");
    return value;
}

int parse_int(const std::string& text, const std::filesystem::path& path, std::size_t line) {
    int value = 0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end || text.empty())
        throw ParseError(where(path, line) + ": '" + text + "' is not an integer");
    return value;
}

void expect_header(std::istream& in, const std::string& header, const std::filesystem::path& path) {
    std::string line;
    if (!std::getline(in, line) || trim(line) != header)
        throw ParseError(path.string() + ": expected header '" + header + "'");
}

// Reads "a,b" data lines after a header, skipping blanks.
template <typename Fn>
void for_each_record(std::istream& in, std::size_t expected_fields,
                     const std::filesystem::path& path, Fn&& fn) {
    std::string line;
    std::size_t number = 1;
    while (std::getline(in, line)) {
        ++number;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(trim(line));
        if (fields.size() != expected_fields)
            throw ParseError(where(path, number) + ": expected " + std::to_string(expected_fields) +
                             " fields");
        fn(fields, number);
    }
}

} // namespace

std::string format_double(double value) {
    if (std::isnan(value)) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

LoadedMatrix read_matrix(const std::filesystem::path& path, std::optional<Shape> shape) {
    auto in = open_input(path);
    std::string first;
    if (!std::getline(in, first)) throw ParseError(path.string() + ": empty matrix file");
    const double nan = std::numeric_limits<double>::quiet_NaN();

    if (trim(first) == "row,col,value") {
        struct Entry {
            std::size_t row, col;
            double value;
        };
        std::vector<Entry> entries;
        std::size_t max_row = 0, max_col = 0;
        for_each_record(in, 3, path, [&](const auto& f, std::size_t line) {
            Entry e{parse_index(f[0], path, line), parse_index(f[1], path, line),
                    parse_real(f[2], path, line)};
            if (!std::isfinite(e.value))
                throw ParseError(where(path, line) + ": value is not finite");
            max_row = std::max(max_row, e.row);
            max_col = std::max(max_col, e.col);
            entries.push_back(e);
        });
        if (entries.empty() && !shape) throw ParseError(path.string() + ": no entries");
        const Shape dims = shape.value_or(Shape{max_row + 1, max_col + 1});
        Matrix values = Matrix::Constant(static_cast<Eigen::Index>(dims.rows),
                                         static_cast<Eigen::Index>(dims.cols), nan);
        std::vector<Cell> cells;
        for (const Entry& e : entries) {
            if (e.row >= dims.rows || e.col >= dims.cols)
                throw ParseError(path.string() + ": entry (" + std::to_string(e.row) + ", " +
                                 std::to_string(e.col) + ") outside declared shape");
            values(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col)) = e.value;
            cells.push_back({e.row, e.col});
        }
        ObservationMask observed(dims.rows, dims.cols, cells);
        return {std::move(values), std::move(observed), true};
    }

    std::vector<std::vector<double>> rows;
    std::string line = first;
    std::size_t number = 1;
    do {
        if (!trim(line).empty()) {
            std::vector<double> row;
            for (const auto& field : split_fields(trim(line))) {
                if (field.empty()) {
                    row.push_back(nan);
                } else {
                    const double v = parse_real(field, path, number);
                    if (!std::isfinite(v))
                        throw ParseError(where(path, number) + ": value is not finite");
                    row.push_back(v);
                }
            }
            if (!rows.empty() && row.size() != rows.front().size())
                throw ParseError(where(path, number) + ": row has " + std::to_string(row.size()) +
                                 " cells, expected " + std::to_string(rows.front().size()));
            rows.push_back(std::move(row));
        }
        ++number;
    } while (std::getline(in, line));
    if (rows.empty()) throw ParseError(path.string() + ": empty matrix file");

    Matrix values(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    if (shape && (shape->rows != rows.size() || shape->cols != rows.front().size()))
        throw ParseError(path.string() + ": matrix shape does not match expected shape");
    Matrix indicator = values.unaryExpr([](double v) { return std::isnan(v) ? 0.0 : 1.0; });
    return {std::move(values), ObservationMask::from_indicator(indicator), false};
}

void write_matrix(const std::filesystem::path& path, const Matrix& m) {
    auto out = open_output(path);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << format_double(m(i, j));
        }
        out << '\n';
    }
}

ObservationMask read_mask(const std::filesystem::path& path, Shape shape) {
    auto in = open_input(path);
    expect_header(in, "row,col", path);
    std::vector<Cell> cells;
    for_each_record(in, 2, path, [&](const auto& f, std::size_t line) {
        cells.push_back({parse_index(f[0], path, line), parse_index(f[1], path, line)});
    });
    try {
        return ObservationMask(shape.rows, shape.cols, cells);
    } catch (const ValidationError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void write_mask(const std::filesystem::path& path, const ObservationMask& mask) {
    auto out = open_output(path);
    out << "row,col\n";
    for (std::size_t idx : mask.linear()) out << idx / mask.cols() << ',' << idx % mask.cols() << '\n';
}

GroupStructure read_groups(const std::filesystem::path& path, std::size_t n) {
    auto in = open_input(path);
    expect_header(in, "row,category", path);
    std::vector<Category> cats;
    std::map<std::string, std::size_t> slot;
    for_each_record(in, 2, path, [&](const auto& f, std::size_t line) {
        const std::size_t row = parse_index(f[0], path, line);
        if (row >= n)
            throw ParseError(where(path, line) + ": row " + std::to_string(row) +
                             " outside matrix with " + std::to_string(n) + " rows");
        if (f[1].empty()) throw ParseError(where(path, line) + ": empty category id");
        auto [it, fresh] = slot.try_emplace(f[1], cats.size());
        if (fresh) cats.push_back({f[1], {}});
        cats[it->second].rows.push_back(row);
    });
    if (cats.empty()) throw ParseError(path.string() + ": no group memberships");
    return GroupStructure(n, std::move(cats));
}

void write_groups(const std::filesystem::path& path, const GroupStructure& g) {
    auto out = open_output(path);
    out << "row,category\n";
    for (const Category& c : g.categories())
        for (std::size_t r : c.rows) out << r << ',' << c.id << '\n';
}

LabelVector read_labels(const std::filesystem::path& path) {
    auto in = open_input(path);
    expect_header(in, "row,label", path);
    std::map<std::size_t, int> by_row;
    for_each_record(in, 2, path, [&](const auto& f, std::size_t line) {
        const std::size_t row = parse_index(f[0], path, line);
        const int label = parse_int(f[1], path, line);
        if (label < 0) throw ParseError(where(path, line) + ": labels must be >= 0");
        if (!by_row.emplace(row, label).second)
            throw ParseError(where(path, line) + ": row listed twice");
    });
    LabelVector labels;
    for (const auto& [row, label] : by_row) {
        if (row != labels.size()) throw ParseError(path.string() + ": rows must be 0..n-1");
        labels.push_back(label);
    }
    return labels;
}

void write_labels(const std::filesystem::path& path, const LabelVector& labels) {
    auto out = open_output(path);
    out << "row,label\n";
    for (std::size_t i = 0; i < labels.size(); ++i) out << i << ',' << labels[i] << '\n';
}

} // namespace game::io
