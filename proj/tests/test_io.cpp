#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <string>

#include "game/io.hpp"
#include "test_support.hpp"

using namespace game;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("game_io_" + std::to_string(std::rand()) + "_" +
                                            std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path file(const std::string& name, const std::string& content) const {
        const fs::path p = path / name;
        std::ofstream(p) << content;
        return p;
    }
};

} // namespace

TEST_CASE("format_double round-trips") {
    for (double v : {0.0, 1.0, -2.5, 0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -std::numeric_limits<double>::min()})
        CHECK(std::stod(io::format_double(v)) == v);
    CHECK(io::format_double(0.5) == "0.5");
}

TEST_CASE("dense matrix round-trip with unobserved cells") {
    TempDir dir;
    Matrix m = game::testing::random_matrix(4, 3, 1);
    m(1, 2) = std::numeric_limits<double>::quiet_NaN();
    io::write_matrix(dir.path / "m.csv", m);
    const auto loaded = io::read_matrix(dir.path / "m.csv");
    CHECK_FALSE(loaded.triplet);
    CHECK(loaded.observed.size() == 11);
    CHECK_FALSE(loaded.observed.contains(1, 2));
    CHECK(std::isnan(loaded.values(1, 2)));
    for (Eigen::Index i = 0; i < 4; ++i)
        for (Eigen::Index j = 0; j < 3; ++j)
            if (!(i == 1 && j == 2)) CHECK(loaded.values(i, j) == m(i, j));
}

TEST_CASE("triplet matrix detection and shape") {
    TempDir dir;
    const auto p = dir.file("t.csv", "row,col,value\n0,0,1.5\n2,1,-3\n");
    const auto inferred = io::read_matrix(p);
    CHECK(inferred.triplet);
    CHECK(inferred.values.rows() == 3);
    CHECK(inferred.values.cols() == 2);
    CHECK(inferred.values(2, 1) == -3.0);
    CHECK(inferred.observed.size() == 2);

    const auto shaped = io::read_matrix(p, io::Shape{5, 4});
    CHECK(shaped.values.rows() == 5);
    CHECK(shaped.values.cols() == 4);
    CHECK_THROWS_AS(io::read_matrix(p, io::Shape{2, 2}), ValidationError);
}

TEST_CASE("mask, groups and labels round-trip") {
    TempDir dir;
    const auto mask = sample_uniform_mask(7, 5, 0.4, 3);
    io::write_mask(dir.path / "mask.csv", mask);
    CHECK(io::read_mask(dir.path / "mask.csv", {7, 5}) == mask);

    const GroupStructure g(6, {{"young", {0, 1, 2}}, {"old", {3, 4, 5}}, {"all", {0, 1, 2, 3, 4, 5}}});
    io::write_groups(dir.path / "groups.csv", g);
    const auto back = io::read_groups(dir.path / "groups.csv", 6);
    REQUIRE(back.size() == 3);
    for (std::size_t c = 0; c < 3; ++c) {
        CHECK(back.category(c).id == g.category(c).id);
        CHECK(back.category(c).rows == g.category(c).rows);
    }

    const LabelVector labels{2, 0, 1, 1, 0};
    io::write_labels(dir.path / "labels.csv", labels);
    CHECK(io::read_labels(dir.path / "labels.csv") == labels);
}

TEST_CASE("groups keep first-appearance order") {
    TempDir dir;
    const auto p = dir.file("g.csv", "row,category\n2,zeta\n0,alpha\n1,zeta\n");
    const auto g = io::read_groups(p, 3);
    CHECK(g.category(0).id == "zeta");
    CHECK(g.category(0).rows == std::vector<std::size_t>{1, 2});
    CHECK(g.category(1).id == "alpha");
}

TEST_CASE("parse errors") {
    TempDir dir;
    CHECK_THROWS_AS(io::read_matrix(dir.path / "missing.csv"), io::ParseError);
    CHECK_THROWS_AS(io::read_matrix(dir.file("ragged.csv", "1,2\n3\n")), io::ParseError);
    CHECK_THROWS_AS(io::read_matrix(dir.file("word.csv", "1,abc\n")), io::ParseError);
    CHECK_THROWS_AS(io::read_mask(dir.file("nohdr.csv", "0,0\n"), {2, 2}), io::ParseError);
    CHECK_THROWS_AS(io::read_mask(dir.file("range.csv", "row,col\n5,0\n"), {2, 2}), ValidationError);
    CHECK_THROWS_AS(io::read_groups(dir.file("grange.csv", "row,category\n9,a\n"), 3), ValidationError);
    CHECK_THROWS_AS(io::read_labels(dir.file("neg.csv", "row,label\n0,-1\n")), ValidationError);
}
