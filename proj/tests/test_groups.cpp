#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "game/groups.hpp"
#include "test_support.hpp"

using namespace game;
using game::testing::random_matrix;

namespace {

std::vector<std::size_t> range(std::size_t lo, std::size_t hi) {
    std::vector<std::size_t> out(hi - lo);
    std::iota(out.begin(), out.end(), lo);
    return out;
}

GroupStructure two_halves(std::size_t n) {
    return GroupStructure(n, {{"a", range(0, n / 2)}, {"b", range(n / 2, n)}});
}

} // namespace

TEST_CASE("GroupStructure: construction errors") {
    CHECK_THROWS_AS(GroupStructure(4, {{"a", {}}}), ValidationError);
    CHECK_THROWS_AS(GroupStructure(4, {{"a", {4}}}), ValidationError);
    CHECK_THROWS_AS(GroupStructure(4, {{"a", {1, 1}}}), ValidationError);
    CHECK_THROWS_AS(GroupStructure(4, {{"a", {1}}, {"a", {2}}}), ValidationError);
    const auto g = two_halves(4);
    CHECK(g.index_of("b") == 1);
    CHECK_THROWS_AS(g.index_of("zzz"), LookupError);
}

TEST_CASE("validate_cover: multiplicities") {
    const auto disjoint = validate_cover(two_halves(10));
    CHECK(disjoint.kappa_min == 1);
    CHECK(disjoint.kappa_max == 1);

    const GroupStructure doubled(6, {{"x", range(0, 6)}, {"y", range(0, 6)}});
    const auto stats = validate_cover(doubled);
    CHECK(stats.kappa_min == 2);
    CHECK(stats.kappa_max == 2);
    for (int k : doubled.multiplicity()) CHECK(k == 2);

    const GroupStructure holey(5, {{"a", {0, 1}}, {"b", {3, 4}}});
    try {
        validate_cover(holey);
        FAIL("expected a cover violation");
    } catch (const CoverError& e) {
        CHECK(e.row() == 2);
        CHECK(std::string(e.what()).find("row 2") != std::string::npos);
    }
    const auto repaired = holey.with_catch_all();
    CHECK(validate_cover(repaired).kappa_min == 1);
    CHECK(repaired.size() == 3);
    CHECK(repaired.category(2).rows == std::vector<std::size_t>{2});
}

TEST_CASE("extract_rows / embed_rows") {
    const Matrix w = random_matrix(6, 3, 2);
    const auto all = GroupStructure::all_rows(6);
    CHECK(extract_rows(all, "all", w) == w);
    CHECK(embed_rows(all, "all", w) == w);

    const GroupStructure single(6, {{"three", {3}}, {"rest", {0, 1, 2, 4, 5}}});
    const Matrix row = extract_rows(single, "three", w);
    REQUIRE(row.rows() == 1);
    CHECK(row == w.row(3));

    const Matrix b = random_matrix(5, 3, 3);
    const Matrix embedded = embed_rows(single, "rest", b);
    CHECK(embedded.row(3).cwiseAbs().maxCoeff() == 0.0);
    CHECK(extract_rows(single, "rest", embedded) == b);

    CHECK_THROWS_AS(extract_rows(single, "nope", w), LookupError);
    CHECK_THROWS_AS(embed_rows(single, "rest", Matrix::Zero(4, 3)), ValidationError);
    CHECK_THROWS_AS(extract_rows(single, "rest", Matrix::Zero(5, 3)), ValidationError);
}

TEST_CASE("semi-orthogonality on random overlapping categories") {
    const GroupStructure g(8, {{"a", {0, 2, 4, 6}}, {"b", {1, 2, 3}}, {"c", range(0, 8)}});
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Matrix w = random_matrix(8, 4, seed);
        for (std::size_t c = 0; c < g.size(); ++c) {
            const Matrix sub = extract_rows(g, c, w);
            CHECK(extract_rows(g, c, embed_rows(g, c, sub)) == sub);
            // embed(extract(.)) zeroes rows outside I_c and keeps the rest.
            Matrix expected = Matrix::Zero(8, 4);
            for (auto r : g.category(c).rows) expected.row(static_cast<Eigen::Index>(r)) = w.row(static_cast<Eigen::Index>(r));
            CHECK(embed_rows(g, c, sub) == expected);
        }
    }
}

TEST_CASE("row-multiplicity identity") {
    const GroupStructure g(8, {{"a", {0, 2, 4, 6}}, {"b", {1, 2, 3}}, {"c", range(0, 8)}});
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Matrix w = random_matrix(8, 5, seed);
        double blocks = 0.0;
        for (std::size_t c = 0; c < g.size(); ++c) blocks += extract_rows(g, c, w).squaredNorm();
        double weighted = 0.0;
        for (Eigen::Index i = 0; i < 8; ++i)
            weighted += g.multiplicity()[static_cast<std::size_t>(i)] * w.row(i).squaredNorm();
        CHECK(blocks == doctest::Approx(weighted).epsilon(1e-12));
    }
}

TEST_CASE("normalize_weights") {
    const std::vector<double> ones{1, 1, 1, 1};
    for (double a : normalize_weights(ones)) CHECK(a == doctest::Approx(0.25));
    const std::vector<double> lopsided{2, 0};
    CHECK(normalize_weights(lopsided) == std::vector<double>{1.0, 0.0});
    const std::vector<double> raw{0.3, 1.7, 5.0};
    const std::vector<double> scaled{3.0, 17.0, 50.0};
    const auto a = normalize_weights(raw);
    const auto b = normalize_weights(scaled);
    for (std::size_t i = 0; i < 3; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-14));
    CHECK(std::accumulate(a.begin(), a.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-14));

    const std::vector<double> zeros{0, 0};
    CHECK_THROWS_AS(normalize_weights(zeros), ValidationError);
    const std::vector<double> negative{1, -1, 2};
    CHECK_THROWS_AS(normalize_weights(negative), ValidationError);
}

TEST_CASE("lambda_heuristic: trivial and linear cases") {
    const auto g = two_halves(100);
    const auto mask = sample_uniform_mask(100, 20, 0.5, 1);
    for (double l : lambda_heuristic(g, mask, {0.0, 0.0, 1.0})) CHECK(l == 0.0);

    const auto one = lambda_heuristic(g, mask, {1.0, 0.0, 1.0});
    const auto two = lambda_heuristic(g, mask, {2.0, 0.0, 1.0});
    const auto scaled = lambda_heuristic(g, mask, {1.0, 0.0, 2.0});
    for (std::size_t c = 0; c < g.size(); ++c) {
        CHECK(two[c] == doctest::Approx(2 * one[c]).epsilon(1e-14));
        CHECK(scaled[c] == doctest::Approx(2 * one[c]).epsilon(1e-14));
    }
    CHECK_THROWS_AS(lambda_heuristic(g, ObservationMask::empty(100, 20), {}), ValidationError);
    CHECK_THROWS_AS(lambda_heuristic(g, mask, {-1.0, 0.0, 1.0}), ValidationError);
    CHECK_THROWS_AS(lambda_heuristic(g, mask, {1.0, 0.0, 0.0}), ValidationError);
}

TEST_CASE("lambda_heuristic: worked two-group case") {
    // n = 100 in two 50-row groups, m = 20, N = 1000 observed cells.
    const auto g = two_halves(100);
    // Exactly 1000 cells: the first 1000 of the full grid.
    const auto exact = ObservationMask::from_linear(100, 20, range(0, 1000));
    REQUIRE(exact.size() == 1000);

    // Hand evaluation: kappa_min = 1, N n_c / n = 500, d_c = 70, min(n_c, m) = 20.
    const double oracle = std::sqrt(500.0 * std::log(70.0) / 20.0);
    CHECK(oracle == doctest::Approx(10.3059).epsilon(1e-4));
    for (double l : lambda_heuristic(g, exact, {1.0, 0.0, 1.0}))
        CHECK(l == doctest::Approx(oracle).epsilon(1e-12));

    // R adds log(d_c) / kappa_min.
    for (double l : lambda_heuristic(g, exact, {1.0, 0.5, 1.0}))
        CHECK(l == doctest::Approx(oracle + 0.5 * std::log(70.0)).epsilon(1e-12));
}

TEST_CASE("lambda_heuristic: overlap divides by kappa_min") {
    const GroupStructure g(10, {{"x", range(0, 10)}, {"y", range(0, 10)}});
    const auto mask = ObservationMask::full(10, 4);
    const double base = std::sqrt(40.0 * std::log(14.0) / 4.0);
    for (double l : lambda_heuristic(g, mask, {1.0, 0.0, 1.0})) CHECK(l == doctest::Approx(base / 2));
}

TEST_CASE("lambda_heuristic: monotone in sigma, R and N") {
    const auto g = GroupStructure(60, {{"a", range(0, 20)}, {"b", range(10, 60)}});
    const auto small = sample_uniform_mask(60, 15, 0.3, 1);
    const auto large = mask_union(small, sample_uniform_mask(60, 15, 0.3, 2));
    for (double sigma : {0.0, 0.5, 1.0}) {
        for (double R : {0.0, 0.1, 1.0}) {
            const auto base = lambda_heuristic(g, small, {sigma, R, 1.0});
            const auto more_sigma = lambda_heuristic(g, small, {sigma + 0.3, R, 1.0});
            const auto more_r = lambda_heuristic(g, small, {sigma, R + 0.3, 1.0});
            const auto more_n = lambda_heuristic(g, large, {sigma, R, 1.0});
            for (std::size_t c = 0; c < g.size(); ++c) {
                CHECK(more_sigma[c] >= base[c]);
                CHECK(more_r[c] >= base[c]);
                CHECK(more_n[c] >= base[c]);
            }
        }
    }
}

TEST_CASE("split_penalties and select_on_grid") {
    const std::vector<double> lambdas{1.0, 3.0};
    const auto split = split_penalties(lambdas);
    CHECK(split.lambda == 4.0);
    CHECK(split.alphas == std::vector<double>{0.25, 0.75});
    const std::vector<double> zero{0.0, 0.0};
    const auto uniform = split_penalties(zero);
    CHECK(uniform.lambda == 0.0);
    CHECK(uniform.alphas == std::vector<double>{0.5, 0.5});

    const std::vector<double> grid{0.1, 1.0, 10.0, 100.0};
    const auto pick = select_on_grid(grid, [](double x) { return std::pow(std::log10(x) - 1.2, 2); });
    CHECK(pick.best == 10.0);
    CHECK(pick.losses.size() == 4);
}

TEST_CASE("from_labels orders categories by label") {
    const std::vector<int> labels{2, 0, 2, 1, 0};
    const auto g = GroupStructure::from_labels(labels);
    REQUIRE(g.size() == 3);
    CHECK(g.category(0).id == "g0");
    CHECK(g.category(0).rows == std::vector<std::size_t>{1, 4});
    CHECK(g.category(2).rows == std::vector<std::size_t>{0, 2});
    for (double a : g.weights()) CHECK(a == doctest::Approx(1.0 / 3));
}
