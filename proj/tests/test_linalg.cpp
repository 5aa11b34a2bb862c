#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "game/linalg.hpp"
#include "test_support.hpp"

using namespace game;
using game::testing::random_matrix;
using game::testing::random_orthonormal;
using game::testing::random_perturbation;
using game::testing::random_rotation;

namespace {

constexpr double pi = std::numbers::pi;

double prox_objective(const Matrix& a, const Matrix& o, double tau) {
    return 0.5 * (a - o).squaredNorm() + tau * nuclear_norm(o);
}

} // namespace

TEST_CASE("svd_full: diagonal input") {
    Matrix a(2, 2);
    a << 3, 0, 0, 1;
    const auto svd = svd_full(a);
    CHECK((svd.U - Matrix::Identity(2, 2)).norm() < 1e-14);
    CHECK((svd.V - Matrix::Identity(2, 2)).norm() < 1e-14);
    CHECK(svd.S(0) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(svd.S(1) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("svd_full: zero matrix") {
    const auto svd = svd_full(Matrix::Zero(3, 2));
    REQUIRE(svd.S.size() == 2);
    CHECK(svd.S(0) == 0.0);
    CHECK(svd.S(1) == 0.0);
}

TEST_CASE("svd_full: singular values match eigenvalues of A^T A") {
    const Matrix a = random_matrix(5, 4, 11);
    const auto svd = svd_full(a);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(a.transpose() * a);
    // Eigenvalues ascend; singular values descend.
    const Vector expected = eig.eigenvalues().reverse().cwiseMax(0.0).cwiseSqrt();
    CHECK((svd.S - expected).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("svd_full: rejects non-finite input") {
    Matrix a = Matrix::Ones(3, 3);
    a(1, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(svd_full(a), ValidationError);
    a(1, 1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(svd_full(a), ValidationError);
}

TEST_CASE("svd_full: thin SVD invariants on random shapes") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Eigen::Index rows = 1 + static_cast<Eigen::Index>(seed % 7);
        const Eigen::Index cols = 1 + static_cast<Eigen::Index>((seed * 3) % 6);
        const Matrix a = random_matrix(rows, cols, seed);
        const auto svd = svd_full(a);
        const Eigen::Index k = std::min(rows, cols);
        REQUIRE(svd.S.size() == k);
        CHECK(orthonormality_error(svd.U) < 1e-8);
        CHECK(orthonormality_error(svd.V) < 1e-8);
        for (Eigen::Index i = 0; i < k; ++i) {
            CHECK(svd.S(i) >= 0.0);
            if (i > 0) CHECK(svd.S(i) <= svd.S(i - 1));
        }
        CHECK((svd.reconstruct() - a).norm() < 1e-10 * std::max(1.0, a.norm()));
    }
}

TEST_CASE("svd_full: sign convention makes the largest left entry positive") {
    const auto svd = svd_full(random_matrix(6, 4, 3));
    for (Eigen::Index j = 0; j < svd.U.cols(); ++j) {
        Eigen::Index arg = 0;
        svd.U.col(j).cwiseAbs().maxCoeff(&arg);
        CHECK(svd.U(arg, j) > 0.0);
    }
}

TEST_CASE("svd_truncated: exact-rank input") {
    const Matrix a = game::testing::low_rank(10, 8, 2, 5);
    const auto svd = svd_truncated(a, 2, 10, 2, 42);
    CHECK((svd.reconstruct() - a).norm() <= 1e-6 * a.norm());
    CHECK(orthonormality_error(svd.U) < 1e-8);
    CHECK(orthonormality_error(svd.V) < 1e-8);
}

TEST_CASE("svd_truncated: full rank request agrees with svd_full") {
    const Matrix a = random_matrix(9, 7, 8);
    const auto full = svd_full(a);
    const auto trunc = svd_truncated(a, 7, 10, 2, 1);
    CHECK((trunc.S - full.S).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("svd_truncated: top-k accuracy when the tail vanishes") {
    // Rank-3 input plus a 1e-9 tail.
    Matrix a = game::testing::low_rank(30, 20, 3, 21);
    a += 1e-9 * random_orthonormal(30, 1, 4) * random_orthonormal(20, 1, 5).transpose();
    const auto full = svd_full(a);
    REQUIRE(full.S(3) <= 1e-8);
    const auto trunc = svd_truncated(a, 3, 10, 2, 9);
    for (Eigen::Index i = 0; i < 3; ++i)
        CHECK(std::abs(trunc.S(i) - full.S(i)) <= 1e-6 * full.S(i));
}

TEST_CASE("svd_truncated: deterministic per seed") {
    const Matrix a = random_matrix(12, 9, 2);
    const auto first = svd_truncated(a, 3, 10, 2, 77);
    const auto second = svd_truncated(a, 3, 10, 2, 77);
    REQUIRE(first.S.size() == second.S.size());
    for (Eigen::Index i = 0; i < first.S.size(); ++i) CHECK(first.S(i) == second.S(i));
}

TEST_CASE("svd_truncated: rank out of range") {
    const Matrix a = random_matrix(5, 4, 2);
    CHECK_THROWS_AS(svd_truncated(a, 0), ValidationError);
    CHECK_THROWS_AS(svd_truncated(a, 5), ValidationError);
}

TEST_CASE("soft_threshold_svd: diagonal case") {
    Matrix a(2, 2);
    a << 3, 0, 0, 1;
    Matrix expected(2, 2);
    expected << 1, 0, 0, 0;
    CHECK((soft_threshold_svd(a, 2.0) - expected).norm() < 1e-14);
}

TEST_CASE("soft_threshold_svd: tau = 0 is the identity") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Matrix a = random_matrix(6, 4, seed);
        CHECK((soft_threshold_svd(a, 0.0) - a).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("soft_threshold_svd: negative tau rejected") {
    CHECK_THROWS_AS(soft_threshold_svd(Matrix::Ones(2, 2), -0.1), ValidationError);
}

TEST_CASE("soft_threshold_svd: local optimality of the prox") {
    const Matrix a = random_matrix(6, 4, 123);
    const double tau = 0.5;
    const Matrix o = soft_threshold_svd(a, tau);
    const double at_o = prox_objective(a, o, tau);
    int violations = 0;
    for (std::uint64_t t = 0; t < 1000; ++t)
        if (prox_objective(a, o + random_perturbation(6, 4, 1000 + t, 1e-3), tau) < at_o) ++violations;
    CHECK(violations == 0);
}

TEST_CASE("soft_threshold_svd: nonexpansive and vanishing above sigma_1") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const Matrix a = random_matrix(5, 4, seed);
        const Matrix b = random_matrix(5, 4, seed + 500);
        for (double tau : {0.0, 0.1, 0.7, 2.0, 10.0})
            CHECK((soft_threshold_svd(a, tau) - soft_threshold_svd(b, tau)).norm() <=
                  (a - b).norm() + 1e-12);
        const double s1 = singular_values(a)(0);
        CHECK(soft_threshold_svd(a, s1).norm() < 1e-12);
        CHECK(soft_threshold_svd(a, 1.5 * s1).norm() == 0.0);
    }
}

TEST_CASE("principal_angles: basic configurations") {
    Matrix e1(2, 1), e2(2, 1), diag(2, 1);
    e1 << 1, 0;
    e2 << 0, 1;
    diag << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
    CHECK(principal_angles(e1, e1)(0) == doctest::Approx(0.0));
    CHECK(principal_angles(e1, e2)(0) == doctest::Approx(pi / 2));
    CHECK(principal_angles(e1, diag)(0) == doctest::Approx(pi / 4).epsilon(1e-12));

    const Matrix u = random_orthonormal(7, 3, 4);
    CHECK(principal_angles(u, u).maxCoeff() < 1e-8);
}

TEST_CASE("principal_angles: symmetric, sorted, within [0, pi/2]") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Matrix u = random_orthonormal(8, 3, seed);
        const Matrix v = random_orthonormal(8, 3, seed + 100);
        const Vector ab = principal_angles(u, v);
        const Vector ba = principal_angles(v, u);
        CHECK((ab - ba).cwiseAbs().maxCoeff() < 1e-8);
        for (Eigen::Index i = 0; i < ab.size(); ++i) {
            CHECK(ab(i) >= 0.0);
            CHECK(ab(i) <= pi / 2 + 1e-15);
            if (i > 0) CHECK(ab(i) >= ab(i - 1));
        }
    }
}

TEST_CASE("principal_angles: rejects non-orthonormal input") {
    const Matrix u = random_orthonormal(5, 2, 1);
    CHECK_THROWS_AS(principal_angles(u, 2.0 * u), ValidationError);
    CHECK_THROWS_AS(principal_angles(u, random_orthonormal(5, 3, 2)), ValidationError);
}

TEST_CASE("grassmann_distance: rotation invariance and orthogonal lines") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Matrix v = random_orthonormal(9, 3, seed);
        const Matrix u = v * random_rotation(3, seed + 40);
        CHECK(grassmann_distance(u, v) < 1e-8);
    }
    Matrix e1(3, 1), e2(3, 1);
    e1 << 1, 0, 0;
    e2 << 0, 1, 0;
    CHECK(grassmann_distance(e1, e2) == doctest::Approx(pi / 2));
}

TEST_CASE("grassmann_distance: planted angles are recovered") {
    const double a = pi / 6, b = pi / 3;
    Matrix u = Matrix::Zero(4, 2), v = Matrix::Zero(4, 2);
    u(0, 0) = 1;
    u(1, 1) = 1;
    v(0, 0) = std::cos(a);
    v(2, 0) = std::sin(a);
    v(1, 1) = std::cos(b);
    v(3, 1) = std::sin(b);
    // Hide the construction behind a common rotation of R^4 and a basis change.
    const Matrix q = random_rotation(4, 17);
    const Matrix uu = q * u;
    const Matrix vv = q * v * random_rotation(2, 18);

    const Vector angles = principal_angles(uu, vv);
    CHECK(angles(0) == doctest::Approx(a).epsilon(1e-10));
    CHECK(angles(1) == doctest::Approx(b).epsilon(1e-10));
    CHECK(grassmann_distance(uu, vv) ==
          doctest::Approx(std::sqrt(pi * pi / 36 + pi * pi / 9)).epsilon(1e-10));
    CHECK(grassmann_distance(uu, vv, GrassmannMetric::Chordal) ==
          doctest::Approx(std::sqrt(std::pow(std::sin(a), 2) + std::pow(std::sin(b), 2)))
              .epsilon(1e-10));
}

TEST_CASE("grassmann_distance: pseudometric on random triples") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const Matrix u = random_orthonormal(6, 2, seed);
        const Matrix v = random_orthonormal(6, 2, seed + 1000);
        const Matrix w = random_orthonormal(6, 2, seed + 2000);
        CHECK(grassmann_distance(u, u) < 1e-8);
        CHECK(grassmann_distance(u, v) == doctest::Approx(grassmann_distance(v, u)).epsilon(1e-12));
        CHECK(grassmann_distance(u, w) <= grassmann_distance(u, v) + grassmann_distance(v, w) + 1e-6);
        CHECK(grassmann_distance(u, v) <= std::sqrt(2.0) * pi / 2 + 1e-12);
    }
}

TEST_CASE("procrustes_subspace_error: alignment is absorbed") {
    const Matrix q = random_orthonormal(8, 3, 5);
    CHECK(procrustes_subspace_error(q, q) < 1e-12);
    for (std::uint64_t seed = 0; seed < 10; ++seed)
        CHECK(procrustes_subspace_error(q * random_rotation(3, seed), q) < 1e-8);
}

TEST_CASE("procrustes_subspace_error: unit vectors at 60 degrees") {
    const double theta = pi / 3;
    Matrix qhat(2, 1), qstar(2, 1);
    qhat << 1, 0;
    qstar << std::cos(theta), std::sin(theta);
    // Brute force over O(1) = {+1, -1}.
    const double brute = std::min((qhat - qstar).norm(), (-qhat - qstar).norm());
    CHECK(brute == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(procrustes_subspace_error(qhat, qstar) == doctest::Approx(brute).epsilon(1e-12));
}

TEST_CASE("procrustes_subspace_error: closed form and rotation-grid oracle") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        for (Eigen::Index r : {1, 2}) {
            const Matrix qhat = random_orthonormal(6, r, seed);
            const Matrix qstar = random_orthonormal(6, r, seed + 300);
            const double value = procrustes_subspace_error(qhat, qstar);

            const double nuc = nuclear_norm(Matrix(qhat.transpose() * qstar));
            CHECK(value == doctest::Approx(std::sqrt(2.0 * r - 2.0 * nuc)).epsilon(1e-9));

            double grid = std::numeric_limits<double>::infinity();
            if (r == 1) {
                grid = std::min((qhat - qstar).norm(), (-qhat - qstar).norm());
            } else {
                constexpr int steps = 20000;
                for (int s = 0; s < steps; ++s) {
                    const double t = 2 * pi * s / steps;
                    Matrix rot(2, 2), ref(2, 2);
                    rot << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
                    ref << std::cos(t), std::sin(t), std::sin(t), -std::cos(t);
                    grid = std::min({grid, (qhat * rot - qstar).norm(), (qhat * ref - qstar).norm()});
                }
            }
            CHECK(std::abs(value - grid) < 1e-4);
            CHECK(value <= grid + 1e-12);
        }
    }
}

TEST_CASE("procrustes_subspace_error: shape mismatch") {
    CHECK_THROWS_AS(procrustes_subspace_error(random_orthonormal(5, 2, 1), random_orthonormal(5, 1, 2)),
                    ValidationError);
}

TEST_CASE("numerical_rank ignores values below the relative cut") {
    Vector s(4);
    s << 10.0, 1.0, 1e-10, 1e-14;
    CHECK(numerical_rank<double>(s) == 3);
    CHECK(numerical_rank<double>(s, 1e-6) == 2);
}
