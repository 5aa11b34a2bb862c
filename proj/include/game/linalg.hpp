#pragma once

// Dense linear algebra used throughout the solver: SVDs, singular value
// soft-thresholding and subspace geometry. Everything here is templated on
// the scalar type and accepts any Eigen dense expression.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

#include "game/errors.hpp"
#include "game/rng.hpp"

namespace game {

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = DenseMatrix<double>;
using Vector = DenseVector<double>;

namespace tolerances {
/// Orthonormality check used by the subspace functions.
inline constexpr double orthonormal = 1e-6;
/// Singular values below this fraction of sigma_1 count as zero for rank.
inline constexpr double relative_rank = 1e-12;
/// Randomized SVD defaults.
inline constexpr int oversample = 10;
inline constexpr int power_iters = 2;
} // namespace tolerances

template <typename Scalar>
struct ThinSVD {
    DenseMatrix<Scalar> U;
    DenseVector<Scalar> S;
    DenseMatrix<Scalar> V;

    Eigen::Index rank() const { return S.size(); }

    DenseMatrix<Scalar> reconstruct() const {
        return U * S.asDiagonal() * V.transpose();
    }
};

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& a) {
    return a.allFinite();
}

/// Flips each singular pair so the largest-magnitude entry of the left
/// vector is positive (first index wins ties).
template <typename Scalar>
void canonicalize_signs(ThinSVD<Scalar>& svd) {
    for (Eigen::Index j = 0; j < svd.U.cols(); ++j) {
        Eigen::Index arg = 0;
        svd.U.col(j).cwiseAbs().maxCoeff(&arg);
        if (svd.U(arg, j) < Scalar(0)) {
            svd.U.col(j) *= Scalar(-1);
            svd.V.col(j) *= Scalar(-1);
        }
    }
}

/// Thin SVD with k = min(rows, cols), singular values nonincreasing.
template <typename Derived>
ThinSVD<typename Derived::Scalar> svd_full(const Eigen::MatrixBase<Derived>& a) {
    using Scalar = typename Derived::Scalar;
    require(a.rows() >= 1 && a.cols() >= 1, "svd_full: empty matrix");
    require(all_finite(a), "svd_full: matrix has non-finite entries");
    Eigen::BDCSVD<DenseMatrix<Scalar>> solver(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    ThinSVD<Scalar> out{solver.matrixU(), solver.singularValues(), solver.matrixV()};
    canonicalize_signs(out);
    return out;
}

template <typename Derived>
DenseVector<typename Derived::Scalar> singular_values(const Eigen::MatrixBase<Derived>& a) {
    using Scalar = typename Derived::Scalar;
    require(all_finite(a), "singular_values: matrix has non-finite entries");
    Eigen::BDCSVD<DenseMatrix<Scalar>> solver(a);
    return solver.singularValues();
}

template <typename Derived>
typename Derived::Scalar nuclear_norm(const Eigen::MatrixBase<Derived>& a) {
    return singular_values(a).sum();
}

/// Number of singular values above rel * sigma_1.
template <typename Scalar>
Eigen::Index numerical_rank(const DenseVector<Scalar>& s,
                            double rel = tolerances::relative_rank) {
    if (s.size() == 0 || s(0) <= Scalar(0)) return 0;
    const Scalar cut = Scalar(rel) * s(0);
    return static_cast<Eigen::Index>((s.array() > cut).count());
}

namespace detail {

template <typename Scalar>
DenseMatrix<Scalar> orthonormal_basis(const DenseMatrix<Scalar>& y) {
    Eigen::HouseholderQR<DenseMatrix<Scalar>> qr(y);
    return qr.householderQ() * DenseMatrix<Scalar>::Identity(y.rows(), y.cols());
}

} // namespace detail

/// Randomized rank-k SVD (range finder with power iterations). The Gaussian
/// test matrix is drawn from the counter generator, so output depends only on
/// the inputs and the seed.
template <typename Derived>
ThinSVD<typename Derived::Scalar> svd_truncated(const Eigen::MatrixBase<Derived>& a,
                                                Eigen::Index k,
                                                Eigen::Index oversample = tolerances::oversample,
                                                int power_iters = tolerances::power_iters,
                                                std::uint64_t seed = 0) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Index min_dim = std::min(a.rows(), a.cols());
    require(k >= 1 && k <= min_dim,
            "svd_truncated: rank " + std::to_string(k) + " outside [1, " +
                std::to_string(min_dim) + "]");
    require(oversample >= 0 && power_iters >= 0, "svd_truncated: negative oversample/power_iters");
    require(all_finite(a), "svd_truncated: matrix has non-finite entries");

    const DenseMatrix<Scalar> mat = a;
    const Eigen::Index width = std::min(k + oversample, min_dim);
    const CounterRng rng(seed, streams::randomized_svd);
    DenseMatrix<Scalar> test(mat.cols(), width);
    for (Eigen::Index j = 0; j < width; ++j)
        for (Eigen::Index i = 0; i < mat.cols(); ++i)
            test(i, j) = static_cast<Scalar>(
                rng.normal(static_cast<std::uint64_t>(j * mat.cols() + i)));

    DenseMatrix<Scalar> q = detail::orthonormal_basis<Scalar>(mat * test);
    for (int it = 0; it < power_iters; ++it) {
        const DenseMatrix<Scalar> w = detail::orthonormal_basis<Scalar>(mat.transpose() * q);
        q = detail::orthonormal_basis<Scalar>(mat * w);
    }
    const DenseMatrix<Scalar> small = q.transpose() * mat;
    ThinSVD<Scalar> inner = svd_full(small);
    ThinSVD<Scalar> out{(q * inner.U).leftCols(k), inner.S.head(k), inner.V.leftCols(k)};
    canonicalize_signs(out);
    return out;
}

/// U * diag(max(S - tau, 0)) * V^T for an existing decomposition.
template <typename Scalar>
DenseMatrix<Scalar> soft_threshold(const ThinSVD<Scalar>& svd, Scalar tau) {
    const DenseVector<Scalar> shrunk = (svd.S.array() - tau).cwiseMax(Scalar(0)).matrix();
    return svd.U * shrunk.asDiagonal() * svd.V.transpose();
}

/// Proximal map of tau * nuclear norm.
template <typename Derived>
DenseMatrix<typename Derived::Scalar> soft_threshold_svd(const Eigen::MatrixBase<Derived>& a,
                                                         typename Derived::Scalar tau) {
    require(tau >= 0, "soft_threshold_svd: tau must be nonnegative");
    return soft_threshold(svd_full(a), tau);
}

template <typename Derived>
typename Derived::Scalar orthonormality_error(const Eigen::MatrixBase<Derived>& q) {
    using Scalar = typename Derived::Scalar;
    const DenseMatrix<Scalar> gram = q.transpose() * q;
    return (gram - DenseMatrix<Scalar>::Identity(q.cols(), q.cols())).cwiseAbs().maxCoeff();
}

namespace detail {

template <typename DerivedA, typename DerivedB>
void check_subspace_pair(const Eigen::MatrixBase<DerivedA>& u,
                         const Eigen::MatrixBase<DerivedB>& v, const char* who) {
    require(u.rows() == v.rows() && u.cols() == v.cols(),
            std::string(who) + ": bases must have the same shape");
    require(u.cols() >= 1, std::string(who) + ": empty basis");
    require(orthonormality_error(u) <= tolerances::orthonormal &&
                orthonormality_error(v) <= tolerances::orthonormal,
            std::string(who) + ": bases must have orthonormal columns");
}

} // namespace detail

/// Principal angles in radians, nondecreasing, each in [0, pi/2]. Small
/// angles come from the sines and large ones from the cosines, which keeps
/// both ends accurate.
template <typename DerivedA, typename DerivedB>
DenseVector<typename DerivedA::Scalar> principal_angles(const Eigen::MatrixBase<DerivedA>& u,
                                                        const Eigen::MatrixBase<DerivedB>& v) {
    using Scalar = typename DerivedA::Scalar;
    detail::check_subspace_pair(u, v, "principal_angles");
    const Eigen::Index k = u.cols();
    const DenseMatrix<Scalar> cross = u.transpose() * v;
    const DenseVector<Scalar> cosines = singular_values(cross);
    const DenseMatrix<Scalar> residual = v - u * cross;
    // Descending sines pair with ascending angles in reverse.
    DenseVector<Scalar> sines = singular_values(residual);

    DenseVector<Scalar> angles(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        const Scalar c = std::clamp(cosines(i), Scalar(0), Scalar(1));
        if (c * c >= Scalar(0.5)) {
            const Scalar s = std::clamp(sines(k - 1 - i), Scalar(0), Scalar(1));
            angles(i) = std::asin(s);
        } else {
            angles(i) = std::acos(c);
        }
    }
    std::sort(angles.data(), angles.data() + k);
    return angles;
}

enum class GrassmannMetric { Geodesic, Chordal };

/// Geodesic: l2 norm of the principal angles. Chordal: l2 norm of their sines.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar grassmann_distance(const Eigen::MatrixBase<DerivedA>& u,
                                             const Eigen::MatrixBase<DerivedB>& v,
                                             GrassmannMetric metric = GrassmannMetric::Geodesic) {
    const auto angles = principal_angles(u, v);
    if (metric == GrassmannMetric::Chordal) return angles.array().sin().matrix().norm();
    return angles.norm();
}

/// min over orthogonal R of ||Qhat R - Qstar||_F. The minimizer is the polar
/// factor of Qhat^T Qstar; the residual equals sqrt(2r - 2 ||Qhat^T Qstar||_*)
/// but is evaluated directly to avoid cancellation near zero.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar procrustes_subspace_error(const Eigen::MatrixBase<DerivedA>& qhat,
                                                    const Eigen::MatrixBase<DerivedB>& qstar) {
    using Scalar = typename DerivedA::Scalar;
    detail::check_subspace_pair(qhat, qstar, "procrustes_subspace_error");
    const DenseMatrix<Scalar> cross = qhat.transpose() * qstar;
    Eigen::JacobiSVD<DenseMatrix<Scalar>> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const DenseMatrix<Scalar> rotation = svd.matrixU() * svd.matrixV().transpose();
    return (qhat * rotation - qstar).norm();
}

} // namespace game
