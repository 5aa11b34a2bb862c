#pragma once

// Group-aware matrix completion:
//
//   minimize  1/2 ||P_Omega(X - W)||_F^2 + lambda * sum_c alpha_c ||W_c||_*
//
// where W_c are (possibly overlapping) row blocks. The penalty has no closed
// form prox, so the solver replaces it by its proximal average: a convex
// combination of the per-block proxes, each of which is singular value
// thresholding applied to the block and the identity elsewhere. Iterating a
// gradient step on the loss followed by this averaged prox gives PA-PG;
// adding FISTA momentum gives PA-APG.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "game/groups.hpp"
#include "game/linalg.hpp"
#include "game/observation.hpp"

namespace game {

struct SolverConfig {
    double lambda = 1.0;
    /// Block weights alpha_c summing to one; empty means the group weights.
    std::vector<double> alphas;
    /// Step size in (0, 1]; the loss gradient is 1-Lipschitz.
    double gamma = 1.0;
    std::size_t max_iters = 500;
    /// Stop once the relative objective change stays below this for three
    /// consecutive iterations.
    double rel_tol = 1e-6;
    /// Randomized per-block SVD of this rank; exact SVD when unset or when
    /// min(n_c, m) <= 2 * trunc_rank.
    std::optional<Eigen::Index> trunc_rank;
    /// Clamp every iterate to ||W||_inf <= alpha* / sqrt(n m).
    std::optional<double> spikiness_alpha;
    bool accelerate = true;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::optional<Matrix> warm_start;
    bool keep_iterates = false;
    bool per_category_svd = false;
};

struct CategorySVD {
    std::string id;
    ThinSVD<double> svd;
};

struct CompletionResult {
    Matrix W_hat;
    /// Objective at W_0 followed by one value per iteration.
    std::vector<double> objective_trace;
    std::size_t iters_run = 0;
    bool converged = false;
    std::vector<CategorySVD> per_category_svd;
    /// W_1, W_2, ... when keep_iterates is set.
    std::vector<Matrix> iterates;
};

/// 1/2 ||P_Omega(X - W)||_F^2. Unobserved entries of X are ignored (may be NaN).
double loss_value(const Matrix& x, const ObservationMask& mask, const Matrix& w);
/// P_Omega(W - X).
Matrix loss_gradient(const Matrix& x, const ObservationMask& mask, const Matrix& w);

/// Loss plus sum_c lambda_c ||W_c||_*.
double objective(const Matrix& x, const ObservationMask& mask, const GroupStructure& g,
                 std::span<const double> lambdas, const Matrix& w);

/// Prox of tau ||D_c . ||_*: rows in I_c replaced by SVT of the block.
Matrix prox_group(const GroupStructure& g, const std::string& id, const Matrix& z, double tau);
Matrix prox_group(const GroupStructure& g, std::size_t index, const Matrix& z, double tau);

/// sum_c alpha_c prox_group(c, Z, lambda * gamma).
Matrix prox_average_step(const GroupStructure& g, const Matrix& z, double gamma, double lambda,
                         std::span<const double> alphas, unsigned threads = 1);

/// min{1, 2 eps / Lbar^2} with Lbar^2 = sum_c alpha_c (lambda sqrt(min(n_c, m)))^2,
/// where lambda = sum_c lambda_c and alpha_c = lambda_c / lambda.
double step_size_from_accuracy(const GroupStructure& g, std::span<const double> lambdas,
                               std::size_t m, double epsilon);

/// Entrywise clamp to [-alpha*/sqrt(nm), alpha*/sqrt(nm)].
Matrix clip_spikiness(const Matrix& w, double alpha_star);

/// PA-APG (accelerate) or PA-PG.
CompletionResult solve_game(const Matrix& x, const ObservationMask& mask, const GroupStructure& g,
                            const SolverConfig& config);

struct SvtOptions {
    double lambda = 1.0;
    double gamma = 1.0;
    std::size_t max_iters = 500;
    double rel_tol = 1e-6;
    bool accelerate = true;
    std::optional<Matrix> warm_start;
    bool keep_iterates = false;
};

/// Proximal gradient / FISTA on 1/2 ||P_Omega(X - W)||^2 + lambda ||W||_*.
CompletionResult solve_global_svt(const Matrix& x, const ObservationMask& mask,
                                  const SvtOptions& options);

} // namespace game
