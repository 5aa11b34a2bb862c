#include "game/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "game/parallel.hpp"

namespace game {

namespace {

constexpr double weight_sum_tolerance = 1e-10;
constexpr std::size_t stall_window = 3;

void require_shape(const Matrix& a, const ObservationMask& mask, const char* who) {
    require(static_cast<std::size_t>(a.rows()) == mask.rows() &&
                static_cast<std::size_t>(a.cols()) == mask.cols(),
            std::string(who) + ": matrix is " + std::to_string(a.rows()) + " x " +
                std::to_string(a.cols()) + " but mask is " + std::to_string(mask.rows()) + " x " +
                std::to_string(mask.cols()));
}

// X restricted to observed cells with zeros elsewhere; unobserved entries may
// hold NaN placeholders.
Matrix observed_part(const Matrix& x, const ObservationMask& mask, const char* who) {
    require_shape(x, mask, who);
    Matrix out = Matrix::Zero(x.rows(), x.cols());
    for (std::size_t idx : mask.linear()) {
        const auto i = static_cast<Eigen::Index>(idx / mask.cols());
        const auto j = static_cast<Eigen::Index>(idx % mask.cols());
        require(std::isfinite(x(i, j)), std::string(who) + ": observed entry (" +
                                            std::to_string(i) + ", " + std::to_string(j) +
                                            ") is not finite");
        out(i, j) = x(i, j);
    }
    return out;
}

double relative_change(double previous, double current) {
    const double scale = std::max(std::abs(previous), std::numeric_limits<double>::min());
    return std::abs(current - previous) / scale;
}

bool stalled(const std::vector<double>& trace, double rel_tol) {
    if (trace.size() < stall_window + 1) return false;
    for (std::size_t k = trace.size() - stall_window; k < trace.size(); ++k)
        if (relative_change(trace[k - 1], trace[k]) >= rel_tol) return false;
    return true;
}

double next_momentum(double eta) { return 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * eta * eta)); }

void check_finite_iterate(const Matrix& w, std::size_t iteration) {
    if (!w.allFinite())
        throw DivergenceError(iteration, "iterate " + std::to_string(iteration) +
                                             " is not finite (divergence)");
}

void validate_common(double lambda, double gamma, double rel_tol, const char* who) {
    require(std::isfinite(lambda) && lambda >= 0.0, std::string(who) + ": lambda must be >= 0");
    require(gamma > 0.0 && gamma <= 1.0, std::string(who) + ": gamma must lie in (0, 1]");
    require(rel_tol > 0.0, std::string(who) + ": rel_tol must be > 0");
}

void require_weights(std::span<const double> alphas, std::size_t categories, const char* who) {
    require(alphas.size() == categories,
            std::string(who) + ": need one weight per category (" + std::to_string(categories) +
                "), got " + std::to_string(alphas.size()));
    double total = 0.0;
    for (double a : alphas) {
        require(std::isfinite(a) && a >= 0.0, std::string(who) + ": weights must be >= 0");
        total += a;
    }
    require(std::abs(total - 1.0) <= weight_sum_tolerance,
            std::string(who) + ": weights must sum to 1 (sum = " + std::to_string(total) + ")");
}

// Per-block prox with optional randomized truncation. Returns the SVT of the
// block; the caller blends it into the full matrix.
struct BlockThresholder {
    std::optional<Eigen::Index> trunc_rank;
    std::uint64_t seed = 0;

    Matrix operator()(const Matrix& block, double tau, std::uint64_t salt) const {
        const Eigen::Index min_dim = std::min(block.rows(), block.cols());
        if (trunc_rank && min_dim > 2 * *trunc_rank) {
            const auto svd = svd_truncated(block, *trunc_rank, tolerances::oversample,
                                           tolerances::power_iters, seed ^ splitmix64(salt));
            return soft_threshold(svd, tau);
        }
        return soft_threshold(svd_full(block), tau);
    }
};

Matrix prox_average(const GroupStructure& g, const Matrix& z, double tau,
                    std::span<const double> alphas, unsigned threads,
                    const BlockThresholder& threshold, std::uint64_t iteration) {
    const std::size_t count = g.size();
    std::vector<Matrix> corrections(count);
    parallel_for(count, threads, [&](std::size_t c) {
        if (alphas[c] == 0.0 || tau == 0.0) return;
        const Matrix block = extract_rows(g, c, z);
        corrections[c] = threshold(block, tau, iteration * count + c) - block;
    });
    // Ordered reduction: W = Z + sum_c alpha_c D_c^T (SVT(Z_c) - Z_c).
    Matrix w = z;
    for (std::size_t c = 0; c < count; ++c) {
        if (corrections[c].size() == 0) continue;
        const auto& rows = g.category(c).rows;
        for (std::size_t k = 0; k < rows.size(); ++k)
            w.row(static_cast<Eigen::Index>(rows[k])) +=
                alphas[c] * corrections[c].row(static_cast<Eigen::Index>(k));
    }
    return w;
}

} // namespace

double loss_value(const Matrix& x, const ObservationMask& mask, const Matrix& w) {
    require_shape(w, mask, "loss_value");
    const Matrix residual = project_observed(mask, w) - observed_part(x, mask, "loss_value");
    return 0.5 * residual.squaredNorm();
}

Matrix loss_gradient(const Matrix& x, const ObservationMask& mask, const Matrix& w) {
    require_shape(w, mask, "loss_gradient");
    return project_observed(mask, w) - observed_part(x, mask, "loss_gradient");
}

double objective(const Matrix& x, const ObservationMask& mask, const GroupStructure& g,
                 std::span<const double> lambdas, const Matrix& w) {
    require(lambdas.size() == g.size(), "objective: one lambda per category required");
    require(g.n() == mask.rows(), "objective: groups and mask disagree on n");
    double penalty = 0.0;
    for (std::size_t c = 0; c < g.size(); ++c) {
        require(lambdas[c] >= 0.0, "objective: lambdas must be >= 0");
        if (lambdas[c] == 0.0) continue;
        penalty += lambdas[c] * nuclear_norm(extract_rows(g, c, w));
    }
    return loss_value(x, mask, w) + penalty;
}

Matrix prox_group(const GroupStructure& g, std::size_t index, const Matrix& z, double tau) {
    require(tau >= 0.0, "prox_group: tau must be >= 0");
    Matrix out = z;
    if (tau == 0.0) return out;
    const Matrix shrunk = soft_threshold_svd(extract_rows(g, index, z), tau);
    const auto& rows = g.category(index).rows;
    for (std::size_t k = 0; k < rows.size(); ++k)
        out.row(static_cast<Eigen::Index>(rows[k])) = shrunk.row(static_cast<Eigen::Index>(k));
    return out;
}

Matrix prox_group(const GroupStructure& g, const std::string& id, const Matrix& z, double tau) {
    return prox_group(g, g.index_of(id), z, tau);
}

Matrix prox_average_step(const GroupStructure& g, const Matrix& z, double gamma, double lambda,
                         std::span<const double> alphas, unsigned threads) {
    require_weights(alphas, g.size(), "prox_average_step");
    require(gamma > 0.0 && lambda >= 0.0, "prox_average_step: need gamma > 0 and lambda >= 0");
    require(static_cast<std::size_t>(z.rows()) == g.n(),
            "prox_average_step: matrix rows do not match groups");
    return prox_average(g, z, lambda * gamma, alphas, threads, BlockThresholder{}, 0);
}

double step_size_from_accuracy(const GroupStructure& g, std::span<const double> lambdas,
                               std::size_t m, double epsilon) {
    require(epsilon > 0.0, "step_size_from_accuracy: epsilon must be > 0");
    require(lambdas.size() == g.size(), "step_size_from_accuracy: one lambda per category");
    require(m >= 1, "step_size_from_accuracy: m must be >= 1");
    const auto [lambda, alphas] = split_penalties(lambdas);
    double lbar_sq = 0.0;
    for (std::size_t c = 0; c < g.size(); ++c) {
        const double r = static_cast<double>(std::min(g.category(c).rows.size(), m));
        lbar_sq += alphas[c] * lambda * lambda * r;
    }
    if (lbar_sq == 0.0) return 1.0;
    return std::min(1.0, 2.0 * epsilon / lbar_sq);
}

Matrix clip_spikiness(const Matrix& w, double alpha_star) {
    require(alpha_star >= 1.0, "clip_spikiness: alpha* must be >= 1");
    const double bound =
        alpha_star / std::sqrt(static_cast<double>(w.rows()) * static_cast<double>(w.cols()));
    return w.cwiseMax(-bound).cwiseMin(bound);
}

CompletionResult solve_game(const Matrix& x, const ObservationMask& mask, const GroupStructure& g,
                            const SolverConfig& config) {
    validate_common(config.lambda, config.gamma, config.rel_tol, "solve_game");
    validate_cover(g);
    require(g.n() == mask.rows(), "solve_game: groups and mask disagree on n");
    const std::vector<double> alphas = config.alphas.empty() ? g.weights() : config.alphas;
    require_weights(alphas, g.size(), "solve_game");
    if (config.trunc_rank) require(*config.trunc_rank >= 1, "solve_game: trunc_rank must be >= 1");
    if (config.spikiness_alpha)
        require(*config.spikiness_alpha >= 1.0, "solve_game: spikiness alpha* must be >= 1");

    const Matrix x_obs = observed_part(x, mask, "solve_game");
    std::vector<double> lambdas(alphas.size());
    for (std::size_t c = 0; c < alphas.size(); ++c) lambdas[c] = config.lambda * alphas[c];
    auto evaluate = [&](const Matrix& w) {
        double value = 0.5 * (project_observed(mask, w) - x_obs).squaredNorm();
        for (std::size_t c = 0; c < g.size(); ++c)
            if (lambdas[c] > 0.0) value += lambdas[c] * nuclear_norm(extract_rows(g, c, w));
        return value;
    };

    Matrix w_prev = Matrix::Zero(x.rows(), x.cols());
    if (config.warm_start) {
        require_shape(*config.warm_start, mask, "solve_game warm start");
        require(config.warm_start->allFinite(), "solve_game: warm start has non-finite entries");
        w_prev = *config.warm_start;
    }
    Matrix y = w_prev;
    const BlockThresholder threshold{config.trunc_rank, config.seed};
    const double tau = config.lambda * config.gamma;

    CompletionResult result;
    result.objective_trace.push_back(evaluate(w_prev));
    double eta = 1.0;
    int increases = 0;
    Matrix w = w_prev;

    for (std::size_t k = 1; k <= config.max_iters; ++k) {
        const Matrix z = y - config.gamma * (project_observed(mask, y) - x_obs);
        w = prox_average(g, z, tau, alphas, std::max(1u, config.threads), threshold, k);
        if (config.spikiness_alpha) w = clip_spikiness(w, *config.spikiness_alpha);
        check_finite_iterate(w, k);

        const double value = evaluate(w);
        const double previous = result.objective_trace.back();
        result.objective_trace.push_back(value);
        result.iters_run = k;
        if (config.keep_iterates) result.iterates.push_back(w);

        if (config.accelerate) {
            increases = value > previous ? increases + 1 : 0;
            if (increases >= 2) {
                eta = 1.0;
                increases = 0;
            }
            const double eta_next = next_momentum(eta);
            y = w + ((eta - 1.0) / eta_next) * (w - w_prev);
            eta = eta_next;
        } else {
            y = w;
        }
        w_prev = w;

        if (stalled(result.objective_trace, config.rel_tol)) {
            result.converged = true;
            break;
        }
    }
    result.W_hat = w;

    if (config.per_category_svd) {
        for (std::size_t c = 0; c < g.size(); ++c) {
            const Matrix block = extract_rows(g, c, result.W_hat);
            const Eigen::Index min_dim = std::min(block.rows(), block.cols());
            ThinSVD<double> svd = (config.trunc_rank && min_dim > 2 * *config.trunc_rank)
                                      ? svd_truncated(block, *config.trunc_rank,
                                                      tolerances::oversample,
                                                      tolerances::power_iters, config.seed)
                                      : svd_full(block);
            result.per_category_svd.push_back({g.category(c).id, std::move(svd)});
        }
    }
    return result;
}

CompletionResult solve_global_svt(const Matrix& x, const ObservationMask& mask,
                                  const SvtOptions& options) {
    validate_common(options.lambda, options.gamma, options.rel_tol, "solve_global_svt");
    const Matrix x_obs = observed_part(x, mask, "solve_global_svt");
    const Matrix& selector = mask.indicator();

    auto value_of = [&](const Matrix& w) {
        const double fit = 0.5 * (w.cwiseProduct(selector) - x_obs).squaredNorm();
        return options.lambda > 0.0 ? fit + options.lambda * singular_values(w).sum() : fit;
    };

    Matrix previous = Matrix::Zero(x.rows(), x.cols());
    if (options.warm_start) {
        require_shape(*options.warm_start, mask, "solve_global_svt warm start");
        require(options.warm_start->allFinite(), "solve_global_svt: warm start has non-finite entries");
        previous = *options.warm_start;
    }
    Matrix extrapolated = previous;
    Matrix current = previous;

    CompletionResult result;
    result.objective_trace.push_back(value_of(previous));
    double t = 1.0;
    int rises = 0;

    for (std::size_t k = 1; k <= options.max_iters; ++k) {
        const Matrix grad_step =
            extrapolated - options.gamma * (extrapolated.cwiseProduct(selector) - x_obs);
        current = options.lambda > 0.0
                      ? soft_threshold_svd(grad_step, options.lambda * options.gamma)
                      : grad_step;
        check_finite_iterate(current, k);

        const double value = value_of(current);
        const bool rose = value > result.objective_trace.back();
        result.objective_trace.push_back(value);
        result.iters_run = k;
        if (options.keep_iterates) result.iterates.push_back(current);

        if (options.accelerate) {
            rises = rose ? rises + 1 : 0;
            if (rises >= 2) {
                t = 1.0;
                rises = 0;
            }
            const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
            extrapolated = current + ((t - 1.0) / t_next) * (current - previous);
            t = t_next;
        } else {
            extrapolated = current;
        }
        previous = current;

        if (stalled(result.objective_trace, options.rel_tol)) {
            result.converged = true;
            break;
        }
    }
    result.W_hat = current;
    return result;
}

} // namespace game
