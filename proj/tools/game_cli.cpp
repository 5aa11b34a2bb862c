// game: command-line front end for group-aware matrix completion.
//
// Subcommands: complete, synth, mask, calibrate, eval, replay.
// Exit codes: 0 success, 1 numerical failure, 2 input or usage error.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "game/evalbench.hpp"
#include "game/groups.hpp"
#include "game/io.hpp"
#include "game/observation.hpp"
#include "game/parallel.hpp"
#include "game/solver.hpp"

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr int exit_ok = 0;
constexpr int exit_numerical = 1;
constexpr int exit_usage = 2;

/// Usage problems detected after CLI11 parsing.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

fs::path with_suffix(const std::string& prefix, const std::string& suffix) {
    return fs::path(prefix + suffix);
}

void write_json(const fs::path& path, const json& value) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw game::io::ParseError("cannot write '" + path.string() + "'");
    out << value.dump(2) << '\n';
}

unsigned resolve_threads(unsigned flag) {
    if (const char* env = std::getenv("GAME_THREADS")) {
        try {
            const int v = std::stoi(env);
            if (v >= 1) return static_cast<unsigned>(v);
        } catch (const std::exception&) {
        }
        throw UsageError("GAME_THREADS must be a positive integer");
    }
    return flag == 0 ? game::hardware_threads() : flag;
}

game::ObservationMask load_mask_for(const game::io::LoadedMatrix& loaded,
                                    const std::string& mask_path) {
    if (mask_path.empty()) return loaded.observed;
    const game::io::Shape shape{static_cast<std::size_t>(loaded.values.rows()),
                                static_cast<std::size_t>(loaded.values.cols())};
    auto mask = game::io::read_mask(mask_path, shape);
    const auto missing = game::mask_difference(mask, loaded.observed);
    if (!missing.is_empty()) {
        const auto c = missing.cells().front();
        throw game::io::ParseError("mask lists cell (" + std::to_string(c.row) + ", " +
                                   std::to_string(c.col) + ") that has no value in the matrix");
    }
    return mask;
}

std::vector<std::size_t> parse_row_set(const std::string& spec) {
    std::vector<std::size_t> rows;
    std::stringstream in(spec);
    std::string part;
    auto to_index = [&](const std::string& s) {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(s, &pos);
        if (pos != s.size()) throw UsageError("bad row index '" + s + "' in --block-rows");
        return static_cast<std::size_t>(v);
    };
    try {
        while (std::getline(in, part, ',')) {
            if (part.empty()) continue;
            const auto dash = part.find('-');
            if (dash == std::string::npos) {
                rows.push_back(to_index(part));
            } else {
                const auto lo = to_index(part.substr(0, dash));
                const auto hi = to_index(part.substr(dash + 1));
                if (hi < lo) throw UsageError("empty range '" + part + "' in --block-rows");
                for (std::size_t r = lo; r <= hi; ++r) rows.push_back(r);
            }
        }
    } catch (const std::invalid_argument&) {
        throw UsageError("cannot parse --block-rows '" + spec + "'");
    } catch (const std::out_of_range&) {
        throw UsageError("row index too large in --block-rows '" + spec + "'");
    }
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    return rows;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

// ---------------------------------------------------------------------------

struct CompleteOptions {
    std::string matrix, mask, groups, out;
    std::optional<double> lambda;
    std::string weights = "heuristic";
    double sigma = 1.0, R = 0.0, scale = 1.0;
    double gamma = 1.0;
    std::optional<double> epsilon;
    std::size_t max_iters = 500;
    double rel_tol = 1e-6;
    std::optional<long> trunc_rank;
    std::optional<double> spikiness;
    bool pg = false;
    std::string baseline = "none";
    bool allow_uncovered = false;
    bool svd = false;
};

json svd_to_json(const std::vector<game::CategorySVD>& svds) {
    json out = json::object();
    for (const auto& entry : svds) {
        json v = json::array();
        for (Eigen::Index j = 0; j < entry.svd.V.cols(); ++j) {
            json col = json::array();
            for (Eigen::Index i = 0; i < entry.svd.V.rows(); ++i) col.push_back(entry.svd.V(i, j));
            v.push_back(std::move(col));
        }
        json s = json::array();
        for (Eigen::Index k = 0; k < entry.svd.S.size(); ++k) s.push_back(entry.svd.S(k));
        out[entry.id] = {{"singular_values", std::move(s)}, {"right_vectors", std::move(v)}};
    }
    return out;
}

json run_complete(const CompleteOptions& o, std::uint64_t seed, unsigned threads, json& outputs) {
    const auto loaded = game::io::read_matrix(o.matrix);
    const auto mask = load_mask_for(loaded, o.mask);
    const std::size_t n = mask.rows(), m = mask.cols();
    const game::LambdaRule rule{o.sigma, o.R, o.scale};
    json config;
    game::CompletionResult result;

    if (o.baseline == "svt") {
        const auto all = game::GroupStructure::all_rows(n);
        game::SvtOptions svt;
        svt.lambda = o.lambda.value_or(game::lambda_heuristic(all, mask, rule).front());
        svt.gamma = o.gamma;
        if (o.epsilon) {
            const std::vector<double> single{svt.lambda};
            svt.gamma = game::step_size_from_accuracy(all, single, m, *o.epsilon);
        }
        svt.max_iters = o.max_iters;
        svt.rel_tol = o.rel_tol;
        svt.accelerate = !o.pg;
        result = game::solve_global_svt(loaded.values, mask, svt);
        config = {{"baseline", "svt"}, {"lambda", svt.lambda}, {"gamma", svt.gamma},
                  {"max_iters", svt.max_iters}, {"rel_tol", svt.rel_tol},
                  {"accelerate", svt.accelerate}};
    } else {
        if (o.groups.empty())
            throw UsageError("no groups file given: the row cover cannot be established "
                             "(pass --groups, or --baseline svt for the global solver)");
        auto groups = game::io::read_groups(o.groups, n);
        if (o.allow_uncovered) groups = groups.with_catch_all();
        game::validate_cover(groups);

        game::SolverConfig cfg;
        std::vector<double> alphas;
        double lambda = 0.0;
        if (o.weights == "heuristic") {
            const auto split = game::split_penalties(game::lambda_heuristic(groups, mask, rule));
            alphas = split.alphas;
            lambda = split.lambda;
        } else {
            alphas.assign(groups.size(), 1.0 / static_cast<double>(groups.size()));
            lambda = game::lambda_heuristic(game::GroupStructure::all_rows(n), mask, rule).front();
        }
        cfg.lambda = o.lambda.value_or(lambda);
        cfg.alphas = alphas;
        cfg.gamma = o.gamma;
        if (o.epsilon) {
            std::vector<double> lambdas;
            for (double a : alphas) lambdas.push_back(cfg.lambda * a);
            cfg.gamma = game::step_size_from_accuracy(groups, lambdas, m, *o.epsilon);
        }
        cfg.max_iters = o.max_iters;
        cfg.rel_tol = o.rel_tol;
        if (o.trunc_rank) cfg.trunc_rank = static_cast<Eigen::Index>(*o.trunc_rank);
        cfg.spikiness_alpha = o.spikiness;
        cfg.accelerate = !o.pg;
        cfg.seed = seed;
        cfg.threads = threads;
        cfg.per_category_svd = o.svd;
        result = game::solve_game(loaded.values, mask, groups, cfg);

        json weights = json::object();
        for (std::size_t c = 0; c < groups.size(); ++c) weights[groups.category(c).id] = alphas[c];
        config = {{"baseline", "none"},
                  {"lambda", cfg.lambda},
                  {"weights_rule", o.weights},
                  {"alphas", weights},
                  {"gamma", cfg.gamma},
                  {"max_iters", cfg.max_iters},
                  {"rel_tol", cfg.rel_tol},
                  {"trunc_rank", o.trunc_rank ? json(*o.trunc_rank) : json(nullptr)},
                  {"spikiness_alpha", o.spikiness ? json(*o.spikiness) : json(nullptr)},
                  {"accelerate", cfg.accelerate},
                  {"allow_uncovered", o.allow_uncovered}};
        if (o.svd) {
            const auto svd_path = with_suffix(o.out, "_svd.json");
            write_json(svd_path, svd_to_json(result.per_category_svd));
            outputs["svd"] = svd_path.string();
        }
    }
    config["sigma"] = o.sigma;
    config["R"] = o.R;
    config["scale"] = o.scale;
    config["epsilon"] = o.epsilon ? json(*o.epsilon) : json(nullptr);
    config["threads"] = threads;

    const auto matrix_path = with_suffix(o.out, ".csv");
    const auto trace_path = with_suffix(o.out, "_trace.json");
    game::io::write_matrix(matrix_path, result.W_hat);
    json trace = json::array();
    for (double v : result.objective_trace) trace.push_back(v);
    write_json(trace_path, {{"objective", trace},
                            {"iters_run", result.iters_run},
                            {"converged", result.converged}});
    outputs["matrix"] = matrix_path.string();
    outputs["trace"] = trace_path.string();
    return config;
}

// ---------------------------------------------------------------------------

struct SynthOptions {
    game::SyntheticSpec spec;
    std::string scores = "unit";
    std::string out;
};

json run_synth(SynthOptions o, std::uint64_t seed, json& outputs) {
    o.spec.seed = seed;
    if (o.scores == "unit")
        o.spec.scores = game::ScoreNormalization::UnitNorm;
    else
        o.spec.scores = game::ScoreNormalization::Standardize;
    const auto data = game::generate_crossed_groups(o.spec);

    auto emit_matrix = [&](const char* key, const std::string& suffix, const game::Matrix& m) {
        const auto path = with_suffix(o.out, suffix);
        game::io::write_matrix(path, m);
        outputs[key] = path.string();
    };
    emit_matrix("X", "_X.csv", data.X);
    emit_matrix("signal", "_signal.csv", data.signal);
    emit_matrix("group_component", "_group_component.csv", data.components.group_component);
    emit_matrix("subcluster_component", "_subcluster_component.csv",
                data.components.subcluster_component);
    const auto groups_path = with_suffix(o.out, "_groups.csv");
    game::io::write_groups(groups_path, data.groups);
    outputs["groups"] = groups_path.string();
    const auto hidden_path = with_suffix(o.out, "_hidden_labels.csv");
    game::io::write_labels(hidden_path, data.hidden);
    outputs["hidden_labels"] = hidden_path.string();
    const auto group_labels_path = with_suffix(o.out, "_group_labels.csv");
    game::io::write_labels(group_labels_path, data.group_labels);
    outputs["group_labels"] = group_labels_path.string();

    return {{"n", o.spec.n},
            {"m", o.spec.m},
            {"num_groups", o.spec.num_groups},
            {"num_subclusters", o.spec.num_subclusters},
            {"group_rank", o.spec.group_rank},
            {"subcluster_rank", o.spec.subcluster_rank},
            {"beta", o.spec.beta},
            {"noise_sigma", o.spec.noise_sigma},
            {"scores", o.scores}};
}

// ---------------------------------------------------------------------------

struct MaskOptions {
    std::string matrix, out;
    std::optional<double> keep_prob;
    std::string block_rows;
    std::optional<double> block_drop;
    std::optional<double> holdout;
};

json run_mask(const MaskOptions& o, std::uint64_t seed, json& outputs) {
    if (o.block_rows.empty() != !o.block_drop.has_value())
        throw UsageError("--block-rows and --block-drop must be given together");
    const auto loaded = game::io::read_matrix(o.matrix);
    const auto& base = loaded.observed;
    game::ObservationMask kept = base;
    if (o.keep_prob) kept = game::thin_mask(kept, *o.keep_prob, seed);
    std::vector<std::size_t> block;
    if (o.block_drop) {
        block = parse_row_set(o.block_rows);
        kept = game::mask_block_rows(kept, block, *o.block_drop, seed);
    }

    if (o.keep_prob || o.block_drop) {
        const auto dropped_path = with_suffix(o.out, "_dropped.csv");
        game::io::write_mask(dropped_path, game::mask_difference(base, kept));
        outputs["dropped"] = dropped_path.string();
    }
    const auto train_path = with_suffix(o.out, "_train.csv");
    if (o.holdout) {
        const auto split = game::split_holdout(kept, *o.holdout, seed);
        const auto test_path = with_suffix(o.out, "_test.csv");
        game::io::write_mask(train_path, split.train);
        game::io::write_mask(test_path, split.test);
        outputs["test"] = test_path.string();
    } else {
        game::io::write_mask(train_path, kept);
    }
    outputs["train"] = train_path.string();

    return {{"keep_prob", o.keep_prob ? json(*o.keep_prob) : json(nullptr)},
            {"block_rows", o.block_rows},
            {"block_drop", o.block_drop ? json(*o.block_drop) : json(nullptr)},
            {"holdout", o.holdout ? json(*o.holdout) : json(nullptr)}};
}

// ---------------------------------------------------------------------------

struct CalibrateOptions {
    std::string matrix, mask, groups, out;
    double sigma = 1.0, R = 0.0, scale = 1.0;
    bool allow_uncovered = false;
};

json run_calibrate(const CalibrateOptions& o, json& result) {
    const auto loaded = game::io::read_matrix(o.matrix);
    const auto mask = load_mask_for(loaded, o.mask);
    auto groups = game::io::read_groups(o.groups, mask.rows());
    if (o.allow_uncovered) groups = groups.with_catch_all();
    const auto lambdas = game::lambda_heuristic(groups, mask, {o.sigma, o.R, o.scale});
    result = json::object();
    for (std::size_t c = 0; c < groups.size(); ++c) result[groups.category(c).id] = lambdas[c];
    return {{"sigma", o.sigma}, {"R", o.R}, {"scale", o.scale},
            {"allow_uncovered", o.allow_uncovered}};
}

// ---------------------------------------------------------------------------

struct EvalOptions {
    std::string truth, estimate, test_mask, groups, out;
    std::string metrics = "rmse";
    std::string ranks;
    std::string labels_true, labels_pred;
    std::optional<std::size_t> k;
    std::string grassmann = "geodesic";
};

const std::set<std::string> known_metrics{"rmse", "frobenius", "relative_frobenius",
                                          "subspace", "grassmann", "ari", "nmi"};

json run_eval(const EvalOptions& o, std::uint64_t seed, json& result) {
    const auto names = split_list(o.metrics);
    if (names.empty()) throw UsageError("--metrics is empty");
    for (const auto& name : names)
        if (!known_metrics.count(name)) throw UsageError("unknown metric '" + name + "'");
    const bool want_subspace =
        std::count(names.begin(), names.end(), "subspace") ||
        std::count(names.begin(), names.end(), "grassmann");
    const bool want_labels = std::count(names.begin(), names.end(), "ari") ||
                             std::count(names.begin(), names.end(), "nmi");
    if (std::count(names.begin(), names.end(), "rmse") && o.test_mask.empty())
        throw UsageError("metric 'rmse' needs --test-mask");
    if (want_subspace && o.groups.empty()) throw UsageError("subspace metrics need --groups");
    if (want_labels && o.labels_true.empty())
        throw UsageError("metrics 'ari'/'nmi' need --labels-true");
    if (want_labels && o.labels_pred.empty() && !o.k)
        throw UsageError("metrics 'ari'/'nmi' need --labels-pred or --k");
    if (o.grassmann != "geodesic" && o.grassmann != "chordal")
        throw UsageError("--grassmann must be 'geodesic' or 'chordal'");

    const auto truth = game::io::read_matrix(o.truth);
    const game::io::Shape shape{static_cast<std::size_t>(truth.values.rows()),
                                static_cast<std::size_t>(truth.values.cols())};
    const auto estimate = game::io::read_matrix(o.estimate, shape);
    if (estimate.values.rows() != truth.values.rows() ||
        estimate.values.cols() != truth.values.cols())
        throw game::ValidationError("estimate and truth differ in shape");

    std::vector<Eigen::Index> ranks;
    for (const auto& r : split_list(o.ranks)) ranks.push_back(std::stol(r));

    result = json::object();
    for (const auto& name : names) {
        if (name == "rmse") {
            const auto test = game::io::read_mask(o.test_mask, shape);
            result["rmse"] = game::rmse_on(test, truth.values, estimate.values);
        } else if (name == "frobenius" || name == "relative_frobenius") {
            if (!truth.values.allFinite() || !estimate.values.allFinite())
                throw game::ValidationError(name + " needs fully specified matrices");
            result[name] = name == "frobenius"
                               ? game::frobenius_error(truth.values, estimate.values)
                               : game::relative_frobenius_error(truth.values, estimate.values);
        } else if (name == "subspace" || name == "grassmann") {
            const auto groups = game::io::read_groups(o.groups, shape.rows);
            const auto values =
                name == "subspace"
                    ? game::per_group_subspace_error(groups, truth.values, estimate.values, ranks)
                    : game::per_group_grassmann(groups, truth.values, estimate.values, ranks,
                                                o.grassmann == "chordal"
                                                    ? game::GrassmannMetric::Chordal
                                                    : game::GrassmannMetric::Geodesic);
            json per = json::object();
            for (std::size_t c = 0; c < groups.size(); ++c) per[groups.category(c).id] = values[c];
            result[name] = per;
        } else {
            const auto truth_labels = game::io::read_labels(o.labels_true);
            game::LabelVector predicted;
            if (!o.labels_pred.empty()) {
                predicted = game::io::read_labels(o.labels_pred);
            } else {
                game::KMeansOptions km;
                km.seed = seed;
                predicted = game::kmeans(estimate.values, *o.k, km);
            }
            result[name] = name == "ari"
                               ? game::adjusted_rand_index(truth_labels, predicted)
                               : game::normalized_mutual_information(truth_labels, predicted);
        }
    }
    return {{"metrics", o.metrics},
            {"ranks", o.ranks},
            {"k", o.k ? json(*o.k) : json(nullptr)},
            {"grassmann", o.grassmann}};
}

// ---------------------------------------------------------------------------

int run(std::vector<std::string> args);

int dispatch(const std::vector<std::string>& args) {
    CLI::App app{"Group-aware matrix completion", "game"};
    app.require_subcommand(1);
    std::uint64_t seed = 0;
    unsigned threads_flag = 0;
    std::string manifest_path;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", seed, "Seed for every random choice")->capture_default_str();
        sub->add_option("--threads", threads_flag,
                        "Worker threads (0 = hardware); GAME_THREADS overrides");
        sub->add_option("--manifest", manifest_path, "Manifest path (default: <out>_manifest.json)");
    };

    CompleteOptions co;
    auto* complete = app.add_subcommand("complete", "Complete a partially observed matrix");
    complete->add_option("--matrix", co.matrix, "Dense or triplet CSV")->required();
    complete->add_option("--mask", co.mask, "Observed cells (row,col); default: non-blank cells");
    complete->add_option("--groups", co.groups, "Row categories (row,category)");
    complete->add_option("--out", co.out, "Output prefix")->required();
    complete->add_option("--lambda", co.lambda, "Global penalty (default: heuristic)");
    complete->add_option("--weights", co.weights, "Category weights: heuristic|uniform")
        ->check(CLI::IsMember({"heuristic", "uniform"}))
        ->capture_default_str();
    complete->add_option("--sigma", co.sigma)->capture_default_str();
    complete->add_option("--R", co.R)->capture_default_str();
    complete->add_option("--scale", co.scale)->capture_default_str();
    complete->add_option("--gamma", co.gamma, "Step size in (0, 1]")->capture_default_str();
    complete->add_option("--epsilon", co.epsilon, "Target accuracy; sets gamma");
    complete->add_option("--max-iters", co.max_iters)->capture_default_str();
    complete->add_option("--rel-tol", co.rel_tol)->capture_default_str();
    complete->add_option("--trunc-rank", co.trunc_rank, "Randomized per-category SVD rank");
    complete->add_option("--spikiness", co.spikiness, "Clamp |W_ij| <= alpha*/sqrt(nm)");
    complete->add_flag("--pg", co.pg, "Plain proximal gradient (no momentum)");
    complete->add_option("--baseline", co.baseline, "none|svt")
        ->check(CLI::IsMember({"none", "svt"}))
        ->capture_default_str();
    complete->add_flag("--allow-uncovered", co.allow_uncovered,
                       "Put uncovered rows in a synthetic catch-all category");
    complete->add_flag("--svd", co.svd, "Write per-category SVDs of the estimate");
    add_common(complete);

    SynthOptions so;
    auto* synth = app.add_subcommand("synth", "Generate crossed-group synthetic data");
    synth->add_option("--n", so.spec.n)->capture_default_str();
    synth->add_option("--m", so.spec.m)->capture_default_str();
    synth->add_option("--groups", so.spec.num_groups)->capture_default_str();
    synth->add_option("--subclusters", so.spec.num_subclusters)->capture_default_str();
    synth->add_option("--group-rank", so.spec.group_rank)->capture_default_str();
    synth->add_option("--subcluster-rank", so.spec.subcluster_rank)->capture_default_str();
    synth->add_option("--beta", so.spec.beta)->capture_default_str();
    synth->add_option("--noise", so.spec.noise_sigma)->capture_default_str();
    synth->add_option("--scores", so.scores, "unit|standardize")
        ->check(CLI::IsMember({"unit", "standardize"}))
        ->capture_default_str();
    synth->add_option("--out", so.out, "Output prefix")->required();
    add_common(synth);

    MaskOptions mo;
    auto* mask = app.add_subcommand("mask", "Build observation masks");
    mask->add_option("--matrix", mo.matrix)->required();
    mask->add_option("--keep-prob", mo.keep_prob, "Keep each observed cell with this probability");
    mask->add_option("--block-rows", mo.block_rows, "Rows to block-mask, e.g. 0-49,60");
    mask->add_option("--block-drop", mo.block_drop, "Drop probability inside block rows");
    mask->add_option("--holdout", mo.holdout, "Fraction of kept cells moved to the test mask");
    mask->add_option("--out", mo.out, "Output prefix")->required();
    add_common(mask);

    CalibrateOptions ca;
    auto* calibrate = app.add_subcommand("calibrate", "Per-category penalties from the sampling rule");
    calibrate->add_option("--matrix", ca.matrix)->required();
    calibrate->add_option("--mask", ca.mask);
    calibrate->add_option("--groups", ca.groups)->required();
    calibrate->add_option("--sigma", ca.sigma)->capture_default_str();
    calibrate->add_option("--R", ca.R)->capture_default_str();
    calibrate->add_option("--scale", ca.scale)->capture_default_str();
    calibrate->add_option("--out", ca.out, "Also write the JSON to <out>.json");
    calibrate->add_flag("--allow-uncovered", ca.allow_uncovered);
    add_common(calibrate);

    EvalOptions eo;
    auto* eval = app.add_subcommand("eval", "Evaluate an estimate");
    eval->add_option("--truth", eo.truth)->required();
    eval->add_option("--estimate", eo.estimate)->required();
    eval->add_option("--test-mask", eo.test_mask);
    eval->add_option("--groups", eo.groups);
    eval->add_option("--metrics", eo.metrics,
                     "Comma list of rmse,frobenius,relative_frobenius,subspace,grassmann,ari,nmi")
        ->capture_default_str();
    eval->add_option("--ranks", eo.ranks, "Per-category subspace ranks, comma separated");
    eval->add_option("--labels-true", eo.labels_true);
    eval->add_option("--labels-pred", eo.labels_pred);
    eval->add_option("--k", eo.k, "Cluster estimate rows with k-means when no --labels-pred");
    eval->add_option("--grassmann", eo.grassmann, "geodesic|chordal")->capture_default_str();
    eval->add_option("--out", eo.out, "Also write the JSON to <out>.json");
    add_common(eval);

    std::string replay_path;
    auto* replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
    replay->add_option("manifest", replay_path)->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    if (replay->parsed()) {
        std::ifstream in(replay_path);
        if (!in) throw game::io::ParseError("cannot open manifest '" + replay_path + "'");
        const json manifest = json::parse(in);
        return run(manifest.at("argv").get<std::vector<std::string>>());
    }

    const auto started = std::chrono::steady_clock::now();
    json outputs = json::object();
    json inputs = json::object();
    json config;
    std::string command;
    std::string out_prefix;
    const unsigned threads = resolve_threads(threads_flag);

    if (complete->parsed()) {
        command = "complete";
        out_prefix = co.out;
        inputs = {{"matrix", co.matrix}, {"mask", co.mask}, {"groups", co.groups}};
        config = run_complete(co, seed, threads, outputs);
    } else if (synth->parsed()) {
        command = "synth";
        out_prefix = so.out;
        config = run_synth(so, seed, outputs);
    } else if (mask->parsed()) {
        command = "mask";
        out_prefix = mo.out;
        inputs = {{"matrix", mo.matrix}};
        config = run_mask(mo, seed, outputs);
    } else if (calibrate->parsed()) {
        command = "calibrate";
        out_prefix = ca.out;
        inputs = {{"matrix", ca.matrix}, {"mask", ca.mask}, {"groups", ca.groups}};
        json lambdas;
        config = run_calibrate(ca, lambdas);
        std::cout << lambdas.dump(2) << '\n';
        if (!ca.out.empty()) {
            write_json(with_suffix(ca.out, ".json"), lambdas);
            outputs["lambdas"] = with_suffix(ca.out, ".json").string();
        }
    } else if (eval->parsed()) {
        command = "eval";
        out_prefix = eo.out;
        inputs = {{"truth", eo.truth}, {"estimate", eo.estimate}, {"test_mask", eo.test_mask},
                  {"groups", eo.groups}, {"labels_true", eo.labels_true},
                  {"labels_pred", eo.labels_pred}};
        json metrics;
        config = run_eval(eo, seed, metrics);
        std::cout << metrics.dump(2) << '\n';
        if (!eo.out.empty()) {
            write_json(with_suffix(eo.out, ".json"), metrics);
            outputs["metrics"] = with_suffix(eo.out, ".json").string();
        }
    }

    if (manifest_path.empty() && !out_prefix.empty())
        manifest_path = with_suffix(out_prefix, "_manifest.json").string();
    if (!manifest_path.empty()) {
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        write_json(manifest_path, {{"command", command},
                                   {"argv", args},
                                   {"seed", seed},
                                   {"config", config},
                                   {"inputs", inputs},
                                   {"outputs", outputs},
                                   {"wall_seconds", seconds}});
    }
    return exit_ok;
}

int run(std::vector<std::string> args) {
    try {
        return dispatch(args);
    } catch (const game::DivergenceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_numerical;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return exit_usage;
    } catch (const game::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const game::LookupError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: malformed manifest: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_numerical;
    }
}

} // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(std::move(args));
}
