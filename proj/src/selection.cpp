#include "ndscreen/selection.hpp"

#include <algorithm>

#include <json.hpp>

#include "ndscreen/error.hpp"
#include "ndscreen/parallel.hpp"

namespace ndscreen {

void validate(const SelectionConfig& cfg) {
    if (cfg.max_features == 0) throw ConfigError("selection: max_features must be positive");
    if (cfg.inner_folds < 2) throw ConfigError("selection: inner_folds must be at least 2");
    if (!(cfg.C > 0.0)) throw ConfigError("selection: C must be positive");
    if (!(cfg.tol > 0.0)) throw ConfigError("selection: tol must be positive");
    if (cfg.max_iter == 0) throw ConfigError("selection: max_iter must be positive");
}

SelectionConfig selection_config_from_json(std::string_view text) {
    using nlohmann::json;
    SelectionConfig cfg;
    try {
        const json obj = json::parse(text);
        if (!obj.is_object()) throw ConfigError("selection config must be a JSON object");
        cfg.max_features = obj.value("max_features", cfg.max_features);
        cfg.inner_folds = obj.value("inner_folds", cfg.inner_folds);
        cfg.fold_seed = obj.value("fold_seed", cfg.fold_seed);
        cfg.C = obj.value("C", cfg.C);
        cfg.gamma = obj.value("gamma", cfg.gamma);
        cfg.tol = obj.value("tol", cfg.tol);
        cfg.max_iter = obj.value("max_iter", cfg.max_iter);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("selection config: ") + e.what());
    }
    validate(cfg);
    return cfg;
}

std::string selection_config_to_json(const SelectionConfig& cfg) {
    const nlohmann::json obj = {{"max_features", cfg.max_features}, {"inner_folds", cfg.inner_folds},
                                {"fold_seed", cfg.fold_seed},       {"C", cfg.C},
                                {"gamma", cfg.gamma},               {"tol", cfg.tol},
                                {"max_iter", cfg.max_iter}};
    return obj.dump();
}

SubsetScorer svm_cv_scorer(std::vector<int> y, const SelectionConfig& cfg) {
    const std::size_t k = std::min(cfg.inner_folds, y.size());
    auto folds = stratified_folds(y, k, cfg.fold_seed);
    return [y = std::move(y), folds = std::move(folds), k, cfg](const Matrix& sq, std::size_t dims) {
        const double gamma = cfg.gamma > 0.0 ? cfg.gamma : 1.0 / static_cast<double>(dims);
        return cross_validate_gram(rbf_gram(sq, gamma), y, folds, k, cfg.C, cfg.tol, cfg.max_iter);
    };
}

SelectionResult forward_select(const Matrix& x, std::span<const int> y, const SelectionConfig& cfg,
                               const SubsetScorer& scorer) {
    validate(cfg);
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    if (y.size() != n) throw ShapeError("selection: rows and labels differ");
    if (n < 2) throw DegenerateError("selection: need at least 2 rows");
    const bool has_pos = std::find(y.begin(), y.end(), 1) != y.end();
    const bool has_neg = std::find(y.begin(), y.end(), -1) != y.end();
    if (!has_pos || !has_neg) throw DegenerateError("selection: labels contain a single class");

    SelectionResult result;
    Matrix base(n, n);
    std::vector<bool> taken(d, false);
    long best_correct = -1;

    struct Candidate {
        std::size_t dim;
        CvScore score;
    };

    while (result.selected.size() < std::min(cfg.max_features, d)) {
        std::vector<std::size_t> pool;
        for (std::size_t c = 0; c < d; ++c)
            if (!taken[c]) pool.push_back(c);

        std::vector<CvScore> scores(pool.size());
        const std::size_t dims = result.selected.size() + 1;
        parallel_for(pool.size(), cfg.jobs, [&](std::size_t p) {
            const std::size_t c = pool[p];
            Matrix sq = base;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j) {
                    const double t = x(i, c) - x(j, c);
                    sq(i, j) += t * t;
                    sq(j, i) = sq(i, j);
                }
            scores[p] = scorer(sq, dims);
        });

        Candidate best{pool.front(), scores.front()};
        for (std::size_t p = 1; p < pool.size(); ++p)
            if (scores[p].correct > best.score.correct) best = {pool[p], scores[p]};

        if (static_cast<long>(best.score.correct) <= best_correct) break;

        best_correct = static_cast<long>(best.score.correct);
        taken[best.dim] = true;
        result.selected.push_back(best.dim);
        result.scores.push_back(best.score.accuracy());
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                const double t = x(i, best.dim) - x(j, best.dim);
                base(i, j) += t * t;
                base(j, i) = base(i, j);
            }
    }
    return result;
}

SelectionResult forward_select(const Matrix& x, std::span<const int> y, const SelectionConfig& cfg) {
    validate(cfg);
    return forward_select(x, y, cfg, svm_cv_scorer(std::vector<int>(y.begin(), y.end()), cfg));
}

}  // namespace ndscreen
