#include "ndscreen/grid_search.hpp"

#include <algorithm>
#include <cmath>

#include "ndscreen/error.hpp"
#include "ndscreen/rng.hpp"

namespace ndscreen {

std::vector<std::size_t> stratified_folds(std::span<const int> y, std::size_t k,
                                          std::uint64_t seed) {
    if (k == 0 || k > y.size())
        throw ConfigError("cv: fold count " + std::to_string(k) + " invalid for " +
                          std::to_string(y.size()) + " rows");
    Rng rng(seed);
    std::vector<std::size_t> folds(y.size());
    std::size_t deal = 0;
    for (int cls : {1, -1}) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < y.size(); ++i)
            if (y[i] == cls) members.push_back(i);
        for (std::size_t i = members.size(); i > 1; --i)
            std::swap(members[i - 1], members[rng.index(i)]);
        for (std::size_t idx : members) folds[idx] = deal++ % k;
    }
    return folds;
}

CvScore cross_validate_gram(const Matrix& gram, std::span<const int> y,
                            std::span<const std::size_t> folds, std::size_t k, double C,
                            double tol, std::size_t max_iter) {
    CvScore score;
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;
    std::vector<int> train_y;
    for (std::size_t fold = 0; fold < k; ++fold) {
        train_rows.clear();
        test_rows.clear();
        train_y.clear();
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (folds[i] == fold) {
                test_rows.push_back(i);
            } else {
                train_rows.push_back(i);
                train_y.push_back(y[i]);
            }
        }
        if (test_rows.empty()) continue;
        score.total += test_rows.size();

        const bool has_pos = std::find(train_y.begin(), train_y.end(), 1) != train_y.end();
        const bool has_neg = std::find(train_y.begin(), train_y.end(), -1) != train_y.end();
        if (!has_pos || !has_neg) {
            const int only = has_pos ? 1 : -1;
            for (std::size_t t : test_rows) score.correct += y[t] == only ? 1 : 0;
            continue;
        }

        const DualSolution sol = solve_dual(gram_subset(gram, train_rows), train_y, C, tol, max_iter);
        Matrix cross(train_rows.size(), test_rows.size());
        for (std::size_t a = 0; a < train_rows.size(); ++a)
            for (std::size_t b = 0; b < test_rows.size(); ++b)
                cross(a, b) = gram(train_rows[a], test_rows[b]);
        const auto f = decision_values(sol, train_y, cross);
        for (std::size_t b = 0; b < test_rows.size(); ++b) {
            const int pred = f[b] >= 0.0 ? 1 : -1;
            score.correct += pred == y[test_rows[b]] ? 1 : 0;
        }
    }
    return score;
}

Grid Grid::defaults() {
    Grid g;
    for (int e = -5; e <= 15; e += 2) g.C.push_back(std::ldexp(1.0, e));
    for (int e = -15; e <= 3; e += 2) g.gamma.push_back(std::ldexp(1.0, e));
    return g;
}

GridResult grid_search(const Matrix& x, std::span<const int> y, const Grid& grid,
                       std::size_t folds, std::uint64_t seed, const TrainConfig& base) {
    if (grid.C.empty() || grid.gamma.empty()) throw ConfigError("grid: empty C or gamma list");
    if (folds < 2 || folds > y.size())
        throw ConfigError("grid: fold count " + std::to_string(folds) + " invalid for " +
                          std::to_string(y.size()) + " rows");
    if (x.rows() != y.size()) throw ShapeError("grid: rows and labels differ");
    for (double c : grid.C)
        if (!(c > 0.0)) throw ConfigError("grid: C values must be positive");
    for (double g : grid.gamma)
        if (!(g > 0.0)) throw ConfigError("grid: gamma values must be positive");

    auto cs = grid.C;
    auto gammas = grid.gamma;
    std::sort(cs.begin(), cs.end());
    std::sort(gammas.begin(), gammas.end());

    const auto fold_ids = stratified_folds(y, folds, seed);
    const Matrix sq = pairwise_squared_distances(x);
    std::vector<Matrix> grams;
    grams.reserve(gammas.size());
    for (double g : gammas) grams.push_back(rbf_gram(sq, g));

    GridResult best;
    bool have = false;
    for (double c : cs) {
        for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
            const CvScore s =
                cross_validate_gram(grams[gi], y, fold_ids, folds, c, base.tol, base.max_iter);
            if (!have || s.correct > best.score.correct) {
                have = true;
                best.score = s;
                best.config = base;
                best.config.C = c;
                best.config.kernel.gamma = gammas[gi];
            }
        }
    }
    return best;
}

}  // namespace ndscreen
