#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ndscreen/grid_search.hpp"
#include "ndscreen/matrix.hpp"

namespace ndscreen {

struct SelectionConfig {
    std::size_t max_features = 30;
    std::size_t inner_folds = 5;
    std::uint64_t fold_seed = 0;
    /// SVM settings for the inner scorer. gamma <= 0 means 1 / (number of
    /// dimensions in the candidate subset).
    double C = 1.0;
    double gamma = 0.0;
    double tol = 1e-3;
    std::size_t max_iter = 1'000'000;
    /// Threads for candidate evaluation within a step.
    unsigned jobs = 1;

    friend bool operator==(const SelectionConfig&, const SelectionConfig&) = default;
};

void validate(const SelectionConfig& cfg);

/// Reads `max_features`, `inner_folds`, `fold_seed` and optionally `C`,
/// `gamma`, `tol`, `max_iter`. Missing keys keep their defaults.
SelectionConfig selection_config_from_json(std::string_view text);
std::string selection_config_to_json(const SelectionConfig& cfg);

struct SelectionResult {
    /// Dimension indices in order of addition.
    std::vector<std::size_t> selected;
    /// Inner-CV accuracy after each addition.
    std::vector<double> scores;

    friend bool operator==(const SelectionResult&, const SelectionResult&) = default;
};

/// Scores a candidate subset. The RBF kernel depends on the data only through
/// pairwise squared distances, so scorers receive those (over the subset)
/// plus the subset size.
using SubsetScorer = std::function<CvScore(const Matrix& squared_distances, std::size_t dims)>;

/// Stratified k-fold SVM accuracy with the config's C and gamma;
/// k = min(inner_folds, N).
SubsetScorer svm_cv_scorer(std::vector<int> y, const SelectionConfig& cfg);

/// Greedy forward selection. Each step adds the dimension with the highest
/// scorer result (ties to the lowest index); stops when no candidate strictly
/// improves on the current score or max_features is reached.
/// Throws DegenerateError for fewer than 2 rows or a single class.
SelectionResult forward_select(const Matrix& x, std::span<const int> y, const SelectionConfig& cfg,
                               const SubsetScorer& scorer);
SelectionResult forward_select(const Matrix& x, std::span<const int> y, const SelectionConfig& cfg);

}  // namespace ndscreen
