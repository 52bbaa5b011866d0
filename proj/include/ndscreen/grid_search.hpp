#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ndscreen/matrix.hpp"
#include "ndscreen/svm.hpp"

namespace ndscreen {

/// Fold id in [0, k) for every row. Rows of each class are shuffled with the
/// seeded generator and dealt round-robin, continuing the deal across classes
/// so fold sizes differ by at most one. Requires 1 <= k <= y.size().
std::vector<std::size_t> stratified_folds(std::span<const int> y, std::size_t k,
                                          std::uint64_t seed);

struct CvScore {
    std::size_t correct = 0;
    std::size_t total = 0;

    double accuracy() const {
        return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
    }
    friend bool operator==(const CvScore&, const CvScore&) = default;
};

/// k-fold CV accuracy from a precomputed Gram matrix. A training split with a
/// single class predicts that class for its held-out rows.
CvScore cross_validate_gram(const Matrix& gram, std::span<const int> y,
                            std::span<const std::size_t> folds, std::size_t k, double C,
                            double tol, std::size_t max_iter);

struct Grid {
    std::vector<double> C;
    std::vector<double> gamma;

    /// C in {2^-5, 2^-3, ..., 2^15}, gamma in {2^-15, 2^-13, ..., 2^3}.
    static Grid defaults();
};

struct GridResult {
    TrainConfig config;
    CvScore score;
};

/// Stratified k-fold accuracy for every (C, gamma) cell. Ties go to the
/// smaller C, then the smaller gamma. Throws ConfigError if folds > N or
/// folds < 2, or the grid is empty.
GridResult grid_search(const Matrix& x, std::span<const int> y, const Grid& grid,
                       std::size_t folds, std::uint64_t seed, const TrainConfig& base = {});

}  // namespace ndscreen
