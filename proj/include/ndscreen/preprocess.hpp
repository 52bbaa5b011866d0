#pragma once

#include <span>
#include <vector>

#include "ndscreen/matrix.hpp"

namespace ndscreen {

/// Per-dimension mean and population standard deviation of training rows.
/// A dimension whose training values are all identical has std exactly 0.
struct ZScoreParams {
    std::vector<double> mean;
    std::vector<double> std;

    friend bool operator==(const ZScoreParams&, const ZScoreParams&) = default;
};

/// Throws DegenerateError for fewer than 2 rows.
ZScoreParams fit_zscore(const Matrix& train);

/// (x - mean) / std per column; columns with std == 0 map to 0.
Matrix apply_zscore(const ZScoreParams& params, const Matrix& x);
std::vector<double> apply_zscore(const ZScoreParams& params, std::span<const double> row);

}  // namespace ndscreen
