#include "ndscreen/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "ndscreen/error.hpp"

namespace ndscreen {

ZScoreParams fit_zscore(const Matrix& train) {
    const std::size_t n = train.rows();
    const std::size_t d = train.cols();
    if (n < 2) throw DegenerateError("z-score: need at least 2 training rows, got " + std::to_string(n));

    ZScoreParams p;
    p.mean.assign(d, 0.0);
    p.std.assign(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        const double first = train(0, j);
        bool constant = true;
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sum += train(i, j);
            constant = constant && train(i, j) == first;
        }
        if (constant) {
            p.mean[j] = first;
            continue;
        }
        const double mean = sum / static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = train(i, j) - mean;
            ss += t * t;
        }
        p.mean[j] = mean;
        p.std[j] = std::sqrt(ss / static_cast<double>(n));
    }
    return p;
}

std::vector<double> apply_zscore(const ZScoreParams& params, std::span<const double> row) {
    if (row.size() != params.mean.size())
        throw ShapeError("z-score: row has " + std::to_string(row.size()) + " dimensions, params have " +
                         std::to_string(params.mean.size()));
    std::vector<double> out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j)
        out[j] = params.std[j] > 0.0 ? (row[j] - params.mean[j]) / params.std[j] : 0.0;
    return out;
}

Matrix apply_zscore(const ZScoreParams& params, const Matrix& x) {
    if (x.cols() != params.mean.size())
        throw ShapeError("z-score: matrix has " + std::to_string(x.cols()) + " columns, params have " +
                         std::to_string(params.mean.size()));
    Matrix out(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const auto z = apply_zscore(params, x.row(i));
        std::copy(z.begin(), z.end(), out.row(i).begin());
    }
    return out;
}

}  // namespace ndscreen
