#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ndscreen/matrix.hpp"

namespace ndscreen {

/// K(x, y) = exp(-gamma * ||x - y||^2)
struct KernelParams {
    double gamma = 1.0;

    friend bool operator==(const KernelParams&, const KernelParams&) = default;
};

struct TrainConfig {
    double C = 1.0;
    /// Stop when the maximal KKT violation falls below tol.
    double tol = 1e-3;
    /// Upper bound on working-set updates.
    std::size_t max_iter = 1'000'000;
    KernelParams kernel;

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

void validate(const TrainConfig& cfg);

double squared_distance(std::span<const double> x, std::span<const double> y);
double rbf(std::span<const double> x, std::span<const double> y, double gamma);

/// Symmetric N x N matrix of pairwise squared Euclidean distances between rows.
Matrix pairwise_squared_distances(const Matrix& x);
/// Elementwise exp(-gamma * d).
Matrix rbf_gram(const Matrix& squared_distances, double gamma);
/// gram restricted to `rows` x `rows`.
Matrix gram_subset(const Matrix& gram, std::span<const std::size_t> rows);

/// State of the C-SVC dual at termination.
///
/// The solver minimises 0.5 a'Qa - e'a subject to 0 <= a_i <= C and y'a = 0,
/// with Q_ij = y_i y_j K_ij. `gradient` is Qa - e, `objective` the value of
/// the equivalent maximisation problem (sum a - 0.5 a'Qa), and the decision
/// function is sum_i a_i y_i K(x_i, x) - rho.
struct DualSolution {
    std::vector<double> alpha;
    std::vector<double> gradient;
    double rho = 0.0;
    double objective = 0.0;
    /// m(a) - M(a), the maximal-violating-pair gap at termination.
    double max_violation = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

/// SMO with maximal-violating-pair working-set selection. Labels are +1/-1.
/// Throws DegenerateError if only one class is present.
DualSolution solve_dual(const Matrix& gram, std::span<const int> y, double C, double tol,
                        std::size_t max_iter);

/// Decision values sum_i a_i y_i K(i, t) - rho for every column t of
/// `cross_gram` (rows = training points, columns = evaluation points).
std::vector<double> decision_values(const DualSolution& sol, std::span<const int> y,
                                    const Matrix& cross_gram);

/// Class names attached to the +1 and -1 sides.
struct LabelMap {
    std::string positive = "+1";
    std::string negative = "-1";

    friend bool operator==(const LabelMap&, const LabelMap&) = default;
};

struct SvmModel {
    Matrix support_vectors;
    /// a_i * y_i for each support vector.
    std::vector<double> dual_coefs;
    double bias = 0.0;
    KernelParams kernel;
    LabelMap labels;
    bool converged = false;
    std::size_t iterations = 0;

    double decision_value(std::span<const double> x) const;
    /// +1 or -1; an exact zero decision value maps to +1.
    int predict_sign(std::span<const double> x) const;

    friend bool operator==(const SvmModel&, const SvmModel&) = default;
};

SvmModel train(const Matrix& x, std::span<const int> y, const TrainConfig& cfg,
               LabelMap labels = {});

/// Class name for x, through the model's label map.
const std::string& predict(const SvmModel& model, std::span<const double> x);

std::string model_to_json(const SvmModel& model);
SvmModel model_from_json(std::string_view text);

}  // namespace ndscreen
