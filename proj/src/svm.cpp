#include "ndscreen/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "ndscreen/error.hpp"

namespace ndscreen {

namespace {

constexpr double kTau = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

void require_labels(std::span<const int> y) {
    bool pos = false;
    bool neg = false;
    for (int v : y) {
        if (v == 1) pos = true;
        else if (v == -1) neg = true;
        else throw ValidationError("labels must be +1 or -1, got " + std::to_string(v));
    }
    if (!pos || !neg) throw DegenerateError("training labels contain a single class");
}

}  // namespace

void validate(const TrainConfig& cfg) {
    if (!(cfg.C > 0.0) || !std::isfinite(cfg.C)) throw ConfigError("svm: C must be positive");
    if (!(cfg.tol > 0.0)) throw ConfigError("svm: tol must be positive");
    if (cfg.max_iter == 0) throw ConfigError("svm: max_iter must be positive");
    if (!(cfg.kernel.gamma > 0.0) || !std::isfinite(cfg.kernel.gamma))
        throw ConfigError("svm: gamma must be positive");
}

double squared_distance(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw ShapeError("kernel: dimension mismatch " + std::to_string(x.size()) + " vs " +
                         std::to_string(y.size()));
    double d = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double t = x[k] - y[k];
        d += t * t;
    }
    return d;
}

double rbf(std::span<const double> x, std::span<const double> y, double gamma) {
    return std::exp(-gamma * squared_distance(x, y));
}

Matrix pairwise_squared_distances(const Matrix& x) {
    const std::size_t n = x.rows();
    Matrix d(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) d(i, j) = d(j, i) = squared_distance(x.row(i), x.row(j));
    return d;
}

Matrix rbf_gram(const Matrix& squared_distances, double gamma) {
    Matrix k(squared_distances.rows(), squared_distances.cols());
    for (std::size_t i = 0; i < k.rows(); ++i)
        for (std::size_t j = 0; j < k.cols(); ++j) k(i, j) = std::exp(-gamma * squared_distances(i, j));
    return k;
}

Matrix gram_subset(const Matrix& gram, std::span<const std::size_t> rows) {
    Matrix out(rows.size(), rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows.size(); ++j) out(i, j) = gram(rows[i], rows[j]);
    return out;
}

DualSolution solve_dual(const Matrix& gram, std::span<const int> y, double C, double tol,
                        std::size_t max_iter) {
    const std::size_t n = y.size();
    if (gram.rows() != n || gram.cols() != n)
        throw ShapeError("svm: gram matrix is " + std::to_string(gram.rows()) + "x" +
                         std::to_string(gram.cols()) + " for " + std::to_string(n) + " labels");
    require_labels(y);

    DualSolution sol;
    sol.alpha.assign(n, 0.0);
    sol.gradient.assign(n, -1.0);
    auto& alpha = sol.alpha;
    auto& grad = sol.gradient;

    const auto upper = [&](std::size_t t) { return alpha[t] >= C; };
    const auto lower = [&](std::size_t t) { return alpha[t] <= 0.0; };

    while (true) {
        // i: argmax of -y_t G_t over I_up; j: argmin over I_low. Lowest index wins ties.
        double gmax = -kInf;
        double gmin = kInf;
        std::size_t i = n;
        std::size_t j = n;
        for (std::size_t t = 0; t < n; ++t) {
            const double v = -y[t] * grad[t];
            const bool in_up = y[t] == 1 ? !upper(t) : !lower(t);
            const bool in_low = y[t] == 1 ? !lower(t) : !upper(t);
            if (in_up && v > gmax) {
                gmax = v;
                i = t;
            }
            if (in_low && v < gmin) {
                gmin = v;
                j = t;
            }
        }
        sol.max_violation = (i == n || j == n) ? 0.0 : gmax - gmin;
        if (i == n || j == n || gmax - gmin < tol) {
            sol.converged = true;
            break;
        }
        if (sol.iterations >= max_iter) break;
        ++sol.iterations;

        const double kii = gram(i, i);
        const double kjj = gram(j, j);
        const double kij = gram(i, j);
        const double old_i = alpha[i];
        const double old_j = alpha[j];

        if (y[i] != y[j]) {
            double quad = kii + kjj + 2.0 * (-kij);
            if (quad <= 0.0) quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if (diff > 0.0) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = C - diff;
                }
            } else if (alpha[j] > C) {
                alpha[j] = C;
                alpha[i] = C + diff;
            }
        } else {
            double quad = kii + kjj - 2.0 * kij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > C) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = sum - C;
                }
            } else if (alpha[j] < 0.0) {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if (sum > C) {
                if (alpha[j] > C) {
                    alpha[j] = C;
                    alpha[i] = sum - C;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        const double di = (alpha[i] - old_i) * y[i];
        const double dj = (alpha[j] - old_j) * y[j];
        for (std::size_t t = 0; t < n; ++t) grad[t] += y[t] * (gram(t, i) * di + gram(t, j) * dj);
    }

    // rho: mean of y_t G_t over free variables, else midpoint of the feasible interval.
    double ub = kInf;
    double lb = -kInf;
    double sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = y[t] * grad[t];
        if (upper(t)) {
            if (y[t] == -1) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else if (lower(t)) {
            if (y[t] == 1) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    sol.rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;

    double obj = 0.0;
    for (std::size_t t = 0; t < n; ++t) obj += alpha[t] * (1.0 - grad[t]);
    sol.objective = 0.5 * obj;
    return sol;
}

std::vector<double> decision_values(const DualSolution& sol, std::span<const int> y,
                                    const Matrix& cross_gram) {
    if (cross_gram.rows() != y.size()) throw ShapeError("svm: cross gram rows do not match labels");
    std::vector<double> out(cross_gram.cols(), -sol.rho);
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (sol.alpha[i] == 0.0) continue;
        const double coef = sol.alpha[i] * y[i];
        for (std::size_t t = 0; t < out.size(); ++t) out[t] += coef * cross_gram(i, t);
    }
    return out;
}

double SvmModel::decision_value(std::span<const double> x) const {
    if (support_vectors.rows() > 0 && x.size() != support_vectors.cols())
        throw ShapeError("svm: input has " + std::to_string(x.size()) + " dimensions, model expects " +
                         std::to_string(support_vectors.cols()));
    double f = bias;
    for (std::size_t i = 0; i < support_vectors.rows(); ++i)
        f += dual_coefs[i] * rbf(support_vectors.row(i), x, kernel.gamma);
    return f;
}

int SvmModel::predict_sign(std::span<const double> x) const {
    return decision_value(x) >= 0.0 ? 1 : -1;
}

SvmModel train(const Matrix& x, std::span<const int> y, const TrainConfig& cfg, LabelMap labels) {
    validate(cfg);
    if (x.rows() != y.size())
        throw ShapeError("svm: " + std::to_string(x.rows()) + " rows but " +
                         std::to_string(y.size()) + " labels");
    if (x.rows() < 2) throw DegenerateError("svm: need at least 2 training points");
    for (double v : x.data())
        if (!std::isfinite(v)) throw NumericError("svm: non-finite feature value");

    const Matrix gram = rbf_gram(pairwise_squared_distances(x), cfg.kernel.gamma);
    const DualSolution sol = solve_dual(gram, y, cfg.C, cfg.tol, cfg.max_iter);

    std::vector<std::size_t> sv;
    for (std::size_t i = 0; i < sol.alpha.size(); ++i)
        if (sol.alpha[i] > 0.0) sv.push_back(i);

    SvmModel model;
    model.support_vectors = x.select_rows(sv);
    for (std::size_t i : sv) model.dual_coefs.push_back(sol.alpha[i] * y[i]);
    model.bias = -sol.rho;
    model.kernel = cfg.kernel;
    model.labels = std::move(labels);
    model.converged = sol.converged;
    model.iterations = sol.iterations;
    return model;
}

const std::string& predict(const SvmModel& model, std::span<const double> x) {
    return model.predict_sign(x) > 0 ? model.labels.positive : model.labels.negative;
}

std::string model_to_json(const SvmModel& model) {
    using nlohmann::json;
    json sv = json::array();
    for (std::size_t i = 0; i < model.support_vectors.rows(); ++i) {
        const auto r = model.support_vectors.row(i);
        sv.push_back(std::vector<double>(r.begin(), r.end()));
    }
    json obj = {
        {"kernel", "rbf"},
        {"gamma", model.kernel.gamma},
        {"bias", model.bias},
        {"dual_coefs", model.dual_coefs},
        {"support_vectors", std::move(sv)},
        {"dimensions", model.support_vectors.cols()},
        {"label_map", {{"+1", model.labels.positive}, {"-1", model.labels.negative}}},
        {"converged", model.converged},
        {"iterations", model.iterations},
    };
    return obj.dump(2) + "\n";
}

SvmModel model_from_json(std::string_view text) {
    using nlohmann::json;
    json obj;
    try {
        obj = json::parse(text);
        SvmModel m;
        m.kernel.gamma = obj.at("gamma").get<double>();
        m.bias = obj.at("bias").get<double>();
        m.dual_coefs = obj.at("dual_coefs").get<std::vector<double>>();
        const auto& sv = obj.at("support_vectors");
        const std::size_t dims = obj.at("dimensions").get<std::size_t>();
        if (sv.size() != m.dual_coefs.size())
            throw ParseError(1, "model: support_vectors and dual_coefs lengths differ");
        m.support_vectors = Matrix(sv.size(), dims);
        for (std::size_t i = 0; i < sv.size(); ++i) {
            const auto row = sv[i].get<std::vector<double>>();
            if (row.size() != dims) throw ParseError(1, "model: support vector has wrong dimension");
            std::copy(row.begin(), row.end(), m.support_vectors.row(i).begin());
        }
        m.labels.positive = obj.at("label_map").at("+1").get<std::string>();
        m.labels.negative = obj.at("label_map").at("-1").get<std::string>();
        m.converged = obj.at("converged").get<bool>();
        m.iterations = obj.at("iterations").get<std::size_t>();
        return m;
    } catch (const json::exception& e) {
        throw ParseError(1, std::string("model: ") + e.what());
    }
}

}  // namespace ndscreen
