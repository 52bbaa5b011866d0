#include <doctest.h>

#include <cmath>

#include "ndscreen/error.hpp"
#include "ndscreen/grid_search.hpp"
#include "ndscreen/rng.hpp"
#include "ndscreen/svm.hpp"
#include "oracles/qp_reference.hpp"

using namespace ndscreen;

namespace {

struct Labeled {
    Matrix x;
    std::vector<int> y;
};

Labeled blobs(std::uint64_t seed, std::size_t n, double gap, std::size_t dims = 2) {
    Rng rng(seed);
    Labeled d{Matrix(n, dims), {}};
    for (std::size_t i = 0; i < n; ++i) {
        const int label = i % 2 == 0 ? 1 : -1;
        d.y.push_back(label);
        for (std::size_t c = 0; c < dims; ++c) d.x(i, c) = rng.normal() + (c == 0 ? label * gap : 0.0);
    }
    return d;
}

std::vector<double> flat(const Matrix& m) { return {m.data().begin(), m.data().end()}; }

}  // namespace

TEST_SUITE("svm_rbf") {
    TEST_CASE("rbf kernel") {
        const std::vector<double> x{0.0, 0.0};
        const std::vector<double> y{1.0, 0.0};
        CHECK(rbf(x, x, 3.0) == 1.0);
        CHECK(rbf(x, y, 1.0) == doctest::Approx(0.367879).epsilon(1e-6));
        Rng rng(3);
        for (int i = 0; i < 50; ++i) {
            std::vector<double> a{rng.normal(), rng.normal(), rng.normal()};
            std::vector<double> b{rng.normal(), rng.normal(), rng.normal()};
            CHECK(rbf(a, b, 0.7) == rbf(b, a, 0.7));
            const double k = rbf(a, b, 0.7);
            CHECK((k > 0.0 && k <= 1.0));
        }
        const std::vector<double> three{1.0, 2.0, 3.0};
        CHECK_THROWS_AS(rbf(x, three, 1.0), ShapeError);
    }

    TEST_CASE("two points") {
        Matrix x(2, 1);
        x(0, 0) = -1.0;
        x(1, 0) = 1.0;
        const std::vector<int> y{-1, 1};
        const auto m = train(x, y, {1.0, 1e-3, 1000, {1.0}});
        CHECK(m.support_vectors.rows() == 2);
        CHECK(m.predict_sign(x.row(0)) == -1);
        CHECK(m.predict_sign(x.row(1)) == 1);
    }

    TEST_CASE("XOR is separable with RBF") {
        Matrix x(4, 2);
        const double pts[4][2] = {{0, 0}, {1, 1}, {0, 1}, {1, 0}};
        for (int i = 0; i < 4; ++i) {
            x(i, 0) = pts[i][0];
            x(i, 1) = pts[i][1];
        }
        const std::vector<int> y{1, 1, -1, -1};
        const auto m = train(x, y, {10.0, 1e-3, 100000, {1.0}});
        for (int i = 0; i < 4; ++i) CHECK(m.predict_sign(x.row(i)) == y[i]);
    }

    TEST_CASE("single positive support vector at the origin") {
        SvmModel m;
        m.support_vectors = Matrix(1, 2, 0.0);
        m.dual_coefs = {0.5};
        m.bias = 0.0;
        m.labels = {"pos", "neg"};
        Rng rng(1);
        for (int i = 0; i < 20; ++i) {
            std::vector<double> v{rng.normal(0, 5), rng.normal(0, 5)};
            CHECK(predict(m, v) == "pos");
        }
        m.dual_coefs = {0.0};
        const std::vector<double> origin{0.0, 0.0};
        CHECK(m.decision_value(origin) == 0.0);
        CHECK(predict(m, origin) == "pos");
    }

    TEST_CASE("training consistency on separable data") {
        const auto d = blobs(4, 30, 3.0);
        const auto m = train(d.x, d.y, {100.0, 1e-4, 1000000, {0.5}});
        CHECK(m.converged);
        for (std::size_t i = 0; i < d.y.size(); ++i) CHECK(m.predict_sign(d.x.row(i)) == d.y[i]);
    }

    TEST_CASE("errors") {
        Matrix x(3, 1, 0.0);
        x(1, 0) = 1.0;
        const std::vector<int> one{1, 1, 1};
        CHECK_THROWS_AS(train(x, one, {}), DegenerateError);
        const std::vector<int> y{1, -1, 1};
        x(2, 0) = NAN;
        CHECK_THROWS_AS(train(x, y, {}), NumericError);
        CHECK_THROWS_AS(validate(TrainConfig{-1.0, 1e-3, 10, {1.0}}), ConfigError);
        CHECK_THROWS_AS(validate(TrainConfig{1.0, 1e-3, 10, {0.0}}), ConfigError);
    }

    TEST_CASE("20-point set against the reference solver") {
        for (std::uint64_t seed : {1u, 2u, 3u}) {
            const auto d = blobs(seed, 20, 1.0);
            const Matrix gram = rbf_gram(pairwise_squared_distances(d.x), 0.5);
            const auto ref = oracle::solve(flat(gram), d.y, 1.0);
            const auto sol = solve_dual(gram, d.y, 1.0, 1e-8, 1000000);
            CHECK(sol.converged);
            CHECK(std::abs(sol.objective - ref.objective) <= 1e-6);
            CHECK(sol.objective >= ref.objective - 1e-6);
            CHECK(sol.objective == doctest::Approx(oracle::dual_objective(flat(gram), d.y, sol.alpha)).epsilon(1e-10));
            CHECK(sol.max_violation < 1e-8);
        }
    }

    TEST_CASE("decision values agree with the reference on a 50-point grid") {
        const auto d = blobs(8, 24, 0.8);
        const double gamma = 0.7;
        const double C = 2.0;
        const Matrix gram = rbf_gram(pairwise_squared_distances(d.x), gamma);
        const auto ref = oracle::solve(flat(gram), d.y, C);
        const auto model = train(d.x, d.y, {C, 1e-8, 1000000, {gamma}});
        for (int gx = 0; gx < 10; ++gx)
            for (int gy = 0; gy < 5; ++gy) {
                const std::vector<double> p{-3.0 + 0.6 * gx, -2.0 + 1.0 * gy};
                double f = ref.bias;
                for (std::size_t i = 0; i < d.y.size(); ++i) f += ref.alpha[i] * d.y[i] * rbf(d.x.row(i), p, gamma);
                CHECK(std::abs(model.decision_value(p) - f) < 1e-4);
            }
    }

    TEST_CASE("feasibility and KKT at termination") {
        Rng rng(12);
        for (int trial = 0; trial < 10; ++trial) {
            const auto d = blobs(100 + trial, 10 + rng.index(30), rng.uniform(0.0, 2.0), 3);
            const double C = std::pow(2.0, rng.uniform(-2.0, 6.0));
            const Matrix gram = rbf_gram(pairwise_squared_distances(d.x), rng.uniform(0.1, 2.0));
            const auto sol = solve_dual(gram, d.y, C, 1e-3, 1000000);
            REQUIRE(sol.converged);
            double balance = 0.0;
            for (std::size_t i = 0; i < d.y.size(); ++i) {
                CHECK(sol.alpha[i] >= 0.0);
                CHECK(sol.alpha[i] <= C);
                balance += sol.alpha[i] * d.y[i];
            }
            CHECK(std::abs(balance) <= 1e-3);
            // Maximal violating pair recomputed from the gradient cache.
            double gmax = -INFINITY;
            double gmin = INFINITY;
            for (std::size_t t = 0; t < d.y.size(); ++t) {
                const double v = -d.y[t] * sol.gradient[t];
                const bool up = d.y[t] > 0 ? sol.alpha[t] < C : sol.alpha[t] > 0.0;
                const bool low = d.y[t] > 0 ? sol.alpha[t] > 0.0 : sol.alpha[t] < C;
                if (up) gmax = std::max(gmax, v);
                if (low) gmin = std::min(gmin, v);
            }
            CHECK(gmax - gmin < 1e-3);
        }
    }

    TEST_CASE("model invariants") {
        const auto d = blobs(17, 30, 0.5);
        const TrainConfig cfg{4.0, 1e-3, 1000000, {0.3}};
        const auto m = train(d.x, d.y, cfg);
        double balance = 0.0;
        for (double c : m.dual_coefs) {
            CHECK(std::abs(c) > 0.0);
            CHECK(std::abs(c) <= cfg.C);
            balance += c;
        }
        CHECK(std::abs(balance) <= cfg.tol);
    }

    TEST_CASE("RBF scale property") {
        const auto d = blobs(21, 20, 1.0);
        const double s = 3.0;
        Matrix scaled = d.x;
        for (std::size_t i = 0; i < scaled.rows(); ++i)
            for (std::size_t c = 0; c < scaled.cols(); ++c) scaled(i, c) *= s;
        const auto ga = rbf_gram(pairwise_squared_distances(d.x), 0.5);
        const auto gb = rbf_gram(pairwise_squared_distances(scaled), 0.5 / (s * s));
        for (std::size_t i = 0; i < ga.rows(); ++i)
            for (std::size_t j = 0; j < ga.cols(); ++j) CHECK(std::abs(ga(i, j) - gb(i, j)) <= 1e-12);
        // Kernel entries agree to rounding; a tight tolerance takes both
        // solvers to the same optimum.
        const auto a = train(d.x, d.y, {2.0, 1e-12, 1000000, {0.5}});
        const auto b = train(scaled, d.y, {2.0, 1e-12, 1000000, {0.5 / (s * s)}});
        CHECK(a.converged);
        CHECK(b.converged);
        Rng rng(2);
        for (int i = 0; i < 20; ++i) {
            std::vector<double> p{rng.normal(), rng.normal()};
            std::vector<double> q{p[0] * s, p[1] * s};
            CHECK(std::abs(a.decision_value(p) - b.decision_value(q)) <= 1e-9);
        }
    }

    TEST_CASE("deterministic training and JSON round trip") {
        const auto d = blobs(31, 26, 0.7);
        const TrainConfig cfg{1.0, 1e-3, 1000000, {1.0}};
        const auto a = train(d.x, d.y, cfg, {"A", "B"});
        const auto b = train(d.x, d.y, cfg, {"A", "B"});
        CHECK(a == b);
        const auto back = model_from_json(model_to_json(a));
        CHECK(back == a);
        CHECK(model_to_json(back) == model_to_json(a));
    }
}

TEST_SUITE("grid_search") {
    TEST_CASE("stratified folds") {
        const std::vector<int> y{1, 1, 1, 1, -1, -1, -1, -1, -1, -1};
        const auto f = stratified_folds(y, 3, 5);
        REQUIRE(f.size() == y.size());
        std::array<int, 3> pos{};
        std::array<int, 3> all{};
        for (std::size_t i = 0; i < y.size(); ++i) {
            all[f[i]]++;
            if (y[i] == 1) pos[f[i]]++;
        }
        for (int k = 0; k < 3; ++k) {
            CHECK(all[k] >= 3);
            CHECK(all[k] <= 4);
            CHECK(pos[k] >= 1);
            CHECK(pos[k] <= 2);
        }
        CHECK(stratified_folds(y, 3, 5) == f);
        CHECK_THROWS_AS(stratified_folds(y, 0, 1), ConfigError);
        CHECK_THROWS_AS(stratified_folds(y, 11, 1), ConfigError);
    }

    TEST_CASE("one-cell grid returns that cell") {
        const auto d = blobs(3, 20, 1.0);
        const auto r = grid_search(d.x, d.y, {{8.0}, {0.25}}, 5, 1);
        CHECK(r.config.C == 8.0);
        CHECK(r.config.kernel.gamma == 0.25);
        CHECK(r.score.total == 20);
    }

    TEST_CASE("duplicated cells resolve to the first in tie order") {
        const auto d = blobs(3, 20, 1.0);
        const auto r = grid_search(d.x, d.y, {{4.0, 4.0, 1.0}, {0.5, 0.5}}, 4, 2);
        const auto single = grid_search(d.x, d.y, {{1.0, 4.0}, {0.5}}, 4, 2);
        // Identical cells score identically; smaller C wins a tie.
        const auto c4 = grid_search(d.x, d.y, {{4.0}, {0.5}}, 4, 2);
        const auto c1 = grid_search(d.x, d.y, {{1.0}, {0.5}}, 4, 2);
        if (c1.score.correct >= c4.score.correct) {
            CHECK(r.config.C == 1.0);
        } else {
            CHECK(r.config.C == 4.0);
        }
        CHECK(single.config == r.config);
    }

    TEST_CASE("separable data reaches accuracy 1") {
        const auto d = blobs(9, 30, 4.0);
        const auto r = grid_search(d.x, d.y, Grid::defaults(), 5, 3);
        CHECK(r.score.accuracy() == 1.0);
    }

    TEST_CASE("default grid") {
        const auto g = Grid::defaults();
        REQUIRE(g.C.size() == 11);
        REQUIRE(g.gamma.size() == 10);
        CHECK(g.C.front() == std::ldexp(1.0, -5));
        CHECK(g.C.back() == std::ldexp(1.0, 15));
        CHECK(g.gamma.front() == std::ldexp(1.0, -15));
        CHECK(g.gamma.back() == 8.0);
    }

    TEST_CASE("config errors") {
        const auto d = blobs(3, 6, 1.0);
        CHECK_THROWS_AS(grid_search(d.x, d.y, {{1.0}, {1.0}}, 7, 1), ConfigError);
        CHECK_THROWS_AS(grid_search(d.x, d.y, {{1.0}, {1.0}}, 1, 1), ConfigError);
        CHECK_THROWS_AS(grid_search(d.x, d.y, {{}, {1.0}}, 2, 1), ConfigError);
    }
}
