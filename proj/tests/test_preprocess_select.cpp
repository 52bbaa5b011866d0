#include <doctest.h>

#include <cmath>

#include "designs.hpp"
#include "ndscreen/error.hpp"
#include "ndscreen/preprocess.hpp"
#include "ndscreen/selection.hpp"

using namespace ndscreen;

namespace {

Matrix column(std::initializer_list<double> v) {
    Matrix m(v.size(), 1);
    std::size_t i = 0;
    for (double x : v) m(i++, 0) = x;
    return m;
}

}  // namespace

TEST_SUITE("preprocess") {
    TEST_CASE("fit examples") {
        auto p = fit_zscore(column({7, 7, 7}));
        CHECK(p.mean[0] == 7.0);
        CHECK(p.std[0] == 0.0);
        p = fit_zscore(column({0, 2}));
        CHECK(p.mean[0] == 1.0);
        CHECK(p.std[0] == 1.0);
        p = fit_zscore(column({1, 2, 3, 4}));
        CHECK(p.mean[0] == 2.5);
        CHECK(p.std[0] == doctest::Approx(std::sqrt(1.25)).epsilon(1e-15));
        CHECK_THROWS_AS(fit_zscore(column({1})), DegenerateError);
    }

    TEST_CASE("constant column of awkward value has exactly zero std") {
        const auto p = fit_zscore(column({0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1}));
        CHECK(p.std[0] == 0.0);
        const auto z = apply_zscore(p, column({0.1, 5.0}));
        CHECK(z(0, 0) == 0.0);
        CHECK(z(1, 0) == 0.0);
    }

    TEST_CASE("apply examples") {
        ZScoreParams p{{1.0}, {2.0}};
        const std::vector<double> row{3.0};
        CHECK(apply_zscore(p, row)[0] == 1.0);
        const std::vector<double> wide{1.0, 2.0};
        CHECK_THROWS_AS(apply_zscore(p, wide), ShapeError);
        CHECK_THROWS_AS(apply_zscore(p, Matrix(2, 2)), ShapeError);
    }

    TEST_CASE("standardized fitting matrix") {
        Rng rng(4);
        Matrix x(25, 6);
        for (std::size_t r = 0; r < 25; ++r)
            for (std::size_t c = 0; c < 6; ++c) x(r, c) = c == 5 ? 3.0 : rng.normal(c, 1.0 + c);
        const auto z = apply_zscore(fit_zscore(x), x);
        for (std::size_t c = 0; c < 6; ++c) {
            double m = 0.0;
            double v = 0.0;
            for (std::size_t r = 0; r < 25; ++r) m += z(r, c);
            m /= 25.0;
            for (std::size_t r = 0; r < 25; ++r) v += (z(r, c) - m) * (z(r, c) - m);
            CHECK(std::abs(m) < 1e-12);
            if (c < 5) CHECK(std::sqrt(v / 25.0) == doctest::Approx(1.0).epsilon(1e-12));
            else CHECK(v == 0.0);
        }
    }
}

TEST_SUITE("forward_select") {
    TEST_CASE("single dimension") {
        Matrix x(6, 1);
        const std::vector<int> y{1, 1, 1, -1, -1, -1};
        for (std::size_t i = 0; i < 6; ++i) x(i, 0) = y[i] * 1.0 + 0.1 * static_cast<double>(i);
        const auto r = forward_select(x, y, SelectionConfig{});
        CHECK(r.selected == std::vector<std::size_t>{0});
        CHECK(r.scores.size() == 1);
    }

    TEST_CASE("identical informative columns: lower index first") {
        auto p = designs::planted(3, 20, 0, 6, 0.0);
        for (std::size_t r = 0; r < 20; ++r) {
            p.x(r, 2) = p.y[r] * 2.0 + 0.01 * static_cast<double>(r);
            p.x(r, 4) = p.x(r, 2);
        }
        const auto sel = forward_select(p.x, p.y, SelectionConfig{});
        REQUIRE(!sel.selected.empty());
        CHECK(sel.selected[0] == 2);
    }

    TEST_CASE("stub scorer drives tie-break and stopping") {
        Matrix x(4, 5, 0.0);
        const std::vector<int> y{1, 1, -1, -1};
        // Scores by the subset's summed squared distance; columns 1 and 3
        // contribute equally, so column 1 is picked first.
        for (std::size_t r = 0; r < 4; ++r) {
            x(r, 1) = static_cast<double>(r);
            x(r, 3) = static_cast<double>(r);
            x(r, 4) = 0.5 * static_cast<double>(r);
        }
        std::size_t calls = 0;
        SubsetScorer scorer = [&](const Matrix& sq, std::size_t dims) {
            ++calls;
            double total = 0.0;
            for (double v : sq.data()) total += v;
            CHECK(dims >= 1);
            return CvScore{static_cast<std::size_t>(total), 1000};
        };
        SelectionConfig cfg;
        cfg.max_features = 3;
        const auto r = forward_select(x, y, cfg, scorer);
        CHECK(r.selected == std::vector<std::size_t>{1, 3, 4});
        CHECK(std::is_sorted(r.scores.begin(), r.scores.end()));

        SubsetScorer flat = [](const Matrix&, std::size_t) { return CvScore{3, 4}; };
        const auto once = forward_select(x, y, cfg, flat);
        CHECK(once.selected == std::vector<std::size_t>{0});
    }

    TEST_CASE("degenerate labels") {
        Matrix x(4, 2, 1.0);
        const std::vector<int> one{1, 1, 1, 1};
        CHECK_THROWS_AS(forward_select(x, one, SelectionConfig{}), DegenerateError);
        CHECK_THROWS_AS(forward_select(Matrix(1, 2), std::vector<int>{1}, SelectionConfig{}), DegenerateError);
    }

    TEST_CASE("planted informative dimensions are found") {
        std::size_t good = 0;
        for (std::uint64_t t = 0; t < 5; ++t) {
            const auto p = designs::planted(1000 + t, 150, 3, 100, 2.0);
            SelectionConfig cfg;
            cfg.fold_seed = t;
            const auto r = forward_select(p.x, p.y, cfg);
            if (designs::informative_hits(r.selected, p.informative, 5) >= 2) ++good;
            CHECK(std::is_sorted(r.scores.begin(), r.scores.end()));
            CHECK(r.selected.size() <= cfg.max_features);
        }
        CHECK(good >= 4);
    }

    TEST_CASE("determinism and thread independence") {
        const auto p = designs::planted(77, 30, 3, 40, 1.5);
        SelectionConfig cfg;
        cfg.fold_seed = 9;
        const auto a = forward_select(p.x, p.y, cfg);
        cfg.jobs = 3;
        const auto b = forward_select(p.x, p.y, cfg);
        CHECK(a == b);
    }

    TEST_CASE("config JSON") {
        const auto cfg = selection_config_from_json(R"({"max_features": 7, "inner_folds": 3, "fold_seed": 42})");
        CHECK(cfg.max_features == 7);
        CHECK(cfg.inner_folds == 3);
        CHECK(cfg.fold_seed == 42);
        CHECK(selection_config_from_json(selection_config_to_json(cfg)) == cfg);
        CHECK_THROWS_AS(selection_config_from_json(R"({"inner_folds": 1})"), ConfigError);
        CHECK_THROWS_AS(selection_config_from_json(R"({"max_features": "x"})"), ConfigError);
    }
}
