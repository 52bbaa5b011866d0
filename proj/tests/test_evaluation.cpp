#include <doctest.h>

#include <set>

#include "designs.hpp"
#include "ndscreen/error.hpp"
#include "ndscreen/evaluation.hpp"
#include "ndscreen/report.hpp"

using namespace ndscreen;

namespace {

FeatureTable table_from(const Matrix& x, const std::vector<Group>& groups) {
    FeatureTable t;
    t.values = x;
    t.groups = groups;
    for (std::size_t r = 0; r < x.rows(); ++r) {
        char id[8];
        std::snprintf(id, sizeof id, "S%02zu", r + 1);
        t.subject_ids.push_back(id);
    }
    for (std::size_t c = 0; c < x.cols(); ++c) t.names.push_back("d" + std::to_string(c));
    return t;
}

PipelineConfig small_config() {
    PipelineConfig cfg;
    cfg.selection.max_features = 5;
    cfg.grid = {{1.0, 8.0}, {0.125, 1.0}};
    cfg.grid_folds = 3;
    return cfg;
}

// Rows alternate between the stage-1 positive and negative groups.
FeatureTable planted_table(std::uint64_t seed, std::size_t n, std::size_t noise, double shift) {
    const auto p = designs::planted(seed, n, 2, noise, shift);
    std::vector<Group> groups;
    for (std::size_t r = 0; r < n; ++r) groups.push_back(p.y[r] == 1 ? Group::control : Group::asd);
    return table_from(p.x, groups);
}

}  // namespace

TEST_SUITE("evaluation") {
    TEST_CASE("accuracy from confusion") {
        ConfusionTable t1{{{"Controls", 16, 2}, {"Condition", 37, 0}}};
        CHECK(accuracy_from_confusion(t1) == doctest::Approx(53.0 / 55.0));
        CHECK(format_percent(accuracy_from_confusion(t1)) == "96.4%");
        ConfusionTable t2{{{"Comorbid", 9, 2}, {"ASD only", 22, 0}}};
        CHECK(format_percent(accuracy_from_confusion(t2)) == "93.9%");
        ConfusionTable perfect{{{"a", 5, 0}, {"b", 4, 0}}};
        CHECK(accuracy_from_confusion(perfect) == 1.0);
        CHECK_THROWS_AS(accuracy_from_confusion(ConfusionTable{}), DegenerateError);
    }

    TEST_CASE("stage definitions") {
        const auto s1 = stage_one();
        CHECK(s1.positive_groups == std::vector<Group>{Group::control});
        CHECK(s1.negative_groups.size() == 3);
        const auto s2 = stage_two();
        CHECK(s2.positive_groups == std::vector<Group>{Group::comorbid});
        CHECK(s2.negative_groups == std::vector<Group>{Group::asd});
        validate(s1);
        validate(s2);
        StageSpec bad = s1;
        bad.negative_groups.push_back(Group::control);
        CHECK_THROWS_AS(validate(bad), ConfigError);
    }

    TEST_CASE("stage partitions follow group definitions") {
        std::vector<Group> groups;
        for (Group g : kAllGroups)
            for (int i = 0; i < 3; ++i) groups.push_back(g);
        const auto t = table_from(Matrix(groups.size(), 2, 0.0), groups);
        const auto d1 = stage_subset(t, stage_one());
        CHECK(d1.subject_ids.size() == 12);
        for (std::size_t i = 0; i < d1.labels.size(); ++i)
            CHECK(d1.labels[i] == (d1.groups[i] == Group::control ? 1 : -1));
        const auto d2 = stage_subset(t, stage_two());
        CHECK(d2.subject_ids.size() == 6);
        for (std::size_t i = 0; i < d2.labels.size(); ++i) {
            CHECK((d2.groups[i] == Group::comorbid || d2.groups[i] == Group::asd));
            CHECK(d2.labels[i] == (d2.groups[i] == Group::comorbid ? 1 : -1));
        }
    }

    TEST_CASE("N=4 separable fixture") {
        Matrix x(4, 3, 0.0);
        const std::vector<Group> groups{Group::control, Group::asd, Group::control, Group::asd};
        x(0, 0) = 1.0;
        x(1, 0) = -1.0;
        x(2, 0) = 1.2;
        x(3, 0) = -0.8;
        // Three training subjects leave every grid cell tied under inner
        // leave-one-out, so the grid is pinned to a cell that can fit them.
        auto cfg = small_config();
        cfg.grid = {{8.0}, {1.0}};
        const auto r = loso(table_from(x, groups), stage_one(), cfg);
        CHECK(r.accuracy == 1.0);
        CHECK(r.folds.size() == 4);
        CHECK(r.confusion.total() == 4);
    }

    TEST_CASE("all-zero features predict the majority class") {
        std::vector<Group> groups;
        for (int i = 0; i < 3; ++i) groups.push_back(Group::control);
        for (int i = 0; i < 6; ++i) groups.push_back(Group::adhd);
        const auto r = loso(table_from(Matrix(9, 4, 0.0), groups), stage_one(), small_config());
        CHECK(r.accuracy == doctest::Approx(6.0 / 9.0));
        for (const auto& p : r.per_subject) CHECK(p.predicted == "Condition");
    }

    TEST_CASE("too few subjects is a protocol error naming the class") {
        const std::vector<Group> groups{Group::control, Group::asd, Group::asd};
        CHECK_THROWS_WITH_AS(stage_subset(table_from(Matrix(3, 1, 0.0), groups), stage_one()),
                             doctest::Contains("Controls"), ProtocolError);
    }

    TEST_CASE("missing comorbid subjects: stage 2 fails, stage 1 reported") {
        auto t = planted_table(5, 10, 5, 3.0);
        const auto out = two_stage(t, small_config());
        REQUIRE(out.size() == 2);
        CHECK(out[0].report.has_value());
        CHECK_FALSE(out[1].report.has_value());
        CHECK(out[1].error.find("Comorbid") != std::string::npos);
    }

    TEST_CASE("accuracy identity and fold count") {
        auto t = planted_table(8, 14, 10, 1.0);
        const auto r = loso(t, stage_one(), small_config());
        CHECK(r.folds.size() == 14);
        std::size_t match = 0;
        for (const auto& p : r.per_subject) match += p.truth == p.predicted ? 1 : 0;
        CHECK(r.accuracy == static_cast<double>(match) / static_cast<double>(r.per_subject.size()));
        std::set<std::string> held;
        for (const auto& f : r.folds) held.insert(f.held_out);
        CHECK(held.size() == 14);
    }

    TEST_CASE("held-out perturbation leaves fold artifacts unchanged") {
        auto t = planted_table(12, 10, 12, 2.0);
        const auto cfg = small_config();
        const LabelMap labels{"Controls", "Condition"};
        const auto base = stage_subset(t, stage_one());
        Rng rng(99);
        for (std::size_t held = 0; held < base.labels.size(); held += 3) {
            const auto ref = fit_loso_fold(base, held, cfg, labels);
            for (int trial = 0; trial < 3; ++trial) {
                StageData d = base;
                for (double& v : d.x.row(held)) v = rng.normal(0.0, 1e3);
                CHECK(fit_loso_fold(d, held, cfg, labels) == ref);
            }
        }
    }

    TEST_CASE("parallel and sequential folds agree") {
        auto t = planted_table(13, 12, 8, 1.5);
        auto cfg = small_config();
        const auto a = loso(t, stage_one(), cfg);
        cfg.jobs = 4;
        const auto b = loso(t, stage_one(), cfg);
        const std::vector<StageOutcome> oa{{stage_one(), a, ""}};
        const std::vector<StageOutcome> ob{{stage_one(), b, ""}};
        CHECK(report_to_json(oa, "{}") == report_to_json(ob, "{}"));
    }

    TEST_CASE("paper mode is labeled leaky") {
        auto t = planted_table(14, 10, 6, 2.0);
        auto cfg = small_config();
        cfg.paper_mode = true;
        const auto r = loso(t, stage_one(), cfg);
        CHECK(r.leaky);
        for (const auto& f : r.folds) CHECK(f.selected == r.folds.front().selected);
        const std::vector<StageOutcome> out{{stage_one(), r, ""}};
        CHECK(report_to_json(out, "{}").find(std::string(kLeakageBanner)) != std::string::npos);
        CHECK(confusion_text_table(r).find(std::string(kLeakageBanner)) != std::string::npos);
    }

    TEST_CASE("top features") {
        const std::vector<std::string> names{"a", "b", "c", "d"};
        std::vector<FoldDetail> folds(3);
        folds[0].selected = {2, 1};
        folds[1].selected = {2, 3};
        folds[2].selected = {2, 1, 3};
        const auto r = top_features(folds, names);
        REQUIRE(r.size() == 3);
        CHECK(r[0].name == "c");
        CHECK(r[0].frequency == 3);
        // b and d are both picked twice; b has the earlier mean step.
        CHECK(r[1].name == "b");
        CHECK(r[2].name == "d");
        CHECK(r[1].mean_step == 2.0);
        CHECK(r[2].mean_step == 2.5);
        CHECK(top_features(folds, names, 1).size() == 1);
    }

    TEST_CASE("pipeline config JSON") {
        auto cfg = small_config();
        cfg.paper_mode = true;
        cfg.selection.fold_seed = 17;
        const auto back = pipeline_config_from_json(pipeline_config_to_json(cfg));
        CHECK(back.selection == cfg.selection);
        CHECK(back.grid.C == cfg.grid.C);
        CHECK(back.grid.gamma == cfg.grid.gamma);
        CHECK(back.grid_folds == cfg.grid_folds);
        CHECK(back.paper_mode);
        CHECK_THROWS_AS(pipeline_config_from_json(R"({"grid_folds": 1})"), ConfigError);
        CHECK_THROWS_AS(pipeline_config_from_json("[1,2]"), ConfigError);
    }

    TEST_CASE("text table layout") {
        LosoReport r;
        r.stage = stage_one();
        r.confusion.rows = {{"Controls", 16, 2}, {"Condition", 37, 0}};
        r.accuracy = accuracy_from_confusion(r.confusion);
        const std::string text = confusion_text_table(r);
        CHECK(text.find("Classifier | Correct | Incorrect") != std::string::npos);
        CHECK(text.find("Controls   |      16 |         2") != std::string::npos);
        CHECK(text.find("Condition  |      37 |         0") != std::string::npos);
        CHECK(text.find("Accuracy: 96.4% (53/55)") != std::string::npos);
        CHECK(text.find("Controls") < text.find("Condition  |"));
    }

    TEST_CASE("scatter outputs") {
        auto t = planted_table(15, 10, 4, 3.0);
        const auto r = loso(t, stage_one(), small_config());
        const std::string csv = scatter_csv(r, R"({"seed":1})");
        CHECK(csv.rfind("# run_config: {\"seed\":1}\n", 0) == 0);
        CHECK(csv.find("subject_id,group," + r.scatter.feature_names.front()) != std::string::npos);
        const std::string svg = scatter_svg(r, R"({"seed":1})");
        CHECK(svg.find("<svg") == 0);
        CHECK(svg.find("run_config") != std::string::npos);
        CHECK(svg.find("<circle") != std::string::npos);
    }
}
