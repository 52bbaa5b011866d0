#include "ndscreen/evaluation.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include <json.hpp>

#include "ndscreen/error.hpp"
#include "ndscreen/parallel.hpp"

namespace ndscreen {

namespace {

bool contains(const std::vector<Group>& groups, Group g) {
    return std::find(groups.begin(), groups.end(), g) != groups.end();
}

}  // namespace

void validate(const StageSpec& s) {
    if (s.positive_groups.empty() || s.negative_groups.empty())
        throw ConfigError("stage " + s.name + ": positive and negative groups must be nonempty");
    for (Group g : kAllGroups) {
        const int hits = contains(s.positive_groups, g) + contains(s.negative_groups, g) +
                         contains(s.excluded_groups, g);
        if (hits > 1)
            throw ConfigError("stage " + s.name + ": group " + std::string(to_string(g)) +
                              " assigned more than once");
    }
}

StageSpec stage_one() {
    return {"stage1", "Controls", {Group::control}, "Condition",
            {Group::asd, Group::adhd, Group::comorbid}, {}};
}

StageSpec stage_two() {
    return {"stage2", "Comorbid", {Group::comorbid}, "ASD only", {Group::asd},
            {Group::control, Group::adhd}};
}

std::size_t ConfusionTable::total() const {
    std::size_t t = 0;
    for (const auto& r : rows) t += r.correct + r.incorrect;
    return t;
}

double accuracy_from_confusion(const ConfusionTable& table) {
    std::size_t correct = 0;
    for (const auto& r : table.rows) correct += r.correct;
    const std::size_t total = table.total();
    if (total == 0) throw DegenerateError("confusion table is empty");
    return static_cast<double>(correct) / static_cast<double>(total);
}

void validate(const PipelineConfig& cfg) {
    validate(cfg.selection);
    if (cfg.grid.C.empty() || cfg.grid.gamma.empty()) throw ConfigError("grid: empty C or gamma list");
    for (double c : cfg.grid.C)
        if (!(c > 0.0)) throw ConfigError("grid: C values must be positive");
    for (double g : cfg.grid.gamma)
        if (!(g > 0.0)) throw ConfigError("grid: gamma values must be positive");
    if (cfg.grid_folds < 2) throw ConfigError("grid_folds must be at least 2");
    if (!(cfg.svm_tol > 0.0)) throw ConfigError("svm tol must be positive");
    if (cfg.svm_max_iter == 0) throw ConfigError("svm max_iter must be positive");
}

PipelineConfig pipeline_config_from_json(std::string_view text) {
    using nlohmann::json;
    PipelineConfig cfg;
    try {
        const json obj = json::parse(text);
        if (!obj.is_object()) throw ConfigError("pipeline config must be a JSON object");
        if (obj.contains("selection")) cfg.selection = selection_config_from_json(obj["selection"].dump());
        if (obj.contains("grid")) {
            const auto& g = obj["grid"];
            if (g.contains("C")) cfg.grid.C = g["C"].get<std::vector<double>>();
            if (g.contains("gamma")) cfg.grid.gamma = g["gamma"].get<std::vector<double>>();
        }
        cfg.grid_folds = obj.value("grid_folds", cfg.grid_folds);
        if (obj.contains("svm")) {
            cfg.svm_tol = obj["svm"].value("tol", cfg.svm_tol);
            cfg.svm_max_iter = obj["svm"].value("max_iter", cfg.svm_max_iter);
        }
        cfg.paper_mode = obj.value("paper_mode", cfg.paper_mode);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("pipeline config: ") + e.what());
    }
    validate(cfg);
    return cfg;
}

std::string pipeline_config_to_json(const PipelineConfig& cfg) {
    using nlohmann::json;
    const json obj = {
        {"selection", json::parse(selection_config_to_json(cfg.selection))},
        {"grid", {{"C", cfg.grid.C}, {"gamma", cfg.grid.gamma}}},
        {"grid_folds", cfg.grid_folds},
        {"svm", {{"tol", cfg.svm_tol}, {"max_iter", cfg.svm_max_iter}}},
        {"paper_mode", cfg.paper_mode},
    };
    return obj.dump();
}

StageData stage_subset(const FeatureTable& table, const StageSpec& stage) {
    validate(stage);
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < table.subject_ids.size(); ++r) {
        const Group g = table.groups[r];
        if (contains(stage.positive_groups, g) || contains(stage.negative_groups, g)) rows.push_back(r);
    }
    std::sort(rows.begin(), rows.end(),
              [&](std::size_t a, std::size_t b) { return table.subject_ids[a] < table.subject_ids[b]; });

    StageData data;
    data.source_rows = rows;
    data.x = table.values.select_rows(rows);
    std::size_t pos = 0;
    std::size_t neg = 0;
    for (std::size_t r : rows) {
        data.subject_ids.push_back(table.subject_ids[r]);
        data.groups.push_back(table.groups[r]);
        const int label = contains(stage.positive_groups, table.groups[r]) ? 1 : -1;
        data.labels.push_back(label);
        (label == 1 ? pos : neg) += 1;
    }
    if (pos < 2)
        throw ProtocolError("stage " + stage.name + ": class '" + stage.positive_name + "' has " +
                            std::to_string(pos) + " subjects, need at least 2");
    if (neg < 2)
        throw ProtocolError("stage " + stage.name + ": class '" + stage.negative_name + "' has " +
                            std::to_string(neg) + " subjects, need at least 2");
    return data;
}

FoldArtifacts fit_fold(const Matrix& train_x, std::span<const int> train_y, const PipelineConfig& cfg,
                       const LabelMap& labels, const std::vector<std::size_t>* fixed_selection) {
    FoldArtifacts fold;
    fold.zscore = fit_zscore(train_x);
    const Matrix z = apply_zscore(fold.zscore, train_x);

    if (fixed_selection) {
        fold.selection.selected = *fixed_selection;
    } else {
        SelectionConfig sel = cfg.selection;
        sel.jobs = 1;
        fold.selection = forward_select(z, train_y, sel);
    }
    const Matrix zsel = z.select_cols(fold.selection.selected);

    TrainConfig base;
    base.tol = cfg.svm_tol;
    base.max_iter = cfg.svm_max_iter;
    const std::size_t folds = std::min(cfg.grid_folds, train_y.size());
    const GridResult grid = grid_search(zsel, train_y, cfg.grid, folds, cfg.selection.fold_seed, base);
    fold.config = grid.config;
    fold.grid_score = grid.score;
    fold.model = train(zsel, train_y, fold.config, labels);
    return fold;
}

int predict_fold(const FoldArtifacts& fold, std::span<const double> raw_row) {
    const auto z = apply_zscore(fold.zscore, raw_row);
    std::vector<double> x;
    x.reserve(fold.selection.selected.size());
    for (std::size_t d : fold.selection.selected) x.push_back(z[d]);
    return fold.model.predict_sign(x);
}

FoldArtifacts fit_loso_fold(const StageData& data, std::size_t held_out, const PipelineConfig& cfg,
                            const LabelMap& labels, const std::vector<std::size_t>* fixed_selection) {
    std::vector<std::size_t> train_rows;
    std::vector<int> train_y;
    for (std::size_t i = 0; i < data.labels.size(); ++i) {
        if (i == held_out) continue;
        train_rows.push_back(i);
        train_y.push_back(data.labels[i]);
    }
    return fit_fold(data.x.select_rows(train_rows), train_y, cfg, labels, fixed_selection);
}

std::vector<RankedFeature> top_features(std::span<const FoldDetail> folds,
                                        std::span<const std::string> names, std::size_t k) {
    std::map<std::size_t, std::pair<std::size_t, double>> stats;  // index -> (count, step sum)
    for (const auto& f : folds)
        for (std::size_t s = 0; s < f.selected.size(); ++s) {
            auto& [count, steps] = stats[f.selected[s]];
            ++count;
            steps += static_cast<double>(s + 1);
        }
    std::vector<RankedFeature> ranked;
    for (const auto& [index, st] : stats)
        ranked.push_back({index, index < names.size() ? names[index] : std::to_string(index), st.first,
                          st.second / static_cast<double>(st.first)});
    std::sort(ranked.begin(), ranked.end(), [](const RankedFeature& a, const RankedFeature& b) {
        if (a.frequency != b.frequency) return a.frequency > b.frequency;
        if (a.mean_step != b.mean_step) return a.mean_step < b.mean_step;
        return a.index < b.index;
    });
    if (ranked.size() > k) ranked.resize(k);
    return ranked;
}

LosoReport loso(const FeatureTable& table, const StageSpec& stage, const PipelineConfig& cfg) {
    validate(cfg);
    const StageData data = stage_subset(table, stage);
    const LabelMap labels{stage.positive_name, stage.negative_name};
    const std::size_t n = data.labels.size();

    std::optional<std::vector<std::size_t>> global_selection;
    if (cfg.paper_mode) {
        const Matrix z = apply_zscore(fit_zscore(data.x), data.x);
        SelectionConfig sel = cfg.selection;
        sel.jobs = cfg.jobs;
        global_selection = forward_select(z, data.labels, sel).selected;
    }

    std::vector<FoldArtifacts> folds(n);
    std::vector<int> predictions(n);
    parallel_for(n, cfg.jobs, [&](std::size_t s) {
        folds[s] = fit_loso_fold(data, s, cfg, labels, global_selection ? &*global_selection : nullptr);
        predictions[s] = predict_fold(folds[s], data.x.row(s));
    });

    LosoReport report;
    report.stage = stage;
    report.leaky = cfg.paper_mode;
    report.confusion.rows = {{stage.positive_name, 0, 0}, {stage.negative_name, 0, 0}};
    for (std::size_t s = 0; s < n; ++s) {
        const int truth = data.labels[s];
        auto& row = report.confusion.rows[truth == 1 ? 0 : 1];
        (predictions[s] == truth ? row.correct : row.incorrect) += 1;
        report.per_subject.push_back({data.subject_ids[s], data.groups[s],
                                      truth == 1 ? labels.positive : labels.negative,
                                      predictions[s] == 1 ? labels.positive : labels.negative});

        const FoldArtifacts& f = folds[s];
        FoldDetail detail;
        detail.held_out = data.subject_ids[s];
        detail.selected = f.selection.selected;
        for (std::size_t d : f.selection.selected)
            detail.selected_names.push_back(d < table.names.size() ? table.names[d] : std::to_string(d));
        detail.selection_scores = f.selection.scores;
        detail.C = f.config.C;
        detail.gamma = f.config.kernel.gamma;
        detail.grid_accuracy = f.grid_score.accuracy();
        detail.converged = f.model.converged;
        report.folds.push_back(std::move(detail));
    }
    report.accuracy = accuracy_from_confusion(report.confusion);
    report.top_features = top_features(report.folds, table.names);

    ScatterData& sc = report.scatter;
    for (std::size_t i = 0; i < std::min<std::size_t>(3, report.top_features.size()); ++i) {
        sc.feature_indices.push_back(report.top_features[i].index);
        sc.feature_names.push_back(report.top_features[i].name);
    }
    for (std::size_t s = 0; s < n; ++s) {
        sc.subject_ids.push_back(data.subject_ids[s]);
        sc.groups.push_back(data.groups[s]);
        sc.classes.push_back(data.labels[s] == 1 ? labels.positive : labels.negative);
        std::vector<double> v;
        for (std::size_t d : sc.feature_indices) v.push_back(table.values(data.source_rows[s], d));
        sc.values.push_back(std::move(v));
    }
    return report;
}

std::vector<StageOutcome> two_stage(const FeatureTable& table, const PipelineConfig& cfg,
                                    StageSelection which) {
    std::vector<StageSpec> stages;
    if (which != StageSelection::two) stages.push_back(stage_one());
    if (which != StageSelection::one) stages.push_back(stage_two());

    std::vector<StageOutcome> out;
    for (const StageSpec& stage : stages) {
        StageOutcome o;
        o.stage = stage;
        try {
            o.report = loso(table, stage, cfg);
        } catch (const ProtocolError& e) {
            o.error = e.what();
        }
        out.push_back(std::move(o));
    }
    return out;
}

}  // namespace ndscreen
