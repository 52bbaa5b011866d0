#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ndscreen/features.hpp"
#include "ndscreen/grid_search.hpp"
#include "ndscreen/preprocess.hpp"
#include "ndscreen/selection.hpp"
#include "ndscreen/session.hpp"
#include "ndscreen/svm.hpp"

namespace ndscreen {

/// One binary classification stage. Subjects in positive_groups get label +1,
/// negative_groups -1; excluded groups (and any group not listed) are dropped.
struct StageSpec {
    std::string name;
    std::string positive_name;
    std::vector<Group> positive_groups;
    std::string negative_name;
    std::vector<Group> negative_groups;
    std::vector<Group> excluded_groups;

    friend bool operator==(const StageSpec&, const StageSpec&) = default;
};

void validate(const StageSpec& stage);

/// Controls vs {ASD, ADHD, Comorbid}.
StageSpec stage_one();
/// Comorbid vs ASD only; ADHD-only subjects excluded.
StageSpec stage_two();

struct ClassCounts {
    std::string name;
    std::size_t correct = 0;
    std::size_t incorrect = 0;

    friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

/// Rows in table order: positive class first, then negative.
struct ConfusionTable {
    std::vector<ClassCounts> rows;

    std::size_t total() const;
    friend bool operator==(const ConfusionTable&, const ConfusionTable&) = default;
};

/// sum(correct) / sum(correct + incorrect). Throws DegenerateError on an empty table.
double accuracy_from_confusion(const ConfusionTable& table);

struct PipelineConfig {
    SelectionConfig selection;
    Grid grid = Grid::defaults();
    /// Capped at the number of training subjects in each fold.
    std::size_t grid_folds = 5;
    double svm_tol = 1e-3;
    std::size_t svm_max_iter = 1'000'000;
    /// Select features once on all stage subjects instead of inside each fold.
    /// Leaks held-out information; reports are labeled accordingly.
    bool paper_mode = false;
    /// Threads across LOSO folds.
    unsigned jobs = 1;
};

void validate(const PipelineConfig& cfg);
PipelineConfig pipeline_config_from_json(std::string_view text);
std::string pipeline_config_to_json(const PipelineConfig& cfg);

/// The stage's subjects, sorted by subject_id.
struct StageData {
    std::vector<std::string> subject_ids;
    std::vector<Group> groups;
    std::vector<int> labels;
    /// Row of each subject in the source table.
    std::vector<std::size_t> source_rows;
    Matrix x;
};

/// Throws ProtocolError naming the class when either side has < 2 subjects.
StageData stage_subset(const FeatureTable& table, const StageSpec& stage);

/// Everything fitted for one LOSO fold, from training rows only.
struct FoldArtifacts {
    ZScoreParams zscore;
    SelectionResult selection;
    TrainConfig config;
    CvScore grid_score;
    SvmModel model;

    friend bool operator==(const FoldArtifacts&, const FoldArtifacts&) = default;
};

/// z-score -> forward selection -> grid search -> final SVM. When
/// `fixed_selection` is given, forward selection is skipped and those
/// dimensions are used.
FoldArtifacts fit_fold(const Matrix& train_x, std::span<const int> train_y,
                       const PipelineConfig& cfg, const LabelMap& labels,
                       const std::vector<std::size_t>* fixed_selection = nullptr);

/// +1 / -1 for one raw (unscaled) feature row.
int predict_fold(const FoldArtifacts& fold, std::span<const double> raw_row);

/// Fits the fold that holds out `held_out` (an index into data).
FoldArtifacts fit_loso_fold(const StageData& data, std::size_t held_out, const PipelineConfig& cfg,
                            const LabelMap& labels,
                            const std::vector<std::size_t>* fixed_selection = nullptr);

struct SubjectPrediction {
    std::string subject_id;
    Group group = Group::control;
    std::string truth;
    std::string predicted;
};

struct FoldDetail {
    std::string held_out;
    std::vector<std::size_t> selected;
    std::vector<std::string> selected_names;
    std::vector<double> selection_scores;
    double C = 0.0;
    double gamma = 0.0;
    double grid_accuracy = 0.0;
    bool converged = false;
};

struct RankedFeature {
    std::size_t index = 0;
    std::string name;
    std::size_t frequency = 0;
    /// Mean 1-based position in the fold's selection order.
    double mean_step = 0.0;
};

/// Per-subject raw values of the top (up to) three features.
struct ScatterData {
    std::vector<std::string> feature_names;
    std::vector<std::size_t> feature_indices;
    std::vector<std::string> subject_ids;
    std::vector<Group> groups;
    std::vector<std::string> classes;
    std::vector<std::vector<double>> values;
};

struct LosoReport {
    StageSpec stage;
    ConfusionTable confusion;
    double accuracy = 0.0;
    std::vector<SubjectPrediction> per_subject;
    std::vector<FoldDetail> folds;
    std::vector<RankedFeature> top_features;
    ScatterData scatter;
    /// Selection ran outside the folds (paper mode).
    bool leaky = false;
};

/// Ranks by selection frequency (descending), then mean step (ascending),
/// then index. Returns at most k entries.
std::vector<RankedFeature> top_features(std::span<const FoldDetail> folds,
                                        std::span<const std::string> names, std::size_t k = 10);

LosoReport loso(const FeatureTable& table, const StageSpec& stage, const PipelineConfig& cfg);

struct StageOutcome {
    StageSpec stage;
    std::optional<LosoReport> report;
    /// Set when the stage could not run; the other stage is unaffected.
    std::string error;
};

enum class StageSelection { one, two, both };

std::vector<StageOutcome> two_stage(const FeatureTable& table, const PipelineConfig& cfg,
                                    StageSelection which = StageSelection::both);

}  // namespace ndscreen
