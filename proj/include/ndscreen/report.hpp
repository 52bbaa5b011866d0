#pragma once

#include <span>
#include <string>
#include <string_view>

#include "ndscreen/evaluation.hpp"

namespace ndscreen {

inline constexpr std::string_view kLeakageBanner = "leakage: selection outside folds";

/// Accuracy as a percentage with one decimal, e.g. "96.4%".
std::string format_percent(double accuracy);

/// Full report: embedded run metadata (`run_config`, already JSON), then one
/// entry per stage with confusion table, accuracy, per-subject predictions,
/// per-fold details and top features, or an error message.
std::string report_to_json(std::span<const StageOutcome> outcomes, std::string_view run_config);

/// Rows = classes, columns = Correct / Incorrect, followed by the accuracy line.
std::string confusion_text_table(const LosoReport& report);

/// Header `subject_id,group,<feature names>`; '#' lines carry run metadata.
std::string scatter_csv(const LosoReport& report, std::string_view run_config);

/// First top feature on x, second on y, third as marker radius; colour by class.
std::string scatter_svg(const LosoReport& report, std::string_view run_config);

}  // namespace ndscreen
