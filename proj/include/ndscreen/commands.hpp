#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ndscreen/error.hpp"
#include "ndscreen/evaluation.hpp"

namespace ndscreen {

enum ExitCode : int {
    kExitOk = 0,
    kExitValidation = 1,
    kExitConfig = 2,
    kExitIo = 3,
};

int exit_code_for(ErrorKind kind) noexcept;

struct RunConfig {
    std::filesystem::path cohort;
    std::filesystem::path features;
    std::filesystem::path out;
    PipelineConfig pipeline;
    /// Overrides pipeline.selection.fold_seed when set.
    std::optional<std::uint64_t> seed;
    StageSelection stage = StageSelection::both;
};

/// Resolved settings as embedded in every evaluate artifact. Thread counts are
/// left out so reports do not depend on them.
std::string run_config_to_json(const RunConfig& cfg);

int cmd_validate(const std::filesystem::path& cohort, std::ostream& out, std::ostream& err);
int cmd_featurize(const std::filesystem::path& cohort, const std::filesystem::path& out_csv,
                  unsigned jobs, std::ostream& out, std::ostream& err);
int cmd_evaluate(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_synth(const std::filesystem::path& config, const std::filesystem::path& out_dir,
              std::optional<std::uint64_t> seed, std::ostream& out, std::ostream& err);

/// Parses `args` (without the program name) and dispatches to a subcommand.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ndscreen
