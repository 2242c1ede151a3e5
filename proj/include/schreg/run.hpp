#pragma once

#include "schreg/scenario.hpp"

namespace schreg {

/// Executes one mode against a loaded scenario, writing the mode's artifact
/// files under `out_dir`. Returns the process exit code: 0 success,
/// 1 verification failures, 2 invalid config, 3 solvability failure,
/// 4 numerical failure/divergence.
int run_scenario(const Scenario& sc, RunMode mode, const std::filesystem::path& out_dir);

/// Convenience wrapper: load + run, mapping load errors onto exit codes.
int run(const std::filesystem::path& config_path, RunMode mode,
        const std::filesystem::path& out_dir, const ScenarioOverrides& overrides = {});

}  // namespace schreg
