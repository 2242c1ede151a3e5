#pragma once

#include <filesystem>

#include "schreg/scenario.hpp"

namespace schreg {

/// One verification criterion outcome. `measured` and `threshold` describe
/// the headline accuracy number; `detail` carries the secondary measurements
/// (console only). Wall-clock seconds are reported but kept out of the JSON
/// report so that identical configs produce byte-identical files.
struct CriterionResult {
  std::string id;
  std::string description;
  double measured = 0.0;
  double threshold = 0.0;
  bool pass = false;
  double seconds = 0.0;
  double budget_seconds = 0.0;
  std::string detail;
};

/// Runs the full verification battery. Criteria tied to the paper-level
/// oracles (closed-form kernels, spectrum, energy identity, properness,
/// solvability gates) use pinned parameters; the regulator/closed-loop
/// criteria run on the given scenario.
std::vector<CriterionResult> run_acceptance(const Scenario& sc);

void write_report_json(const std::vector<CriterionResult>& results,
                       const std::string& scenario_name, const std::filesystem::path& path);

/// 0 when every criterion passes, 1 otherwise.
int verification_exit_code(const std::vector<CriterionResult>& results);

}  // namespace schreg
