#pragma once

#include <filesystem>
#include <optional>

#include "schreg/core.hpp"
#include "schreg/regulator.hpp"
#include "schreg/sim.hpp"

namespace schreg {

enum class RunMode { kernels, spectrum, regulate, observe, closedloop, verify };

RunMode parse_mode(const std::string& name);
std::string mode_name(RunMode mode);

/// A complete experiment description, loadable from a JSON document. Profile
/// entries (h, g, c, initial states) are either named built-ins (constant,
/// sinusoid, gaussian-bump), inline sample arrays, or sums of those.
struct Scenario {
  std::string name = "scenario";

  double q = 1.0;
  ComplexProfile h;
  ComplexProfile g;

  ExosystemSpec exosystem;

  Complex theta = 0.0;
  double x0 = 0.0;
  ComplexProfile c;

  double c_s = 1.0;
  double c_o = 1.0;
  std::vector<Complex> poles_r;
  std::vector<Complex> poles_d;

  SpatialGrid grid;
  double dt = 1e-4;
  double horizon = 1.0;
  int record_every = 100;

  ComplexProfile z0;
  ComplexProfile zhat0;
  Eigen::VectorXcd what0;

  PlantSpec plant() const { return PlantSpec{q, h, g}; }
  ObservationFunctional observation() const { return ObservationFunctional{theta, x0, c}; }
  SimConfig sim_config() const { return SimConfig{grid, dt, horizon, record_every}; }

  /// Re-validates every embedded spec; throws config errors.
  void validate() const;
};

/// Parse a scenario from JSON text or a file. Numeric overrides (n_cells,
/// dt, horizon) replace the config values when given.
struct ScenarioOverrides {
  std::optional<int> n_cells;
  std::optional<double> dt;
  std::optional<double> horizon;
};

Scenario load_scenario(const std::filesystem::path& config_path,
                       const ScenarioOverrides& overrides = {});
Scenario parse_scenario(const std::string& json_text, const ScenarioOverrides& overrides = {});

/// The reference scenario used by the verification battery.
Scenario reference_scenario(int n_cells = 200);

}  // namespace schreg
