// Command-line front end: schreg <mode> --config <file> --out <dir>
// with optional numeric overrides. Modes: kernels, spectrum, regulate,
// observe, closedloop, verify.

#include <cstdio>
#include <string>

#include "CLI11.hpp"

#include "schreg/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"backstepping output regulation for a boundary-controlled Schrodinger equation"};

  std::string mode_arg;
  std::string config_path;
  std::string out_dir = "out";
  int n_cells = -1;
  double dt = -1.0;
  double horizon = -1.0;

  app.add_option("mode", mode_arg, "kernels|spectrum|regulate|observe|closedloop|verify")
      ->required();
  app.add_option("--config", config_path, "scenario JSON file")->required();
  app.add_option("--out", out_dir, "output directory (default: out)");
  app.add_option("--n-cells", n_cells, "override numerics.n_cells");
  app.add_option("--dt", dt, "override numerics.dt");
  app.add_option("--horizon", horizon, "override numerics.horizon");

  CLI11_PARSE(app, argc, argv);

  schreg::ScenarioOverrides overrides;
  if (n_cells > 0) overrides.n_cells = n_cells;
  if (dt > 0.0) overrides.dt = dt;
  if (horizon > 0.0) overrides.horizon = horizon;

  try {
    return schreg::run(config_path, schreg::parse_mode(mode_arg), out_dir, overrides);
  } catch (const schreg::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.exit_code();
  }
}
