#include "schreg/run.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "json.hpp"

#include "schreg/artifacts.hpp"
#include "schreg/spectral.hpp"
#include "schreg/verify.hpp"

namespace schreg {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

void write_json(const ordered_json& doc, const fs::path& path) {
  fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_config("cannot write " + path.string());
  out << doc.dump(1) << "\n";
}

void run_kernels(const Scenario& sc, const fs::path& out) {
  KernelSolveInfo info_k, info_p, info_K, info_P;
  const PlantSpec plant = sc.plant();
  KernelGrid k = solve_control_kernel(plant, sc.c_s, sc.grid, {}, &info_k);
  KernelGrid K = solve_reciprocal_kernel(k, {}, &info_K);
  KernelGrid p = solve_observer_kernel(plant, sc.c_o, sc.grid, {}, &info_p);
  KernelGrid P = solve_reciprocal_kernel(p, {}, &info_P);

  write_kernel_csv(k, out / "control_kernel.csv");
  write_kernel_csv(K, out / "control_kernel_reciprocal.csv");
  write_kernel_csv(p, out / "observer_kernel.csv");
  write_kernel_csv(P, out / "observer_kernel_reciprocal.csv");

  ordered_json rep;
  rep["control"] = {{"pde_residual", kernel_residual(k, plant, sc.c_s, KernelSide::control)},
                    {"edge_bc_residual", kernel_edge_bc_residual(k, sc.q, KernelSide::control)},
                    {"iterations", info_k.iterations},
                    {"final_update", info_k.final_update}};
  rep["observer"] = {{"pde_residual", kernel_residual(p, plant, sc.c_o, KernelSide::observer)},
                     {"edge_bc_residual", kernel_edge_bc_residual(p, sc.q, KernelSide::observer)},
                     {"iterations", info_p.iterations},
                     {"final_update", info_p.final_update}};
  rep["reciprocity_iterations"] = {{"control", info_K.iterations}, {"observer", info_P.iterations}};
  write_json(rep, out / "residuals.json");
}

void run_spectrum(const Scenario& sc, const fs::path& out) {
  auto pairs = eigenvalues_A(sc.q, 50, sc.grid);
  AsymptoticsReport rep = asymptotics_report(pairs, sc.q);
  write_spectrum_csv(rep, out / "spectrum.csv");

  PropernessProbe probe = strict_properness_probe(sc.plant(), sc.observation(),
                                                  InputChoice::right, {50, 100, 200, 400, 800});
  write_properness_csv(probe, out / "properness.csv");

  ordered_json summary;
  summary["count"] = static_cast<int>(pairs.size());
  summary["max_deviation_n_ge_5"] = rep.max_deviation_tail;
  summary["strip_width"] = rep.strip_width;
  summary["max_residual"] = [&] {
    double m = 0.0;
    for (const auto& r : rep.rows) m = std::max(m, r.residual);
    return m;
  }();
  summary["properness_coefficient_sup"] = probe.coefficient_sup;
  write_json(summary, out / "spectrum_summary.json");
}

GainSet synthesize(const Scenario& sc, const fs::path& out) {
  GainSet gains = assemble_gains(sc.plant(), sc.exosystem, sc.observation(), sc.c_s, sc.c_o,
                                 sc.poles_r, sc.poles_d, sc.grid);
  save_gains_json(gains, out / "gains.json");
  return gains;
}

void run_regulate(const Scenario& sc, const fs::path& out) {
  GainSet gains = synthesize(sc, out);
  TimeSeries ts = simulate_state_feedback(sc.plant(), sc.exosystem, gains, sc.observation(),
                                          sc.z0, sc.sim_config());
  write_timeseries_csv(ts, out / "timeseries.csv");
  write_snapshot_channels_csv(ts, out / "snapshots.csv");
  DecayFit fit = decay_fit(ts.times, ts.values("abs_ey"), 0.5 * sc.horizon, sc.horizon);
  ordered_json rep;
  rep["ey_fit"] = {{"amplitude", fit.amplitude}, {"rate", fit.rate}, {"r2", fit.r2}};
  write_json(rep, out / "decay_fit.json");
  emit_plot(ts, {"abs_ey"}, out / "ey_log.svg", true);
  emit_plot(ts, {"norm_z", "abs_u"}, out / "state.svg", false);
}

void run_observe(const Scenario& sc, const fs::path& out) {
  GainSet gains = synthesize(sc, out);
  TimeSeries ts = simulate_observer(sc.plant(), sc.exosystem, gains,
                                    [](double) { return Complex(0.0); }, sc.sim_config(), sc.z0,
                                    sc.zhat0, sc.what0);
  write_timeseries_csv(ts, out / "observer_errors.csv");
  write_snapshot_channels_csv(ts, out / "snapshots.csv");
  DecayFit fit = decay_fit(ts.times, ts.values("norm_ztilde"), 0.5 * sc.horizon, sc.horizon);
  ordered_json rep;
  rep["ztilde_fit"] = {{"amplitude", fit.amplitude}, {"rate", fit.rate}, {"r2", fit.r2}};
  write_json(rep, out / "decay_fit.json");
  emit_plot(ts, {"norm_ztilde", "norm_wtilde_d", "norm_wtilde_r"}, out / "errors_log.svg", true);
}

void run_closedloop(const Scenario& sc, const fs::path& out) {
  GainSet gains = synthesize(sc, out);
  TimeSeries ts = simulate_output_feedback(sc.plant(), sc.exosystem, gains, sc.observation(),
                                           sc.sim_config(), sc.z0, sc.zhat0, sc.what0);
  write_timeseries_csv(ts, out / "timeseries.csv");
  write_snapshot_channels_csv(ts, out / "snapshots.csv");

  const auto& aey = ts.values("abs_ey");
  DecayFit fit = decay_fit(ts.times, aey, 0.5 * sc.horizon, sc.horizon);
  double peak = 0.0;
  for (double v : aey) peak = std::max(peak, v);
  double weighted = 0.0;
  for (size_t i = 1; i < ts.times.size(); ++i) {
    const double f0 = std::exp(fit.rate * ts.times[i - 1]) * aey[i - 1] * aey[i - 1];
    const double f1 = std::exp(fit.rate * ts.times[i]) * aey[i] * aey[i];
    weighted += 0.5 * (f0 + f1) * (ts.times[i] - ts.times[i - 1]);
  }
  ordered_json rep;
  rep["ey_fit"] = {{"amplitude", fit.amplitude}, {"rate", fit.rate}, {"r2", fit.r2}};
  rep["peak_ey"] = peak;
  rep["terminal_ey"] = aey.back();
  rep["weighted_tail_norm"] = std::sqrt(weighted);
  rep["weighted_alpha"] = -0.5 * fit.rate;
  write_json(rep, out / "closedloop_report.json");
  emit_plot(ts, {"abs_ey"}, out / "ey_log.svg", true);
  emit_plot(ts, {"norm_ztilde", "norm_wtilde_d", "norm_wtilde_r"}, out / "observer_log.svg", true);
}

}  // namespace

int run_scenario(const Scenario& sc, RunMode mode, const fs::path& out_dir) {
  try {
    sc.validate();
    fs::create_directories(out_dir);
    switch (mode) {
      case RunMode::kernels: run_kernels(sc, out_dir); break;
      case RunMode::spectrum: run_spectrum(sc, out_dir); break;
      case RunMode::regulate: run_regulate(sc, out_dir); break;
      case RunMode::observe: run_observe(sc, out_dir); break;
      case RunMode::closedloop: run_closedloop(sc, out_dir); break;
      case RunMode::verify: {
        std::vector<CriterionResult> results = run_acceptance(sc);
        write_report_json(results, sc.name, out_dir / "report.json");
        for (const CriterionResult& r : results) {
          std::printf("[%s] %-4s %s: measured %.6g vs threshold %.6g (%.1fs)%s%s\n",
                      r.pass ? "PASS" : "FAIL", r.id.c_str(), r.description.c_str(), r.measured,
                      r.threshold, r.seconds, r.detail.empty() ? "" : " -- ", r.detail.c_str());
        }
        return verification_exit_code(results);
      }
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}

int run(const fs::path& config_path, RunMode mode, const fs::path& out_dir,
        const ScenarioOverrides& overrides) {
  try {
    const Scenario sc = load_scenario(config_path, overrides);
    return run_scenario(sc, mode, out_dir);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}

}  // namespace schreg
