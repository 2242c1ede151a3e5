#include "schreg/verify.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

#include "schreg/artifacts.hpp"
#include "schreg/spectral.hpp"

namespace schreg {

namespace {

using Clock = std::chrono::steady_clock;
constexpr Complex kI(0.0, 1.0);
const double kPi = 3.14159265358979323846;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

ComplexProfile random_smooth_profile(const SpatialGrid& g, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Complex> coef(7);
  for (auto& c : coef) c = Complex(u(rng), u(rng));
  return ComplexProfile::sample(g, [&](double x) {
    Complex acc = 0.0;
    for (size_t mn = 0; mn < coef.size(); ++mn)
      acc += coef[mn] * std::cos(static_cast<double>(mn) * kPi * x) / (1.0 + double(mn * mn));
    return acc;
  });
}

// ---- C1: closed-form kernel oracle --------------------------------------

CriterionResult criterion_kernel_oracle() {
  CriterionResult r{"C1",
                    "constant-coefficient kernels match the closed form at second order",
                    0.0, 5e-4, false, 0.0, 10.0, ""};
  const auto t0 = Clock::now();
  auto sup_errors = [](int n) {
    SpatialGrid g(n);
    PlantSpec plant{1.0, ComplexProfile(g), ComplexProfile(g)};
    KernelGrid k = solve_control_kernel(plant, 0.0, g);
    KernelGrid p = solve_observer_kernel(plant, 0.0, g);
    double ec = 0.0, eo = 0.0;
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= i; ++j) {
        ec = std::max(ec, std::abs(k(i, j) + kI * std::exp(kI * (g.node(i) - g.node(j)))));
        eo = std::max(eo, std::abs(p(j, i) + kI * std::exp(kI * (g.node(i) - g.node(j)))));
      }
    return std::pair<double, double>(ec, eo);
  };
  const auto [c100, o100] = sup_errors(100);
  const auto [c200, o200] = sup_errors(200);
  const double rc = c100 / c200, ro = o100 / o200;
  r.measured = std::max(c200, o200);
  r.pass = c200 < 5e-4 && o200 < 5e-4 && rc > 3.0 && rc < 5.0 && ro > 3.0 && ro < 5.0;
  r.detail = "sup200 control " + fmt(c200) + ", observer " + fmt(o200) + "; ratio100/200 " +
             fmt(rc) + " / " + fmt(ro);
  r.seconds = seconds_since(t0);
  return r;
}

// ---- C2: round trip ------------------------------------------------------

CriterionResult criterion_round_trip(const KernelSet& kernels) {
  CriterionResult r{"C2", "forward/inverse transform round trips on random smooth profiles",
                    0.0, 1e-6, false, 0.0, 5.0, ""};
  const auto t0 = Clock::now();
  const SpatialGrid g = kernels.control.grid();
  std::mt19937 rng(7);
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    ComplexProfile z = random_smooth_profile(g, rng);
    worst = std::max(worst, sup_diff(apply_inverse(kernels.control_reciprocal,
                                                   apply_forward(kernels.control, z)),
                                     z));
    worst = std::max(worst,
                     sup_diff(apply_observer_inverse(kernels.observer_reciprocal,
                                                     apply_observer_forward(kernels.observer, z)),
                              z));
  }
  r.measured = worst;
  r.pass = worst < r.threshold;
  r.seconds = seconds_since(t0);
  return r;
}

// ---- C3: spectrum --------------------------------------------------------

CriterionResult criterion_spectrum() {
  CriterionResult r{"C3", "open-loop spectrum: residuals, anti-stability, quadratic asymptote",
                    0.0, 1e-12, false, 0.0, 2.0, ""};
  const auto t0 = Clock::now();
  SpatialGrid g(64);
  auto pairs = eigenvalues_A(1.0, 50, g);
  double max_resid = 0.0, min_re = 1e300;
  for (const EigenPair& p : pairs) {
    if (p.index < 5) continue;
    max_resid = std::max(max_resid, p.residual);
    min_re = std::min(min_re, p.mu.real());
  }
  AsymptoticsReport rep = asymptotics_report(pairs, 1.0);
  double head = 0.0, tail = 0.0;
  for (const auto& row : rep.rows) {
    if (row.n >= 5 && row.n < 20) head = std::max(head, row.deviation);
    if (row.n >= 20) tail = std::max(tail, row.deviation);
  }
  r.measured = max_resid;
  r.pass = max_resid < 1e-12 && min_re > 0.0 && tail <= 1.5 * head;
  r.detail = "min Re mu " + fmt(min_re) + "; n^2-deviation head " + fmt(head) + ", tail " +
             fmt(tail);
  r.seconds = seconds_since(t0);
  return r;
}

// ---- C4: regulator residuals ----------------------------------------------

CriterionResult criterion_regulator_residuals(const Scenario& sc, const GainSet& gains) {
  CriterionResult r{"C4", "regulator equations solved to round-off; nonlocal condition met",
                    0.0, 1e-8, false, 0.0, 5.0, ""};
  const auto t0 = Clock::now();
  RegulatorResiduals res = regulator_residuals(sc.plant(), sc.exosystem, sc.observation(), gains);
  r.measured = std::max({res.m_ode, res.n_ode, res.m_bc0, res.n_bc0, res.n_bc1});
  r.pass = r.measured < 1e-8 && res.m_nonlocal < 1e-6;
  r.detail = "ode m/n " + fmt(res.m_ode) + " / " + fmt(res.n_ode) + "; nonlocal " +
             fmt(res.m_nonlocal);
  r.seconds = seconds_since(t0);
  return r;
}

// ---- C5: energy identity ---------------------------------------------------

CriterionResult criterion_energy_identity(const Scenario& sc) {
  CriterionResult r{"C5", "open-loop energy balance dE/dt = q |z(0,t)|^2 (anti-stability)",
                    0.0, 0.02, false, 0.0, 30.0, ""};
  const auto t0 = Clock::now();
  SpatialGrid g = sc.grid;
  PlantSpec plant{sc.q, ComplexProfile(g), ComplexProfile(g)};  // h = 0, g = 0
  ExosystemSpec none;
  none.S_d.resize(0, 0);
  none.S_r.resize(0, 0);
  none.q_d1.resize(0);
  none.q_d2.resize(0);
  none.q_r.resize(0);
  none.w0.resize(0);
  SimConfig cfg{g, sc.dt, 1.0, 200};
  TimeSeries ts = simulate_open_loop(plant, none, [](double) { return Complex(0.0); },
                                     ComplexProfile(g, 1.0), cfg);
  const auto& E = ts.values("E");
  const auto& a0 = ts.values("abs_z0");
  const int stride = std::max(1, static_cast<int>(std::llround(2e-3 / cfg.dt)));
  double worst = 0.0;
  for (size_t i = static_cast<size_t>(std::llround(0.05 / cfg.dt)); i + stride < E.size(); ++i) {
    if (ts.times[i] > 1.0) break;
    const double dEdt = (E[i + stride] - E[i - stride]) / (2.0 * stride * cfg.dt);
    double ref = 0.0;
    for (size_t k = i - stride; k <= i + stride; ++k) {
      const double w = (k == i - stride || k == i + stride) ? 0.5 : 1.0;
      ref += w * plant.q * a0[k] * a0[k];
    }
    ref /= 2.0 * stride;
    worst = std::max(worst, std::abs(dEdt - ref) / (std::abs(ref) + 1e-12));
  }
  r.measured = worst;
  r.pass = worst < r.threshold;
  r.seconds = seconds_since(t0);
  return r;
}

// ---- C6: exact target decay -------------------------------------------------

CriterionResult criterion_target_decay(const Scenario& sc, const GainSet& gains) {
  CriterionResult r{"C6", "state feedback with w0 = 0: ||v~(t)|| e^{c_s t} constant to 1%",
                    0.0, 0.01, false, 0.0, 60.0, ""};
  const auto t0 = Clock::now();
  Scenario free_sc = sc;
  free_sc.exosystem.w0.setZero();
  SimConfig cfg{sc.grid, sc.dt, 3.0 / sc.c_s, sc.record_every};
  TimeSeries ts = simulate_state_feedback(free_sc.plant(), free_sc.exosystem, gains,
                                          free_sc.observation(), free_sc.z0, cfg);
  const auto& tv = ts.snapshot_values("norm_tv");
  const double tv0 = tv.front();
  double worst = 0.0;
  for (size_t i = 0; i < tv.size(); ++i)
    worst = std::max(worst,
                     std::abs(tv[i] * std::exp(sc.c_s * ts.snapshot_times[i]) / tv0 - 1.0));
  r.measured = worst;
  r.pass = tv0 > 1e-6 && worst < r.threshold;
  r.seconds = seconds_since(t0);
  return r;
}

// ---- C7: regulation manifold -------------------------------------------------

CriterionResult criterion_manifold(const Scenario& sc, const GainSet& gains) {
  CriterionResult r{"C7", "manifold start z0 = F^-1[m^T w0] keeps |e_y| at discretization level",
                    0.0, 1e-3, false, 0.0, 60.0, ""};
  const auto t0 = Clock::now();
  ComplexProfile mw(sc.grid);
  for (int k = 0; k < sc.exosystem.n_w(); ++k)
    for (int i = 0; i <= sc.grid.n_cells; ++i)
      mw[i] += gains.m[static_cast<size_t>(k)][i] * sc.exosystem.w0(k);
  ComplexProfile z0 = apply_inverse(gains.kernels.control_reciprocal, mw);
  SimConfig cfg{sc.grid, sc.dt, 5.0, sc.record_every};
  TimeSeries ts = simulate_state_feedback(sc.plant(), sc.exosystem, gains, sc.observation(), z0,
                                          cfg);
  double worst = 0.0;
  for (double v : ts.values("abs_ey")) worst = std::max(worst, v);
  r.measured = worst;
  r.pass = worst < r.threshold;
  r.seconds = seconds_since(t0);
  return r;
}

// ---- C8: observer decay --------------------------------------------------------

CriterionResult criterion_observer_decay(const Scenario& sc, const GainSet& gains,
                                         const TimeSeries& closed_loop) {
  CriterionResult r{"C8", "observer: ||e~|| e^{c_o t} constant to 2%; w~_r decays at the slow pole",
                    0.0, 0.02, false, 0.0, 60.0, ""};
  const auto t0 = Clock::now();
  // Short open-input run for the transformed-error ratio; the plant is
  // anti-stable, so long undriven horizons are not meaningful.
  SimConfig cfg{sc.grid, sc.dt, 3.0 / sc.c_o, sc.record_every};
  TimeSeries ts = simulate_observer(sc.plant(), sc.exosystem, gains,
                                    [](double) { return Complex(0.0); }, cfg, sc.z0, sc.zhat0,
                                    sc.what0);
  const auto& et = ts.snapshot_values("norm_etilde");
  const double e0 = et.front();
  double worst = 0.0;
  for (size_t i = 0; i < et.size(); ++i)
    worst = std::max(worst,
                     std::abs(et[i] * std::exp(sc.c_o * ts.snapshot_times[i]) / e0 - 1.0));

  // w~_r evolves autonomously under S_r + l_r q_r^T whatever drives the
  // plant; fit it on the bounded closed-loop run, past the window where
  // interference between the placed modes biases the norm slope.
  double slowest = 1e300;
  for (Complex pole : sc.poles_r) slowest = std::min(slowest, -pole.real());
  DecayFit fit = decay_fit(closed_loop.times, closed_loop.values("norm_wtilde_r"),
                           4.0 / slowest, 8.0 / slowest);
  const double rate_err = std::abs(fit.rate - slowest) / slowest;
  r.measured = worst;
  r.pass = e0 > 1e-6 && worst < 0.02 && rate_err < 0.10;
  r.detail = "w~_r fitted rate " + fmt(fit.rate) + " vs pole " + fmt(slowest);
  r.seconds = seconds_since(t0);
  return r;
}

// ---- C9: output regulation -------------------------------------------------------

CriterionResult criterion_output_regulation(const Scenario& sc, const GainSet& gains) {
  CriterionResult r{"C9", "output feedback: |e_y| decays exponentially with bounded internals",
                    0.0, 0.0, false, 0.0, 120.0, ""};
  const auto t0 = Clock::now();
  SimConfig cfg{sc.grid, sc.dt, 10.0, sc.record_every};
  TimeSeries ts = simulate_output_feedback(sc.plant(), sc.exosystem, gains, sc.observation(),
                                           cfg, sc.z0, sc.zhat0, sc.what0);
  const auto& aey = ts.values("abs_ey");
  DecayFit fit = decay_fit(ts.times, aey, 5.0, 10.0);
  double peak = 0.0;
  for (double v : aey) peak = std::max(peak, v);
  const double terminal = aey.back();

  const double scale = std::max({1.0, ts.values("norm_z").front(), sc.exosystem.w0.norm()});
  bool bounded = true;
  for (const char* name : {"norm_z", "norm_zhat", "norm_ztilde", "norm_wtilde_d",
                           "norm_wtilde_r", "abs_u"}) {
    for (double v : ts.values(name)) bounded = bounded && v < 1e3 * scale;
  }
  // weighted tail norm int e^{-2 alpha t} |e_y|^2 dt with alpha = -mu/2
  double weighted = 0.0;
  for (size_t i = 1; i < ts.times.size(); ++i) {
    const double f0 = std::exp(fit.rate * ts.times[i - 1]) * aey[i - 1] * aey[i - 1];
    const double f1 = std::exp(fit.rate * ts.times[i]) * aey[i] * aey[i];
    weighted += 0.5 * (f0 + f1) * (ts.times[i] - ts.times[i - 1]);
  }
  r.measured = fit.rate;
  r.pass = fit.rate > 0.0 && fit.r2 > 0.8 && terminal < 1e-2 * peak && bounded &&
           std::isfinite(weighted);
  r.detail = "r2 " + fmt(fit.r2) + "; terminal/peak " + fmt(terminal / peak) +
             "; weighted norm " + fmt(std::sqrt(weighted));
  r.seconds = seconds_since(t0);
  return r;
}

// ---- C10: strict properness -------------------------------------------------------

CriterionResult criterion_properness(const Scenario& sc) {
  CriterionResult r{"C10", "transfer magnitudes decrease along real s and obey the modal bound",
                    0.0, 1.0, false, 0.0, 2.0, ""};
  const auto t0 = Clock::now();
  PlantSpec plant{1.0, ComplexProfile(sc.grid), ComplexProfile(sc.grid)};
  PropernessProbe probe = strict_properness_probe(plant, sc.observation(), InputChoice::right,
                                                  {50, 100, 200, 400, 800});
  bool monotone = true;
  double worst_ratio = 0.0;
  for (size_t i = 0; i < probe.magnitudes.size(); ++i) {
    if (i + 1 < probe.magnitudes.size())
      monotone = monotone && probe.magnitudes[i] > probe.magnitudes[i + 1];
    worst_ratio = std::max(worst_ratio, probe.magnitudes[i] / probe.bounds[i]);
  }
  r.measured = worst_ratio;
  r.pass = monotone && worst_ratio <= 1.0;
  r.seconds = seconds_since(t0);
  return r;
}

// ---- C11: cross-validation ---------------------------------------------------------

CriterionResult criterion_cross_validation(const Scenario& sc, const GainSet& gains) {
  CriterionResult r{"C11", "transformed closed loop matches the directly simulated target flow",
                    0.0, 5e-3, false, 0.0, 90.0, ""};
  const auto t0 = Clock::now();
  SimConfig cfg{sc.grid, sc.dt, 3.0, sc.record_every};
  TimeSeries loop = simulate_output_feedback(sc.plant(), sc.exosystem, gains, sc.observation(),
                                             cfg, sc.z0, sc.zhat0, sc.what0);

  // target initial state and the recorded boundary drive u - s_z at half steps
  const ExosystemFlow flow(sc.exosystem);
  ComplexProfile v0 = apply_forward(gains.kernels.control, sc.z0);
  for (int k = 0; k < sc.exosystem.n_w(); ++k)
    for (int i = 0; i <= sc.grid.n_cells; ++i)
      v0[i] -= gains.m[static_cast<size_t>(k)][i] * sc.exosystem.w0(k);
  const auto& u_rec = loop.cvalues("u");
  const auto& sz_rec = loop.cvalues("s_z");
  const double dt = cfg.dt;
  TimeSignal drive = [&](double t) {
    size_t idx = static_cast<size_t>(t / dt);
    idx = std::min(idx, u_rec.size() - 2);
    return u_rec[idx + 1] - 0.5 * (sz_rec[idx] + sz_rec[idx + 1]);
  };
  TimeSeries target = simulate_target(sc.c_s, v0, drive, cfg);

  double worst = 0.0;
  for (size_t s = 0; s < loop.snapshot_times.size(); ++s) {
    const double t = loop.snapshot_times[s];
    ComplexProfile tv = apply_forward(gains.kernels.control, loop.z_snapshots[s]);
    const Eigen::VectorXd w = flow.state(t);
    for (int k = 0; k < sc.exosystem.n_w(); ++k)
      for (int i = 0; i <= sc.grid.n_cells; ++i)
        tv[i] -= gains.m[static_cast<size_t>(k)][i] * w(k);
    worst = std::max(worst, sup_diff(tv, target.z_snapshots[s]));
  }
  r.measured = worst;
  r.pass = worst < r.threshold;
  r.seconds = seconds_since(t0);
  return r;
}

// ---- C12: solvability gates ----------------------------------------------------------

CriterionResult criterion_solvability_gates() {
  CriterionResult r{"C12", "engineered lemma violations raise the named structured errors",
                    0.0, 3.0, false, 0.0, 10.0, ""};
  const auto t0 = Clock::now();
  int good = 0;
  std::string notes;

  SpatialGrid g(64);
  // (a) vanishing cosh margin: point observation at x0 = 1, near-zero kernel,
  // reference rotation at pi^2/4 with c_s -> 0
  {
    Scenario sc;
    sc.grid = g;
    sc.q = 1e-9;
    sc.h = ComplexProfile(g);
    sc.g = ComplexProfile(g);
    sc.exosystem.S_d.resize(0, 0);
    sc.exosystem.S_r.resize(2, 2);
    const double w = kPi * kPi / 4.0;
    sc.exosystem.S_r << 0, w, -w, 0;
    sc.exosystem.q_d1.resize(0);
    sc.exosystem.q_d2.resize(0);
    sc.exosystem.q_r.resize(2);
    sc.exosystem.q_r << 1, 0;
    sc.exosystem.w0 = Eigen::VectorXd::Zero(2);
    sc.theta = 1.0;
    sc.x0 = 1.0;
    sc.c = ComplexProfile(g);
    sc.c_s = 1e-9;
    sc.c_o = 1.0;
    sc.poles_r = {Complex(-1.0, 0.0), Complex(-2.0, 0.0)};
    sc.poles_d = {};
    sc.what0 = Eigen::VectorXcd::Zero(2);
    try {
      assemble_gains(sc.plant(), sc.exosystem, sc.observation(), sc.c_s, sc.c_o, sc.poles_r,
                     sc.poles_d, g);
      notes += "[cosh gate missed] ";
    } catch (const Error& e) {
      if (e.code() == Error::Code::solvability &&
          std::string(e.what()).find("cosh") != std::string::npos)
        ++good;
      else
        notes += "[cosh gate wrong error: " + std::string(e.what()) + "] ";
    }
  }
  // (b) sinh root in sigma(S_d): rotation at pi^2 with c_o -> 0
  {
    Scenario sc;
    sc.grid = g;
    sc.q = 1.0;
    sc.h = ComplexProfile(g);
    sc.g = ComplexProfile(g, 1.0);
    sc.exosystem.S_d.resize(2, 2);
    const double w = kPi * kPi;
    sc.exosystem.S_d << 0, w, -w, 0;
    sc.exosystem.S_r.resize(0, 0);
    sc.exosystem.q_d1.resize(2);
    sc.exosystem.q_d1 << 1, 0;
    sc.exosystem.q_d2.resize(2);
    sc.exosystem.q_d2 << 0, 1;
    sc.exosystem.q_r.resize(0);
    sc.exosystem.w0 = Eigen::VectorXd::Zero(2);
    sc.theta = 1.0;
    sc.x0 = 0.0;  // margin = cosh(0) = 1, so the tracking gate stays quiet
    sc.c = ComplexProfile(g);
    sc.c_s = 1.0;
    sc.c_o = 1e-9;
    sc.poles_r = {};
    sc.poles_d = {Complex(-1.0, 0.0), Complex(-2.0, 0.0)};
    sc.what0 = Eigen::VectorXcd::Zero(2);
    try {
      assemble_gains(sc.plant(), sc.exosystem, sc.observation(), sc.c_s, sc.c_o, sc.poles_r,
                     sc.poles_d, g);
      notes += "[sinh gate missed] ";
    } catch (const Error& e) {
      if (e.code() == Error::Code::solvability &&
          std::string(e.what()).find("sinh") != std::string::npos)
        ++good;
      else
        notes += "[sinh gate wrong error: " + std::string(e.what()) + "] ";
    }
  }
  // (c) unobservable (q_r^T, S_r): rejected at validation with exit hint 2
  {
    ExosystemSpec E;
    E.S_d.resize(0, 0);
    E.S_r.resize(2, 2);
    E.S_r << 0, 1, -1, 0;
    E.q_d1.resize(0);
    E.q_d2.resize(0);
    E.q_r = Eigen::VectorXd::Zero(2);
    E.w0 = Eigen::VectorXd::Zero(2);
    try {
      E.validate();
      notes += "[observability gate missed] ";
    } catch (const Error& e) {
      if (e.code() == Error::Code::config &&
          std::string(e.what()).find("observable") != std::string::npos)
        ++good;
      else
        notes += "[observability gate wrong error] ";
    }
  }
  r.measured = good;
  r.pass = good == 3;
  r.detail = notes.empty() ? "cosh -> exit 3, sinh -> exit 3, observability -> exit 2" : notes;
  r.seconds = seconds_since(t0);
  return r;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const Scenario& sc) {
  sc.validate();
  std::vector<CriterionResult> out;
  out.push_back(criterion_kernel_oracle());

  // one synthesis shared by the scenario-bound criteria
  GainSet gains = assemble_gains(sc.plant(), sc.exosystem, sc.observation(), sc.c_s, sc.c_o,
                                 sc.poles_r, sc.poles_d, sc.grid);

  out.push_back(criterion_round_trip(gains.kernels));
  out.push_back(criterion_spectrum());
  out.push_back(criterion_regulator_residuals(sc, gains));
  out.push_back(criterion_energy_identity(sc));
  out.push_back(criterion_target_decay(sc, gains));
  out.push_back(criterion_manifold(sc, gains));
  out.push_back(criterion_observer_decay(sc, gains));
  out.push_back(criterion_output_regulation(sc, gains));
  out.push_back(criterion_properness(sc));
  out.push_back(criterion_cross_validation(sc, gains));
  out.push_back(criterion_solvability_gates());
  return out;
}

void write_report_json(const std::vector<CriterionResult>& results,
                       const std::string& scenario_name, const std::filesystem::path& path) {
  nlohmann::ordered_json doc;
  doc["scenario"] = scenario_name;
  nlohmann::ordered_json criteria = nlohmann::ordered_json::array();
  for (const CriterionResult& r : results) {
    nlohmann::ordered_json c;
    c["id"] = r.id;
    c["description"] = r.description;
    c["measured"] = r.measured;
    c["threshold"] = r.threshold;
    c["pass"] = r.pass;
    criteria.push_back(c);
  }
  doc["criteria"] = criteria;
  doc["exit_hint"] = verification_exit_code(results);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_config("cannot write " + path.string());
  out << doc.dump(1) << "\n";
}

int verification_exit_code(const std::vector<CriterionResult>& results) {
  for (const CriterionResult& r : results)
    if (!r.pass) return 1;
  return 0;
}

}  // namespace schreg
