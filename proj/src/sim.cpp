#include "schreg/sim.hpp"

#include <algorithm>
#include <cmath>

namespace schreg {

namespace {

constexpr Complex kI(0.0, 1.0);

double trap_norm(const std::vector<Complex>& v, double spacing) {
  const size_t n = v.size() - 1;
  double acc = 0.5 * (std::norm(v[0]) + std::norm(v[n]));
  for (size_t i = 1; i < n; ++i) acc += std::norm(v[i]);
  return std::sqrt(acc * spacing);
}

Complex eval_Ce_raw(const ObservationFunctional& C, const std::vector<Complex>& z,
                    const SpatialGrid& g) {
  Complex point = 0.0;
  if (C.theta != Complex(0.0)) {
    double x = std::clamp(C.x0, 0.0, 1.0);
    int i = std::min(static_cast<int>(x / g.spacing), g.n_cells - 1);
    const double frac = (x - g.node(i)) / g.spacing;
    point = C.theta * ((1.0 - frac) * z[static_cast<size_t>(i)] +
                       frac * z[static_cast<size_t>(i + 1)]);
  }
  Complex acc = 0.5 * (C.c[0] * z[0] + C.c[g.n_cells] * z[static_cast<size_t>(g.n_cells)]);
  for (int i = 1; i < g.n_cells; ++i) acc += C.c[i] * z[static_cast<size_t>(i)];
  return point + acc * g.spacing;
}

Eigen::MatrixXcd matexp(const Eigen::MatrixXcd& M, double t) {
  const int n = static_cast<int>(M.rows());
  if (n == 0) return Eigen::MatrixXcd(0, 0);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(M);
  Eigen::VectorXcd ex(n);
  for (int i = 0; i < n; ++i) ex(i) = std::exp(es.eigenvalues()(i) * t);
  return es.eigenvectors() * ex.asDiagonal() * es.eigenvectors().fullPivLu().inverse();
}

ComplexProfile to_profile(const SpatialGrid& g, const std::vector<Complex>& v) {
  ComplexProfile p(g);
  p.values = v;
  return p;
}

void guard_divergence(double norm, double t) {
  if (!(norm < 1e6))
    throw_numeric("simulation diverged: state norm " + std::to_string(norm) + " at t = " +
                  std::to_string(t));
}

}  // namespace

int SimConfig::steps() const { return static_cast<int>(std::llround(horizon / dt)); }

void SimConfig::validate() const {
  if (dt <= 0.0) throw_config("SimConfig: dt must be positive");
  if (horizon < dt) throw_config("SimConfig: horizon must cover at least one step");
  if (record_every < 1) throw_config("SimConfig: record_every must be positive");
  if (grid.n_cells < 8) throw_config("SimConfig: grid too coarse");
}

int TimeSeries::add_channel(const std::string& name) {
  names.push_back(name);
  data.emplace_back();
  return static_cast<int>(names.size()) - 1;
}

int TimeSeries::add_complex_channel(const std::string& name) {
  cnames.push_back(name);
  cdata.emplace_back();
  return static_cast<int>(cnames.size()) - 1;
}

int TimeSeries::add_snapshot_channel(const std::string& name) {
  snap_names.push_back(name);
  snap_data.emplace_back();
  return static_cast<int>(snap_names.size()) - 1;
}

bool TimeSeries::has_channel(const std::string& name) const {
  return std::find(names.begin(), names.end(), name) != names.end();
}

const std::vector<double>& TimeSeries::values(const std::string& name) const {
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return data[i];
  throw_config("TimeSeries: unknown channel '" + name + "'");
}

const std::vector<Complex>& TimeSeries::cvalues(const std::string& name) const {
  for (size_t i = 0; i < cnames.size(); ++i)
    if (cnames[i] == name) return cdata[i];
  throw_config("TimeSeries: unknown complex channel '" + name + "'");
}

const std::vector<double>& TimeSeries::snapshot_values(const std::string& name) const {
  for (size_t i = 0; i < snap_names.size(); ++i)
    if (snap_names[i] == name) return snap_data[i];
  throw_config("TimeSeries: unknown snapshot channel '" + name + "'");
}

CrankNicolsonStepper::CrankNicolsonStepper(const SpatialGrid& grid, double q,
                                           const ComplexProfile& a, double dt)
    : grid_(grid), dt_(dt), bc_scale_(2.0 / grid.spacing) {
  if (dt <= 0.0) throw_config("CrankNicolsonStepper: dt must be positive");
  if (!(a.grid == grid)) throw_config("CrankNicolsonStepper: coefficient grid mismatch");
  const int n = grid.n_cells;
  const size_t sz = static_cast<size_t>(n + 1);
  const double d2 = grid.spacing * grid.spacing;

  std::vector<Complex> Lsub(sz, 0.0), Ldia(sz, 0.0), Lsup(sz, 0.0);
  for (int j = 0; j <= n; ++j) Ldia[static_cast<size_t>(j)] = 2.0 * kI / d2 + a[j];
  for (int j = 1; j < n; ++j) {
    Lsub[static_cast<size_t>(j)] = -kI / d2;
    Lsup[static_cast<size_t>(j)] = -kI / d2;
  }
  Ldia[0] += 2.0 * q / grid.spacing;  // ghost-point Robin term
  Lsup[0] = -2.0 * kI / d2;
  Lsub[static_cast<size_t>(n)] = -2.0 * kI / d2;

  const double half = 0.5 * dt;
  b_sub_.resize(sz);
  b_dia_.resize(sz);
  b_sup_.resize(sz);
  asub_.resize(sz);
  denom_.resize(sz);
  cp_.resize(sz);
  scratch_.resize(sz);
  std::vector<Complex> adia(sz), asup(sz);
  for (size_t j = 0; j < sz; ++j) {
    b_sub_[j] = half * Lsub[j];
    b_dia_[j] = 1.0 + half * Ldia[j];
    b_sup_[j] = half * Lsup[j];
    asub_[j] = -half * Lsub[j];
    adia[j] = 1.0 - half * Ldia[j];
    asup[j] = -half * Lsup[j];
  }
  denom_[0] = adia[0];
  if (std::abs(denom_[0]) < 1e-300) throw_numeric("CrankNicolsonStepper: singular pivot");
  cp_[0] = asup[0] / denom_[0];
  for (int j = 1; j <= n; ++j) {
    const size_t js = static_cast<size_t>(j);
    denom_[js] = adia[js] - asub_[js] * cp_[js - 1];
    if (std::abs(denom_[js]) < 1e-300) throw_numeric("CrankNicolsonStepper: singular pivot");
    cp_[js] = asup[js] / denom_[js];
  }

  std::vector<Complex> f(sz, 0.0);
  f[static_cast<size_t>(n)] = -bc_scale_ * kI;
  bcr_response_ = response(f);
}

void CrankNicolsonStepper::solve(std::vector<Complex>& rhs) const {
  const int n = grid_.n_cells;
  rhs[0] /= denom_[0];
  for (int j = 1; j <= n; ++j) {
    const size_t js = static_cast<size_t>(j);
    rhs[js] = (rhs[js] - asub_[js] * rhs[js - 1]) / denom_[js];
  }
  for (int j = n - 1; j >= 0; --j) {
    const size_t js = static_cast<size_t>(j);
    rhs[js] -= cp_[js] * rhs[js + 1];
  }
}

void CrankNicolsonStepper::step(std::vector<Complex>& z, Complex bcl, Complex bcr,
                                const Complex* source) const {
  const int n = grid_.n_cells;
  std::vector<Complex>& rhs = scratch_;
  rhs[0] = b_dia_[0] * z[0] + b_sup_[0] * z[1] + dt_ * (bc_scale_ * kI * bcl);
  for (int j = 1; j < n; ++j) {
    const size_t js = static_cast<size_t>(j);
    rhs[js] = b_sub_[js] * z[js - 1] + b_dia_[js] * z[js] + b_sup_[js] * z[js + 1];
  }
  const size_t ns = static_cast<size_t>(n);
  rhs[ns] = b_sub_[ns] * z[ns - 1] + b_dia_[ns] * z[ns] + dt_ * (-bc_scale_ * kI * bcr);
  if (source != nullptr)
    for (size_t j = 0; j <= ns; ++j) rhs[j] += dt_ * source[j];
  solve(rhs);
  z.swap(rhs);
}

std::vector<Complex> CrankNicolsonStepper::response(const std::vector<Complex>& forcing) const {
  std::vector<Complex> r(forcing.size());
  for (size_t j = 0; j < forcing.size(); ++j) r[j] = dt_ * forcing[j];
  solve(r);
  return r;
}

ComplexProfile step_schrodinger(const ComplexProfile& z, const PlantSpec& plant, Complex bc_left,
                                Complex bc_right, const ComplexProfile& source, double dt) {
  require_same_grid(z, plant.h, "step_schrodinger");
  require_same_grid(z, source, "step_schrodinger");
  CrankNicolsonStepper stepper(z.grid, plant.q, plant.h, dt);
  std::vector<Complex> v = z.values;
  stepper.step(v, bc_left, bc_right, source.values.data());
  return to_profile(z.grid, v);
}

Complex feedback_functional(const FeedbackTrace& tr, const std::vector<Complex>& f) {
  const SpatialGrid g = tr.kx1.grid;
  const int n = g.n_cells;
  Complex acc = 0.5 * (tr.kx1[0] * f[0] + tr.kx1[n] * f[static_cast<size_t>(n)]);
  for (int j = 1; j < n; ++j) acc += tr.kx1[j] * f[static_cast<size_t>(j)];
  return tr.k11 * f[static_cast<size_t>(n)] + acc * g.spacing;
}

TimeSeries simulate_open_loop(const PlantSpec& plant, const ExosystemSpec& E, const TimeSignal& u,
                              const ComplexProfile& z0, const SimConfig& cfg) {
  cfg.validate();
  if (!(z0.grid == cfg.grid) || !(plant.grid() == cfg.grid))
    throw_config("simulate_open_loop: grid mismatch");
  const SpatialGrid g = cfg.grid;
  const double dt = cfg.dt;
  const ExosystemFlow flow(E);
  CrankNicolsonStepper stepper(g, plant.q, plant.h, dt);

  TimeSeries ts;
  const int cE = ts.add_channel("E");
  const int cNz = ts.add_channel("norm_z");
  const int cAbs0 = ts.add_channel("abs_z0");
  const int cAbs1 = ts.add_channel("abs_z1");
  const int cD1 = ts.add_channel("d1");
  const int cD2 = ts.add_channel("d2");
  const int cR = ts.add_channel("r");
  const int cAu = ts.add_channel("abs_u");
  const int cu = ts.add_complex_channel("u");
  std::vector<int> cw;
  for (int k = 0; k < E.n_w(); ++k) cw.push_back(ts.add_channel("w_" + std::to_string(k)));

  std::vector<Complex> z = z0.values;
  std::vector<Complex> source(z.size(), 0.0);
  const int steps = cfg.steps();

  auto record = [&](double t, Complex uval) {
    const double nz = trap_norm(z, g.spacing);
    guard_divergence(nz, t);
    ts.times.push_back(t);
    ts.data[static_cast<size_t>(cE)].push_back(0.5 * nz * nz);
    ts.data[static_cast<size_t>(cNz)].push_back(nz);
    ts.data[static_cast<size_t>(cAbs0)].push_back(std::abs(z[0]));
    ts.data[static_cast<size_t>(cAbs1)].push_back(std::abs(z.back()));
    ts.data[static_cast<size_t>(cD1)].push_back(flow.d1(t));
    ts.data[static_cast<size_t>(cD2)].push_back(flow.d2(t));
    ts.data[static_cast<size_t>(cR)].push_back(flow.r(t));
    ts.data[static_cast<size_t>(cAu)].push_back(std::abs(uval));
    ts.cdata[static_cast<size_t>(cu)].push_back(uval);
    const Eigen::VectorXd w = flow.state(t);
    for (int k = 0; k < E.n_w(); ++k)
      ts.data[static_cast<size_t>(cw[static_cast<size_t>(k)])].push_back(w(k));
  };
  auto snapshot = [&](double t) {
    ts.snapshot_times.push_back(t);
    ts.z_snapshots.push_back(to_profile(g, z));
  };

  record(0.0, u(0.0));
  snapshot(0.0);
  for (int s = 0; s < steps; ++s) {
    const double t = s * dt;
    const double th = t + 0.5 * dt;
    const double d1h = flow.d1(th);
    for (size_t j = 0; j < z.size(); ++j) source[j] = plant.g[static_cast<int>(j)] * d1h;
    const Complex uh = u(th);
    stepper.step(z, flow.d2(th), uh, source.data());
    record(t + dt, uh);
    if ((s + 1) % cfg.record_every == 0 || s + 1 == steps) snapshot(t + dt);
  }
  return ts;
}

TimeSeries simulate_state_feedback(const PlantSpec& plant, const ExosystemSpec& E,
                                   const GainSet& gains, const ObservationFunctional& C,
                                   const ComplexProfile& z0, const SimConfig& cfg) {
  cfg.validate();
  if (!(z0.grid == cfg.grid) || !(plant.grid() == cfg.grid))
    throw_config("simulate_state_feedback: grid mismatch");
  const SpatialGrid g = cfg.grid;
  const double dt = cfg.dt;
  const ExosystemFlow flow(E);
  CrankNicolsonStepper stepper(g, plant.q, plant.h, dt);
  const std::vector<Complex>& r_u = stepper.bcr_response();
  // the boundary feedback is affine in the new state; solving the scalar
  // fixed point keeps the trapezoidal (half-step) coupling without a dense
  // implicit system
  const Complex denom_u = 1.0 - 0.5 * feedback_functional(gains.feedback, r_u);
  const Eigen::VectorXd pr = E.p_r();

  TimeSeries ts;
  const int cE = ts.add_channel("E");
  const int cNz = ts.add_channel("norm_z");
  const int cAey = ts.add_channel("abs_ey");
  const int cAu = ts.add_channel("abs_u");
  const int cey = ts.add_complex_channel("ey");
  const int cu = ts.add_complex_channel("u");
  std::vector<int> cw;
  for (int k = 0; k < E.n_w(); ++k) cw.push_back(ts.add_channel("w_" + std::to_string(k)));
  const int sTv = ts.add_snapshot_channel("norm_tv");

  std::vector<Complex> z = z0.values;
  std::vector<Complex> source(z.size(), 0.0);
  const int steps = cfg.steps();

  auto instant_u = [&](double t) {
    Complex acc = feedback_functional(gains.feedback, z);
    const Eigen::VectorXd w = flow.state(t);
    for (int k = 0; k < E.n_w(); ++k) acc += gains.m_w(k) * w(k);
    return acc;
  };
  auto record = [&](double t, Complex uval) {
    const double nz = trap_norm(z, g.spacing);
    guard_divergence(nz, t);
    const Eigen::VectorXd w = flow.state(t);
    Complex ey = eval_Ce_raw(C, z, g);
    for (int k = 0; k < E.n_w(); ++k) ey -= pr(k) * w(k);
    ts.times.push_back(t);
    ts.data[static_cast<size_t>(cE)].push_back(0.5 * nz * nz);
    ts.data[static_cast<size_t>(cNz)].push_back(nz);
    ts.data[static_cast<size_t>(cAey)].push_back(std::abs(ey));
    ts.data[static_cast<size_t>(cAu)].push_back(std::abs(uval));
    ts.cdata[static_cast<size_t>(cey)].push_back(ey);
    ts.cdata[static_cast<size_t>(cu)].push_back(uval);
    for (int k = 0; k < E.n_w(); ++k)
      ts.data[static_cast<size_t>(cw[static_cast<size_t>(k)])].push_back(w(k));
  };
  auto snapshot = [&](double t) {
    ts.snapshot_times.push_back(t);
    ComplexProfile zp = to_profile(g, z);
    ts.z_snapshots.push_back(zp);
    ComplexProfile tv = apply_forward(gains.kernels.control, zp);
    const Eigen::VectorXd w = flow.state(t);
    for (int k = 0; k < E.n_w(); ++k)
      for (int i = 0; i <= g.n_cells; ++i) tv[i] -= gains.m[static_cast<size_t>(k)][i] * w(k);
    ts.snap_data[static_cast<size_t>(sTv)].push_back(l2_norm(tv));
  };

  record(0.0, instant_u(0.0));
  snapshot(0.0);
  for (int s = 0; s < steps; ++s) {
    const double t = s * dt;
    const double th = t + 0.5 * dt;
    const double d1h = flow.d1(th);
    for (size_t j = 0; j < z.size(); ++j) source[j] = plant.g[static_cast<int>(j)] * d1h;

    const Complex phi_old = feedback_functional(gains.feedback, z);
    std::vector<Complex> zp = z;
    stepper.step(zp, flow.d2(th), 0.0, source.data());

    Complex ff = 0.0;
    const Eigen::VectorXd wh = flow.state(th);
    for (int k = 0; k < E.n_w(); ++k) ff += gains.m_w(k) * wh(k);
    const Complex uh =
        (0.5 * phi_old + 0.5 * feedback_functional(gains.feedback, zp) + ff) / denom_u;
    for (size_t j = 0; j < z.size(); ++j) z[j] = zp[j] + uh * r_u[j];

    record(t + dt, uh);
    if ((s + 1) % cfg.record_every == 0 || s + 1 == steps) snapshot(t + dt);
  }
  return ts;
}

namespace {

// Shared core of the observer and output-feedback runs. When `C` is null the
// input signal `u_ext` drives the plant (observer study); otherwise the
// control law reads the observer states (output feedback).
TimeSeries co_simulate(const PlantSpec& plant, const ExosystemSpec& E, const GainSet& gains,
                       const ObservationFunctional* C, const TimeSignal& u_ext,
                       const SimConfig& cfg, const ComplexProfile& z0,
                       const ComplexProfile& zhat0, const Eigen::VectorXcd& what0) {
  cfg.validate();
  if (!(z0.grid == cfg.grid) || !(zhat0.grid == cfg.grid) || !(plant.grid() == cfg.grid))
    throw_config("co_simulate: grid mismatch");
  if (what0.size() != E.n_w()) throw_config("co_simulate: bad observer initial state size");
  const SpatialGrid g = cfg.grid;
  const int n = g.n_cells;
  const double dt = cfg.dt;
  const int nd = E.n_d(), nr = E.n_r();
  const ExosystemFlow flow(E);
  CrankNicolsonStepper stepper(g, plant.q, plant.h, dt);

  // rank-one response to the measurement-injection channels l(x), l0
  std::vector<Complex> inj_forcing(static_cast<size_t>(n + 1));
  for (int j = 0; j <= n; ++j) inj_forcing[static_cast<size_t>(j)] = gains.l_profile[j];
  inj_forcing[static_cast<size_t>(n)] += gains.l0 * (-2.0 / g.spacing * kI);
  const std::vector<Complex> r_inj = stepper.response(inj_forcing);
  const Complex denom_inj = 1.0 - 0.5 * r_inj[static_cast<size_t>(n)];

  const Eigen::MatrixXcd Ed = matexp(E.S_d.cast<Complex>(), dt);
  const Eigen::MatrixXcd Ed2 = matexp(E.S_d.cast<Complex>(), 0.5 * dt);
  const Eigen::MatrixXcd Er = matexp(gains.A_r.cast<Complex>(), dt);
  const Eigen::MatrixXcd Er2 = matexp(gains.A_r.cast<Complex>(), 0.5 * dt);
  const Eigen::VectorXcd lr = gains.l_r.cast<Complex>();
  const Eigen::VectorXd pr = E.p_r();

  TimeSeries ts;
  const int cE = ts.add_channel("E");
  const int cNz = ts.add_channel("norm_z");
  const int cNzh = ts.add_channel("norm_zhat");
  const int cNzt = ts.add_channel("norm_ztilde");
  const int cNwd = ts.add_channel("norm_wtilde_d");
  const int cNwr = ts.add_channel("norm_wtilde_r");
  const int cAu = ts.add_channel("abs_u");
  const int cu = ts.add_complex_channel("u");
  const int cinj = ts.add_complex_channel("inj");
  int cAey = -1, cey = -1, csz = -1, ctb = -1;
  if (C != nullptr) {
    cAey = ts.add_channel("abs_ey");
    cey = ts.add_complex_channel("ey");
    csz = ts.add_complex_channel("s_z");
    ctb = ts.add_complex_channel("target_bc");
  }
  std::vector<int> cw, cwh;
  for (int k = 0; k < E.n_w(); ++k) cw.push_back(ts.add_channel("w_" + std::to_string(k)));
  for (int k = 0; k < E.n_w(); ++k)
    cwh.push_back(ts.add_complex_channel("what_" + std::to_string(k)));
  const int sEt = ts.add_snapshot_channel("norm_etilde");
  int sTv = -1;
  if (C != nullptr) sTv = ts.add_snapshot_channel("norm_tv");

  std::vector<Complex> z = z0.values, zh = zhat0.values;
  Eigen::VectorXcd wd = what0.head(nd), wr = what0.tail(nr);
  std::vector<Complex> src_z(z.size()), src_zh(z.size());
  const int steps = cfg.steps();

  auto control_value = [&](double t) -> Complex {
    if (C == nullptr) return u_ext(t);
    Complex acc = feedback_functional(gains.feedback, zh);
    for (int k = 0; k < nd; ++k) acc += gains.m_w(k) * wd(k);
    for (int k = 0; k < nr; ++k) acc += gains.m_w(nd + k) * wr(k);
    return acc;
  };

  auto record = [&](double t, Complex uval, Complex injval) {
    const double nz = trap_norm(z, g.spacing);
    const double nzh = trap_norm(zh, g.spacing);
    guard_divergence(std::max(nz, nzh), t);
    const Eigen::VectorXd w = flow.state(t);
    Eigen::VectorXcd wtd = wd - w.head(nd).cast<Complex>();
    Eigen::VectorXcd wtr = wr - w.tail(nr).cast<Complex>();
    double nzt = 0.0;
    {
      double acc = 0.5 * (std::norm(zh[0] - z[0]) +
                          std::norm(zh[static_cast<size_t>(n)] - z[static_cast<size_t>(n)]));
      for (int j = 1; j < n; ++j) acc += std::norm(zh[static_cast<size_t>(j)] - z[static_cast<size_t>(j)]);
      nzt = std::sqrt(acc * g.spacing);
    }
    ts.times.push_back(t);
    ts.data[static_cast<size_t>(cE)].push_back(0.5 * nz * nz);
    ts.data[static_cast<size_t>(cNz)].push_back(nz);
    ts.data[static_cast<size_t>(cNzh)].push_back(nzh);
    ts.data[static_cast<size_t>(cNzt)].push_back(nzt);
    ts.data[static_cast<size_t>(cNwd)].push_back(wtd.norm());
    ts.data[static_cast<size_t>(cNwr)].push_back(wtr.norm());
    ts.data[static_cast<size_t>(cAu)].push_back(std::abs(uval));
    ts.cdata[static_cast<size_t>(cu)].push_back(uval);
    ts.cdata[static_cast<size_t>(cinj)].push_back(injval);
    if (C != nullptr) {
      Complex ey = eval_Ce_raw(*C, z, g);
      for (int k = 0; k < E.n_w(); ++k) ey -= pr(k) * w(k);
      ts.data[static_cast<size_t>(cAey)].push_back(std::abs(ey));
      ts.cdata[static_cast<size_t>(cey)].push_back(ey);
      Complex sz = feedback_functional(gains.feedback, z);
      for (int k = 0; k < E.n_w(); ++k) sz += gains.m_w(k) * w(k);
      ts.cdata[static_cast<size_t>(csz)].push_back(sz);
      // boundary value seen by the transformed closed loop
      std::vector<Complex> zt(z.size());
      for (size_t j = 0; j < z.size(); ++j) zt[j] = zh[j] - z[j];
      Complex tb = feedback_functional(gains.feedback, zt);
      for (int k = 0; k < nd; ++k) tb += gains.m_w(k) * wtd(k);
      for (int k = 0; k < nr; ++k) tb += gains.m_w(nd + k) * wtr(k);
      ts.cdata[static_cast<size_t>(ctb)].push_back(tb);
    }
    for (int k = 0; k < E.n_w(); ++k)
      ts.data[static_cast<size_t>(cw[static_cast<size_t>(k)])].push_back(w(k));
    for (int k = 0; k < nd; ++k)
      ts.cdata[static_cast<size_t>(cwh[static_cast<size_t>(k)])].push_back(wd(k));
    for (int k = 0; k < nr; ++k)
      ts.cdata[static_cast<size_t>(cwh[static_cast<size_t>(nd + k)])].push_back(wr(k));
  };

  auto snapshot = [&](double t) {
    ts.snapshot_times.push_back(t);
    ComplexProfile zp = to_profile(g, z);
    ComplexProfile zhp = to_profile(g, zh);
    ts.z_snapshots.push_back(zp);
    ts.zhat_snapshots.push_back(zhp);
    const Eigen::VectorXd w = flow.state(t);
    // transformed observer error: F_o^{-1}[ztilde] - n^T wtilde_d
    ComplexProfile et = apply_observer_inverse(gains.kernels.observer_reciprocal, zhp - zp);
    for (int k = 0; k < nd; ++k) {
      const Complex wt = wd(k) - Complex(w(k));
      for (int i = 0; i <= n; ++i) et[i] -= gains.n[static_cast<size_t>(k)][i] * wt;
    }
    ts.snap_data[static_cast<size_t>(sEt)].push_back(l2_norm(et));
    if (C != nullptr) {
      ComplexProfile tv = apply_forward(gains.kernels.control, zp);
      for (int k = 0; k < E.n_w(); ++k)
        for (int i = 0; i <= n; ++i) tv[i] -= gains.m[static_cast<size_t>(k)][i] * w(k);
      ts.snap_data[static_cast<size_t>(sTv)].push_back(l2_norm(tv));
    }
  };

  record(0.0, control_value(0.0), zh.back() - z.back());
  snapshot(0.0);
  for (int s = 0; s < steps; ++s) {
    const double t = s * dt;
    const double th = t + 0.5 * dt;
    // the control applied on this step: half-step sample for an external
    // signal, previous-step observer read for feedback (causal coupling)
    const Complex u_applied = C == nullptr ? u_ext(th) : control_value(t);

    const double d1h = flow.d1(th);
    const double d2h = flow.d2(th);
    for (size_t j = 0; j < z.size(); ++j) src_z[j] = plant.g[static_cast<int>(j)] * d1h;
    const Complex z1_old = z[static_cast<size_t>(n)];
    stepper.step(z, d2h, u_applied, src_z.data());
    const Complex ym_half = 0.5 * (z1_old + z[static_cast<size_t>(n)]);

    // disturbance-observer predictor at the half step
    const Complex inj_lag = zh[static_cast<size_t>(n)] - z1_old;
    Eigen::VectorXcd wd_half = wd;
    if (nd > 0) {
      const Eigen::VectorXcd wd_pred = Ed * wd + dt * (Ed2 * (gains.l_d * inj_lag));
      wd_half = 0.5 * (wd + wd_pred);
    }
    Complex d1h_hat = 0.0, d2h_hat = 0.0;
    for (int k = 0; k < nd; ++k) {
      d1h_hat += E.q_d1(k) * wd_half(k);
      d2h_hat += E.q_d2(k) * wd_half(k);
    }
    for (size_t j = 0; j < zh.size(); ++j) src_zh[j] = plant.g[static_cast<int>(j)] * d1h_hat;

    const Complex zh1_old = zh[static_cast<size_t>(n)];
    stepper.step(zh, d2h_hat, u_applied, src_zh.data());
    // implicit solve of the rank-one injection inj = zhat(1) - y_m at the
    // half step
    const Complex inj =
        (0.5 * (zh1_old + zh[static_cast<size_t>(n)]) - ym_half) / denom_inj;
    for (size_t j = 0; j < zh.size(); ++j) zh[j] += inj * r_inj[j];

    if (nd > 0) wd = Ed * wd + dt * (Ed2 * (gains.l_d * inj));
    if (nr > 0) wr = Er * wr + dt * (Er2 * (-lr * flow.r(th)));

    record(t + dt, u_applied, inj);
    if ((s + 1) % cfg.record_every == 0 || s + 1 == steps) snapshot(t + dt);
  }
  return ts;
}

}  // namespace

TimeSeries simulate_observer(const PlantSpec& plant, const ExosystemSpec& E, const GainSet& gains,
                             const TimeSignal& u, const SimConfig& cfg, const ComplexProfile& z0,
                             const ComplexProfile& zhat0, const Eigen::VectorXcd& what0) {
  return co_simulate(plant, E, gains, nullptr, u, cfg, z0, zhat0, what0);
}

TimeSeries simulate_output_feedback(const PlantSpec& plant, const ExosystemSpec& E,
                                    const GainSet& gains, const ObservationFunctional& C,
                                    const SimConfig& cfg, const ComplexProfile& z0,
                                    const ComplexProfile& zhat0, const Eigen::VectorXcd& what0) {
  return co_simulate(plant, E, gains, &C, TimeSignal(), cfg, z0, zhat0, what0);
}

TimeSeries simulate_target(double c, const ComplexProfile& v0, const TimeSignal& boundary_right,
                           const SimConfig& cfg) {
  cfg.validate();
  if (!(v0.grid == cfg.grid)) throw_config("simulate_target: grid mismatch");
  const SpatialGrid g = cfg.grid;
  const double dt = cfg.dt;
  ComplexProfile damping(g, Complex(-c, 0.0));
  CrankNicolsonStepper stepper(g, 0.0, damping, dt);

  TimeSeries ts;
  const int cE = ts.add_channel("E");
  const int cNv = ts.add_channel("norm_v");
  std::vector<Complex> v = v0.values;
  const int steps = cfg.steps();

  auto record = [&](double t) {
    const double nv = trap_norm(v, g.spacing);
    guard_divergence(nv, t);
    ts.times.push_back(t);
    ts.data[static_cast<size_t>(cE)].push_back(0.5 * nv * nv);
    ts.data[static_cast<size_t>(cNv)].push_back(nv);
  };
  auto snapshot = [&](double t) {
    ts.snapshot_times.push_back(t);
    ts.z_snapshots.push_back(to_profile(g, v));
  };

  record(0.0);
  snapshot(0.0);
  for (int s = 0; s < steps; ++s) {
    const double t = s * dt;
    stepper.step(v, 0.0, boundary_right(t + 0.5 * dt), nullptr);
    record(t + dt);
    if ((s + 1) % cfg.record_every == 0 || s + 1 == steps) snapshot(t + dt);
  }
  return ts;
}

DecayFit decay_fit(const std::vector<double>& t, const std::vector<double>& value, double t_a,
                   double t_b) {
  if (t.size() != value.size()) throw_config("decay_fit: mismatched series lengths");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_a || t[i] > t_b) continue;
    const double y = std::log(std::max(value[i], 1e-14));
    sx += t[i];
    sy += y;
    sxx += t[i] * t[i];
    sxy += t[i] * y;
    ++count;
  }
  if (count < 10) throw_config("decay_fit: fewer than 10 samples in the window");
  const double det = count * sxx - sx * sx;
  const double slope = (count * sxy - sx * sy) / det;
  const double intercept = (sy - slope * sx) / count;

  double ss_res = 0, ss_tot = 0;
  const double ymean = sy / count;
  for (size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_a || t[i] > t_b) continue;
    const double y = std::log(std::max(value[i], 1e-14));
    ss_res += (y - intercept - slope * t[i]) * (y - intercept - slope * t[i]);
    ss_tot += (y - ymean) * (y - ymean);
  }
  DecayFit fit;
  fit.amplitude = std::exp(intercept);
  fit.rate = -slope;
  const double tot_floor = 1e-20 * count * std::max(1.0, ymean * ymean);
  fit.r2 = ss_tot > tot_floor ? 1.0 - ss_res / ss_tot : (ss_res <= tot_floor ? 1.0 : 0.0);
  return fit;
}

}  // namespace schreg
