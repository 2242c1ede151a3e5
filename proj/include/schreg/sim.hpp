#pragma once

#include "schreg/core.hpp"
#include "schreg/regulator.hpp"

namespace schreg {

struct SimConfig {
  SpatialGrid grid;
  double dt = 1e-4;
  double horizon = 1.0;
  int record_every = 100;  // snapshot cadence in steps

  int steps() const;
  void validate() const;
};

using TimeSignal = std::function<Complex(double)>;

/// Recorded trajectory: per-step scalar channels (real and complex) plus
/// profile snapshots every `record_every` steps. Append-only during a run.
struct TimeSeries {
  std::vector<double> times;
  std::vector<std::string> names;
  std::vector<std::vector<double>> data;
  std::vector<std::string> cnames;
  std::vector<std::vector<Complex>> cdata;

  std::vector<double> snapshot_times;
  std::vector<ComplexProfile> z_snapshots;
  std::vector<ComplexProfile> zhat_snapshots;
  std::vector<std::string> snap_names;  // per-snapshot scalar channels
  std::vector<std::vector<double>> snap_data;

  int add_channel(const std::string& name);
  int add_complex_channel(const std::string& name);
  int add_snapshot_channel(const std::string& name);
  const std::vector<double>& values(const std::string& name) const;
  const std::vector<Complex>& cvalues(const std::string& name) const;
  const std::vector<double>& snapshot_values(const std::string& name) const;
  bool has_channel(const std::string& name) const;
};

/// Crank-Nicolson stepper for z_t = -i z_xx + a(x) z + f(x,t) with the
/// ghost-point boundary conditions z_x(0) = -i q z(0) + bcl(t) and
/// z_x(1) = bcr(t). The implicit tridiagonal factorization is done once;
/// each step is one Thomas substitution. Boundary data and sources are
/// expected at the half step.
class CrankNicolsonStepper {
 public:
  CrankNicolsonStepper(const SpatialGrid& grid, double q, const ComplexProfile& a, double dt);

  void step(std::vector<Complex>& z, Complex bcl, Complex bcr, const Complex* source) const;

  /// x = A^{-1} (dt * forcing), the per-step response to a constant forcing
  /// vector; used to make rank-one boundary couplings implicit.
  std::vector<Complex> response(const std::vector<Complex>& forcing) const;

  /// Response to a unit right-boundary value.
  const std::vector<Complex>& bcr_response() const { return bcr_response_; }

  const SpatialGrid& grid() const { return grid_; }
  double dt() const { return dt_; }

 private:
  void solve(std::vector<Complex>& rhs) const;  // in place, prefactored Thomas

  SpatialGrid grid_;
  double dt_ = 0.0;
  double bc_scale_ = 0.0;  // 2/spacing
  std::vector<Complex> b_sub_, b_dia_, b_sup_;  // explicit side I + dt/2 L
  std::vector<Complex> asub_, denom_, cp_;      // factored implicit side
  std::vector<Complex> bcr_response_;
  mutable std::vector<Complex> scratch_;
};

/// One Crank-Nicolson step of the plant equation; `bc_left` is the value of
/// z_x(0) + i q z(0) (that is, d2) and `bc_right` the value of z_x(1) (u),
/// both at the half step.
ComplexProfile step_schrodinger(const ComplexProfile& z, const PlantSpec& plant, Complex bc_left,
                                Complex bc_right, const ComplexProfile& source, double dt);

TimeSeries simulate_open_loop(const PlantSpec& plant, const ExosystemSpec& E, const TimeSignal& u,
                              const ComplexProfile& z0, const SimConfig& cfg);

/// Closed loop under u = k(1,1) z(1) + int k_x(1,.) z + m_w^T w, with the
/// state-feedback functional treated implicitly through the rank-one
/// boundary response. Records e_y and the transformed-variable norm.
TimeSeries simulate_state_feedback(const PlantSpec& plant, const ExosystemSpec& E,
                                   const GainSet& gains, const ObservationFunctional& C,
                                   const ComplexProfile& z0, const SimConfig& cfg);

/// Plant truth plus the two observers, driven by an external input signal.
TimeSeries simulate_observer(const PlantSpec& plant, const ExosystemSpec& E, const GainSet& gains,
                             const TimeSignal& u, const SimConfig& cfg, const ComplexProfile& z0,
                             const ComplexProfile& zhat0, const Eigen::VectorXcd& what0);

/// Full output feedback: the control law reads the observer states.
TimeSeries simulate_output_feedback(const PlantSpec& plant, const ExosystemSpec& E,
                                    const GainSet& gains, const ObservationFunctional& C,
                                    const SimConfig& cfg, const ComplexProfile& z0,
                                    const ComplexProfile& zhat0, const Eigen::VectorXcd& what0);

/// Damped free Schrodinger flow v_t = -i v_xx - c v with v_x(0) = 0 and
/// v_x(1) = boundary_right(t); cross-check target for the closed loops.
TimeSeries simulate_target(double c, const ComplexProfile& v0, const TimeSignal& boundary_right,
                           const SimConfig& cfg);

struct DecayFit {
  double amplitude = 0.0;  // M in M e^{-mu t}
  double rate = 0.0;       // mu (> 0 means decay)
  double r2 = 0.0;
};

/// Least-squares line through log(value) on [t_a, t_b] (values floored at
/// 1e-14); needs at least 10 samples in the window.
DecayFit decay_fit(const std::vector<double>& t, const std::vector<double>& value, double t_a,
                   double t_b);

/// The boundary-feedback functional k(1,1) f(1) + int_0^1 k_x(1,xi) f(xi) dxi.
Complex feedback_functional(const FeedbackTrace& tr, const std::vector<Complex>& f);

}  // namespace schreg
