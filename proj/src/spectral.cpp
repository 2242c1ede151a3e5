#include "schreg/spectral.hpp"

#include <algorithm>
#include <cmath>

namespace schreg {

namespace {

constexpr Complex kI(0.0, 1.0);
const double kPi = 3.14159265358979323846;

Complex char_fn(Complex lambda, double q) {
  return std::exp(2.0 * lambda) * (lambda - kI * q) - (lambda + kI * q);
}

Complex char_fn_prime(Complex lambda, double q) {
  return std::exp(2.0 * lambda) * (2.0 * (lambda - kI * q) + 1.0) - 1.0;
}

// sum_{k>=1} 1/(k^2 + theta) = (pi sqrt(theta) coth(pi sqrt(theta)) - 1)/(2 theta)
double inverse_quadratic_sum(double theta) {
  if (theta < 1e-12) return kPi * kPi / 6.0;
  const double r = kPi * std::sqrt(theta);
  return (r / std::tanh(r) - 1.0) / (2.0 * theta);
}

}  // namespace

std::vector<EigenPair> eigenvalues_A(double q, int count, const SpatialGrid& grid) {
  if (count < 1) throw_config("eigenvalues_A: count must be positive");
  if (q <= 0.0) throw_config("eigenvalues_A: q must be positive");
  std::vector<EigenPair> out;
  out.reserve(static_cast<size_t>(count));
  for (int n = 1; n <= count; ++n) {
    // Iterate on the offset eps = lambda - n pi i, where e^{2 lambda} =
    // e^{2 eps} exactly; evaluating the raw characteristic function at
    // |Im lambda| ~ n pi would drown residuals below ~|lambda| * eps_mach in
    // argument-reduction noise.
    const Complex npii(0.0, n * kPi);
    Complex eps(q / (n * kPi), 0.0);
    const Complex eps_seed = eps;
    // attainable floor scales with |lambda|
    const double tol = 1e-13 * std::max(1.0, n * kPi / 30.0);
    bool done = false;
    double resid = 0.0;
    for (int it = 0; it < 100; ++it) {
      const Complex base = npii + eps;
      const Complex f = std::exp(2.0 * eps) * (base - kI * q) - (base + kI * q);
      resid = std::abs(f);
      if (resid < tol) {
        done = true;
        break;
      }
      const Complex fp = std::exp(2.0 * eps) * (2.0 * (base - kI * q) + 1.0) - 1.0;
      eps -= f / fp;
      if (!std::isfinite(eps.real()) || !std::isfinite(eps.imag()) ||
          std::abs(eps - eps_seed) > 2.0)
        throw_numeric("eigenvalues_A: Newton diverged from seed n = " + std::to_string(n));
    }
    if (!done) throw_numeric("eigenvalues_A: Newton stalled at n = " + std::to_string(n));

    EigenPair p;
    p.index = n;
    p.lambda = npii + eps;
    p.mu = -kI * p.lambda * p.lambda;
    p.residual = resid;
    const Complex amp = (p.lambda - kI * q) / (p.lambda + kI * q);
    const Complex lambda = p.lambda;
    p.phi = ComplexProfile::sample(
        grid, [&](double x) { return amp * std::exp(lambda * x) + std::exp(-lambda * x); });
    out.push_back(std::move(p));
  }
  for (size_t a = 0; a < out.size(); ++a)
    for (size_t b = a + 1; b < out.size(); ++b)
      if (std::abs(out[a].lambda - out[b].lambda) < 1e-6)
        throw_numeric("eigenvalues_A: seeds " + std::to_string(out[a].index) + " and " +
                      std::to_string(out[b].index) + " collapsed onto one root");
  return out;
}

AsymptoticsReport asymptotics_report(const std::vector<EigenPair>& pairs, double q) {
  if (pairs.size() < 5) throw_config("asymptotics_report: need at least 5 eigenpairs");
  AsymptoticsReport rep;
  double re_min = 1e300, re_max = -1e300;
  for (const EigenPair& p : pairs) {
    AsymptoticsRow row;
    row.n = p.index;
    row.lambda = p.lambda;
    row.mu = p.mu;
    row.residual = p.residual;
    const double npi = p.index * kPi;
    row.deviation = p.index * p.index * std::abs(p.mu - Complex(2.0 * q, npi * npi));
    if (row.n >= 5) rep.max_deviation_tail = std::max(rep.max_deviation_tail, row.deviation);
    re_min = std::min(re_min, p.mu.real());
    re_max = std::max(re_max, p.mu.real());
    rep.rows.push_back(row);
  }
  rep.strip_width = re_max - re_min;
  return rep;
}

ObserverSpectrumReport observer_error_spectrum(double c_o, const Eigen::MatrixXd& A_r,
                                               const Eigen::MatrixXcd& A_d,
                                               const Eigen::VectorXcd& l_d, int j_max) {
  if (j_max < 1) throw_config("observer_error_spectrum: j_max must be positive");
  ObserverSpectrumReport rep;
  double absc = -1e300;

  if (A_r.rows() > 0) {
    Eigen::EigenSolver<Eigen::MatrixXd> er(A_r);
    for (int i = 0; i < A_r.rows(); ++i) {
      rep.finite_modes.push_back(er.eigenvalues()(i));
      absc = std::max(absc, er.eigenvalues()(i).real());
    }
  }
  if (A_d.rows() > 0) {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> ed(A_d);
    for (int i = 0; i < A_d.rows(); ++i) {
      rep.finite_modes.push_back(ed.eigenvalues()(i));
      absc = std::max(absc, ed.eigenvalues()(i).real());
    }
  }

  const int nd = static_cast<int>(A_d.rows());
  double sum = 0.0;
  for (int j = 0; j <= j_max; ++j) {
    const Complex lam = Complex(0.0, j * j * kPi * kPi) - c_o;
    rep.pde_modes.push_back(lam);
    absc = std::max(absc, lam.real());
    if (nd > 0) {
      Eigen::MatrixXcd R = A_d - lam * Eigen::MatrixXcd::Identity(nd, nd);
      Eigen::FullPivLU<Eigen::MatrixXcd> lu(R);
      if (!lu.isInvertible())
        throw_solvability(
            "observer_error_spectrum: a placed disturbance eigenvalue collides with the damped "
            "mode j = " +
            std::to_string(j));
      sum += lu.solve(l_d).squaredNorm();
    }
    rep.closeness_partial.push_back(sum);
  }
  rep.closeness_sum = sum;
  const double ld2 = nd > 0 ? l_d.squaredNorm() : 0.0;
  rep.closeness_tail_estimate = ld2 / (3.0 * std::pow(kPi, 4) * std::pow(double(j_max), 3));
  rep.spectral_abscissa = absc;
  return rep;
}

PropernessProbe strict_properness_probe(const PlantSpec& plant, const ObservationFunctional& C,
                                        InputChoice input, const std::vector<double>& s_values,
                                        int truncation) {
  for (size_t i = 0; i + 1 < s_values.size(); ++i)
    if (!(s_values[i] > 0.0) || !(s_values[i] < s_values[i + 1]))
      throw_config("strict_properness_probe: s values must be positive and increasing");
  if (truncation < 8) throw_config("strict_properness_probe: truncation too small");

  const SpatialGrid grid = C.c.grid;
  const std::vector<EigenPair> pairs = eigenvalues_A(plant.q, truncation, grid);

  // Modal coefficients from analytic traces: with phi = A e^{lx} + e^{-lx},
  // kappa = int_0^1 phi^2 (bilinear pairing with the adjoint eigenfunctions),
  // b = <input direction> / kappa, c = Ce[phi].
  std::vector<Complex> coef(pairs.size());
  double csup = 0.0;
  for (size_t idx = 0; idx < pairs.size(); ++idx) {
    const Complex l = pairs[idx].lambda;
    const Complex A = (l - kI * plant.q) / (l + kI * plant.q);
    const Complex e2l = std::exp(2.0 * l);
    const Complex kappa =
        A * A * (e2l - 1.0) / (2.0 * l) + 2.0 * A + (1.0 - std::exp(-2.0 * l)) / (2.0 * l);
    const Complex phi0 = A + 1.0;
    const Complex phi1 = A * std::exp(l) + std::exp(-l);
    const Complex b = (input == InputChoice::left ? kI * phi0 : -kI * phi1) / kappa;
    const Complex c = evaluate_Ce(C, pairs[idx].phi);
    coef[idx] = b * c;
    csup = std::max(csup, std::abs(coef[idx]));
  }

  PropernessProbe probe;
  probe.s_values = s_values;
  probe.truncation = truncation;
  probe.coefficient_sup = csup;
  const double a = kPi * kPi;
  for (double s : s_values) {
    Complex acc = 0.0;
    for (size_t idx = 0; idx < pairs.size(); ++idx) acc += coef[idx] / (Complex(s) - pairs[idx].mu);
    probe.magnitudes.push_back(std::abs(acc));
    probe.bounds.push_back(2.0 * std::sqrt(2.0) * csup / a * inverse_quadratic_sum(s / a));
  }
  // size of the first neglected tail term at the smallest s, as a warning
  const double ntail = double(truncation + 1) * kPi;
  probe.truncation_tail = csup / std::abs(Complex(s_values.front(), -ntail * ntail));
  return probe;
}

}  // namespace schreg
