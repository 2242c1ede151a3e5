#include "schreg/regulator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace schreg {

namespace {

constexpr Complex kI(0.0, 1.0);
constexpr double kDegenerateTol = 1e-12;

Complex ce_inverse(const ObservationFunctional& C, const KernelGrid& control_reciprocal,
                   const ComplexProfile& f) {
  return evaluate_Ce(C, apply_inverse(control_reciprocal, f));
}

std::string fmt_eig(Complex lambda) {
  std::ostringstream os;
  os << lambda.real() << (lambda.imag() < 0 ? " - " : " + ") << std::abs(lambda.imag()) << "i";
  return os.str();
}

// -i int_0^x s(xi) * sinh(rho (x - xi)) / rho dxi per node, trapezoid.
ComplexProfile convolve_sinh(const ComplexProfile& s, Complex rho) {
  const SpatialGrid g = s.grid;
  ComplexProfile out(g);
  for (int i = 1; i <= g.n_cells; ++i) {
    Complex acc = 0.0;
    for (int j = 0; j <= i; ++j) {
      const double w = (j == 0 || j == i) ? 0.5 : 1.0;
      acc += w * s[j] * std::sinh(rho * (g.node(i) - g.node(j))) / rho;
    }
    out[i] = -kI * g.spacing * acc;
  }
  return out;
}

// Degenerate branch: -i int_0^x (x - xi) s(xi) dxi.
ComplexProfile convolve_linear(const ComplexProfile& s) {
  const SpatialGrid g = s.grid;
  ComplexProfile out(g);
  for (int i = 1; i <= g.n_cells; ++i) {
    Complex acc = 0.0;
    for (int j = 0; j <= i; ++j) {
      const double w = (j == 0 || j == i) ? 0.5 : 1.0;
      acc += w * s[j] * (g.node(i) - g.node(j));
    }
    out[i] = -kI * g.spacing * acc;
  }
  return out;
}

// -i int_0^1 s(xi) cosh(rho (1 - xi)) dxi: the convolution's derivative at 1.
Complex convolve_cosh_at_1(const ComplexProfile& s, Complex rho) {
  const SpatialGrid g = s.grid;
  Complex acc = 0.0;
  for (int j = 0; j <= g.n_cells; ++j) {
    const double w = (j == 0 || j == g.n_cells) ? 0.5 : 1.0;
    acc += w * s[j] * std::cosh(rho * (1.0 - g.node(j)));
  }
  return -kI * g.spacing * acc;
}

Complex edge_stencil_at_1(const ComplexProfile& f) {
  const int n = f.grid.n_cells;
  return (3.0 * f[n] - 4.0 * f[n - 1] + f[n - 2]) / (2.0 * f.grid.spacing);
}

// bilinear product a^T b (no conjugation)
Complex bilinear(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  return (a.array() * b.array()).sum();
}

Eigen::MatrixXcd block_eigvecs(const Eigen::MatrixXd& M) {
  if (M.rows() == 0) return Eigen::MatrixXcd(0, 0);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(M.cast<Complex>());
  return es.eigenvectors();
}

Eigen::VectorXcd block_eigvals(const Eigen::MatrixXd& M) {
  if (M.rows() == 0) return Eigen::VectorXcd(0);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(M.cast<Complex>());
  return es.eigenvalues();
}

}  // namespace

ExosystemEigen exosystem_eigen(const ExosystemSpec& E) {
  ExosystemEigen out;
  const int nd = E.n_d(), nr = E.n_r(), nw = E.n_w();
  out.eigs.resize(nw);
  out.V = Eigen::MatrixXcd::Zero(nw, nw);
  if (nd > 0) {
    out.eigs.head(nd) = block_eigvals(E.S_d);
    out.V.topLeftCorner(nd, nd) = block_eigvecs(E.S_d);
  }
  if (nr > 0) {
    out.eigs.tail(nr) = block_eigvals(E.S_r);
    out.V.bottomRightCorner(nr, nr) = block_eigvecs(E.S_r);
  }
  out.Vinv = nw > 0 ? out.V.fullPivLu().inverse() : Eigen::MatrixXcd(0, 0);
  return out;
}

std::vector<Complex> exosystem_spectrum(const ExosystemSpec& E) {
  const Eigen::VectorXcd e = exosystem_eigen(E).eigs;
  return std::vector<Complex>(e.data(), e.data() + e.size());
}

std::vector<Complex> check_state_solvability(const ObservationFunctional& C,
                                             const KernelGrid& control_reciprocal,
                                             const std::vector<Complex>& S_eigs, double c_s) {
  const SpatialGrid g = control_reciprocal.grid();
  std::vector<Complex> margins;
  margins.reserve(S_eigs.size());
  for (Complex lambda : S_eigs) {
    ComplexProfile test(g);
    if (std::abs(lambda + c_s) < kDegenerateTol) {
      for (int i = 0; i <= g.n_cells; ++i) test[i] = 1.0;
    } else {
      const Complex rho = std::sqrt(kI * (lambda + c_s));
      for (int i = 0; i <= g.n_cells; ++i) test[i] = std::cosh(rho * g.node(i));
    }
    margins.push_back(ce_inverse(C, control_reciprocal, test));
  }
  return margins;
}

void require_state_solvability(const ObservationFunctional& C,
                               const KernelGrid& control_reciprocal,
                               const std::vector<Complex>& S_eigs, double c_s, double tol) {
  const std::vector<Complex> margins = check_state_solvability(C, control_reciprocal, S_eigs, c_s);
  std::string bad;
  for (size_t i = 0; i < margins.size(); ++i) {
    if (std::abs(margins[i]) < tol) {
      if (!bad.empty()) bad += ", ";
      bad += fmt_eig(S_eigs[i]);
    }
  }
  if (!bad.empty())
    throw_solvability(
        "tracking regulator equations unsolvable: Ce F^-1[cosh(sqrt(i(lambda+c_s)) x)] "
        "vanishes at lambda = " +
        bad);
}

TrackingSolution solve_m(const PlantSpec& plant, const KernelSet& kernels,
                         const ExosystemSpec& E, const ObservationFunctional& C, double c_s) {
  const SpatialGrid g = plant.grid();
  const int nw = E.n_w();
  const ExosystemEigen sd = exosystem_eigen(E);

  const ComplexProfile Fg = apply_forward(kernels.control, plant.g);
  ComplexProfile k_col0(g);
  for (int i = 0; i <= g.n_cells; ++i) k_col0[i] = kernels.control(i, 0);

  const Eigen::VectorXcd p1 = E.p1().cast<Complex>();
  const Eigen::VectorXcd p2 = E.p2().cast<Complex>();
  const Eigen::VectorXcd pr = E.p_r().cast<Complex>();

  // Per-eigenvector scalar problems, then reassembly through V^{-1}.
  std::vector<ComplexProfile> bar(static_cast<size_t>(nw), ComplexProfile(g));
  std::vector<ComplexProfile> bar_xx(static_cast<size_t>(nw), ComplexProfile(g));
  Eigen::VectorXcd bar_x0(nw), bar_x1(nw);
  for (int j = 0; j < nw; ++j) {
    const Eigen::VectorXcd v = sd.V.col(j);
    const Complex a1 = bilinear(p1, v);
    const Complex a2 = bilinear(p2, v);
    const Complex ar = bilinear(pr, v);
    const Complex lambda = sd.eigs(j);

    ComplexProfile source(g);
    for (int i = 0; i <= g.n_cells; ++i) source[i] = Fg[i] * a1 - kI * k_col0[i] * a2;

    ComplexProfile mj(g), mj_xx(g);
    if (std::abs(lambda + c_s) < kDegenerateTol) {
      // lambda + c_s = 0: affine homogeneous part, test function 1
      ComplexProfile conv = convolve_linear(source);
      ComplexProfile ones(g, 1.0);
      ComplexProfile lin = ComplexProfile::sample(g, [](double x) { return Complex(x); });
      const Complex denom = ce_inverse(C, kernels.control_reciprocal, ones);
      if (std::abs(denom) < 1e-8)
        throw_solvability("tracking regulator equations unsolvable at lambda = " +
                          fmt_eig(lambda) + ": Ce F^-1[1] vanishes");
      const Complex g2 = a2;
      const Complex g1 = (ar - g2 * ce_inverse(C, kernels.control_reciprocal, lin) -
                          ce_inverse(C, kernels.control_reciprocal, conv)) /
                         denom;
      for (int i = 0; i <= g.n_cells; ++i) {
        mj[i] = g1 + g2 * g.node(i) + conv[i];
        mj_xx[i] = -kI * source[i];
      }
      bar_x0(j) = g2;
      bar_x1(j) = g2 + convolve_cosh_at_1(source, 0.0);
    } else {
      const Complex rho = std::sqrt(kI * (lambda + c_s));
      ComplexProfile conv = convolve_sinh(source, rho);
      ComplexProfile ch = ComplexProfile::sample(g, [&](double x) { return std::cosh(rho * x); });
      ComplexProfile sh =
          ComplexProfile::sample(g, [&](double x) { return std::sinh(rho * x) / rho; });
      const Complex margin = ce_inverse(C, kernels.control_reciprocal, ch);
      if (std::abs(margin) < 1e-8)
        throw_solvability(
            "tracking regulator equations unsolvable: Ce F^-1[cosh(sqrt(i(lambda+c_s)) x)] "
            "vanishes at lambda = " +
            fmt_eig(lambda));
      const Complex g2 = a2;
      const Complex g1 = (ar - g2 * ce_inverse(C, kernels.control_reciprocal, sh) -
                          ce_inverse(C, kernels.control_reciprocal, conv)) /
                         margin;
      for (int i = 0; i <= g.n_cells; ++i) {
        mj[i] = g1 * ch[i] + g2 * sh[i] + conv[i];
        mj_xx[i] = rho * rho * mj[i] - kI * source[i];
      }
      bar_x0(j) = g2;
      bar_x1(j) = g1 * rho * std::sinh(rho) + g2 * std::cosh(rho) + convolve_cosh_at_1(source, rho);
    }
    bar[static_cast<size_t>(j)] = mj;
    bar_xx[static_cast<size_t>(j)] = mj_xx;
  }

  TrackingSolution out;
  out.m.assign(static_cast<size_t>(nw), ComplexProfile(g));
  out.m_xx.assign(static_cast<size_t>(nw), ComplexProfile(g));
  out.m_x0.resize(nw);
  out.m_x1.resize(nw);
  out.m_w.resize(nw);
  for (int c = 0; c < nw; ++c) {
    for (int j = 0; j < nw; ++j) {
      const Complex w = sd.Vinv(j, c);
      for (int i = 0; i <= g.n_cells; ++i) {
        out.m[static_cast<size_t>(c)][i] += bar[static_cast<size_t>(j)][i] * w;
        out.m_xx[static_cast<size_t>(c)][i] += bar_xx[static_cast<size_t>(j)][i] * w;
      }
    }
    out.m_x0(c) = bilinear(bar_x0, sd.Vinv.col(c));
    out.m_x1(c) = bilinear(bar_x1, sd.Vinv.col(c));
    out.m_w(c) = nw > 0 ? edge_stencil_at_1(out.m[static_cast<size_t>(c)]) : Complex(0.0);
  }
  return out;
}

ObserverCouplingSolution solve_n(const PlantSpec& plant, const KernelSet& kernels,
                                 const ExosystemSpec& E, double c_o) {
  const SpatialGrid g = plant.grid();
  const int nd = E.n_d();
  ObserverCouplingSolution out;
  out.n.assign(static_cast<size_t>(nd), ComplexProfile(g));
  out.n_xx.assign(static_cast<size_t>(nd), ComplexProfile(g));
  out.n_x0.resize(nd);
  out.n_x1.resize(nd);
  out.n_at_1.resize(nd);
  if (nd == 0) return out;

  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(E.S_d.cast<Complex>());
  const Eigen::MatrixXcd V = es.eigenvectors();
  const Eigen::MatrixXcd Vinv = V.fullPivLu().inverse();
  const Eigen::VectorXcd eigs = es.eigenvalues();

  // gtilde(x)^T = F_o^{-1}[g](x) q_d1^T
  const ComplexProfile gt = apply_observer_inverse(kernels.observer_reciprocal, plant.g);
  const Eigen::VectorXcd qd1 = E.q_d1.cast<Complex>();
  const Eigen::VectorXcd qd2 = E.q_d2.cast<Complex>();

  std::vector<ComplexProfile> bar(static_cast<size_t>(nd), ComplexProfile(g));
  std::vector<ComplexProfile> bar_xx(static_cast<size_t>(nd), ComplexProfile(g));
  Eigen::VectorXcd bar_x0(nd), bar_x1(nd);
  for (int j = 0; j < nd; ++j) {
    const Eigen::VectorXcd v = V.col(j);
    const Complex a1 = bilinear(qd1, v);
    const Complex a2 = bilinear(qd2, v);
    const Complex lambda = eigs(j);

    ComplexProfile source(g);
    for (int i = 0; i <= g.n_cells; ++i) source[i] = gt[i] * a1;

    ComplexProfile nj(g), nj_xx(g);
    if (std::abs(lambda + c_o) < kDegenerateTol) {
      // Both Neumann conditions pin gamma2; a solution exists only under the
      // compatibility below, and then only up to an additive constant, which
      // is fixed to zero.
      Complex integral = 0.0;
      for (int i = 0; i <= g.n_cells; ++i)
        integral += ((i == 0 || i == g.n_cells) ? 0.5 : 1.0) * kI * source[i];
      integral *= g.spacing;
      if (std::abs(a2 - integral) > 1e-8)
        throw_solvability("observer coupling equations unsolvable at lambda = " + fmt_eig(lambda) +
                          ": degenerate-branch compatibility q_d2^T v = int i gtilde^T v fails");
      const Complex g2 = a2;
      ComplexProfile conv = convolve_linear(source);
      for (int i = 0; i <= g.n_cells; ++i) {
        nj[i] = g2 * g.node(i) + conv[i];
        nj_xx[i] = -kI * source[i];
      }
      bar_x0(j) = g2;
      bar_x1(j) = g2 - integral;
    } else {
      const Complex rho = std::sqrt(kI * (lambda + c_o));
      const Complex sh1 = std::sinh(rho);
      if (std::abs(sh1) < 1e-8)
        throw_solvability(
            "observer coupling equations unsolvable: sinh(sqrt(i(lambda+c_o))) vanishes at "
            "S_d eigenvalue lambda = " +
            fmt_eig(lambda));
      const Complex g2 = a2;
      // n'(1) = 0: g1 rho sinh(rho) + g2 cosh(rho) = int_0^1 i gtilde^T v cosh(rho(1-xi))
      const Complex rhs = -convolve_cosh_at_1(source, rho);
      const Complex g1 = (rhs - g2 * std::cosh(rho)) / (rho * sh1);
      ComplexProfile conv = convolve_sinh(source, rho);
      for (int i = 0; i <= g.n_cells; ++i) {
        const double x = g.node(i);
        nj[i] = g1 * std::cosh(rho * x) + g2 * std::sinh(rho * x) / rho + conv[i];
        nj_xx[i] = rho * rho * nj[i] - kI * source[i];
      }
      bar_x0(j) = g2;
      bar_x1(j) = g1 * rho * sh1 + g2 * std::cosh(rho) + convolve_cosh_at_1(source, rho);
    }
    bar[static_cast<size_t>(j)] = nj;
    bar_xx[static_cast<size_t>(j)] = nj_xx;
  }

  for (int c = 0; c < nd; ++c) {
    for (int j = 0; j < nd; ++j) {
      const Complex w = Vinv(j, c);
      for (int i = 0; i <= g.n_cells; ++i) {
        out.n[static_cast<size_t>(c)][i] += bar[static_cast<size_t>(j)][i] * w;
        out.n_xx[static_cast<size_t>(c)][i] += bar_xx[static_cast<size_t>(j)][i] * w;
      }
    }
    out.n_x0(c) = bilinear(bar_x0, Vinv.col(c));
    out.n_x1(c) = bilinear(bar_x1, Vinv.col(c));
    out.n_at_1(c) = out.n[static_cast<size_t>(c)][g.n_cells];
  }
  return out;
}

Eigen::VectorXcd place_poles_complex(const Eigen::RowVectorXcd& c, const Eigen::MatrixXcd& M,
                                     const std::vector<Complex>& desired) {
  const int n = static_cast<int>(M.rows());
  if (static_cast<int>(desired.size()) != n)
    throw_config("place_poles: need as many desired eigenvalues as states");
  if (n == 0) return Eigen::VectorXcd(0);
  for (size_t i = 0; i < desired.size(); ++i) {
    if (desired[i].real() >= 0.0)
      throw_config("place_poles: desired eigenvalues must lie in the open left half-plane");
    for (size_t j = i + 1; j < desired.size(); ++j)
      if (std::abs(desired[i] - desired[j]) < 1e-9)
        throw_config("place_poles: desired eigenvalues must be pairwise distinct");
  }

  Eigen::MatrixXcd obs(n, n);
  Eigen::RowVectorXcd row = c;
  for (int i = 0; i < n; ++i) {
    obs.row(i) = row;
    row = row * M;
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(obs);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(n - 1);
  if (!(smax > 0.0) || smin < 1e-10 * smax)
    throw_solvability("place_poles: the pair (c, M) is not observable");

  // monic characteristic polynomial of the desired set
  std::vector<Complex> coef(static_cast<size_t>(n) + 1, Complex(0.0));
  coef[0] = 1.0;
  for (int i = 0; i < n; ++i)
    for (int k = i + 1; k >= 1; --k)
      coef[static_cast<size_t>(k)] -= desired[static_cast<size_t>(i)] * coef[static_cast<size_t>(k - 1)];

  // Horner: chi(M) = M^n + coef[1] M^{n-1} + ... + coef[n] I
  Eigen::MatrixXcd chi = Eigen::MatrixXcd::Identity(n, n);
  for (int k = 1; k <= n; ++k)
    chi = chi * M + coef[static_cast<size_t>(k)] * Eigen::MatrixXcd::Identity(n, n);

  Eigen::VectorXcd en = Eigen::VectorXcd::Zero(n);
  en(n - 1) = 1.0;
  const Eigen::VectorXcd x = obs.fullPivLu().solve(en);
  Eigen::VectorXcd l = -chi * x;

  // the achieved spectrum must match the request
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(M + l * c);
  const Eigen::VectorXcd got = es.eigenvalues();
  std::vector<bool> used(static_cast<size_t>(n), false);
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    double best = 1e300;
    int at = -1;
    for (int j = 0; j < n; ++j) {
      if (used[static_cast<size_t>(j)]) continue;
      const double d = std::abs(got(j) - desired[static_cast<size_t>(i)]);
      if (d < best) {
        best = d;
        at = j;
      }
    }
    used[static_cast<size_t>(at)] = true;
    worst = std::max(worst, best);
  }
  if (worst > 1e-9 * std::max(1.0, M.norm()))
    throw_numeric("place_poles: achieved spectrum misses the request by " + std::to_string(worst));
  return l;
}

Eigen::VectorXd place_poles(const Eigen::RowVectorXd& c, const Eigen::MatrixXd& M,
                            const std::vector<Complex>& desired) {
  const Eigen::VectorXcd l = place_poles_complex(c.cast<Complex>(), M.cast<Complex>(), desired);
  if (l.size() > 0 && l.imag().cwiseAbs().maxCoeff() > 1e-9)
    throw_config("place_poles: desired set is not closed under conjugation (complex gain)");
  return l.real();
}

GainSet assemble_gains(const PlantSpec& plant, const ExosystemSpec& E,
                       const ObservationFunctional& C, double c_s, double c_o,
                       const std::vector<Complex>& desired_r,
                       const std::vector<Complex>& desired_d, const SpatialGrid& grid,
                       const KernelOptions& opts) {
  plant.validate();
  E.validate();
  if (c_s <= 0.0 || c_o <= 0.0) throw_config("assemble_gains: c_s and c_o must be positive");

  GainSet gs;
  gs.kernels = solve_kernel_set(plant, c_s, c_o, grid, opts);

  require_state_solvability(C, gs.kernels.control_reciprocal, exosystem_spectrum(E), c_s);

  TrackingSolution ms = solve_m(plant, gs.kernels, E, C, c_s);
  gs.m = std::move(ms.m);
  gs.m_xx = std::move(ms.m_xx);
  gs.m_x0 = ms.m_x0;
  gs.m_x1 = ms.m_x1;
  gs.m_w = ms.m_w;

  ObserverCouplingSolution ns = solve_n(plant, gs.kernels, E, c_o);
  gs.n = std::move(ns.n);
  gs.n_xx = std::move(ns.n_xx);
  gs.n_x0 = ns.n_x0;
  gs.n_x1 = ns.n_x1;
  gs.n_at_1 = ns.n_at_1;

  // simple-eigenvalue hypotheses: the two placed sets must not collide
  for (Complex dr : desired_r)
    for (Complex dd : desired_d)
      if (std::abs(dr - dd) < 1e-9)
        throw_config("assemble_gains: desired reference and disturbance poles must differ");

  gs.l_r = place_poles(E.q_r.transpose(), E.S_r, desired_r);
  gs.l_d = place_poles_complex(gs.n_at_1, E.S_d.cast<Complex>(), desired_d);

  gs.A_r = E.S_r + gs.l_r * E.q_r.transpose();
  gs.A_d = E.S_d.cast<Complex>() + gs.l_d * gs.n_at_1;

  // l(x) = F_o[n^T l_d](x) - i p_xi(x,1), l0 = p(1,1)
  ComplexProfile psi(grid);
  for (int c_idx = 0; c_idx < E.n_d(); ++c_idx)
    for (int i = 0; i <= grid.n_cells; ++i)
      psi[i] += gs.n[static_cast<size_t>(c_idx)][i] * gs.l_d(c_idx);
  const ComplexProfile dp = kernel_edge_derivative_upper(gs.kernels.observer);
  gs.l_profile = apply_observer_forward(gs.kernels.observer, psi);
  for (int i = 0; i <= grid.n_cells; ++i) gs.l_profile[i] -= kI * dp[i];
  gs.l0 = gs.kernels.observer(grid.n_cells, grid.n_cells);

  gs.feedback = kernel_feedback_trace(gs.kernels.control);
  return gs;
}

RegulatorResiduals regulator_residuals(const PlantSpec& plant, const ExosystemSpec& E,
                                       const ObservationFunctional& C, const GainSet& gains) {
  const SpatialGrid g = plant.grid();
  const int nw = E.n_w(), nd = E.n_d();
  const Eigen::MatrixXd S = E.S();
  const Eigen::VectorXd p1 = E.p1(), p2 = E.p2(), pr = E.p_r();

  const ComplexProfile Fg = apply_forward(gains.kernels.control, plant.g);
  const ComplexProfile gt = apply_observer_inverse(gains.kernels.observer_reciprocal, plant.g);

  RegulatorResiduals res;
  for (int c = 0; c < nw; ++c) {
    for (int i = 0; i <= g.n_cells; ++i) {
      Complex coupling = 0.0;
      for (int cc = 0; cc < nw; ++cc) coupling += gains.m[static_cast<size_t>(cc)][i] * S(cc, c);
      const Complex lhs = kI * gains.m_xx[static_cast<size_t>(c)][i] + coupling +
                          gains.kernels.c_s * gains.m[static_cast<size_t>(c)][i];
      const Complex rhs = Fg[i] * p1(c) - kI * gains.kernels.control(i, 0) * p2(c);
      res.m_ode = std::max(res.m_ode, std::abs(lhs - rhs));
    }
    res.m_bc0 = std::max(res.m_bc0, std::abs(gains.m_x0(c) - p2(c)));
    const Complex nl = evaluate_Ce(
        C, apply_inverse(gains.kernels.control_reciprocal, gains.m[static_cast<size_t>(c)]));
    res.m_nonlocal = std::max(res.m_nonlocal, std::abs(nl - pr(c)));
  }
  for (int c = 0; c < nd; ++c) {
    for (int i = 0; i <= g.n_cells; ++i) {
      Complex coupling = 0.0;
      for (int cc = 0; cc < nd; ++cc)
        coupling += gains.n[static_cast<size_t>(cc)][i] * E.S_d(cc, c);
      const Complex lhs = kI * gains.n_xx[static_cast<size_t>(c)][i] + coupling +
                          gains.kernels.c_o * gains.n[static_cast<size_t>(c)][i];
      const Complex rhs = gt[i] * E.q_d1(c);
      res.n_ode = std::max(res.n_ode, std::abs(lhs - rhs));
    }
    res.n_bc0 = std::max(res.n_bc0, std::abs(gains.n_x0(c) - E.q_d2(c)));
    res.n_bc1 = std::max(res.n_bc1, std::abs(gains.n_x1(c)));
  }
  return res;
}

}  // namespace schreg
