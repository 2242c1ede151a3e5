#pragma once

#include "schreg/core.hpp"
#include "schreg/kernels.hpp"

namespace schreg {

/// Everything the feedback and observer laws need, produced by
/// assemble_gains. Profiles come with their analytically differentiated
/// companions so the defining two-point problems can be residual-checked at
/// round-off level rather than stencil level.
struct GainSet {
  KernelSet kernels;

  // tracking side: profiles m(x) (one per exosystem state), their exact
  // second derivatives, exact first derivatives at the ends, and the
  // feed-through vector m_w = m'(1) by the one-sided edge stencil
  std::vector<ComplexProfile> m;
  std::vector<ComplexProfile> m_xx;
  Eigen::VectorXcd m_x0;
  Eigen::VectorXcd m_x1;
  Eigen::VectorXcd m_w;

  // observer coupling side: profiles n(x) (one per disturbance state)
  std::vector<ComplexProfile> n;
  std::vector<ComplexProfile> n_xx;
  Eigen::VectorXcd n_x0;
  Eigen::VectorXcd n_x1;
  Eigen::RowVectorXcd n_at_1;

  // observer gains
  ComplexProfile l_profile;  // l(x)
  Complex l0 = 0.0;          // = p(1,1)
  Eigen::VectorXcd l_d;
  Eigen::VectorXd l_r;

  // boundary feedback traces k(1,1), k_x(1,.)
  FeedbackTrace feedback;

  // placed closed-loop observer blocks: A_r = S_r + l_r q_r^T,
  // A_d = S_d + l_d n(1)^T
  Eigen::MatrixXd A_r;
  Eigen::MatrixXcd A_d;
};

/// Value of the solvability functional Ce F^{-1}[cosh(sqrt(i(lambda+c_s)) x)]
/// for each exosystem eigenvalue (the constant 1 replaces the cosh profile in
/// the degenerate branch lambda + c_s = 0). A synthesis is solvable iff every
/// margin is bounded away from zero.
std::vector<Complex> check_state_solvability(const ObservationFunctional& C,
                                             const KernelGrid& control_reciprocal,
                                             const std::vector<Complex>& S_eigs, double c_s);

/// Throws a solvability error naming every eigenvalue whose margin modulus
/// falls below `tol`.
void require_state_solvability(const ObservationFunctional& C,
                               const KernelGrid& control_reciprocal,
                               const std::vector<Complex>& S_eigs, double c_s,
                               double tol = 1e-8);

struct TrackingSolution {
  std::vector<ComplexProfile> m;
  std::vector<ComplexProfile> m_xx;
  Eigen::VectorXcd m_x0;
  Eigen::VectorXcd m_x1;
  Eigen::VectorXcd m_w;  // one-sided stencil of m at x = 1
};

/// Diagonalize S and solve the tracking regulator equations
///   i m''^T + m^T S + c_s m^T = F[g] p1^T - i k(.,0) p2^T,
///   m'(0)^T = p2^T,  Ce F^{-1}[m] = p_r^T
/// (the boundary disturbance enters through integration by parts of the
/// transform, which carries the factor -i on the k(.,0) trace)
/// per eigenvector in closed form (cosh/sinh plus a convolution with the
/// source), then reassemble through V^{-1}.
TrackingSolution solve_m(const PlantSpec& plant, const KernelSet& kernels,
                         const ExosystemSpec& E, const ObservationFunctional& C, double c_s);

struct ObserverCouplingSolution {
  std::vector<ComplexProfile> n;
  std::vector<ComplexProfile> n_xx;
  Eigen::VectorXcd n_x0;
  Eigen::VectorXcd n_x1;
  Eigen::RowVectorXcd n_at_1;
};

/// Solve the observer coupling equations
///   i n''^T + n^T S_d + c_o n^T = gtilde^T,  n'(0)^T = q_d2^T,  n'(1)^T = 0
/// with gtilde(x)^T = F_o^{-1}[g](x) q_d1^T. Fails (solvability) when
/// sinh(sqrt(i(lambda_j + c_o))) vanishes for an eigenvalue of S_d.
ObserverCouplingSolution solve_n(const PlantSpec& plant, const KernelSet& kernels,
                                 const ExosystemSpec& E, double c_o);

/// Output-injection pole placement: gain l such that eig(M + l c) equals
/// `desired`, by characteristic-polynomial matching on the transposed pair.
/// The desired set must have as many entries as M has rows, pairwise
/// distinct, all in the open left half-plane.
Eigen::VectorXcd place_poles_complex(const Eigen::RowVectorXcd& c, const Eigen::MatrixXcd& M,
                                     const std::vector<Complex>& desired);

/// Real-data wrapper: requires the desired set to be closed under
/// conjugation so the gain is real (imaginary residue above 1e-9 is an
/// error).
Eigen::VectorXd place_poles(const Eigen::RowVectorXd& c, const Eigen::MatrixXd& M,
                            const std::vector<Complex>& desired);

/// Run the full synthesis: kernels, solvability gates, regulator solutions,
/// pole placement, and the observer gain profile
///   l(x) = F_o[n^T l_d](x) - i p_xi(x,1),  l0 = p(1,1).
GainSet assemble_gains(const PlantSpec& plant, const ExosystemSpec& E,
                       const ObservationFunctional& C, double c_s, double c_o,
                       const std::vector<Complex>& desired_r,
                       const std::vector<Complex>& desired_d, const SpatialGrid& grid,
                       const KernelOptions& opts = {});

/// Residuals of the defining equations, using the stored analytic
/// derivatives; all should sit at round-off level for a healthy GainSet.
struct RegulatorResiduals {
  double m_ode = 0.0;       // tracking equation, max over nodes/components
  double m_bc0 = 0.0;       // m'(0) - p2
  double m_nonlocal = 0.0;  // Ce F^{-1}[m] - p_r
  double n_ode = 0.0;       // coupling equation
  double n_bc0 = 0.0;       // n'(0) - q_d2
  double n_bc1 = 0.0;       // n'(1)
};

RegulatorResiduals regulator_residuals(const PlantSpec& plant, const ExosystemSpec& E,
                                       const ObservationFunctional& C, const GainSet& gains);

/// Eigendecomposition of the block-diagonal exosystem generator, block by
/// block: eigenvalues [eig(S_d); eig(S_r)] and block-embedded eigenvectors.
struct ExosystemEigen {
  Eigen::VectorXcd eigs;
  Eigen::MatrixXcd V;
  Eigen::MatrixXcd Vinv;
};
ExosystemEigen exosystem_eigen(const ExosystemSpec& E);

std::vector<Complex> exosystem_spectrum(const ExosystemSpec& E);

}  // namespace schreg
