#pragma once

#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace schreg {

using Complex = std::complex<double>;

/// Library error with a code that doubles as the CLI process exit code:
/// config = 2 (invalid configuration / assumption violation),
/// solvability = 3 (a synthesis solvability condition failed),
/// numeric = 4 (simulation divergence or numerical breakdown).
class Error : public std::runtime_error {
 public:
  enum class Code : int { config = 2, solvability = 3, numeric = 4 };
  Error(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }
  int exit_code() const { return static_cast<int>(code_); }

 private:
  Code code_;
};

[[noreturn]] inline void throw_config(const std::string& msg) {
  throw Error(Error::Code::config, msg);
}
[[noreturn]] inline void throw_solvability(const std::string& msg) {
  throw Error(Error::Code::solvability, msg);
}
[[noreturn]] inline void throw_numeric(const std::string& msg) {
  throw Error(Error::Code::numeric, msg);
}

/// Uniform grid on [0,1]: nodes x_i = i/n_cells, i = 0..n_cells.
/// Immutable after construction; cheap to copy.
struct SpatialGrid {
  int n_cells = 0;
  double spacing = 0.0;

  SpatialGrid() = default;
  explicit SpatialGrid(int cells);

  int size() const { return n_cells + 1; }
  double node(int i) const { return static_cast<double>(i) / n_cells; }
  bool operator==(const SpatialGrid& other) const { return n_cells == other.n_cells; }
};

/// Complex-valued function sampled at the grid nodes.
struct ComplexProfile {
  SpatialGrid grid;
  std::vector<Complex> values;

  ComplexProfile() = default;
  explicit ComplexProfile(SpatialGrid g, Complex fill = 0.0)
      : grid(g), values(static_cast<size_t>(g.size()), fill) {}

  static ComplexProfile sample(SpatialGrid g, const std::function<Complex(double)>& f);

  int size() const { return static_cast<int>(values.size()); }
  Complex& operator[](int i) { return values[static_cast<size_t>(i)]; }
  const Complex& operator[](int i) const { return values[static_cast<size_t>(i)]; }
};

void require_same_grid(const ComplexProfile& a, const ComplexProfile& b, const char* where);

/// Composite trapezoid of a sampled function over [0,1].
Complex trapezoid(const ComplexProfile& p);

/// Trapezoid approximation of the L2 inner product, integral of a * conj(b).
Complex l2_inner(const ComplexProfile& a, const ComplexProfile& b);

double l2_norm(const ComplexProfile& a);
double sup_norm(const ComplexProfile& a);
double sup_diff(const ComplexProfile& a, const ComplexProfile& b);

/// Value at an off-node point by linear interpolation between adjacent nodes.
Complex interpolate(const ComplexProfile& z, double x);

ComplexProfile operator+(const ComplexProfile& a, const ComplexProfile& b);
ComplexProfile operator-(const ComplexProfile& a, const ComplexProfile& b);
ComplexProfile operator*(Complex s, const ComplexProfile& a);

/// Observation functional y = theta * z(x0) + integral of c(x) z(x) dx.
/// The point part uses linear interpolation when x0 is off-node.
struct ObservationFunctional {
  Complex theta = 0.0;
  double x0 = 0.0;
  ComplexProfile c;
};

Complex evaluate_Ce(const ObservationFunctional& C, const ComplexProfile& z);

/// Plant data: boundary parameter q > 0, real potential h, disturbance shape g,
/// both sampled on the same grid.
struct PlantSpec {
  double q = 0.0;
  ComplexProfile h;
  ComplexProfile g;

  const SpatialGrid& grid() const { return h.grid; }
  void validate() const;
};

/// Signal generator: w' = S w with S = diag(S_d, S_r) block-diagonal,
/// disturbances d1 = q_d1^T w_d, d2 = q_d2^T w_d and reference r = q_r^T w_r.
/// All data are real; S must be diagonalizable with purely imaginary spectrum,
/// the eigenvalues of S_d pairwise distinct, and (q_r^T, S_r) observable.
struct ExosystemSpec {
  Eigen::MatrixXd S_d;
  Eigen::MatrixXd S_r;
  Eigen::VectorXd q_d1;
  Eigen::VectorXd q_d2;
  Eigen::VectorXd q_r;
  Eigen::VectorXd w0;

  int n_d() const { return static_cast<int>(S_d.rows()); }
  int n_r() const { return static_cast<int>(S_r.rows()); }
  int n_w() const { return n_d() + n_r(); }

  Eigen::MatrixXd S() const;    // diag(S_d, S_r)
  Eigen::VectorXd p1() const;   // [q_d1; 0]
  Eigen::VectorXd p2() const;   // [q_d2; 0]
  Eigen::VectorXd p_r() const;  // [0; q_r]

  void validate() const;
};

/// Precomputed block eigendecompositions so that w(t) = exp(St) w0 is exact
/// (no time stepping). Construction validates the spec.
class ExosystemFlow {
 public:
  explicit ExosystemFlow(const ExosystemSpec& spec);

  Eigen::VectorXd state(double t) const;
  double d1(double t) const;
  double d2(double t) const;
  double r(double t) const;
  const ExosystemSpec& spec() const { return spec_; }

 private:
  struct Block {
    Eigen::MatrixXcd V;
    Eigen::VectorXcd eigs;
    Eigen::VectorXcd y0;  // V^{-1} w0_block
  };
  Eigen::VectorXd block_state(const Block& b, double t) const;

  ExosystemSpec spec_;
  Block d_, r_;
  double residue_tol_ = 1e-9;
};

/// w(t) = exp(St) w0 via eigendecomposition; real part returned, with the
/// imaginary reconstruction residue checked against 1e-9.
Eigen::VectorXd exosystem_state(const ExosystemSpec& E, double t);

/// Pairwise-distinctness and observability helpers shared by validation and
/// the synthesis gates.
bool eigenvalues_distinct(const Eigen::VectorXcd& eigs, double tol = 1e-9);
bool pair_observable(const Eigen::RowVectorXd& c, const Eigen::MatrixXd& M, double tol = 1e-10);

}  // namespace schreg
