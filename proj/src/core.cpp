#include "schreg/core.hpp"

#include <algorithm>
#include <cmath>

namespace schreg {

SpatialGrid::SpatialGrid(int cells) : n_cells(cells), spacing(1.0 / cells) {
  if (cells < 1) throw_config("SpatialGrid: n_cells must be positive");
}

ComplexProfile ComplexProfile::sample(SpatialGrid g, const std::function<Complex(double)>& f) {
  ComplexProfile p(g);
  for (int i = 0; i < g.size(); ++i) p[i] = f(g.node(i));
  return p;
}

void require_same_grid(const ComplexProfile& a, const ComplexProfile& b, const char* where) {
  if (!(a.grid == b.grid))
    throw_config(std::string(where) + ": profiles live on different grids");
}

Complex trapezoid(const ComplexProfile& p) {
  const int n = p.grid.n_cells;
  Complex acc = 0.5 * (p[0] + p[n]);
  for (int i = 1; i < n; ++i) acc += p[i];
  return acc * p.grid.spacing;
}

Complex l2_inner(const ComplexProfile& a, const ComplexProfile& b) {
  require_same_grid(a, b, "l2_inner");
  const int n = a.grid.n_cells;
  Complex acc = 0.5 * (a[0] * std::conj(b[0]) + a[n] * std::conj(b[n]));
  for (int i = 1; i < n; ++i) acc += a[i] * std::conj(b[i]);
  return acc * a.grid.spacing;
}

double l2_norm(const ComplexProfile& a) { return std::sqrt(std::real(l2_inner(a, a))); }

double sup_norm(const ComplexProfile& a) {
  double m = 0.0;
  for (const Complex& v : a.values) m = std::max(m, std::abs(v));
  return m;
}

double sup_diff(const ComplexProfile& a, const ComplexProfile& b) {
  require_same_grid(a, b, "sup_diff");
  double m = 0.0;
  for (int i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

Complex interpolate(const ComplexProfile& z, double x) {
  const SpatialGrid& g = z.grid;
  if (x <= 0.0) return z[0];
  if (x >= 1.0) return z[g.n_cells];
  int i = static_cast<int>(x / g.spacing);
  i = std::min(i, g.n_cells - 1);
  const double frac = (x - g.node(i)) / g.spacing;
  return (1.0 - frac) * z[i] + frac * z[i + 1];
}

ComplexProfile operator+(const ComplexProfile& a, const ComplexProfile& b) {
  require_same_grid(a, b, "operator+");
  ComplexProfile out(a.grid);
  for (int i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

ComplexProfile operator-(const ComplexProfile& a, const ComplexProfile& b) {
  require_same_grid(a, b, "operator-");
  ComplexProfile out(a.grid);
  for (int i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

ComplexProfile operator*(Complex s, const ComplexProfile& a) {
  ComplexProfile out(a.grid);
  for (int i = 0; i < a.size(); ++i) out[i] = s * a[i];
  return out;
}

Complex evaluate_Ce(const ObservationFunctional& C, const ComplexProfile& z) {
  require_same_grid(C.c, z, "evaluate_Ce");
  ComplexProfile weighted(z.grid);
  for (int i = 0; i < z.size(); ++i) weighted[i] = C.c[i] * z[i];
  return C.theta * interpolate(z, C.x0) + trapezoid(weighted);
}

void PlantSpec::validate() const {
  if (q <= 0.0) throw_config("PlantSpec: q must be positive");
  require_same_grid(h, g, "PlantSpec");
  if (h.grid.n_cells < 8) throw_config("PlantSpec: grid too coarse, need n_cells >= 8");
}

Eigen::MatrixXd ExosystemSpec::S() const {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n_w(), n_w());
  if (n_d() > 0) s.topLeftCorner(n_d(), n_d()) = S_d;
  if (n_r() > 0) s.bottomRightCorner(n_r(), n_r()) = S_r;
  return s;
}

Eigen::VectorXd ExosystemSpec::p1() const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n_w());
  v.head(n_d()) = q_d1;
  return v;
}

Eigen::VectorXd ExosystemSpec::p2() const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n_w());
  v.head(n_d()) = q_d2;
  return v;
}

Eigen::VectorXd ExosystemSpec::p_r() const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n_w());
  v.tail(n_r()) = q_r;
  return v;
}

bool eigenvalues_distinct(const Eigen::VectorXcd& eigs, double tol) {
  for (int i = 0; i < eigs.size(); ++i)
    for (int j = i + 1; j < eigs.size(); ++j)
      if (std::abs(eigs(i) - eigs(j)) <= tol) return false;
  return true;
}

bool pair_observable(const Eigen::RowVectorXd& c, const Eigen::MatrixXd& M, double tol) {
  const int n = static_cast<int>(M.rows());
  if (n == 0) return true;
  Eigen::MatrixXd obs(n, n);
  Eigen::RowVectorXd row = c;
  for (int i = 0; i < n; ++i) {
    obs.row(i) = row;
    row = row * M;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(obs);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(n - 1);
  return smax > 0.0 && smin > tol * smax;
}

namespace {

// Checks one exosystem block: diagonalizable, spectrum on the imaginary axis.
void check_block(const Eigen::MatrixXd& M, const char* name, Eigen::VectorXcd* eigs_out) {
  const int n = static_cast<int>(M.rows());
  if (M.cols() != n) throw_config(std::string("ExosystemSpec: ") + name + " must be square");
  if (n == 0) {
    if (eigs_out) eigs_out->resize(0);
    return;
  }
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(M.cast<Complex>());
  if (es.info() != Eigen::Success)
    throw_config(std::string("ExosystemSpec: eigendecomposition of ") + name + " failed");
  const Eigen::VectorXcd eigs = es.eigenvalues();
  const double scale = std::max(1.0, M.norm());
  for (int i = 0; i < n; ++i) {
    if (std::abs(eigs(i).real()) > 1e-9 * scale)
      throw_config(std::string("ExosystemSpec: ") + name +
                   " has an eigenvalue off the imaginary axis (Re = " +
                   std::to_string(eigs(i).real()) + ")");
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(es.eigenvectors());
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(n - 1);
  if (!(smax > 0.0) || smin < 1e-10 * smax)
    throw_config(std::string("ExosystemSpec: ") + name + " is not (numerically) diagonalizable");
  if (eigs_out) *eigs_out = eigs;
}

}  // namespace

void ExosystemSpec::validate() const {
  if (q_d1.size() != n_d() || q_d2.size() != n_d())
    throw_config("ExosystemSpec: q_d1/q_d2 must have the dimension of S_d");
  if (q_r.size() != n_r()) throw_config("ExosystemSpec: q_r must have the dimension of S_r");
  if (w0.size() != n_w()) throw_config("ExosystemSpec: w0 must have dimension n_d + n_r");

  Eigen::VectorXcd eigs_d;
  check_block(S_d, "S_d", &eigs_d);
  check_block(S_r, "S_r", nullptr);
  if (!eigenvalues_distinct(eigs_d))
    throw_config("ExosystemSpec: eigenvalues of S_d must be pairwise distinct");
  if (!pair_observable(q_r.transpose(), S_r))
    throw_config("ExosystemSpec: the pair (q_r^T, S_r) is not observable");
}

ExosystemFlow::ExosystemFlow(const ExosystemSpec& spec) : spec_(spec) {
  spec_.validate();
  auto build = [](const Eigen::MatrixXd& M, const Eigen::VectorXd& w0_block) {
    Block b;
    const int n = static_cast<int>(M.rows());
    if (n == 0) return b;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(M.cast<Complex>());
    b.V = es.eigenvectors();
    b.eigs = es.eigenvalues();
    b.y0 = b.V.fullPivLu().solve(w0_block.cast<Complex>());
    return b;
  };
  d_ = build(spec_.S_d, spec_.w0.head(spec_.n_d()));
  r_ = build(spec_.S_r, spec_.w0.tail(spec_.n_r()));
  residue_tol_ = 1e-9 * std::max(1.0, spec_.w0.norm());
}

Eigen::VectorXd ExosystemFlow::block_state(const Block& b, double t) const {
  const int n = static_cast<int>(b.eigs.size());
  if (n == 0) return Eigen::VectorXd(0);
  Eigen::VectorXcd y(n);
  for (int i = 0; i < n; ++i) y(i) = std::exp(b.eigs(i) * t) * b.y0(i);
  const Eigen::VectorXcd w = b.V * y;
  if (w.imag().cwiseAbs().maxCoeff() > residue_tol_)
    throw_numeric("ExosystemFlow: imaginary residue above tolerance in exp(St) w0");
  return w.real();
}

Eigen::VectorXd ExosystemFlow::state(double t) const {
  Eigen::VectorXd w(spec_.n_w());
  w.head(spec_.n_d()) = block_state(d_, t);
  w.tail(spec_.n_r()) = block_state(r_, t);
  return w;
}

double ExosystemFlow::d1(double t) const {
  return spec_.n_d() > 0 ? spec_.q_d1.dot(block_state(d_, t)) : 0.0;
}
double ExosystemFlow::d2(double t) const {
  return spec_.n_d() > 0 ? spec_.q_d2.dot(block_state(d_, t)) : 0.0;
}
double ExosystemFlow::r(double t) const {
  return spec_.n_r() > 0 ? spec_.q_r.dot(block_state(r_, t)) : 0.0;
}

Eigen::VectorXd exosystem_state(const ExosystemSpec& E, double t) {
  return ExosystemFlow(E).state(t);
}

}  // namespace schreg
