#include "schreg/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace schreg {

KernelGrid::KernelGrid(SpatialGrid g, Orientation o) : grid_(g), orient_(o) {
  const size_t n = static_cast<size_t>(g.size());
  data_.assign(n * (n + 1) / 2, Complex(0.0));
}

Complex& KernelGrid::at(int i, int j) {
  if (i < 0 || i > grid_.n_cells || j < 0 || j > grid_.n_cells || !in_triangle(i, j))
    throw_config("KernelGrid: index outside the stored triangle");
  return data_[index(i, j)];
}

const Complex& KernelGrid::at(int i, int j) const {
  if (i < 0 || i > grid_.n_cells || j < 0 || j > grid_.n_cells || !in_triangle(i, j))
    throw_config("KernelGrid: index outside the stored triangle");
  return data_[index(i, j)];
}

namespace {

constexpr Complex kI(0.0, 1.0);

// Potential lerped onto the half-step lattice x_m = m * spacing/2. Trapezoid
// sums over the refined samples reproduce coarse-grid trapezoid sums exactly.
std::vector<Complex> half_grid_samples(const ComplexProfile& h) {
  const int n = h.grid.n_cells;
  std::vector<Complex> out(static_cast<size_t>(2 * n + 1));
  for (int m = 0; m <= 2 * n; ++m) {
    out[static_cast<size_t>(m)] =
        (m % 2 == 0) ? h[m / 2] : 0.5 * (h[(m - 1) / 2] + h[(m + 1) / 2]);
  }
  return out;
}

// Goursat problem for the lower-triangle kernel, recast in characteristic
// variables u = x + xi, v = x - xi as the fixed-point equation
//   G(u,v) = D(u/2) + [e(v) - e(0)]/2 + (qi/2) int_0^v e(eta) deta
//            + int_0^v int_eta^u Phi(sigma,eta) G(sigma,eta) dsigma deta,
// where e(tau) = G(tau,tau) is the xi = 0 edge trace, D is the diagonal data
// and Phi(sigma,eta) = i (h((sigma-eta)/2) + c)/4. Successive approximation
// with trapezoid quadrature on the lattice (a,b) ~ (u,v)/spacing.
KernelGrid goursat_lower(double q, const ComplexProfile& h, double c, const SpatialGrid& grid,
                         const KernelOptions& opts, KernelSolveInfo* info) {
  const int n = grid.n_cells;
  const int m2 = 2 * n;
  const double du = grid.spacing;
  const Complex qi(0.0, q);

  const std::vector<Complex> hh = half_grid_samples(h);
  std::vector<Complex> phi(static_cast<size_t>(m2 + 1));
  for (int m = 0; m <= m2; ++m) phi[static_cast<size_t>(m)] = 0.25 * kI * (hh[static_cast<size_t>(m)] + c);

  std::vector<Complex> D(static_cast<size_t>(m2 + 1));
  Complex cum = 0.0;
  D[0] = -qi;
  for (int a = 1; a <= m2; ++a) {
    cum += 0.25 * du * ((hh[static_cast<size_t>(a - 1)] + c) + (hh[static_cast<size_t>(a)] + c));
    D[static_cast<size_t>(a)] = -0.5 * kI * cum - qi;
  }

  const size_t stride = static_cast<size_t>(n + 1);
  auto L = [stride](int a, int b) { return static_cast<size_t>(a) * stride + static_cast<size_t>(b); };
  const size_t sz = static_cast<size_t>(m2 + 1) * stride;
  std::vector<Complex> G(sz, Complex(0.0)), Gnew(sz, Complex(0.0)), J(sz, Complex(0.0));
  std::vector<Complex> e(static_cast<size_t>(n + 1)), ecum(static_cast<size_t>(n + 1));

  double update = 0.0;
  int iter = 0;
  for (iter = 1; iter <= opts.max_iterations; ++iter) {
    for (int b = 0; b <= n; ++b) e[static_cast<size_t>(b)] = G[L(b, b)];
    ecum[0] = 0.0;
    for (int b = 1; b <= n; ++b)
      ecum[static_cast<size_t>(b)] =
          ecum[static_cast<size_t>(b - 1)] + 0.5 * du * (e[static_cast<size_t>(b - 1)] + e[static_cast<size_t>(b)]);

    for (int b = 0; b <= n; ++b) {
      const int amax = m2 - b;
      Complex run = 0.0;
      Complex prev = phi[0] * G[L(b, b)];
      J[L(b, b)] = 0.0;
      for (int a = b + 1; a <= amax; ++a) {
        const Complex curw = phi[static_cast<size_t>(a - b)] * G[L(a, b)];
        run += 0.5 * du * (prev + curw);
        J[L(a, b)] = run;
        prev = curw;
      }
    }

    update = 0.0;
    for (int a = 0; a <= m2; ++a) {
      const int bmax = std::min(a, m2 - a);
      Complex I = 0.0;
      Complex prevJ = J[L(a, 0)];
      for (int b = 0; b <= bmax; ++b) {
        if (b > 0) {
          I += 0.5 * du * (prevJ + J[L(a, b)]);
          prevJ = J[L(a, b)];
        }
        const Complex val = D[static_cast<size_t>(a)] + 0.5 * (e[static_cast<size_t>(b)] + qi) +
                            0.5 * qi * ecum[static_cast<size_t>(b)] + I;
        update = std::max(update, std::abs(val - G[L(a, b)]));
        Gnew[L(a, b)] = val;
      }
    }
    G.swap(Gnew);
    if (update < opts.tolerance) break;
  }
  if (update >= opts.tolerance)
    throw_numeric("kernel solve did not converge after " + std::to_string(opts.max_iterations) +
                  " iterations; final update " + std::to_string(update));
  if (info) {
    info->iterations = iter;
    info->final_update = update;
  }

  KernelGrid out(grid, Orientation::lower);
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= i; ++j) out(i, j) = G[L(i + j, i - j)];
  return out;
}

// q = 0 is allowed here (the closed-form oracle cases use it); the q > 0
// plant invariant is enforced where a full synthesis is requested.
void check_kernel_inputs(const PlantSpec& plant, double c, const SpatialGrid& grid) {
  if (!(plant.grid() == grid)) throw_config("kernel solve: plant data and grid differ");
  if (grid.n_cells < 8) throw_config("kernel solve: grid too coarse, need n_cells >= 8");
  if (c < 0.0) throw_config("kernel solve: decay rate must be nonnegative");
  if (plant.q < 0.0) throw_config("kernel solve: q must be nonnegative");
}

}  // namespace

KernelGrid solve_control_kernel(const PlantSpec& plant, double c_s, const SpatialGrid& grid,
                                const KernelOptions& opts, KernelSolveInfo* info) {
  check_kernel_inputs(plant, c_s, grid);
  return goursat_lower(plant.q, plant.h, c_s, grid, opts, info);
}

KernelGrid solve_observer_kernel(const PlantSpec& plant, double c_o, const SpatialGrid& grid,
                                 const KernelOptions& opts, KernelSolveInfo* info) {
  check_kernel_inputs(plant, c_o, grid);
  // Swapping arguments turns the observer problem into the control one:
  // p(x,xi) = k~(xi,x) with the same potential and rate.
  const KernelGrid lower = goursat_lower(plant.q, plant.h, c_o, grid, opts, info);
  KernelGrid upper(grid, Orientation::upper);
  for (int i = 0; i <= grid.n_cells; ++i)
    for (int j = i; j <= grid.n_cells; ++j) upper(i, j) = lower(j, i);
  return upper;
}

KernelGrid solve_reciprocal_kernel(const KernelGrid& src, const KernelOptions& opts,
                                   KernelSolveInfo* info) {
  const SpatialGrid grid = src.grid();
  const int n = grid.n_cells;
  const double du = grid.spacing;
  KernelGrid out(grid, src.orientation());
  if (info) info->per_row_iterations.assign(static_cast<size_t>(n + 1), 0);
  int worst_iter = 0;
  double worst_update = 0.0;

  // Quadrature weights are chosen so that the operator induced by the
  // reciprocal kernel is the exact inverse of the operator induced by `src`
  // under the transform quadrature: interior nodes weigh 1, both endpoints
  // 1/2, except that the endpoint sitting on the domain corner (where the
  // transform row is an empty integral) weighs 0. The j == s self-term makes
  // the diagonal satisfy R(x,x) = src(x,x) + (spacing/2) R(x,x) src(x,x),
  // an O(spacing) perturbation of the continuum identity R(x,x) = src(x,x).
  const bool lower = src.orientation() == Orientation::lower;
  const int corner = lower ? 0 : n;
  std::vector<Complex> row(static_cast<size_t>(n + 1)), next(static_cast<size_t>(n + 1));
  for (int i = 0; i <= n; ++i) {
    const int jlo = lower ? 0 : i;
    const int jhi = lower ? i : n;
    if (i == corner) {
      out(i, i) = src(i, i);
      if (info) info->per_row_iterations[static_cast<size_t>(i)] = 0;
      continue;
    }
    for (int j = jlo; j <= jhi; ++j) row[static_cast<size_t>(j)] = src(i, j);

    int iter = 0;
    double update = 0.0;
    for (iter = 1; iter <= opts.max_iterations; ++iter) {
      update = 0.0;
      for (int j = jlo; j <= jhi; ++j) {
        // integration runs from xi_j to x_i (lower) or x_i to xi_j (upper)
        const int slo = lower ? j : i;
        const int shi = lower ? i : j;
        Complex acc = 0.0;
        for (int s = slo; s <= shi; ++s) {
          double w = (s == slo || s == shi) ? 0.5 : 1.0;
          if (s == j && j == corner) w = 0.0;
          acc += w * row[static_cast<size_t>(s)] * src(s, j);
        }
        const Complex val = src(i, j) + du * acc;
        update = std::max(update, std::abs(val - row[static_cast<size_t>(j)]));
        next[static_cast<size_t>(j)] = val;
      }
      for (int j = jlo; j <= jhi; ++j) row[static_cast<size_t>(j)] = next[static_cast<size_t>(j)];
      if (update < opts.tolerance) break;
    }
    if (update >= opts.tolerance)
      throw_numeric("reciprocity solve did not converge at row x = " + std::to_string(grid.node(i)));
    if (info) info->per_row_iterations[static_cast<size_t>(i)] = iter;
    worst_iter = std::max(worst_iter, iter);
    worst_update = std::max(worst_update, update);
    for (int j = jlo; j <= jhi; ++j) out(i, j) = row[static_cast<size_t>(j)];
  }
  if (info) {
    info->iterations = worst_iter;
    info->final_update = worst_update;
  }
  return out;
}

namespace {

ComplexProfile apply_lower(const KernelGrid& ker, const ComplexProfile& z, double sign) {
  if (!(ker.grid() == z.grid)) throw_config("kernel transform: grid mismatch");
  if (ker.orientation() != Orientation::lower)
    throw_config("kernel transform: lower-triangle kernel expected");
  const int n = z.grid.n_cells;
  const double du = z.grid.spacing;
  ComplexProfile out(z.grid);
  for (int i = 0; i <= n; ++i) {
    Complex acc = 0.0;
    if (i > 0) {
      for (int j = 0; j <= i; ++j) {
        const double w = (j == 0 || j == i) ? 0.5 : 1.0;
        acc += w * ker(i, j) * z[j];
      }
      acc *= du;
    }
    out[i] = z[i] + sign * acc;
  }
  return out;
}

ComplexProfile apply_upper(const KernelGrid& ker, const ComplexProfile& z, double sign) {
  if (!(ker.grid() == z.grid)) throw_config("kernel transform: grid mismatch");
  if (ker.orientation() != Orientation::upper)
    throw_config("kernel transform: upper-triangle kernel expected");
  const int n = z.grid.n_cells;
  const double du = z.grid.spacing;
  ComplexProfile out(z.grid);
  for (int i = 0; i <= n; ++i) {
    Complex acc = 0.0;
    if (i < n) {
      for (int j = i; j <= n; ++j) {
        const double w = (j == i || j == n) ? 0.5 : 1.0;
        acc += w * ker(i, j) * z[j];
      }
      acc *= du;
    }
    out[i] = z[i] + sign * acc;
  }
  return out;
}

}  // namespace

ComplexProfile apply_forward(const KernelGrid& kernel, const ComplexProfile& z) {
  return apply_lower(kernel, z, -1.0);
}

ComplexProfile apply_inverse(const KernelGrid& kernel, const ComplexProfile& v) {
  return apply_lower(kernel, v, +1.0);
}

ComplexProfile apply_observer_forward(const KernelGrid& kernel, const ComplexProfile& e) {
  return apply_upper(kernel, e, -1.0);
}

ComplexProfile apply_observer_inverse(const KernelGrid& kernel, const ComplexProfile& v) {
  return apply_upper(kernel, v, +1.0);
}

FeedbackTrace kernel_feedback_trace(const KernelGrid& k) {
  const SpatialGrid grid = k.grid();
  const int n = grid.n_cells;
  if (n < 8) throw_config("kernel_feedback_trace: grid too coarse, need n_cells >= 8");
  if (k.orientation() != Orientation::lower)
    throw_config("kernel_feedback_trace: lower kernel expected");
  const double du = grid.spacing;

  FeedbackTrace out;
  out.k11 = k(n, n);
  out.kx1 = ComplexProfile(grid);
  for (int j = 0; j <= n - 2; ++j)
    out.kx1[j] = (3.0 * k(n, j) - 4.0 * k(n - 1, j) + k(n - 2, j)) / (2.0 * du);
  // last two nodes sit outside the one-sided stencil; extrapolate quadratically
  out.kx1[n - 1] = out.kx1[n - 4] - 3.0 * out.kx1[n - 3] + 3.0 * out.kx1[n - 2];
  out.kx1[n] = out.kx1[n - 3] - 3.0 * out.kx1[n - 2] + 3.0 * out.kx1[n - 1];
  return out;
}

ComplexProfile kernel_edge_derivative_upper(const KernelGrid& p) {
  const SpatialGrid grid = p.grid();
  const int n = grid.n_cells;
  if (n < 8) throw_config("kernel_edge_derivative_upper: grid too coarse");
  if (p.orientation() != Orientation::upper)
    throw_config("kernel_edge_derivative_upper: upper kernel expected");
  const double du = grid.spacing;

  ComplexProfile out(grid);
  for (int i = 0; i <= n - 2; ++i)
    out[i] = (3.0 * p(i, n) - 4.0 * p(i, n - 1) + p(i, n - 2)) / (2.0 * du);
  out[n - 1] = out[n - 4] - 3.0 * out[n - 3] + 3.0 * out[n - 2];
  out[n] = out[n - 3] - 3.0 * out[n - 2] + 3.0 * out[n - 1];
  return out;
}

double kernel_residual(const KernelGrid& kernel, const PlantSpec& plant, double c,
                       KernelSide side) {
  const SpatialGrid grid = kernel.grid();
  const int n = grid.n_cells;
  const double d2 = grid.spacing * grid.spacing;
  double worst = 0.0;
  if (side == KernelSide::control) {
    for (int i = 2; i <= n - 1; ++i) {
      for (int j = 1; j <= i - 1; ++j) {
        const Complex kxx = (kernel(i - 1, j) - 2.0 * kernel(i, j) + kernel(i + 1, j)) / d2;
        const Complex kss = (kernel(i, j - 1) - 2.0 * kernel(i, j) + kernel(i, j + 1)) / d2;
        const Complex rhs = (plant.h[j] + c) * kI * kernel(i, j);
        worst = std::max(worst, std::abs(kxx - kss - rhs));
      }
    }
  } else {
    for (int j = 2; j <= n - 1; ++j) {
      for (int i = 1; i <= j - 1; ++i) {
        const Complex pss = (kernel(i, j - 1) - 2.0 * kernel(i, j) + kernel(i, j + 1)) / d2;
        const Complex pxx = (kernel(i - 1, j) - 2.0 * kernel(i, j) + kernel(i + 1, j)) / d2;
        const Complex rhs = (plant.h[i] + c) * kI * kernel(i, j);
        worst = std::max(worst, std::abs(pss - pxx - rhs));
      }
    }
  }
  return worst;
}

double kernel_edge_bc_residual(const KernelGrid& kernel, double q, KernelSide side) {
  const SpatialGrid grid = kernel.grid();
  const int n = grid.n_cells;
  const double du = grid.spacing;
  const Complex qi(0.0, q);
  double worst = 0.0;
  if (side == KernelSide::control) {
    for (int i = 2; i <= n; ++i) {
      const Complex kxi0 = (-3.0 * kernel(i, 0) + 4.0 * kernel(i, 1) - kernel(i, 2)) / (2.0 * du);
      worst = std::max(worst, std::abs(kxi0 + qi * kernel(i, 0)));
    }
  } else {
    for (int j = 2; j <= n; ++j) {
      const Complex px0 = (-3.0 * kernel(0, j) + 4.0 * kernel(1, j) - kernel(2, j)) / (2.0 * du);
      worst = std::max(worst, std::abs(px0 + qi * kernel(0, j)));
    }
  }
  return worst;
}

KernelSet solve_kernel_set(const PlantSpec& plant, double c_s, double c_o,
                           const SpatialGrid& grid, const KernelOptions& opts) {
  KernelSet set;
  set.c_s = c_s;
  set.c_o = c_o;
  set.control = solve_control_kernel(plant, c_s, grid, opts);
  set.control_reciprocal = solve_reciprocal_kernel(set.control, opts);
  set.observer = solve_observer_kernel(plant, c_o, grid, opts);
  set.observer_reciprocal = solve_reciprocal_kernel(set.observer, opts);
  return set;
}

}  // namespace schreg
