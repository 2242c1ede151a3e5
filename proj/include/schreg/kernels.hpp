#pragma once

#include "schreg/core.hpp"

namespace schreg {

enum class Orientation { lower, upper };
enum class KernelSide { control, observer };

/// Complex values on a triangular node set: (x_i, xi_j) with j <= i (lower)
/// or j >= i (upper). Only the declared triangle is stored; the diagonal
/// belongs to both orientations.
class KernelGrid {
 public:
  KernelGrid() = default;
  KernelGrid(SpatialGrid g, Orientation o);

  const SpatialGrid& grid() const { return grid_; }
  Orientation orientation() const { return orient_; }
  bool in_triangle(int i, int j) const {
    return orient_ == Orientation::lower ? (j <= i) : (j >= i);
  }

  Complex& at(int i, int j);
  const Complex& at(int i, int j) const;

  /// Unchecked access for hot loops; (i, j) must lie in the triangle.
  Complex& operator()(int i, int j) { return data_[index(i, j)]; }
  const Complex& operator()(int i, int j) const { return data_[index(i, j)]; }

 private:
  size_t index(int i, int j) const {
    // lower is packed by row, upper by column, so that either way the
    // running index stays within the triangle.
    return orient_ == Orientation::lower
               ? static_cast<size_t>(i) * (i + 1) / 2 + j
               : static_cast<size_t>(j) * (j + 1) / 2 + i;
  }
  SpatialGrid grid_;
  Orientation orient_ = Orientation::lower;
  std::vector<Complex> data_;
};

/// Solver diagnostics for the successive-approximation passes.
struct KernelSolveInfo {
  int iterations = 0;
  double final_update = 0.0;
  std::vector<int> per_row_iterations;  // reciprocity solves only
};

struct KernelOptions {
  double tolerance = 1e-12;  // sup-norm update threshold
  int max_iterations = 500;
};

/// Goursat kernel of the stabilizing state transformation: on the lower
/// triangle, k_xx - k_xixi = (h(xi)+c) i k, k_xi(x,0) + qi k(x,0) = 0,
/// k(x,x) = -i/2 int_0^x (h+c) - qi. Solved as an equivalent Volterra
/// integral equation in characteristic variables by successive
/// approximation with trapezoid quadrature.
KernelGrid solve_control_kernel(const PlantSpec& plant, double c_s, const SpatialGrid& grid,
                                const KernelOptions& opts = {}, KernelSolveInfo* info = nullptr);

/// Goursat kernel of the observer error transformation: on the upper
/// triangle, p_xixi - p_xx = (h(x)+c) i p, p_x(0,xi) + qi p(0,xi) = 0,
/// p(x,x) = -i/2 int_0^x (h+c) - qi. Reduces to the control problem under
/// the swap (x, xi) -> (xi, x).
KernelGrid solve_observer_kernel(const PlantSpec& plant, double c_o, const SpatialGrid& grid,
                                 const KernelOptions& opts = {}, KernelSolveInfo* info = nullptr);

/// Reciprocal kernel R of a Volterra transform kernel `src`, satisfying
/// R(x,xi) = src(x,xi) + int_xi^x R(x,s) src(s,xi) ds on the lower triangle
/// (mirrored limits on the upper). Solved per fixed x.
KernelGrid solve_reciprocal_kernel(const KernelGrid& src, const KernelOptions& opts = {},
                                   KernelSolveInfo* info = nullptr);

/// v(x) = z(x) - int_0^x k(x,xi) z(xi) dxi  (lower kernel).
ComplexProfile apply_forward(const KernelGrid& kernel, const ComplexProfile& z);

/// z(x) = v(x) + int_0^x K(x,xi) v(xi) dxi  (lower reciprocal kernel).
ComplexProfile apply_inverse(const KernelGrid& kernel, const ComplexProfile& v);

/// e -> e(x) - int_x^1 p(x,xi) e(xi) dxi  (upper kernel).
ComplexProfile apply_observer_forward(const KernelGrid& kernel, const ComplexProfile& e);

/// v -> v(x) + int_x^1 P(x,xi) v(xi) dxi  (upper reciprocal kernel).
ComplexProfile apply_observer_inverse(const KernelGrid& kernel, const ComplexProfile& v);

/// Boundary traces needed by the feedback law: k(1,1) and xi -> k_x(1,xi).
/// The x-derivative uses a second-order one-sided stencil (x = 1 is the
/// triangle edge); the last two xi nodes are quadratically extrapolated.
struct FeedbackTrace {
  Complex k11;
  ComplexProfile kx1;
};
FeedbackTrace kernel_feedback_trace(const KernelGrid& k);

/// xi-derivative trace x -> p_xi(x,1) of an upper kernel, same stencil idea.
ComplexProfile kernel_edge_derivative_upper(const KernelGrid& p);

/// Max interior PDE residual by centered second differences; testing aid.
double kernel_residual(const KernelGrid& kernel, const PlantSpec& plant, double c,
                       KernelSide side);

/// Max residual of the lateral boundary condition (k_xi(x,0) + qi k(x,0) for
/// control, p_x(0,xi) + qi p(0,xi) for observer), one-sided differences.
double kernel_edge_bc_residual(const KernelGrid& kernel, double q, KernelSide side);

/// The four kernels of one synthesis, plus the decay rates they encode.
struct KernelSet {
  KernelGrid control;              // k, lower
  KernelGrid control_reciprocal;   // K, lower
  KernelGrid observer;             // p, upper
  KernelGrid observer_reciprocal;  // P, upper
  double c_s = 0.0;
  double c_o = 0.0;
};

KernelSet solve_kernel_set(const PlantSpec& plant, double c_s, double c_o,
                           const SpatialGrid& grid, const KernelOptions& opts = {});

}  // namespace schreg
