#include "doctest.h"

#include <cmath>
#include <random>

#include "schreg/core.hpp"
#include "schreg/kernels.hpp"

using namespace schreg;
using namespace std::complex_literals;

namespace {
const double kPi = 3.14159265358979323846;

PlantSpec flat_plant(double q, const SpatialGrid& g, double h_value = 0.0) {
  return PlantSpec{q, ComplexProfile::sample(g, [=](double) { return h_value; }),
                   ComplexProfile::sample(g, [](double) { return 1.0; })};
}

ComplexProfile random_smooth_profile(const SpatialGrid& g, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Complex> coef(7);
  for (auto& c : coef) c = Complex(u(rng), u(rng));
  return ComplexProfile::sample(g, [&](double x) {
    Complex acc = 0.0;
    for (size_t m = 0; m < coef.size(); ++m)
      acc += coef[m] * std::cos(static_cast<double>(m) * kPi * x) / (1.0 + double(m * m));
    return acc;
  });
}
}  // namespace

TEST_CASE("control kernel matches the constant-coefficient closed form") {
  auto sup_error = [](int n) {
    SpatialGrid g(n);
    PlantSpec plant = flat_plant(1.0, g);
    KernelGrid k = solve_control_kernel(plant, 0.0, g);
    double worst = 0.0;
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= i; ++j) {
        const Complex exact = -1.0i * std::exp(1.0i * (g.node(i) - g.node(j)));
        worst = std::max(worst, std::abs(k(i, j) - exact));
      }
    return worst;
  };
  const double e200 = sup_error(200);
  CHECK(e200 < 5e-4);
  const double e100 = sup_error(100);
  CHECK(e100 / e200 > 3.0);
  CHECK(e100 / e200 < 5.0);
}

TEST_CASE("observer kernel matches the mirrored closed form") {
  SpatialGrid g(200);
  PlantSpec plant = flat_plant(1.0, g);
  KernelGrid p = solve_observer_kernel(plant, 0.0, g);
  double worst = 0.0;
  for (int i = 0; i <= g.n_cells; ++i)
    for (int j = i; j <= g.n_cells; ++j) {
      const Complex exact = -1.0i * std::exp(1.0i * (g.node(j) - g.node(i)));
      worst = std::max(worst, std::abs(p(i, j) - exact));
    }
  CHECK(worst < 5e-4);
}

TEST_CASE("kernels vanish when all data vanish") {
  SpatialGrid g(64);
  PlantSpec plant = flat_plant(0.0, g);
  KernelGrid k = solve_control_kernel(plant, 0.0, g);
  KernelGrid p = solve_observer_kernel(plant, 0.0, g);
  double worst = 0.0;
  for (int i = 0; i <= g.n_cells; ++i)
    for (int j = 0; j <= i; ++j) worst = std::max(worst, std::abs(k(i, j)) + std::abs(p(j, i)));
  CHECK(worst == 0.0);
}

TEST_CASE("diagonal boundary data hold exactly as assigned") {
  SpatialGrid g(100);
  PlantSpec plant{0.7, ComplexProfile::sample(g, [](double x) { return 0.5 + 0.3 * std::sin(2.0 * x); }),
                  ComplexProfile(g)};
  const double c_s = 1.3;
  KernelGrid k = solve_control_kernel(plant, c_s, g);
  KernelGrid p = solve_observer_kernel(plant, c_s, g);

  // coarse-grid cumulative trapezoid of h + c
  Complex cum = 0.0;
  for (int i = 0; i <= g.n_cells; ++i) {
    if (i > 0) cum += 0.5 * g.spacing * ((plant.h[i - 1] + c_s) + (plant.h[i] + c_s));
    const Complex expect = -0.5i * cum - 0.7i;
    CHECK(std::abs(k(i, i) - expect) < 1e-13);
    CHECK(std::abs(p(i, i) - expect) < 1e-13);
  }
}

TEST_CASE("lateral boundary condition residual is second order") {
  auto resid = [](int n) {
    SpatialGrid g(n);
    PlantSpec plant = flat_plant(1.0, g, 0.4);
    KernelGrid k = solve_control_kernel(plant, 1.0, g);
    return kernel_edge_bc_residual(k, plant.q, KernelSide::control);
  };
  const double r100 = resid(100), r200 = resid(200);
  CHECK(r200 < 1e-3);
  CHECK(r100 / r200 > 2.5);
  CHECK(r100 / r200 < 6.0);
}

TEST_CASE("interior PDE residual stays small in the closed-form case") {
  SpatialGrid g(200);
  PlantSpec plant = flat_plant(1.0, g);
  KernelGrid k = solve_control_kernel(plant, 0.0, g);
  CHECK(kernel_residual(k, plant, 0.0, KernelSide::control) < 1e-3);

  SpatialGrid g0(64);
  PlantSpec zero = flat_plant(0.0, g0);
  KernelGrid kz = solve_control_kernel(zero, 0.0, g0);
  CHECK(kernel_residual(kz, zero, 0.0, KernelSide::control) == 0.0);
}

TEST_CASE("interior PDE residual is second order") {
  // A varying potential keeps the truncation error smooth and nonzero, so the
  // centered-residual halving test sees the genuine O(spacing^2) rate.
  auto resid = [](int n, KernelSide side) {
    SpatialGrid g(n);
    PlantSpec plant{1.0,
                    ComplexProfile::sample(g, [](double x) { return 0.4 + 0.3 * std::sin(2.0 * x); }),
                    ComplexProfile(g)};
    KernelGrid ker = side == KernelSide::control ? solve_control_kernel(plant, 0.6, g)
                                                 : solve_observer_kernel(plant, 0.6, g);
    return kernel_residual(ker, plant, 0.6, side);
  };
  for (KernelSide side : {KernelSide::control, KernelSide::observer}) {
    const double r100 = resid(100, side), r200 = resid(200, side);
    CHECK(r200 < 1e-3);
    CHECK(r100 / r200 == doctest::Approx(4.0).epsilon(0.20));
  }
}

TEST_CASE("reciprocal kernel basics") {
  SpatialGrid g(80);
  SUBCASE("zero source gives zero reciprocal") {
    KernelGrid zero(g, Orientation::lower);
    KernelGrid R = solve_reciprocal_kernel(zero);
    CHECK(std::abs(R(40, 10)) == 0.0);
  }
  SUBCASE("diagonal follows the source kernel; sub-triangle rows converge at least as fast") {
    PlantSpec plant = flat_plant(1.0, g, 0.5);
    KernelGrid k = solve_control_kernel(plant, 1.0, g);
    KernelSolveInfo info;
    KernelGrid K = solve_reciprocal_kernel(k, {}, &info);
    const double du = g.spacing;
    for (int i = 0; i <= g.n_cells; ++i) {
      // exact-discrete-inverse diagonal, an O(spacing) perturbation of k(x,x)
      const Complex expect = i == 0 ? k(0, 0) : k(i, i) / (1.0 - 0.5 * du * k(i, i));
      CHECK(std::abs(K(i, i) - expect) < 1e-12);
      CHECK(std::abs(K(i, i) - k(i, i)) <= 0.51 * du * std::norm(k(i, i)) + 1e-12);
    }
    CHECK(info.per_row_iterations[20] <= info.per_row_iterations[80]);
    CHECK(info.iterations < 500);
  }
}

TEST_CASE("forward then inverse transform is the identity") {
  SpatialGrid g(200);
  PlantSpec plant = flat_plant(1.0, g);
  KernelGrid k = solve_control_kernel(plant, 0.0, g);
  KernelGrid K = solve_reciprocal_kernel(k);

  auto z = ComplexProfile::sample(g, [](double x) { return std::sin(kPi * x); });
  CHECK(sup_diff(apply_inverse(K, apply_forward(k, z)), z) < 1e-6);
}

TEST_CASE("round-trip identity on random smooth profiles") {
  SpatialGrid g(100);
  PlantSpec plant{1.0, ComplexProfile::sample(g, [](double) { return 0.5; }),
                  ComplexProfile::sample(g, [](double) { return 1.0; })};
  KernelSet set = solve_kernel_set(plant, 1.0, 2.0, g);

  std::mt19937 rng(42);
  for (int rep = 0; rep < 20; ++rep) {
    ComplexProfile z = random_smooth_profile(g, rng);
    const double bound = 10.0 * g.spacing * g.spacing;
    CHECK(sup_diff(apply_inverse(set.control_reciprocal, apply_forward(set.control, z)), z) <
          bound);
    CHECK(sup_diff(apply_observer_inverse(set.observer_reciprocal,
                                          apply_observer_forward(set.observer, z)),
                   z) < bound);
  }
}

TEST_CASE("transforms with zero kernel are the identity") {
  SpatialGrid g(50);
  KernelGrid zl(g, Orientation::lower), zu(g, Orientation::upper);
  std::mt19937 rng(3);
  ComplexProfile z = random_smooth_profile(g, rng);
  CHECK(sup_diff(apply_forward(zl, z), z) == 0.0);
  CHECK(sup_diff(apply_inverse(zl, z), z) == 0.0);
  CHECK(sup_diff(apply_observer_forward(zu, z), z) == 0.0);
  CHECK(sup_diff(apply_observer_inverse(zu, z), z) == 0.0);

  ComplexProfile zero(g);
  PlantSpec plant = flat_plant(1.0, g);
  KernelGrid k = solve_control_kernel(plant, 0.0, g);
  CHECK(sup_norm(apply_forward(k, zero)) == 0.0);
}

TEST_CASE("transform of a constant against the analytic integral") {
  SpatialGrid g(200);
  PlantSpec plant = flat_plant(1.0, g);
  KernelGrid k = solve_control_kernel(plant, 0.0, g);
  auto one = ComplexProfile::sample(g, [](double) { return 1.0; });
  ComplexProfile v = apply_forward(k, one);
  double worst = 0.0;
  for (int i = 0; i <= g.n_cells; ++i)
    worst = std::max(worst, std::abs(v[i] - std::exp(1.0i * g.node(i))));
  CHECK(worst < 1e-5);
}

TEST_CASE("feedback trace values") {
  SpatialGrid g(200);
  SUBCASE("flat potential ties k(1,1) to the decay rate and q") {
    PlantSpec plant = flat_plant(2.0, g);
    const double c_s = 0.8;
    KernelGrid k = solve_control_kernel(plant, c_s, g);
    FeedbackTrace tr = kernel_feedback_trace(k);
    CHECK(std::abs(tr.k11 - Complex(0.0, -(c_s / 2.0 + 2.0))) < 1e-12);
  }
  SUBCASE("closed-form x-derivative") {
    PlantSpec plant = flat_plant(1.0, g);
    KernelGrid k = solve_control_kernel(plant, 0.0, g);
    FeedbackTrace tr = kernel_feedback_trace(k);
    double worst = 0.0;
    for (int j = 0; j <= g.n_cells; ++j) {
      const Complex exact = std::exp(1.0i * (1.0 - g.node(j)));
      worst = std::max(worst, std::abs(tr.kx1[j] - exact));
    }
    CHECK(worst < 1e-3);
  }
  SUBCASE("zero kernel gives zero trace") {
    KernelGrid z(g, Orientation::lower);
    FeedbackTrace tr = kernel_feedback_trace(z);
    CHECK(std::abs(tr.k11) == 0.0);
    CHECK(sup_norm(tr.kx1) == 0.0);
  }
  SUBCASE("coarse grid is rejected") {
    SpatialGrid tiny(4);
    KernelGrid z(tiny, Orientation::lower);
    CHECK_THROWS_AS(kernel_feedback_trace(z), Error);
  }
}

TEST_CASE("observer edge derivative matches the closed form") {
  SpatialGrid g(200);
  PlantSpec plant = flat_plant(1.0, g);
  KernelGrid p = solve_observer_kernel(plant, 0.0, g);
  ComplexProfile dp = kernel_edge_derivative_upper(p);
  // p(x,xi) = -i e^{i(xi - x)}  =>  p_xi(x,1) = e^{i(1-x)}
  double worst = 0.0;
  for (int i = 0; i <= g.n_cells; ++i)
    worst = std::max(worst, std::abs(dp[i] - std::exp(1.0i * (1.0 - g.node(i)))));
  CHECK(worst < 1e-3);
}
