#pragma once

#include "schreg/core.hpp"

namespace schreg {

/// One eigenpair of the open-loop generator: mu = -i lambda^2 where lambda
/// solves e^{2 lambda} (lambda - iq) = lambda + iq, with the eigenfunction
/// phi(x) = ((lambda-iq)/(lambda+iq)) e^{lambda x} + e^{-lambda x}.
struct EigenPair {
  int index = 0;
  Complex lambda;
  Complex mu;
  ComplexProfile phi;
  double residual = 0.0;  // |e^{2 lambda}(lambda - iq) - (lambda + iq)|
};

/// Newton iteration seeded at lambda_n = n pi i + q/(n pi), n = 1..count.
/// Fails on divergence or if two seeds collapse onto one root.
std::vector<EigenPair> eigenvalues_A(double q, int count, const SpatialGrid& grid);

struct AsymptoticsRow {
  int n = 0;
  Complex lambda;
  Complex mu;
  double residual = 0.0;
  double deviation = 0.0;  // n^2 |mu_n - 2q - i (n pi)^2|
};

struct AsymptoticsReport {
  std::vector<AsymptoticsRow> rows;
  double max_deviation_tail = 0.0;  // max over n >= 5
  double strip_width = 0.0;         // max Re mu - min Re mu
};

AsymptoticsReport asymptotics_report(const std::vector<EigenPair>& pairs, double q);

/// Spectrum of the transformed observer-error generator: the two placed
/// finite blocks plus the damped Neumann modes i j^2 pi^2 - c_o, together
/// with the Riesz quadratic-closeness sum
///   sum_j || (A_d - (j^2 pi^2 i - c_o) I)^{-1} l_d ||^2
/// truncated at j_max, with a tail estimate from the j^{-4} decay.
struct ObserverSpectrumReport {
  std::vector<Complex> finite_modes;  // eig(A_r) then eig(A_d)
  std::vector<Complex> pde_modes;     // j = 0..j_max
  double spectral_abscissa = 0.0;
  double closeness_sum = 0.0;
  double closeness_tail_estimate = 0.0;
  std::vector<double> closeness_partial;  // running partial sums over j
};

ObserverSpectrumReport observer_error_spectrum(double c_o, const Eigen::MatrixXd& A_r,
                                               const Eigen::MatrixXcd& A_d,
                                               const Eigen::VectorXcd& l_d, int j_max);

enum class InputChoice { left, right };

/// Transfer-function magnitudes |C (sI - A)^{-1} B| along the positive real
/// axis by modal truncation, plus the closed-form comparison bound
/// (2 sqrt(2) m / a) sum_k 1/(theta + k^2) with a = pi^2, theta = s/a and
/// m = sup |b_n c_n| measured from the truncated coefficients.
struct PropernessProbe {
  std::vector<double> s_values;
  std::vector<double> magnitudes;
  std::vector<double> bounds;
  double coefficient_sup = 0.0;  // measured m
  int truncation = 0;
  double truncation_tail = 0.0;  // rough size of the neglected modes at min s
};

PropernessProbe strict_properness_probe(const PlantSpec& plant, const ObservationFunctional& C,
                                        InputChoice input, const std::vector<double>& s_values,
                                        int truncation = 200);

}  // namespace schreg
