#pragma once

#include <array>
#include <complex>
#include <stdexcept>

namespace kdvnet {

using Complex = std::complex<double>;

/// Raised when a computation reaches a branch that is algebraically
/// impossible for mu^3 + mu + lambda (e.g. a triple root).
struct ConsistencyError : std::logic_error {
  using std::logic_error::logic_error;
};

enum class Multiplicity { AllSimple, Double, Triple };

/// Roots of P_lambda(mu) = mu^3 + mu + lambda in canonical order
/// (sorted by (re, im)).
struct CubicRoots {
  Complex lambda{};
  std::array<Complex, 3> roots{};
  Multiplicity multiplicity = Multiplicity::AllSimple;
  // Index of the first element of the repeated pair when multiplicity is
  // Double; -1 otherwise. The pair is (repeated_index, repeated_index + 1).
  int repeated_index = -1;
  double residual = 0.0;  // max_i |P_lambda(roots[i])|
};

/// |mu^3 + mu + lambda|
double cubic_residual(Complex lambda, Complex mu);

/// Closed-form roots with one Newton polish step per root. Two roots are
/// merged into a Double classification when their distance is below
/// 1e-7 * max(1, |lambda|).
CubicRoots solve_depressed_cubic(Complex lambda);

/// -4 - 27 lambda^2; vanishes exactly on the double-root locus.
Complex discriminant(Complex lambda);

/// (|sum mu_i|, |sum_{i<j} mu_i mu_j - 1|, |prod mu_i + lambda|)
std::array<double, 3> girard_residuals(const CubicRoots& r);

}  // namespace kdvnet
