#include "kdvnet/cubic.hpp"

#include <algorithm>
#include <cmath>

namespace kdvnet {

namespace {

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

void require_finite(Complex z, const char* what) {
  if (!finite(z)) throw std::invalid_argument(std::string(what) + ": non-finite value");
}

}  // namespace

double cubic_residual(Complex lambda, Complex mu) {
  return std::abs(mu * mu * mu + mu + lambda);
}

Complex discriminant(Complex lambda) {
  require_finite(lambda, "discriminant");
  return -4.0 - 27.0 * lambda * lambda;
}

CubicRoots solve_depressed_cubic(Complex lambda) {
  require_finite(lambda, "solve_depressed_cubic");

  // Cardano for mu^3 + p mu + q with p = 1, q = lambda.
  const Complex q = lambda;
  const Complex s = std::sqrt(q * q / 4.0 + 1.0 / 27.0);
  Complex u3 = -q / 2.0 + s;
  if (std::abs(-q / 2.0 - s) > std::abs(u3)) u3 = -q / 2.0 - s;  // avoid cancellation
  const Complex u = std::pow(u3, 1.0 / 3.0);
  const Complex v = -1.0 / (3.0 * u);  // uv = -p/3
  const Complex w(-0.5, std::sqrt(3.0) / 2.0);

  std::array<Complex, 3> mu = {u + v, w * u + std::conj(w) * v, std::conj(w) * u + w * v};

  // One Newton polish step per root.
  for (auto& r : mu) {
    const Complex dp = 3.0 * r * r + 1.0;
    if (std::abs(dp) > 1e-12) {
      const Complex p = r * r * r + r + lambda;
      r -= p / dp;
    }
  }

  std::sort(mu.begin(), mu.end(), [](Complex a, Complex b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });

  CubicRoots out;
  out.lambda = lambda;
  out.roots = mu;
  for (const auto& r : mu) out.residual = std::max(out.residual, cubic_residual(lambda, r));

  const double merge_tol = 1e-7 * std::max(1.0, std::abs(lambda));
  const double d01 = std::abs(mu[0] - mu[1]);
  const double d12 = std::abs(mu[1] - mu[2]);
  const double d02 = std::abs(mu[0] - mu[2]);
  const int close = (d01 < merge_tol) + (d12 < merge_tol) + (d02 < merge_tol);
  if (close >= 2) {
    // All roots equal would force lambda = 0, contradicting the pairwise sum.
    throw ConsistencyError("solve_depressed_cubic: triple root reported for mu^3+mu+lambda");
  }
  if (close == 1) {
    out.multiplicity = Multiplicity::Double;
    out.repeated_index = (d01 < merge_tol) ? 0 : (d12 < merge_tol) ? 1 : 0;
    if (d02 < merge_tol) out.repeated_index = 0;  // unreachable after sort, kept for safety
  }
  return out;
}

std::array<double, 3> girard_residuals(const CubicRoots& r) {
  const Complex sum = r.roots[0] + r.roots[1] + r.roots[2];
  const Complex pair =
      r.roots[0] * r.roots[1] + r.roots[1] * r.roots[2] + r.roots[0] * r.roots[2];
  const Complex prod = r.roots[0] * r.roots[1] * r.roots[2];
  return {std::abs(sum), std::abs(pair - 1.0), std::abs(prod + r.lambda)};
}

}  // namespace kdvnet
