#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kdvnet/cubic.hpp"

namespace kdvnet {

enum class SetTag { NRosier, RBeta, NStar, NDagger };

std::string to_string(SetTag tag);
std::optional<SetTag> set_tag_from_string(const std::string& s);

enum class TranscendentalKind { NStar, NDagger };

/// Signals a witness that fails every classification case it should satisfy.
struct ClassificationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IntegerWitness {
  int k = 0;
  int l = 0;
};

/// A certified member of one critical set. Closed-form sets carry the
/// integer pair; transcendental sets carry the complex pair (a, b) with
/// c = -(a+b) implied.
struct CriticalWitness {
  SetTag set = SetTag::NRosier;
  double beta = 0.0;  // RBeta only
  double L = 0.0;

  std::optional<IntegerWitness> rosier_pair;  // 2pi/sqrt(3(1+beta)) sqrt(k^2+kl+l^2)
  std::optional<int> harmonic_k;              // k pi / sqrt(1+beta) branch (RBeta)

  Complex a{};
  Complex b{};
  Complex lambda{};  // associated spectral eigenvalue, when known
  double residual = 0.0;
  double L_squared_imag = 0.0;

  Complex c() const { return -(a + b); }
};

/// g(z) = z e^z for NStar, z^2 e^z for NDagger.
Complex transcendental_g(TranscendentalKind kind, Complex z);

/// |g(a)-g(b)| + |g(b)-g(c)| with c = -(a+b).
double transcendental_residual(TranscendentalKind kind, Complex a, Complex b);

/// All members of the Rosier set up to L_max, ascending, (k<=l) canonical,
/// deduplicated by value of k^2+kl+l^2.
std::vector<CriticalWitness> enumerate_rosier(double L_max);

/// Union of the two R_beta branches up to L_max, ascending. Records whose
/// length lies in both branches carry both witnesses. Requires beta > -1.
std::vector<CriticalWitness> enumerate_r_beta(double beta, double L_max);

/// Exhaustive integer search for |3L^2/(4pi^2) - (k^2+kl+l^2)| within
/// tol * max(1, 3L^2/(4pi^2)).
std::optional<IntegerWitness> rosier_membership(double L, double tol);

struct NewtonOptions {
  int max_iter = 80;
  double tol = 1e-12;
};

/// Damped Newton on F(a,b) = (g(a)-g(c), g(b)-g(c)), c = -(a+b).
/// Returns a witness only when the iteration converges and the solution has
/// Re L^2 > 1e-6, |Im L^2| < 1e-8 and is not the degenerate origin.
std::optional<CriticalWitness> newton_transcendental(TranscendentalKind kind, Complex seed_a,
                                                     Complex seed_b,
                                                     const NewtonOptions& opts = {});

struct SearchBox {
  double re_min = -8.0;
  double re_max = 8.0;
  double im_min = -26.0;
  double im_max = 26.0;
};

struct EnumerateOptions {
  SearchBox box;            // applied to each of a and b
  double grid_density = 4;  // seed points per unit along the imaginary diagonals
  double L_max = 26.0;
  int jobs = 0;  // 0 = available parallelism
};

/// Multi-start Newton over the seed grid; deduplicated by L (1e-6) and by
/// unordered root triple (1e-6); ascending in L. Empty result allowed.
std::vector<CriticalWitness> enumerate_transcendental(TranscendentalKind kind,
                                                      const EnumerateOptions& opts = {});

enum class DaggerCase { SignsNegative, MixedSigns, AllPositive };

std::string to_string(DaggerCase c);

/// Classifies the halved pair (a/2, b/2) of an NDagger witness into the
/// three sign patterns of z e^z type relations. Throws ClassificationError
/// when no case matches within tolerance.
DaggerCase dagger_case_decomposition(const CriticalWitness& witness, double tol = 1e-6);

/// Sorts by (re, im), picks the conjugation representative deterministically,
/// and returns the canonical (a, b) of the unordered triple {a, b, c}.
std::pair<Complex, Complex> canonical_pair(Complex a, Complex b);

}  // namespace kdvnet
