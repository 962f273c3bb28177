#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "kdvnet/critical_sets.hpp"
#include "kdvnet/cubic.hpp"

namespace kdvnet {

using MatrixXc = Eigen::MatrixXcd;
using VectorXc = Eigen::VectorXcd;

/// Star graph with N edges, Neumann controls on the first m edges and
/// Dirichlet controls on the rest. alpha is the central coupling.
struct GraphConfig {
  int N = 2;
  int m = 1;
  double alpha = 2.0;
  std::vector<double> lengths;

  static GraphConfig star(int N, int m, double L);
  static GraphConfig star(int N, int m, double L, double alpha);
  void validate() const;  // N >= 2, 0 <= m <= N, alpha > N/2, positive lengths
  bool equal_lengths(double rel_tol = 1e-9) const;
  double common_length() const;  // requires equal lengths
};

struct TwoEdgeWeights {
  double sigma_ne = 1.0;
  double sigma_di = 1.0;
};

/// Fundamental system of lambda y + y' + y''' = 0 on one edge, with
/// evaluators for the value and first two derivatives. When the two closest
/// roots are nearer than the separation cut the third function is the
/// divided difference (e^{mu1 x} - e^{mu2 x})/(mu1 - mu2), which tends to
/// x e^{sigma x} at a double root; this keeps the matrix columns independent
/// through the double-root locus.
class EdgeBasis {
 public:
  enum class Kind { Simple, Confluent };

  static EdgeBasis from_lambda(Complex lambda, double separation_cut = 0.02);
  static EdgeBasis simple(const std::array<Complex, 3>& roots);
  static EdgeBasis confluent(Complex far_root, Complex near1, Complex near2);

  Complex eval(int which, int deriv, double x) const;  // which 0..2, deriv 0..2
  Kind kind() const { return kind_; }
  const std::array<Complex, 3>& roots() const { return roots_; }

 private:
  Kind kind_ = Kind::Simple;
  std::array<Complex, 3> roots_{};  // Confluent: [far, near1, near2]
};

/// Overdetermined boundary matrix of one spectral problem. Row order:
/// continuity at 0 (N-1), curvature flux at 0 (1), value at L (N),
/// slope at 0 (N), controlled-node rows at L (m slope + N-m curvature).
struct SpectralMatrix {
  GraphConfig config;
  Complex lambda{};
  double L = 0.0;
  MatrixXc entries;
  EdgeBasis basis;
};

struct EdgeTraces {
  Complex kappa{};  // phi_1(0)
  Complex beta{};   // phi_j''(0)
  Complex gamma{};  // -phi_j''(l_j)
  Complex delta{};  // -phi_j'(l_j)
};

struct SpectralSolution {
  Complex lambda{};
  VectorXc coefficients;  // unit norm, 3 per edge
  double sigma_min = 0.0;
  std::vector<EdgeTraces> traces;
};

SpectralMatrix build_boundary_matrix(const GraphConfig& config, Complex lambda, double L);

SpectralMatrix build_two_edge_weighted_matrix(const TwoEdgeWeights& weights, Complex lambda,
                                              double L);

/// Smallest singular value after scaling rows to unit norm.
double sigma_min(const MatrixXc& M);

/// Smallest singular value plus the corresponding right singular vector.
std::pair<double, VectorXc> sigma_min_with_nullvector(const MatrixXc& M);

SpectralSolution extract_solution(const SpectralMatrix& M);

enum class ThetaKind { FullNeumann, FullDirichlet };

/// The 4x3 reduced systems obtained by Gauss-Jordan elimination:
///   FullNeumann:   [1 1 1; a e^a b e^b c e^c; a b c; a^2 e^a b^2 e^b c^2 e^c]
///   FullDirichlet: [1 1 1; a e^a b e^b c e^c; a^2 b^2 c^2; a^2 e^a ...]
/// Requires a + b + c = 0 within 1e-10.
Eigen::Matrix<Complex, 4, 3> build_reduced_theta_matrix(ThetaKind kind, Complex a, Complex b,
                                                        Complex c);

/// Final pivot of the elimination: (c-a)(c e^c - b e^b) for FullNeumann and
/// (c-a)(c^2 e^c - b^2 e^b)/c for FullDirichlet.
Complex reduced_theta_pivot(ThetaKind kind, Complex a, Complex b, Complex c);

/// Numerical rank from the SVD of the row-normalized matrix.
int matrix_rank(const MatrixXc& M, double rel_tol = 1e-8);

/// Boundary matrix of the one-edge theta problem (value/slope rows at 0 and
/// slope/curvature rows at L per kind), built in the lambda-appropriate basis.
MatrixXc build_theta_boundary_matrix(ThetaKind kind, Complex lambda, double L);

struct ScanRegion {
  double re_min = -20.0;
  double re_max = 20.0;
  double im_min = -20.0;
  double im_max = 20.0;
};

struct ScanOptions {
  ScanRegion region;
  double axis_density = 8.0;  // grid points per unit on the imaginary axis pass
  double grid_density = 2.0;  // grid points per unit on the rectangle pass
  double tol = 1e-6;
  int refine_candidates = 6;
  int jobs = 0;
};

struct ScanOutcome {
  std::optional<SpectralSolution> kernel;  // set when min sigma < tol
  double min_sigma = 0.0;
  Complex argmin{};
  ScanRegion region;
  long evaluations = 0;
};

/// Imaginary-axis pass first, complex-rectangle fallback, Nelder-Mead
/// refinement of local minima. Deterministic tie-breaking on (re, im).
ScanOutcome scan_criticality(const GraphConfig& config, double L, const ScanOptions& opts = {});

enum class Verdict { Critical, NonCritical, OutOfScope };

std::string to_string(Verdict v);

/// Which critical sets govern a configuration (Theorem-level dispatch).
struct SetPrediction {
  bool uses_rosier = false;
  bool uses_nstar = false;
  bool uses_ndagger = false;
  bool always_controllable = false;  // the two-edge mixed case
};

SetPrediction governing_sets(const GraphConfig& config);

struct MembershipPrediction {
  std::optional<IntegerWitness> rosier;          // closed form, always evaluated when relevant
  std::optional<bool> in_nstar;                  // unset when no catalog was supplied
  std::optional<bool> in_ndagger;                // unset when no catalog was supplied
  std::optional<bool> predicted_critical;        // unset when undecidable from catalogs
};

struct ClassifyOptions {
  double tol = 1e-6;
  double membership_tol = 1e-6;
  ScanOptions scan;
  bool use_default_region = true;  // region half-width 20*max(1, 1/L^3)
  const std::vector<CriticalWitness>* nstar_catalog = nullptr;
  const std::vector<CriticalWitness>* ndagger_catalog = nullptr;
};

struct Classification {
  Verdict verdict = Verdict::OutOfScope;
  std::optional<SpectralSolution> witness;
  double min_sigma = 0.0;
  Complex argmin{};
  ScanRegion scanned_region;
  MembershipPrediction predicted;
};

/// Scan-based verdict plus the independent set-membership prediction.
Classification classify_length(const GraphConfig& config, double L,
                               const ClassifyOptions& opts = {});

}  // namespace kdvnet
