#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <memory>
#include <vector>

#include "kdvnet/spectral.hpp"

namespace kdvnet {

using SparseMat = Eigen::SparseMatrix<double>;

/// Uniform per-edge discretization of the star graph plus the time grid.
struct GraphGrid {
  GraphConfig config;
  int points_per_edge = 0;
  double T = 0.0;
  double dt = 0.0;
  int steps = 0;
  std::vector<double> h;  // l_j/(points-1)

  /// dt = dt_factor * min_j h_j, rounded so that steps * dt == T.
  static GraphGrid make(const GraphConfig& config, int points_per_edge, double T,
                        double dt_factor = 0.4);
  void validate() const;
  double min_h() const;
};

/// Per-edge nodal values at one time.
struct StateField {
  std::vector<Eigen::VectorXd> edges;
  double time = 0.0;

  static StateField zero(const GraphGrid& grid, double time = 0.0);
};

StateField axpy(double a, const StateField& x, const StateField& y);  // a*x + y
double max_abs(const StateField& f);

/// Sampled boundary data on the time grid: g_j (Neumann rows, j < m) and
/// p_j (Dirichlet rows, j >= m); unused columns stay zero.
struct ControlSignal {
  Eigen::MatrixXd neumann;    // (steps+1) x N
  Eigen::MatrixXd dirichlet;  // (steps+1) x N

  static ControlSignal zero(const GraphGrid& grid);
  void validate(const GraphGrid& grid) const;
};

struct TraceRecord {
  Eigen::MatrixXd dx_at_l;     // (steps+1) x N, d_x phi_j(t, l_j)
  Eigen::MatrixXd dxx_at_l;    // (steps+1) x N, d_x^2 phi_j(t, l_j)
  Eigen::VectorXd value_at_0;  // phi_1(t, 0)
};

/// Discrete generator of the adjoint dynamics with the boundary rows
/// eliminated: free unknowns are the interior nodes i = 2..n-2 per edge.
class AdjointSystem {
 public:
  explicit AdjointSystem(const GraphGrid& grid);

  const GraphGrid& grid() const { return grid_; }
  const SparseMat& generator() const { return A_; }

  Eigen::VectorXd extract_free(const StateField& f) const;
  StateField reconstruct(const Eigen::VectorXd& free, double time) const;
  /// Max constraint defect of the field relative to its magnitude.
  double constraint_defect(const StateField& f) const;
  /// One backward-in-time Crank-Nicolson step of the free unknowns.
  Eigen::VectorXd step(const Eigen::VectorXd& free) const;

 private:
  GraphGrid grid_;
  SparseMat A_, R_, M2_;
  std::unique_ptr<Eigen::SparseLU<SparseMat>> lu_;
};

struct AdjointSolve {
  std::vector<StateField> states;  // index i holds time t = i*dt, size steps+1
  TraceRecord traces;
};

AdjointSolve solve_adjoint(const AdjointSystem& system, const StateField& phi_T,
                           double compat_tol = 1e-6);
AdjointSolve solve_adjoint(const StateField& phi_T, const GraphGrid& grid,
                           double compat_tol = 1e-6);

/// Forward control dynamics; the controlled boundary rows carry the sampled
/// signals and are eliminated per time level.
class ForwardSystem {
 public:
  explicit ForwardSystem(const GraphGrid& grid);

  const GraphGrid& grid() const { return grid_; }

  Eigen::VectorXd extract_free(const StateField& f) const;
  StateField reconstruct(const Eigen::VectorXd& free, const Eigen::VectorXd& bvals,
                         const Eigen::VectorXd& gvals, double time) const;
  /// Homogeneous-row defect (center continuity/flux and the uncontrolled
  /// right-end rows); the data rows are time-dependent and not checked.
  double constraint_defect(const StateField& f) const;
  Eigen::VectorXd step(const Eigen::VectorXd& free, const Eigen::VectorXd& b0,
                       const Eigen::VectorXd& g0, const Eigen::VectorXd& b1,
                       const Eigen::VectorXd& g1) const;

 private:
  GraphGrid grid_;
  SparseMat A_, R_, Sb_, Sg_, Bb_, Bg_, M2_;
  std::unique_ptr<Eigen::SparseLU<SparseMat>> lu_;
};

std::vector<StateField> solve_forward(const ForwardSystem& system, const StateField& u0,
                                      const ControlSignal& controls, double compat_tol = 1e-6);
std::vector<StateField> solve_forward(const StateField& u0, const ControlSignal& controls,
                                      const GraphGrid& grid, double compat_tol = 1e-6);

double l2_norm_squared(const GraphGrid& grid, const StateField& f);
double l2_inner(const GraphGrid& grid, const StateField& f, const StateField& g);
/// L2 on the Neumann-controlled edges, first-derivative seminorm on the rest.
double xm_inner(const GraphGrid& grid, const StateField& f, const StateField& g);

struct IdentityResidual {
  double lhs = 0.0;
  double rhs = 0.0;
  double scale = 0.0;  // natural magnitude of the identity's terms
  double abs_residual() const { return std::abs(lhs - rhs); }
  double rel_residual() const { return abs_residual() / std::max(scale, 1e-300); }
};

/// (1/2)||phi(T)||^2 against the boundary terms plus (1/2)||phi(0)||^2.
IdentityResidual energy_identity_residual(const AdjointSolve& solve, const GraphGrid& grid);

/// <u(T), phi^T> against the control/trace pairings, starting from u0 = 0.
IdentityResidual duality_residual(const ControlSignal& controls, const StateField& phi_T,
                                  const GraphGrid& grid);

/// Constraint-compatible basis from per-edge trigonometric dictionaries
/// (Neumann-left/Dirichlet-right cosines and x-weighted sines), projected
/// onto the constraint space and orthonormalized in the X_m inner product.
/// Greedy and graded: enlarging `size` extends the basis without changing
/// its prefix.
std::vector<StateField> make_trace_basis(const GraphGrid& grid, int size);

/// Per-edge bump modes (s(1-s))^power sin(k pi s); vanish to high order at
/// both edge ends, so adjoint traces start at zero and solutions stay smooth.
std::vector<StateField> make_smooth_basis(const GraphGrid& grid, int size, int power = 5);

}  // namespace kdvnet
