#include "kdvnet/spectral.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "kdvnet/parallel.hpp"

namespace kdvnet {

namespace {

/// (e^z - 1)/z, stable near z = 0.
Complex phi1(Complex z) {
  if (std::abs(z) < 1e-4) return 1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0;
  return (std::exp(z) - 1.0) / z;
}

void require_spectral_preconditions(const GraphConfig& config, double L, const char* where) {
  config.validate();
  if (!(L > 0)) throw std::invalid_argument(std::string(where) + ": L must be positive");
  for (double l : config.lengths)
    if (std::abs(l - L) > 1e-9 * std::max(1.0, L))
      throw std::invalid_argument(std::string(where) +
                                  ": spectral analysis requires all edge lengths equal to L");
  if (std::abs(config.alpha - config.N) > 1e-12)
    throw std::invalid_argument(std::string(where) + ": spectral analysis requires alpha = N");
}

MatrixXc row_normalized(const MatrixXc& M) {
  MatrixXc R = M;
  for (Eigen::Index i = 0; i < R.rows(); ++i) {
    const double n = R.row(i).norm();
    if (n > 0) R.row(i) /= n;
  }
  return R;
}

struct NelderMead2D {
  // Minimizes f over R^2. Deterministic; no randomness.
  template <class F>
  static std::pair<double, Eigen::Vector2d> run(F&& f, Eigen::Vector2d x0, double scale,
                                                int max_iter) {
    std::array<Eigen::Vector2d, 3> xs = {x0, x0 + Eigen::Vector2d(scale, 0),
                                         x0 + Eigen::Vector2d(0, scale)};
    std::array<double, 3> fs = {f(xs[0]), f(xs[1]), f(xs[2])};
    for (int it = 0; it < max_iter; ++it) {
      // order
      std::array<int, 3> idx = {0, 1, 2};
      std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fs[a] < fs[b]; });
      std::array<Eigen::Vector2d, 3> xo = {xs[idx[0]], xs[idx[1]], xs[idx[2]]};
      std::array<double, 3> fo = {fs[idx[0]], fs[idx[1]], fs[idx[2]]};
      xs = xo;
      fs = fo;
      if ((xs[0] - xs[2]).norm() < 1e-12 && std::abs(fs[0] - fs[2]) < 1e-16) break;
      const Eigen::Vector2d centroid = (xs[0] + xs[1]) / 2.0;
      const Eigen::Vector2d xr = centroid + (centroid - xs[2]);
      const double fr = f(xr);
      if (fr < fs[0]) {
        const Eigen::Vector2d xe = centroid + 2.0 * (centroid - xs[2]);
        const double fe = f(xe);
        if (fe < fr) {
          xs[2] = xe;
          fs[2] = fe;
        } else {
          xs[2] = xr;
          fs[2] = fr;
        }
      } else if (fr < fs[1]) {
        xs[2] = xr;
        fs[2] = fr;
      } else {
        const Eigen::Vector2d xc = centroid + 0.5 * (xs[2] - centroid);
        const double fc = f(xc);
        if (fc < fs[2]) {
          xs[2] = xc;
          fs[2] = fc;
        } else {
          xs[1] = xs[0] + 0.5 * (xs[1] - xs[0]);
          xs[2] = xs[0] + 0.5 * (xs[2] - xs[0]);
          fs[1] = f(xs[1]);
          fs[2] = f(xs[2]);
        }
      }
    }
    int best = 0;
    for (int i = 1; i < 3; ++i)
      if (fs[i] < fs[best]) best = i;
    return {fs[best], xs[best]};
  }
};

}  // namespace

GraphConfig GraphConfig::star(int N, int m, double L) { return star(N, m, L, double(N)); }

GraphConfig GraphConfig::star(int N, int m, double L, double alpha) {
  GraphConfig c;
  c.N = N;
  c.m = m;
  c.alpha = alpha;
  c.lengths.assign(std::size_t(N), L);
  c.validate();
  return c;
}

void GraphConfig::validate() const {
  if (N < 2) throw std::invalid_argument("GraphConfig: N >= 2 required");
  if (m < 0 || m > N) throw std::invalid_argument("GraphConfig: m must lie in [0, N]");
  if (!(alpha > N / 2.0)) throw std::invalid_argument("GraphConfig: alpha > N/2 required");
  if (int(lengths.size()) != N) throw std::invalid_argument("GraphConfig: need N edge lengths");
  for (double l : lengths)
    if (!(l > 0) || !std::isfinite(l))
      throw std::invalid_argument("GraphConfig: edge lengths must be positive and finite");
}

bool GraphConfig::equal_lengths(double rel_tol) const {
  for (double l : lengths)
    if (std::abs(l - lengths[0]) > rel_tol * std::max(1.0, lengths[0])) return false;
  return true;
}

double GraphConfig::common_length() const {
  if (!equal_lengths()) throw std::invalid_argument("GraphConfig: edge lengths differ");
  return lengths[0];
}

EdgeBasis EdgeBasis::from_lambda(Complex lambda, double separation_cut) {
  const CubicRoots roots = solve_depressed_cubic(lambda);
  const auto& mu = roots.roots;
  const std::array<std::pair<int, int>, 3> pairs = {{{0, 1}, {0, 2}, {1, 2}}};
  double dmin = std::numeric_limits<double>::infinity();
  std::pair<int, int> close{0, 1};
  for (const auto& p : pairs) {
    const double d = std::abs(mu[p.first] - mu[p.second]);
    if (d < dmin) {
      dmin = d;
      close = p;
    }
  }
  if (dmin < separation_cut) {
    const int far = 3 - close.first - close.second;
    return confluent(mu[far], mu[close.first], mu[close.second]);
  }
  return simple(mu);
}

EdgeBasis EdgeBasis::simple(const std::array<Complex, 3>& roots) {
  EdgeBasis b;
  b.kind_ = Kind::Simple;
  b.roots_ = roots;
  return b;
}

EdgeBasis EdgeBasis::confluent(Complex far_root, Complex near1, Complex near2) {
  EdgeBasis b;
  b.kind_ = Kind::Confluent;
  b.roots_ = {far_root, near1, near2};
  return b;
}

Complex EdgeBasis::eval(int which, int deriv, double x) const {
  if (kind_ == Kind::Simple) {
    const Complex mu = roots_[std::size_t(which)];
    Complex f = std::exp(mu * x);
    for (int d = 0; d < deriv; ++d) f *= mu;
    return f;
  }
  // Confluent: {e^{m0 x}, e^{m2 x}, (e^{m1 x}-e^{m2 x})/(m1-m2)}
  const Complex m0 = roots_[0], m1 = roots_[1], m2 = roots_[2];
  if (which == 0) {
    Complex f = std::exp(m0 * x);
    for (int d = 0; d < deriv; ++d) f *= m0;
    return f;
  }
  if (which == 1) {
    Complex f = std::exp(m2 * x);
    for (int d = 0; d < deriv; ++d) f *= m2;
    return f;
  }
  const Complex e2 = std::exp(m2 * x);
  const Complex p = phi1((m1 - m2) * x) * x;
  switch (deriv) {
    case 0: return e2 * p;
    case 1: return e2 * (m1 * p + 1.0);
    default: return e2 * (m1 * m1 * p + m1 + m2);
  }
}

SpectralMatrix build_boundary_matrix(const GraphConfig& config, Complex lambda, double L) {
  require_spectral_preconditions(config, L, "build_boundary_matrix");
  const int N = config.N, m = config.m;
  EdgeBasis basis = EdgeBasis::from_lambda(lambda);

  std::array<Complex, 3> v0{}, d1_0{}, d2_0{}, vL{}, d1_L{}, d2_L{};
  for (int s = 0; s < 3; ++s) {
    v0[s] = basis.eval(s, 0, 0.0);
    d1_0[s] = basis.eval(s, 1, 0.0);
    d2_0[s] = basis.eval(s, 2, 0.0);
    vL[s] = basis.eval(s, 0, L);
    d1_L[s] = basis.eval(s, 1, L);
    d2_L[s] = basis.eval(s, 2, L);
  }

  MatrixXc M = MatrixXc::Zero(4 * N, 3 * N);
  auto col = [](int j, int s) { return 3 * j + s; };
  int r = 0;
  for (int j = 1; j < N; ++j, ++r)
    for (int s = 0; s < 3; ++s) {
      M(r, col(j, s)) += v0[s];
      M(r, col(0, s)) -= v0[s];
    }
  for (int j = 0; j < N; ++j)
    for (int s = 0; s < 3; ++s) M(r, col(j, s)) += d2_0[s];
  ++r;
  for (int j = 0; j < N; ++j, ++r)
    for (int s = 0; s < 3; ++s) M(r, col(j, s)) = vL[s];
  for (int j = 0; j < N; ++j, ++r)
    for (int s = 0; s < 3; ++s) M(r, col(j, s)) = d1_0[s];
  for (int j = 0; j < N; ++j, ++r) {
    const auto& row = (j < m) ? d1_L : d2_L;
    for (int s = 0; s < 3; ++s) M(r, col(j, s)) = row[s];
  }

  return SpectralMatrix{config, lambda, L, std::move(M), basis};
}

SpectralMatrix build_two_edge_weighted_matrix(const TwoEdgeWeights& weights, Complex lambda,
                                              double L) {
  if (!(weights.sigma_ne > 0) || !(weights.sigma_di > 0))
    throw std::invalid_argument("build_two_edge_weighted_matrix: weights must be positive");
  if (!(L > 0)) throw std::invalid_argument("build_two_edge_weighted_matrix: L must be positive");
  EdgeBasis basis = EdgeBasis::from_lambda(lambda);

  std::array<Complex, 3> v0{}, d1_0{}, d2_0{}, vL{}, d1_L{}, d2_L{};
  for (int s = 0; s < 3; ++s) {
    v0[s] = basis.eval(s, 0, 0.0);
    d1_0[s] = basis.eval(s, 1, 0.0);
    d2_0[s] = basis.eval(s, 2, 0.0);
    vL[s] = basis.eval(s, 0, L);
    d1_L[s] = basis.eval(s, 1, L);
    d2_L[s] = basis.eval(s, 2, L);
  }

  MatrixXc M = MatrixXc::Zero(8, 6);
  auto col = [](int j, int s) { return 3 * j + s; };
  int r = 0;
  for (int s = 0; s < 3; ++s) {
    M(r, col(1, s)) += v0[s];
    M(r, col(0, s)) -= v0[s];
  }
  ++r;
  for (int s = 0; s < 3; ++s) {
    M(r, col(0, s)) = weights.sigma_ne * d2_0[s];
    M(r, col(1, s)) = weights.sigma_di * d2_0[s];
  }
  ++r;
  for (int j = 0; j < 2; ++j, ++r)
    for (int s = 0; s < 3; ++s) M(r, col(j, s)) = vL[s];
  for (int j = 0; j < 2; ++j, ++r)
    for (int s = 0; s < 3; ++s) M(r, col(j, s)) = d1_0[s];
  for (int s = 0; s < 3; ++s) M(r, col(0, s)) = d1_L[s];
  ++r;
  for (int s = 0; s < 3; ++s) M(r, col(1, s)) = d2_L[s];

  GraphConfig cfg = GraphConfig::star(2, 1, L);
  return SpectralMatrix{cfg, lambda, L, std::move(M), basis};
}

double sigma_min(const MatrixXc& M) {
  Eigen::JacobiSVD<MatrixXc> svd(row_normalized(M));
  return svd.singularValues()(svd.singularValues().size() - 1);
}

std::pair<double, VectorXc> sigma_min_with_nullvector(const MatrixXc& M) {
  Eigen::JacobiSVD<MatrixXc> svd(row_normalized(M), Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const Eigen::Index last = sv.size() - 1;
  return {sv(last), svd.matrixV().col(last)};
}

SpectralSolution extract_solution(const SpectralMatrix& M) {
  auto [smin, d] = sigma_min_with_nullvector(M.entries);
  SpectralSolution sol;
  sol.lambda = M.lambda;
  sol.sigma_min = smin;
  sol.coefficients = d;
  const int N = M.config.N;
  sol.traces.resize(std::size_t(N));
  auto combo = [&](int j, int deriv, double x) {
    Complex v = 0;
    for (int s = 0; s < 3; ++s) v += d(3 * j + s) * M.basis.eval(s, deriv, x);
    return v;
  };
  const Complex kappa = combo(0, 0, 0.0);
  for (int j = 0; j < N; ++j) {
    sol.traces[std::size_t(j)].kappa = kappa;
    sol.traces[std::size_t(j)].beta = combo(j, 2, 0.0);
    sol.traces[std::size_t(j)].gamma = -combo(j, 2, M.L);
    sol.traces[std::size_t(j)].delta = -combo(j, 1, M.L);
  }
  return sol;
}

Eigen::Matrix<Complex, 4, 3> build_reduced_theta_matrix(ThetaKind kind, Complex a, Complex b,
                                                        Complex c) {
  if (std::abs(a + b + c) > 1e-10)
    throw std::invalid_argument("build_reduced_theta_matrix: triple must sum to zero");
  Eigen::Matrix<Complex, 4, 3> M;
  const Complex ea = std::exp(a), eb = std::exp(b), ec = std::exp(c);
  M(0, 0) = 1.0;
  M(0, 1) = 1.0;
  M(0, 2) = 1.0;
  M(1, 0) = a * ea;
  M(1, 1) = b * eb;
  M(1, 2) = c * ec;
  if (kind == ThetaKind::FullNeumann) {
    M(2, 0) = a;
    M(2, 1) = b;
    M(2, 2) = c;
  } else {
    M(2, 0) = a * a;
    M(2, 1) = b * b;
    M(2, 2) = c * c;
  }
  M(3, 0) = a * a * ea;
  M(3, 1) = b * b * eb;
  M(3, 2) = c * c * ec;
  return M;
}

Complex reduced_theta_pivot(ThetaKind kind, Complex a, Complex b, Complex c) {
  if (kind == ThetaKind::FullNeumann) return (c - a) * (c * std::exp(c) - b * std::exp(b));
  return (c - a) * (c * c * std::exp(c) - b * b * std::exp(b)) / c;
}

int matrix_rank(const MatrixXc& M, double rel_tol) {
  Eigen::JacobiSVD<MatrixXc> svd(row_normalized(M));
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > rel_tol * sv(0)) ++rank;
  return rank;
}

MatrixXc build_theta_boundary_matrix(ThetaKind kind, Complex lambda, double L) {
  EdgeBasis basis = EdgeBasis::from_lambda(lambda);
  MatrixXc M(4, 3);
  for (int s = 0; s < 3; ++s) {
    M(0, s) = basis.eval(s, 0, 0.0);                 // theta(0)
    M(1, s) = kind == ThetaKind::FullNeumann         // theta'(0) or theta''(0)
                  ? basis.eval(s, 1, 0.0)
                  : basis.eval(s, 2, 0.0);
    M(2, s) = basis.eval(s, 1, L);  // theta'(L)
    M(3, s) = basis.eval(s, 2, L);  // theta''(L)
  }
  return M;
}

SetPrediction governing_sets(const GraphConfig& config) {
  SetPrediction p;
  const int N = config.N, m = config.m;
  if (N == 2 && m == 1) {
    p.always_controllable = true;
  } else if (m == 0) {
    p.uses_nstar = p.uses_ndagger = true;
  } else if (m == N) {
    p.uses_rosier = p.uses_nstar = true;
  } else if (N >= 3 && m == 1) {
    p.uses_nstar = true;
  } else if (N >= 3 && m == N - 1) {
    p.uses_rosier = true;
  } else {  // N > 3 and 1 < m < N-1
    p.uses_rosier = p.uses_nstar = true;
  }
  return p;
}

ScanOutcome scan_criticality(const GraphConfig& config, double L, const ScanOptions& opts) {
  require_spectral_preconditions(config, L, "scan_criticality");
  const ScanRegion& reg = opts.region;
  if (!(reg.re_max >= reg.re_min) || !(reg.im_max >= reg.im_min))
    throw std::invalid_argument("scan_criticality: empty region");

  auto sigma_at = [&](double re, double im) {
    return sigma_min(build_boundary_matrix(config, Complex(re, im), L).entries);
  };

  ScanOutcome out;
  out.region = reg;
  out.min_sigma = std::numeric_limits<double>::infinity();
  long evals = 0;

  struct Candidate {
    double sigma;
    double re, im;
  };
  std::vector<Candidate> candidates;

  auto record = [&](double s, double re, double im) {
    if (s < out.min_sigma || (s == out.min_sigma && std::make_pair(re, im) <
                                                        std::make_pair(out.argmin.real(),
                                                                       out.argmin.imag()))) {
      out.min_sigma = s;
      out.argmin = Complex(re, im);
    }
  };

  auto refine_candidates = [&](std::vector<Candidate>& cands, double simplex_scale) {
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
      if (a.sigma != b.sigma) return a.sigma < b.sigma;
      return std::make_pair(a.re, a.im) < std::make_pair(b.re, b.im);
    });
    const int keep = std::min<int>(opts.refine_candidates, int(cands.size()));
    for (int i = 0; i < keep; ++i) {
      auto [fval, x] = NelderMead2D::run(
          [&](const Eigen::Vector2d& p) {
            ++evals;
            return sigma_at(p(0), p(1));
          },
          Eigen::Vector2d(cands[std::size_t(i)].re, cands[std::size_t(i)].im), simplex_scale,
          200);
      record(fval, x(0), x(1));
    }
  };

  // Pass 1: imaginary axis, when the region crosses it.
  if (reg.re_min <= 0.0 && reg.re_max >= 0.0) {
    const double step = 1.0 / opts.axis_density;
    const int count = int(std::floor((reg.im_max - reg.im_min) / step)) + 1;
    std::vector<double> sig(std::size_t(count));
    parallel_for(std::size_t(count), opts.jobs, [&](std::size_t i) {
      sig[i] = sigma_at(0.0, reg.im_min + double(i) * step);
    });
    evals += count;
    std::vector<Candidate> cands;
    for (int i = 0; i < count; ++i) {
      const double im = reg.im_min + i * step;
      record(sig[std::size_t(i)], 0.0, im);
      const bool left = i == 0 || sig[std::size_t(i)] <= sig[std::size_t(i - 1)];
      const bool right = i == count - 1 || sig[std::size_t(i)] <= sig[std::size_t(i + 1)];
      if (left && right) cands.push_back({sig[std::size_t(i)], 0.0, im});
    }
    refine_candidates(cands, 0.5 * step);
    if (out.min_sigma < opts.tol) {
      auto mat = build_boundary_matrix(config, out.argmin, L);
      out.kernel = extract_solution(mat);
      out.min_sigma = out.kernel->sigma_min;
      out.evaluations = evals;
      return out;
    }
  }

  // Pass 2: rectangle grid.
  {
    const double step = 1.0 / opts.grid_density;
    const int nre = int(std::floor((reg.re_max - reg.re_min) / step)) + 1;
    const int nim = int(std::floor((reg.im_max - reg.im_min) / step)) + 1;
    std::vector<double> sig(std::size_t(nre) * std::size_t(nim));
    parallel_for(sig.size(), opts.jobs, [&](std::size_t idx) {
      const int i = int(idx) / nim, j = int(idx) % nim;
      sig[idx] = sigma_at(reg.re_min + i * step, reg.im_min + j * step);
    });
    evals += long(sig.size());
    std::vector<Candidate> cands;
    auto at = [&](int i, int j) { return sig[std::size_t(i) * std::size_t(nim) + std::size_t(j)]; };
    for (int i = 0; i < nre; ++i)
      for (int j = 0; j < nim; ++j) {
        const double s = at(i, j);
        record(s, reg.re_min + i * step, reg.im_min + j * step);
        bool localmin = true;
        for (int di = -1; di <= 1 && localmin; ++di)
          for (int dj = -1; dj <= 1 && localmin; ++dj) {
            if (di == 0 && dj == 0) continue;
            const int ii = i + di, jj = j + dj;
            if (ii < 0 || jj < 0 || ii >= nre || jj >= nim) continue;
            if (at(ii, jj) < s) localmin = false;
          }
        if (localmin) cands.push_back({s, reg.re_min + i * step, reg.im_min + j * step});
      }
    refine_candidates(cands, 0.5 * step);
  }

  out.evaluations = evals;
  if (out.min_sigma < opts.tol) {
    auto mat = build_boundary_matrix(config, out.argmin, L);
    out.kernel = extract_solution(mat);
    out.min_sigma = out.kernel->sigma_min;
  }
  return out;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Critical: return "Critical";
    case Verdict::NonCritical: return "NonCritical";
    case Verdict::OutOfScope: return "OutOfScope";
  }
  return "?";
}

Classification classify_length(const GraphConfig& config, double L, const ClassifyOptions& opts) {
  Classification result;
  try {
    require_spectral_preconditions(config, L, "classify_length");
  } catch (const std::invalid_argument&) {
    result.verdict = Verdict::OutOfScope;
    return result;
  }

  // Independent set-membership prediction.
  const SetPrediction sets = governing_sets(config);
  MembershipPrediction pred;
  auto catalog_member = [&](const std::vector<CriticalWitness>* cat) -> std::optional<bool> {
    if (!cat) return std::nullopt;
    for (const auto& w : *cat)
      if (std::abs(w.L - L) <= opts.membership_tol * std::max(1.0, L)) return true;
    return false;
  };
  if (sets.uses_rosier) pred.rosier = rosier_membership(L, opts.membership_tol);
  if (sets.uses_nstar) pred.in_nstar = catalog_member(opts.nstar_catalog);
  if (sets.uses_ndagger) pred.in_ndagger = catalog_member(opts.ndagger_catalog);
  if (sets.always_controllable) {
    pred.predicted_critical = false;
  } else {
    bool any = false, unknown = false;
    if (sets.uses_rosier) any = any || pred.rosier.has_value();
    if (sets.uses_nstar) {
      if (pred.in_nstar.has_value())
        any = any || *pred.in_nstar;
      else
        unknown = true;
    }
    if (sets.uses_ndagger) {
      if (pred.in_ndagger.has_value())
        any = any || *pred.in_ndagger;
      else
        unknown = true;
    }
    if (any)
      pred.predicted_critical = true;
    else if (!unknown)
      pred.predicted_critical = false;
  }
  result.predicted = pred;

  ScanOptions scan = opts.scan;
  scan.tol = opts.tol;
  if (opts.use_default_region) {
    const double half = 20.0 * std::max(1.0, 1.0 / (L * L * L));
    scan.region = ScanRegion{-half, half, -half, half};
  }
  ScanOutcome outcome = scan_criticality(config, L, scan);
  result.min_sigma = outcome.min_sigma;
  result.argmin = outcome.argmin;
  result.scanned_region = outcome.region;
  if (outcome.kernel) {
    result.verdict = Verdict::Critical;
    result.witness = std::move(outcome.kernel);
  } else {
    result.verdict = Verdict::NonCritical;
  }
  return result;
}

}  // namespace kdvnet
