#include "kdvnet/critical_sets.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "kdvnet/parallel.hpp"

namespace kdvnet {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

double rosier_value(int k, int l) { return double(k) * k + double(k) * l + double(l) * l; }

/// Associated eigenvalue of the (m = N-1)-type spectral problem at the
/// Rosier length indexed by (k, l): the roots are i*t_s/L with
/// t_1 = 2pi(2k+l)/3, t_2 = 2pi(l-k)/3, t_3 = -2pi(k+2l)/3.
Complex rosier_lambda(int k, int l, double L) {
  const double t1 = 2.0 * kPi * (2.0 * k + l) / 3.0;
  const double t2 = 2.0 * kPi * (double(l) - k) / 3.0;
  const double t3 = -2.0 * kPi * (k + 2.0 * l) / 3.0;
  return Complex(0.0, t1 * t2 * t3 / (L * L * L));
}

std::array<Complex, 3> sorted_triple(Complex a, Complex b, Complex c) {
  std::array<Complex, 3> t{a, b, c};
  std::sort(t.begin(), t.end(), [](Complex x, Complex y) {
    if (x.real() != y.real()) return x.real() < y.real();
    return x.imag() < y.imag();
  });
  return t;
}

bool triple_less(const std::array<Complex, 3>& x, const std::array<Complex, 3>& y) {
  for (int i = 0; i < 3; ++i) {
    if (x[i].real() != y[i].real()) return x[i].real() < y[i].real();
    if (x[i].imag() != y[i].imag()) return x[i].imag() < y[i].imag();
  }
  return false;
}

}  // namespace

std::string to_string(SetTag tag) {
  switch (tag) {
    case SetTag::NRosier: return "rosier";
    case SetTag::RBeta: return "rbeta";
    case SetTag::NStar: return "nstar";
    case SetTag::NDagger: return "ndagger";
  }
  return "?";
}

std::optional<SetTag> set_tag_from_string(const std::string& s) {
  if (s == "rosier") return SetTag::NRosier;
  if (s == "rbeta") return SetTag::RBeta;
  if (s == "nstar") return SetTag::NStar;
  if (s == "ndagger") return SetTag::NDagger;
  return std::nullopt;
}

std::string to_string(DaggerCase c) {
  switch (c) {
    case DaggerCase::SignsNegative: return "signs-negative";
    case DaggerCase::MixedSigns: return "mixed-signs";
    case DaggerCase::AllPositive: return "all-positive";
  }
  return "?";
}

Complex transcendental_g(TranscendentalKind kind, Complex z) {
  return kind == TranscendentalKind::NStar ? z * std::exp(z) : z * z * std::exp(z);
}

double transcendental_residual(TranscendentalKind kind, Complex a, Complex b) {
  const Complex c = -(a + b);
  const Complex ga = transcendental_g(kind, a);
  const Complex gb = transcendental_g(kind, b);
  const Complex gc = transcendental_g(kind, c);
  return std::abs(ga - gb) + std::abs(gb - gc);
}

std::vector<CriticalWitness> enumerate_rosier(double L_max) {
  if (!(L_max > 0)) throw std::invalid_argument("enumerate_rosier: L_max must be positive");
  const double v_max = 3.0 * L_max * L_max / (4.0 * kPi * kPi);
  std::map<long long, IntegerWitness> values;
  for (int k = 1; 3.0 * k * k <= v_max; ++k) {
    for (int l = k; rosier_value(k, l) <= v_max; ++l) {
      const long long v = 1LL * k * k + 1LL * k * l + 1LL * l * l;
      values.try_emplace(v, IntegerWitness{k, l});
    }
  }
  std::vector<CriticalWitness> out;
  for (const auto& [v, kl] : values) {
    CriticalWitness w;
    w.set = SetTag::NRosier;
    w.L = 2.0 * kPi / std::sqrt(3.0) * std::sqrt(double(v));
    w.rosier_pair = kl;
    w.lambda = rosier_lambda(kl.k, kl.l, w.L);
    out.push_back(w);
  }
  return out;  // ascending: map is keyed by v and L is monotone in v
}

std::vector<CriticalWitness> enumerate_r_beta(double beta, double L_max) {
  if (!(beta > -1.0))
    throw std::domain_error(
        "enumerate_r_beta: beta <= -1 lies outside the enumerable regime "
        "(beta = -1 makes every L > 0 critical; beta < -1 gives no real lengths)");
  if (!(L_max > 0)) throw std::invalid_argument("enumerate_r_beta: L_max must be positive");

  std::vector<CriticalWitness> out;
  const double root_factor = 2.0 * kPi / std::sqrt(3.0 * (1.0 + beta));
  const double v_max = L_max * L_max / (root_factor * root_factor);
  std::map<long long, IntegerWitness> values;
  for (int k = 1; 3.0 * k * k <= v_max; ++k)
    for (int l = k; rosier_value(k, l) <= v_max; ++l)
      values.try_emplace(1LL * k * k + 1LL * k * l + 1LL * l * l, IntegerWitness{k, l});
  for (const auto& [v, kl] : values) {
    CriticalWitness w;
    w.set = SetTag::RBeta;
    w.beta = beta;
    w.L = root_factor * std::sqrt(double(v));
    w.rosier_pair = kl;
    out.push_back(w);
  }
  const double harm = kPi / std::sqrt(beta + 1.0);
  for (int k = 1; k * harm <= L_max; ++k) {
    CriticalWitness w;
    w.set = SetTag::RBeta;
    w.beta = beta;
    w.L = k * harm;
    w.harmonic_k = k;
    out.push_back(w);
  }
  std::sort(out.begin(), out.end(),
            [](const CriticalWitness& x, const CriticalWitness& y) { return x.L < y.L; });
  // merge records whose lengths coincide across branches
  std::vector<CriticalWitness> merged;
  for (const auto& w : out) {
    if (!merged.empty() && std::abs(merged.back().L - w.L) <= 1e-12 * std::max(1.0, w.L)) {
      if (w.rosier_pair && !merged.back().rosier_pair) merged.back().rosier_pair = w.rosier_pair;
      if (w.harmonic_k && !merged.back().harmonic_k) merged.back().harmonic_k = w.harmonic_k;
      continue;
    }
    merged.push_back(w);
  }
  return merged;
}

std::optional<IntegerWitness> rosier_membership(double L, double tol) {
  if (!(L > 0)) throw std::invalid_argument("rosier_membership: L must be positive");
  const double target = 3.0 * L * L / (4.0 * kPi * kPi);
  const int k_max = int(std::ceil(std::sqrt(target))) + 1;
  std::optional<IntegerWitness> best;
  double best_dev = tol * std::max(1.0, target);
  for (int k = 1; k <= k_max; ++k) {
    for (int l = k; l <= k_max; ++l) {
      const double dev = std::abs(target - rosier_value(k, l));
      if (dev <= best_dev) {
        best_dev = dev;
        best = IntegerWitness{k, l};
      }
    }
  }
  return best;
}

std::pair<Complex, Complex> canonical_pair(Complex a, Complex b) {
  auto t = sorted_triple(a, b, -(a + b));
  std::array<Complex, 3> conj{std::conj(t[0]), std::conj(t[1]), std::conj(t[2])};
  std::sort(conj.begin(), conj.end(), [](Complex x, Complex y) {
    if (x.real() != y.real()) return x.real() < y.real();
    return x.imag() < y.imag();
  });
  // The conjugate triple solves the same symmetric system; keep the
  // lexicographically smaller representative so runs are deterministic.
  // Both members of the pair stay witnesses of the same L.
  const auto& chosen = triple_less(conj, t) ? conj : t;
  return {chosen[0], chosen[1]};
}

std::optional<CriticalWitness> newton_transcendental(TranscendentalKind kind, Complex seed_a,
                                                     Complex seed_b, const NewtonOptions& opts) {
  if (!finite(seed_a) || !finite(seed_b))
    throw std::invalid_argument("newton_transcendental: non-finite seed");
  if (!(opts.tol > 0)) throw std::invalid_argument("newton_transcendental: tol must be positive");

  auto g = [&](Complex z) { return transcendental_g(kind, z); };
  auto dg = [&](Complex z) {
    return kind == TranscendentalKind::NStar ? (1.0 + z) * std::exp(z)
                                             : z * (2.0 + z) * std::exp(z);
  };

  Complex a = seed_a, b = seed_b;
  auto F = [&](Complex x, Complex y, Complex& f1, Complex& f2) {
    const Complex c = -(x + y);
    const Complex gc = g(c);
    f1 = g(x) - gc;
    f2 = g(y) - gc;
  };

  Complex f1, f2;
  F(a, b, f1, f2);
  double nf = std::abs(f1) + std::abs(f2);
  if (!std::isfinite(nf)) return std::nullopt;

  for (int it = 0; it < opts.max_iter && nf >= opts.tol; ++it) {
    const Complex c = -(a + b);
    const Complex dgc = dg(c);
    const Complex j11 = dg(a) + dgc, j12 = dgc;
    const Complex j21 = dgc, j22 = dg(b) + dgc;
    const Complex det = j11 * j22 - j12 * j21;
    if (!finite(det) || std::abs(det) < 1e-300) return std::nullopt;
    const Complex da = (f1 * j22 - f2 * j12) / det;
    const Complex db = (j11 * f2 - j21 * f1) / det;

    // backtracking line search on |F|
    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 20; ++ls, t *= 0.5) {
      const Complex an = a - t * da, bn = b - t * db;
      Complex g1, g2;
      F(an, bn, g1, g2);
      const double nn = std::abs(g1) + std::abs(g2);
      if (std::isfinite(nn) && nn < nf) {
        a = an;
        b = bn;
        f1 = g1;
        f2 = g2;
        nf = nn;
        accepted = true;
        break;
      }
    }
    if (!accepted) return std::nullopt;
  }
  if (!(nf < opts.tol)) return std::nullopt;

  const Complex c = -(a + b);
  const Complex L2 = -(a * a + a * b + b * b);
  if (std::abs(L2.imag()) >= 1e-8) return std::nullopt;
  if (L2.real() <= 1e-6) return std::nullopt;
  if (std::max({std::abs(a), std::abs(b), std::abs(c)}) < 1e-6) return std::nullopt;

  CriticalWitness w;
  w.set = kind == TranscendentalKind::NStar ? SetTag::NStar : SetTag::NDagger;
  std::tie(w.a, w.b) = canonical_pair(a, b);
  w.L = std::sqrt(L2.real());
  w.residual = transcendental_residual(kind, w.a, w.b);
  w.L_squared_imag = std::abs(L2.imag());
  // The boundary problems built from the flipped triple -(a,b,c)/L are the
  // singular ones, so the associated eigenvalue is +abc/L^3.
  w.lambda = (w.a * w.b * w.c()) / (w.L * w.L * w.L);
  return w;
}

std::vector<CriticalWitness> enumerate_transcendental(TranscendentalKind kind,
                                                      const EnumerateOptions& opts) {
  if (!(opts.grid_density >= 4))
    throw std::invalid_argument("enumerate_transcendental: grid density must be >= 4 per unit");
  const SearchBox& box = opts.box;
  if (!(box.re_max >= box.re_min) || !(box.im_max >= box.im_min))
    throw std::invalid_argument("enumerate_transcendental: empty box");

  std::vector<std::pair<Complex, Complex>> seeds;
  const double step = 1.0 / opts.grid_density;
  // dense purely imaginary diagonal (iy1, iy2)
  for (double y1 = box.im_min; y1 <= box.im_max + 1e-12; y1 += step)
    for (double y2 = box.im_min; y2 <= box.im_max + 1e-12; y2 += step)
      seeds.emplace_back(Complex(0.0, y1), Complex(0.0, y2));
  // coarse sprinkle with nonzero real parts
  const double re_step = 3.0, im_step = 2.0;
  for (double x1 = box.re_min; x1 <= box.re_max + 1e-12; x1 += re_step)
    for (double x2 = box.re_min; x2 <= box.re_max + 1e-12; x2 += re_step) {
      if (x1 == 0.0 && x2 == 0.0) continue;
      for (double y1 = box.im_min; y1 <= box.im_max + 1e-12; y1 += im_step)
        for (double y2 = box.im_min; y2 <= box.im_max + 1e-12; y2 += im_step)
          seeds.emplace_back(Complex(x1, y1), Complex(x2, y2));
    }

  std::vector<std::optional<CriticalWitness>> hits(seeds.size());
  parallel_for(seeds.size(), opts.jobs, [&](std::size_t i) {
    hits[i] = newton_transcendental(kind, seeds[i].first, seeds[i].second);
  });

  std::vector<CriticalWitness> found;
  for (auto& h : hits)
    if (h && h->L <= opts.L_max) found.push_back(*h);
  std::sort(found.begin(), found.end(), [](const CriticalWitness& x, const CriticalWitness& y) {
    if (x.L != y.L) return x.L < y.L;
    return triple_less(sorted_triple(x.a, x.b, x.c()), sorted_triple(y.a, y.b, y.c()));
  });
  std::vector<CriticalWitness> out;
  for (const auto& w : found) {
    bool dup = false;
    for (const auto& kept : out) {
      if (std::abs(kept.L - w.L) < 1e-6) {
        dup = true;
        break;
      }
      const auto t1 = sorted_triple(kept.a, kept.b, kept.c());
      const auto t2 = sorted_triple(w.a, w.b, w.c());
      if (std::abs(t1[0] - t2[0]) < 1e-6 && std::abs(t1[1] - t2[1]) < 1e-6 &&
          std::abs(t1[2] - t2[2]) < 1e-6) {
        dup = true;
        break;
      }
    }
    if (!dup) out.push_back(w);
  }
  return out;
}

DaggerCase dagger_case_decomposition(const CriticalWitness& witness, double tol) {
  if (!(witness.residual < 1e-8))
    throw std::invalid_argument("dagger_case_decomposition: witness residual too large");
  const Complex z1 = witness.a / 2.0, z2 = witness.b / 2.0;
  const Complex g1 = z1 * std::exp(z1);
  const Complex g2 = z2 * std::exp(z2);
  const Complex S = (z1 + z2) * std::exp(-(z1 + z2));

  const double scale = std::max({std::abs(g1), std::abs(g2), std::abs(S), 1.0});
  const double r_neg = std::abs(g1 - g2) + std::abs(g2 + S);
  const double r_mix =
      std::min(std::abs(g1 + g2) + std::abs(g1 - S), std::abs(g1 + g2) + std::abs(g2 - S));
  const double r_pos = std::abs(g1 - g2) + std::abs(g2 - S);

  const double best = std::min({r_neg, r_mix, r_pos});
  if (best >= tol * scale)
    throw ClassificationError("dagger_case_decomposition: no sign case matches witness");
  if (best == r_neg) return DaggerCase::SignsNegative;
  if (best == r_mix) return DaggerCase::MixedSigns;
  return DaggerCase::AllPositive;
}

}  // namespace kdvnet
