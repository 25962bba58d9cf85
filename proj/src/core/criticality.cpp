#include "core/criticality.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

#include "core/error.hpp"
#include "core/parallel.hpp"

namespace qcrit {

const char* to_string(PoleCondition c) {
  return c == PoleCondition::SameBranch ? "same-branch" : "cross-branch";
}

const char* to_string(LengthSource s) { return s == LengthSource::Pole ? "pole" : "tail-fit"; }

const PoleReport* PoleSearch::nearest() const {
  for (const auto& p : poles)
    if (!p.removable) return &p;
  return nullptr;
}

cplx pair_determinant(const DriftForcing& system, cplx phi) {
  return sylvester_operator(system.drift(-phi), system.drift(phi)).determinant();
}

namespace {

constexpr double kReShift = 0.0123;  // keeps the periodic cut away from φ = ±π

double wrap_re(double re) {
  double w = std::fmod(re + kPi, 2.0 * kPi);
  if (w < 0) w += 2.0 * kPi;
  return w - kPi;
}

struct ContourError {};

// Accumulated arg change of D along the segment a → b.
double segment_winding(const std::function<cplx(cplx)>& f, cplx a, cplx b, cplx fa, cplx fb,
                       int depth) {
  if (std::abs(fa) == 0.0 || std::abs(fb) == 0.0) throw ContourError{};
  const cplx m = 0.5 * (a + b);
  const cplx fm = f(m);
  if (std::abs(fm) == 0.0) throw ContourError{};
  const double d = std::arg(fb / fa);
  const double d1 = std::arg(fm / fa);
  const double d2 = std::arg(fb / fm);
  if (std::abs(d1) < 0.3 && std::abs(d2) < 0.3 && std::abs(d1 + d2 - d) < 1e-9) return d;
  if (depth > 48) throw ContourError{};
  return segment_winding(f, a, m, fa, fm, depth + 1) + segment_winding(f, m, b, fm, fb, depth + 1);
}

struct Rect {
  double re0, re1, im0, im1;
};

int winding_count(const std::function<cplx(cplx)>& f, const Rect& r) {
  const cplx c[4] = {{r.re0, r.im0}, {r.re1, r.im0}, {r.re1, r.im1}, {r.re0, r.im1}};
  cplx fc[4];
  for (int i = 0; i < 4; ++i) fc[i] = f(c[i]);
  double total = 0.0;
  for (int i = 0; i < 4; ++i) {
    const int j = (i + 1) % 4;
    // pre-split each edge so the recursion starts from a fine mesh
    constexpr int kPieces = 16;
    cplx prev = c[i], fprev = fc[i];
    for (int s = 1; s <= kPieces; ++s) {
      const cplx next = s == kPieces ? c[j] : c[i] + (c[j] - c[i]) * (double(s) / kPieces);
      const cplx fnext = s == kPieces ? fc[j] : f(next);
      total += segment_winding(f, prev, next, fprev, fnext, 0);
      prev = next;
      fprev = fnext;
    }
  }
  const double w = total / (2.0 * kPi);
  const double n = std::round(w);
  if (std::abs(w - n) > 0.05) throw ContourError{};
  return static_cast<int>(n);
}

cplx numeric_derivative(const std::function<cplx(cplx)>& f, cplx z, double h) {
  return (f(z + h) - f(z - h)) / (2.0 * h);
}

// Newton with known multiplicity; returns the best iterate.
cplx newton(const std::function<cplx(cplx)>& f, cplx z, int multiplicity, int iters = 60) {
  cplx best = z;
  double best_abs = std::abs(f(z));
  for (int i = 0; i < iters; ++i) {
    const cplx fz = f(z);
    const cplx d = numeric_derivative(f, z, 1e-6 * (1.0 + std::abs(z)));
    if (std::abs(d) == 0.0) break;
    const cplx step = double(multiplicity) * fz / d;
    z -= step;
    const double a = std::abs(f(z));
    if (a < best_abs) {
      best_abs = a;
      best = z;
    }
    if (std::abs(step) < 1e-15 * (1.0 + std::abs(z))) break;
  }
  return best;
}

struct BranchMatch {
  int a = 0, b = 0;  // indices into ordered β(φ) and β(−φ)
  double value = 0.0;
  double scale = 1.0;
};

BranchMatch match_branches(const DriftForcing& s, cplx phi) {
  const auto bp = drift_eigenvalues(s.drift, phi);
  const auto bm = drift_eigenvalues(s.drift, -phi);
  BranchMatch best;
  best.value = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const double v = std::abs(bp[a] + bm[b]);
      if (v < best.value) {
        best = {a, b, v, std::max(1.0, std::abs(bp[a]) + std::abs(bm[b]))};
      }
    }
  return best;
}

// Polishes on the single factor β_a(φ) + β_b(−φ), tracking eigenvalues by continuity.
cplx polish_factor(const DriftForcing& s, cplx phi) {
  const BranchMatch m = match_branches(s, phi);
  const cplx ref_p = drift_eigenvalues(s.drift, phi)[m.a];
  const cplx ref_m = drift_eigenvalues(s.drift, -phi)[m.b];
  auto nearest = [](const std::array<cplx, 2>& e, cplx ref) {
    return std::abs(e[0] - ref) <= std::abs(e[1] - ref) ? e[0] : e[1];
  };
  auto f = [&](cplx z) {
    return nearest(drift_eigenvalues(s.drift, z), ref_p) +
           nearest(drift_eigenvalues(s.drift, -z), ref_m);
  };
  return newton(f, phi, 1, 12);
}

struct ResidueTest {
  bool removable = false;
  double size = 0.0;
};

ResidueTest residue_test(const DriftForcing& s, cplx phi, double radius) {
  constexpr int kPoints = 64;
  Mat2 a1 = Mat2::Zero(), a2 = Mat2::Zero();
  double scale = 0.0;
  for (int k = 0; k < kPoints; ++k) {
    const cplx e = std::exp(kI * (2.0 * kPi * (k + 0.5) / kPoints));
    const cplx z = phi + radius * e;
    Mat2 g;
    try {
      g = solve_sylvester_at(s.drift(-z), s.drift(z), s.forcing(z), 1e15).value;
    } catch (const Error&) {
      return {false, std::numeric_limits<double>::infinity()};
    }
    a1 += g * (radius * e);
    a2 += g * (radius * radius * e * e);
    scale = std::max(scale, g.norm());
  }
  a1 /= double(kPoints);
  a2 /= double(kPoints);
  const double denom = std::max(scale * radius, 1e-300);
  const double size = std::max(a1.norm() / denom, a2.norm() / (denom * radius));
  return {size < 1e-6, size};
}

}  // namespace

int count_roots(const DriftForcing& system, double im_lo, double im_hi, double re_lo) {
  auto f = [&](cplx z) { return pair_determinant(system, z); };
  try {
    return winding_count(f, {re_lo, re_lo + 2.0 * kPi, im_lo, im_hi});
  } catch (const ContourError&) {
    throw Error(ErrorCode::InvalidArgument, "pole-condition root on the counting contour");
  }
}

PoleSearch find_poles(const DriftForcing& system, double im_cap) {
  if (!(im_cap > 0.0)) throw Error(ErrorCode::InvalidArgument, "im_cap must be positive");
  if (system.drift.is_zero())
    throw Error(ErrorCode::Singular, "drift symbol vanishes identically; every momentum is singular");
  auto f = [&](cplx z) { return pair_determinant(system, z); };
  {
    // D ≡ 0 (e.g. no dissipation): every momentum is a pole-condition root.
    double scale = 0.0, peak = 0.0;
    for (int k = 0; k < 16; ++k) {
      const cplx z{-kPi + 2.0 * kPi * (k + 0.37) / 16.0, im_cap * (0.61 - 0.077 * k)};
      const Mat2 a = system.drift(-z), b = system.drift(z);
      scale = std::max(scale, std::pow(a.norm() + b.norm(), 4));
      peak = std::max(peak, std::abs(f(z)));
    }
    if (peak <= 1e-13 * std::max(scale, 1e-300))
      throw Error(ErrorCode::Singular, "pair determinant vanishes identically; the steady state is not unique");
  }

  struct Found {
    cplx phi;
    int multiplicity;
  };
  std::vector<Found> found;

  std::function<void(const Rect&, int, int)> search = [&](const Rect& r, int count, int depth) {
    if (count <= 0) return;
    const double w = r.re1 - r.re0, h = r.im1 - r.im0;
    const double side = std::max(w, h);
    const cplx centre{0.5 * (r.re0 + r.re1), 0.5 * (r.im0 + r.im1)};
    if (count == 1 && side < 0.25) {
      const cplx z = newton(f, centre, 1);
      const double mw = 1e-9 + 0.05 * w, mh = 1e-9 + 0.05 * h;
      if (z.real() >= r.re0 - mw && z.real() <= r.re1 + mw && z.imag() >= r.im0 - mh &&
          z.imag() <= r.im1 + mh) {
        found.push_back({z, 1});
        return;
      }
    }
    if (side < 1e-7 || depth > 80) {
      found.push_back({newton(f, centre, count), count});
      return;
    }
    // split the longer side slightly off-centre; retry elsewhere if a root sits on the cut
    for (double frac : {0.5123, 0.4671, 0.5389, 0.4417}) {
      Rect a = r, b = r;
      if (w >= h) {
        a.re1 = b.re0 = r.re0 + frac * w;
      } else {
        a.im1 = b.im0 = r.im0 + frac * h;
      }
      try {
        const int ca = winding_count(f, a);
        const int cb = count - ca;
        search(a, ca, depth + 1);
        search(b, cb, depth + 1);
        return;
      } catch (const ContourError&) {
      }
    }
    found.push_back({newton(f, centre, count), count});
  };

  int total = 0;
  double cap = im_cap;
  Rect top{};
  for (int attempt = 0;; ++attempt) {
    top = {-kPi + kReShift, kPi + kReShift, -cap, cap};
    try {
      total = winding_count(f, top);
      break;
    } catch (const ContourError&) {
      if (attempt > 4) throw Error(ErrorCode::InvalidArgument, "cannot place counting contour");
      cap *= 1.0 + 1e-6;
    }
  }
  search(top, total, 0);

  PoleSearch out;
  out.im_cap = im_cap;
  for (const auto& fd : found) {
    cplx z = fd.phi;
    const cplx zp = polish_factor(system, z);
    if (match_branches(system, zp).value <= match_branches(system, z).value) z = zp;
    z = {wrap_re(z.real()), z.imag()};
    bool duplicate = false;
    for (const auto& p : out.poles) {
      const cplx d = p.phi_star - z;
      if (std::abs(d.imag()) < 1e-8 && std::abs(wrap_re(d.real())) < 1e-8) duplicate = true;
    }
    if (duplicate) continue;
    PoleReport p;
    const BranchMatch m = match_branches(system, z);
    p.residual = m.value / m.scale;
    if (m.a == m.b) {
      p.condition = PoleCondition::SameBranch;
      p.branch = m.a + 1;
    } else {
      p.condition = PoleCondition::CrossBranch;
      p.branch = 0;
    }
    // multiple roots are only located to ~1e-9 in Im; snap them when the real point is a root too
    if (std::abs(z.imag()) < 1e-10) z = {z.real(), 0.0};
    if (fd.multiplicity > 1 && std::abs(z.imag()) < 1e-7) {
      const BranchMatch on_axis = match_branches(system, cplx(z.real(), 0.0));
      if (on_axis.value <= 1e-7 * on_axis.scale) z = {z.real(), 0.0};
    }
    p.phi_star = z;
    p.im_abs = std::abs(z.imag());
    p.multiplicity = fd.multiplicity;
    p.on_real_axis = p.im_abs == 0.0;
    out.poles.push_back(p);
  }

  if (out.poles.empty()) {
    std::ostringstream msg;
    msg << "NoPoles: no pole-condition root with |Im phi| <= " << im_cap;
    throw Error(ErrorCode::NoPoles, msg.str());
  }

  for (auto& p : out.poles) {
    double gap = 1e-3;
    for (const auto& q : out.poles) {
      if (&q == &p) continue;
      const cplx d{wrap_re((q.phi_star - p.phi_star).real()), (q.phi_star - p.phi_star).imag()};
      gap = std::min(gap, 0.3 * std::abs(d));
    }
    const ResidueTest t = residue_test(system, p.phi_star, std::max(gap, 1e-7));
    p.removable = t.removable;
    p.residue = t.size;
  }

  std::sort(out.poles.begin(), out.poles.end(), [](const PoleReport& a, const PoleReport& b) {
    if (a.im_abs != b.im_abs) return a.im_abs < b.im_abs;
    if (a.phi_star.real() != b.phi_star.real()) return a.phi_star.real() < b.phi_star.real();
    return a.phi_star.imag() < b.phi_star.imag();
  });

  // Orbits {φ, −φ, φ̄, −φ̄} share im_abs; only distinct orbits can be ambiguous.
  auto orbit_key = [](const PoleReport& p) { return std::abs(wrap_re(p.phi_star.real())); };
  const PoleReport* near = out.nearest();
  if (near) {
    for (const auto& q : out.poles) {
      if (q.removable || &q == near) continue;
      if (std::abs(q.im_abs - near->im_abs) <= 1e-9 &&
          std::abs(orbit_key(q) - orbit_key(*near)) > 1e-7)
        out.ambiguous = true;
    }
    out.critical = near->on_real_axis;
  }
  return out;
}

TailFit fit_tail(const CovarianceField& field, int r_lo, int r_hi) {
  TailFit fit;
  r_lo = std::max(r_lo, 1);
  r_hi = std::min(r_hi, field.r_max);
  double peak = 1e-300;
  for (const auto& b : field.blocks) peak = std::max(peak, b.norm());
  const double floor = 1e-11 * peak;
  std::vector<std::pair<double, double>> pts;
  for (int r = 1; r <= field.r_max; ++r) {
    const double n = field.at(r).norm();
    if (n < floor) break;
    pts.emplace_back(double(r), std::log(n));
  }
  // Upper convex hull over the resolved range discards interference dips of
  // oscillating tails; the window then selects hull vertices.
  std::vector<std::pair<double, double>> hull;
  for (const auto& p : pts) {
    while (hull.size() >= 2) {
      const auto& a = hull[hull.size() - 2];
      const auto& b = hull.back();
      const double cross = (b.first - a.first) * (p.second - a.second) -
                           (b.second - a.second) * (p.first - a.first);
      if (cross > 1e-9 * (p.first - a.first)) hull.pop_back();
      else break;
    }
    hull.push_back(p);
  }
  std::vector<std::pair<double, double>> sel;
  for (const auto& h : hull)
    if (h.first >= r_lo && h.first <= r_hi) sel.push_back(h);
  if (sel.size() < 2) {
    // widen to the neighbouring vertices
    sel.clear();
    size_t i0 = hull.size(), i1 = 0;
    for (size_t i = 0; i < hull.size(); ++i)
      if (hull[i].first >= r_lo) {
        i0 = i == 0 ? 0 : i - 1;
        break;
      }
    for (size_t i = hull.size(); i-- > 0;)
      if (hull[i].first <= r_hi) {
        i1 = std::min(hull.size() - 1, i + 1);
        break;
      }
    for (size_t i = i0; i <= i1 && i < hull.size(); ++i) sel.push_back(hull[i]);
  }
  if (sel.size() < 2) return fit;
  const double n = double(sel.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : sel) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double icpt = (sy - slope * sx) / n;
  fit.available = true;
  fit.xi_inv = -slope;
  fit.amplitude = std::exp(icpt);
  fit.r_lo = static_cast<int>(sel.front().first);
  fit.r_hi = static_cast<int>(sel.back().first);
  fit.points = static_cast<int>(sel.size());
  return fit;
}

namespace {

int next_pow2(long v) {
  long p = 1;
  while (p < v) p <<= 1;
  return static_cast<int>(p);
}

}  // namespace

CorrelationLength correlation_length(const DriftForcing& system, const LengthOptions& options) {
  if (system.statistics == Statistics::Boson) {
    const auto scan = stability_scan(system, 1024);
    if (!scan.unstable_momenta.empty())
      throw Error(ErrorCode::Unstable, "Unstable: Re beta < 0 at " +
                                           std::to_string(scan.unstable_momenta.size()) +
                                           " of 1024 momenta");
  }
  CorrelationLength out;
  std::optional<double> xi_pole;
  try {
    out.search = find_poles(system, options.im_cap);
    if (const PoleReport* p = out.search->nearest()) {
      out.pole = *p;
      xi_pole = p->im_abs;
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoPoles) throw;
  }

  if (xi_pole && *xi_pole == 0.0) {
    out.xi_inv = 0.0;
    out.source = LengthSource::Pole;
    return out;
  }
  const double xi_est = xi_pole ? 1.0 / *xi_pole : 1.0 / options.im_cap;
  out.r_max = options.r_max > 0 ? options.r_max
                                : std::clamp(static_cast<int>(std::ceil(8.0 * xi_est)) + 16, 32, 4096);
  out.grid = options.grid > 0
                 ? options.grid
                 : next_pow2(std::max<long>({256L, 8L * out.r_max, static_cast<long>(std::ceil(64.0 * xi_est))}));

  if (options.tail_fit || !xi_pole) {
    const auto sym = covariance_symbol(system, out.grid, options.jobs);
    const auto field = correlations(sym, out.r_max);
    const int r1 = std::max(5, static_cast<int>(std::ceil(2.0 * xi_est)));
    int r2 = std::min(out.r_max, static_cast<int>(std::floor(6.0 * xi_est)));
    r2 = std::max(r2, std::min(out.r_max, r1 + 6));
    out.tail = fit_tail(field, r1, r2);
  }
  if (xi_pole) {
    out.xi_inv = *xi_pole;
    out.source = LengthSource::Pole;
    if (out.tail.available) out.agreement = std::abs(out.tail.xi_inv - *xi_pole) / *xi_pole;
  } else {
    if (!out.tail.available)
      throw Error(ErrorCode::NoPoles, "NoPoles: no pole within the strip and no resolvable tail");
    out.xi_inv = out.tail.xi_inv;
    out.source = LengthSource::TailFit;
  }
  return out;
}

CorrelationLength correlation_length(const NumericModel& model, const LengthOptions& options) {
  return correlation_length(drift_and_forcing(model), options);
}

ModelSpec with_param(ModelSpec spec, const std::string& param, double value) {
  auto it = spec.params.find(param);
  if (it == spec.params.end())
    throw Error(ErrorCode::InvalidArgument, "model has no parameter '" + param + "'");
  it->second = value;
  return spec;
}

SweepFit exponent_fit(const std::vector<SweepSample>& samples, double g_c_hint,
                      std::optional<double> reference_lambda) {
  if (samples.size() < 10)
    throw Error(ErrorCode::InvalidArgument, "exponent fit needs at least 10 sweep points");
  const bool above = samples.front().g > g_c_hint;
  for (const auto& s : samples) {
    if ((s.g > g_c_hint) != above || s.g == g_c_hint)
      throw Error(ErrorCode::InvalidArgument, "sweep points must lie on one side of the g_c hint");
    if (!(s.xi_inv > 0.0) || !std::isfinite(s.xi_inv))
      throw Error(ErrorCode::FitDegenerate, "FitDegenerate: non-positive inverse correlation length");
  }
  std::vector<SweepSample> sorted = samples;
  std::sort(sorted.begin(), sorted.end(), [&](const SweepSample& a, const SweepSample& b) {
    return std::abs(a.g - g_c_hint) < std::abs(b.g - g_c_hint);
  });
  double lo = sorted.front().xi_inv, hi = lo;
  for (size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].xi_inv < sorted[i - 1].xi_inv * (1.0 - 1e-9))
      throw Error(ErrorCode::FitDegenerate,
                  "FitDegenerate: xi^-1 is not monotone toward g_c (at g = " + std::to_string(sorted[i].g) + ")");
    lo = std::min(lo, sorted[i].xi_inv);
    hi = std::max(hi, sorted[i].xi_inv);
  }
  if (hi < 2.0 * lo)
    throw Error(ErrorCode::FitDegenerate,
                "FitDegenerate: xi^-1 varies by less than a factor 2; no divergence toward g_c");

  struct Line {
    double slope, icpt, rms;
  };
  auto fit_at = [&](double gc) {
    const double n = double(samples.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& s : samples) {
      const double x = std::log(std::abs(s.g - gc)), y = std::log(s.xi_inv);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    Line l;
    l.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    l.icpt = (sy - l.slope * sx) / n;
    double ss = 0;
    for (const auto& s : samples) {
      const double e = l.icpt + l.slope * std::log(std::abs(s.g - gc)) - std::log(s.xi_inv);
      ss += e * e;
    }
    l.rms = std::sqrt(ss / n);
    return l;
  };

  const double delta = 0.5 * std::abs(sorted.front().g - g_c_hint);
  constexpr int kCandidates = 201;
  double best_gc = g_c_hint;
  Line best = fit_at(g_c_hint);
  for (int k = 0; k < kCandidates; ++k) {
    const double gc = g_c_hint - delta + 2.0 * delta * k / (kCandidates - 1);
    const Line l = fit_at(gc);
    if (l.rms < best.rms) {
      best = l;
      best_gc = gc;
    }
  }
  SweepFit out;
  out.samples = samples;
  out.g_c = best_gc;
  out.lambda = best.slope;
  out.Lambda = std::exp(best.icpt);
  out.residual = best.rms;
  out.window_lo = std::numeric_limits<double>::infinity();
  out.window_hi = 0.0;
  for (const auto& s : samples) {
    out.window_lo = std::min(out.window_lo, std::abs(s.g - best_gc));
    out.window_hi = std::max(out.window_hi, std::abs(s.g - best_gc));
  }
  out.reference_lambda = reference_lambda;
  if (reference_lambda) out.reference_discrepant = std::abs(out.lambda - *reference_lambda) > 0.05;
  return out;
}

std::vector<SweepSample> sweep_correlation_length(const ModelSpec& spec, const std::string& param,
                                                  const std::vector<double>& grid,
                                                  const LengthOptions& options) {
  std::vector<SweepSample> out(grid.size());
  LengthOptions inner = options;
  inner.tail_fit = false;
  inner.jobs = 1;
  parallel_for(grid.size(), options.jobs, [&](size_t i) {
    const auto model = evaluate_validated(with_param(spec, param, grid[i]));
    out[i] = {grid[i], correlation_length(model, inner).xi_inv};
  });
  return out;
}

double min_drift_rate(const DriftForcing& system, int n) {
  auto rate = [&](double phi) { return drift_eigenvalues(system.drift, phi)[0].real(); };
  const auto grid = momentum_grid(n);
  size_t best = 0;
  double best_v = std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < grid.size(); ++k) {
    const double v = rate(grid[k]);
    if (v < best_v) {
      best_v = v;
      best = k;
    }
  }
  // golden-section refinement on the two neighbouring cells
  const double h = 2.0 * kPi / n;
  double a = grid[best] - h, b = grid[best] + h;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = rate(c), fd = rate(d);
  for (int i = 0; i < 80; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = rate(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = rate(d);
    }
  }
  return std::min({best_v, fc, fd});
}

bool SlowingDownReport::bounded_below() const {
  return std::isfinite(inf_ratio) && inf_ratio > 0.0;
}

SlowingDownReport slowing_down_check(const ModelSpec& spec, const std::string& param,
                                     const std::vector<double>& grid, const LengthOptions& options) {
  SlowingDownReport out;
  out.points.resize(grid.size());
  LengthOptions inner = options;
  inner.tail_fit = false;
  inner.jobs = 1;
  parallel_for(grid.size(), options.jobs, [&](size_t i) {
    const auto system = drift_and_forcing(evaluate_validated(with_param(spec, param, grid[i])));
    const double rate = min_drift_rate(system);
    if (system.statistics == Statistics::Boson && rate < -1e-12)
      throw Error(ErrorCode::Unstable, "Unstable: min Re beta = " + std::to_string(rate) +
                                           " at g = " + std::to_string(grid[i]));
    const double xi_inv = correlation_length(system, inner).xi_inv;
    SlowingDownPoint p;
    p.g = grid[i];
    p.tau = rate > 0 ? 1.0 / rate : std::numeric_limits<double>::infinity();
    p.xi = xi_inv > 0 ? 1.0 / xi_inv : std::numeric_limits<double>::infinity();
    p.ratio = p.tau / p.xi;
    out.points[i] = p;
  });
  out.inf_ratio = std::numeric_limits<double>::infinity();
  out.sup_ratio = 0.0;
  for (const auto& p : out.points) {
    if (!std::isfinite(p.ratio)) continue;
    out.inf_ratio = std::min(out.inf_ratio, p.ratio);
    out.sup_ratio = std::max(out.sup_ratio, p.ratio);
  }
  return out;
}

Mat2 symbol_at_real_pole(const DriftForcing& system, double phi) {
  return min_norm_sylvester(system.drift(-phi), system.drift(phi), system.forcing(phi));
}

}  // namespace qcrit
