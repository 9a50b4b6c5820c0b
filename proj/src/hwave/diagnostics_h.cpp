#include "hwave/diagnostics_h.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "hwave/errors.hpp"

namespace hwave {
namespace {

cplx expi(double a) { return {std::cos(a), std::sin(a)}; }

// Columns per sheet evaluation; bounds sheet memory for small mu.
constexpr std::size_t kChunkCols = 2048;

struct SWindow {
  int lo = 0, hi = 0;
  bool tight = false;
  int half() const { return std::max(std::abs(lo), std::abs(hi)); }
};

// Centred s window: s_range scaled by the effective kernel rate, one block of
// margin plus the shift.
SWindow centred_window(const TruncationPolicy& pol, double rate, double shift) {
  int S = s_window(pol, rate) + 1 + static_cast<int>(std::ceil(shift - 1e-12));
  return {-S, S, false};
}

// Union over pairs of the xi' intervals where a1 xi' + l1 and a2 xi' + l2 both
// fall inside the kernel box.
SWindow box_window(const KernelBox& box, double a1, double a2,
                   const std::vector<std::pair<int, int>>& l_pairs) {
  double lo = 1e300, hi = -1e300, any_lo = 1e300;
  for (auto [l1, l2] : l_pairs) {
    double p = std::max((box.xi0 - l1) / a1, (box.xi0 - l2) / a2);
    double q = std::min((box.xi1 - l1) / a1, (box.xi1 - l2) / a2);
    any_lo = std::min(any_lo, p);
    if (q > p) {
      lo = std::min(lo, p);
      hi = std::max(hi, q);
    }
  }
  SWindow w;
  w.tight = true;
  if (hi < lo) {
    w.lo = w.hi = static_cast<int>(std::floor(any_lo + 1e-12));
    return w;
  }
  w.lo = static_cast<int>(std::floor(lo + 1e-12));
  w.hi = std::max(w.lo, static_cast<int>(std::ceil(hi - 1e-12)) - 1);
  return w;
}

void require_integer_lattice(const Grid1D& g, const char* what) {
  const double per = 1.0 / g.step, off = g.start / g.step;
  if (std::abs(per - std::nearbyint(per)) > 1e-9 || std::abs(off - std::nearbyint(off)) > 1e-6)
    throw ConfigError(std::string(what) + ": y-grid step must divide 1 and the grid must contain 0");
}

std::vector<int> r_values(const LambdaGrid& lg, const std::optional<SupportHint>& hint) {
  std::vector<int> rs;
  int range = hint ? 0 : lg.r_range;
  for (int r = -range; r <= range; ++r) rs.push_back(r);
  return rs;
}

// Per-term accumulation for one curve at one (cell, r).
struct TermAcc {
  CompensatedSum total;
  double abs_total = 0.0;
  double abs_edge = 0.0;

  void add(cplx v, bool edge) {
    total += v;
    abs_total += std::abs(v);
    if (edge) abs_edge += std::abs(v);
  }
};

// Edge and total absolute mass of the s (or m) window, summed over r, per
// (curve, cell). The window is converged when the edge blocks carry at most
// eps of the mass.
struct RingTally {
  std::vector<std::vector<double>> edge, total;
  RingTally(std::size_t curves, int cells)
      : edge(curves, std::vector<double>(static_cast<std::size_t>(cells))),
        total(curves, std::vector<double>(static_cast<std::size_t>(cells))) {}
  void add(std::size_t c, std::size_t i, const TermAcc& a, const SWindow& w, double weight) {
    if (w.tight) return;
    edge[c][i] += a.abs_edge * weight;
    total[c][i] += a.abs_total * weight;
  }
  bool ok(std::size_t c, std::size_t i, double eps) const { return !(edge[c][i] > eps * total[c][i]); }
};

// Folds per-(curve, r, cell) values into curves through periodize_sum over r.
void fold_r(std::vector<DiagnosticCurve>& curves, const std::vector<int>& rs,
            const std::vector<std::vector<std::vector<cplx>>>& vals, const RingTally& ring, double eps) {
  const int range = rs.back();
  for (std::size_t c = 0; c < curves.size(); ++c) {
    auto& cv = curves[c];
    cv.values.assign(static_cast<std::size_t>(cv.cells), cplx{});
    cv.outer_range = range;
    for (int i = 0; i < cv.cells; ++i) {
      const auto iu = static_cast<std::size_t>(i);
      auto s = periodize_sum(
          [&](int r) { return vals[c][static_cast<std::size_t>(r + range)][iu]; }, range, eps);
      cv.values[iu] = s.value;
      if (!s.converged || !ring.ok(c, iu, eps)) cv.converged = false;
    }
  }
}

}  // namespace

std::string DiagnosticCurve::label() const {
  std::string s = name + "(";
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (i) s += ",";
    s += indices[i].first + "=" + std::to_string(indices[i].second);
  }
  return s + ")";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::unconverged: return "unconverged";
  }
  return "fail";
}

ConditionReport condition_report(const std::string& id, const std::vector<DiagnosticCurve>& curves,
                                 cplx target, double tol, double floor) {
  ConditionReport rep;
  rep.id = id;
  rep.tol = tol;
  double sum = 0.0;
  bool converged = true;
  for (const auto& c : curves) {
    double cmax = 0.0;
    for (int i = 0; i < c.cells; ++i) {
      if (c.point(i) < floor) continue;
      double dev = std::abs(c.values[static_cast<std::size_t>(i)] - target);
      if (!std::isfinite(dev)) throw NumericalError("condition_report: non-finite deviation in " + c.label());
      cmax = std::max(cmax, dev);
      sum += dev;
      ++rep.points;
    }
    rep.max_dev = std::max(rep.max_dev, cmax);
    rep.details.emplace_back(c.label(), cmax);
    converged = converged && c.converged;
  }
  rep.mean_dev = rep.points ? sum / rep.points : 0.0;
  if (!(rep.max_dev < tol))
    rep.verdict = Verdict::fail;
  else
    rep.verdict = converged ? Verdict::pass : Verdict::unconverged;
  return rep;
}

bool all_pass(const std::vector<ConditionReport>& reports) {
  return std::all_of(reports.begin(), reports.end(),
                     [](const ConditionReport& r) { return r.verdict == Verdict::pass; });
}

std::optional<SupportHint> support_from(const SignalMeta& meta) {
  if (!meta.kernel_box) return std::nullopt;
  return SupportHint{*meta.kernel_box};
}

DiagnosticCurve compute_G(const Field3D& psi, int k, int l, const LambdaGrid& lgrid,
                          const TruncationPolicy& pol, const std::optional<SupportHint>& hint) {
  return compute_G(psi, std::vector<KL>{{k, l}}, lgrid, pol, hint).front();
}

std::vector<DiagnosticCurve> compute_G(const Field3D& psi, const std::vector<KL>& pairs,
                                       const LambdaGrid& lgrid, const TruncationPolicy& pol,
                                       const std::optional<SupportHint>& hint) {
  lgrid.validate();
  pol.validate();
  require_finite(psi.data, "compute_G");
  if (pairs.empty()) return {};
  const int cells = lgrid.cells;
  const double dxi = 1.0 / cells;
  const double hy = psi.gy.step;

  std::vector<int> ls;
  for (const auto& p : pairs)
    if (std::find(ls.begin(), ls.end(), p.l) == ls.end()) ls.push_back(p.l);
  std::vector<std::ptrdiff_t> row_shift;
  for (int l : ls) {
    double q = l / hy;
    if (std::abs(q - std::nearbyint(q)) > 1e-9) throw ConfigError("compute_G: l must be a multiple of the y-step");
    row_shift.push_back(static_cast<std::ptrdiff_t>(std::nearbyint(q)));
  }
  const int lmin = std::min(0, *std::min_element(ls.begin(), ls.end()));
  const int lmax = std::max(0, *std::max_element(ls.begin(), ls.end()));
  int lext = 0;
  for (int l : ls) lext = std::max(lext, std::abs(l));

  std::vector<DiagnosticCurve> curves(pairs.size());
  for (std::size_t c = 0; c < pairs.size(); ++c) {
    curves[c].name = "G";
    curves[c].cells = cells;
    curves[c].indices = {{"k", pairs[c].k}, {"l", pairs[c].l}};
  }
  const std::vector<int> rs = r_values(lgrid, hint);
  std::vector<std::vector<std::vector<cplx>>> vals(
      pairs.size(), std::vector<std::vector<cplx>>(rs.size(), std::vector<cplx>(static_cast<std::size_t>(cells))));
  RingTally ring(pairs.size(), cells);
  std::vector<std::pair<int, int>> l_pairs;
  for (int l : ls) l_pairs.emplace_back(0, l);
  const auto wy = axis_weights(psi.gy);
  int widest = 0;

  for (std::size_t ri = 0; ri < rs.size(); ++ri) {
    std::vector<double> mus(static_cast<std::size_t>(cells));
    for (int i = 0; i < cells; ++i) mus[static_cast<std::size_t>(i)] = lgrid.point(i) + rs[ri];
    auto fm = t_transform(psi, mus);
#pragma omp parallel for schedule(dynamic) reduction(max : widest)
    for (int i = 0; i < cells; ++i) {
      const auto iu = static_cast<std::size_t>(i);
      const double mu = mus[iu];
      SWindow w;
      if (hint) {
        w = box_window(hint->box, 1.0, 1.0, l_pairs);
      } else {
        w = centred_window(pol, mu, 0.5 * lext);
      }
      widest = std::max(widest, w.half());
      const std::size_t nwin = static_cast<std::size_t>(w.hi - w.lo + 1) * static_cast<std::size_t>(cells);
      const std::size_t ext = static_cast<std::size_t>(lmax - lmin) * static_cast<std::size_t>(cells);
      std::vector<TermAcc> acc(pairs.size());
      for (std::size_t c0 = 0; c0 < nwin; c0 += kChunkCols) {
        const std::size_t len = std::min(kChunkCols, nwin - c0);
        const double xi_first = w.lo + lmin + (static_cast<double>(c0) + 0.5) * dxi;
        KernelSheet sh = kernel_sheet(fm[iu], mu, xi_first, dxi, len + ext);
        for (std::size_t li = 0; li < ls.size(); ++li) {
          const int l = ls[li];
          const std::ptrdiff_t dl = row_shift[li];
          for (std::size_t a = 0; a < len; ++a) {
            const auto col = static_cast<std::ptrdiff_t>(a) - static_cast<std::ptrdiff_t>(lmin) * cells;
            const auto partner = col + static_cast<std::ptrdiff_t>(l) * cells;
            cplx sum{};
            for (std::ptrdiff_t d = std::max<std::ptrdiff_t>(0, dl); d < std::min(sh.v.rows(), sh.v.rows() + dl); ++d)
              sum += sh.v(d, col) * std::conj(sh.v(d - dl, partner)) * wy[static_cast<std::size_t>(d)];
            const cplx cval = sum * dxi;
            const std::size_t ag = c0 + a;
            const double xi = w.lo + (static_cast<double>(ag) + 0.5) * dxi;
            const bool edge = ag < static_cast<std::size_t>(cells) || ag + cells >= nwin;
            for (std::size_t c = 0; c < pairs.size(); ++c) {
              if (pairs[c].l != l) continue;
              acc[c].add(cval * expi(-kPi * mu * pairs[c].k * (2.0 * xi + l)), edge);
            }
          }
        }
      }
      for (std::size_t c = 0; c < pairs.size(); ++c) {
        vals[c][ri][iu] = acc[c].total.value() * std::abs(mu);
        ring.add(c, iu, acc[c], w, std::abs(mu));
      }
    }
  }
  fold_r(curves, rs, vals, ring, pol.tail_eps);
  for (auto& c : curves) c.inner_range = widest;
  return curves;
}

DiagnosticCurve compute_F(const Field3D& psi, int j1, int j2, const FIndex& idx, const LambdaGrid& lgrid,
                          const TruncationPolicy& pol, const std::optional<SupportHint>& hint) {
  return compute_F(psi, j1, j2, std::vector<FIndex>{idx}, lgrid, pol, hint).front();
}

std::vector<DiagnosticCurve> compute_F(const Field3D& psi, int j1, int j2, const std::vector<FIndex>& idx,
                                       const LambdaGrid& lgrid, const TruncationPolicy& pol,
                                       const std::optional<SupportHint>& hint) {
  lgrid.validate();
  pol.validate();
  check_scale(j1);
  check_scale(j2);
  require_finite(psi.data, "compute_F");
  if (j2 < j1) throw ConfigError("compute_F: requires j2 >= j1");
  if (idx.empty()) return {};
  const int cells = lgrid.cells;
  const double dxi = 1.0 / cells;
  const int dj = j2 - j1;
  const double a1 = std::ldexp(1.0, j1), a2 = std::ldexp(1.0, j2);
  const double q = std::ldexp(1.0, 2 * dj);
  const double hy = psi.gy.step;
  require_integer_lattice(psi.gy, "compute_F");
  // Shifting xi by l / a moves a sheet column by l cells / a.
  auto col_shift = [&](double a) {
    double c = cells / a;
    if (std::abs(c - std::nearbyint(c)) > 1e-9)
      throw ConfigError("compute_F: cell count must be divisible by 2^j");
    return static_cast<std::ptrdiff_t>(std::nearbyint(c));
  };
  const std::ptrdiff_t cA = col_shift(a1), cB = col_shift(a2);

  std::vector<std::pair<int, int>> l_pairs;
  int l1min = 0, l1max = 0, l2min = 0, l2max = 0;
  bool first = true;
  double lshift = 0.0;
  for (const auto& t : idx) {
    if (std::find(l_pairs.begin(), l_pairs.end(), std::pair{t.l1, t.l2}) == l_pairs.end())
      l_pairs.emplace_back(t.l1, t.l2);
    l1min = first ? t.l1 : std::min(l1min, t.l1);
    l1max = first ? t.l1 : std::max(l1max, t.l1);
    l2min = first ? t.l2 : std::min(l2min, t.l2);
    l2max = first ? t.l2 : std::max(l2max, t.l2);
    first = false;
    lshift = std::max({lshift, std::abs(t.l1) / (2.0 * a1), std::abs(t.l2) / (2.0 * a2)});
  }
  if (dj == 0) {
    l1min = l2min = std::min(l1min, l2min);
    l1max = l2max = std::max(l1max, l2max);
  }

  // u grid: both row maps y = a u - l land on psi's y-grid.
  const double hu = hy / std::min({1.0, a1, a2});
  double ulo = 1e300, uhi = -1e300;
  for (auto [l1, l2] : l_pairs) {
    double p = std::max((psi.gy.start + l1) / a1, (psi.gy.start + l2) / a2);
    double r = std::min((psi.gy.last() + l1) / a1, (psi.gy.last() + l2) / a2);
    if (r < p) continue;
    ulo = std::min(ulo, p);
    uhi = std::max(uhi, r);
  }
  std::vector<DiagnosticCurve> curves(idx.size());
  for (std::size_t c = 0; c < idx.size(); ++c) {
    auto& cv = curves[c];
    cv.name = "F";
    cv.cells = cells;
    cv.indices = {{"j1", j1}, {"j2", j2}, {"k1", idx[c].k1}, {"k2", idx[c].k2}, {"l1", idx[c].l1}, {"l2", idx[c].l2}};
    cv.values.assign(static_cast<std::size_t>(cells), cplx{});
  }
  if (uhi < ulo) return curves;  // no overlap in y for any pair
  const long long u_first = static_cast<long long>(std::floor(ulo / hu + 1e-9));
  const long long u_last = static_cast<long long>(std::ceil(uhi / hu - 1e-9));
  const Grid1D ug = make_grid(static_cast<double>(u_first) * hu, hu, u_last - u_first + 1);
  const auto wu = axis_weights(ug);
  // Row of psi's y-grid holding y = a u_d - l: base(a) + d stride(a) - l / hy.
  const auto y0 = static_cast<std::ptrdiff_t>(std::nearbyint(psi.gy.start / hy));
  const auto per_unit = static_cast<std::ptrdiff_t>(std::nearbyint(1.0 / hy));
  auto stride = [&](double a) { return static_cast<std::ptrdiff_t>(std::nearbyint(a * hu / hy)); };
  const std::ptrdiff_t sA = stride(a1), sB = stride(a2);
  const std::ptrdiff_t bA = u_first * sA - y0, bB = u_first * sB - y0;
  const auto nu_rows = static_cast<std::ptrdiff_t>(ug.count);

  const std::vector<int> rs = r_values(lgrid, hint);
  std::vector<std::vector<std::vector<cplx>>> vals(
      idx.size(), std::vector<std::vector<cplx>>(rs.size(), std::vector<cplx>(static_cast<std::size_t>(cells))));
  RingTally ring(idx.size(), cells);
  int widest = 0;

  for (std::size_t ri = 0; ri < rs.size(); ++ri) {
    std::vector<double> mus(static_cast<std::size_t>(cells)), nus(mus.size());
    for (int i = 0; i < cells; ++i) {
      mus[static_cast<std::size_t>(i)] = lgrid.point(i) + rs[ri];
      nus[static_cast<std::size_t>(i)] = q * mus[static_cast<std::size_t>(i)];
    }
    auto fB = t_transform(psi, mus);
    auto fA = dj == 0 ? std::vector<Field2D>{} : t_transform(psi, nus);
#pragma omp parallel for schedule(dynamic) reduction(max : widest)
    for (int i = 0; i < cells; ++i) {
      const auto iu = static_cast<std::size_t>(i);
      const double mu = mus[iu], nu = nus[iu];
      SWindow w;
      if (hint)
        w = box_window(hint->box, a1, a2, l_pairs);
      else
        w = centred_window(pol, mu * std::max(a1 * q, a2), lshift);
      widest = std::max(widest, w.half());
      const std::size_t nwin = static_cast<std::size_t>(w.hi - w.lo + 1) * static_cast<std::size_t>(cells);
      std::vector<TermAcc> acc(idx.size());
      for (std::size_t c0 = 0; c0 < nwin; c0 += kChunkCols) {
        const std::size_t len = std::min(kChunkCols, nwin - c0);
        const double xi_first = w.lo + (static_cast<double>(c0) + 0.5) * dxi;
        const auto extA = static_cast<std::size_t>((l1max - l1min) * cA);
        const auto extB = static_cast<std::size_t>((l2max - l2min) * cB);
        KernelSheet shA = kernel_sheet(dj == 0 ? fB[iu] : fA[iu], nu, a1 * xi_first + l1min, a1 * dxi, len + extA);
        KernelSheet shB_own;
        if (dj != 0) shB_own = kernel_sheet(fB[iu], mu, a2 * xi_first + l2min, a2 * dxi, len + extB);
        const KernelSheet& shB = dj == 0 ? shA : shB_own;
        for (auto [l1, l2] : l_pairs) {
          const std::ptrdiff_t rowA = bA - l1 * per_unit, rowB = bB - l2 * per_unit;
          const std::ptrdiff_t colA = (l1 - l1min) * cA, colB = (l2 - l2min) * cB;
          std::ptrdiff_t d_lo = 0, d_hi = nu_rows;  // rows valid in both sheets
          for (auto [b, st, n] : {std::tuple{rowA, sA, shA.v.rows()}, std::tuple{rowB, sB, shB.v.rows()}}) {
            d_lo = std::max(d_lo, b >= 0 ? std::ptrdiff_t{0} : (-b + st - 1) / st);
            d_hi = std::min(d_hi, b >= n ? std::ptrdiff_t{0} : (n - 1 - b) / st + 1);
          }
          for (std::size_t a = 0; a < len; ++a) {
            const auto ca = colA + static_cast<std::ptrdiff_t>(a), cb = colB + static_cast<std::ptrdiff_t>(a);
            cplx sum{};
            for (std::ptrdiff_t d = d_lo; d < d_hi; ++d)
              sum += shA.v(rowA + d * sA, ca) * std::conj(shB.v(rowB + d * sB, cb)) * wu[static_cast<std::size_t>(d)];
            const cplx cval = sum * dxi;
            const std::size_t ag = c0 + a;
            const double xi = w.lo + (static_cast<double>(ag) + 0.5) * dxi;
            const bool edge = ag < static_cast<std::size_t>(cells) || ag + cells >= nwin;
            for (std::size_t c = 0; c < idx.size(); ++c) {
              const auto& t = idx[c];
              if (t.l1 != l1 || t.l2 != l2) continue;
              const double ph = kPi * nu * t.k1 * (2.0 * a1 * xi + l1) - kPi * mu * t.k2 * (2.0 * a2 * xi + l2);
              acc[c].add(cval * expi(ph), edge);
            }
          }
        }
      }
      for (std::size_t c = 0; c < idx.size(); ++c) {
        vals[c][ri][iu] = acc[c].total.value() * std::abs(mu);
        ring.add(c, iu, acc[c], w, std::abs(mu));
      }
    }
  }
  fold_r(curves, rs, vals, ring, pol.tail_eps);
  for (auto& c : curves) c.inner_range = widest;
  return curves;
}

void keep_curves(const CheckOptions& opt, const std::vector<DiagnosticCurve>& cs) {
  if (opt.curves) opt.curves->insert(opt.curves->end(), cs.begin(), cs.end());
}

std::vector<ConditionReport> check_translates_h(const Field3D& psi, const IndexWindow& win,
                                                const LambdaGrid& lgrid, const TruncationPolicy& pol,
                                                const CheckOptions& opt) {
  std::vector<KL> pairs;
  for (int k : win.k)
    for (int l : win.l) pairs.push_back({k, l});
  if (std::find_if(pairs.begin(), pairs.end(), [](const KL& p) { return p.k == 0 && p.l == 0; }) == pairs.end())
    pairs.push_back({0, 0});
  auto curves = compute_G(psi, pairs, lgrid, pol, opt.hint);
  keep_curves(opt, curves);
  std::vector<DiagnosticCurve> diag, off;
  for (std::size_t c = 0; c < pairs.size(); ++c)
    (pairs[c].k == 0 && pairs[c].l == 0 ? diag : off).push_back(curves[c]);
  std::vector<ConditionReport> out;
  out.push_back(condition_report("translates_h.i", diag, 1.0, opt.tol, opt.floor));
  out.push_back(condition_report("translates_h.ii", off, 0.0, opt.tol));
  return out;
}

std::vector<ConditionReport> check_wavelet_h(const Field3D& psi, const IndexWindow& win,
                                             const LambdaGrid& lgrid, const TruncationPolicy& pol,
                                             const CheckOptions& opt) {
  auto out = check_translates_h(psi, win, lgrid, pol, opt);
  std::vector<FIndex> idx;
  for (int k1 : win.k)
    for (int k2 : win.k)
      for (int l1 : win.l)
        for (int l2 : win.l) idx.push_back({k1, k2, l1, l2});
  std::vector<DiagnosticCurve> all;
  for (int j1 : win.j)
    for (int d : win.dj) {
      if (d <= 0) throw ConfigError("check_wavelet_h: scale differences must be positive");
      auto cs = compute_F(psi, j1, j1 + d, idx, lgrid, pol, opt.hint);
      keep_curves(opt, cs);
      all.insert(all.end(), std::make_move_iterator(cs.begin()), std::make_move_iterator(cs.end()));
    }
  out.push_back(condition_report("wavelet_h.iii", all, 0.0, opt.tol));
  return out;
}

std::vector<ConditionReport> classical_check(std::span<const cplx> psi_hat, const Grid1D& freq, int jmax,
                                             double tol, int cells, std::vector<DiagnosticCurve>* curves) {
  if (psi_hat.size() != freq.count) throw ConfigError("classical_check: sample count does not match grid");
  if (cells < 1 || jmax < 0) throw ConfigError("classical_check: bad cells or jmax");
  require_finite(psi_hat, "classical_check");
  const int kmax = static_cast<int>(std::ceil(std::max(std::abs(freq.start), std::abs(freq.last())))) + 1;
  auto value = [&](double x) -> cplx {
    if (x < freq.start - 1e-9 * freq.step || x > freq.last() + 1e-9 * freq.step) return {};
    auto n = freq.node(x);
    if (!n) throw ConfigError("classical_check: point " + std::to_string(x) + " is not a grid node");
    return psi_hat[static_cast<std::size_t>(*n)];
  };
  DiagnosticCurve one{"classical", CurveAxis::xi, cells, {{"j", 0}}, {}, true, 0, kmax};
  std::vector<DiagnosticCurve> cross;
  for (int i = 0; i < cells; ++i) {
    CompensatedSum s;
    for (int k = -kmax; k <= kmax; ++k) s += std::norm(value(one.point(i) + k));
    one.values.push_back(s.value());
  }
  for (int j = 1; j <= jmax; ++j) {
    DiagnosticCurve c{"classical", CurveAxis::xi, cells, {{"j", j}}, {}, true, 0, kmax};
    const double a = std::ldexp(1.0, j);
    for (int i = 0; i < cells; ++i) {
      CompensatedSum s;
      for (int k = -kmax; k <= kmax; ++k) {
        double x = c.point(i) + k;
        s += value(x) * std::conj(value(a * x));
      }
      c.values.push_back(s.value());
    }
    cross.push_back(std::move(c));
  }
  if (curves) {
    curves->push_back(one);
    curves->insert(curves->end(), cross.begin(), cross.end());
  }
  std::vector<ConditionReport> out;
  out.push_back(condition_report("classical.i", {one}, 1.0, tol));
  out.push_back(condition_report("classical.ii", cross, 0.0, tol));
  return out;
}

cplx g_bridge(const DiagnosticCurve& g, int m) {
  CompensatedSum s;
  for (int i = 0; i < g.cells; ++i)
    s += std::conj(g.values[static_cast<std::size_t>(i)]) * expi(2.0 * kPi * g.point(i) * m);
  return s.value() / static_cast<double>(g.cells);
}

cplx f_bridge(const DiagnosticCurve& f, int j1, int j2, int m1, int m2) {
  if (j2 < j1) throw ConfigError("f_bridge: requires j2 >= j1");
  const double freq = std::ldexp(1.0, 2 * (j2 - j1)) * m1 - m2;
  CompensatedSum s;
  for (int i = 0; i < f.cells; ++i)
    s += f.values[static_cast<std::size_t>(i)] * expi(2.0 * kPi * f.point(i) * freq);
  return s.value() * std::ldexp(1.0, 3 * j2 - j1) / static_cast<double>(f.cells);
}

}  // namespace hwave
