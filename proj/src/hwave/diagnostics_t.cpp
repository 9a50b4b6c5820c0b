#include "hwave/diagnostics_t.hpp"

#include <algorithm>
#include <cmath>

#include "hwave/errors.hpp"
#include "hwave/heisenberg.hpp"
#include "hwave/resample.hpp"

namespace hwave {
namespace {

cplx expi(double a) { return {std::cos(a), std::sin(a)}; }

void require_nonzero_scale(int j, const char* what) {
  check_scale(j);
  if (j == 0) throw SingularScaleError(std::string(what) + ": j = 0 makes 1 - 4^{-j} vanish");
}

std::ptrdiff_t lattice_index(double v, const char* what) {
  double r = std::nearbyint(v);
  if (std::abs(v - r) > 1e-6)
    throw ConfigError(std::string(what) + ": y-grid step must divide 1 and the grid must contain 0");
  return static_cast<std::ptrdiff_t>(r);
}

// Mean x-frequency of phi: sum Im(conj(phi) d_x phi) / (2 pi sum |phi|^2). Only
// centres summation windows, so a central difference is enough.
double x_centroid(const Field2D& phi) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 1; i + 1 < phi.nx(); ++i)
    for (std::size_t j = 0; j < phi.ny(); ++j) {
      cplx dv = (phi.at(i + 1, j) - phi.at(i - 1, j)) / (2.0 * phi.gx.step);
      num += (std::conj(phi.at(i, j)) * dv).imag();
      den += std::norm(phi.at(i, j));
    }
  return den > 0.0 ? num / (2.0 * kPi * den) : 0.0;
}

// Rows of phi at the given y-grid indices (zero outside the grid).
Field2D gather_rows(const Field2D& phi, const std::vector<std::ptrdiff_t>& rows, const Grid1D& gy) {
  Field2D out(phi.gx, gy);
  const auto ny = static_cast<std::ptrdiff_t>(phi.ny());
  for (std::size_t i = 0; i < phi.nx(); ++i)
    for (std::size_t d = 0; d < rows.size(); ++d)
      if (rows[d] >= 0 && rows[d] < ny) out.at(i, d) = phi.at(i, static_cast<std::size_t>(rows[d]));
  return out;
}

// Accumulates sum over rows and m of weight * a * conj(b) into one value per
// xi cell, tracking the mass of the outermost m on each side.
struct BandSum {
  std::vector<CompensatedSum> total;
  std::vector<double> abs_total, abs_edge;
  explicit BandSum(int cells)
      : total(static_cast<std::size_t>(cells)),
        abs_total(static_cast<std::size_t>(cells)),
        abs_edge(static_cast<std::size_t>(cells)) {}

  void add(const Eigen::MatrixXcd& a, std::ptrdiff_t row_a, const Eigen::MatrixXcd& b, std::ptrdiff_t row_b,
           double weight, int cells, int width) {
    for (int mi = 0; mi < width; ++mi) {
      const bool edge = width > 1 && (mi == 0 || mi == width - 1);
      for (int i = 0; i < cells; ++i) {
        const Eigen::Index col = static_cast<Eigen::Index>(mi) * cells + i;
        const cplx v = a(row_a, col) * std::conj(b(row_b, col)) * weight;
        const auto iu = static_cast<std::size_t>(i);
        total[iu] += v;
        abs_total[iu] += std::abs(v);
        if (edge) abs_edge[iu] += std::abs(v);
      }
    }
  }

  void finish(DiagnosticCurve& c, double scale, double eps, bool tight) const {
    c.values.resize(total.size());
    for (std::size_t i = 0; i < total.size(); ++i) {
      c.values[i] = total[i].value() * scale;
      if (!std::isfinite(c.values[i].real()) || !std::isfinite(c.values[i].imag()))
        throw NumericalError("non-finite value in " + c.label());
      if (!tight && abs_edge[i] > eps * abs_total[i]) c.converged = false;
    }
  }
};

}  // namespace

void XiGrid::validate() const {
  if (cells < 1) throw ConfigError("xi grid needs at least one cell");
}

double r_target(int j) { return std::abs(1.0 - std::ldexp(1.0, -4 * j)) / 4.0; }

cplx compute_S(const Field2D& phi, int j, int l, double xi, int m, double y) {
  require_nonzero_scale(j, "compute_S");
  require_finite(phi.data, "compute_S");
  const double mu = std::ldexp(1.0, -2 * j);
  const double xk = 2.0 * (xi + m - y) / (1.0 + mu) + l;
  const double ek = 2.0 * y / (1.0 - mu);
  const double u = ek - xk;
  const double a = 0.5 * (mu - 1.0) * l;
  const double pos = (u - phi.gy.start) / phi.gy.step;
  std::vector<cplx> line(phi.ny()), val(1);
  CompensatedSum s;
  for (std::size_t i = 0; i < phi.nx(); ++i) {
    cplx fv;
    if (std::abs(pos - std::nearbyint(pos)) < 1e-9) {
      auto r = static_cast<std::ptrdiff_t>(std::nearbyint(pos));
      if (r < 0 || r >= static_cast<std::ptrdiff_t>(phi.ny())) return {};
      fv = phi.at(i, static_cast<std::size_t>(r));
    } else {
      for (std::size_t jj = 0; jj < phi.ny(); ++jj) line[jj] = phi.at(i, jj);
      resample_line(line, phi.gy.boundary, pos, 1.0, val);
      fv = val[0];
    }
    const double x = phi.gx.point(i);
    s += fv * phi.gx.weight(i) * expi(2.0 * kPi * a * x + kPi * x * (xk + ek));
  }
  return s.value();
}

DiagnosticCurve compute_P(const Field2D& phi, int j1, int j2, int l1, int l2, const XiGrid& xg,
                          const TruncationPolicy& pol, const std::optional<SupportHint>& hint) {
  return compute_P(phi, j1, j2, std::vector<LPair>{{l1, l2}}, xg, pol, hint).front();
}

std::vector<DiagnosticCurve> compute_P(const Field2D& phi, int j1, int j2, const std::vector<LPair>& ls,
                                       const XiGrid& xg, const TruncationPolicy& pol,
                                       const std::optional<SupportHint>& hint) {
  xg.validate();
  pol.validate();
  check_scale(j1);
  check_scale(j2);
  require_finite(phi.data, "compute_P");
  const int cells = xg.cells;
  const double h = phi.gy.step;
  const std::ptrdiff_t per_unit = lattice_index(1.0 / h, "compute_P");
  const std::ptrdiff_t y0 = lattice_index(phi.gy.start / h, "compute_P");
  const int d = j2 - j1;
  const double mu1 = std::ldexp(1.0, -2 * j1), mu2 = std::ldexp(1.0, -2 * j2);
  const double c1 = std::ldexp(1.0, j1 + j2), c2 = std::ldexp(1.0, 2 * j2);
  const double pd = std::ldexp(1.0, d);
  const double hw = h * std::ldexp(1.0, std::max(0, -d));
  const std::ptrdiff_t sw = lattice_index(hw / h, "compute_P");
  const bool tight = hint && j1 == 0 && j2 == 0;
  const double nu0 = x_centroid(phi);
  const int M = pol.m_range;

  std::vector<DiagnosticCurve> out;
  for (const auto& lp : ls) {
    DiagnosticCurve c;
    c.name = "P";
    c.axis = CurveAxis::xi;
    c.cells = cells;
    c.indices = {{"j1", j1}, {"j2", j2}, {"l1", lp.l1}, {"l2", lp.l2}};
    c.values.assign(static_cast<std::size_t>(cells), cplx{});

    // w rows: A at y = w, B at y = 2^d (w + l1) - l2, both on phi's grid.
    const double wlo = std::max(phi.gy.start, (phi.gy.start + lp.l2) / pd - lp.l1);
    const double whi = std::min(phi.gy.last(), (phi.gy.last() + lp.l2) / pd - lp.l1);
    if (whi < wlo) {
      out.push_back(std::move(c));
      continue;
    }
    const auto w_first = static_cast<std::ptrdiff_t>(std::ceil(wlo / hw - 1e-9));
    const auto w_last = static_cast<std::ptrdiff_t>(std::floor(whi / hw + 1e-9));
    const Grid1D wg = make_grid(static_cast<double>(w_first) * hw, hw, w_last - w_first + 1);
    const auto ww = axis_weights(wg);
    std::vector<std::ptrdiff_t> rows_a(wg.count), rows_b(wg.count);
    for (std::size_t r = 0; r < wg.count; ++r) {
      const auto wi = (w_first + static_cast<std::ptrdiff_t>(r)) * sw;  // w in units of h
      rows_a[r] = wi - y0;
      rows_b[r] = static_cast<std::ptrdiff_t>(std::nearbyint(pd * static_cast<double>(wi + lp.l1 * per_unit))) -
                  lp.l2 * per_unit - y0;
    }
    Field2D fa = gather_rows(phi, rows_a, wg);
    Grid1D gb = make_grid(pd * (wg.start + lp.l1) - lp.l2, pd * hw, static_cast<long long>(wg.count));
    Field2D fb = gather_rows(phi, rows_b, gb);

    // m-window per row: a fixed window from the kernel box, else a band of
    // 2M + 1 around the row's frequency centre.
    int width = 2 * M + 1;
    std::vector<int> mstart(wg.count);
    if (tight) {
      const double lo = std::max(hint->box.xi0 - lp.l1, hint->box.xi0 - lp.l2);
      const double hi = std::min(hint->box.xi1 - lp.l1, hint->box.xi1 - lp.l2);
      if (hi <= lo) {  // disjoint kernel supports
        c.inner_range = 0;
        out.push_back(std::move(c));
        continue;
      }
      const int mlo = static_cast<int>(std::floor(lo + 1e-12));
      const int mhi = std::max(mlo, static_cast<int>(std::ceil(hi - 1e-12)) - 1);
      width = mhi - mlo + 1;
      std::fill(mstart.begin(), mstart.end(), mlo);
    } else {
      for (std::size_t r = 0; r < wg.count; ++r) {
        const double w = wg.point(r), ub = gb.point(r);
        const double xa = (-nu0 / mu1 - 0.5 * w - lp.l1) / c1;
        const double xb = (-nu0 / mu2 - 0.5 * ub - lp.l2) / c2;
        mstart[r] = static_cast<int>(std::lround(0.5 * (xa + xb) - 0.5)) - M;
      }
    }
    SheetSpec sa, sb;
    sa.alpha = mu1 * c1;
    sb.alpha = mu2 * c2;
    for (SheetSpec* sp : {&sa, &sb}) {
      sp->xi0 = 0.5 / cells;
      sp->dxi = 1.0 / cells;
      sp->na = static_cast<std::size_t>(width) * static_cast<std::size_t>(cells);
      sp->row_offset.resize(wg.count);
    }
    sa.beta.resize(wg.count);
    sb.beta.resize(wg.count);
    for (std::size_t r = 0; r < wg.count; ++r) {
      sa.row_offset[r] = sb.row_offset[r] = static_cast<std::ptrdiff_t>(mstart[r]) * cells;
      sa.beta[r] = mu1 * (lp.l1 + 0.5 * wg.point(r));
      sb.beta[r] = mu2 * (lp.l2 + 0.5 * gb.point(r));
    }
    Eigen::MatrixXcd va = oscillatory_sheet(fa, sa);
    Eigen::MatrixXcd vb = oscillatory_sheet(fb, sb);
    BandSum acc(cells);
    for (std::size_t r = 0; r < wg.count; ++r)
      acc.add(va, static_cast<std::ptrdiff_t>(r), vb, static_cast<std::ptrdiff_t>(r), ww[r], cells, width);
    acc.finish(c, 1.0 / std::ldexp(1.0, j1), pol.tail_eps, tight);
    c.inner_range = tight ? width - 1 : M;
    out.push_back(std::move(c));
  }
  return out;
}

DiagnosticCurve compute_Q(const Field2D& phi, int j, int l1, int l2, const XiGrid& xg, const TruncationPolicy& pol) {
  require_nonzero_scale(j, "compute_Q");
  xg.validate();
  pol.validate();
  require_finite(phi.data, "compute_Q");
  const int cells = xg.cells;
  const double h = phi.gy.step;
  const std::ptrdiff_t per_unit = lattice_index(1.0 / h, "compute_Q");
  const double mu = std::ldexp(1.0, -2 * j);
  const double nu0 = x_centroid(phi);
  const int M = pol.m_range;
  const int width = 2 * M + 1;
  const auto ny = static_cast<std::ptrdiff_t>(phi.ny());
  // Row d of the l1 factor pairs with row d + shift of the l2 factor (same y).
  const std::ptrdiff_t shift = (l1 - l2) * per_unit;

  DiagnosticCurve c;
  c.name = "Q";
  c.axis = CurveAxis::xi;
  c.cells = cells;
  c.indices = {{"j", j}, {"l1", l1}, {"l2", l2}};
  c.inner_range = M;

  auto make_spec = [&](int l, std::ptrdiff_t row_delta) {
    SheetSpec s;
    s.alpha = 1.0;
    s.xi0 = 0.5 / cells;
    s.dxi = 1.0 / cells;
    s.na = static_cast<std::size_t>(width) * static_cast<std::size_t>(cells);
    s.beta.resize(phi.ny());
    s.row_offset.resize(phi.ny());
    for (std::ptrdiff_t r = 0; r < ny; ++r) {
      const double u = phi.gy.point(static_cast<std::size_t>(r));
      s.beta[static_cast<std::size_t>(r)] = 0.5 * mu * (u + 2.0 * l);
      // Band centre from the l1 row paired with this one.
      const double u1 = phi.gy.point(static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(r - row_delta, 0, ny - 1)));
      const double centre = -0.25 * mu * (2.0 * u1 + 3.0 * l1 + l2) - nu0;
      s.row_offset[static_cast<std::size_t>(r)] =
          static_cast<std::ptrdiff_t>(std::lround(centre - 0.5) - M) * cells;
    }
    return s;
  };
  Eigen::MatrixXcd v1 = oscillatory_sheet(phi, make_spec(l1, 0));
  Eigen::MatrixXcd v2 = l1 == l2 ? Eigen::MatrixXcd() : oscillatory_sheet(phi, make_spec(l2, shift));
  const Eigen::MatrixXcd& b = l1 == l2 ? v1 : v2;
  const auto wy = axis_weights(phi.gy);
  BandSum acc(cells);
  for (std::ptrdiff_t r = 0; r < ny; ++r) {
    const std::ptrdiff_t r2 = r + shift;
    if (r2 < 0 || r2 >= ny) continue;
    acc.add(v1, r, b, r2, wy[static_cast<std::size_t>(r)], cells, width);
  }
  acc.finish(c, std::abs(1.0 - mu * mu) / 4.0, pol.tail_eps, false);
  return c;
}

DiagnosticCurve compute_R(const Field2D& phi, int j, int l, const XiGrid& xg, const TruncationPolicy& pol) {
  DiagnosticCurve c = compute_Q(phi, j, l, l, xg, pol);
  c.name = "R";
  c.indices = {{"j", j}, {"l", l}};
  for (cplx& v : c.values) v = {v.real(), 0.0};
  return c;
}

std::vector<ConditionReport> check_twisted_translates(const Field2D& phi, const std::vector<int>& ls,
                                                      const XiGrid& xg, const TruncationPolicy& pol,
                                                      const CheckOptions& opt) {
  std::vector<LPair> pairs = {{0, 0}};
  for (int l : ls)
    if (l != 0) pairs.push_back({0, l});
  auto curves = compute_P(phi, 0, 0, pairs, xg, pol, opt.hint);
  keep_curves(opt, curves);
  std::vector<DiagnosticCurve> off(curves.begin() + 1, curves.end());
  std::vector<ConditionReport> out;
  out.push_back(condition_report("twisted.i", {curves.front()}, 1.0, opt.tol, opt.floor));
  out.push_back(condition_report("twisted.ii", off, 0.0, opt.tol));
  return out;
}

std::vector<ConditionReport> check_twisted_wavelet(const Field2D& phi, const IndexWindow& win, const XiGrid& xg,
                                                   const TruncationPolicy& pol, const CheckOptions& opt) {
  auto out = check_twisted_translates(phi, win.l, xg, pol, opt);
  std::vector<LPair> pairs;
  for (int l1 : win.l)
    for (int l2 : win.l) pairs.push_back({l1, l2});
  std::vector<DiagnosticCurve> p3, q4, r5;
  for (int j1 : win.j)
    for (int d : win.dj) {
      if (d <= 0) throw ConfigError("check_twisted_wavelet: scale differences must be positive");
      auto cs = compute_P(phi, j1, j1 + d, pairs, xg, pol, opt.hint);
      p3.insert(p3.end(), cs.begin(), cs.end());
    }
  for (int j : win.j) {
    if (j == 0) continue;
    for (int l1 : win.l)
      for (int l2 : win.l) {
        if (l1 == l2) {
          DiagnosticCurve r = compute_R(phi, j, l1, xg, pol);
          if (opt.curves) opt.curves->push_back(r);
          const double t = r_target(j);
          for (cplx& v : r.values) v -= t;
          r5.push_back(std::move(r));
        } else {
          q4.push_back(compute_Q(phi, j, l1, l2, xg, pol));
        }
      }
  }
  keep_curves(opt, p3);
  keep_curves(opt, q4);
  out.push_back(condition_report("twisted.iii", p3, 0.0, opt.tol));
  out.push_back(condition_report("twisted.iv", q4, 0.0, opt.tol));
  // R curves are shifted by their targets, so the report measures R - |1 - 2^{-4j}| / 4.
  out.push_back(condition_report("twisted.v", r5, 0.0, opt.tol));
  return out;
}

}  // namespace hwave
