#include "hwave/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "hwave/errors.hpp"
#include "hwave/heisenberg.hpp"
#include "hwave/resample.hpp"
#include "hwave/twisted.hpp"

namespace hwave {
namespace {

cplx expi(double a) { return {std::cos(a), std::sin(a)}; }

std::vector<int> sorted_unique(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

void require_nonempty(const std::vector<int>& v, const char* axis) {
  if (v.empty()) throw ConfigError(std::string("gram window: empty ") + axis + " range");
}

// Every other node. Closed axes keep the first node and drop a trailing odd
// one; periodic axes need an even count and keep their period.
Grid1D halve(const Grid1D& g, std::size_t& stride) {
  stride = 1;
  if (g.boundary == Boundary::zero) {
    if (g.count < 3) return g;
    stride = 2;
    return Grid1D{g.start, 2.0 * g.step, (g.count + 1) / 2, g.boundary};
  }
  if (g.count % 2 != 0 || g.count < 4) return g;
  stride = 2;
  return Grid1D{g.start, 2.0 * g.step, g.count / 2, g.boundary};
}

Field3D subsample(const Field3D& f) {
  std::size_t sx, sy, st;
  Grid1D gx = halve(f.gx, sx), gy = halve(f.gy, sy), gt = halve(f.gt, st);
  Field3D out(gx, gy, gt);
  for (std::size_t i = 0; i < gx.count; ++i)
    for (std::size_t j = 0; j < gy.count; ++j)
      for (std::size_t k = 0; k < gt.count; ++k) out.at(i, j, k) = f.at(i * sx, j * sy, k * st);
  return out;
}

Field2D subsample(const Field2D& f) {
  std::size_t sx, sy;
  Grid1D gx = halve(f.gx, sx), gy = halve(f.gy, sy);
  Field2D out(gx, gy);
  for (std::size_t i = 0; i < gx.count; ++i)
    for (std::size_t j = 0; j < gy.count; ++j) out.at(i, j) = f.at(i * sx, j * sy);
  return out;
}

// Gram over scales js and base indices; element (ji, a) sits at ji * n_a + a.
// deficit[a] is the relative squared-norm loss of the undilated element a.
struct Core {
  Eigen::MatrixXcd entries;
  std::vector<double> deficit;
};

// Entry of the pair (j1, a), (j2, b) from blocks[d](a, b) = <e_{j1,a}, e_{j1+d,b}>.
void assemble(const std::vector<int>& js, std::size_t na, const std::vector<Eigen::MatrixXcd>& blocks,
              const std::vector<int>& dpos, Eigen::MatrixXcd& out) {
  const auto n = static_cast<Eigen::Index>(js.size() * na);
  out.resize(n, n);
  for (std::size_t p = 0; p < js.size(); ++p)
    for (std::size_t q = 0; q < js.size(); ++q) {
      const int d = js[q] - js[p];
      for (std::size_t a = 0; a < na; ++a)
        for (std::size_t b = 0; b < na; ++b) {
          const auto r = static_cast<Eigen::Index>(p * na + a), c = static_cast<Eigen::Index>(q * na + b);
          if (d >= 0)
            out(r, c) = blocks[static_cast<std::size_t>(dpos[static_cast<std::size_t>(d)])](
                static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
          else
            out(r, c) = std::conj(blocks[static_cast<std::size_t>(dpos[static_cast<std::size_t>(-d)])](
                static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)));
        }
    }
}

std::vector<int> scale_gaps(const std::vector<int>& js, std::vector<int>& dpos) {
  std::set<int> ds;
  for (int a : js)
    for (int b : js)
      if (b >= a) ds.insert(b - a);
  std::vector<int> dv(ds.begin(), ds.end());
  dpos.assign(static_cast<std::size_t>(dv.back() + 1), -1);
  for (std::size_t i = 0; i < dv.size(); ++i) dpos[static_cast<std::size_t>(dv[i])] = static_cast<int>(i);
  return dv;
}

// For j2 = j1 + d the pairing <delta_{j1} L_a psi, delta_{j2} L_b psi> equals
// <delta_{-d} L_a psi, L_b psi>: the coarser element is stretched onto the
// grid of the finer one, whose own support bounds the integrand.
Core gram3_core(const Field3D& psi, const std::vector<int>& js, const std::vector<LatticeIndex>& base,
                std::size_t slab_bytes) {
  const std::size_t na = base.size();
  std::vector<int> dpos;
  const std::vector<int> dv = scale_gaps(js, dpos);
  const std::size_t row_elems = psi.ny() * psi.nt();
  const std::size_t rows_per_slab =
      std::max<std::size_t>(1, slab_bytes / std::max<std::size_t>(1, na * row_elems * sizeof(cplx)));
  const auto wx = axis_weights(psi.gx), wy = axis_weights(psi.gy), wt = axis_weights(psi.gt);
  ResampleOptions quiet;
  quiet.check_coverage = false;

  std::vector<std::vector<CompensatedSum>> acc(dv.size(), std::vector<CompensatedSum>(na * na));
  for (std::size_t i0 = 0; i0 < psi.nx(); i0 += rows_per_slab) {
    const std::size_t nrow = std::min(rows_per_slab, psi.nx() - i0);
    const Grid1D ox{psi.gx.point(i0), psi.gx.step, nrow, psi.gx.boundary};
    const auto S = static_cast<Eigen::Index>(nrow * row_elems);
    Eigen::VectorXd w(S);
    for (std::size_t i = 0; i < nrow; ++i)
      for (std::size_t j = 0; j < psi.ny(); ++j)
        for (std::size_t k = 0; k < psi.nt(); ++k)
          w(static_cast<Eigen::Index>((i * psi.ny() + j) * psi.nt() + k)) = wx[i0 + i] * wy[j] * wt[k];

    Eigen::MatrixXcd native(S, static_cast<Eigen::Index>(na));
    for (std::size_t a = 0; a < na; ++a) {
      auto dst = native.col(static_cast<Eigen::Index>(a));
      // On a periodic t axis, an element differing from an earlier one only
      // in m is that element shifted by whole t samples.
      std::optional<std::size_t> donor;
      if (psi.gt.boundary != Boundary::zero)
        for (std::size_t b = 0; b < a && !donor; ++b)
          if (base[b].k == base[a].k && base[b].l == base[a].l &&
              psi.gt.node(psi.gt.start + (base[a].m - base[b].m)))
            donor = b;
      if (donor) {
        const double shift = (base[a].m - base[*donor].m) / psi.gt.step;
        const auto src = native.col(static_cast<Eigen::Index>(*donor));
        const std::size_t nt = psi.nt();
        for (std::size_t c = 0; c < nrow * psi.ny(); ++c)
          resample_line(std::span<const cplx>(src.data() + c * nt, nt), psi.gt.boundary, -shift, 1.0,
                        std::span<cplx>(dst.data() + c * nt, nt));
        continue;
      }
      Field3D e = wavelet_element(psi, 0, base[a], ox, psi.gy, psi.gt, quiet);
      dst = Eigen::Map<const Eigen::VectorXcd>(e.data.data(), S);
    }
    // With Y = sqrt(w) native the d = 0 block is (Y^H Y)^T, a Hermitian rank update.
    const Eigen::VectorXd sw = w.cwiseSqrt();
    native = sw.asDiagonal() * native;
    const Eigen::MatrixXcd yconj = native.conjugate();
    for (std::size_t di = 0; di < dv.size(); ++di) {
      Eigen::MatrixXcd blk(static_cast<Eigen::Index>(na), static_cast<Eigen::Index>(na));
      if (dv[di] == 0) {
        Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(blk.rows(), blk.cols());
        h.selfadjointView<Eigen::Lower>().rankUpdate(native.adjoint());
        for (Eigen::Index a = 0; a < blk.rows(); ++a)
          for (Eigen::Index b = 0; b < blk.cols(); ++b) blk(a, b) = b >= a ? h(b, a) : std::conj(h(a, b));
      } else {
        for (std::size_t a = 0; a < na; ++a) {
          Field3D e = wavelet_element(psi, -dv[di], base[a], ox, psi.gy, psi.gt, quiet);
          blk.row(static_cast<Eigen::Index>(a)).noalias() =
              (Eigen::Map<const Eigen::VectorXcd>(e.data.data(), S).cwiseProduct(sw.cast<cplx>())).transpose() *
              yconj;
        }
      }
      for (std::size_t a = 0; a < na; ++a)
        for (std::size_t b = 0; b < na; ++b)
          acc[di][a * na + b] += blk(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    }
  }

  std::vector<Eigen::MatrixXcd> blocks(dv.size());
  for (std::size_t di = 0; di < dv.size(); ++di) {
    blocks[di].resize(static_cast<Eigen::Index>(na), static_cast<Eigen::Index>(na));
    for (std::size_t a = 0; a < na; ++a)
      for (std::size_t b = 0; b < na; ++b)
        blocks[di](static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = acc[di][a * na + b].value();
  }
  Core c;
  assemble(js, na, blocks, dpos, c.entries);
  const double n2 = norm2(psi);
  c.deficit.assign(na, 0.0);
  if (n2 > 0.0)
    for (std::size_t a = 0; a < na; ++a)
      c.deficit[a] = 1.0 - blocks[0](static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a)).real() / n2;
  return c;
}

struct Lattice2 {
  std::ptrdiff_t per_x = 1, per_y = 1;
};

Lattice2 require_lattice(const Field2D& phi) {
  auto check = [](const Grid1D& g, const char* axis) {
    const double inv = 1.0 / g.step, off = g.start / g.step;
    if (std::abs(inv - std::nearbyint(inv)) > 1e-9 || std::abs(off - std::nearbyint(off)) > 1e-6)
      throw ConfigError(std::string("gram_2d: ") + axis + "-grid must have integer 1/step and contain 0");
    return static_cast<std::ptrdiff_t>(std::nearbyint(inv));
  };
  return {check(phi.gx, "x"), check(phi.gy, "y")};
}

struct KL2 {
  int k = 0, l = 0;
};

// exp(i pi mu (x l - y k)) phi(x - k, y - l) by index lookup.
Field2D translate_exact(const Field2D& phi, const Lattice2& lat, const KL2& t, double mu) {
  Field2D out(phi.gx, phi.gy);
  const auto nx = static_cast<std::ptrdiff_t>(phi.nx()), ny = static_cast<std::ptrdiff_t>(phi.ny());
  const std::ptrdiff_t sx = t.k * lat.per_x, sy = t.l * lat.per_y;
  std::vector<cplx> py(phi.ny());
  for (std::size_t j = 0; j < phi.ny(); ++j) py[j] = expi(-kPi * mu * phi.gy.point(j) * t.k);
  for (std::ptrdiff_t i = 0; i < nx; ++i) {
    const std::ptrdiff_t si = i - sx;
    if (si < 0 || si >= nx) continue;
    const cplx px = expi(kPi * mu * phi.gx.point(static_cast<std::size_t>(i)) * t.l);
    for (std::ptrdiff_t j = 0; j < ny; ++j) {
      const std::ptrdiff_t sj = j - sy;
      if (sj < 0 || sj >= ny) continue;
      out.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
          phi.at(static_cast<std::size_t>(si), static_cast<std::size_t>(sj)) * px * py[static_cast<std::size_t>(j)];
    }
  }
  return out;
}

// <left, exp(i pi mu (x l - y k)) phi(x - k, y - l)>, plain sums along y,
// compensated across x rows.
cplx pair_with_translate(const Field2D& left, const Field2D& phi, const Lattice2& lat, const KL2& t, double mu,
                         const std::vector<double>& wx, const std::vector<double>& wy) {
  const auto nx = static_cast<std::ptrdiff_t>(phi.nx()), ny = static_cast<std::ptrdiff_t>(phi.ny());
  const std::ptrdiff_t sx = t.k * lat.per_x, sy = t.l * lat.per_y;
  std::vector<cplx> cpy(phi.ny());
  for (std::size_t j = 0; j < phi.ny(); ++j) cpy[j] = expi(kPi * mu * phi.gy.point(j) * t.k) * wy[j];
  const std::ptrdiff_t j_lo = std::max<std::ptrdiff_t>(0, sy), j_hi = std::min(ny, ny + sy);
  CompensatedSum s;
  for (std::ptrdiff_t i = std::max<std::ptrdiff_t>(0, sx); i < std::min(nx, nx + sx); ++i) {
    const auto iu = static_cast<std::size_t>(i);
    const cplx* lrow = left.data.data() + iu * phi.ny();
    const cplx* prow = phi.data.data() + static_cast<std::size_t>(i - sx) * phi.ny();
    cplx row{};
    for (std::ptrdiff_t j = j_lo; j < j_hi; ++j)
      row += lrow[j] * std::conj(prow[j - sy]) * cpy[static_cast<std::size_t>(j)];
    s += row * expi(-kPi * mu * phi.gx.point(iu) * t.l) * wx[iu];
  }
  return s.value();
}

Core gram2_core(const Field2D& phi, const std::vector<int>& js, const std::vector<KL2>& base, bool twisted) {
  const Lattice2 lat = require_lattice(phi);
  const std::size_t na = base.size();
  const auto wx = axis_weights(phi.gx), wy = axis_weights(phi.gy);
  auto mu_of = [&](int j) { return twisted ? std::ldexp(1.0, -2 * j) : 0.0; };
  const auto n = static_cast<Eigen::Index>(js.size() * na);
  Core c;
  c.entries = Eigen::MatrixXcd::Zero(n, n);
  for (std::size_t p = 0; p < js.size(); ++p)
    for (std::size_t q = p; q < js.size(); ++q) {
      const int d = js[q] - js[p];
      for (std::size_t a = 0; a < na; ++a) {
        Field2D left = translate_exact(phi, lat, base[a], mu_of(js[p]));
        if (d > 0) {
          const double s = std::ldexp(1.0, -d);
          left = affine_sample_2d(left, s, 0.0, s, 0.0, s, phi.gx, phi.gy);
        }
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t bb = 0; bb < static_cast<std::ptrdiff_t>(na); ++bb) {
          const auto b = static_cast<std::size_t>(bb);
          const cplx v = pair_with_translate(left, phi, lat, base[b], mu_of(js[q]), wx, wy);
          const auto r = static_cast<Eigen::Index>(p * na + a), col = static_cast<Eigen::Index>(q * na + b);
          c.entries(r, col) = v;
          if (q != p) c.entries(col, r) = std::conj(v);
        }
      }
    }
  const double n2 = norm2(phi);
  c.deficit.assign(na, 0.0);
  if (n2 > 0.0)
    for (std::size_t a = 0; a < na; ++a)
      c.deficit[a] = 1.0 - norm2(translate_exact(phi, lat, base[a], 0.0)) / n2;
  return c;
}

// Drops escaped elements, runs the half-resolution comparison and fills g.
void finish(GramMatrix& g, const std::vector<GramLabel>& all, std::size_t na, const Core& fine,
            const Core* coarse, const GramOptions& opt, const std::vector<std::string>& base_names) {
  std::vector<bool> keep_base(na, true);
  for (std::size_t a = 0; a < na; ++a)
    if (fine.deficit[a] > opt.coverage_tol) {
      keep_base[a] = false;
      char buf[160];
      std::snprintf(buf, sizeof buf, "element %s escapes the grid (squared-norm loss %.3g); excluded",
                    base_names[a].c_str(), fine.deficit[a]);
      g.warnings.emplace_back(buf);
    }
  std::vector<Eigen::Index> kept;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (keep_base[i % na])
      kept.push_back(static_cast<Eigen::Index>(i));
    else
      g.excluded.push_back(all[i]);
  }
  const auto n = static_cast<Eigen::Index>(kept.size());
  g.entries.resize(n, n);
  g.resolution_gap = coarse ? 0.0 : -1.0;
  for (Eigen::Index r = 0; r < n; ++r) {
    g.labels.push_back(all[static_cast<std::size_t>(kept[static_cast<std::size_t>(r)])]);
    for (Eigen::Index c = 0; c < n; ++c) {
      const Eigen::Index fr = kept[static_cast<std::size_t>(r)], fc = kept[static_cast<std::size_t>(c)];
      g.entries(r, c) = fine.entries(fr, fc);
      if (coarse) {
        const double gap = std::abs(fine.entries(fr, fc) - coarse->entries(fr, fc));
        g.resolution_gap = std::max(g.resolution_gap, gap);
        if (gap > 10.0 * opt.tol) g.quadrature_limited.emplace_back(static_cast<int>(r), static_cast<int>(c));
      }
    }
  }
  if (!g.quadrature_limited.empty())
    g.warnings.push_back(std::to_string(g.quadrature_limited.size()) +
                         " entries differ from their half-resolution value by more than 10 tol");
}

std::string format_cplx(cplx v) {
  char buf[80];
  std::snprintf(buf, sizeof buf, "%.17g%c%.17gi", v.real(), std::signbit(v.imag()) ? '-' : '+', std::abs(v.imag()));
  return buf;
}

}  // namespace

std::string GramLabel::str() const {
  std::string s = "(" + std::to_string(j) + "," + std::to_string(k) + "," + std::to_string(l);
  if (m) s += "," + std::to_string(*m);
  return s + ")";
}

GramMatrix gram_3d(const Field3D& psi, const GramWindow& win, const GramOptions& opt) {
  require_nonempty(win.j, "j");
  require_nonempty(win.k, "k");
  require_nonempty(win.l, "l");
  require_nonempty(win.m, "m");
  if (!(opt.tol > 0.0)) throw ConfigError("gram tolerance must be positive");
  require_finite(psi.data, "gram_3d");
  const auto js = sorted_unique(win.j);
  for (int j : js) check_scale(j);
  std::vector<LatticeIndex> base;
  std::vector<std::string> names;
  for (int k : sorted_unique(win.k))
    for (int l : sorted_unique(win.l))
      for (int m : sorted_unique(win.m)) {
        base.push_back({k, l, m});
        names.push_back("(k,l,m)=(" + std::to_string(k) + "," + std::to_string(l) + "," + std::to_string(m) + ")");
      }
  std::vector<GramLabel> all;
  for (int j : js)
    for (const auto& b : base) all.push_back({j, b.k, b.l, b.m});

  Core fine = gram3_core(psi, js, base, opt.slab_bytes);
  std::optional<Core> coarse;
  if (opt.recheck) coarse = gram3_core(subsample(psi), js, base, opt.slab_bytes);
  GramMatrix g;
  g.tol = opt.tol;
  finish(g, all, base.size(), fine, coarse ? &*coarse : nullptr, opt, names);
  return g;
}

GramMatrix gram_2d(const Field2D& phi, const GramWindow& win, bool twisted, const GramOptions& opt) {
  require_nonempty(win.j, "j");
  require_nonempty(win.k, "k");
  require_nonempty(win.l, "l");
  if (!(opt.tol > 0.0)) throw ConfigError("gram tolerance must be positive");
  require_finite(phi.data, "gram_2d");
  const auto js = sorted_unique(win.j);
  for (int j : js) check_scale(j);
  std::vector<KL2> base;
  std::vector<std::string> names;
  for (int k : sorted_unique(win.k))
    for (int l : sorted_unique(win.l)) {
      base.push_back({k, l});
      names.push_back("(k,l)=(" + std::to_string(k) + "," + std::to_string(l) + ")");
    }
  std::vector<GramLabel> all;
  for (int j : js)
    for (const auto& b : base) all.push_back({j, b.k, b.l, std::nullopt});

  Core fine = gram2_core(phi, js, base, twisted);
  std::optional<Core> coarse;
  if (opt.recheck) coarse = gram2_core(subsample(phi), js, base, twisted);
  GramMatrix g;
  g.tol = opt.tol;
  finish(g, all, base.size(), fine, coarse ? &*coarse : nullptr, opt, names);
  return g;
}

ConditionReport orthonormality_verdict(const GramMatrix& g) {
  ConditionReport r;
  r.id = "oracle.orthonormality";
  r.tol = g.tol;
  const Eigen::Index n = g.entries.rows();
  r.points = static_cast<int>(n * n);
  if (n == 0) {
    r.verdict = Verdict::fail;
    r.details.emplace_back("no elements", 0.0);
    return r;
  }
  double sum = 0.0;
  for (Eigen::Index a = 0; a < n; ++a) {
    double row_max = 0.0;
    for (Eigen::Index b = 0; b < n; ++b) {
      const double dev = std::abs(g.entries(a, b) - (a == b ? cplx{1.0} : cplx{}));
      row_max = std::max(row_max, dev);
      sum += dev;
    }
    r.max_dev = std::max(r.max_dev, row_max);
    r.details.emplace_back(g.labels[static_cast<std::size_t>(a)].str(), row_max);
  }
  r.mean_dev = sum / static_cast<double>(n * n);
  r.verdict = r.max_dev < g.tol ? Verdict::pass : Verdict::fail;
  return r;
}

nlohmann::ordered_json to_json(const GramMatrix& g) {
  using nlohmann::ordered_json;
  const bool has_m = !g.labels.empty() ? g.labels.front().m.has_value()
                                       : (!g.excluded.empty() && g.excluded.front().m.has_value());
  ordered_json j;
  j["index_names"] = has_m ? ordered_json::array({"j", "k", "l", "m"}) : ordered_json::array({"j", "k", "l"});
  auto label_json = [](const GramLabel& l) {
    ordered_json a = ordered_json::array({l.j, l.k, l.l});
    if (l.m) a.push_back(*l.m);
    return a;
  };
  j["labels"] = ordered_json::array();
  for (const auto& l : g.labels) j["labels"].push_back(label_json(l));
  j["tol"] = g.tol;
  ordered_json re = ordered_json::array(), im = ordered_json::array();
  for (Eigen::Index a = 0; a < g.entries.rows(); ++a) {
    ordered_json rr = ordered_json::array(), ii = ordered_json::array();
    for (Eigen::Index b = 0; b < g.entries.cols(); ++b) {
      rr.push_back(g.entries(a, b).real());
      ii.push_back(g.entries(a, b).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ii));
  }
  j["re"] = std::move(re);
  j["im"] = std::move(im);
  j["excluded"] = ordered_json::array();
  for (const auto& l : g.excluded) j["excluded"].push_back(label_json(l));
  j["quadrature_limited"] = ordered_json::array();
  for (auto [a, b] : g.quadrature_limited) j["quadrature_limited"].push_back({a, b});
  if (g.resolution_gap >= 0.0)
    j["resolution_gap"] = g.resolution_gap;
  else
    j["resolution_gap"] = nullptr;
  j["warnings"] = g.warnings;
  return j;
}

std::string to_csv(const GramMatrix& g) {
  std::ostringstream os;
  os << "label";
  for (const auto& l : g.labels) os << ",\"" << l.str() << '"';
  os << '\n';
  for (Eigen::Index a = 0; a < g.entries.rows(); ++a) {
    os << '"' << g.labels[static_cast<std::size_t>(a)].str() << '"';
    for (Eigen::Index b = 0; b < g.entries.cols(); ++b) os << ',' << format_cplx(g.entries(a, b));
    os << '\n';
  }
  return os.str();
}

void write_csv(const GramMatrix& g, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << to_csv(g);
  if (!f) throw IoError("write failed: " + path.string());
}

}  // namespace hwave
