#include "hwave/designer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "hwave/errors.hpp"
#include "hwave/json_io.hpp"

namespace hwave {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sq_dev(const std::vector<DiagnosticCurve>& cs, cplx target) {
  double s = 0.0;
  for (const auto& c : cs)
    for (const cplx& v : c.values) s += std::norm(v - target);
  return s;
}

struct BudgetSpent {};

}  // namespace

void DesignProblem::validate() const {
  if (basis_size < 1) throw ConfigError("basis_size must be at least 1");
  if (budget < basis_size + 1) throw ConfigError("budget must be at least basis_size + 1");
  bool any = false;
  for (std::size_t c = 0; c < weights.size(); ++c) {
    if (!(weights[c] >= 0.0) || !std::isfinite(weights[c])) throw ConfigError("weights must be finite and >= 0");
    if (c >= 2 && !dilations()) continue;
    any = any || weights[c] > 0.0;
  }
  if (!any) throw ConfigError("weights of the included conditions are all zero");
  if (window.l.empty()) throw ConfigError("design window needs l indices");
  for (int d : window.dj)
    if (d <= 0) throw ConfigError("scale differences must be positive");
  xi.validate();
  truncation.validate();
}

DesignObjective::DesignObjective(DesignProblem p) : p_(std::move(p)) {
  p_.validate();
  basis_ = hermite_basis(p_.basis_size, p_.gx, p_.gy);
}

Field2D DesignObjective::candidate(const std::vector<double>& theta) const {
  if (theta.size() != basis_.size()) throw ConfigError("theta length differs from basis_size");
  Field2D f(p_.gx, p_.gy);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (theta[i] == 0.0) continue;
    for (std::size_t q = 0; q < f.data.size(); ++q) f.data[q] += theta[i] * basis_[i].data[q];
  }
  const double n2 = norm2(f);
  if (!(n2 > 0.0)) throw DegenerateCandidateError("design candidate has zero norm");
  const double s = 1.0 / std::sqrt(n2);
  for (cplx& v : f.data) v *= s;
  return f;
}

std::array<double, 5> DesignObjective::terms(const std::vector<double>& theta) const {
  const Field2D phi = candidate(theta);
  const auto& w = p_.weights;
  std::array<double, 5> t{};
  if (w[0] > 0.0 || w[1] > 0.0) {
    std::vector<LPair> pairs = {{0, 0}};
    for (int l : p_.window.l)
      if (l != 0) pairs.push_back({0, l});
    auto cs = compute_P(phi, 0, 0, pairs, p_.xi, p_.truncation);
    t[0] = sq_dev({cs.front()}, 1.0);
    t[1] = sq_dev(std::vector<DiagnosticCurve>(cs.begin() + 1, cs.end()), 0.0);
  }
  if (!p_.dilations()) return t;
  std::vector<LPair> pairs;
  for (int l1 : p_.window.l)
    for (int l2 : p_.window.l) pairs.push_back({l1, l2});
  if (w[2] > 0.0)
    for (int j1 : p_.window.j)
      for (int d : p_.window.dj) t[2] += sq_dev(compute_P(phi, j1, j1 + d, pairs, p_.xi, p_.truncation), 0.0);
  for (int j : p_.window.j) {
    if (j == 0) continue;
    for (int l1 : p_.window.l)
      for (int l2 : p_.window.l) {
        if (l1 == l2 && w[4] > 0.0)
          t[4] += sq_dev({compute_R(phi, j, l1, p_.xi, p_.truncation)}, r_target(j));
        else if (l1 != l2 && w[3] > 0.0)
          t[3] += sq_dev({compute_Q(phi, j, l1, l2, p_.xi, p_.truncation)}, 0.0);
      }
  }
  return t;
}

double DesignObjective::operator()(const std::vector<double>& theta) const {
  const auto t = terms(theta);
  double s = 0.0;
  for (std::size_t c = 0; c < t.size(); ++c)
    if (p_.weights[c] > 0.0) s += p_.weights[c] * t[c];
  return s;
}

double residual(const std::vector<double>& theta, const DesignProblem& problem) {
  return DesignObjective(problem)(theta);
}

std::vector<double> project(const Field2D& f, const DesignObjective& obj) {
  std::vector<double> theta;
  for (const auto& h : obj.basis()) theta.push_back(inner_product(f, h).real());
  return theta;
}

DesignResult optimize(const DesignProblem& problem, const std::optional<std::vector<double>>& init) {
  return optimize(DesignObjective(problem), init);
}

DesignResult optimize(const DesignObjective& obj, const std::optional<std::vector<double>>& init) {
  const DesignProblem& p = obj.problem();
  const auto n = static_cast<std::size_t>(p.basis_size);
  std::vector<double> x0;
  if (init) {
    x0 = *init;
    if (x0.size() != n) throw ConfigError("init length differs from basis_size");
    if (std::all_of(x0.begin(), x0.end(), [](double v) { return v == 0.0; }))
      throw DegenerateCandidateError("initial theta is zero");
  } else {
    std::mt19937_64 rng(p.seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) x0.push_back(nd(rng));
  }

  DesignResult res;
  res.residual = kInf;
  auto eval = [&](const std::vector<double>& x) {
    if (res.evaluations >= p.budget) throw BudgetSpent{};
    double f;
    try {
      f = obj(x);
    } catch (const DegenerateCandidateError&) {
      f = kInf;
    }
    if (std::isnan(f)) f = kInf;
    ++res.evaluations;
    // Roundoff-level gains (the residual is scale invariant only to an ulp)
    // do not replace the best point.
    if (f < res.residual - 1e-12 * std::abs(res.residual) || res.evaluations == 1) {
      res.residual = f;
      res.theta = x;
    }
    res.trace.push_back({f, res.residual});
    return f;
  };

  double scale = 0.0;
  for (double v : x0) scale = std::max(scale, std::abs(v));
  const double step = 0.25 * scale;

  std::vector<std::vector<double>> xs(n + 1, x0);
  std::vector<double> fs(n + 1);
  try {
    fs[0] = eval(x0);
    res.initial_residual = fs[0];
    for (std::size_t i = 0; i < n; ++i) {
      xs[i + 1][i] += step;
      fs[i + 1] = eval(xs[i + 1]);
    }
    std::vector<std::size_t> order(n + 1);
    auto point = [&](const std::vector<double>& c, const std::vector<double>& x, double t) {
      std::vector<double> y(n);
      for (std::size_t i = 0; i < n; ++i) y[i] = c[i] + t * (x[i] - c[i]);
      return y;
    };
    for (;;) {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
      {
        std::vector<std::vector<double>> x2;
        std::vector<double> f2;
        for (auto i : order) {
          x2.push_back(xs[i]);
          f2.push_back(fs[i]);
        }
        xs.swap(x2);
        fs.swap(f2);
      }
      double diam = 0.0;
      for (std::size_t v = 1; v <= n; ++v)
        for (std::size_t i = 0; i < n; ++i) diam = std::max(diam, std::abs(xs[v][i] - xs[0][i]));
      if (fs[n] - fs[0] <= 1e-14 * (1.0 + std::abs(fs[0])) && diam <= 1e-10 * (1.0 + scale)) break;

      std::vector<double> c(n, 0.0);
      for (std::size_t v = 0; v < n; ++v)
        for (std::size_t i = 0; i < n; ++i) c[i] += xs[v][i] / static_cast<double>(n);

      const auto xr = point(c, xs[n], -1.0);
      const double fr = eval(xr);
      if (fr < fs[0]) {
        const auto xe = point(c, xr, 2.0);
        const double fe = eval(xe);
        if (fe < fr) {
          xs[n] = xe;
          fs[n] = fe;
        } else {
          xs[n] = xr;
          fs[n] = fr;
        }
        continue;
      }
      if (fr < fs[n - 1]) {
        xs[n] = xr;
        fs[n] = fr;
        continue;
      }
      bool shrink;
      if (fr < fs[n]) {
        const auto xc = point(c, xr, 0.5);
        const double fc = eval(xc);
        shrink = !(fc <= fr);
        if (!shrink) {
          xs[n] = xc;
          fs[n] = fc;
        }
      } else {
        const auto xc = point(c, xs[n], 0.5);
        const double fc = eval(xc);
        shrink = !(fc < fs[n]);
        if (!shrink) {
          xs[n] = xc;
          fs[n] = fc;
        }
      }
      if (shrink)
        for (std::size_t v = 1; v <= n; ++v) {
          xs[v] = point(xs[0], xs[v], 0.5);
          fs[v] = eval(xs[v]);
        }
    }
  } catch (const BudgetSpent&) {
    res.budget_exhausted = true;
  }
  return res;
}

nlohmann::ordered_json to_json(const DesignProblem& p) {
  nlohmann::ordered_json j;
  j["basis_size"] = p.basis_size;
  j["x"] = to_json(p.gx);
  j["y"] = to_json(p.gy);
  j["window"] = to_json(p.window);
  j["weights"] = p.weights;
  j["budget"] = p.budget;
  j["seed"] = p.seed;
  j["xi_cells"] = p.xi.cells;
  j["truncation"] = to_json(p.truncation);
  return j;
}

nlohmann::ordered_json to_json(const DesignResult& r) {
  nlohmann::ordered_json j;
  j["theta"] = r.theta;
  j["residual"] = r.residual;
  j["initial_residual"] = r.initial_residual;
  j["evaluations"] = r.evaluations;
  j["budget_exhausted"] = r.budget_exhausted;
  nlohmann::ordered_json v = nlohmann::ordered_json::array(), b = nlohmann::ordered_json::array();
  for (const auto& t : r.trace) {
    v.push_back(t.value);
    b.push_back(t.best);
  }
  j["trace"] = v;
  j["trace_best"] = b;
  return j;
}

}  // namespace hwave
