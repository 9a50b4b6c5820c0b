#include "hwave/json_io.hpp"

#include "hwave/errors.hpp"

namespace hwave {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

template <class T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = get_as<T>(j, key);
}

}  // namespace

ordered_json to_json(const Grid1D& g) {
  ordered_json j;
  j["start"] = g.start;
  j["step"] = g.step;
  j["count"] = g.count;
  j["boundary"] = to_string(g.boundary);
  return j;
}

Grid1D grid_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("grid spec must be an object");
  const double step = get_as<double>(j, "step");
  Boundary b = Boundary::zero;
  if (j.contains("boundary")) b = boundary_from_string(get_as<std::string>(j, "boundary"));
  if (j.contains("half_width")) {
    if (b != Boundary::zero) throw ConfigError("half_width grids are closed");
    return symmetric_grid(get_as<double>(j, "half_width"), step);
  }
  return make_grid(get_as<double>(j, "start"), step, get_as<long long>(j, "count"), b);
}

ordered_json to_json(const TruncationPolicy& p) {
  ordered_json j;
  j["r_range"] = p.r_range;
  j["s_range"] = p.s_range;
  j["m_range"] = p.m_range;
  j["tail_eps"] = p.tail_eps;
  j["scale_s"] = p.scale_s;
  j["s_cap"] = p.s_cap;
  return j;
}

TruncationPolicy truncation_from_json(const json& j, TruncationPolicy p) {
  if (!j.is_object()) throw ConfigError("truncation must be an object");
  read_opt(j, "r_range", p.r_range);
  read_opt(j, "s_range", p.s_range);
  read_opt(j, "m_range", p.m_range);
  read_opt(j, "tail_eps", p.tail_eps);
  read_opt(j, "scale_s", p.scale_s);
  read_opt(j, "s_cap", p.s_cap);
  p.validate();
  return p;
}

ordered_json to_json(const IndexWindow& w) {
  ordered_json j;
  j["k"] = w.k;
  j["l"] = w.l;
  j["m"] = w.m;
  j["j"] = w.j;
  j["dj"] = w.dj;
  return j;
}

IndexWindow window_from_json(const json& j, IndexWindow w) {
  if (!j.is_object()) throw ConfigError("indices must be an object");
  read_opt(j, "k", w.k);
  read_opt(j, "l", w.l);
  read_opt(j, "m", w.m);
  read_opt(j, "j", w.j);
  read_opt(j, "dj", w.dj);
  return w;
}

ordered_json to_json(const DiagnosticCurve& c) {
  ordered_json j;
  j["name"] = c.name;
  j["label"] = c.label();
  j["axis"] = c.axis == CurveAxis::lambda ? "lambda" : "xi";
  j["cells"] = c.cells;
  ordered_json idx = ordered_json::object();
  for (const auto& [k, v] : c.indices) idx[k] = v;
  j["indices"] = idx;
  j["converged"] = c.converged;
  j["outer_range"] = c.outer_range;
  j["inner_range"] = c.inner_range;
  ordered_json re = ordered_json::array(), im = ordered_json::array();
  for (const cplx& v : c.values) {
    re.push_back(v.real());
    im.push_back(v.imag());
  }
  j["re"] = re;
  j["im"] = im;
  return j;
}

ordered_json to_json(const ConditionReport& r) {
  ordered_json j;
  j["id"] = r.id;
  j["verdict"] = to_string(r.verdict);
  j["max_dev"] = r.max_dev;
  j["mean_dev"] = r.mean_dev;
  j["tol"] = r.tol;
  j["points"] = r.points;
  ordered_json d = ordered_json::object();
  for (const auto& [k, v] : r.details) d[k] = v;
  j["details"] = d;
  return j;
}

}  // namespace hwave
