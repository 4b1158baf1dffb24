#include "marchenko/config.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "marchenko/errors.hpp"

namespace marchenko {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

[[noreturn]] void fail(const std::string& key, const std::string& what) { throw ConfigError(key, what); }

void only_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(path, "expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) fail(join(path, k), "unknown key");
}

double get_double(const json& j, const std::string& key) {
  if (!j.is_number()) fail(key, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(key, "expected a finite number");
  return v;
}

int get_int(const json& j, const std::string& key) {
  if (!j.is_number_integer()) fail(key, "expected an integer");
  return j.get<int>();
}

cplx get_complex(const json& j, const std::string& key) {
  if (j.is_number()) return get_double(j, key);
  if (!j.is_array() || j.size() != 2) fail(key, "expected a complex number [re, im]");
  return {get_double(j[0], key), get_double(j[1], key)};
}

std::vector<cplx> get_complex_list(const json& j, const std::string& key) {
  if (!j.is_array()) fail(key, "expected a list of [re, im] pairs");
  std::vector<cplx> v;
  for (std::size_t k = 0; k < j.size(); ++k) v.push_back(get_complex(j[k], key + "[" + std::to_string(k) + "]"));
  return v;
}

CMatrix get_matrix(const json& j, const std::string& key) {
  if (!j.is_array()) fail(key, "expected a list of rows");
  const auto rows = Eigen::Index(j.size());
  Eigen::Index cols = -1;
  for (const auto& row : j) {
    if (!row.is_array()) fail(key, "each row must be a list");
    if (cols >= 0 && Eigen::Index(row.size()) != cols) fail(key, "rows have different lengths");
    cols = Eigen::Index(row.size());
  }
  CMatrix m(rows, std::max<Eigen::Index>(cols, 0));
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = get_complex(j[r][c], key);
  return m;
}

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

json complex_list_json(const std::vector<cplx>& v) {
  json a = json::array();
  for (const auto& z : v) a.push_back(complex_json(z));
  return a;
}

json matrix_json(const CMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_json(m(r, c)));
    rows.push_back(row);
  }
  return rows;
}

TripletSpec parse_triplet(const json& j, const std::string& path, Side side) {
  TripletSpec t;
  if (j.is_array()) {
    std::vector<BoundStateSpec> states;
    for (std::size_t k = 0; k < j.size(); ++k) {
      const std::string p = path + "[" + std::to_string(k) + "]";
      const auto& e = j[k];
      only_keys(e, p, {"lambda", "multiplicity", "norming"});
      BoundStateSpec s;
      s.side = side;
      if (!e.contains("lambda")) fail(join(p, "lambda"), "missing");
      s.lambda = get_complex(e["lambda"], join(p, "lambda"));
      if (e.contains("multiplicity")) s.multiplicity = get_int(e["multiplicity"], join(p, "multiplicity"));
      if (s.multiplicity < 1) fail(join(p, "multiplicity"), "must be >= 1");
      if (!e.contains("norming")) fail(join(p, "norming"), "missing");
      s.norming_constants = get_complex_list(e["norming"], join(p, "norming"));
      if (int(s.norming_constants.size()) != s.multiplicity)
        fail(join(p, "norming"), "needs one constant per unit of multiplicity");
      states.push_back(std::move(s));
    }
    t.form = std::move(states);
    return t;
  }
  only_keys(j, path, {"A", "B", "C"});
  for (const char* k : {"A", "B", "C"})
    if (!j.contains(k)) fail(join(path, k), "missing");
  MatrixTriplet m{get_matrix(j["A"], join(path, "A")), get_matrix(j["B"], join(path, "B")),
                  get_matrix(j["C"], join(path, "C"))};
  const auto n = m.A.rows();
  if (m.A.cols() != n) fail(join(path, "A"), "must be square");
  if (n == 0) {
    m = MatrixTriplet::empty();
  } else {
    if (m.B.rows() != n || m.B.cols() != 1) fail(join(path, "B"), "must be a column with as many rows as A");
    if (m.C.rows() != 1 || m.C.cols() != n) fail(join(path, "C"), "must be a single row as long as A");
  }
  t.form = std::move(m);
  return t;
}

json triplet_json(const TripletSpec& t) {
  if (const auto* states = std::get_if<std::vector<BoundStateSpec>>(&t.form)) {
    json a = json::array();
    for (const auto& s : *states)
      a.push_back({{"lambda", complex_json(s.lambda)},
                   {"multiplicity", s.multiplicity},
                   {"norming", complex_list_json(s.norming_constants)}});
    return a;
  }
  const auto& m = std::get<MatrixTriplet>(t.form);
  return {{"A", matrix_json(m.A)}, {"B", matrix_json(m.B)}, {"C", matrix_json(m.C)}};
}

ReflectionProfile parse_profile(const json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) fail(join(path, "type"), "missing or not a string");
  const std::string type = j["type"];
  if (type == "zero") {
    only_keys(j, path, {"type"});
    return ZeroProfile{};
  }
  if (type == "rational") {
    only_keys(j, path, {"type", "terms"});
    RationalProfile r;
    if (!j.contains("terms") || !j["terms"].is_array()) fail(join(path, "terms"), "expected a list");
    for (std::size_t k = 0; k < j["terms"].size(); ++k) {
      const std::string p = join(path, "terms") + "[" + std::to_string(k) + "]";
      const auto& e = j["terms"][k];
      only_keys(e, p, {"amplitude", "pole", "order"});
      RationalTerm t;
      if (!e.contains("amplitude") || !e.contains("pole")) fail(p, "needs amplitude and pole");
      t.amplitude = get_complex(e["amplitude"], join(p, "amplitude"));
      t.pole = get_complex(e["pole"], join(p, "pole"));
      if (e.contains("order")) t.order = get_int(e["order"], join(p, "order"));
      if (t.order < 1) fail(join(p, "order"), "must be >= 1");
      if (t.pole.imag() == 0) fail(join(p, "pole"), "must be off the real axis");
      r.terms.push_back(t);
    }
    return r;
  }
  if (type == "gaussian") {
    only_keys(j, path, {"type", "amplitude", "width", "center"});
    GaussianProfile g;
    if (j.contains("amplitude")) g.amplitude = get_complex(j["amplitude"], join(path, "amplitude"));
    if (j.contains("width")) g.width = get_double(j["width"], join(path, "width"));
    if (j.contains("center")) g.center = get_double(j["center"], join(path, "center"));
    if (!(g.width > 0)) fail(join(path, "width"), "must be positive");
    return g;
  }
  if (type == "sampled") {
    only_keys(j, path, {"type", "lambda_min", "dlambda", "values"});
    SampledProfile s;
    for (const char* k : {"lambda_min", "dlambda", "values"})
      if (!j.contains(k)) fail(join(path, k), "missing");
    s.lambda_min = get_double(j["lambda_min"], join(path, "lambda_min"));
    s.dlambda = get_double(j["dlambda"], join(path, "dlambda"));
    s.values = get_complex_list(j["values"], join(path, "values"));
    if (!(s.dlambda > 0)) fail(join(path, "dlambda"), "must be positive");
    if (s.values.size() < 2) fail(join(path, "values"), "needs at least two samples");
    return s;
  }
  fail(join(path, "type"), "unknown profile type '" + type + "'");
}

json profile_json(const ReflectionProfile& p) {
  if (std::holds_alternative<ZeroProfile>(p)) return {{"type", "zero"}};
  if (const auto* r = std::get_if<RationalProfile>(&p)) {
    json terms = json::array();
    for (const auto& t : r->terms)
      terms.push_back({{"amplitude", complex_json(t.amplitude)}, {"pole", complex_json(t.pole)}, {"order", t.order}});
    return {{"type", "rational"}, {"terms", terms}};
  }
  if (const auto* g = std::get_if<GaussianProfile>(&p))
    return {{"type", "gaussian"}, {"amplitude", complex_json(g->amplitude)}, {"width", g->width}, {"center", g->center}};
  const auto& s = std::get<SampledProfile>(p);
  return {{"type", "sampled"}, {"lambda_min", s.lambda_min}, {"dlambda", s.dlambda}, {"values", complex_list_json(s.values)}};
}

GridSpec parse_grid(const json& j, const std::string& path) {
  only_keys(j, path, {"min", "max", "count"});
  GridSpec g;
  for (const char* k : {"min", "max", "count"})
    if (!j.contains(k)) fail(join(path, k), "missing");
  g.min = get_double(j["min"], join(path, "min"));
  g.max = get_double(j["max"], join(path, "max"));
  g.count = get_int(j["count"], join(path, "count"));
  if (g.count < 1) fail(join(path, "count"), "must be >= 1");
  if (g.count == 1 && g.max != g.min) fail(join(path, "max"), "must equal min for a single point");
  if (g.count > 1 && !(g.max > g.min)) fail(join(path, "max"), "must exceed min");
  return g;
}

json grid_json(const GridSpec& g) { return {{"min", g.min}, {"max", g.max}, {"count", g.count}}; }

const std::pair<Command, const char*> kCommands[] = {
    {Command::reflectionless, "reflectionless"}, {Command::marchenko, "marchenko"}, {Command::direct, "direct"},
    {Command::bridge, "bridge"},                 {Command::roundtrip, "roundtrip"}, {Command::verify, "verify"},
};

}  // namespace

const char* command_name(Command c) {
  for (const auto& [k, n] : kCommands)
    if (k == c) return n;
  return "?";
}

std::string rule_name(GridRule r) {
  switch (r) {
    case GridRule::simpson: return "simpson";
    case GridRule::boole: return "boole";
    case GridRule::gregory: return "gregory";
  }
  return "?";
}

MatrixTriplet resolve(const TripletSpec& t, Side side) {
  if (const auto* m = std::get_if<MatrixTriplet>(&t.form)) return *m;
  const auto& states = std::get<std::vector<BoundStateSpec>>(t.form);
  if (states.empty()) return MatrixTriplet::empty();
  auto s = states;
  for (auto& b : s) b.side = side;
  return assemble_triplet(std::move(s), side);
}

std::vector<double> GridSpec::points() const {
  std::vector<double> p(std::size_t(std::max(count, 0)));
  for (int k = 0; k < count; ++k) p[k] = count == 1 ? min : min + (max - min) * k / (count - 1);
  return p;
}

RunConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("(file)", std::string("not valid JSON: ") + e.what());
  }
  only_keys(j, "", {"command", "plus", "minus", "reflection_plus", "reflection_minus", "field", "x_grid", "zeta_grid",
                    "window", "numeric", "bound_state_search", "probes", "tol", "threads", "format", "out", "name"});
  RunConfig c;
  if (!j.contains("command") || !j["command"].is_string()) fail("command", "missing or not a string");
  {
    const std::string name = j["command"];
    bool found = false;
    for (const auto& [k, n] : kCommands)
      if (name == n) {
        c.command = k;
        found = true;
      }
    if (!found) fail("command", "unknown command '" + name + "'");
  }
  if (j.contains("plus")) c.plus = parse_triplet(j["plus"], "plus", Side::plus);
  if (j.contains("minus")) c.minus = parse_triplet(j["minus"], "minus", Side::minus);
  if (j.contains("reflection_plus")) c.reflection_plus = parse_profile(j["reflection_plus"], "reflection_plus");
  if (j.contains("reflection_minus")) c.reflection_minus = parse_profile(j["reflection_minus"], "reflection_minus");
  if (j.contains("field")) {
    const auto& f = j["field"];
    only_keys(f, "field", {"x0", "h", "q", "r"});
    FieldSamples s;
    for (const char* k : {"x0", "h", "q", "r"})
      if (!f.contains(k)) fail(join("field", k), "missing");
    s.x0 = get_double(f["x0"], "field.x0");
    s.h = get_double(f["h"], "field.h");
    s.q = get_complex_list(f["q"], "field.q");
    s.r = get_complex_list(f["r"], "field.r");
    if (!(s.h > 0)) fail("field.h", "must be positive");
    if (s.q.size() < 4) fail("field.q", "needs at least four samples");
    if (s.r.size() != s.q.size()) fail("field.r", "must have as many samples as field.q");
    c.field = std::move(s);
  }
  if (j.contains("x_grid")) c.x_grid = parse_grid(j["x_grid"], "x_grid");
  if (j.contains("zeta_grid")) c.zeta_grid = parse_grid(j["zeta_grid"], "zeta_grid");
  if (j.contains("window")) {
    const auto& w = j["window"];
    only_keys(w, "window", {"min", "max", "step"});
    if (w.contains("min")) c.window.min = get_double(w["min"], "window.min");
    if (w.contains("max")) c.window.max = get_double(w["max"], "window.max");
    if (w.contains("step")) c.window.step = get_double(w["step"], "window.step");
    if (!(c.window.max > c.window.min)) fail("window.max", "must exceed window.min");
    if (!(c.window.step > 0)) fail("window.step", "must be positive");
  }
  if (j.contains("numeric")) {
    const auto& n = j["numeric"];
    only_keys(n, "numeric", {"n", "L", "rule"});
    if (n.contains("n")) c.numeric.n = get_int(n["n"], "numeric.n");
    if (n.contains("L")) c.numeric.L = get_double(n["L"], "numeric.L");
    if (n.contains("rule")) {
      if (!n["rule"].is_string()) fail("numeric.rule", "expected a string");
      const std::string r = n["rule"];
      if (r == "simpson") c.numeric.rule = GridRule::simpson;
      else if (r == "boole") c.numeric.rule = GridRule::boole;
      else if (r == "gregory") c.numeric.rule = GridRule::gregory;
      else fail("numeric.rule", "expected simpson, boole or gregory");
    }
    if (!(c.numeric.L > 0)) fail("numeric.L", "must be positive");
    const int nn = c.numeric.n;
    const bool ok = nn > 0 && (c.numeric.rule == GridRule::simpson   ? nn % 2 == 0
                               : c.numeric.rule == GridRule::boole ? nn % 4 == 0
                                                                   : nn >= 16);
    if (!ok) fail("numeric.n", "incompatible with the rule (simpson: even, boole: multiple of 4, gregory: >= 16)");
  }
  if (j.contains("bound_state_search")) {
    if (!j["bound_state_search"].is_boolean()) fail("bound_state_search", "expected true or false");
    c.bound_state_search = j["bound_state_search"];
  }
  if (j.contains("probes")) {
    if (!j["probes"].is_array()) fail("probes", "expected a list of numbers");
    for (const auto& p : j["probes"]) c.probes.push_back(get_double(p, "probes"));
  }
  if (j.contains("tol")) {
    c.tol = get_double(j["tol"], "tol");
    if (!(c.tol > 0)) fail("tol", "must be positive");
  }
  if (j.contains("threads")) {
    c.threads = get_int(j["threads"], "threads");
    if (c.threads < 0) fail("threads", "must be >= 0");
  }
  if (j.contains("format")) {
    if (!j["format"].is_string()) fail("format", "expected \"csv\" or \"json\"");
    const std::string f = j["format"];
    if (f == "csv") c.format = OutputFormat::csv;
    else if (f == "json") c.format = OutputFormat::json;
    else fail("format", "expected \"csv\" or \"json\"");
  }
  if (j.contains("out")) {
    if (!j["out"].is_string()) fail("out", "expected a path");
    c.out = j["out"];
  }
  if (j.contains("name")) {
    if (!j["name"].is_string()) fail("name", "expected a string");
    c.name = j["name"];
  }
  return c;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string serialize(const RunConfig& c) {
  json j;
  j["command"] = command_name(c.command);
  j["plus"] = triplet_json(c.plus);
  j["minus"] = triplet_json(c.minus);
  j["reflection_plus"] = profile_json(c.reflection_plus);
  j["reflection_minus"] = profile_json(c.reflection_minus);
  if (c.field)
    j["field"] = {{"x0", c.field->x0}, {"h", c.field->h}, {"q", complex_list_json(c.field->q)},
                  {"r", complex_list_json(c.field->r)}};
  j["x_grid"] = grid_json(c.x_grid);
  j["zeta_grid"] = grid_json(c.zeta_grid);
  j["window"] = {{"min", c.window.min}, {"max", c.window.max}, {"step", c.window.step}};
  j["numeric"] = {{"n", c.numeric.n}, {"L", c.numeric.L}, {"rule", rule_name(c.numeric.rule)}};
  j["bound_state_search"] = c.bound_state_search;
  j["probes"] = c.probes;
  j["tol"] = c.tol;
  j["threads"] = c.threads;
  j["format"] = c.format == OutputFormat::csv ? "csv" : "json";
  j["out"] = c.out;
  j["name"] = c.name;
  return j.dump(2) + "\n";
}

}  // namespace marchenko
