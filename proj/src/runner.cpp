#include "marchenko/runner.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "marchenko/akns.hpp"
#include "marchenko/errors.hpp"
#include "marchenko/quadrature.hpp"

namespace marchenko {

using Meta = nlohmann::ordered_json;

namespace {

Meta cjson(cplx z) { return Meta::array({z.real(), z.imag()}); }

Meta matrix_json(const CMatrix& m) {
  Meta rows = Meta::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Meta row = Meta::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(cjson(m(r, c)));
    rows.push_back(row);
  }
  return rows;
}

Meta triplet_json(const MatrixTriplet& t) {
  return {{"A", matrix_json(t.A)}, {"B", matrix_json(t.B)}, {"C", matrix_json(t.C)}};
}

// Poles of T (plus) or Tbar (minus): the eigenvalues of A or Abar with the
// Jordan-chain lengths as multiplicities.
Meta poles_json(const MatrixTriplet& t, Side side) {
  Meta out = Meta::array();
  if (t.size() == 0) return out;
  try {
    for (const auto& s : read_off(t, side))
      out.push_back({{"lambda", cjson(s.lambda)}, {"multiplicity", s.multiplicity}});
  } catch (const ValidationError&) {
    const Eigen::ComplexEigenSolver<CMatrix> es(t.A, false);
    for (Eigen::Index k = 0; k < t.A.rows(); ++k)
      out.push_back({{"lambda", cjson(es.eigenvalues()(k))}, {"multiplicity", 1}});
  }
  return out;
}

void write_json(const Meta& j, int indent, std::string& s) {
  const std::string pad(indent, ' '), inner(indent + 2, ' ');
  switch (j.type()) {
    case Meta::value_t::object: {
      if (j.empty()) {
        s += "{}";
        return;
      }
      s += "{\n";
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) s += ",\n";
        first = false;
        s += inner + Meta(k).dump() + ": ";
        write_json(v, indent + 2, s);
      }
      s += "\n" + pad + "}";
      return;
    }
    case Meta::value_t::array: {
      // Scalars and complex pairs stay on one line; so does a matrix row.
      auto pair = [](const Meta& v) { return v.is_array() && v.size() == 2 && !v[0].is_structured(); };
      bool flat = true;
      for (const auto& v : j) flat = flat && (!v.is_structured() || pair(v));
      if (j.empty()) {
        s += "[]";
        return;
      }
      if (flat) {
        s += "[";
        for (std::size_t k = 0; k < j.size(); ++k) {
          if (k) s += ", ";
          write_json(j[k], 0, s);
        }
        s += "]";
        return;
      }
      s += "[\n";
      for (std::size_t k = 0; k < j.size(); ++k) {
        if (k) s += ",\n";
        s += inner;
        write_json(j[k], indent + 2, s);
      }
      s += "\n" + pad + "]";
      return;
    }
    case Meta::value_t::number_float: {
      const double v = j.get<double>();
      s += std::isfinite(v) ? format_number(v) : "null";
      return;
    }
    default:
      s += j.dump();
  }
}

std::string dump(const Meta& j) {
  std::string s;
  write_json(j, 0, s);
  return s + "\n";
}

Column num(std::string name, std::vector<double> v) { return {std::move(name), std::move(v), {}, false}; }

Column txt(std::string name, std::vector<std::string> v) { return {std::move(name), {}, std::move(v), true}; }

int thread_count(const RunConfig& c) { return c.threads > 0 ? c.threads : default_threads(); }

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string cfmt(cplx z) {
  char buf[80];
  std::snprintf(buf, sizeof buf, "%.6g %c %.6gi", z.real(), z.imag() < 0 ? '-' : '+', std::abs(z.imag()));
  return buf;
}

struct Pair {
  MatrixTriplet plus, minus;
  PairDiagnostics diag;
};

Pair resolve_pair(const RunConfig& c, bool throw_on_error = true) {
  Pair p{resolve(c.plus, Side::plus), resolve(c.minus, Side::minus), {}};
  p.diag = validate_pair(p.plus, p.minus, true);
  if (throw_on_error && !p.diag.ok()) {
    std::string msg = "invalid triplet pair:";
    for (const auto& e : p.diag.errors) msg += " " + e + ";";
    throw ValidationError(msg);
  }
  return p;
}

Meta warnings_json(const PairDiagnostics& d) {
  Meta w = Meta::array();
  for (const auto& s : d.warnings) w.push_back(s);
  return w;
}

void potential_columns(RunOutput& out, const std::vector<double>& xs, const std::vector<cplx>& q,
                       const std::vector<cplx>& r) {
  std::vector<double> rq, iq, aq, rr, ir, ar;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    rq.push_back(q[k].real());
    iq.push_back(q[k].imag());
    aq.push_back(std::abs(q[k]));
    rr.push_back(r[k].real());
    ir.push_back(r[k].imag());
    ar.push_back(std::abs(r[k]));
  }
  out.columns = {num("x", xs), num("re_q", rq), num("im_q", iq), num("abs_q", aq),
                 num("re_r", rr), num("im_r", ir), num("abs_r", ar)};
}

Meta mu_json(const ReflectionlessModel& m) {
  try {
    const auto e = E_and_mu(m);
    return {{"mu", cjson(e.mu)}, {"mu_principal", cjson(e.mu_principal)}, {"phase", cjson(e.phase)}};
  } catch (const IntegrationError& e) {
    return {{"mu", nullptr}, {"note", std::string("mu undefined: ") + e.what()}};
  }
}

RunOutput run_reflectionless(const RunConfig& c) {
  const auto p = resolve_pair(c);
  const auto m = build_model(p.plus, p.minus);
  const auto xs = c.x_grid.points();
  const auto s = sample_potentials(m, xs, thread_count(c));
  RunOutput out;
  potential_columns(out, xs, s.q, s.r);
  Meta meta;
  meta["command"] = "reflectionless";
  meta.update(mu_json(m));
  meta["plus"] = triplet_json(p.plus);
  meta["minus"] = triplet_json(p.minus);
  meta["poles_T"] = poles_json(p.plus, Side::plus);
  meta["poles_Tbar"] = poles_json(p.minus, Side::minus);
  meta["warnings"] = warnings_json(p.diag);
  out.metadata_json = dump(meta);
  out.summary = "reflectionless: " + std::to_string(xs.size()) + " points";
  if (meta.contains("mu_principal") && !meta["mu_principal"].is_null())
    out.summary += ", mu = " +
                   cfmt({meta["mu_principal"][0].get<double>(), meta["mu_principal"][1].get<double>()}) +
                   " (principal)";
  return out;
}

RunOutput run_marchenko(const RunConfig& c) {
  const auto p = resolve_pair(c);
  ScatteringDataset data{c.reflection_plus, c.reflection_minus, p.plus, p.minus};
  const OmegaKernel omega(data);
  RecoverOptions opts;
  opts.grid.n = c.numeric.n;
  opts.grid.L = c.numeric.L;
  opts.grid.rule = c.numeric.rule;
  opts.threads = thread_count(c);
  const auto xs = c.x_grid.points();
  const auto f = recover(omega, xs, opts);
  RunOutput out;
  potential_columns(out, xs, f.q, f.r);
  Meta meta;
  meta["command"] = "marchenko";
  meta["mu"] = cjson(f.mu);
  meta["mu_principal"] = cjson(f.mu_principal);
  meta["phase"] = cjson(f.phase);
  meta["rule"] = rule_name(c.numeric.rule);
  meta["n"] = c.numeric.n;
  meta["L"] = c.numeric.L;
  meta["tail_left"] = f.left_end;
  meta["tail_right"] = f.right_end;
  meta["left_tail_extrapolated"] = f.left_extrapolated;
  meta["plus"] = triplet_json(p.plus);
  meta["minus"] = triplet_json(p.minus);
  meta["poles_T"] = poles_json(p.plus, Side::plus);
  meta["poles_Tbar"] = poles_json(p.minus, Side::minus);
  meta["warnings"] = warnings_json(p.diag);
  out.metadata_json = dump(meta);
  out.summary = "marchenko: " + std::to_string(xs.size()) + " points, mu = " + cfmt(f.mu_principal) +
                " (principal)";
  return out;
}

struct FieldSource {
  PotentialField field;
  std::optional<ReflectionlessModel> model;
  Pair pair;
};

FieldSource field_source(const RunConfig& c) {
  FieldSource s;
  if (c.field) {
    s.field = field_from_samples(c.field->x0, c.field->h, c.field->q, c.field->r);
    return s;
  }
  s.pair = resolve_pair(c);
  s.model = build_model(s.pair.plus, s.pair.minus);
  s.field = field_from_model(*s.model, c.window.min, c.window.max, c.window.step, thread_count(c));
  return s;
}

std::vector<double> zeta_points(const RunConfig& c) {
  auto z = c.zeta_grid.points();
  for (double v : z)
    if (v == 0.0) throw ConfigError("zeta_grid", "must not contain zeta = 0");
  return z;
}

OdeOptions ode_options(const RunConfig& c) { return {c.tol, c.tol * 1e-2}; }

Meta zeros_json(const std::vector<LocatedZero>& zs) {
  Meta a = Meta::array();
  for (const auto& z : zs)
    a.push_back({{"lambda", cjson(z.lambda)}, {"multiplicity", z.multiplicity}, {"at_least", z.at_least}});
  return a;
}

SearchBox minus_box() {
  const SearchBox b;
  return {b.re_min, b.re_max, -b.im_max, -b.im_min};
}

std::vector<ScatteringCoefficients> sweep(const PotentialField& f, const std::vector<double>& zs, const RunConfig& c) {
  std::vector<ScatteringCoefficients> out(zs.size());
  const auto opts = ode_options(c);
  parallel_for(int(zs.size()), thread_count(c), [&](int k) { out[k] = scattering_coefficients(f, zs[k], opts); });
  return out;
}

void add_complex(RunOutput& out, const std::string& name, const std::vector<cplx>& v) {
  std::vector<double> re, im;
  for (const auto& z : v) {
    re.push_back(z.real());
    im.push_back(z.imag());
  }
  out.columns.push_back(num("re_" + name, re));
  out.columns.push_back(num("im_" + name, im));
}

RunOutput run_direct(const RunConfig& c) {
  const auto src = field_source(c);
  const auto zs = zeta_points(c);
  const auto co = sweep(src.field, zs, c);
  RunOutput out;
  out.columns.push_back(num("zeta", zs));
  std::vector<cplx> T, Tb, R, Rb, L, Lb;
  for (const auto& s : co) {
    T.push_back(s.T);
    Tb.push_back(s.Tbar);
    R.push_back(s.R);
    Rb.push_back(s.Rbar);
    L.push_back(s.L);
    Lb.push_back(s.Lbar);
  }
  add_complex(out, "T", T);
  add_complex(out, "Tbar", Tb);
  add_complex(out, "R", R);
  add_complex(out, "Rbar", Rb);
  add_complex(out, "L", L);
  add_complex(out, "Lbar", Lb);
  Meta meta;
  meta["command"] = "direct";
  meta["window"] = {src.field.x_min, src.field.x_max};
  meta["tail_level"] = src.field.tail_level();
  const double xs[1] = {src.field.x_max};
  const auto inv = field_invariants(src.field, xs);
  meta["mu"] = cjson(inv.mu);
  meta["mu_principal"] = cjson(inv.mu_principal);
  Meta warnings = warnings_json(src.pair.diag);
  if (src.field.tail_level() > 1e-8)
    warnings.push_back("field is not small at the window ends (" + fmt(src.field.tail_level()) +
                       "); coefficients describe the truncated field");
  meta["warnings"] = warnings;
  if (c.bound_state_search) {
    SearchOptions so;
    so.ode = ode_options(c);
    meta["bound_states_plus"] = zeros_json(locate_bound_states(src.field, SearchBox{}, Side::plus, so));
    meta["bound_states_minus"] = zeros_json(locate_bound_states(src.field, minus_box(), Side::minus, so));
  }
  out.metadata_json = dump(meta);
  out.summary = "direct: " + std::to_string(zs.size()) + " zeta values";
  return out;
}

RunOutput run_bridge(const RunConfig& c) {
  const auto src = field_source(c);
  const auto zs = zeta_points(c);
  const auto opts = ode_options(c);
  const auto uv = to_akns(src.field, AknsFlavor::uv);
  const auto ps = to_akns(src.field, AknsFlavor::ps);
  const auto uv0 = akns_coefficients(uv, 0.0, opts);
  const auto ps0 = akns_coefficients(ps, 0.0, opts);
  const auto direct = sweep(src.field, zs, c);

  std::vector<AknsScattering> a(zs.size()), b(zs.size());
  parallel_for(int(zs.size()), thread_count(c), [&](int k) {
    a[k] = akns_coefficients(uv, zs[k] * zs[k], opts);
    b[k] = akns_coefficients(ps, zs[k] * zs[k], opts);
  });
  auto diff = [](const ScatteringCoefficients& x, const ScatteringCoefficients& y) {
    return std::max({std::abs(x.T - y.T), std::abs(x.Tbar - y.Tbar), std::abs(x.R - y.R), std::abs(x.Rbar - y.Rbar),
                     std::abs(x.L - y.L), std::abs(x.Lbar - y.Lbar)});
  };
  RunOutput out;
  out.columns.push_back(num("zeta", zs));
  std::vector<double> lam, err_uv, err_ps;
  std::vector<cplx> T, Tb, R, Rb, L, Lb;
  for (std::size_t k = 0; k < zs.size(); ++k) {
    lam.push_back(zs[k] * zs[k]);
    T.push_back(a[k].T);
    Tb.push_back(a[k].Tbar);
    R.push_back(a[k].R);
    Rb.push_back(a[k].Rbar);
    L.push_back(a[k].L);
    Lb.push_back(a[k].Lbar);
    err_uv.push_back(diff(from_akns_scattering(a[k], zs[k], uv0.T), direct[k]));
    err_ps.push_back(diff(from_akns_scattering(b[k], zs[k], ps0.T), direct[k]));
  }
  out.columns.push_back(num("lambda", lam));
  add_complex(out, "T_uv", T);
  add_complex(out, "Tbar_uv", Tb);
  add_complex(out, "R_uv", R);
  add_complex(out, "Rbar_uv", Rb);
  add_complex(out, "L_uv", L);
  add_complex(out, "Lbar_uv", Lb);
  out.columns.push_back(num("dictionary_error_uv", err_uv));
  out.columns.push_back(num("dictionary_error_ps", err_ps));

  // Pointwise products against sigma on the x grid (clipped to the window).
  std::vector<double> xs;
  for (double x : c.x_grid.points())
    if (x >= src.field.x_min && x <= src.field.x_max) xs.push_back(x);
  const auto inv = field_invariants(src.field, xs);
  double uv_sigma = 0, ps_sigma = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    uv_sigma = std::max(uv_sigma, std::abs(uv.first(xs[k]) * uv.second(xs[k]) - inv.sigma[k]));
    ps_sigma = std::max(ps_sigma, std::abs(ps.first(xs[k]) * ps.second(xs[k]) - inv.sigma[k]));
  }
  const auto full = field_invariants(src.field, std::vector<double>{src.field.x_max});
  Meta meta;
  meta["command"] = "bridge";
  meta["T_uv_at_0"] = cjson(uv0.T);
  meta["Tbar_uv_at_0"] = cjson(uv0.Tbar);
  meta["T_ps_at_0"] = cjson(ps0.T);
  meta["phase_from_mu"] = cjson(std::exp(0.5 * I_unit * full.mu));
  meta["mu_principal"] = cjson(full.mu_principal);
  meta["max_abs_uv_minus_sigma"] = uv_sigma;
  meta["max_abs_ps_minus_sigma"] = ps_sigma;
  meta["warnings"] = warnings_json(src.pair.diag);
  out.metadata_json = dump(meta);
  out.summary = "bridge: T_uv(0) = " + cfmt(uv0.T);
  return out;
}

double nearest(cplx z, const std::vector<LocatedZero>& found) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& f : found) d = std::min(d, std::abs(f.lambda - z));
  return d;
}

RunOutput run_roundtrip(const RunConfig& c) {
  if (c.field) throw ConfigError("field", "roundtrip starts from triplets, not from samples");
  const auto src = field_source(c);
  const auto& m = *src.model;
  const auto zs = zeta_points(c);
  const auto co = sweep(src.field, zs, c);
  const cplx phase = E_and_mu(m).phase;
  std::vector<double> aR, aRb, eT, eTb;
  for (std::size_t k = 0; k < zs.size(); ++k) {
    const auto exact = transmissions(m, zs[k], phase);
    aR.push_back(std::abs(co[k].R));
    aRb.push_back(std::abs(co[k].Rbar));
    eT.push_back(std::abs(co[k].T - exact.T));
    eTb.push_back(std::abs(co[k].Tbar - exact.Tbar));
  }
  SearchOptions so;
  so.ode = ode_options(c);
  const auto zp = locate_bound_states(src.field, SearchBox{}, Side::plus, so);
  const auto zm = locate_bound_states(src.field, minus_box(), Side::minus, so);
  double pole_err = 0;
  Meta expected = Meta::array();
  for (const auto& [t, side] : {std::pair{src.pair.plus, Side::plus}, std::pair{src.pair.minus, Side::minus}}) {
    if (t.size() == 0) continue;
    for (const auto& s : read_off(t, side)) {
      pole_err = std::max(pole_err, nearest(s.lambda, side == Side::plus ? zp : zm));
      expected.push_back({{"lambda", cjson(s.lambda)}, {"multiplicity", s.multiplicity}});
    }
  }
  const std::size_t n_expected = expected.size();
  RunOutput out;
  out.columns = {num("zeta", zs), num("abs_R", aR), num("abs_Rbar", aRb), num("T_error", eT), num("Tbar_error", eTb)};
  auto mx = [](const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); };
  Meta meta;
  meta["command"] = "roundtrip";
  meta["max_abs_R"] = mx(aR);
  meta["max_abs_Rbar"] = mx(aRb);
  meta["max_T_error"] = mx(eT);
  meta["max_Tbar_error"] = mx(eTb);
  meta["expected_bound_states"] = expected;
  meta["found_plus"] = zeros_json(zp);
  meta["found_minus"] = zeros_json(zm);
  meta["bound_state_count_matches"] = (zp.size() + zm.size() == n_expected);
  meta["max_pole_error"] = pole_err;
  meta["warnings"] = warnings_json(src.pair.diag);
  out.metadata_json = dump(meta);
  out.summary = "roundtrip: max |R| = " + fmt(mx(aR)) + ", max |Rbar| = " + fmt(mx(aRb)) +
                ", max pole error = " + fmt(pole_err);
  return out;
}

// ---------------------------------------------------------------------------
// verify

struct Check {
  std::string name;
  double value;
  double threshold;
  std::string status;  // pass, fail, info, skipped, error
  std::string note;
};

Check bounded(std::string name, double value, double threshold, std::string note = {}) {
  return {std::move(name), value, threshold, value <= threshold ? "pass" : "fail", std::move(note)};
}

template <class F>
void guarded(std::vector<Check>& out, const std::string& name, double threshold, F&& body) {
  try {
    out.push_back(body());
  } catch (const std::exception& e) {
    out.push_back({name, std::numeric_limits<double>::quiet_NaN(), threshold, "error", e.what()});
  }
}

double sylvester_residual(const ReflectionlessModel& m) {
  const auto& P = m.plus;
  const auto& N = m.minus;
  if (P.size() == 0 || N.size() == 0) return 0;
  const CMatrix r1 = I_unit * m.M * N.A - I_unit * P.A * m.M - P.B * N.C;
  const CMatrix r2 = I_unit * N.A * m.Mbar - I_unit * m.Mbar * P.A - N.B * P.C;
  const double scale = std::max({1.0, (P.B * N.C).norm(), (N.B * P.C).norm()});
  return std::max(r1.norm(), r2.norm()) / scale;
}

// |d psi/dx - M psi| relative to |psi| (sixth-order differences, step 1e-3).
double jost_residual(const ReflectionlessModel& m, cplx zeta, double x) {
  const cplx lam = zeta * zeta;
  const auto G = G_of_x(m, x);
  const auto j = jost(m, zeta, x, G);
  const auto pot = potentials(m, x);
  double worst = 0;
  for (int which = 0; which < 2; ++which) {
    const Vec2 v = which == 0 ? Vec2(j.psi) : Vec2(j.psibar);
    for (int comp = 0; comp < 2; ++comp) {
      const cplx d = central_difference6(
          [&](double z) {
            const auto jj = jost(m, zeta, z);
            return (which == 0 ? jj.psi : jj.psibar)(comp);
          },
          x, 1e-3);
      const cplx rhs = comp == 0 ? -I_unit * lam * v(0) + zeta * pot.q * v(1) : zeta * pot.r * v(0) + I_unit * lam * v(1);
      worst = std::max(worst, std::abs(d - rhs) / std::max(1.0, v.norm()));
    }
  }
  return worst;
}

RunOutput run_verify(const RunConfig& c) {
  std::vector<Check> checks;
  Meta meta;
  meta["command"] = "verify";
  Meta warnings = Meta::array();

  std::optional<ReflectionlessModel> model;
  if (!c.field) {
    const auto p = resolve_pair(c, false);
    for (const auto& w : p.diag.warnings) warnings.push_back(w);
    checks.push_back({"pair_validation", double(p.diag.errors.size()), 0, p.diag.ok() ? "pass" : "fail",
                      p.diag.ok() ? std::string() : p.diag.errors.front()});
    if (p.diag.ok()) {
      guarded(checks, "sylvester_residual", 1e-12, [&] {
        model = build_model(p.plus, p.minus);
        return bounded("sylvester_residual", sylvester_residual(*model), 1e-12);
      });
    }
  }
  if (model) {
    const auto& m = *model;
    const auto xs = c.x_grid.points();
    guarded(checks, "jost_ode_residual", 1e-6, [&] {
      double worst = 0;
      const std::size_t stride = std::max<std::size_t>(1, xs.size() / 5);
      for (double zeta : {0.7, 1.9})
        for (std::size_t k = 0; k < xs.size(); k += stride) worst = std::max(worst, jost_residual(m, zeta, xs[k]));
      return bounded("jost_ode_residual", worst, 1e-6, "zeta in {0.7, 1.9}, sampled x grid");
    });
    guarded(checks, "mu_engine_vs_window", 1e-5, [&] {
      const auto em = E_and_mu(m);
      const auto f = field_from_model(m, c.window.min, c.window.max, c.window.step, thread_count(c));
      const auto inv = field_invariants(f, std::vector<double>{f.x_max});
      return bounded("mu_engine_vs_window", std::abs(em.mu - inv.mu), 1e-5);
    });
  }

  // Direct scattering on the sampled field.
  guarded(checks, "unitarity", 1e-6, [&]() -> Check {
    const auto src = field_source(c);
    if (src.field.tail_level() > 1e-8)
      return {"unitarity", src.field.tail_level(), 1e-6, "skipped", "field not small at the window ends"};
    const auto zs = zeta_points(c);
    const auto co = sweep(src.field, zs, c);
    double worst = 0, t_err = 0;
    for (std::size_t k = 0; k < zs.size(); ++k) {
      worst = std::max(worst, std::abs(co[k].T * co[k].Tbar + co[k].R * co[k].Rbar - 1.0));
      if (model) t_err = std::max(t_err, std::abs(co[k].T - transmissions(*model, zs[k]).T));
    }
    if (model) checks.push_back(bounded("transmission_vs_closed_form", t_err, 1e-5));
    return bounded("unitarity", worst, 1e-6, "T Tbar + R Rbar = 1 on the zeta grid");
  });

  // Probes: potential magnitudes at requested points.
  if (!c.probes.empty()) {
    Meta probes = Meta::array();
    std::optional<PotentialField> sampled;
    if (c.field) sampled = field_from_samples(c.field->x0, c.field->h, c.field->q, c.field->r);
    for (double x : c.probes) {
      guarded(checks, "probe", 0, [&] {
        cplx q, r;
        if (model) {
          const auto p = potentials(*model, x);
          q = p.q;
          r = p.r;
        } else {
          q = sampled->q_at(x);
          r = sampled->r_at(x);
        }
        probes.push_back({{"x", x}, {"abs_q", std::abs(q)}, {"abs_r", std::abs(r)}});
        checks.push_back({"abs_q(" + fmt(x) + ")", std::abs(q), 0, "info", ""});
        return Check{"abs_r(" + fmt(x) + ")", std::abs(r), 0, "info", ""};
      });
    }
    meta["probes"] = probes;
  }
  if (model) {
    // Peak magnitudes on the x grid, as a reference scale for the probes.
    double mq = 0, mr = 0;
    for (double x : c.x_grid.points()) {
      try {
        const auto p = potentials(*model, x);
        mq = std::max(mq, std::abs(p.q));
        mr = std::max(mr, std::abs(p.r));
      } catch (const NumericalError&) {
      }
    }
    meta["max_abs_q_on_grid"] = mq;
    meta["max_abs_r_on_grid"] = mr;
  }

  meta["warnings"] = warnings;
  int failed = 0, errors = 0;
  Meta report = Meta::array();
  std::vector<std::string> names, status, notes;
  std::vector<double> values, thresholds;
  for (const auto& ch : checks) {
    names.push_back(ch.name);
    values.push_back(ch.value);
    thresholds.push_back(ch.threshold);
    status.push_back(ch.status);
    notes.push_back(ch.note);
    failed += ch.status == "fail";
    errors += ch.status == "error";
  }
  meta["failed"] = failed;
  meta["errors"] = errors;
  RunOutput out;
  out.columns = {txt("check", names), num("value", values), num("threshold", thresholds), txt("status", status),
                 txt("note", notes)};
  out.metadata_json = dump(meta);
  out.summary = "verify: " + std::to_string(checks.size()) + " checks, " + std::to_string(failed) + " failed, " +
                std::to_string(errors) + " errors";
  for (const auto& w : warnings) out.summary += "\nwarning: " + w.get<std::string>();
  return out;
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

RunOutput execute(const RunConfig& c) {
  switch (c.command) {
    case Command::reflectionless: return run_reflectionless(c);
    case Command::marchenko: return run_marchenko(c);
    case Command::direct: return run_direct(c);
    case Command::bridge: return run_bridge(c);
    case Command::roundtrip: return run_roundtrip(c);
    case Command::verify: return run_verify(c);
  }
  throw ValidationError("unknown command");
}

std::string to_csv(const RunOutput& out) {
  std::string s;
  for (std::size_t k = 0; k < out.columns.size(); ++k) s += (k ? "," : "") + csv_cell(out.columns[k].name);
  s += "\n";
  const std::size_t rows = out.columns.empty() ? 0 : out.columns.front().size();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = 0; k < out.columns.size(); ++k) {
      const auto& col = out.columns[k];
      if (k) s += ",";
      s += col.is_text ? csv_cell(col.text[r]) : format_number(col.numbers[r]);
    }
    s += "\n";
  }
  return s;
}

std::string to_json(const RunOutput& out) {
  std::string s = "{\n  \"metadata\": ";
  // Re-indent the metadata block by two spaces.
  std::string meta = out.metadata_json;
  while (!meta.empty() && meta.back() == '\n') meta.pop_back();
  for (std::size_t k = 0; k < meta.size(); ++k) {
    s += meta[k];
    if (meta[k] == '\n') s += "  ";
  }
  s += ",\n  \"columns\": {";
  for (std::size_t k = 0; k < out.columns.size(); ++k) {
    const auto& col = out.columns[k];
    s += (k ? ",\n    " : "\n    ") + Meta(col.name).dump() + ": [";
    for (std::size_t r = 0; r < col.size(); ++r) {
      if (r) s += ", ";
      if (col.is_text) s += Meta(col.text[r]).dump();
      else s += std::isfinite(col.numbers[r]) ? format_number(col.numbers[r]) : "null";
    }
    s += "]";
  }
  s += "\n  }\n}\n";
  return s;
}

RunResult run(const RunConfig& c) {
  RunResult res;
  try {
    const auto out = execute(c);
    namespace fs = std::filesystem;
    const fs::path dir(c.out.empty() ? "." : c.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    const std::string stem = c.name.empty() ? command_name(c.command) : c.name;
    auto write = [&](const fs::path& p, const std::string& text) {
      std::ofstream f(p, std::ios::binary);
      if (!f || !(f << text)) throw ValidationError("cannot write " + p.string());
      res.files.push_back(p.string());
    };
    if (c.format == OutputFormat::csv) {
      write(dir / (stem + ".csv"), to_csv(out));
      write(dir / (stem + ".metadata.json"), out.metadata_json);
    } else {
      write(dir / (stem + ".json"), to_json(out));
    }
    res.status = 0;
    res.message = out.summary;
  } catch (const ValidationError& e) {
    res.status = 1;
    res.message = std::string("validation error: ") + e.what();
  } catch (const NumericalError& e) {
    res.status = 2;
    res.message = std::string("numerical error: ") + e.what();
  } catch (const std::exception& e) {
    res.status = 2;
    res.message = std::string("error: ") + e.what();
  }
  return res;
}

}  // namespace marchenko
