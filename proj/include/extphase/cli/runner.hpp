#pragma once

#include <boost/math/tools/minima.hpp>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "extphase/celestial.hpp"
#include "extphase/cli/config.hpp"
#include "extphase/errors.hpp"
#include "extphase/lagrangian.hpp"
#include "extphase/numkit/random.hpp"
#include "extphase/phase.hpp"
#include "extphase/relativity.hpp"
#include "extphase/tdsystems.hpp"
#include "extphase/transform.hpp"

namespace xps::cli {

namespace fs = std::filesystem;
using numkit::IntegratorOptions;
using numkit::Rng;
using numkit::Trajectory;
using phase::ExtendedPoint;
using phase::HamiltonianSystem;

struct RunReport {
  std::string scenario;
  bool pass = false;
  std::uint64_t seed = 42;
  json params = json::object();
  json metrics = json::object();
  std::vector<std::string> artifacts;  // relative to the output directory
  std::string diagnostic;

  json to_json() const {
    return {{"scenario", scenario}, {"pass", pass},           {"seed", seed},
            {"params", params},     {"metrics", metrics},     {"artifacts", artifacts},
            {"diagnostic", diagnostic}};
  }
};

// temp file + rename
inline void write_atomic(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open " + tmp.string() + " for writing");
    os << content;
    os.flush();
    if (!os) throw Error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : header_(std::move(header)) {}

  void row(const std::vector<double>& v) {
    if (v.size() != header_.size()) throw Error("csv row width mismatch");
    rows_.push_back(v);
  }
  std::string str() const {
    std::string s;
    for (std::size_t i = 0; i < header_.size(); ++i) s += (i ? "," : "") + header_[i];
    s += '\n';
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + fmt_double(r[i]);
      s += '\n';
    }
    return s;
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<double>> rows_;
};

inline std::string trajectory_csv(const Trajectory& tr) {
  std::ostringstream os;
  tr.write_csv(os);
  return os.str();
}

namespace detail {

inline std::vector<double> vec(const json& v) { return v.get<std::vector<double>>(); }

inline double max_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

// Shared state of one scenario run.
struct Context {
  const ScenarioConfig& cfg;
  fs::path out;
  RunReport& report;
  Rng rng;

  const json& p(const char* k) const { return cfg.params.at(k); }
  double num(const char* k) const { return p(k).get<double>(); }
  IntegratorOptions opts() const { return cfg.tolerances; }

  void metric(const std::string& k, json v) {
    if (v.is_number_float() && !std::isfinite(v.get<double>())) v = nullptr;
    report.metrics[k] = std::move(v);
  }
  void artifact(const std::string& name, const std::string& content) {
    write_atomic(out / name, content);
    report.artifacts.push_back(name);
  }
  // Records a threshold check; the first failing one becomes the diagnostic.
  void require(bool ok, const std::string& what) {
    if (!ok && report.diagnostic.empty()) report.diagnostic = what;
    report.pass = report.pass && ok;
  }
};

// ---------------------------------------------------------------- lorentz

inline relativity::Vec3 beta_of(const json& b) {
  if (b.is_number()) return {b.get<double>(), 0.0, 0.0};
  return {b[0].get<double>(), b[1].get<double>(), b[2].get<double>()};
}

inline void run_lorentz(Context& cx) {
  using namespace relativity;
  const double c = cx.num("c"), m = cx.num("m"), zeta = cx.num("zeta");
  const int probes = cx.p("probes").get<int>();
  const auto b = make_boost(beta_of(cx.p("beta")), c);
  const auto gen = lorentz_generating(b);
  const Eigen::MatrixXd bm = boost_matrix(b);

  // a constant 4-potential (A, phi/c) and its boosted image
  Eigen::VectorXd pot = Eigen::VectorXd::Zero(8);
  for (int i = 4; i < 8; ++i) pot(i) = cx.rng.uniform(-1, 1);
  const Eigen::VectorXd potp = bm * pot;
  const auto before = lorentz_invariant_hamiltonian(constant_field({pot(4), pot(5), pot(6)}, c * pot(7), zeta, m), c);
  const auto after = lorentz_invariant_hamiltonian(constant_field({potp(4), potp(5), potp(6)}, c * potp(7), zeta, m), c);

  Csv csv({"probe", "q1", "q2", "q3", "t", "p1", "p2", "p3", "e", "q1'", "q2'", "q3'", "t'", "p1'", "p2'",
           "p3'", "e'", "symplectic_residual", "h1", "h1'", "implicit_residual"});
  double symp = 0.0, h1_inv = 0.0, implicit = 0.0, hdet = INFINITY;
  bool time_global = false;
  for (int k = 0; k < probes; ++k) {
    ExtendedPoint pt{cx.rng.uniform_vector(3, -1, 1), cx.rng.uniform_vector(3, -1, 1), cx.rng.uniform(-1, 1),
                     cx.rng.uniform(-1, 1) + m * c * c, 0.0};
    const auto img = transform::solve_generating(gen, pt);
    const double r = phase::symplectic_residual(img.jacobian);
    const double h1 = before.extended(pt.phase()) - pt.e;
    const double h1p = after.extended(img.point.phase()) - img.point.e;
    const double ir = before.implicit_residual(pt);
    symp = std::max(symp, r);
    h1_inv = std::max(h1_inv, std::fabs(h1 - h1p) / (1.0 + std::fabs(h1)));
    implicit = std::max(implicit, ir);
    hdet = std::min(hdet, std::fabs(img.hessian_det));
    if (k == 0) time_global = transform::restriction_report(gen, pt).time_global;
    std::vector<double> row{double(k)};
    for (const auto& z : {pt, img.point}) {
      row.insert(row.end(), z.q.begin(), z.q.end());
      row.push_back(z.t);
      row.insert(row.end(), z.p.begin(), z.p.end());
      row.push_back(z.e);
    }
    row.insert(row.end(), {r, h1, h1p, ir});
    csv.row(row);
  }

  // composing two boosts along the same direction
  double vel_add = 0.0;
  const double bn = std::sqrt(b.beta2());
  if (bn > 0.0) {
    const double b2 = 2.0 * bn / (1.0 + bn * bn);
    relativity::Vec3 dir;
    for (int i = 0; i < 3; ++i) dir[i] = b.beta[i] / bn * b2;
    const Eigen::MatrixXd sum = boost_matrix(make_boost(dir, c));
    vel_add = detail::max_abs(bm * bm - sum) / detail::max_abs(sum);
  }

  cx.metric("gamma", b.gamma);
  cx.metric("symplectic_residual_max", symp);
  cx.metric("h1_invariance_max", h1_inv);
  cx.metric("implicit_residual_max", implicit);
  cx.metric("velocity_addition_error", vel_add);
  cx.metric("time_global", time_global);
  cx.metric("hessian_det_min", hdet);
  cx.artifact("lorentz_probes.csv", csv.str());
  cx.require(symp <= 1e-12, "symplectic residual above 1e-12");
  cx.require(h1_inv <= 1e-10, "H1 not invariant to 1e-10");
  cx.require(implicit <= 1e-10, "solved Hamiltonian misses the implicit relation");
  cx.require(vel_add <= 1e-12, "aligned composition differs from velocity addition");
  cx.require(time_global == (bn == 0.0), "time_global flag inconsistent with the boost");
}

// ---------------------------------------------------------------- kepler

inline celestial::KeplerSpec kepler_spec(const Context& cx) {
  return {cx.num("K2"), cx.num("x0"), cx.num("p0")};
}

struct DirectRun {
  Trajectory tr;
  bool stalled = false;
  double stall_t = 0.0;
};

inline DirectRun kepler_direct_run(const celestial::KeplerSpec& spec, double t0, double t1,
                                   const IntegratorOptions& o) {
  try {
    return {celestial::kepler_direct(spec, t0, t1, o), false, t1};
  } catch (const numkit::IntegrationStall& st) {
    return {st.partial(), true, st.s()};
  }
}

inline void run_kepler_direct(Context& cx) {
  const auto spec = kepler_spec(cx);
  const auto span = detail::vec(cx.p("t_span"));
  const auto run = kepler_direct_run(spec, span[0], span[1], cx.opts());
  const double e0 = spec.energy();
  double drift = 0.0;
  for (std::size_t i = 0; i < run.tr.size(); ++i) drift = std::max(drift, std::fabs(run.tr.at(i, 2) - e0));
  drift /= 1.0 + std::fabs(e0);
  cx.metric("energy_drift_max", drift);
  cx.metric("t_final", run.tr.size() ? run.tr.s_back() : span[0]);
  cx.metric("stalled", run.stalled);
  cx.metric("samples", run.tr.size());
  cx.artifact("kepler_direct.csv", trajectory_csv(run.tr));
  if (run.stalled)
    cx.require(false, "direct integration stalled at t=" + fmt_double(run.stall_t) + " (collision)");
  cx.require(drift <= 1e-8, "energy drift above 1e-8");
}

inline void run_kepler_regularized(Context& cx) {
  const auto spec = kepler_spec(cx);
  const auto span = detail::vec(cx.p("tprime_span"));
  const double K2 = spec.K2, e = spec.energy(), w0 = spec.x0 * spec.p0;
  const auto tr = celestial::kepler_regularized(spec, span[0], span[1], cx.opts());

  double cf_err = 0.0, id_err = 0.0;
  std::size_t imin = 0;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const auto cf = celestial::kepler_regularized_closed(K2, e, spec.x0, w0, tr.s(i) - span[0]);
    const double scale = 1.0 + std::fabs(cf.x) + std::fabs(cf.t);
    cf_err = std::max({cf_err, std::fabs(tr.at(i, 0) - cf.x) / scale, std::fabs(tr.at(i, 1) - cf.w) / scale,
                       std::fabs(tr.at(i, 2) - cf.t) / scale});
    id_err = std::max(id_err, std::fabs(celestial::regularized_energy_residual(K2, e, tr.at(i, 0), tr.at(i, 1))) /
                                  (scale * scale));
    if (tr.at(i, 0) < tr.at(imin, 0)) imin = i;
  }
  // refine the minimum of x on the dense interpolant
  const double lo = tr.s(imin > 0 ? imin - 1 : 0), hi = tr.s(std::min(imin + 1, tr.size() - 1));
  double xmin_tp = tr.s(imin), xmin = tr.at(imin, 0);
  if (hi > lo) {
    auto r = boost::math::tools::brent_find_minima([&](double s) { return tr.interpolate(s)[0]; }, lo, hi, 52);
    if (r.second < xmin) std::tie(xmin_tp, xmin) = r;
  }
  const double collision_t = tr.interpolate(xmin_tp)[2];

  double agree = 0.0;
  bool direct_stalled = false;
  std::size_t compared = 0;
  if (cx.p("compare_direct").get<bool>()) {
    double tmax = 0.0;
    for (std::size_t i = 0; i < tr.size(); ++i) tmax = std::max(tmax, tr.at(i, 2));
    const auto direct = kepler_direct_run(spec, 0.0, tmax, cx.opts());
    direct_stalled = direct.stalled;
    for (std::size_t i = 0; i < tr.size(); ++i) {
      const double x = tr.at(i, 0), t = tr.at(i, 2);
      if (x <= 0.01 || direct.tr.size() < 2 || !direct.tr.contains(t)) continue;
      agree = std::max(agree, std::fabs(direct.tr.interpolate(t)[0] - x) / (1.0 + x));
      ++compared;
    }
    cx.artifact("kepler_direct_compare.csv", trajectory_csv(direct.tr));
  }

  cx.metric("closed_form_error_max", cf_err);
  cx.metric("energy_identity_max", id_err);
  cx.metric("x_min", xmin);
  cx.metric("x_min_tprime", xmin_tp);
  cx.metric("collision_t", collision_t);
  cx.metric("collision", std::fabs(xmin) <= 1e-6);
  cx.metric("direct_agreement_max", agree);
  cx.metric("direct_compared", compared);
  cx.metric("direct_stalled", direct_stalled);
  cx.metric("energy", e);
  cx.artifact("kepler_regularized.csv", trajectory_csv(tr));
  cx.require(cf_err <= 1e-8, "regularized run departs from the closed form");
  cx.require(id_err <= 1e-8, "(dx/dt')^2 = 2ex^2 + 2K2x violated");
  cx.require(agree <= 1e-6, "regularized and direct runs disagree");
}

// ---------------------------------------------------------------- ks

inline void run_ks(Context& cx) {
  const int probes = cx.p("probes").get<int>();
  Csv csv({"probe", "u1", "u2", "u3", "u4", "pu1", "pu2", "pu3", "pu4", "t'", "e'", "q1", "q2", "q3", "t", "p1",
           "p2", "p3", "e", "radial_error", "symplectic_residual"});
  double radial = 0.0, symp = 0.0, full_min = INFINITY;
  for (int k = 0; k < probes; ++k) {
    ExtendedPoint ks;
    double u2 = 0.0;
    do {
      ks = ExtendedPoint{cx.rng.uniform_vector(4, -1, 1), cx.rng.uniform_vector(4, -1, 1), cx.rng.uniform(0, 2),
                         cx.rng.uniform(-1, 1), 0.0};
      u2 = 0.0;
      for (double u : ks.q) u2 += u * u;
    } while (u2 < 1e-2);
    ks = celestial::ks_project(ks);
    const auto img = celestial::ks_map(ks);
    const double qn = std::sqrt(img.q[0] * img.q[0] + img.q[1] * img.q[1] + img.q[2] * img.q[2]);
    const double rerr = std::fabs(qn - u2) / (1.0 + u2);
    const double r = celestial::ks_symplectic_residual(ks);
    radial = std::max(radial, rerr);
    symp = std::max(symp, r);
    full_min = std::min(full_min, phase::symplectic_residual(celestial::ks_extended_map().jacobian(ks)));
    std::vector<double> row{double(k)};
    row.insert(row.end(), ks.q.begin(), ks.q.end());
    row.insert(row.end(), ks.p.begin(), ks.p.end());
    row.insert(row.end(), {ks.t, ks.e, img.q[0], img.q[1], img.q[2], img.t, img.p[0], img.p[1], img.p[2], img.e,
                           rerr, r});
    csv.row(row);
  }
  cx.metric("radial_identity_max", radial);
  cx.metric("symplectic_residual_max", symp);
  cx.metric("full_residual_min", full_min);
  cx.artifact("ks_probes.csv", csv.str());
  cx.require(radial <= 1e-12, "|q| = |u|^2 violated");
  cx.require(symp <= 1e-10, "KS map not symplectic on the constraint surface");
}

// ---------------------------------------------------------------- oscillator

inline tdsystems::OscillatorSpec oscillator_spec(const Context& cx) {
  const double mean = cx.num("omega2_mean"), amp = cx.num("omega2_amp"), nu = cx.num("omega2_freq"),
               f = cx.num("damping");
  tdsystems::OscillatorSpec s;
  s.n = cx.p("n").get<std::size_t>();
  s.omega2 = numkit::TimeFunction([=](const auto& t) { return mean + amp * numkit::sin(nu * t); });
  s.F = numkit::TimeFunction([=](const auto& t) { return f * t; });
  return s;
}

inline void run_oscillator(Context& cx) {
  using namespace tdsystems;
  const auto spec = oscillator_spec(cx);
  const std::size_t n = spec.n;
  const auto span = detail::vec(cx.p("t_span"));
  const auto xv = detail::vec(cx.p("xi0"));
  const XiState x0{xv[0], xv[1], xv[2]};
  const auto tr = oscillator_xi_propagate(spec, detail::vec(cx.p("q0")), detail::vec(cx.p("p0")), x0, span[0],
                                          span[1], cx.opts());
  const std::size_t tpc = tr.column("t'");

  auto qp = [&](std::size_t i) {
    auto pt = oscillator_point(tr, i, n);
    return angular_invariants(pt.q, pt.p);
  };
  const auto pt0 = oscillator_point(tr, 0, n);
  const double lea0 = leach_invariant(spec, pt0, x0);
  const double w0 = omega0_squared(spec, pt0.t, x0);
  const auto img0 = oscillator_canonical_map(spec, pt0, x0, tr.at(0, tpc));
  const auto ang0 = qp(0);

  std::vector<std::string> header{"t"};
  for (std::size_t k = 0; k < n; ++k) header.push_back("q" + std::to_string(k + 1));
  for (std::size_t k = 0; k < n; ++k) header.push_back("p" + std::to_string(k + 1));
  header.insert(header.end(), {"e", "xi", "xidot", "xiddot", "t'", "leach"});
  for (std::size_t k = 0; k < n; ++k) header.push_back("Q" + std::to_string(k + 1));
  for (std::size_t k = 0; k < n; ++k) header.push_back("P" + std::to_string(k + 1));
  header.push_back("E");
  Csv csv(header);

  double leach = 0.0, ang = 0.0, pos = 0.0, wdrift = 0.0, xmin = INFINITY, map_err = 0.0, gap = 0.0;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const auto pt = oscillator_point(tr, i, n);
    const auto x = xi_at(tr, i, n);
    const auto c = coefficients(spec, pt.t);
    const double lv = leach_invariant(spec, pt, x);
    leach = std::max(leach, std::fabs(lv - lea0));
    ang = std::max(ang, detail::max_abs(qp(i) - ang0));
    // 2 e' e^{-F} xi = omega0^2 q^2 + |xi e^{-F} p - (xi' - xi f) q / 2|^2
    double rhs = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double bk = x.xi * std::exp(-c.F) * pt.p[k] - 0.5 * (x.xidot - x.xi * c.f) * pt.q[k];
      rhs += w0 * pt.q[k] * pt.q[k] + bk * bk;
    }
    pos = std::max(pos, std::fabs(2.0 * lv * std::exp(-c.F) * x.xi - rhs) / (1.0 + std::fabs(rhs)));
    wdrift = std::max(wdrift, std::fabs(omega0_squared(spec, pt.t, x) - w0));
    xmin = std::min(xmin, x.xi);
    gap = std::max(gap, std::fabs(energy_rule(spec, pt, x) - lv));
    const auto img = oscillator_canonical_map(spec, pt, x, tr.at(i, tpc));
    map_err = std::max({map_err, std::fabs(img.e - autonomous_energy(img, w0)), std::fabs(img.e - img0.e)});
    std::vector<double> row{pt.t};
    for (std::size_t k = 0; k < 2 * n + 5; ++k) row.push_back(tr.at(i, k));
    row.push_back(lv);
    row.insert(row.end(), img.q.begin(), img.q.end());
    row.insert(row.end(), img.p.begin(), img.p.end());
    row.push_back(img.e);
    csv.row(row);
  }
  cx.metric("leach_drift_max", leach);
  cx.metric("angular_drift_max", ang);
  cx.metric("positivity_identity_max", pos);
  cx.metric("omega0_squared", w0);
  cx.metric("omega0_drift_max", wdrift);
  cx.metric("xi_min", xmin);
  cx.metric("map_energy_error_max", map_err);
  cx.metric("energy_rule_gap_max", gap);
  cx.artifact("oscillator.csv", csv.str());
  cx.require(leach <= 1e-8, "Leach invariant drift above 1e-8");
  cx.require(ang <= 1e-8, "angular invariant drift above 1e-8");
  cx.require(pos <= 1e-10, "positivity identity violated");
  cx.require(wdrift <= 1e-8, "omega0^2 not constant along the xi solution");
  cx.require(xmin > 0.0, "xi left the positive range");
  cx.require(map_err <= 1e-8, "mapped energy not conserved");
}

// ---------------------------------------------------------------- potential

inline void run_potential(Context& cx) {
  using namespace tdsystems;
  const std::size_t n = cx.p("n").get<std::size_t>();
  const double a = cx.num("a"), b = cx.num("b"), nu = cx.num("nu"), quartic = cx.num("quartic");
  const auto spec = make_potential(n, [=](auto x) {
    using T = std::remove_const_t<typename decltype(x)::element_type>;
    T q2(0.0);
    for (std::size_t i = 0; i < n; ++i) q2 += x[i] * x[i];
    return 0.5 * (a + b * numkit::sin(nu * x[n])) * q2 + quartic * q2 * q2;
  });
  const auto span = detail::vec(cx.p("t_span"));
  const auto run = transfer_matrix(spec, detail::vec(cx.p("q0")), detail::vec(cx.p("p0")), span[0], span[1], cx.opts());
  const auto t0 = run.triple(0);
  double det = 0.0, inv = 0.0, xi1 = 0.0, q2min = INFINITY;
  for (std::size_t i = 0; i < run.path.size(); ++i) {
    const auto& X = run.path[i].Xi;
    det = std::max(det, std::fabs(X.determinant() - 1.0));
    inv = std::max(inv, (run.invariants(i) - t0).cwiseAbs().maxCoeff() / (1.0 + t0.cwiseAbs().maxCoeff()));
    xi1 = std::max({xi1, std::fabs(X(0, 0) - 1.0), std::fabs(X(1, 0)), std::fabs(X(2, 0))});
    q2min = std::min(q2min, 4.0 * run.triple(i)(2));
  }
  std::ostringstream os;
  run.write_csv(os);
  cx.metric("det_xi_error", det);
  cx.metric("invariant_error_max", inv);
  cx.metric("xi1_deviation_max", xi1);
  cx.metric("q2_min", q2min);
  cx.artifact("transfer.csv", os.str());
  cx.require(det <= 1e-8, "det Xi departs from 1 by more than 1e-8");
  cx.require(inv <= 1e-8, "invariant triple not reproduced to 1e-8");
  if (b == 0.0) cx.require(xi1 <= 1e-10, "autonomous case: first xi solution is not 1");
}

// ---------------------------------------------------------------- lagrangian-check

inline void run_lagrangian(Context& cx) {
  using namespace lagrangian;
  const double eps = cx.num("eps");
  const int probes = cx.p("probes").get<int>();
  const auto sys = LagrangianSystem::make(1, "driven oscillator", [eps](auto x) {
    return 0.5 * x[1] * x[1] - 0.5 * (1.0 + eps * numkit::sin(x[2])) * x[0] * x[0];
  });
  const auto h = paired_hamiltonian(sys);
  const auto L1 = extended_field(sys);

  Csv csv({"probe", "q", "t", "v", "vt", "c", "L1", "scaling", "euler", "h1", "extended_value"});
  double hom = 0.0, eul = 0.0, leg = 0.0;
  for (int k = 0; k < probes; ++k) {
    ExtendedVelocityPoint pt{cx.rng.uniform_vector(2, -2, 2), cx.rng.uniform_vector(2, -2, 2)};
    pt.v1[1] = cx.rng.uniform(0.2, 2.0) * (cx.rng.uniform() < 0.5 ? -1.0 : 1.0);
    const double c = cx.rng.uniform(0.1, 3.0) * (cx.rng.uniform() < 0.5 ? -1.0 : 1.0);
    const double l1 = L1(pt.args());
    const double scale = 1.0 + std::fabs(l1) * std::fabs(c);
    const auto r = homogeneity_residual(sys, pt, c);
    hom = std::max(hom, r.scaling / scale);
    eul = std::max(eul, r.euler / scale);
    const auto lr = legendre_to_h1(sys, pt);
    ExtendedPoint xp{{pt.q1[0]}, lr.p, pt.q1[1], -lr.p_np1, 0.0};
    const double hv = h(xp);
    const double ev = phase::extended_value(xp, pt.v1[1], h);
    leg = std::max({leg, std::fabs(lr.h1 - ev) / (1.0 + std::fabs(hv)), std::fabs(-lr.p_np1 - hv) / (1.0 + std::fabs(hv))});
    csv.row({double(k), pt.q1[0], pt.q1[1], pt.v1[0], pt.v1[1], c, l1, r.scaling, r.euler, lr.h1, ev});
  }

  // solutions under three reparameterizations t(s)
  struct Reparam {
    double s0, s1;
    std::function<double(double)> t_of_s, k_of_s;
  };
  const std::vector<Reparam> reps{
      {0.0, 10.0, [](double s) { return s; }, [](double) { return 1.0; }},
      {0.5, 1.5, [](double s) { return s * s * s; }, [](double s) { return 3 * s * s; }},
      {0.0, 5.0, [](double s) { return 2 * s + 0.5 * std::sin(s); }, [](double s) { return 2.0 + 0.5 * std::cos(s); }}};
  auto o = cx.opts();
  o.max_step = std::min(o.max_step, 0.01);
  double el = 0.0;
  Csv paths({"reparam", "s", "q1", "p1", "t", "e"});
  for (std::size_t r = 0; r < reps.size(); ++r) {
    auto pt0 = phase::lift({1.0}, {0.0}, reps[r].t_of_s(reps[r].s0), h);
    pt0.s = reps[r].s0;
    const auto tr = phase::propagate(pt0, h, phase::Parameterization::of_s(reps[r].k_of_s), reps[r].s0, reps[r].s1, o);
    const auto res = euler_lagrange_residual(sys, tr);
    el = std::max({el, res.extended_max, res.conventional_max});
    for (std::size_t i = 0; i < tr.size(); ++i)
      paths.row({double(r), tr.s(i), tr.at(i, 0), tr.at(i, 1), tr.at(i, 2), tr.at(i, 3)});
  }
  // q(s) = s, t(s) = s is not a solution
  Trajectory::Builder nb({"q1", "t"}, "s");
  for (int i = 0; i <= 150; ++i) {
    const double s = 0.5 + 0.01 * i;
    const double st[2] = {s, s}, dv[2] = {1.0, 1.0};
    nb.push(s, st, dv);
  }
  const auto non = euler_lagrange_residual(sys, std::move(nb).finish());

  cx.metric("homogeneity_max", hom);
  cx.metric("euler_identity_max", eul);
  cx.metric("legendre_roundtrip_max", leg);
  cx.metric("el_residual_max", el);
  cx.metric("el_nonsolution_min", non.conventional_min);
  cx.artifact("lagrangian_probes.csv", csv.str());
  cx.artifact("lagrangian_paths.csv", paths.str());
  cx.require(hom <= 1e-12, "homogeneity residual above 1e-12");
  cx.require(eul <= 1e-12, "Euler identity residual above 1e-12");
  cx.require(leg <= 1e-12, "Legendre round trip disagrees with the extended value");
  cx.require(el <= 1e-6, "Euler-Lagrange residual above 1e-6 on a solution");
  cx.require(non.conventional_min > 0.1, "non-solution path not detected");
}

// ---------------------------------------------------------------- bracket-suite

struct SampledHamiltonian {
  std::string name;
  HamiltonianSystem h;
  std::function<ExtendedPoint(Rng&)> sample;
};

inline std::vector<SampledHamiltonian> scenario_hamiltonians() {
  using relativity::EmField;
  auto box = [](std::size_t n, double lo, double hi) {
    return [=](Rng& r) {
      return ExtendedPoint{r.uniform_vector(n, lo, hi), r.uniform_vector(n, -2, 2), r.uniform(-5, 5),
                           r.uniform(-3, 3), 0.0};
    };
  };
  std::vector<SampledHamiltonian> out;
  out.push_back({"td-oscillator", HamiltonianSystem::make(2, "damped oscillator", [](auto z) {
                   const auto& t = z[4];
                   auto F = 0.05 * t;
                   auto w2 = 1.0 + 0.1 * numkit::sin(t);
                   return 0.5 * numkit::exp(-F) * (z[2] * z[2] + z[3] * z[3]) +
                          0.5 * numkit::exp(F) * w2 * (z[0] * z[0] + z[1] * z[1]);
                 }),
                 box(2, -2, 2)});
  out.push_back({"kepler", celestial::kepler_hamiltonian(1.0), box(1, 0.1, 3)});
  EmField f;
  f.A = {numkit::make_field(4, [](auto x) { return 0.3 * numkit::sin(x[1]) * x[3]; }),
         numkit::make_field(4, [](auto x) { return 0.2 * x[0] * x[2]; }),
         numkit::make_field(4, [](auto x) { return numkit::cos(x[3] + x[0]); })};
  f.phi = numkit::make_field(4, [](auto x) { return x[0] * x[1] - 0.5 * x[3]; });
  f.zeta = -0.8;
  f.m = 1.3;
  out.push_back({"lorentz-invariant", relativity::lorentz_invariant_hamiltonian(f, 1.0).solved, box(3, -2, 2)});
  out.push_back({"nonrelativistic", relativity::nonrelativistic_hamiltonian(f), box(3, -2, 2)});
  out.push_back({"potential", HamiltonianSystem::make(2, "time-dependent potential", [](auto z) {
                   auto q2 = z[0] * z[0] + z[1] * z[1];
                   return 0.5 * (z[2] * z[2] + z[3] * z[3]) + 0.5 * (1.0 + 0.1 * numkit::sin(z[4])) * q2 +
                          0.1 * q2 * q2;
                 }),
                 box(2, -2, 2)});
  out.push_back({"paired-lagrangian",
                 lagrangian::paired_hamiltonian(lagrangian::LagrangianSystem::make(1, "driven oscillator", [](auto x) {
                   return 0.5 * x[1] * x[1] - 0.5 * (1.0 + 0.1 * numkit::sin(x[2])) * x[0] * x[0];
                 })),
                 box(1, -2, 2)});
  return out;
}

inline void run_brackets(Context& cx) {
  const int probes = cx.p("probes").get<int>();
  const auto hams = scenario_hamiltonians();
  Csv csv({"hamiltonian", "probe", "k", "bracket_error", "flow_error"});
  double fund = 0.0, flow = 0.0;
  for (std::size_t hi = 0; hi < hams.size(); ++hi) {
    const auto& sh = hams[hi];
    const std::size_t n = sh.h.n();
    std::vector<numkit::ScalarField> coords;
    for (std::size_t i = 0; i < 2 * n + 2; ++i) coords.push_back(phase::canonical_coordinate(n, i));
    for (int k = 0; k < probes; ++k) {
      const auto pt = sh.sample(cx.rng);
      const double kk = cx.rng.uniform(-2, 2);
      const double fe = phase::fundamental_bracket_error(pt);
      // {z_i, H1} is the rate of z_i along the flow in s
      const auto h1 = sh.h.extended_field(kk);
      const auto rhs = phase::extended_rhs(pt, kk, sh.h);
      std::vector<double> want(rhs.dq);
      want.push_back(rhs.dt);
      want.insert(want.end(), rhs.dp.begin(), rhs.dp.end());
      want.push_back(-rhs.de);
      double fl = 0.0;
      for (std::size_t i = 0; i < coords.size(); ++i)
        fl = std::max(fl, std::fabs(phase::poisson_extended(coords[i], h1, pt) - want[i]) / (1.0 + std::fabs(want[i])));
      fund = std::max(fund, fe);
      flow = std::max(flow, fl);
      csv.row({double(hi), double(k), kk, fe, fl});
    }
  }
  json names = json::array();
  for (const auto& sh : hams) names.push_back(sh.name);
  cx.metric("bracket_max_error", fund);
  cx.metric("flow_bracket_max_error", flow);
  cx.metric("hamiltonians", hams.size());
  cx.report.params["hamiltonian_names"] = names;
  cx.artifact("bracket_suite.csv", csv.str());
  cx.require(fund <= 1e-12, "fundamental brackets differ from the symplectic values");
  cx.require(flow <= 1e-12, "bracket with H1 differs from the flow");
}

}  // namespace detail

// Executes a validated config. Numeric failures are caught and reported with
// pass = false; I/O problems propagate.
inline RunReport run(const ScenarioConfig& cfg) {
  const ScenarioSchema* schema = find_schema(cfg.scenario);
  if (!schema) throw Error("unknown scenario '" + cfg.scenario + "'");
  RunReport rep;
  rep.scenario = cfg.scenario;
  rep.seed = cfg.seed;
  rep.params = cfg.params;
  rep.pass = true;
  for (const auto& m : schema->metrics) rep.metrics[m] = nullptr;
  detail::Context cx{cfg, fs::path(cfg.output_dir), rep, Rng(cfg.seed)};
  static const std::vector<std::pair<std::string, std::function<void(detail::Context&)>>> table{
      {"lorentz", detail::run_lorentz},
      {"kepler-direct", detail::run_kepler_direct},
      {"kepler-regularized", detail::run_kepler_regularized},
      {"ks", detail::run_ks},
      {"oscillator", detail::run_oscillator},
      {"potential", detail::run_potential},
      {"lagrangian-check", detail::run_lagrangian},
      {"bracket-suite", detail::run_brackets}};
  fs::create_directories(cx.out);
  try {
    for (const auto& [name, fn] : table)
      if (name == cfg.scenario) fn(cx);
  } catch (const Error& e) {
    rep.pass = false;
    rep.diagnostic = e.what();
  }
  write_atomic(cx.out / "report.json", rep.to_json().dump(2) + "\n");
  return rep;
}

}  // namespace xps::cli
