#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "extphase/errors.hpp"
#include "extphase/numkit/field.hpp"
#include "extphase/numkit/ode.hpp"
#include "extphase/phase/extended_point.hpp"

namespace xps::phase {

using numkit::IntegratorOptions;
using numkit::Trajectory;

// dt/ds as a function of (s, point). Default k = 1.
struct Parameterization {
  std::function<double(double, const ExtendedPoint&)> k =
      [](double, const ExtendedPoint&) { return 1.0; };

  static Parameterization constant(double c) {
    return {[c](double, const ExtendedPoint&) { return c; }};
  }
  static Parameterization of_s(std::function<double(double)> f) {
    return {[f = std::move(f)](double s, const ExtendedPoint&) { return f(s); }};
  }
};

inline ExtendedPoint lift(std::vector<double> q, std::vector<double> p, double t,
                          const HamiltonianSystem& sys) {
  if (q.size() != sys.n() || p.size() != sys.n())
    throw Error("lift: dimensions do not match the system");
  ExtendedPoint pt{std::move(q), std::move(p), t, 0.0, 0.0};
  pt.e = sys(pt);
  return pt;
}

inline double extended_value(const ExtendedPoint& pt, double k, const HamiltonianSystem& sys) {
  return k * (sys(pt) - pt.e);
}

inline bool on_shell(const ExtendedPoint& pt, const HamiltonianSystem& sys, double tol = 1e-10) {
  return std::fabs(pt.e - sys(pt)) <= tol;
}

struct ExtendedRhs {
  std::vector<double> dq;
  std::vector<double> dp;
  double dt = 0.0;
  double de = 0.0;

  std::vector<double> phase() const {
    std::vector<double> z(dq);
    z.insert(z.end(), dp.begin(), dp.end());
    z.push_back(dt);
    z.push_back(de);
    return z;
  }
};

inline ExtendedRhs extended_rhs(const ExtendedPoint& pt, double k, const HamiltonianSystem& sys) {
  const std::size_t n = sys.n();
  if (pt.n() != n) throw Error("extended_rhs: dimension mismatch");
  auto g = numkit::grad_eval(sys.field(), sys.args(pt));
  ExtendedRhs r;
  r.dq.resize(n);
  r.dp.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    r.dq[i] = k * g.gradient[n + i];
    r.dp[i] = -k * g.gradient[i];
  }
  r.dt = k;
  r.de = k * g.gradient[2 * n];
  return r;
}

// Integrates the extended canonical equations over s. State layout is the
// phase layout (q, p, t, e).
inline Trajectory propagate(const ExtendedPoint& pt0, const HamiltonianSystem& sys,
                            const Parameterization& par, double s0, double s1,
                            const IntegratorOptions& opts = {}) {
  pt0.check();
  if (pt0.n() != sys.n()) throw Error("propagate: dimension mismatch");
  auto rhs = [&sys, &par](double s, std::span<const double> z) {
    ExtendedPoint pt = ExtendedPoint::from_phase(z, s);
    const double k = par.k(s, pt);
    if (!std::isfinite(k)) throw DomainError("k is not finite");
    return extended_rhs(pt, k, sys).phase();
  };
  return numkit::integrate(rhs, pt0.phase(), s0, s1, opts, phase_labels(sys.n()), "s");
}

inline ExtendedPoint point_at(const Trajectory& tr, std::size_t i) {
  return ExtendedPoint::from_phase(tr.state(i), tr.s(i));
}

}  // namespace xps::phase
