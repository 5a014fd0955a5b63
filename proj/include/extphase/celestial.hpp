#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "extphase/errors.hpp"
#include "extphase/numkit/field.hpp"
#include "extphase/numkit/ode.hpp"
#include "extphase/numkit/quadrature.hpp"
#include "extphase/phase/extended_point.hpp"
#include "extphase/phase/symplectic.hpp"
#include "extphase/transform/generating.hpp"

namespace xps::celestial {

using numkit::IntegratorOptions;
using numkit::TimeFunction;
using numkit::Trajectory;
using phase::ExtendedMap;
using phase::ExtendedPoint;
using phase::HamiltonianSystem;
using transform::GeneratingFunction;

// ---------------------------------------------------------------- time scaling

struct TimeScaleSpec {
  TimeFunction xi;
  double t0 = 0.0;
};

// 1/xi, refusing non-positive xi
inline TimeFunction reciprocal(const TimeFunction& xi) {
  return TimeFunction([xi](const auto& t) {
    auto v = xi(t);
    if (!(numkit::value_of(v) > 0.0))
      throw DomainError("time scaling function must stay positive");
    return 1.0 / v;
  });
}

// F2 = q.p' - e' tau(t), tau = int_{t0}^t dtau / xi
inline GeneratingFunction timescale_generating(const TimeScaleSpec& spec, std::size_t n = 1) {
  const TimeFunction inv = reciprocal(spec.xi);
  const double t0 = spec.t0;
  return GeneratingFunction::make(transform::Kind::F2, n, "time scaling", [inv, t0, n](auto z) {
    using T = std::remove_const_t<typename decltype(z)::element_type>;
    T v(0.0);
    for (std::size_t i = 0; i < n; ++i) v += z[i] * z[n + i];
    T tau = numkit::primitive(inv, t0, z[2 * n]);
    return v - z[2 * n + 1] * tau;
  });
}

// Canonical equations of a time-scaled system in the new time t', produced in
// two phases. Phase one differentiates H with xi kept as a pure function of
// time: dq/dt' = xi H_p, dp/dt' = -xi H_q, dt/dt' = xi, de/dt' = xi H_t.
// Phase two closes the system by identifying xi with a function of the state.
// xi is never multiplied into H before differentiation.
class TimeScaledEquations {
 public:
  explicit TimeScaledEquations(HamiltonianSystem h) : h_(std::move(h)) {}

  // Phase one: the unscaled direction field (xi factored out).
  std::vector<double> unscaled(const ExtendedPoint& pt) const {
    const std::size_t n = h_.n();
    auto g = numkit::grad_eval(h_.field(), h_.args(pt));
    std::vector<double> d(2 * n + 2);
    for (std::size_t i = 0; i < n; ++i) {
      d[i] = g.gradient[n + i];
      d[n + i] = -g.gradient[i];
    }
    d[2 * n] = 1.0;
    d[2 * n + 1] = g.gradient[2 * n];
    return d;
  }

  // Phase two: closed rhs on the phase layout (q, p, t, e) in t'.
  numkit::OdeRhs close(std::function<double(const ExtendedPoint&)> xi_of_state) const {
    return [self = *this, xi = std::move(xi_of_state)](double, std::span<const double> y) {
      auto pt = ExtendedPoint::from_phase(y);
      const double k = xi(pt);
      auto d = self.unscaled(pt);
      for (auto& v : d) v *= k;
      return d;
    };
  }

  const HamiltonianSystem& hamiltonian() const { return h_; }

 private:
  HamiltonianSystem h_;
};

// ---------------------------------------------------------------- 1-D Kepler

struct KeplerSpec {
  double K2 = 1.0;
  double x0 = 1.0;
  double p0 = 0.0;

  void check() const {
    if (!(K2 > 0.0)) throw Error("K2 must be positive");
    if (!(x0 > 0.0)) throw DomainError("x0 must be positive");
    if (!std::isfinite(p0)) throw DomainError("p0 must be finite");
  }
  double energy() const { return 0.5 * p0 * p0 - K2 / x0; }
};

inline HamiltonianSystem kepler_hamiltonian(double K2) {
  return HamiltonianSystem::make(1, "1-D Kepler", [K2](auto z) {
    if (!(numkit::value_of(z[0]) > 0.0)) throw DomainError("Kepler H needs x > 0", 0);
    return 0.5 * z[1] * z[1] - K2 / z[0];
  });
}

// x'' = -K2/x^2 in t. Columns x, p, e (e = H(x, p) as a monitor). Stalls near
// the collision; the stall carries the partial trajectory with the same columns.
inline Trajectory kepler_direct(const KeplerSpec& spec, double t0, double t1,
                                const IntegratorOptions& opts = {}) {
  spec.check();
  const double K2 = spec.K2;
  auto rhs = [K2](double, std::span<const double> y) {
    if (!(y[0] > 0.0)) throw DomainError("collision: x <= 0", 0);
    return std::vector<double>{y[1], -K2 / (y[0] * y[0])};
  };
  auto with_energy = [K2](const Trajectory& tr) {
    Trajectory::Builder b({"x", "p", "e"}, "t");
    for (std::size_t i = 0; i < tr.size(); ++i) {
      const double x = tr.at(i, 0), p = tr.at(i, 1);
      const double st[3] = {x, p, 0.5 * p * p - K2 / x};
      const double dv[3] = {tr.derivative(i)[0], tr.derivative(i)[1], 0.0};
      b.push(tr.s(i), st, dv);
    }
    return std::move(b).finish();
  };
  try {
    return with_energy(numkit::integrate(rhs, {spec.x0, spec.p0}, t0, t1, opts, {"x", "p"}, "t"));
  } catch (const numkit::IntegrationStall& st) {
    throw numkit::IntegrationStall(st.what(), st.s(), st.state(), with_energy(st.partial()));
  }
}

// Regularized motion in t' with xi = x: x'' = 2 e x + K2, dt/dt' = x.
// Columns x, dxdt', t, e. `e` is the energy parameter; on shell it equals
// spec.energy() and dxdt'(0) = x0 p0.
inline Trajectory kepler_regularized(const KeplerSpec& spec, double e, double w0, double tp0,
                                     double tp1, const IntegratorOptions& opts = {}) {
  spec.check();
  const double K2 = spec.K2;
  auto rhs = [K2, e](double, std::span<const double> y) {
    return std::vector<double>{y[1], 2.0 * e * y[0] + K2, y[0], 0.0};
  };
  return numkit::integrate(rhs, {spec.x0, w0, 0.0, e}, tp0, tp1, opts,
                           {"x", "dxdt'", "t", "e"}, "t'");
}

inline Trajectory kepler_regularized(const KeplerSpec& spec, double tp0, double tp1,
                                     const IntegratorOptions& opts = {}) {
  return kepler_regularized(spec, spec.energy(), spec.x0 * spec.p0, tp0, tp1, opts);
}

struct RegularizedState {
  double x, w, t;
};

// Closed-form solution of x'' = 2 e x + K2 with x(0) = x0, x'(0) = w0, t(0) = 0.
inline RegularizedState kepler_regularized_closed(double K2, double e, double x0, double w0,
                                                  double tp) {
  if (e < 0.0) {
    const double om = std::sqrt(-2.0 * e), c = K2 / (om * om);
    const double cs = std::cos(om * tp), sn = std::sin(om * tp);
    return {c + (x0 - c) * cs + w0 / om * sn, -(x0 - c) * om * sn + w0 * cs,
            c * tp + (x0 - c) * sn / om + w0 / (om * om) * (1.0 - cs)};
  }
  if (e == 0.0)
    return {x0 + w0 * tp + 0.5 * K2 * tp * tp, w0 + K2 * tp,
            x0 * tp + 0.5 * w0 * tp * tp + K2 * tp * tp * tp / 6.0};
  const double om = std::sqrt(2.0 * e), c = K2 / (om * om);
  const double ch = std::cosh(om * tp), sh = std::sinh(om * tp);
  return {-c + (x0 + c) * ch + w0 / om * sh, (x0 + c) * om * sh + w0 * ch,
          -c * tp + (x0 + c) * sh / om + w0 / (om * om) * (ch - 1.0)};
}

// (dx/dt')^2 - 2 e x^2 - 2 K2 x; zero on shell
inline double regularized_energy_residual(double K2, double e, double x, double w) {
  return w * w - 2.0 * e * x * x - 2.0 * K2 * x;
}

// ---------------------------------------------------------------- KS

// F3(q', p, t', e) = (-u1^2 + u2^2 + u3^2 - u4^2) p1 - 2(u1 u2 - u3 u4) p2
//                    - 2(u1 u3 + u2 u4) p3 + e int_0^{t'} xi
// native args (u1..u4, p1..p4, t', e, s)
inline GeneratingFunction ks_generating(TimeFunction xi = TimeFunction::constant(1.0)) {
  return GeneratingFunction::make(transform::Kind::F3, 4, "Kustaanheimo-Stiefel", [xi](auto z) {
    const auto &u1 = z[0], &u2 = z[1], &u3 = z[2], &u4 = z[3];
    auto v = (-u1 * u1 + u2 * u2 + u3 * u3 - u4 * u4) * z[4] - 2.0 * (u1 * u2 - u3 * u4) * z[5] -
             2.0 * (u1 * u3 + u2 * u4) * z[6];
    return v + z[9] * numkit::primitive(xi, 0.0, z[8]);
  });
}

// Bilinear constraint; zero on images of physical momenta.
template <class T>
T ks_bilinear(std::span<const T> u, std::span<const T> pu) {
  return u[3] * pu[0] - u[2] * pu[1] + u[1] * pu[2] - u[0] * pu[3];
}

// u -> q (q4 = 0)
template <class T>
std::array<T, 4> ks_position(std::span<const T> u) {
  return {u[0] * u[0] - u[1] * u[1] - u[2] * u[2] + u[3] * u[3],
          2.0 * (u[0] * u[1] - u[2] * u[3]), 2.0 * (u[0] * u[2] + u[1] * u[3]), T(0.0)};
}

// Forward momentum rules pu = 2 N(u) (p1, p2, p3, 0)
inline std::array<double, 4> ks_momentum_forward(std::span<const double> u,
                                                 std::span<const double> p) {
  return {2 * (u[0] * p[0] + u[1] * p[1] + u[2] * p[2]),
          2 * (-u[1] * p[0] + u[0] * p[1] + u[3] * p[2]),
          2 * (-u[2] * p[0] - u[3] * p[1] + u[0] * p[2]),
          2 * (u[3] * p[0] - u[2] * p[1] + u[1] * p[2])};
}

// Full extended KS map on canonical coordinates
// (u, t', pu, -e') -> (q, t, p, -e). The rule matrix 2N(u) has orthogonal
// columns of norm 2|u|^2, so p = N^T pu / (2|u|^2); its fourth component is
// the bilinear constraint / (2|u|^2).
template <class T>
std::vector<T> ks_canonical(std::span<const T> z, const TimeFunction& xi) {
  std::span<const T> u = z.subspan(0, 4), pu = z.subspan(5, 4);
  const T& tp = z[4];
  const T em = z[9];  // -e'
  T r2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2] + u[3] * u[3];
  if (numkit::value_of(r2) == 0.0) throw CollisionChartError("KS momentum map singular at u = 0");
  auto q = ks_position(u);
  const T d = 2.0 * r2;
  // columns of N: (u1,-u2,-u3,u4), (u2,u1,-u4,-u3), (u3,u4,u1,u2), (u4,-u3,u2,-u1)
  std::array<T, 4> p{(u[0] * pu[0] - u[1] * pu[1] - u[2] * pu[2] + u[3] * pu[3]) / d,
                     (u[1] * pu[0] + u[0] * pu[1] - u[3] * pu[2] - u[2] * pu[3]) / d,
                     (u[2] * pu[0] + u[3] * pu[1] + u[0] * pu[2] + u[1] * pu[3]) / d,
                     ks_bilinear(u, pu) / d};
  T t = numkit::primitive(xi, 0.0, tp);
  T x = xi(tp);
  if (!(numkit::value_of(x) > 0.0)) throw DomainError("time scaling function must stay positive");
  std::vector<T> out{q[0], q[1], q[2], q[3], t, p[0], p[1], p[2], p[3], em / x};
  return out;
}

// Image (q, p, t, e) of a KS point (u, pu, t', e').
inline ExtendedPoint ks_map(const ExtendedPoint& ks, const TimeFunction& xi = TimeFunction::constant(1.0)) {
  if (ks.n() != 4) throw Error("KS points have four coordinates");
  auto z = ks.canonical();
  return ExtendedPoint::from_canonical(ks_canonical(std::span<const double>(z), xi), ks.s);
}

inline ExtendedMap ks_extended_map(const TimeFunction& xi = TimeFunction::constant(1.0)) {
  return ExtendedMap::from_canonical(4, [xi](auto z) {
    using T = std::remove_const_t<typename decltype(z)::element_type>;
    return ks_canonical<T>(z, xi);
  });
}

// Gradient of the bilinear constraint in canonical KS coordinates, as a row.
inline Eigen::MatrixXd ks_constraint_row(const ExtendedPoint& ks) {
  const auto& u = ks.q;
  const auto& pu = ks.p;
  Eigen::MatrixXd row = Eigen::MatrixXd::Zero(1, 10);
  row(0, 0) = -pu[3];
  row(0, 1) = pu[2];
  row(0, 2) = -pu[1];
  row(0, 3) = pu[0];
  row(0, 5) = u[3];
  row(0, 6) = -u[2];
  row(0, 7) = u[1];
  row(0, 8) = -u[0];
  return row;
}

// Removes the bilinear constraint violation by a least-norm shift of pu.
inline ExtendedPoint ks_project(ExtendedPoint ks) {
  const auto row = ks_constraint_row(ks);
  const double l = ks_bilinear<double>(ks.q, ks.p);
  double nn = 0.0;
  for (int i = 0; i < 4; ++i) nn += row(0, 5 + i) * row(0, 5 + i);
  if (nn == 0.0) throw CollisionChartError("u = 0: constraint gradient vanishes");
  for (int i = 0; i < 4; ++i) ks.p[i] -= l / nn * row(0, 5 + i);
  return ks;
}

// Residual of the KS map restricted to the tangent space of the constraint.
inline double ks_symplectic_residual(const ExtendedPoint& ks,
                                     const TimeFunction& xi = TimeFunction::constant(1.0)) {
  auto m = ks_extended_map(xi).jacobian(ks);
  return phase::symplectic_residual_on(m, phase::tangent_basis(ks_constraint_row(ks)));
}

}  // namespace xps::celestial
