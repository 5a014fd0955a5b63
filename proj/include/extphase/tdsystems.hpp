#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "extphase/errors.hpp"
#include "extphase/numkit/dual.hpp"
#include "extphase/numkit/field.hpp"
#include "extphase/numkit/ode.hpp"
#include "extphase/numkit/quadrature.hpp"
#include "extphase/phase/extended_point.hpp"
#include "extphase/phase/symplectic.hpp"

namespace xps::tdsystems {

using numkit::IntegratorOptions;
using numkit::ScalarField;
using numkit::TimeFunction;
using numkit::Trajectory;
using numkit::VectorField;
using phase::ExtendedMap;
using phase::ExtendedPoint;

// H = e^{-F} p^2 / 2 + e^{F} omega^2 q^2 / 2
struct OscillatorSpec {
  std::size_t n = 1;
  TimeFunction omega2;
  TimeFunction F = TimeFunction::constant(0.0);

  void check() const {
    if (n == 0) throw Error("oscillator dimension must be positive");
    if (omega2.empty() || F.empty()) throw Error("oscillator needs omega2(t) and F(t)");
  }
};

// Time-dependent coefficients at one instant; f and its derivatives come from F.
struct OscCoeffs {
  double F, f, fdot, fddot, w2, w2dot;
};

inline OscCoeffs coefficients(const OscillatorSpec& s, double t) {
  const auto fj = s.F.jet(t);
  const auto wj = s.omega2.jet(t);
  OscCoeffs c{fj[0], fj[1], fj[2], fj[3], wj[0], wj[1]};
  for (double v : {c.F, c.f, c.fdot, c.fddot, c.w2, c.w2dot})
    if (!std::isfinite(v)) throw DomainError("oscillator coefficients not finite at t=" + std::to_string(t));
  return c;
}

struct XiState {
  double xi = 1.0;
  double xidot = 0.0;
  double xiddot = 0.0;
};

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline std::vector<std::string> qp_labels(std::size_t n) {
  std::vector<std::string> l;
  for (std::size_t i = 0; i < n; ++i) l.push_back("q" + std::to_string(i + 1));
  for (std::size_t i = 0; i < n; ++i) l.push_back("p" + std::to_string(i + 1));
  return l;
}

inline void check_dims(std::size_t n, const std::vector<double>& q, const std::vector<double>& p) {
  if (q.size() != n || p.size() != n) throw Error("initial q, p must have dimension n");
}

// k-th derivative of g at t, as a dual number when t is one (k <= 2).
inline double deriv(const TimeFunction& g, double t, int k) { return g.jet(t)[k]; }
inline numkit::D1 deriv(const TimeFunction& g, const numkit::D1& t, int k) {
  const auto j = g.jet(t.value());
  return numkit::D1::chain(t, j[k], j[k + 1]);
}

// (q, p, e) derivatives for the damped oscillator.
inline void oscillator_flow(const OscCoeffs& c, std::size_t n, std::span<const double> y,
                            std::span<double> dy) {
  const double em = std::exp(-c.F), ep = std::exp(c.F);
  double p2 = 0.0, q2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    dy[i] = em * y[n + i];
    dy[n + i] = -ep * c.w2 * y[i];
    p2 += y[n + i] * y[n + i];
    q2 += y[i] * y[i];
  }
  // de/dt = dH/dt
  dy[2 * n] = -0.5 * c.f * em * p2 + 0.5 * ep * (c.f * c.w2 + c.w2dot) * q2;
}

}  // namespace detail

inline double oscillator_energy(const OscillatorSpec& s, std::span<const double> q,
                                std::span<const double> p, double t) {
  const auto c = coefficients(s, t);
  return 0.5 * std::exp(-c.F) * detail::dot(p, p) + 0.5 * std::exp(c.F) * c.w2 * detail::dot(q, q);
}

// Columns q.., p.., e over t.
inline Trajectory oscillator_propagate(const OscillatorSpec& spec, const std::vector<double>& q0,
                                       const std::vector<double>& p0, double t0, double t1,
                                       const IntegratorOptions& opts = {}) {
  spec.check();
  const std::size_t n = spec.n;
  detail::check_dims(n, q0, p0);
  std::vector<double> y(q0);
  y.insert(y.end(), p0.begin(), p0.end());
  y.push_back(oscillator_energy(spec, q0, p0, t0));
  auto labels = detail::qp_labels(n);
  labels.push_back("e");
  auto rhs = [spec, n](double t, std::span<const double> z) {
    std::vector<double> dz(2 * n + 1);
    detail::oscillator_flow(coefficients(spec, t), n, z, dz);
    return dz;
  };
  return numkit::integrate(rhs, std::move(y), t0, t1, opts, std::move(labels), "t");
}

// xi''' = -xi' (4w^2 - 2f' - f^2) - xi (2 (w^2)' - f'' - f f')
inline double xi_third(const OscCoeffs& c, const XiState& x) {
  return -x.xidot * (4.0 * c.w2 - 2.0 * c.fdot - c.f * c.f) -
         x.xi * (2.0 * c.w2dot - c.fddot - c.f * c.fdot);
}

// Returns (xi', xi'', xi''').
inline XiState xi_oscillator_rhs(const OscillatorSpec& spec, double t, const XiState& x) {
  return {x.xidot, x.xiddot, xi_third(coefficients(spec, t), x)};
}

// Constant of the xi equation: xi xi''/2 - xi'^2/4 + xi^2 (w^2 - f'/2 - f^2/4).
inline double omega0_squared(const OscillatorSpec& spec, double t, const XiState& x) {
  const auto c = coefficients(spec, t);
  return 0.5 * x.xi * x.xiddot - 0.25 * x.xidot * x.xidot +
         x.xi * x.xi * (c.w2 - 0.5 * c.fdot - 0.25 * c.f * c.f);
}

// The invariant e' written with q, p only.
inline double leach_invariant(const OscillatorSpec& spec, const ExtendedPoint& pt, const XiState& x) {
  const auto c = coefficients(spec, pt.t);
  const double qp = detail::dot(pt.q, pt.p), q2 = detail::dot(pt.q, pt.q), p2 = detail::dot(pt.p, pt.p);
  return 0.5 * std::exp(-c.F) * x.xi * p2 - 0.5 * (x.xidot - x.xi * c.f) * qp +
         0.25 * std::exp(c.F) * (x.xiddot - x.xidot * c.f - x.xi * c.fdot + 2.0 * x.xi * c.w2) * q2;
}

// The e' transformation rule, linear in e. Equals leach_invariant when e = H.
inline double energy_rule(const OscillatorSpec& spec, const ExtendedPoint& pt, const XiState& x) {
  const auto c = coefficients(spec, pt.t);
  const double qp = detail::dot(pt.q, pt.p), q2 = detail::dot(pt.q, pt.q);
  return x.xi * pt.e - 0.5 * (x.xidot - x.xi * c.f) * qp +
         0.25 * std::exp(c.F) * (x.xiddot - x.xidot * c.f - x.xi * c.fdot) * q2;
}

// I_i^j = p_i q^j - p_j q^i
inline Eigen::MatrixXd angular_invariants(std::span<const double> q, std::span<const double> p) {
  const auto n = static_cast<Eigen::Index>(q.size());
  if (p.size() != q.size()) throw Error("q and p dimensions differ");
  if (n < 2) return Eigen::MatrixXd(0, 0);
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = p[i] * q[j] - p[j] * q[i];
  return m;
}

// Oscillator co-integrated with xi and t' = ∫ dt / xi.
// Columns q.., p.., e, xi, xidot, xiddot, t'.
inline Trajectory oscillator_xi_propagate(const OscillatorSpec& spec, const std::vector<double>& q0,
                                          const std::vector<double>& p0, const XiState& x0,
                                          double t0, double t1, const IntegratorOptions& opts = {}) {
  spec.check();
  const std::size_t n = spec.n;
  detail::check_dims(n, q0, p0);
  if (!(x0.xi > 0.0)) throw UnphysicalMapError("xi(t0) must be positive");
  std::vector<double> y(q0);
  y.insert(y.end(), p0.begin(), p0.end());
  y.push_back(oscillator_energy(spec, q0, p0, t0));
  y.insert(y.end(), {x0.xi, x0.xidot, x0.xiddot, 0.0});
  auto labels = detail::qp_labels(n);
  labels.insert(labels.end(), {"e", "xi", "xidot", "xiddot", "t'"});
  auto rhs = [spec, n](double t, std::span<const double> z) {
    const auto c = coefficients(spec, t);
    std::vector<double> dz(2 * n + 5);
    detail::oscillator_flow(c, n, z, dz);
    const std::size_t k = 2 * n + 1;
    const XiState x{z[k], z[k + 1], z[k + 2]};
    if (!(x.xi > 0.0)) throw DomainError("xi left the positive range", k);
    dz[k] = x.xidot;
    dz[k + 1] = x.xiddot;
    dz[k + 2] = xi_third(c, x);
    dz[k + 3] = 1.0 / x.xi;
    return dz;
  };
  return numkit::integrate(rhs, std::move(y), t0, t1, opts, std::move(labels), "t");
}

inline ExtendedPoint oscillator_point(const Trajectory& tr, std::size_t i, std::size_t n) {
  ExtendedPoint pt;
  for (std::size_t k = 0; k < n; ++k) {
    pt.q.push_back(tr.at(i, k));
    pt.p.push_back(tr.at(i, n + k));
  }
  pt.t = tr.s(i);
  pt.e = tr.at(i, 2 * n);
  return pt;
}

inline XiState xi_at(const Trajectory& tr, std::size_t i, std::size_t n) {
  return {tr.at(i, 2 * n + 1), tr.at(i, 2 * n + 2), tr.at(i, 2 * n + 3)};
}

namespace detail {

template <class T, class X>
std::vector<T> oscillator_rules(const OscillatorSpec& s, std::size_t n, std::span<const T> z,
                                const X& xi_of, double tprime_base) {
  const T& t = z[n];
  const T F = s.F(t);
  const T f = deriv(s.F, t, 1);
  const T fdot = deriv(s.F, t, 2);
  auto [xi, xid, xidd, tp] = xi_of(t);
  if (!(numkit::value_of(xi) > 0.0)) throw UnphysicalMapError("xi <= 0: map is not physical");
  const T e = -z[2 * n + 1];
  const T a = numkit::sqrt(numkit::exp(F) / xi);
  const T b = -0.5 * (xid - xi * f) * a;
  const T d = numkit::sqrt(xi / numkit::exp(F));
  T qp(0.0), q2(0.0);
  for (std::size_t i = 0; i < n; ++i) {
    qp += z[i] * z[n + 1 + i];
    q2 += z[i] * z[i];
  }
  std::vector<T> out(2 * n + 2);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = a * z[i];
    out[n + 1 + i] = b * z[i] + d * z[n + 1 + i];
  }
  out[n] = tp + tprime_base;
  const T ep = xi * e - 0.5 * (xid - xi * f) * qp + 0.25 * numkit::exp(F) * (xidd - xid * f - xi * fdot) * q2;
  out[2 * n + 1] = -ep;
  return out;
}

}  // namespace detail

// Image (q', p', t', e') of an extended point given xi at pt.t and t' there.
inline ExtendedPoint oscillator_canonical_map(const OscillatorSpec& spec, const ExtendedPoint& pt,
                                              const XiState& x, double tprime) {
  spec.check();
  if (pt.q.size() != spec.n || pt.p.size() != spec.n) throw Error("point dimension must be n");
  if (!(x.xi > 0.0)) throw UnphysicalMapError("xi <= 0: map is not physical");
  auto z = pt.canonical();
  auto fixed = [&](double) { return std::array<double, 4>{x.xi, x.xidot, x.xiddot, tprime}; };
  auto w = detail::oscillator_rules<double>(spec, spec.n, z, fixed, 0.0);
  return ExtendedPoint::from_canonical(w, pt.s);
}

// xi(t) about t0 as a cubic Taylor polynomial; derivatives are consistent by construction.
inline TimeFunction xi_taylor(const OscillatorSpec& spec, double t0, const XiState& x) {
  const double x3 = xi_oscillator_rhs(spec, t0, x).xiddot;
  const double a0 = x.xi, a1 = x.xidot, a2 = x.xiddot / 2.0, a3 = x3 / 6.0;
  return TimeFunction([=](const auto& t) {
    auto h = t - t0;
    return a0 + h * (a1 + h * (a2 + h * a3));
  });
}

// The map as a function on the whole extended space for a given xi(t);
// t' = tprime0 + ∫_{t0}^{t} dτ / xi.
inline ExtendedMap oscillator_extended_map(const OscillatorSpec& spec, const TimeFunction& xi,
                                           double t0 = 0.0, double tprime0 = 0.0) {
  spec.check();
  const std::size_t n = spec.n;
  const TimeFunction inv([xi](const auto& t) { return 1.0 / xi(t); });
  return ExtendedMap::from_canonical(n, [spec, n, xi, inv, t0, tprime0](auto z) {
    using T = std::remove_const_t<typename decltype(z)::element_type>;
    auto xi_of = [&](const T& t) {
      const T x = xi(t);
      if (!(numkit::value_of(x) > 0.0)) throw UnphysicalMapError("xi <= 0: map is not physical");
      return std::array<T, 4>{x, detail::deriv(xi, t, 1), detail::deriv(xi, t, 2),
                              numkit::primitive(inv, t0, t)};
    };
    return detail::oscillator_rules<T>(spec, n, z, xi_of, tprime0);
  });
}

// H' = p'^2/2 + omega0^2 q'^2/2
inline double autonomous_energy(const ExtendedPoint& image, double omega0_2) {
  return 0.5 * detail::dot(image.p, image.p) + 0.5 * omega0_2 * detail::dot(image.q, image.q);
}

// H = p^2/2 + V(q, t). V, gradV and dVdt take (q.., t).
struct PotentialSpec {
  std::size_t n = 1;
  ScalarField V;
  VectorField gradV;
  ScalarField dVdt;

  // gradV and dVdt against automatic derivatives of V at the given points.
  double consistency_error(const std::vector<std::vector<double>>& points) const {
    double worst = 0.0;
    for (const auto& x : points) {
      if (x.size() != n + 1) throw Error("potential point must be (q, t)");
      const auto g = numkit::grad_eval(V, x);
      const auto gv = gradV(std::span<const double>(x));
      for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::fabs(g.gradient[i] - gv[i]));
      worst = std::max(worst, std::fabs(g.gradient[n] - dVdt(std::span<const double>(x))));
    }
    return worst;
  }
};

// Builds the spec from V alone; derivatives by forward-mode differentiation.
template <class Fn>
PotentialSpec make_potential(std::size_t n, Fn v) {
  if (n == 0) throw Error("potential dimension must be positive");
  ScalarField V = numkit::make_field(n + 1, v);
  VectorField grad(n + 1, [V, n](auto x) {
    using T = std::remove_const_t<typename decltype(x)::element_type>;
    if constexpr (std::is_same_v<T, double>) {
      auto g = numkit::grad_eval(V, std::vector<double>(x.begin(), x.end())).gradient;
      g.resize(n);
      return g;
    } else {
      throw Error("gradV is not differentiable");
      return std::vector<T>{};
    }
  });
  ScalarField dt = ScalarField(
      n + 1,
      [V, n](std::span<const double> x) {
        return numkit::grad_eval(V, std::vector<double>(x.begin(), x.end())).gradient[n];
      },
      [](std::span<const numkit::D1>) -> numkit::D1 { throw Error("dVdt is not differentiable"); },
      [](std::span<const numkit::D2>) -> numkit::D2 { throw Error("dVdt is not differentiable"); });
  return PotentialSpec{n, std::move(V), std::move(grad), std::move(dt)};
}

inline constexpr double kCoefficientFloor = 1e-12;

// g1 = 4 dV/dt / q^2, g2 = 4 (V + q.gradV / 2) / q^2
inline std::pair<double, double> xi_coefficients(const PotentialSpec& s, std::span<const double> q, double t) {
  if (q.size() != s.n) throw Error("q dimension must be n");
  const double q2 = detail::dot(q, q);
  if (!(q2 >= kCoefficientFloor))
    throw CoefficientSingularityError("q^2 below floor in xi coefficients at t=" + std::to_string(t), t, q2);
  std::vector<double> x(q.begin(), q.end());
  x.push_back(t);
  const auto g = s.gradV(std::span<const double>(x));
  const double v = s.V(x);
  const double g1 = 4.0 * s.dVdt(std::span<const double>(x)) / q2;
  const double g2 = 4.0 * (v + 0.5 * detail::dot(q, g)) / q2;
  return {g1, g2};
}

inline Eigen::Matrix3d xi_general_rhs(const PotentialSpec& s, std::span<const double> q, double t) {
  const auto [g1, g2] = xi_coefficients(s, q, t);
  Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
  a(0, 1) = 1.0;
  a(1, 2) = 1.0;
  a(2, 0) = -g1;
  a(2, 1) = -g2;
  return a;
}

struct TransferMatrix {
  Eigen::Matrix3d Xi = Eigen::Matrix3d::Identity();
  double t = 0.0;
};

// (e, -q.p/2, q^2/4)
inline Eigen::Vector3d invariant_triple(std::span<const double> q, std::span<const double> p, double e) {
  return {e, -0.5 * detail::dot(q, p), 0.25 * detail::dot(q, q)};
}

struct TransferRun {
  std::size_t n = 1;
  Trajectory trajectory;  // q.., p.., e, X11..X33 (row-major) over t
  std::vector<TransferMatrix> path;

  Eigen::Vector3d triple(std::size_t i) const {
    std::vector<double> q(n), p(n);
    for (std::size_t k = 0; k < n; ++k) {
      q[k] = trajectory.at(i, k);
      p[k] = trajectory.at(i, n + k);
    }
    return invariant_triple(q, p, trajectory.at(i, 2 * n));
  }
  // Xi^T (e, -q.p/2, q^2/4); the initial triple for an exact run.
  Eigen::Vector3d invariants(std::size_t i) const { return path[i].Xi.transpose() * triple(i); }

  // t, q.., p.., e, xi1, xi2, xi3, detXi, inv1, inv2, inv3
  void write_csv(std::ostream& os) const {
    os << "t";
    for (std::size_t k = 0; k < n; ++k) os << ",q" << k + 1;
    for (std::size_t k = 0; k < n; ++k) os << ",p" << k + 1;
    os << ",e,xi1,xi2,xi3,detXi,inv1,inv2,inv3\n";
    os.precision(17);
    for (std::size_t i = 0; i < trajectory.size(); ++i) {
      os << trajectory.s(i);
      for (std::size_t c = 0; c < 2 * n + 1; ++c) os << ',' << trajectory.at(i, c);
      const auto& X = path[i].Xi;
      const auto inv = invariants(i);
      os << ',' << X(0, 0) << ',' << X(0, 1) << ',' << X(0, 2) << ',' << X.determinant() << ','
         << inv(0) << ',' << inv(1) << ',' << inv(2) << '\n';
    }
  }
};

// Canonical equations of H = p^2/2 + V co-integrated with the three
// fundamental xi-solutions, Xi(t0) = I.
inline TransferRun transfer_matrix(const PotentialSpec& spec, const std::vector<double>& q0,
                                   const std::vector<double>& p0, double t0, double t1,
                                   const IntegratorOptions& opts = {}) {
  const std::size_t n = spec.n;
  detail::check_dims(n, q0, p0);
  std::vector<double> x0(q0);
  x0.push_back(t0);
  std::vector<double> y(q0);
  y.insert(y.end(), p0.begin(), p0.end());
  y.push_back(0.5 * detail::dot(p0, p0) + spec.V(x0));
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) y.push_back(r == c ? 1.0 : 0.0);
  auto labels = detail::qp_labels(n);
  labels.push_back("e");
  for (int r = 1; r <= 3; ++r)
    for (int c = 1; c <= 3; ++c) labels.push_back("X" + std::to_string(r) + std::to_string(c));

  auto rhs = [spec, n](double t, std::span<const double> z) {
    std::vector<double> x(z.begin(), z.begin() + n);
    const auto a = xi_general_rhs(spec, x, t);
    x.push_back(t);
    const auto g = spec.gradV(std::span<const double>(x));
    std::vector<double> dz(z.size());
    for (std::size_t i = 0; i < n; ++i) {
      dz[i] = z[n + i];
      dz[n + i] = -g[i];
    }
    dz[2 * n] = spec.dVdt(std::span<const double>(x));
    Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>> X(z.data() + 2 * n + 1);
    Eigen::Map<Eigen::Matrix<double, 3, 3, Eigen::RowMajor>> dX(dz.data() + 2 * n + 1);
    dX = a * X;
    return dz;
  };

  TransferRun run;
  run.n = n;
  run.trajectory = numkit::integrate(rhs, std::move(y), t0, t1, opts, std::move(labels), "t");
  for (std::size_t i = 0; i < run.trajectory.size(); ++i) {
    auto st = run.trajectory.state(i);
    TransferMatrix m;
    m.t = run.trajectory.s(i);
    m.Xi = Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(st.data() + 2 * n + 1);
    run.path.push_back(m);
  }
  return run;
}

}  // namespace xps::tdsystems
