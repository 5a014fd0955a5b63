#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "extphase/errors.hpp"
#include "extphase/numkit/dual.hpp"
#include "extphase/numkit/field.hpp"
#include "extphase/numkit/trajectory.hpp"
#include "extphase/phase/extended_point.hpp"

namespace xps::lagrangian {

using numkit::ScalarField;
using numkit::Trajectory;
using phase::HamiltonianSystem;

// L(q, qdot, t), arity 2n+1.
struct LagrangianSystem {
  std::size_t n = 1;
  ScalarField L;
  std::string description;

  template <class F>
  static LagrangianSystem make(std::size_t n, std::string desc, F f) {
    if (n == 0) throw Error("Lagrangian needs n >= 1");
    return {n, numkit::make_field(2 * n + 1, std::move(f)), std::move(desc)};
  }
};

// q1 = (q, t), v1 = (dq/ds, dt/ds).
struct ExtendedVelocityPoint {
  std::vector<double> q1;
  std::vector<double> v1;

  std::vector<double> args() const {
    std::vector<double> x(q1);
    x.insert(x.end(), v1.begin(), v1.end());
    return x;
  }
};

// L1(q1, v1) = L(q, v/v_t, t) v_t over (q, t, dq/ds, dt/ds).
inline ScalarField extended_field(const LagrangianSystem& sys) {
  const ScalarField L = sys.L;
  const std::size_t n = sys.n;
  return numkit::make_field(2 * n + 2, [L, n](auto z) {
    using T = std::remove_const_t<typename decltype(z)::element_type>;
    const T& vt = z[2 * n + 1];
    if (numkit::value_of(vt) == 0.0) throw DegenerateFibreError("dt/ds = 0: velocity is undefined");
    std::vector<T> x(2 * n + 1);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = z[i];
      x[n + i] = z[n + 1 + i] / vt;
    }
    x[2 * n] = z[n];
    return L(std::span<const T>(x)) * vt;
  });
}

namespace detail {

inline void check_point(const LagrangianSystem& sys, const ExtendedVelocityPoint& pt) {
  if (pt.q1.size() != sys.n + 1 || pt.v1.size() != sys.n + 1)
    throw Error("extended velocity point must have n+1 components in q1 and v1");
}

}  // namespace detail

inline double extended_lagrangian(const LagrangianSystem& sys, const ExtendedVelocityPoint& pt) {
  detail::check_point(sys, pt);
  return extended_field(sys)(pt.args());
}

struct HomogeneityResidual {
  double scaling = 0.0;  // |L1(q1, c v1) - c L1(q1, v1)|
  double euler = 0.0;    // |L1 - sum dL1/dv_i v_i|
};

inline HomogeneityResidual homogeneity_residual(const LagrangianSystem& sys,
                                                const ExtendedVelocityPoint& pt, double c) {
  detail::check_point(sys, pt);
  if (c == 0.0) throw DegenerateFibreError("scale factor must be nonzero");
  const auto f = extended_field(sys);
  const std::size_t n = sys.n;
  auto scaled = pt;
  for (double& v : scaled.v1) v *= c;
  const auto g = numkit::grad_eval(f, pt.args());
  double sum = 0.0;
  for (std::size_t i = 0; i <= n; ++i) sum += g.gradient[n + 1 + i] * pt.v1[i];
  return {std::fabs(f(scaled.args()) - c * g.value), std::fabs(g.value - sum)};
}

struct LegendreResult {
  std::vector<double> p;  // dL1/d(dq/ds) = dL/dqdot
  double p_np1 = 0.0;     // dL1/d(dt/ds) = -H
  double h1 = 0.0;        // sum p_i v_i - L1
};

inline LegendreResult legendre_to_h1(const LagrangianSystem& sys, const ExtendedVelocityPoint& pt) {
  detail::check_point(sys, pt);
  const std::size_t n = sys.n;
  const double vt = pt.v1[n];
  if (vt == 0.0) throw DegenerateFibreError("dt/ds = 0: velocity is undefined");
  // Legendre-solvable: dL/dqdot dqdot nonsingular
  std::vector<double> x(2 * n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = pt.q1[i];
    x[n + i] = pt.v1[i] / vt;
  }
  x[2 * n] = pt.q1[n];
  const auto h = numkit::hessian_eval(sys.L, x);
  Eigen::MatrixXd w(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) w(i, j) = h.hessian(n + i, n + j);
  if (std::fabs(w.determinant()) < 1e-12) throw DegeneracyError("Legendre map is singular: d2L/dqdot2 is degenerate");

  const auto f = extended_field(sys);
  const auto g = numkit::grad_eval(f, pt.args());
  LegendreResult r;
  r.p.assign(g.gradient.begin() + n + 1, g.gradient.begin() + 2 * n + 1);
  r.p_np1 = g.gradient[2 * n + 1];
  r.h1 = -g.value;
  for (std::size_t i = 0; i < n; ++i) r.h1 += r.p[i] * pt.v1[i];
  r.h1 += r.p_np1 * vt;
  return r;
}

// H(q, p, t) = p.qdot - L with qdot from p = dL/dqdot by Newton. Gradients use
// the envelope property (dH/dx = partial of p.qdot - L at fixed qdot);
// second derivatives are not provided.
inline HamiltonianSystem paired_hamiltonian(const LagrangianSystem& sys, int max_iter = 50,
                                            double tol = 1e-14) {
  const ScalarField L = sys.L;
  const std::size_t n = sys.n;
  auto solve = [L, n, max_iter, tol](std::span<const double> qpt) {
    std::vector<double> x(2 * n + 1);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = qpt[i];
      x[n + i] = qpt[n + i];  // qdot seeded with p
    }
    x[2 * n] = qpt[2 * n];
    for (int it = 0; it < max_iter; ++it) {
      const auto h = numkit::hessian_eval(L, x);
      Eigen::VectorXd r(n);
      Eigen::MatrixXd w(n, n);
      double scale = 1.0;
      for (std::size_t i = 0; i < n; ++i) {
        r(i) = h.gradient[n + i] - qpt[n + i];
        scale = std::max(scale, std::fabs(qpt[n + i]));
        for (std::size_t j = 0; j < n; ++j) w(i, j) = h.hessian(n + i, n + j);
      }
      if (r.cwiseAbs().maxCoeff() <= tol * scale) return x;
      auto lu = w.fullPivLu();
      if (!lu.isInvertible()) throw DegeneracyError("Legendre map is singular: d2L/dqdot2 is degenerate");
      const Eigen::VectorXd d = lu.solve(r);
      for (std::size_t i = 0; i < n; ++i) x[n + i] -= d(i);
    }
    throw ImplicitSolveError("p = dL/dqdot did not converge");
  };
  auto phi = [L, n](auto qpt, const std::vector<double>& x) {
    using T = std::remove_const_t<typename decltype(qpt)::element_type>;
    std::vector<T> a(2 * n + 1);
    T pv(0.0);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = qpt[i];
      a[n + i] = T(x[n + i]);
      pv += qpt[n + i] * x[n + i];
    }
    a[2 * n] = qpt[2 * n];
    return pv - L(std::span<const T>(a));
  };
  ScalarField h(
      2 * n + 1,
      [solve, phi](std::span<const double> z) { return phi(z, solve(z)); },
      [solve, phi, n](std::span<const numkit::D1> z) {
        std::vector<double> v(2 * n + 1);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = z[i].value();
        return phi(z, solve(v));
      },
      [](std::span<const numkit::D2>) -> numkit::D2 {
        throw Error("second derivatives of the paired Hamiltonian are not available");
      });
  return HamiltonianSystem(n, std::move(h), "Legendre transform of " + sys.description);
}

struct ELResidual {
  double extended_max = 0.0;      // max |dL1/dq1 - d/ds dL1/dv1|
  double conventional_max = 0.0;  // max |dL/dq - d/dt dL/dqdot|
  double conventional_min = 0.0;  // min over samples of the per-sample max
  std::size_t samples = 0;
};

// Residuals along a path in s. The trajectory must carry columns q1..qn and t
// (as written by phase::propagate); velocities are the stored derivatives and
// accelerations come from the dense derivative samples. The first and last
// `skip` samples are excluded.
inline ELResidual euler_lagrange_residual(const LagrangianSystem& sys, const Trajectory& tr,
                                          std::size_t skip = 2) {
  const std::size_t n = sys.n;
  if (tr.size() < 2 * skip + 5) throw Error("trajectory too short for second derivatives");
  std::vector<std::size_t> cols;
  for (std::size_t i = 0; i < n; ++i) cols.push_back(tr.column("q" + std::to_string(i + 1)));
  cols.push_back(tr.column("t"));
  const auto f = extended_field(sys);
  const std::size_t m = n + 1;

  ELResidual out;
  out.conventional_min = INFINITY;
  for (std::size_t k = skip; k + skip < tr.size(); ++k) {
    const auto d = tr.derivative(k);
    const auto a2 = tr.second_derivative_at(k);
    std::vector<double> q1(m), v1(m), a1(m);
    for (std::size_t i = 0; i < m; ++i) {
      q1[i] = tr.at(k, cols[i]);
      v1[i] = d[cols[i]];
      a1[i] = a2[cols[i]];
    }
    ExtendedVelocityPoint pt{q1, v1};
    // extended: dL1/dq1_i - sum_j (d2L1/dv_i dq_j v_j + d2L1/dv_i dv_j a_j)
    const auto h = numkit::hessian_eval(f, pt.args());
    double ext = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double r = h.gradient[i];
      for (std::size_t j = 0; j < m; ++j)
        r -= h.hessian(m + i, j) * v1[j] + h.hessian(m + i, m + j) * a1[j];
      ext = std::max(ext, std::fabs(r));
    }
    // conventional, with qdot = v/v_t and qddot = (a v_t - v a_t)/v_t^3
    const double vt = v1[n], at = a1[n];
    if (vt == 0.0) throw DegenerateFibreError("dt/ds = 0 along the path");
    std::vector<double> x(2 * n + 1), qdd(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = q1[i];
      x[n + i] = v1[i] / vt;
      qdd[i] = (a1[i] * vt - v1[i] * at) / (vt * vt * vt);
    }
    x[2 * n] = q1[n];
    const auto hl = numkit::hessian_eval(sys.L, x);
    double conv = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double r = hl.gradient[i] - hl.hessian(n + i, 2 * n);
      for (std::size_t j = 0; j < n; ++j)
        r -= hl.hessian(n + i, j) * x[n + j] + hl.hessian(n + i, n + j) * qdd[j];
      conv = std::max(conv, std::fabs(r));
    }
    out.extended_max = std::max(out.extended_max, ext);
    out.conventional_max = std::max(out.conventional_max, conv);
    out.conventional_min = std::min(out.conventional_min, conv);
    ++out.samples;
  }
  return out;
}

}  // namespace xps::lagrangian
