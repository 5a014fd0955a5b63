#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "extphase/errors.hpp"
#include "extphase/phase/extended_point.hpp"
#include "extphase/phase/symplectic.hpp"
#include "extphase/transform/generating.hpp"
#include "extphase/transform/newton.hpp"

namespace xps::transform {

using phase::ExtendedMap;
using phase::ExtendedPoint;
using phase::HamiltonianSystem;

// Values of a canonical group at a point: Q = (q, t), P = (p, -e).
inline Eigen::VectorXd group_values(const ExtendedPoint& pt, bool momentum) {
  const std::size_t n = pt.n();
  Eigen::VectorXd v(n + 1);
  for (std::size_t i = 0; i < n; ++i) v(i) = momentum ? pt.p[i] : pt.q[i];
  v(n) = momentum ? -pt.e : pt.t;
  return v;
}

inline ExtendedPoint point_from_groups(const Eigen::VectorXd& qg, const Eigen::VectorXd& pg,
                                       double s) {
  const std::size_t n = static_cast<std::size_t>(qg.size()) - 1;
  ExtendedPoint pt;
  pt.q.assign(qg.data(), qg.data() + n);
  pt.t = qg(n);
  pt.p.assign(pg.data(), pg.data() + n);
  pt.e = -pg(n);
  pt.s = s;
  return pt;
}

// Image of a point together with the exact Jacobian of the map
// (canonical ordering) and the mixed-Hessian determinant at the solution.
struct GeneratedImage {
  ExtendedPoint point;
  Eigen::MatrixXd jacobian;
  double hessian_det = 0.0;
  double dF_ds = 0.0;
  int iterations = 0;
};

namespace detail {

// x: old group fed to the rules, y: new group solved for.
struct Roles {
  Group x, y;
  bool x_first;
};

inline Roles roles(Kind k) {
  switch (k) {
    case Kind::F1: return {Group::Q, Group::Qp, true};
    case Kind::F2: return {Group::Q, Group::Pp, true};
    case Kind::F3: return {Group::P, Group::Qp, false};
    case Kind::F4: return {Group::P, Group::Pp, true};
  }
  return {Group::Q, Group::Pp, true};
}

inline std::vector<double> canon_args(const Roles& r, const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& y, double s) {
  const auto& a = r.x_first ? x : y;
  const auto& b = r.x_first ? y : x;
  std::vector<double> v(a.data(), a.data() + a.size());
  v.insert(v.end(), b.data(), b.data() + b.size());
  v.push_back(s);
  return v;
}

}  // namespace detail

// Solves the kind's rule set at pt. `seed` supplies the initial guess for the
// unknown new group (default: the same-type old group). The branch found is
// the one continuous from the seed.
inline GeneratedImage solve_generating(const GeneratingFunction& f, const ExtendedPoint& pt,
                                       const std::optional<ExtendedPoint>& seed = std::nullopt,
                                       const NewtonOptions& opt = {}) {
  pt.check();
  if (pt.n() != f.n) throw Error("point dimension does not match generating function");
  const CanonicalView view(f);
  const auto r = detail::roles(f.kind);
  const Eigen::Index N = static_cast<Eigen::Index>(f.n + 1);
  const Eigen::Index xo = r.x_first ? 0 : N;
  const Eigen::Index yo = r.x_first ? N : 0;
  const bool x_mom = is_momentum(r.x), y_mom = is_momentum(r.y);
  const Eigen::VectorXd x = group_values(pt, x_mom);
  const Eigen::VectorXd c = group_values(pt, !x_mom);
  const double rx = rho(r.x), ry = rho(r.y);

  Eigen::VectorXd y0 = group_values(seed ? *seed : pt, y_mom);
  NewtonSystem sys = [&](const Eigen::VectorXd& y) {
    auto h = view.hessian(detail::canon_args(r, x, y, pt.s));
    Eigen::VectorXd res(N);
    for (Eigen::Index i = 0; i < N; ++i) res(i) = h.gradient[xo + i] - rx * c(i);
    return std::make_pair(res, Eigen::MatrixXd(h.hessian.block(xo, yo, N, N)));
  };
  auto sol = newton_solve(sys, y0, c.cwiseAbs().maxCoeff(), opt);
  const Eigen::VectorXd& y = sol.x;
  const auto args = detail::canon_args(r, x, y, pt.s);
  auto h = view.hessian(args);
  const Eigen::MatrixXd fxx = h.hessian.block(xo, xo, N, N);
  const Eigen::MatrixXd fxy = h.hessian.block(xo, yo, N, N);
  const Eigen::MatrixXd fyx = h.hessian.block(yo, xo, N, N);
  const Eigen::MatrixXd fyy = h.hessian.block(yo, yo, N, N);
  if (!(std::fabs(fxy.determinant()) >= opt.det_floor))
    throw DegeneracyError("Hessian condition violated at the solution");

  Eigen::VectorXd w(N);
  for (Eigen::Index i = 0; i < N; ++i) w(i) = ry * h.gradient[yo + i];

  // dy = Fxy^-1 (rx dc - Fxx dx), dw = ry (Fyx dx + Fyy dy); old vars (Q, P).
  Eigen::MatrixXd sx = Eigen::MatrixXd::Zero(N, 2 * N), sc = sx;
  sx.block(0, x_mom ? N : 0, N, N).setIdentity();
  sc.block(0, x_mom ? 0 : N, N, N).setIdentity();
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(fxy);
  const Eigen::MatrixXd dy = lu.solve(rx * sc - fxx * sx);
  const Eigen::MatrixXd dw = ry * (fyx * sx + fyy * dy);

  GeneratedImage out;
  out.jacobian.resize(2 * N, 2 * N);
  out.jacobian.topRows(N) = y_mom ? dw : dy;
  out.jacobian.bottomRows(N) = y_mom ? dy : dw;
  out.point = y_mom ? point_from_groups(w, y, pt.s) : point_from_groups(y, w, pt.s);
  out.hessian_det = mixed_determinant(f, view.native_args(args));
  out.dF_ds = h.gradient.back();
  out.iterations = sol.iterations;
  return out;
}

inline ExtendedPoint apply_generating(const GeneratingFunction& f, const ExtendedPoint& pt,
                                      const std::optional<ExtendedPoint>& seed = std::nullopt) {
  return solve_generating(f, pt, seed).point;
}

// Inverse map: solve the new-side rules for the old group. `seed` defaults to
// the same-type new group.
inline ExtendedPoint inverse_generating(const GeneratingFunction& f, const ExtendedPoint& image,
                                        const std::optional<ExtendedPoint>& seed = std::nullopt,
                                        const NewtonOptions& opt = {}) {
  image.check();
  if (image.n() != f.n) throw Error("point dimension does not match generating function");
  const CanonicalView view(f);
  const auto r = detail::roles(f.kind);
  const Eigen::Index N = static_cast<Eigen::Index>(f.n + 1);
  const Eigen::Index xo = r.x_first ? 0 : N;
  const Eigen::Index yo = r.x_first ? N : 0;
  const bool x_mom = is_momentum(r.x), y_mom = is_momentum(r.y);
  const Eigen::VectorXd y = group_values(image, y_mom);
  const Eigen::VectorXd w = group_values(image, !y_mom);
  const double rx = rho(r.x), ry = rho(r.y);

  Eigen::VectorXd x0 = group_values(seed ? *seed : image, x_mom);
  NewtonSystem sys = [&](const Eigen::VectorXd& x) {
    auto h = view.hessian(detail::canon_args(r, x, y, image.s));
    Eigen::VectorXd res(N);
    for (Eigen::Index i = 0; i < N; ++i) res(i) = ry * h.gradient[yo + i] - w(i);
    return std::make_pair(res, Eigen::MatrixXd(ry * h.hessian.block(yo, xo, N, N)));
  };
  auto sol = newton_solve(sys, x0, w.cwiseAbs().maxCoeff(), opt);
  auto g = view.gradient(detail::canon_args(r, sol.x, y, image.s));
  Eigen::VectorXd c(N);
  for (Eigen::Index i = 0; i < N; ++i) c(i) = rx * g.gradient[xo + i];
  return x_mom ? point_from_groups(c, sol.x, image.s) : point_from_groups(sol.x, c, image.s);
}

inline ExtendedMap generated_map(const GeneratingFunction& f) {
  return ExtendedMap([f](const ExtendedPoint& pt) { return solve_generating(f, pt).point; },
                     [f](const ExtendedPoint& pt) { return solve_generating(f, pt).jacobian; });
}

// Mixed-Hessian determinant at the solution of the rules; when the rules
// cannot be solved (degenerate F) it is evaluated at the default seed.
inline double hessian_det(const GeneratingFunction& f, const ExtendedPoint& pt) {
  try {
    return solve_generating(f, pt).hessian_det;
  } catch (const DegeneracyError&) {
  } catch (const ImplicitSolveError&) {
  }
  const auto r = detail::roles(f.kind);
  const CanonicalView view(f);
  auto args = detail::canon_args(r, group_values(pt, is_momentum(r.x)),
                                 group_values(pt, is_momentum(r.y)), pt.s);
  return mixed_determinant(f, view.native_args(args));
}

// H' at the image: (H - e) / (dt'/dt) + e'.
inline double transform_hamiltonian(const HamiltonianSystem& h, const GeneratingFunction& f,
                                    const ExtendedPoint& pt) {
  const auto img = solve_generating(f, pt);
  const std::size_t n = f.n;
  const double dtdt = img.jacobian(n, n);
  if (std::fabs(dtdt) < 1e-12) throw DegenerateTimeError("dt'/dt vanishes at the given point");
  return (h(pt) - pt.e) / dtdt + img.point.e;
}

struct TransformReport {
  double hessian_det = 0.0;
  bool preserves_H1 = false;
  bool time_global = false;
  bool spacetime_split = false;
  bool subspace_liouville = false;
  double liouville_det = 0.0;  // |det M|
  bool probe_based = true;     // flags certified at the probe point only
};

inline TransformReport restriction_report(const GeneratingFunction& f, const ExtendedPoint& pt,
                                          double tol = 1e-10) {
  const auto img = solve_generating(f, pt);
  const auto& m = img.jacobian;
  const Eigen::Index n = static_cast<Eigen::Index>(f.n);
  const Eigen::Index t = n, me = 2 * n + 1;  // canonical slots of t and -e
  TransformReport rep;
  rep.hessian_det = img.hessian_det;
  rep.preserves_H1 = std::fabs(img.dF_ds) <= tol;
  bool tg = true;
  for (Eigen::Index i = 0; i < n; ++i)
    tg = tg && std::fabs(m(t, i)) <= tol && std::fabs(m(t, n + 1 + i)) <= tol;
  rep.time_global = tg;
  // d/de = -column(-e); every row but e' must be independent of e.
  bool split = true;
  for (Eigen::Index row = 0; row < me; ++row) split = split && std::fabs(m(row, me)) <= tol;
  rep.spacetime_split = split;
  rep.subspace_liouville = std::fabs(m(t, t) * m(me, me) - 1.0) <= tol;
  rep.liouville_det = std::fabs(m.determinant());
  return rep;
}

}  // namespace xps::transform
