#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "extphase/errors.hpp"
#include "extphase/transform/generating.hpp"
#include "extphase/transform/map.hpp"

namespace xps::transform {

namespace detail {

struct Bilinear {
  double sign;
  Group a, b;
};

// F_k + c_k is the same for every kind (up to a constant) at a stationary point.
inline std::vector<Bilinear> bilinear_terms(Kind k) {
  switch (k) {
    case Kind::F1: return {};
    case Kind::F2: return {{1.0, Group::Qp, Group::Pp}};
    case Kind::F3: return {{-1.0, Group::Q, Group::P}};
    case Kind::F4: return {{1.0, Group::Qp, Group::Pp}, {-1.0, Group::Q, Group::P}};
  }
  return {};
}

inline bool same_term(const Bilinear& u, const Bilinear& v) {
  return u.sign == v.sign && u.a == v.a && u.b == v.b;
}

inline Group counterpart(Group g) {
  switch (g) {
    case Group::Q: return Group::Qp;
    case Group::Qp: return Group::Q;
    case Group::P: return Group::Pp;
    case Group::Pp: return Group::P;
  }
  return g;
}

// Phi = F_k + c_m - c_k over the target groups (a), the eliminated groups (z)
// and s. Stationary in z, Phi is the target-kind generating function.
class Exchange {
 public:
  Exchange(const GeneratingFunction& f, Kind target) : view_(f), target_(target) {
    const std::size_t n = f.n;
    N_ = static_cast<Eigen::Index>(n + 1);
    a_ = groups_of(target);
    for (Group g : groups_of(f.kind))
      if (g != a_[0] && g != a_[1]) z_.push_back(g);
    if (z_.empty()) throw Error("Legendre exchange needs a different target kind");
    for (const auto& t : bilinear_terms(target)) {
      bool shared = false;
      for (const auto& u : bilinear_terms(f.kind)) shared = shared || same_term(t, u);
      if (!shared) terms_.push_back(t);
    }
    for (const auto& u : bilinear_terms(f.kind)) {
      bool shared = false;
      for (const auto& t : bilinear_terms(target)) shared = shared || same_term(t, u);
      if (!shared) terms_.push_back({-u.sign, u.a, u.b});
    }
    offset_[a_[0]] = 0;
    offset_[a_[1]] = N_;
    for (std::size_t i = 0; i < z_.size(); ++i)
      offset_[z_[i]] = 2 * N_ + static_cast<Eigen::Index>(i) * N_;
    for (const auto& t : terms_)
      if (!offset_.count(t.a) || !offset_.count(t.b))
        throw Error("internal: bilinear term outside the exchange variables");
    dim_ = 2 * N_ + static_cast<Eigen::Index>(z_.size()) * N_ + 1;
  }

  Eigen::Index zdim() const { return static_cast<Eigen::Index>(z_.size()) * N_; }
  Eigen::Index adim() const { return 2 * N_ + 1; }  // a groups plus s
  const std::vector<Group>& z_groups() const { return z_; }
  const std::array<Group, 2>& a_groups() const { return a_; }
  Eigen::Index offset(Group g) const { return offset_.at(g); }
  Eigen::Index N() const { return N_; }

  // Full variable vector from canonical target args [a0, a1, s] and z.
  Eigen::VectorXd assemble(const std::vector<double>& a, const Eigen::VectorXd& z) const {
    Eigen::VectorXd v(dim_);
    for (Eigen::Index i = 0; i < 2 * N_; ++i) v(i) = a[i];
    v.segment(2 * N_, zdim()) = z;
    v(dim_ - 1) = a[2 * N_];
    return v;
  }

  numkit::HessianResult phi(const Eigen::VectorXd& v) const {
    const auto src = groups_of(view_.function().kind);
    std::vector<double> args;
    for (Group g : src)
      for (Eigen::Index i = 0; i < N_; ++i) args.push_back(v(offset_.at(g) + i));
    args.push_back(v(dim_ - 1));
    auto h = view_.hessian(args);
    numkit::HessianResult out{h.value, std::vector<double>(dim_, 0.0),
                              Eigen::MatrixXd::Zero(dim_, dim_)};
    std::vector<Eigen::Index> idx;
    for (Group g : src)
      for (Eigen::Index i = 0; i < N_; ++i) idx.push_back(offset_.at(g) + i);
    idx.push_back(dim_ - 1);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      out.gradient[idx[i]] += h.gradient[i];
      for (std::size_t j = 0; j < idx.size(); ++j) out.hessian(idx[i], idx[j]) += h.hessian(i, j);
    }
    for (const auto& t : terms_) {
      const Eigen::Index oa = offset_.at(t.a), ob = offset_.at(t.b);
      for (Eigen::Index i = 0; i < N_; ++i) {
        out.value += t.sign * v(oa + i) * v(ob + i);
        out.gradient[oa + i] += t.sign * v(ob + i);
        out.gradient[ob + i] += t.sign * v(oa + i);
        out.hessian(oa + i, ob + i) += t.sign;
        out.hessian(ob + i, oa + i) += t.sign;
      }
    }
    return out;
  }

  // Stationary point in z for fixed target args.
  Eigen::VectorXd solve_z(const std::vector<double>& a, const Eigen::VectorXd& z0) const {
    const Eigen::Index zo = 2 * N_, m = zdim();
    NewtonSystem sys = [&](const Eigen::VectorXd& z) {
      auto h = phi(assemble(a, z));
      Eigen::VectorXd r(m);
      for (Eigen::Index i = 0; i < m; ++i) r(i) = h.gradient[zo + i];
      return std::make_pair(r, Eigen::MatrixXd(h.hessian.block(zo, zo, m, m)));
    };
    double scale = 0.0;
    for (double x : a) scale = std::max(scale, std::fabs(x));
    return newton_solve(sys, z0, scale).x;
  }

  // Value, gradient and Schur-complement Hessian in canonical target order.
  numkit::HessianResult reduced(const std::vector<double>& a, const Eigen::VectorXd& z) const {
    auto h = phi(assemble(a, z));
    const Eigen::Index m = zdim(), na = adim();
    std::vector<Eigen::Index> ai;
    for (Eigen::Index i = 0; i < 2 * N_; ++i) ai.push_back(i);
    ai.push_back(dim_ - 1);
    Eigen::MatrixXd haa(na, na), haz(na, m);
    for (Eigen::Index i = 0; i < na; ++i) {
      for (Eigen::Index j = 0; j < na; ++j) haa(i, j) = h.hessian(ai[i], ai[j]);
      for (Eigen::Index j = 0; j < m; ++j) haz(i, j) = h.hessian(ai[i], 2 * N_ + j);
    }
    const Eigen::MatrixXd hzz = h.hessian.block(2 * N_, 2 * N_, m, m);
    numkit::HessianResult out;
    out.value = h.value;
    out.gradient.resize(na);
    for (Eigen::Index i = 0; i < na; ++i) out.gradient[i] = h.gradient[ai[i]];
    out.hessian = haa - haz * hzz.partialPivLu().solve(haz.transpose());
    return out;
  }

  double zz_det(const std::vector<double>& a, const Eigen::VectorXd& z) const {
    auto h = phi(assemble(a, z));
    return h.hessian.block(2 * N_, 2 * N_, zdim(), zdim()).determinant();
  }

  Kind target() const { return target_; }
  std::size_t n() const { return view_.n(); }

 private:
  CanonicalView view_;
  Kind target_;
  Eigen::Index N_ = 0, dim_ = 0;
  std::array<Group, 2> a_{};
  std::vector<Group> z_;
  std::vector<Bilinear> terms_;
  std::map<Group, Eigen::Index> offset_;
};

inline Eigen::VectorXd group_of(const ExtendedPoint& old_pt, const ExtendedPoint& new_pt, Group g) {
  return group_values(is_new(g) ? new_pt : old_pt, is_momentum(g));
}

}  // namespace detail

// Equivalent generating function of kind `target` obtained by Legendre
// exchange of the groups F has but the target lacks. One or two groups may be
// exchanged. The exchange is checked at `probe` (a point in the old
// variables); a singular exchange Hessian there raises DegeneracyError.
// The returned field is exact through second derivatives at every argument.
inline GeneratingFunction legendre_convert(const GeneratingFunction& f, Kind target,
                                           const ExtendedPoint& probe) {
  f.check();
  if (target == f.kind) return f;
  auto ex = std::make_shared<const detail::Exchange>(f, target);
  const std::size_t n = f.n;
  const Eigen::Index N = static_cast<Eigen::Index>(n + 1);

  const auto img = solve_generating(f, probe).point;
  std::vector<double> a;
  for (Group g : ex->a_groups()) {
    auto v = detail::group_of(probe, img, g);
    a.insert(a.end(), v.data(), v.data() + v.size());
  }
  a.push_back(probe.s);
  Eigen::VectorXd z0(ex->zdim());
  for (std::size_t i = 0; i < ex->z_groups().size(); ++i)
    z0.segment(static_cast<Eigen::Index>(i) * N, N) =
        detail::group_of(probe, img, ex->z_groups()[i]);
  const double det = ex->zz_det(a, z0);
  if (!(std::fabs(det) >= 1e-12))
    throw DegeneracyError(std::string("no ") + kind_name(target) + " form: exchange Hessian is singular");

  // Native target args -> model through second order.
  auto model = [ex, z0, n, N, target](const std::vector<double>& nat) {
    const std::size_t d = 2 * n + 3;
    std::vector<double> can(d);
    for (std::size_t c = 0; c < d; ++c) {
      auto [i, sg] = native_slot(target, n, c);
      can[c] = sg * nat[i];
    }
    Eigen::VectorXd seed = z0;
    for (std::size_t k = 0; k < ex->z_groups().size(); ++k) {
      const Group cp = detail::counterpart(ex->z_groups()[k]);
      const auto& ag = ex->a_groups();
      const Eigen::Index at = cp == ag[0] ? 0 : (cp == ag[1] ? N : -1);
      if (at >= 0)
        for (Eigen::Index i = 0; i < N; ++i) seed(static_cast<Eigen::Index>(k) * N + i) = can[at + i];
    }
    const auto z = ex->solve_z(can, seed);
    const auto r = ex->reduced(can, z);
    numkit::QuadraticModel qm{nat, r.value, std::vector<double>(d), Eigen::MatrixXd(d, d)};
    for (std::size_t c = 0; c < d; ++c) {
      auto [i, si] = native_slot(target, n, c);
      qm.gradient[i] = si * r.gradient[c];
      for (std::size_t e = 0; e < d; ++e) {
        auto [j, sj] = native_slot(target, n, e);
        qm.hessian(i, j) = si * sj * r.hessian(c, e);
      }
    }
    return qm;
  };
  auto values = [](auto x) {
    std::vector<double> v;
    for (const auto& xi : x) v.push_back(numkit::value_of(xi));
    return v;
  };
  ScalarField field(
      2 * n + 3,
      [model, values](std::span<const double> x) { return model(values(x)).value; },
      [model, values](std::span<const numkit::D1> x) { return model(values(x))(x); },
      [model, values](std::span<const numkit::D2> x) { return model(values(x))(x); });
  return GeneratingFunction{target, n, std::move(field),
                            std::string(kind_name(target)) + " from " + f.description};
}

}  // namespace xps::transform
