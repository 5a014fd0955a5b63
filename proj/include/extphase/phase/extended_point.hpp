#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "extphase/errors.hpp"
#include "extphase/numkit/field.hpp"

namespace xps::phase {

using numkit::ScalarField;

// Point of T*Q1. Two flat layouts are used throughout:
//   phase layout     (q1..qn, p1..pn, t, e)
//   canonical layout (q1..qn, t, p1..pn, -e)   [ordering of the symplectic matrix]
struct ExtendedPoint {
  std::vector<double> q;
  std::vector<double> p;
  double t = 0.0;
  double e = 0.0;
  double s = 0.0;

  std::size_t n() const { return q.size(); }

  void check() const {
    if (q.empty() || q.size() != p.size())
      throw Error("ExtendedPoint needs dim(q) = dim(p) >= 1");
  }

  std::vector<double> phase() const {
    std::vector<double> z(q);
    z.insert(z.end(), p.begin(), p.end());
    z.push_back(t);
    z.push_back(e);
    return z;
  }

  std::vector<double> canonical() const {
    std::vector<double> z(q);
    z.push_back(t);
    z.insert(z.end(), p.begin(), p.end());
    z.push_back(-e);
    return z;
  }

  static ExtendedPoint from_phase(std::span<const double> z, double s = 0.0) {
    const std::size_t n = (z.size() - 2) / 2;
    ExtendedPoint pt;
    pt.q.assign(z.begin(), z.begin() + n);
    pt.p.assign(z.begin() + n, z.begin() + 2 * n);
    pt.t = z[2 * n];
    pt.e = z[2 * n + 1];
    pt.s = s;
    return pt;
  }

  static ExtendedPoint from_canonical(std::span<const double> z, double s = 0.0) {
    const std::size_t n = (z.size() - 2) / 2;
    ExtendedPoint pt;
    pt.q.assign(z.begin(), z.begin() + n);
    pt.t = z[n];
    pt.p.assign(z.begin() + n + 1, z.begin() + 2 * n + 1);
    pt.e = -z[2 * n + 1];
    pt.s = s;
    return pt;
  }
};

inline std::vector<std::string> phase_labels(std::size_t n) {
  std::vector<std::string> l;
  for (std::size_t i = 0; i < n; ++i) l.push_back("q" + std::to_string(i + 1));
  for (std::size_t i = 0; i < n; ++i) l.push_back("p" + std::to_string(i + 1));
  l.push_back("t");
  l.push_back("e");
  return l;
}

// H(q, p, t) as a field of arity 2n+1 in the order (q, p, t).
class HamiltonianSystem {
 public:
  HamiltonianSystem() = default;
  HamiltonianSystem(std::size_t n, ScalarField h, std::string description = {})
      : n_(n), h_(std::move(h)), description_(std::move(description)) {
    if (n_ == 0) throw Error("HamiltonianSystem needs n >= 1");
    if (h_.arity() != 2 * n_ + 1) throw Error("H must have arity 2n+1 (q, p, t)");
  }

  template <class F>
  static HamiltonianSystem make(std::size_t n, std::string description, F f) {
    return HamiltonianSystem(n, ScalarField(2 * n + 1, std::move(f)), std::move(description));
  }

  std::size_t n() const { return n_; }
  const ScalarField& field() const { return h_; }
  const std::string& description() const { return description_; }

  std::vector<double> args(const ExtendedPoint& pt) const {
    std::vector<double> x(pt.q);
    x.insert(x.end(), pt.p.begin(), pt.p.end());
    x.push_back(pt.t);
    return x;
  }

  double operator()(const ExtendedPoint& pt) const {
    const double v = h_(args(pt));
    if (!std::isfinite(v)) throw DomainError("H is not finite at the given point");
    return v;
  }

  // H - e as a field on the phase layout (q, p, t, e).
  ScalarField extended_field(double k = 1.0) const {
    const ScalarField h = h_;
    const std::size_t m = 2 * n_ + 1;
    return ScalarField(m + 1, [h, m, k](auto z) {
      using T = typename decltype(z)::element_type;
      std::remove_const_t<T> v = h(z.first(m));
      return k * (v - z[m]);
    });
  }

 private:
  std::size_t n_ = 0;
  ScalarField h_;
  std::string description_;
};

}  // namespace xps::phase
