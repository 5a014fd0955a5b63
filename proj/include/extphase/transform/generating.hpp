#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "extphase/errors.hpp"
#include "extphase/numkit/field.hpp"

namespace xps::transform {

using numkit::ScalarField;

enum class Kind { F1, F2, F3, F4 };

inline const char* kind_name(Kind k) {
  switch (k) {
    case Kind::F1: return "F1";
    case Kind::F2: return "F2";
    case Kind::F3: return "F3";
    case Kind::F4: return "F4";
  }
  return "?";
}

// Canonical groups of n+1 coordinates each:
//   Q = (q, t), P = (p, -e), Qp = (q', t'), Pp = (p', -e').
enum class Group { Q, P, Qp, Pp };

inline bool is_momentum(Group g) { return g == Group::P || g == Group::Pp; }
inline bool is_new(Group g) { return g == Group::Qp || g == Group::Pp; }
inline Group conjugate(Group g) {
  switch (g) {
    case Group::Q: return Group::P;
    case Group::P: return Group::Q;
    case Group::Qp: return Group::Pp;
    case Group::Pp: return Group::Qp;
  }
  return g;
}

// conj(g) = rho(g) * dF/dg for any generating function having g as argument.
inline double rho(Group g) {
  switch (g) {
    case Group::Q: return 1.0;    // P  =  dF/dQ
    case Group::P: return -1.0;   // Q  = -dF/dP
    case Group::Qp: return -1.0;  // P' = -dF/dQ'
    case Group::Pp: return 1.0;   // Q' =  dF/dP'
  }
  return 0.0;
}

// Argument groups in native order. Native arguments are
// (A[n], B[n], a, b, s) with (A, a) from the first group and (B, b) from the
// second; a time-like slot of a momentum group holds e, not -e.
inline std::array<Group, 2> groups_of(Kind k) {
  switch (k) {
    case Kind::F1: return {Group::Q, Group::Qp};
    case Kind::F2: return {Group::Q, Group::Pp};
    case Kind::F3: return {Group::Qp, Group::P};
    case Kind::F4: return {Group::P, Group::Pp};
  }
  return {Group::Q, Group::Qp};
}

struct GeneratingFunction {
  Kind kind = Kind::F2;
  std::size_t n = 0;
  ScalarField value;  // arity 2n+3
  std::string description;

  template <class F>
  static GeneratingFunction make(Kind kind, std::size_t n, std::string description, F f) {
    return GeneratingFunction{kind, n, ScalarField(2 * n + 3, std::move(f)),
                              std::move(description)};
  }

  void check() const {
    if (n == 0) throw Error("generating function needs n >= 1");
    if (value.arity() != 2 * n + 3) throw Error("generating function must have arity 2n+3");
  }
};

// Canonical slot c of a kind -> (native index, sign). Canonical variables are
// ordered [group1 (n+1), group2 (n+1), s]; time-like momentum slots negated.
inline std::pair<std::size_t, double> native_slot(Kind kind, std::size_t n, std::size_t c) {
  const auto g = groups_of(kind);
  if (c < n) return {c, 1.0};
  if (c == n) return {2 * n, is_momentum(g[0]) ? -1.0 : 1.0};
  if (c < 2 * n + 1) return {c - 1, 1.0};
  if (c == 2 * n + 1) return {2 * n + 1, is_momentum(g[1]) ? -1.0 : 1.0};
  return {2 * n + 2, 1.0};
}

// Canonical view of a generating function: variables ordered
// [group1 (n+1), group2 (n+1), s], time-like momentum slots negated.
class CanonicalView {
 public:
  explicit CanonicalView(const GeneratingFunction& f) : f_(f) { f_.check(); }

  std::size_t n() const { return f_.n; }
  std::size_t dim() const { return 2 * f_.n + 3; }

  // canonical index -> (native index, sign)
  std::pair<std::size_t, double> native(std::size_t c) const {
    return native_slot(f_.kind, f_.n, c);
  }

  std::vector<double> native_args(const std::vector<double>& canon) const {
    std::vector<double> x(dim());
    for (std::size_t c = 0; c < dim(); ++c) {
      auto [i, sg] = native(c);
      x[i] = sg * canon[c];
    }
    return x;
  }

  std::vector<double> canonical_args(const std::vector<double>& nat) const {
    std::vector<double> c(dim());
    for (std::size_t k = 0; k < dim(); ++k) {
      auto [i, sg] = native(k);
      c[k] = sg * nat[i];
    }
    return c;
  }

  double value(const std::vector<double>& canon) const {
    return f_.value(native_args(canon));
  }

  numkit::Gradient gradient(const std::vector<double>& canon) const {
    auto g = numkit::grad_eval(f_.value, native_args(canon));
    numkit::Gradient out{g.value, std::vector<double>(dim())};
    for (std::size_t c = 0; c < dim(); ++c) {
      auto [i, sg] = native(c);
      out.gradient[c] = sg * g.gradient[i];
    }
    return out;
  }

  numkit::HessianResult hessian(const std::vector<double>& canon) const {
    auto h = numkit::hessian_eval(f_.value, native_args(canon));
    numkit::HessianResult out{h.value, std::vector<double>(dim()),
                              Eigen::MatrixXd(dim(), dim())};
    for (std::size_t c = 0; c < dim(); ++c) {
      auto [i, si] = native(c);
      out.gradient[c] = si * h.gradient[i];
      for (std::size_t d = 0; d < dim(); ++d) {
        auto [j, sj] = native(d);
        out.hessian(c, d) = si * sj * h.hessian(i, j);
      }
    }
    return out;
  }

  const GeneratingFunction& function() const { return f_; }

 private:
  GeneratingFunction f_;
};

// Determinant of the native mixed block d2F / d(A,a) d(B,b).
inline double mixed_determinant(const GeneratingFunction& f, const std::vector<double>& native_args) {
  const std::size_t n = f.n;
  auto h = numkit::hessian_eval(f.value, native_args);
  Eigen::MatrixXd m(n + 1, n + 1);
  auto row = [n](std::size_t i) { return i < n ? i : 2 * n; };
  auto col = [n](std::size_t j) { return j < n ? n + j : 2 * n + 1; };
  for (std::size_t i = 0; i <= n; ++i)
    for (std::size_t j = 0; j <= n; ++j) m(i, j) = h.hessian(row(i), col(j));
  return m.determinant();
}

}  // namespace xps::transform
