#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "extphase/errors.hpp"
#include "extphase/numkit/dual.hpp"

namespace xps::numkit {

// Type-erased scalar field R^arity -> R, evaluable on double, D1 and D2.
// Build from a generic callable taking std::span<const T>.
class ScalarField {
 public:
  template <class T>
  using Fn = std::function<T(std::span<const T>)>;

  ScalarField() = default;

  template <class F>
  ScalarField(std::size_t arity, F f)
      : arity_(arity),
        f0_([f](std::span<const double> x) { return double(f(x)); }),
        f1_([f](std::span<const D1> x) { return D1(f(x)); }),
        f2_([f](std::span<const D2> x) { return D2(f(x)); }) {}

  ScalarField(std::size_t arity, Fn<double> f0, Fn<D1> f1, Fn<D2> f2)
      : arity_(arity), f0_(std::move(f0)), f1_(std::move(f1)), f2_(std::move(f2)) {}

  std::size_t arity() const { return arity_; }
  bool empty() const { return !f0_; }

  double operator()(std::span<const double> x) const { return f0_(x); }
  D1 operator()(std::span<const D1> x) const { return f1_(x); }
  D2 operator()(std::span<const D2> x) const { return f2_(x); }

  double operator()(const std::vector<double>& x) const {
    return f0_(std::span<const double>(x));
  }
  template <class T>
  T eval(std::span<const T> x) const {
    return (*this)(x);
  }

 private:
  std::size_t arity_ = 0;
  Fn<double> f0_;
  Fn<D1> f1_;
  Fn<D2> f2_;
};

template <class F>
ScalarField make_field(std::size_t arity, F f) {
  return ScalarField(arity, std::move(f));
}

// Scalar function of one variable, evaluable up to third derivatives.
class TimeFunction {
 public:
  TimeFunction() = default;

  template <class F>
  explicit TimeFunction(F f)
      : f0_([f](double t) { return double(f(t)); }),
        f1_([f](const D1& t) { return D1(f(t)); }),
        f2_([f](const D2& t) { return D2(f(t)); }),
        f3_([f](const D3& t) { return D3(f(t)); }) {}

  static TimeFunction constant(double c) {
    return TimeFunction([c](const auto& t) {
      using T = std::decay_t<decltype(t)>;
      return T(c);
    });
  }

  bool empty() const { return !f0_; }

  double operator()(double t) const { return f0_(t); }
  D1 operator()(const D1& t) const { return f1_(t); }
  D2 operator()(const D2& t) const { return f2_(t); }
  D3 operator()(const D3& t) const { return f3_(t); }

  // (f, f', f'', f''') at t.
  std::array<double, 4> jet(double t) const {
    D3 x(D2(D1(t, {1.0}), {D1(1.0)}), {D2(1.0)});
    D3 y = f3_(x);
    return {value_of(y), y.partial(0).value().value(),
            y.partial(0).partial(0).value(), y.partial(0).partial(0).partial(0)};
  }

  ScalarField as_field() const {
    auto self = *this;
    return ScalarField(
        1, [self](std::span<const double> x) { return self(x[0]); },
        [self](std::span<const D1> x) { return self(x[0]); },
        [self](std::span<const D2> x) { return self(x[0]); });
  }

 private:
  std::function<double(double)> f0_;
  std::function<D1(const D1&)> f1_;
  std::function<D2(const D2&)> f2_;
  std::function<D3(const D3&)> f3_;
};

// Type-erased map R^m -> R^k evaluable on double and D1.
class VectorField {
 public:
  template <class T>
  using Fn = std::function<std::vector<T>(std::span<const T>)>;

  VectorField() = default;

  template <class F>
  VectorField(std::size_t arity, F f)
      : arity_(arity),
        f0_([f](std::span<const double> x) { return std::vector<double>(f(x)); }),
        f1_([f](std::span<const D1> x) { return std::vector<D1>(f(x)); }) {}

  std::size_t arity() const { return arity_; }
  std::vector<double> operator()(std::span<const double> x) const { return f0_(x); }
  std::vector<D1> operator()(std::span<const D1> x) const { return f1_(x); }

 private:
  std::size_t arity_ = 0;
  Fn<double> f0_;
  Fn<D1> f1_;
};

struct Gradient {
  double value = 0.0;
  std::vector<double> gradient;
};

struct HessianResult {
  double value = 0.0;
  std::vector<double> gradient;
  Eigen::MatrixXd hessian;
};

namespace detail {

inline void check_arity(std::size_t want, std::size_t got) {
  if (want != got)
    throw DomainError("argument dimension " + std::to_string(got) +
                      " does not match field arity " + std::to_string(want));
}

inline void check_inputs(std::span<const double> x) {
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!std::isfinite(x[i]))
      throw DomainError("non-finite input at coordinate " + std::to_string(i), i);
}

[[noreturn]] inline void fail_at(std::size_t i) {
  throw DomainError("non-finite evaluation caused by coordinate " + std::to_string(i), i);
}

// Seed one coordinate at a time; the first whose own partial is non-finite
// is blamed. Unseeded inputs carry structural-zero partials, so one bad
// slot cannot poison the others.
[[noreturn]] inline void blame(const ScalarField& f, std::span<const double> x) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::vector<D1> xd(x.begin(), x.end());
    xd[i] = D1::variable(x[i], 0, 1);
    D1 y;
    try {
      y = f(std::span<const D1>(xd));
    } catch (const DomainError&) {
      fail_at(i);
    }
    if (!std::isfinite(y.partial(0))) fail_at(i);
  }
  throw DomainError("non-finite value");
}

}  // namespace detail

inline Gradient grad_eval(const ScalarField& f, std::span<const double> x) {
  detail::check_arity(f.arity(), x.size());
  detail::check_inputs(x);
  const std::size_t n = x.size();
  std::vector<D1> xd;
  xd.reserve(n);
  for (std::size_t i = 0; i < n; ++i) xd.push_back(D1::variable(x[i], i, n));
  D1 y = f(std::span<const D1>(xd));
  Gradient out;
  out.value = y.value();
  out.gradient.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.gradient[i] = y.partial(i);
  if (!all_finite(y)) detail::blame(f, x);
  return out;
}

inline Gradient grad_eval(const ScalarField& f, const std::vector<double>& x) {
  return grad_eval(f, std::span<const double>(x));
}

inline HessianResult hessian_eval(const ScalarField& f, std::span<const double> x) {
  detail::check_arity(f.arity(), x.size());
  detail::check_inputs(x);
  const std::size_t n = x.size();
  std::vector<D2> xd;
  xd.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<D1> d(n, D1(0.0));
    d[i] = D1(1.0);
    xd.emplace_back(D1::variable(x[i], i, n), std::move(d));
  }
  D2 y = f(std::span<const D2>(xd));
  HessianResult out;
  out.value = y.value().value();
  out.gradient.resize(n);
  out.hessian.resize(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    out.gradient[i] = y.value().partial(i);
    const D1 di = y.partial(i);
    for (std::size_t j = 0; j < n; ++j) out.hessian(i, j) = di.partial(j);
  }
  if (!all_finite(y)) detail::blame(f, x);
  return out;
}

inline HessianResult hessian_eval(const ScalarField& f, const std::vector<double>& x) {
  return hessian_eval(f, std::span<const double>(x));
}

inline Eigen::MatrixXd jacobian_eval(const VectorField& f, std::span<const double> x) {
  detail::check_arity(f.arity(), x.size());
  detail::check_inputs(x);
  const std::size_t n = x.size();
  std::vector<D1> xd;
  xd.reserve(n);
  for (std::size_t i = 0; i < n; ++i) xd.push_back(D1::variable(x[i], i, n));
  std::vector<D1> y = f(std::span<const D1>(xd));
  Eigen::MatrixXd m(y.size(), n);
  for (std::size_t r = 0; r < y.size(); ++r)
    for (std::size_t c = 0; c < n; ++c) {
      m(r, c) = y[r].partial(c);
      if (!std::isfinite(m(r, c))) detail::fail_at(c);
    }
  return m;
}

// Second-order Taylor model f + g·d + ½ dᵀHd, d = x − x0, evaluated in any
// scalar type. Exact through second derivatives at x0; used to expose
// implicitly defined functions to the dual machinery.
struct QuadraticModel {
  std::vector<double> x0;
  double value = 0.0;
  std::vector<double> gradient;
  Eigen::MatrixXd hessian;

  template <class T>
  T operator()(std::span<const T> x) const {
    const std::size_t n = x0.size();
    if constexpr (std::is_same_v<T, double>) {
      (void)x;
      return value;
    } else {
      std::vector<T> d;
      d.reserve(n);
      for (std::size_t i = 0; i < n; ++i) d.push_back(x[i] - T(x0[i]));
      T out(value);
      for (std::size_t i = 0; i < n; ++i) out += gradient[i] * d[i];
      if constexpr (std::is_same_v<T, D2>) {
        for (std::size_t i = 0; i < n; ++i) {
          T row(0.0);
          for (std::size_t j = 0; j < n; ++j)
            if (hessian(i, j) != 0.0) row += hessian(i, j) * d[j];
          out += 0.5 * d[i] * row;
        }
      }
      return out;
    }
  }
};

}  // namespace xps::numkit
