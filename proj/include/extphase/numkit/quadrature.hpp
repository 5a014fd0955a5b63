#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>

#include "extphase/errors.hpp"
#include "extphase/numkit/dual.hpp"
#include "extphase/numkit/field.hpp"

namespace xps::numkit {

inline double integrate_1d(const TimeFunction& g, double a, double b) {
  if (a == b) return 0.0;
  auto checked = [&](double t) {
    double v = g(t);
    if (!std::isfinite(v))
      throw DomainError("non-finite integrand at t=" + std::to_string(t));
    return v;
  };
  double err = 0.0;
  double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      checked, a, b, 20, 1e-14, &err);
  if (!std::isfinite(v)) throw DomainError("quadrature failed");
  return v;
}

// ∫_lower^upper g(τ) dτ as a differentiable function of `upper`.
inline double primitive(const TimeFunction& g, double lower, double upper) {
  return integrate_1d(g, lower, upper);
}

template <class T>
Dual<T> primitive(const TimeFunction& g, double lower, const Dual<T>& upper) {
  T v = primitive(g, lower, upper.value());
  T dv = g(upper.value());
  return Dual<T>::chain(upper, v, dv);
}

}  // namespace xps::numkit
