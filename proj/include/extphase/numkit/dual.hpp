#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <type_traits>
#include <utility>
#include <vector>

namespace xps::numkit {

// Forward-mode dual number with a dynamic partials vector. An empty
// partials vector stands for all-zero partials. Nest (Dual<Dual<double>>)
// for second derivatives.
template <class T>
class Dual {
 public:
  using value_type = T;

  Dual() : value_(0.0) {}
  Dual(double c) : value_(c) {}  // NOLINT: implicit by design
  template <class U>
    requires(std::same_as<U, T> && !std::same_as<T, double>)
  Dual(const U& v) : value_(v) {}  // NOLINT
  Dual(T value, std::vector<T> partials)
      : value_(std::move(value)), partials_(std::move(partials)) {}

  static Dual variable(T value, std::size_t index, std::size_t count) {
    std::vector<T> d(count, T(0.0));
    d[index] = T(1.0);
    return Dual(std::move(value), std::move(d));
  }

  const T& value() const { return value_; }
  const std::vector<T>& partials() const { return partials_; }
  std::size_t size() const { return partials_.size(); }
  T partial(std::size_t i) const {
    return i < partials_.size() ? partials_[i] : T(0.0);
  }

  // f(a) with derivative df at a.value().
  static Dual chain(const Dual& a, T f, const T& df) {
    std::vector<T> d(a.partials_.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = df * a.partials_[i];
    return Dual(std::move(f), std::move(d));
  }

  Dual operator-() const {
    std::vector<T> d(partials_.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = -partials_[i];
    return Dual(-value_, std::move(d));
  }
  Dual operator+() const { return *this; }

  friend Dual operator+(const Dual& a, const Dual& b) {
    std::vector<T> d(std::max(a.size(), b.size()));
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = a.partial(i) + b.partial(i);
    return Dual(a.value_ + b.value_, std::move(d));
  }
  friend Dual operator-(const Dual& a, const Dual& b) {
    std::vector<T> d(std::max(a.size(), b.size()));
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = a.partial(i) - b.partial(i);
    return Dual(a.value_ - b.value_, std::move(d));
  }
  friend Dual operator*(const Dual& a, const Dual& b) {
    std::vector<T> d(std::max(a.size(), b.size()));
    for (std::size_t i = 0; i < d.size(); ++i)
      d[i] = a.value_ * b.partial(i) + b.value_ * a.partial(i);
    return Dual(a.value_ * b.value_, std::move(d));
  }
  friend Dual operator/(const Dual& a, const Dual& b) {
    T inv = T(1.0) / b.value_;
    T v = a.value_ * inv;
    std::vector<T> d(std::max(a.size(), b.size()));
    for (std::size_t i = 0; i < d.size(); ++i)
      d[i] = (a.partial(i) - v * b.partial(i)) * inv;
    return Dual(std::move(v), std::move(d));
  }

  Dual& operator+=(const Dual& b) { return *this = *this + b; }
  Dual& operator-=(const Dual& b) { return *this = *this - b; }
  Dual& operator*=(const Dual& b) { return *this = *this * b; }
  Dual& operator/=(const Dual& b) { return *this = *this / b; }

  friend bool operator<(const Dual& a, const Dual& b) { return a.value_ < b.value_; }
  friend bool operator>(const Dual& a, const Dual& b) { return a.value_ > b.value_; }
  friend bool operator<=(const Dual& a, const Dual& b) { return a.value_ <= b.value_; }
  friend bool operator>=(const Dual& a, const Dual& b) { return a.value_ >= b.value_; }

 private:
  T value_;
  std::vector<T> partials_;
};

using D1 = Dual<double>;
using D2 = Dual<D1>;
using D3 = Dual<D2>;

template <class T>
struct is_dual : std::false_type {};
template <class T>
struct is_dual<Dual<T>> : std::true_type {};
template <class T>
inline constexpr bool is_dual_v = is_dual<T>::value;

inline double value_of(double x) { return x; }
template <class T>
double value_of(const Dual<T>& x) {
  return value_of(x.value());
}

inline bool all_finite(double x) { return std::isfinite(x); }
template <class T>
bool all_finite(const Dual<T>& x) {
  if (!all_finite(x.value())) return false;
  for (const auto& d : x.partials())
    if (!all_finite(d)) return false;
  return true;
}

// Elementary functions usable on double and every Dual level.
inline double sqrt(double x) { return std::sqrt(x); }
inline double exp(double x) { return std::exp(x); }
inline double log(double x) { return std::log(x); }
inline double sin(double x) { return std::sin(x); }
inline double cos(double x) { return std::cos(x); }
inline double tan(double x) { return std::tan(x); }
inline double atan(double x) { return std::atan(x); }
inline double sinh(double x) { return std::sinh(x); }
inline double cosh(double x) { return std::cosh(x); }
inline double abs(double x) { return std::fabs(x); }
inline double pow(double x, double a) { return std::pow(x, a); }

template <class T>
Dual<T> sqrt(const Dual<T>& a) {
  T r = sqrt(a.value());
  return Dual<T>::chain(a, r, T(0.5) / r);
}
template <class T>
Dual<T> exp(const Dual<T>& a) {
  T r = exp(a.value());
  return Dual<T>::chain(a, r, r);
}
template <class T>
Dual<T> log(const Dual<T>& a) {
  return Dual<T>::chain(a, log(a.value()), T(1.0) / a.value());
}
template <class T>
Dual<T> sin(const Dual<T>& a) {
  return Dual<T>::chain(a, sin(a.value()), cos(a.value()));
}
template <class T>
Dual<T> cos(const Dual<T>& a) {
  return Dual<T>::chain(a, cos(a.value()), -sin(a.value()));
}
template <class T>
Dual<T> tan(const Dual<T>& a) {
  T c = cos(a.value());
  return Dual<T>::chain(a, tan(a.value()), T(1.0) / (c * c));
}
template <class T>
Dual<T> atan(const Dual<T>& a) {
  return Dual<T>::chain(a, atan(a.value()),
                        T(1.0) / (T(1.0) + a.value() * a.value()));
}
template <class T>
Dual<T> sinh(const Dual<T>& a) {
  return Dual<T>::chain(a, sinh(a.value()), cosh(a.value()));
}
template <class T>
Dual<T> cosh(const Dual<T>& a) {
  return Dual<T>::chain(a, cosh(a.value()), sinh(a.value()));
}
template <class T>
Dual<T> abs(const Dual<T>& a) {
  return value_of(a) < 0.0 ? -a : a;
}
template <class T>
Dual<T> pow(const Dual<T>& a, double p) {
  return Dual<T>::chain(a, pow(a.value(), p), T(p) * pow(a.value(), p - 1.0));
}

template <class T>
T square(const T& x) {
  return x * x;
}

}  // namespace xps::numkit
