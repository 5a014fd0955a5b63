#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "extphase/errors.hpp"
#include "extphase/numkit/trajectory.hpp"

namespace xps::numkit {

struct IntegratorOptions {
  double rel_tol = 1e-12;
  double abs_tol = 1e-12;
  double max_step = 0.1;
  double min_step = 1e-12;
  bool dense_output = true;
  std::size_t max_steps = 5'000'000;

  void validate() const {
    if (!(rel_tol > 0.0)) throw Error("rel_tol must be positive");
    if (!(abs_tol > 0.0)) throw Error("abs_tol must be positive");
    if (!(min_step >= 0.0) || !(min_step < max_step))
      throw Error("min_step must satisfy 0 <= min_step < max_step");
  }
};

// Step size fell below min_step. Carries the last accepted sample and the
// trajectory up to it.
class IntegrationStall : public Error {
 public:
  IntegrationStall(const std::string& what, double s, std::vector<double> state,
                   Trajectory partial)
      : Error(what), s_(s), state_(std::move(state)), partial_(std::move(partial)) {}

  double s() const { return s_; }
  const std::vector<double>& state() const { return state_; }
  const Trajectory& partial() const { return partial_; }

 private:
  double s_;
  std::vector<double> state_;
  Trajectory partial_;
};

using OdeRhs = std::function<std::vector<double>(double, std::span<const double>)>;

namespace detail {

// Dormand-Prince 5(4) tableau.
struct DP54 {
  static constexpr double c[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
  static constexpr double a[7][6] = {
      {},
      {1.0 / 5},
      {3.0 / 40, 9.0 / 40},
      {44.0 / 45, -56.0 / 15, 32.0 / 9},
      {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
      {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
      {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
  static constexpr double e[7] = {71.0 / 57600,      0.0,         -71.0 / 16695,
                                  71.0 / 1920,       -17253.0 / 339200,
                                  22.0 / 525,        -1.0 / 40};
};

inline double scaled_norm(std::span<const double> v, std::span<const double> y0,
                          std::span<const double> y1, const IntegratorOptions& o) {
  double m = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double sc = o.abs_tol + o.rel_tol * std::max(std::fabs(y0[i]), std::fabs(y1[i]));
    m = std::max(m, std::fabs(v[i]) / sc);
  }
  return m;
}

}  // namespace detail

inline std::vector<std::string> default_labels(std::size_t n) {
  std::vector<std::string> l;
  for (std::size_t i = 0; i < n; ++i) l.push_back("y" + std::to_string(i + 1));
  return l;
}

// Adaptive Dormand-Prince 5(4) from s0 to s1 (either direction). Domain
// errors raised by the rhs inside a trial step reject the step.
inline Trajectory integrate(const OdeRhs& rhs, std::vector<double> y0, double s0,
                            double s1, const IntegratorOptions& opts = {},
                            std::vector<std::string> labels = {},
                            std::string s_label = "s") {
  opts.validate();
  if (s1 == s0) throw Error("integration span is empty");
  const std::size_t n = y0.size();
  if (labels.empty()) labels = default_labels(n);
  if (labels.size() != n) throw Error("label count does not match state size");

  using detail::DP54;
  const double dir = s1 > s0 ? 1.0 : -1.0;
  Trajectory::Builder out(std::move(labels), std::move(s_label));

  std::vector<double> y = std::move(y0);
  double s = s0;
  std::vector<double> f = rhs(s, y);
  for (double v : f)
    if (!std::isfinite(v)) throw DomainError("rhs not finite at the initial point");
  out.push(s, y, f);

  // initial step (Hairer-Wanner heuristic)
  double h;
  {
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sc = opts.abs_tol + opts.rel_tol * std::fabs(y[i]);
      d0 = std::max(d0, std::fabs(y[i]) / sc);
      d1 = std::max(d1, std::fabs(f[i]) / sc);
    }
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h = std::min({h, opts.max_step, std::fabs(s1 - s0)});
    h = std::max(h, 10.0 * opts.min_step);
  }

  std::vector<std::vector<double>> k(7, std::vector<double>(n));
  std::vector<double> tmp(n), ynew(n), err(n);
  std::size_t steps = 0;
  bool last_rejected = false;

  auto stall = [&](const std::string& why) {
    throw IntegrationStall(why + " at s=" + std::to_string(s), s, y, out.snapshot());
  };

  while (dir * (s1 - s) > 0.0) {
    if (++steps > opts.max_steps) stall("step budget exhausted");
    if (h < opts.min_step) stall("step size below min_step");
    bool final_step = false;
    if (h >= std::fabs(s1 - s)) {
      h = std::fabs(s1 - s);
      final_step = true;
    }
    const double hs = dir * h;

    bool ok = true;
    try {
      k[0] = f;
      for (int st = 1; st < 7; ++st) {
        for (std::size_t i = 0; i < n; ++i) {
          double acc = 0.0;
          for (int j = 0; j < st; ++j) acc += DP54::a[st][j] * k[j][i];
          tmp[i] = y[i] + hs * acc;
        }
        k[st] = rhs(s + DP54::c[st] * hs, tmp);
        for (double v : k[st])
          if (!std::isfinite(v)) throw DomainError("non-finite rhs");
      }
    } catch (const DomainError&) {
      ok = false;
    }

    double en = 0.0;
    if (ok) {
      for (std::size_t i = 0; i < n; ++i) {
        ynew[i] = tmp[i];  // stage 7 point is the 5th-order solution
        double acc = 0.0;
        for (int j = 0; j < 7; ++j) acc += DP54::e[j] * k[j][i];
        err[i] = hs * acc;
      }
      en = detail::scaled_norm(err, y, ynew, opts);
      if (!std::isfinite(en)) ok = false;
    }

    if (!ok) {
      h *= 0.25;
      last_rejected = true;
      continue;
    }

    if (en <= 1.0) {
      s = final_step ? s1 : s + hs;
      y = ynew;
      f = k[6];
      if (opts.dense_output || final_step) out.push(s, y, f);
      double fac = en == 0.0 ? 5.0 : 0.9 * std::pow(en, -0.2);
      fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 5.0);
      h = std::min(h * fac, opts.max_step);
      last_rejected = false;
    } else {
      double fac = std::max(0.2, 0.9 * std::pow(en, -0.2));
      h *= fac;
      last_rejected = true;
    }
  }
  return std::move(out).finish();
}

}  // namespace xps::numkit
