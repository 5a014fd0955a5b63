#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "extphase/errors.hpp"
#include "extphase/numkit/field.hpp"
#include "extphase/phase/extended_point.hpp"
#include "extphase/phase/symplectic.hpp"
#include "extphase/transform/generating.hpp"

namespace xps::relativity {

using numkit::ScalarField;
using phase::ExtendedMap;
using phase::ExtendedPoint;
using phase::HamiltonianSystem;
using transform::GeneratingFunction;
using Vec3 = std::array<double, 3>;

struct Boost {
  Vec3 beta{};
  double c = 1.0;
  double gamma = 1.0;

  double beta2() const { return beta[0] * beta[0] + beta[1] * beta[1] + beta[2] * beta[2]; }
};

inline Boost make_boost(Vec3 beta, double c = 1.0) {
  if (!(c > 0.0) || !std::isfinite(c)) throw Error("speed of light must be positive");
  Boost b{beta, c, 1.0};
  const double b2 = b.beta2();
  if (!(b2 < 1.0)) throw SuperluminalError("|beta| must be < 1");
  b.gamma = 1.0 / std::sqrt(1.0 - b2);
  return b;
}

// Lambda = I + (gamma - 1) beta beta^T / |beta|^2
inline Eigen::Matrix3d spatial_block(const Boost& b) {
  Eigen::Matrix3d l = Eigen::Matrix3d::Identity();
  const double b2 = b.beta2();
  if (b2 > 0.0)
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k) l(i, k) += (b.gamma - 1.0) * b.beta[i] * b.beta[k] / b2;
  return l;
}

// F2(q, p', t, e') = gamma (e'/c)(beta.q - c t) + sum_i p'_i (Lambda_ik q_k - gamma c t beta_i)
inline GeneratingFunction lorentz_generating(const Boost& b) {
  const Eigen::Matrix3d l = spatial_block(b);
  const Vec3 beta = b.beta;
  const double g = b.gamma, c = b.c;
  return GeneratingFunction::make(transform::Kind::F2, 3, "Lorentz boost", [=](auto z) {
    using T = std::remove_const_t<typename decltype(z)::element_type>;
    const T& t = z[6];
    const T& ep = z[7];
    T bq(0.0);
    for (int k = 0; k < 3; ++k) bq += beta[k] * z[k];
    T v = g * (ep / c) * (bq - c * t);
    for (int i = 0; i < 3; ++i) {
      T lq(0.0);
      for (int k = 0; k < 3; ++k)
        if (l(i, k) != 0.0) lq += l(i, k) * z[k];
      v += z[3 + i] * (lq - g * c * t * beta[i]);
    }
    return v;
  });
}

// 8x8 over (q, ct, p, e/c): block-diag(B, B), B = [[Lambda, -gamma beta], [-gamma beta^T, gamma]].
inline Eigen::MatrixXd boost_matrix(const Boost& b) {
  Eigen::Matrix4d blk = Eigen::Matrix4d::Zero();
  blk.topLeftCorner<3, 3>() = spatial_block(b);
  for (int i = 0; i < 3; ++i) {
    blk(i, 3) = -b.gamma * b.beta[i];
    blk(3, i) = -b.gamma * b.beta[i];
  }
  blk(3, 3) = b.gamma;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(8, 8);
  m.topLeftCorner<4, 4>() = blk;
  m.bottomRightCorner<4, 4>() = blk;
  return m;
}

// The boost in canonical coordinates (q, t, p, -e).
inline Eigen::MatrixXd canonical_boost_matrix(const Boost& b) {
  Eigen::VectorXd d(8);
  d << 1, 1, 1, b.c, 1, 1, 1, -1.0 / b.c;
  return d.cwiseInverse().asDiagonal() * boost_matrix(b) * d.asDiagonal();
}

inline ExtendedMap boost_map(const Boost& b) {
  return ExtendedMap::linear(canonical_boost_matrix(b));
}

// Potentials A_i(q, t), phi(q, t) as fields of (q1, q2, q3, t).
struct EmField {
  std::array<ScalarField, 3> A;
  ScalarField phi;
  double zeta = 0.0;
  double m = 1.0;
};

inline EmField zero_field(double m = 1.0) {
  auto z = numkit::make_field(4, [](auto x) {
    using T = std::remove_const_t<typename decltype(x)::element_type>;
    return T(0.0);
  });
  return EmField{{z, z, z}, z, 0.0, m};
}

inline EmField constant_field(Vec3 a, double phi, double zeta, double m = 1.0) {
  auto k = [](double v) {
    return numkit::make_field(4, [v](auto x) {
      using T = std::remove_const_t<typename decltype(x)::element_type>;
      return T(v);
    });
  };
  return EmField{{k(a[0]), k(a[1]), k(a[2])}, k(phi), zeta, m};
}

namespace detail {

// kinetic momentum squared (P - zeta A)^2 and zeta phi from args (q, P, t)
template <class T>
std::pair<T, T> kinetic(const EmField& f, std::span<const T> qpt) {
  std::array<T, 4> x{qpt[0], qpt[1], qpt[2], qpt[6]};
  std::span<const T> xs(x);
  T pi2(0.0);
  for (int i = 0; i < 3; ++i) {
    T a = f.A[i](xs);
    T d = qpt[3 + i] - f.zeta * a;
    pi2 += d * d;
  }
  T ph = f.phi(xs);
  return {pi2, f.zeta * ph};
}

}  // namespace detail

struct InvariantHamiltonian {
  EmField field;
  double c = 1.0;
  HamiltonianSystem solved;  // sqrt(c^2 pi^2 + m^2 c^4) + zeta phi
  ScalarField extended;      // H_L(q, P, t, e) on the phase layout, mc^2-normalized

  // |solved - extended(q, P, t, e = solved)| : the implicit relation
  double implicit_residual(const ExtendedPoint& pt) const {
    const double h = solved(pt);
    auto z = pt.phase();
    z.back() = h;
    return std::fabs(h - extended(z));
  }
};

inline InvariantHamiltonian lorentz_invariant_hamiltonian(const EmField& f, double c = 1.0) {
  if (!(f.m > 0.0)) throw Error("mass must be positive");
  if (!(c > 0.0)) throw Error("speed of light must be positive");
  const double m = f.m;
  auto solved = HamiltonianSystem::make(3, "Lorentz-invariant charged particle", [f, c, m](auto z) {
    using T = std::remove_const_t<typename decltype(z)::element_type>;
    auto [pi2, zphi] = detail::kinetic<T>(f, z);
    T rad = c * c * pi2 + m * m * c * c * c * c;
    if (numkit::value_of(rad) < 0.0) throw DomainError("negative radicand in H_L");
    return numkit::sqrt(rad) + zphi;
  });
  auto extended = numkit::make_field(8, [f, c, m](auto z) {
    using T = std::remove_const_t<typename decltype(z)::element_type>;
    auto [pi2, zphi] = detail::kinetic<T>(f, z);
    T u = z[7] - zphi - m * c * c;
    return (pi2 - u * u / (c * c)) / (2.0 * m) + zphi + m * c * c;
  });
  return {f, c, std::move(solved), std::move(extended)};
}

// (P - zeta A)^2 / 2m + zeta phi
inline HamiltonianSystem nonrelativistic_hamiltonian(const EmField& f) {
  const double m = f.m;
  return HamiltonianSystem::make(3, "non-invariant charged particle", [f, m](auto z) {
    using T = std::remove_const_t<typename decltype(z)::element_type>;
    auto [pi2, zphi] = detail::kinetic<T>(f, z);
    return pi2 / (2.0 * m) + zphi;
  });
}

}  // namespace xps::relativity
