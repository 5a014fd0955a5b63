#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "extphase/errors.hpp"
#include "extphase/numkit/field.hpp"
#include "extphase/phase/extended_point.hpp"

namespace xps::phase {

// J in the canonical ordering (q1..qn, t, p1..pn, -e).
inline Eigen::MatrixXd symplectic_matrix(std::size_t n) {
  const Eigen::Index m = static_cast<Eigen::Index>(n + 1);
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  j.topRightCorner(m, m).setIdentity();
  j.bottomLeftCorner(m, m) = -Eigen::MatrixXd::Identity(m, m);
  return j;
}

// max |M^T J M - J| for a Jacobian in canonical ordering.
inline double symplectic_residual(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() % 2 != 0 || m.rows() < 4)
    throw Error("Jacobian must be square of even size >= 4");
  const auto j = symplectic_matrix(static_cast<std::size_t>(m.rows() / 2 - 1));
  return (m.transpose() * j * m - j).cwiseAbs().maxCoeff();
}

// Residual restricted to a subspace spanned by the orthonormal columns of
// `basis`: max |B^T (M^T J M - J) B|.
inline double symplectic_residual_on(const Eigen::MatrixXd& m, const Eigen::MatrixXd& basis) {
  const auto j = symplectic_matrix(static_cast<std::size_t>(m.rows() / 2 - 1));
  return (basis.transpose() * (m.transpose() * j * m - j) * basis).cwiseAbs().maxCoeff();
}

// Orthonormal basis of the common kernel of the given row vectors
// (the tangent space of a level set).
inline Eigen::MatrixXd tangent_basis(const Eigen::MatrixXd& constraint_rows) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(constraint_rows, Eigen::ComputeFullV);
  const Eigen::Index dim = constraint_rows.cols();
  Eigen::Index rank = 0;
  const auto& sv = svd.singularValues();
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > 1e-12 * std::max(1.0, sv(0))) ++rank;
  return svd.matrixV().rightCols(dim - rank);
}

// Smooth map of T*Q1 with its Jacobian in canonical ordering.
class ExtendedMap {
 public:
  using ApplyFn = std::function<ExtendedPoint(const ExtendedPoint&)>;
  using JacobianFn = std::function<Eigen::MatrixXd(const ExtendedPoint&)>;

  ExtendedMap() = default;
  ExtendedMap(ApplyFn apply, JacobianFn jacobian)
      : apply_(std::move(apply)), jacobian_(std::move(jacobian)) {}

  // From a generic callable acting on canonical coordinates z -> z'.
  template <class F>
  static ExtendedMap from_canonical(std::size_t n, F f) {
    numkit::VectorField vf(2 * n + 2, std::move(f));
    return ExtendedMap(
        [vf](const ExtendedPoint& pt) {
          auto z = pt.canonical();
          return ExtendedPoint::from_canonical(vf(std::span<const double>(z)), pt.s);
        },
        [vf](const ExtendedPoint& pt) {
          auto z = pt.canonical();
          return numkit::jacobian_eval(vf, z);
        });
  }

  static ExtendedMap linear(Eigen::MatrixXd m) {
    return ExtendedMap(
        [m](const ExtendedPoint& pt) {
          auto z = pt.canonical();
          Eigen::VectorXd v = m * Eigen::Map<const Eigen::VectorXd>(z.data(), z.size());
          return ExtendedPoint::from_canonical(std::span<const double>(v.data(), v.size()), pt.s);
        },
        [m](const ExtendedPoint&) { return m; });
  }

  ExtendedPoint operator()(const ExtendedPoint& pt) const { return apply_(pt); }
  Eigen::MatrixXd jacobian(const ExtendedPoint& pt) const { return jacobian_(pt); }

 private:
  ApplyFn apply_;
  JacobianFn jacobian_;
};

inline double symplectic_residual(const ExtendedMap& map, const ExtendedPoint& pt) {
  return symplectic_residual(map.jacobian(pt));
}

// Central-difference Jacobian in canonical ordering; cross-check only.
inline Eigen::MatrixXd finite_difference_jacobian(const ExtendedMap& map, const ExtendedPoint& pt,
                                                  double h = 1e-6) {
  auto z = pt.canonical();
  const Eigen::Index m = static_cast<Eigen::Index>(z.size());
  Eigen::MatrixXd jac(m, m);
  for (Eigen::Index c = 0; c < m; ++c) {
    auto zp = z, zm = z;
    zp[c] += h;
    zm[c] -= h;
    auto fp = map(ExtendedPoint::from_canonical(zp, pt.s)).canonical();
    auto fm = map(ExtendedPoint::from_canonical(zm, pt.s)).canonical();
    for (Eigen::Index r = 0; r < m; ++r) jac(r, c) = (fp[r] - fm[r]) / (2 * h);
  }
  return jac;
}

}  // namespace xps::phase
