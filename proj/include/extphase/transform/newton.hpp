#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "extphase/errors.hpp"

namespace xps::transform {

struct NewtonOptions {
  int max_iter = 50;
  double tol = 1e-13;        // relative to 1 + |target|
  double det_floor = 1e-12;  // |det J| below this is a degeneracy
};

struct NewtonResult {
  Eigen::VectorXd x;
  int iterations = 0;
  double residual = 0.0;
};

// Residual and Jacobian at x.
using NewtonSystem = std::function<std::pair<Eigen::VectorXd, Eigen::MatrixXd>(const Eigen::VectorXd&)>;

// Damped Newton with step halving on the max-norm residual. `scale` sets the
// convergence threshold tol*(1+scale).
inline NewtonResult newton_solve(const NewtonSystem& sys, Eigen::VectorXd x, double scale,
                                 const NewtonOptions& opt = {}) {
  const double thresh = opt.tol * (1.0 + scale);
  auto [r, jac] = sys(x);
  double rn = r.cwiseAbs().maxCoeff();
  for (int it = 0; it <= opt.max_iter; ++it) {
    if (!std::isfinite(rn)) throw ImplicitSolveError("non-finite residual in implicit solve");
    if (rn <= thresh) return {x, it, rn};
    if (it == opt.max_iter) break;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
    const double det = jac.determinant();
    // singular at the seed: the rules are degenerate there; later on it
    // means the iteration ran away from any solution
    if (!(std::fabs(det) >= opt.det_floor)) {
      const std::string msg = "singular Jacobian in implicit solve (|det| = " +
                              std::to_string(std::fabs(det)) + ")";
      if (it == 0) throw DegeneracyError(msg);
      throw ImplicitSolveError(msg);
    }
    const Eigen::VectorXd dx = lu.solve(r);
    double lambda = 1.0;
    bool accepted = false;
    for (int k = 0; k < 30; ++k) {
      Eigen::VectorXd xt = x - lambda * dx;
      try {
        auto [rt, jt] = sys(xt);
        const double rtn = rt.cwiseAbs().maxCoeff();
        if (std::isfinite(rtn) && rtn < rn) {
          x = std::move(xt);
          r = std::move(rt);
          jac = std::move(jt);
          rn = rtn;
          accepted = true;
          break;
        }
      } catch (const DomainError&) {
      }
      lambda *= 0.5;
    }
    if (!accepted) {
      // at the roundoff floor the full step cannot decrease the residual
      if (rn <= 1e3 * thresh) return {x, it, rn};
      break;
    }
  }
  throw ImplicitSolveError("implicit solve did not converge in " + std::to_string(opt.max_iter) +
                           " iterations (residual " + std::to_string(rn) + ")");
}

}  // namespace xps::transform
