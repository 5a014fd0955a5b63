#pragma once

#include <cstddef>
#include <vector>

#include "extphase/errors.hpp"
#include "extphase/numkit/field.hpp"
#include "extphase/phase/extended_point.hpp"

namespace xps::phase {

// Extended Poisson bracket of two fields on the phase layout (q, p, t, e):
//   sum_i (F_qi G_pi - F_pi G_qi) - F_t G_e + F_e G_t
inline double poisson_extended(const ScalarField& f, const ScalarField& g,
                               const ExtendedPoint& pt) {
  const std::size_t n = pt.n();
  if (f.arity() != 2 * n + 2 || g.arity() != 2 * n + 2)
    throw Error("bracket operands must be fields on (q, p, t, e)");
  const auto z = pt.phase();
  const auto df = numkit::grad_eval(f, z).gradient;
  const auto dg = numkit::grad_eval(g, z).gradient;
  double b = 0.0;
  for (std::size_t i = 0; i < n; ++i) b += df[i] * dg[n + i] - df[n + i] * dg[i];
  b += -df[2 * n] * dg[2 * n + 1] + df[2 * n + 1] * dg[2 * n];
  return b;
}

// The i-th canonical coordinate (q1..qn, t, p1..pn, -e) as a field on the
// phase layout.
inline ScalarField canonical_coordinate(std::size_t n, std::size_t i) {
  std::size_t slot;
  double sign = 1.0;
  if (i < n) slot = i;
  else if (i == n) slot = 2 * n;
  else if (i < 2 * n + 1) slot = i - 1;
  else {
    slot = 2 * n + 1;
    sign = -1.0;
  }
  return ScalarField(2 * n + 2, [slot, sign](auto z) {
    using T = std::remove_const_t<typename decltype(z)::element_type>;
    return T(sign * z[slot]);
  });
}

// max |{z_i, z_j} - J_ij| over the canonical coordinates at pt.
inline double fundamental_bracket_error(const ExtendedPoint& pt) {
  const std::size_t n = pt.n();
  const std::size_t m = n + 1;
  std::vector<ScalarField> z;
  for (std::size_t i = 0; i < 2 * m; ++i) z.push_back(canonical_coordinate(n, i));
  double err = 0.0;
  for (std::size_t i = 0; i < 2 * m; ++i)
    for (std::size_t j = 0; j < 2 * m; ++j) {
      double want = 0.0;
      if (i < m && j == i + m) want = 1.0;
      if (i >= m && j == i - m) want = -1.0;
      err = std::max(err, std::fabs(poisson_extended(z[i], z[j], pt) - want));
    }
  return err;
}

}  // namespace xps::phase
