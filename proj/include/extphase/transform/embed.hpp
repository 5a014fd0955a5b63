#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "extphase/errors.hpp"
#include "extphase/transform/generating.hpp"

namespace xps::transform {

// F2 = f2(q, p', t) - t e'. f2 has arity 2n+1 in the order (q, p', t).
inline GeneratingFunction embed_conventional(const ScalarField& f2, std::size_t n,
                                             std::string description = "embedded") {
  if (f2.arity() != 2 * n + 1) throw Error("conventional f2 must have arity 2n+1 (q, p', t)");
  return GeneratingFunction::make(Kind::F2, n, std::move(description), [f2, n](auto x) {
    using T = std::remove_const_t<typename decltype(x)::element_type>;
    std::vector<T> a(x.begin(), x.begin() + 2 * n);
    a.push_back(x[2 * n]);
    T v = f2(std::span<const T>(a));
    return v - x[2 * n] * x[2 * n + 1];
  });
}

// q.p' - t e'
inline GeneratingFunction extended_identity(std::size_t n) {
  return GeneratingFunction::make(Kind::F2, n, "extended identity", [n](auto x) {
    using T = std::remove_const_t<typename decltype(x)::element_type>;
    T v(0.0);
    for (std::size_t i = 0; i < n; ++i) v += x[i] * x[n + i];
    return v - x[2 * n] * x[2 * n + 1];
  });
}

}  // namespace xps::transform
