#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "extphase/celestial.hpp"
#include "extphase/numkit/random.hpp"
#include "extphase/phase.hpp"
#include "extphase/transform.hpp"

namespace xps::celestial {
namespace {

using numkit::Rng;
constexpr double pi = std::numbers::pi;

TimeFunction linear_xi() {
  return TimeFunction([](const auto& t) { return 1.0 + t; });
}

TEST(TimeScaling, Examples) {
  ExtendedPoint pt{{0.7}, {-0.4}, 0.0, 1.3, 0.0};
  // xi = 1: identity
  auto id = timescale_generating({TimeFunction::constant(1.0), 0.0});
  for (double t : {-2.0, 0.0, 3.5}) {
    pt.t = t;
    auto img = transform::apply_generating(id, pt);
    EXPECT_NEAR(img.t, t, 1e-14);
    EXPECT_NEAR(img.e, pt.e, 1e-14);
    EXPECT_EQ(img.q[0], pt.q[0]);
  }
  // xi = 2, t = 4
  pt.t = 4.0;
  auto img = transform::apply_generating(timescale_generating({TimeFunction::constant(2.0), 0.0}), pt);
  EXPECT_NEAR(img.t, 2.0, 1e-14);
  EXPECT_NEAR(img.e, 2.6, 1e-14);
  // xi = 1 + t, t = 1
  pt.t = 1.0;
  img = transform::apply_generating(timescale_generating({linear_xi(), 0.0}), pt);
  EXPECT_NEAR(img.t, std::log(2.0), 1e-13);
  EXPECT_NEAR(img.e, 2.6, 1e-13);
  EXPECT_NEAR(img.p[0], -0.4, 1e-15);
}

TEST(TimeScaling, NonPositiveXiIsDomainError) {
  auto f = timescale_generating({TimeFunction([](const auto& t) { return 1.0 - t; }), 0.0});
  EXPECT_THROW(transform::apply_generating(f, ExtendedPoint{{0.0}, {0.0}, 2.0, 1.0, 0.0}), DomainError);
}

TEST(TimeScaling, FlagsAndVolumeForms) {
  Rng rng(1);
  TimeFunction xi([](const auto& t) { return 2.0 + numkit::sin(t); });
  auto f = timescale_generating({xi, 0.3}, 2);
  for (int k = 0; k < 10; ++k) {
    ExtendedPoint pt{rng.uniform_vector(2, -1, 1), rng.uniform_vector(2, -1, 1),
                     rng.uniform(-3, 3), rng.uniform(-1, 1), 0.0};
    auto rep = transform::restriction_report(f, pt);
    EXPECT_TRUE(rep.preserves_H1 && rep.time_global && rep.spacetime_split && rep.subspace_liouville);
    auto img = transform::solve_generating(f, pt);
    EXPECT_NEAR(img.jacobian(2, 2) * img.jacobian(5, 5), 1.0, 1e-12);
    EXPECT_NEAR(img.point.e, xi(pt.t) * pt.e, 1e-12);
  }
}

TEST(TimeScaling, HamiltonianScalesWithXi) {
  Rng rng(2);
  TimeFunction xi([](const auto& t) { return 1.0 + 0.5 * t * t; });
  auto f = timescale_generating({xi, 0.0});
  auto h = kepler_hamiltonian(1.0);
  for (int k = 0; k < 20; ++k) {
    auto pt = phase::lift({rng.uniform(0.2, 3.0)}, {rng.uniform(-1, 1)}, rng.uniform(-2, 2), h);
    EXPECT_NEAR(transform::transform_hamiltonian(h, f, pt), xi(pt.t) * h(pt), 1e-10);
  }
}

TEST(KeplerDirect, BoundStateFallsInward) {
  KeplerSpec spec{1.0, 1.0, 0.0};
  EXPECT_EQ(spec.energy(), -1.0);
  auto tr = kepler_direct(spec, 0.0, 1.0);
  for (std::size_t i = 1; i < tr.size(); ++i) EXPECT_LT(tr.at(i, 0), tr.at(i - 1, 0));
}

TEST(KeplerDirect, ParabolicEscape) {
  KeplerSpec spec{1.0, 1.0, std::sqrt(2.0)};
  EXPECT_NEAR(spec.energy(), 0.0, 1e-15);
  auto tr = kepler_direct(spec, 0.0, 100.0);
  // x = (1 + 3 t / sqrt2 )^(2/3) for the parabolic orbit
  const double t = tr.s_back();
  EXPECT_NEAR(tr.at(tr.size() - 1, 0), std::pow(1.0 + 1.5 * std::sqrt(2.0) * t, 2.0 / 3.0), 1e-8);
  EXPECT_GT(tr.at(tr.size() - 1, 0), 20.0);
}

TEST(KeplerDirect, StallsAtCollisionAndConservesEnergyBefore) {
  KeplerSpec spec{1.0, 2.0, 0.0};  // collision at t = pi
  try {
    kepler_direct(spec, 0.0, 5.0);
    FAIL() << "expected a stall";
  } catch (const numkit::IntegrationStall& st) {
    EXPECT_NEAR(st.s(), pi, 1e-3);
    const auto& tr = st.partial();
    ASSERT_GT(tr.size(), 10u);
    EXPECT_EQ(tr.labels()[2], "e");
    for (std::size_t i = 0; i < tr.size(); ++i)
      if (tr.at(i, 0) > 0.05) EXPECT_LT(std::fabs(tr.at(i, 2) + 0.5), 1e-9);
  }
}

TEST(KeplerRegularized, PassesCollisionSmoothly) {
  KeplerSpec spec{1.0, 2.0, 0.0};
  auto tr = kepler_regularized(spec, 0.0, 2 * pi);
  double xmin = 1e9;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const double tp = tr.s(i);
    EXPECT_NEAR(tr.at(i, 0), 1.0 + std::cos(tp), 1e-9);
    EXPECT_NEAR(tr.at(i, 2), tp + std::sin(tp), 1e-9);
    EXPECT_LT(std::fabs(tr.at(i, 1)), 1.0 + 1e-9);
    EXPECT_NEAR(regularized_energy_residual(1.0, -0.5, tr.at(i, 0), tr.at(i, 1)), 0.0, 1e-8);
    xmin = std::min(xmin, tr.at(i, 0));
  }
  EXPECT_LT(xmin, 1e-3);
  auto at_pi = tr.interpolate(pi);
  EXPECT_NEAR(at_pi[0], 0.0, 1e-9);
  EXPECT_NEAR(at_pi[2], pi, 1e-9);  // physical collision time
}

TEST(KeplerRegularized, ClosedFormsAllConics) {
  for (auto [x0, p0] : {std::pair{1.0, 0.0}, std::pair{1.0, std::sqrt(2.0)}, std::pair{0.5, 2.5},
                        std::pair{3.0, -0.3}}) {
    KeplerSpec spec{1.3, x0, p0};
    const double e = spec.energy();
    auto tr = kepler_regularized(spec, 0.0, 4.0);
    for (std::size_t i = 0; i < tr.size(); i += 7) {
      auto cf = kepler_regularized_closed(1.3, e, x0, x0 * p0, tr.s(i));
      const double scale = 1.0 + std::fabs(cf.x) + std::fabs(cf.t);
      EXPECT_NEAR(tr.at(i, 0), cf.x, 1e-9 * scale);
      EXPECT_NEAR(tr.at(i, 1), cf.w, 1e-9 * scale);
      EXPECT_NEAR(tr.at(i, 2), cf.t, 1e-9 * scale);
      EXPECT_NEAR(regularized_energy_residual(1.3, e, tr.at(i, 0), tr.at(i, 1)) / (scale * scale),
                  0.0, 1e-8);
    }
  }
}

TEST(KeplerRegularized, UnitStartIsNotCircularOnShell) {
  // x0 = 1, p0 = 0 gives e = -1: x = 1/2 + cos(sqrt2 t')/2
  auto tr = kepler_regularized(KeplerSpec{1.0, 1.0, 0.0}, 0.0, 3.0);
  for (std::size_t i = 0; i < tr.size(); ++i)
    EXPECT_NEAR(tr.at(i, 0), 0.5 + 0.5 * std::cos(std::sqrt(2.0) * tr.s(i)), 1e-9);
  // the constant solution needs e = -1/2 with zero initial slope (off shell)
  auto flat = kepler_regularized(KeplerSpec{1.0, 1.0, 0.0}, -0.5, 0.0, 0.0, 10.0);
  for (std::size_t i = 0; i < flat.size(); ++i) EXPECT_NEAR(flat.at(i, 0), 1.0, 1e-12);
}

TEST(KeplerRegularized, AgreesWithDirectIntegration) {
  KeplerSpec spec{1.0, 2.0, 0.0};
  auto reg = kepler_regularized(spec, 0.0, 3.0);
  numkit::Trajectory direct;
  try {
    direct = kepler_direct(spec, 0.0, 5.0);
  } catch (const numkit::IntegrationStall& st) {
    direct = st.partial();
  }
  int checked = 0;
  for (std::size_t i = 0; i < reg.size(); ++i) {
    const double x = reg.at(i, 0), t = reg.at(i, 2);
    if (x <= 0.01 || !direct.contains(t)) continue;
    EXPECT_NEAR(direct.interpolate(t)[0], x, 1e-6);
    ++checked;
  }
  EXPECT_GT(checked, 20);
}

TEST(TimeScaledEquations, ClosedRhsMatchesRegularizedMotion) {
  const double K2 = 1.0;
  TimeScaledEquations eq(kepler_hamiltonian(K2));
  auto rhs = eq.close([](const ExtendedPoint& pt) { return pt.q[0]; });
  auto pt0 = phase::lift({2.0}, {0.0}, 0.0, kepler_hamiltonian(K2));
  auto tr = numkit::integrate(rhs, pt0.phase(), 0.0, 2.5);
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const double tp = tr.s(i);
    EXPECT_NEAR(tr.at(i, 0), 1.0 + std::cos(tp), 1e-8);
    EXPECT_NEAR(tr.at(i, 2), tp + std::sin(tp), 1e-8);
    EXPECT_NEAR(tr.at(i, 3), -0.5, 1e-10);
  }
}

TEST(TimeScaledEquations, InsertingXiIntoHFirstIsWrong) {
  // Differentiating x H instead of keeping xi symbolic adds -H to dp/dt'.
  const double K2 = 1.0;
  auto h = kepler_hamiltonian(K2);
  TimeScaledEquations eq(h);
  auto good = eq.close([](const ExtendedPoint& pt) { return pt.q[0]; });
  auto naive_h = phase::HamiltonianSystem::make(1, "x H", [K2](auto z) {
    return z[0] * (0.5 * z[1] * z[1] - K2 / z[0]);
  });
  auto pt = phase::lift({1.5}, {0.3}, 0.0, h);
  auto naive = phase::extended_rhs(pt, 1.0, naive_h).phase();
  auto right = good(0.0, pt.phase());
  EXPECT_NEAR(right[0], naive[0], 1e-14);
  EXPECT_NEAR(naive[1] - right[1], -h(pt), 1e-12);
  EXPECT_GT(std::fabs(naive[1] - right[1]), 1e-3);
  // the closed system integrates to the correct orbit; the naive one does not
  auto wrong_rhs = [naive_h](double, std::span<const double> y) {
    auto p = ExtendedPoint::from_phase(y);
    auto r = phase::extended_rhs(p, 1.0, naive_h);
    r.dt = p.q[0];
    return r.phase();
  };
  auto pt2 = phase::lift({2.0}, {0.0}, 0.0, h);
  auto a = numkit::integrate(good, pt2.phase(), 0.0, 1.0);
  auto b = numkit::integrate(wrong_rhs, pt2.phase(), 0.0, 1.0);
  EXPECT_GT(std::fabs(a.interpolate(1.0)[0] - b.interpolate(1.0)[0]), 1e-2);
}

// ---------------------------------------------------------------- KS

ExtendedPoint random_ks(Rng& rng, bool on_constraint = true) {
  ExtendedPoint pt{rng.uniform_vector(4, -1, 1), rng.uniform_vector(4, -1, 1),
                   rng.uniform(0, 2), rng.uniform(-1, 1), 0.0};
  if (on_constraint) {
    const auto row = ks_constraint_row(pt);
    double l = ks_bilinear<double>(pt.q, pt.p), nn = 0.0;
    for (int i = 0; i < 4; ++i) nn += row(0, 5 + i) * row(0, 5 + i);
    for (int i = 0; i < 4; ++i) pt.p[i] -= l / nn * row(0, 5 + i);
  }
  return pt;
}

TEST(KS, PositionExamples) {
  ExtendedPoint pt{{1, 0, 0, 0}, {0, 0, 0, 0}, 0.0, 0.0, 0.0};
  auto img = ks_map(pt);
  EXPECT_EQ(img.q, (std::vector<double>{1, 0, 0, 0}));
  Rng rng(3);
  for (int k = 0; k < 100; ++k) {
    auto u = rng.uniform_vector(4, -2, 2);
    auto q = ks_position<double>(u);
    const double r2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2] + u[3] * u[3];
    EXPECT_NEAR(q[0] * q[0] + q[1] * q[1] + q[2] * q[2], r2 * r2, 1e-12 * (1 + r2 * r2));
    EXPECT_EQ(q[3], 0.0);
  }
}

TEST(KS, MomentumRulesSatisfyBilinearRelation) {
  Rng rng(4);
  for (int k = 0; k < 100; ++k) {
    auto u = rng.uniform_vector(4, -1, 1);
    auto p = rng.uniform_vector(3, -1, 1);
    auto pu = ks_momentum_forward(u, p);
    EXPECT_NEAR(ks_bilinear<double>(u, pu), 0.0, 1e-12);
    // and the map recovers the physical momentum
    ExtendedPoint ks{u, {pu.begin(), pu.end()}, 0.0, 0.0, 0.0};
    auto img = ks_map(ks);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(img.p[i], p[i], 1e-12);
    EXPECT_NEAR(img.p[3], 0.0, 1e-12);
  }
}

TEST(KS, MapAgreesWithGeneratingFunctionRules) {
  Rng rng(5);
  TimeFunction xi([](const auto& t) { return 1.0 + 0.3 * t * t; });
  auto f = ks_generating(xi);
  for (int k = 0; k < 20; ++k) {
    auto ks = random_ks(rng);
    auto img = ks_map(ks, xi);
    // native args (u, p, t', e, s)
    std::vector<double> args(ks.q);
    args.insert(args.end(), img.p.begin(), img.p.end());
    args.push_back(ks.t);
    args.push_back(img.e);
    args.push_back(0.0);
    auto g = numkit::grad_eval(f.value, args).gradient;
    for (int i = 0; i < 4; ++i) {
      EXPECT_NEAR(-g[4 + i], img.q[i], 1e-12);  // q = -dF/dp
      EXPECT_NEAR(-g[i], ks.p[i], 1e-12);       // p' = -dF/dq'
    }
    EXPECT_NEAR(g[9], img.t, 1e-12);          // t = dF/de
    EXPECT_NEAR(g[8], ks.e, 1e-12);           // e' = dF/dt' = e xi(t')
    EXPECT_NEAR(img.e * xi(ks.t), ks.e, 1e-12);
  }
}

TEST(KS, CanonicalOnConstraintSurface) {
  Rng rng(6);
  for (const auto& xi : {TimeFunction::constant(1.0), TimeFunction([](const auto& t) {
                           return 1.0 + 0.5 * numkit::sin(t);
                         })}) {
    for (int k = 0; k < 50; ++k) {
      auto ks = random_ks(rng);
      EXPECT_LE(ks_symplectic_residual(ks, xi), 1e-10);
    }
  }
  // off the restriction the full residual does not vanish (q4 is frozen)
  auto ks = random_ks(rng);
  EXPECT_GT(phase::symplectic_residual(ks_extended_map().jacobian(ks)), 1e-3);
}

TEST(KS, CollisionChart) {
  ExtendedPoint origin{{0, 0, 0, 0}, {1, 0, 0, 0}, 0.0, 0.0, 0.0};
  EXPECT_THROW(ks_map(origin), CollisionChartError);
}

}  // namespace
}  // namespace xps::celestial
