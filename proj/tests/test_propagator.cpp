#include <gtest/gtest.h>

#include "support.hpp"

using namespace decoh;
using namespace testing_support;

namespace {

QuadraticSurface neutral(const Vec& omega) {
  return {0.0, Vec::Zero(omega.size()), Vec::Zero(omega.size()), Mat(omega.asDiagonal())};
}

}  // namespace

TEST(Propagator, GroundStateIsStationaryOnNeutralSurface) {
  const Vec omega = units::cm1_to_hartree(1.0) * Vec{{800.0, 1500.0, 3100.0}};
  const auto tr = run(omega, SurfaceSpec{neutral(omega)}, 0.25, 400);
  const auto& last = tr.snapshots.back();
  const double t_au = units::fs_to_au(tr.times_fs.back());
  EXPECT_LT(last.position.cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT(last.momentum.cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((last.width - kI * CMat::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-12);
  // zero-point phase e^{-i E0 t}
  EXPECT_NEAR(last.gamma.real(), -0.5 * omega.sum() * t_au, 1e-10);
  EXPECT_NEAR(norm(last), 1.0, 1e-12);
}

TEST(Propagator, KineticPotentialSplitConservesNorm) {
  const Vec omega = units::cm1_to_hartree(1.0) * Vec{{800.0, 1500.0, 3100.0}};
  const auto tr = run(omega, SurfaceSpec{neutral(omega)}, 0.25, 400, Variant::thawed, Splitting::kinetic_potential);
  const auto& last = tr.snapshots.back();
  EXPECT_EQ(last.position.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_NEAR(norm(last), 1.0, 1e-10);
  EXPECT_LT((last.width - kI * CMat::Identity(3, 3)).cwiseAbs().maxCoeff(), 0.05);
}

TEST(Propagator, ExactOnQuadraticSurfacesProperty) {
  Gen g(7);
  for (int trial = 0; trial < 8; ++trial) {
    const Vec omega = g.omega(1 + trial % 4);
    const QuadraticSurface s = g.quadratic(omega);
    const auto tr = run(omega, SurfaceSpec{s}, 0.5, 60);
    const auto ref = oracle::harmonic_closed_form(s, omega, ground_state(omega.size()), units::fs_to_au(30.0));
    EXPECT_LT(relative_error(tr.snapshots.back(), ref), 1e-9) << "trial " << trial;
  }
}

TEST(Propagator, KineticPotentialSplitIsSecondOrder) {
  Gen g(19);
  const Vec omega = g.omega(2);
  const QuadraticSurface s = g.quadratic(omega);
  const auto ref = oracle::harmonic_closed_form(s, omega, ground_state(2), units::fs_to_au(20.0));
  const auto coarse = run(omega, SurfaceSpec{s}, 0.2, 100, Variant::thawed, Splitting::kinetic_potential);
  const auto fine = run(omega, SurfaceSpec{s}, 0.1, 200, Variant::thawed, Splitting::kinetic_potential);
  const double ratio = parameter_distance(coarse.snapshots.back(), ref) / parameter_distance(fine.snapshots.back(), ref);
  EXPECT_GT(ratio, 3.5);
  EXPECT_LT(ratio, 4.5);
}

TEST(Propagator, TimeReversibleProperty) {
  Gen g(23);
  for (int trial = 0; trial < 6; ++trial) {
    const Vec omega = g.omega(1 + trial % 3);
    const SurfaceSpec s{g.quartic(omega)};
    const double dt = units::fs_to_au(0.25);
    const GaussianWavepacket wp0 = ground_state(omega.size());
    const ReferenceModel ref = make_reference(s, wp0.position, Splitting::harmonic_reference);
    GaussianWavepacket wp = wp0;
    for (int k = 0; k < 80; ++k) wp = step(wp, omega, s, ref, dt, Variant::thawed);
    EXPECT_GT(parameter_distance(wp, wp0), 1e-3);
    for (int k = 0; k < 80; ++k) wp = step(wp, omega, s, ref, -dt, Variant::thawed);
    EXPECT_LT(parameter_distance(wp, wp0), 1e-10) << "trial " << trial;
  }
}

TEST(Propagator, FrozenKeepsUnitWidth) {
  Gen g(29);
  const Vec omega = g.omega(3);
  const auto tr = run(omega, SurfaceSpec{g.quartic(omega)}, 0.25, 100, Variant::frozen);
  for (const auto& wp : tr.snapshots) EXPECT_EQ(wp.width, CMat(kI * CMat::Identity(3, 3)));
}

TEST(Propagator, AntisymmetricModesStayAtOrigin) {
  const Vec omega = units::cm1_to_hartree(1.0) * Vec{{900.0, 1400.0, 600.0}};
  QuarticPerturbed s;
  s.base.energy = 0.1;
  s.base.center = Vec::Zero(3);
  s.base.hessian = Mat(omega.asDiagonal()) * 1.1;
  s.base.hessian(0, 1) = s.base.hessian(1, 0) = 0.1 * omega(0);
  s.base.hessian(2, 2) = 0.7 * omega(2);
  s.base.gradient = Vec{{-0.4 * omega(0), 0.3 * omega(1), 0.0}};
  s.cubic = Vec{{0.01 * omega(0), -0.01 * omega(1), 0.0}};
  s.quartic = 0.002 * omega;
  for (Variant v : {Variant::thawed, Variant::frozen}) {
    const auto tr = run(omega, SurfaceSpec{s}, 0.25, 200, v);
    for (const auto& wp : tr.snapshots) {
      EXPECT_EQ(wp.position(2), 0.0);
      EXPECT_EQ(wp.momentum(2), 0.0);
    }
    EXPECT_GT(std::abs(tr.snapshots.back().position(0)), 1e-2);
  }
}

TEST(Propagator, RejectsBadConfiguration) {
  PropagationConfig c;
  c.n_steps = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c.n_steps = 10;
  c.dt_fs = -0.1;
  EXPECT_THROW(c.validate(), ConfigError);

  const auto frame = NormalModeFrame::from_wavenumbers({1000.0});
  const SurfaceSpec s{neutral(frame.omega())};
  EXPECT_THROW(prepare_initial(frame, {{"A", 0.9, s, {}}, {"B", 0.6, s, {}}}), ConfigError);
  EXPECT_NO_THROW(prepare_initial(frame, {{"A", 0.8, s, {}}, {"B", 0.6, s, {}}}));
  EXPECT_THROW(prepare_initial(frame, {{"A", 0.5, s, {}}, {"A", 0.5, s, {}}}), ConfigError);
  EXPECT_THROW(prepare_initial(frame, {}), ConfigError);
}

TEST(Propagator, IdenticalStatesGiveIdenticalTrajectories) {
  Gen g(31);
  const auto frame = NormalModeFrame::from_wavenumbers({700.0, 1200.0, 2100.0});
  const SurfaceSpec s{g.quartic(frame.omega())};
  const StateSet set = prepare_initial(frame, {{"A", 0.6, s, {}}, {"B", 0.6, s, {}}});
  PropagationConfig c;
  c.n_steps = 50;
  const auto rec = propagate(frame, set, c, 2);
  ASSERT_EQ(rec.states.size(), 2u);
  for (std::size_t k = 0; k < rec.states[0].snapshots.size(); ++k) {
    const auto& a = rec.states[0].snapshots[k];
    const auto& b = rec.states[1].snapshots[k];
    EXPECT_EQ(a.position, b.position);
    EXPECT_EQ(a.momentum, b.momentum);
    EXPECT_EQ(a.width, b.width);
    EXPECT_EQ(a.gamma, b.gamma);
  }
  const auto serial = propagate(frame, set, c, 1);
  EXPECT_EQ(serial.states[1].snapshots.back().gamma, rec.states[1].snapshots.back().gamma);
}

TEST(Propagator, OversizedStepIsReported) {
  // about half a vibrational period in one step
  const Vec omega = Vec::Constant(1, units::cm1_to_hartree(3000.0));
  EXPECT_THROW(run(omega, SurfaceSpec{neutral(omega)}, 5.0, 5), NumericalError);
}
