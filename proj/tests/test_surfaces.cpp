#include <gtest/gtest.h>

#include "support.hpp"

using namespace decoh;
using namespace testing_support;

TEST(Surfaces, QuadraticLocalData) {
  QuadraticSurface s;
  s.energy = 0.1;
  s.center = Vec::Constant(1, 1.0);
  s.gradient = Vec::Constant(1, 0.02);
  s.hessian = Mat::Constant(1, 1, 0.01);
  const LocalData at = evaluate_local(SurfaceSpec{s}, Vec::Constant(1, 3.0));
  EXPECT_NEAR(at.energy, 0.1 + 0.02 * 2.0 + 0.5 * 0.01 * 4.0, 1e-15);
  EXPECT_NEAR(at.gradient(0), 0.02 + 0.01 * 2.0, 1e-15);
  EXPECT_NEAR(at.hessian(0, 0), 0.01, 1e-15);
}

TEST(Surfaces, MorseMinimumHessian) {
  MorseDiagonal m;
  m.energy = 0.0;
  m.depth = Vec::Constant(1, 0.1);
  m.stiffness = Vec::Constant(1, 0.3);
  m.center = Vec::Constant(1, 0.5);
  const LocalData at = evaluate_local(SurfaceSpec{m}, Vec::Constant(1, 0.5));
  EXPECT_NEAR(at.energy, 0.0, 1e-16);
  EXPECT_NEAR(at.gradient(0), 0.0, 1e-16);
  EXPECT_NEAR(at.hessian(0, 0), 2.0 * 0.1 * 0.09, 1e-15);
  // dissociation limit
  EXPECT_NEAR(energy(SurfaceSpec{m}, Vec::Constant(1, 200.0)), 0.1, 1e-12);
}

TEST(Surfaces, MorseOverflowIsReported) {
  MorseDiagonal m{0.0, Vec::Constant(1, 0.1), Vec::Constant(1, 1.0), Vec::Zero(1)};
  EXPECT_THROW(evaluate_local(SurfaceSpec{m}, Vec::Constant(1, -800.0)), NumericalError);
}

TEST(Surfaces, FiniteDifferenceConsistencyProperty) {
  Gen g(42);
  for (int trial = 0; trial < 25; ++trial) {
    const Eigen::Index d = 1 + trial % 4;
    const Vec omega = g.omega(d);
    MorseDiagonal m{g.uniform(-0.1, 0.1), g.vec(d, 0.05, 0.2), g.vec(d, 0.1, 0.4), g.vec(d, -1.0, 1.0)};
    const Vec r = g.vec(d, -1.5, 1.5);
    EXPECT_LT(gradient_check(SurfaceSpec{g.quadratic(omega)}, r, 1e-4), 1e-6);
    EXPECT_LT(gradient_check(SurfaceSpec{g.quartic(omega)}, r, 1e-4), 1e-6);
    EXPECT_LT(gradient_check(SurfaceSpec{m}, r, 1e-4), 1e-6);
  }
}

TEST(Surfaces, ValidationRejectsBadInput) {
  QuadraticSurface s{0.0, Vec::Zero(2), Vec::Zero(2), Mat::Identity(2, 2)};
  s.hessian(0, 1) = 0.1;
  EXPECT_THROW(validate(SurfaceSpec{s}), ConfigError);
  s.hessian = Mat::Identity(3, 3);
  EXPECT_THROW(validate(SurfaceSpec{s}), ConfigError);
  MorseDiagonal m{0.0, Vec::Constant(1, -0.1), Vec::Constant(1, 0.3), Vec::Zero(1)};
  EXPECT_THROW(validate(SurfaceSpec{m}), ConfigError);
}

TEST(Surfaces, JsonBlocks) {
  const auto q = nlohmann::json::parse(R"({"type": "quadratic", "energy": 0.2, "hessian": [[0.01, 0.0], [0.0, 0.02]]})");
  const SurfaceSpec s = surface_from_json(q, "surfaces.X", 2);
  EXPECT_EQ(surface_dim(s), 2);
  EXPECT_NEAR(energy(s, Vec::Zero(2)), 0.2, 1e-15);

  const auto quartic = nlohmann::json::parse(
      R"({"type": "quartic", "hessian": [[0.01]], "cubic": [0.001], "quartic": [0.0005]})");
  const SurfaceSpec sq = surface_from_json(quartic, "surfaces.Y", 1);
  EXPECT_NEAR(energy(sq, Vec::Constant(1, 2.0)), 0.5 * 0.01 * 4 + 0.001 * 8 + 0.0005 * 16, 1e-15);

  try {
    surface_from_json(nlohmann::json::parse(R"({"type": "spline"})"), "surfaces.Z", 1);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "surfaces.Z.type");
  }
  EXPECT_THROW(surface_from_json(nlohmann::json::parse(R"({"type": "quadratic", "hessian": [[1.0]], "mass": 1})"),
                                 "surfaces.W", 1),
               ConfigError);
  EXPECT_THROW(surface_from_json(q, "surfaces.X", 3), ConfigError);
}
