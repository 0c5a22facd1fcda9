#include <gtest/gtest.h>

#include "support.hpp"

using namespace decoh;
using namespace testing_support;

TEST(Units, ConversionsRoundTrip) {
  EXPECT_NEAR(units::fs_to_au(1.0), 41.341374575751, 1e-12);
  EXPECT_NEAR(units::au_to_fs(units::fs_to_au(0.25)), 0.25, 1e-15);
  EXPECT_NEAR(units::cm1_to_hartree(1.0), 4.556335252912e-6, 1e-18);
  EXPECT_NEAR(units::hartree_to_cm1(units::cm1_to_hartree(1808.0)), 1808.0, 1e-9);
  EXPECT_NEAR(units::me_to_amu(units::amu_to_me(12.0)), 12.0, 1e-12);
  EXPECT_NEAR(units::angstrom_to_bohr(0.529177210903), 1.0, 1e-12);
}

TEST(NormalModeFrame, DefaultsLabels) {
  const auto f = NormalModeFrame::from_wavenumbers({1000.0, 2000.0});
  EXPECT_EQ(f.dim(), 2);
  EXPECT_EQ(f.labels()[1], "mode 2");
  EXPECT_FALSE(f.has_irreps());
  EXPECT_NEAR(f.omega()(1), units::cm1_to_hartree(2000.0), 1e-18);
}

TEST(NormalModeFrame, RejectsImaginaryOrZeroFrequencies) {
  EXPECT_THROW(NormalModeFrame(Vec::Constant(2, 0.0)), ConfigError);
  EXPECT_THROW(NormalModeFrame::from_wavenumbers({1000.0, -50.0}), ConfigError);
  EXPECT_THROW(NormalModeFrame(Vec(0)), ConfigError);
}

TEST(NormalModeFrame, RejectsNonOrthonormalModeVectors) {
  MolecularFrame geom({{"H", 1.0, {0, 0, 0}}, {"H", 1.0, {0, 0, 1.4}}});
  Mat v = Mat::Zero(6, 1);
  v(2, 0) = 0.8;
  v(5, 0) = -0.6 + 1e-6;
  EXPECT_THROW(NormalModeFrame(Vec::Constant(1, 0.02), {}, {}, geom, v), ConfigError);
  v(5, 0) = -0.6;
  EXPECT_NO_THROW(NormalModeFrame(Vec::Constant(1, 0.02), {}, {}, geom, v));
}

TEST(MolecularFrame, Validation) {
  EXPECT_THROW(MolecularFrame({{"H", 1.0, {0, 0, 0}}}), ConfigError);
  EXPECT_THROW(MolecularFrame({{"H", 1.0, {0, 0, 0}}, {"H", 0.0, {1, 0, 0}}}), ConfigError);
  MolecularFrame m({{"H", 1.0, {0, 0, 0}}, {"O", 3.0, {4, 0, 0}}});
  EXPECT_NEAR(m.center_of_mass().x(), 3.0, 1e-15);
}

TEST(ScaledCoordinates, RoundTripAndHarmonicEnergyProperty) {
  const NormalModeFrame f = [] {
    RunConfig cfg = load_run_config(model("propynal-like.json"));
    return cfg.require_frame();
  }();
  Gen g(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec r = g.vec(f.dim(), -2.0, 2.0);
    const Vec p = g.vec(f.dim(), -2.0, 2.0);
    const auto [x, px] = from_scaled(f, r, p);
    const auto [r2, p2] = to_scaled(f, x, px);
    EXPECT_LT((r2 - r).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((p2 - p).cwiseAbs().maxCoeff(), 1e-10);

    // In mass-weighted normal coordinates E = 1/2 sum (w^2 Q^2 + P_Q^2); in
    // scaled coordinates the same energy is 1/2 sum w (R^2 + P^2).
    const Vec w = f.omega();
    const Vec q = r.cwiseQuotient(w.cwiseSqrt());
    const Vec pq = p.cwiseProduct(w.cwiseSqrt());
    const double e_nm = 0.5 * (w.array().square() * q.array().square()).sum() + 0.5 * pq.squaredNorm();
    const double e_scaled = 0.5 * (w.array() * (r.array().square() + p.array().square())).sum();
    EXPECT_NEAR(e_nm, e_scaled, 1e-14 * std::max(1.0, e_scaled));
  }
}

TEST(ScaledCoordinates, NeedModeVectors) {
  const auto f = NormalModeFrame::from_wavenumbers({1000.0});
  EXPECT_THROW(to_scaled(f, Vec::Zero(6), Vec::Zero(6)), ConfigError);
}

TEST(SystemFile, ParsesAndCanonicalizesIrreps) {
  const auto j = nlohmann::json::parse(R"({"modes": [
      {"frequency_cm1": 1808.0, "label": "C=O stretching", "irrep": "A'"},
      {"frequency_cm1": 600.0, "irrep": "A''"}]})");
  const NormalModeFrame f = system_from_json(j);
  EXPECT_EQ(f.irreps()[0], "A′");
  EXPECT_EQ(f.irreps()[1], "A″");
  EXPECT_EQ(f.labels()[0], "C=O stretching");
  EXPECT_EQ(f.labels()[1], "mode 2");
}

TEST(SystemFile, RejectsUnknownKeysWithFieldPath) {
  const auto j = nlohmann::json::parse(R"({"modes": [{"frequency_cm1": 1000.0, "freq": 3}]})");
  try {
    system_from_json(j);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "modes[0].freq");
  }
}

TEST(SystemFile, IrrepsAllOrNone) {
  const auto j = nlohmann::json::parse(R"({"modes": [{"frequency_cm1": 1000.0, "irrep": "A"}, {"frequency_cm1": 900.0}]})");
  EXPECT_THROW(system_from_json(j), ConfigError);
}

TEST(SystemFile, RejectsNegativeFrequency) {
  const auto j = nlohmann::json::parse(R"({"modes": [{"frequency_cm1": -10.0}]})");
  EXPECT_THROW(system_from_json(j), ConfigError);
}

TEST(SystemFile, BundledGeometryLoads) {
  const RunConfig cfg = load_run_config(model("pentynal-like.json"));
  const auto& f = cfg.require_frame();
  ASSERT_TRUE(f.geometry().has_value());
  EXPECT_EQ(f.geometry()->size(), 12u);
  EXPECT_EQ(f.dim(), 30);
  EXPECT_EQ(f.mode_vectors()->rows(), 36);
}
