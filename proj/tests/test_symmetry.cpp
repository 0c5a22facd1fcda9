#include <gtest/gtest.h>

#include "support.hpp"

using namespace decoh;
using namespace testing_support;

namespace {

// Water-like molecule in the yz plane with C2 along z.
MolecularFrame water() {
  return MolecularFrame({{"O", 15.995, {0.0, 0.0, -0.12}}, {"H", 1.008, {0.0, 1.43, 0.98}}, {"H", 1.008, {0.0, -1.43, 0.98}}});
}

// Columns: symmetric stretch (A1), out-of-plane wag (B1), antisymmetric stretch (B2), twist (A2).
Mat water_vectors() {
  Mat v = Mat::Zero(9, 4);
  v.col(0).segment<3>(0) << 0.0, 0.0, 0.3;
  v.col(0).segment<3>(3) << 0.0, 0.5, 0.4;
  v.col(0).segment<3>(6) << 0.0, -0.5, 0.4;
  v.col(1).segment<3>(0) << 0.2, 0.0, 0.0;
  v.col(1).segment<3>(3) << -0.6, 0.0, 0.0;
  v.col(1).segment<3>(6) << -0.6, 0.0, 0.0;
  v.col(2).segment<3>(0) << 0.0, 0.25, 0.0;
  v.col(2).segment<3>(3) << 0.0, 0.5, 0.45;
  v.col(2).segment<3>(6) << 0.0, 0.5, -0.45;
  v.col(3).segment<3>(3) << 0.7, 0.0, 0.0;
  v.col(3).segment<3>(6) << -0.7, 0.0, 0.0;
  v.colwise().normalize();
  return v;
}

Mat rotate_vectors(const Mat& v, const Eigen::Matrix3d& q) {
  Mat out = v;
  for (Eigen::Index a = 0; a < v.rows() / 3; ++a) out.middleRows(3 * a, 3) = q * v.middleRows(3 * a, 3);
  return out;
}

MolecularFrame rotate_frame(const MolecularFrame& f, const Eigen::Matrix3d& q) {
  std::vector<Atom> atoms = f.atoms();
  for (auto& a : atoms) a.position_bohr = q * a.position_bohr;
  return MolecularFrame(atoms);
}

}  // namespace

TEST(Symmetry, WaterLikeC2v) {
  const PointGroup g = detect_operations(water(), "C2v");
  ASSERT_EQ(g.operations.size(), 4u);
  EXPECT_EQ(g.operations[1].name, "C2");
  // H atoms swap under C2 and sigma_v(xz), stay under sigma_v'(yz)
  EXPECT_EQ(g.operations[1].permutation, (std::vector<std::size_t>{0, 2, 1}));
  EXPECT_EQ(g.operations[2].permutation, (std::vector<std::size_t>{0, 2, 1}));
  EXPECT_EQ(g.operations[3].permutation, (std::vector<std::size_t>{0, 1, 2}));
  const auto a = classify_modes(g, water_vectors());
  EXPECT_EQ(a.irreps(), (std::vector<std::string>{"A1", "B1", "B2", "A2"}));
  EXPECT_EQ(tally(a), "1A1+1A2+1B1+1B2");
  for (const auto& m : a.modes) EXPECT_NEAR(m.confidence, 1.0, 1e-12);
}

TEST(Symmetry, PlanarChainCs) {
  const MolecularFrame chain(
      {{"C", 12.0, {0.0, 0.0, 0.0}}, {"C", 12.0, {2.5, 0.4, 0.0}}, {"O", 15.995, {4.6, -0.8, 0.0}}});
  const PointGroup g = detect_operations(chain, "Cs");
  Mat v = Mat::Zero(9, 3);
  v.col(0) << 0.3, 0.1, 0.0, -0.5, 0.2, 0.0, 0.4, -0.3, 0.0;
  v.col(1) << 0.0, 0.6, 0.0, 0.1, -0.4, 0.0, -0.2, 0.1, 0.0;
  v.col(2) << 0.0, 0.0, 0.5, 0.0, 0.0, -0.7, 0.0, 0.0, 0.3;
  v.colwise().normalize();
  const auto a = classify_modes(g, v);
  EXPECT_EQ(tally(a), "2A′+1A″");
  EXPECT_EQ(to_json(a, {"x", "y", "z"})["modes"][2]["label"], "z");
}

TEST(Symmetry, C1LabelsEverythingA) {
  const MolecularFrame chain({{"C", 12.0, {0.0, 0.0, 0.0}}, {"N", 14.0, {2.5, 0.4, 0.3}}, {"O", 15.995, {4.6, -0.8, 0.0}}});
  const PointGroup g = detect_operations(chain, "C1");
  Gen gen(1);
  Mat v(9, 5);
  for (Eigen::Index j = 0; j < 5; ++j) v.col(j) = gen.vec(9, -1, 1).normalized();
  const auto a = classify_modes(g, v);
  EXPECT_EQ(tally(a), "5A");
}

TEST(Symmetry, RotationInvarianceProperty) {
  Gen gen(3);
  const MolecularFrame f = water();
  const Mat v = water_vectors();
  const PointGroup g = detect_operations(f, "C2v");
  const auto base = classify_modes(g, v).irreps();
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::Matrix3d q = gen.orthogonal(3);
    if (q.determinant() < 0.0) q.col(0) *= -1.0;
    EXPECT_EQ(classify_modes(g.conjugated(q), rotate_vectors(v, q)).irreps(), base);
    // detection from scratch on the rotated geometry goes through the inertia axes
    const PointGroup found = detect_operations(rotate_frame(f, q), "C2v");
    const auto again = classify_modes(found, rotate_vectors(v, q));
    EXPECT_EQ(again.modes[0].irrep, "A1");
    EXPECT_EQ(again.modes[3].irrep, "A2");
  }
}

TEST(Symmetry, MixedVectorIsRejected) {
  const PointGroup g = detect_operations(water(), "C2v");
  Mat v = water_vectors();
  v.col(0) = (v.col(0) + 0.3 * v.col(2)).normalized();
  EXPECT_THROW(classify_modes(g, v.leftCols(1)), NumericalError);
}

TEST(Symmetry, AsymmetricGeometryNamesAtoms) {
  const MolecularFrame bent({{"O", 15.995, {0.0, 0.0, -0.12}}, {"H", 1.008, {0.0, 1.43, 0.98}}, {"H", 1.008, {0.0, -1.30, 1.02}}});
  try {
    detect_operations(bent, "C2v", 1e-3);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("H"), std::string::npos);
  }
  // loose tolerance accepts it
  EXPECT_NO_THROW(detect_operations(bent, "C2v", 0.2));
}

TEST(Symmetry, UnsupportedGroup) {
  EXPECT_THROW(detect_operations(water(), "D2h"), ConfigError);
}

TEST(Symmetry, BundledModelsClassify) {
  for (const auto& [file, expected] : std::vector<std::pair<std::string, std::string>>{
           {"propynal-like.json", "9A′+3A″"}, {"pentynal-like.json", "19A′+11A″"}, {"dihydrofuran-like.json", "9A1+5A2+5B1+8B2"}}) {
    const RunConfig cfg = load_run_config(model(file));
    ASSERT_TRUE(cfg.symmetry.has_value()) << file;
    const auto& f = cfg.require_frame();
    const PointGroup g = detect_operations(*f.geometry(), cfg.symmetry->point_group, cfg.symmetry->tolerance_bohr);
    EXPECT_EQ(tally(classify_modes(g, *f.mode_vectors(), cfg.symmetry->character_threshold)), expected) << file;
  }
}
