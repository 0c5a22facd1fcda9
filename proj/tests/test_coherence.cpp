#include <gtest/gtest.h>

#include "support.hpp"

using namespace decoh;
using namespace testing_support;

namespace {

GaussianWavepacket random_packet(Gen& g, Eigen::Index d) {
  GaussianWavepacket wp = ground_state(d, g.phase() * g.uniform(0.3, 1.0));
  Mat b(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) b(i, j) = g.uniform(-0.3, 0.3);
  }
  const Mat q = g.orthogonal(d);
  const Mat im = q * g.vec(d, 0.5, 2.0).asDiagonal() * q.transpose();
  wp.width = symmetrized(CMat((b + b.transpose()).cast<cplx>() + kI * im.cast<cplx>()));
  wp.position = g.vec(d, -1.0, 1.0);
  wp.momentum = g.vec(d, -1.0, 1.0);
  wp.gamma = {g.uniform(-1, 1), g.uniform(-0.5, 0.5)};
  return wp;
}

QuadraticSurface displaced(const Vec& omega, double c) {
  return {0.05, Vec::Constant(omega.size(), c), Vec::Zero(omega.size()), Mat(omega.asDiagonal())};
}

}  // namespace

TEST(Coherence, SelfOverlapIsPopulation) {
  const auto wp = ground_state(3, cplx{std::sqrt(0.5), 0.0});
  const cplx chi = overlap_coherence(wp, wp);
  EXPECT_NEAR(chi.real(), 0.5, 1e-14);
  EXPECT_NEAR(chi.imag(), 0.0, 1e-14);
}

TEST(Coherence, UnitDisplacement) {
  const auto wi = ground_state(2);
  auto wj = wi;
  wj.position(1) = 1.0;
  EXPECT_NEAR(std::abs(overlap_coherence(wi, wj)), std::exp(-0.25), 1e-14);
  wj.position(1) = 0.0;
  wj.momentum(0) = 1.0;
  EXPECT_NEAR(std::abs(overlap_coherence(wi, wj)), std::exp(-0.25), 1e-14);
}

TEST(Coherence, OverlapIsConjugateSymmetricProperty) {
  Gen g(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto d = 1 + trial % 4;
    const auto wi = random_packet(g, d);
    const auto wj = random_packet(g, d);
    const cplx ij = overlap_coherence(wi, wj);
    const cplx ji = overlap_coherence(wj, wi);
    EXPECT_NEAR(std::abs(ij - std::conj(ji)), 0.0, 1e-13 * std::max(1.0, std::abs(ij)));
    EXPECT_LE(std::abs(ij), std::sqrt(norm(wi) * norm(wj)) * std::abs(wi.amplitude * wj.amplitude) * (1.0 + 1e-12));
  }
}

TEST(Coherence, OverlapMatchesQuadratureProperty) {
  Gen g(4);
  oracle::GridSpec spec;
  spec.axes = {{-12.0, 12.0, 128}, {-12.0, 12.0, 128}};
  for (int trial = 0; trial < 8; ++trial) {
    const auto wi = random_packet(g, 2);
    const auto wj = random_packet(g, 2);
    const cplx exact = overlap_coherence(wi, wj);
    const cplx quad = oracle::quadrature_overlap(wi, wj, spec);
    EXPECT_LT(std::abs(exact - quad), 1e-10 * std::max(1e-3, std::abs(exact))) << "trial " << trial;
  }
}

TEST(Coherence, GlobalPhaseInvarianceProperty) {
  Gen g(6);
  for (int trial = 0; trial < 10; ++trial) {
    auto wi = random_packet(g, 3);
    auto wj = random_packet(g, 3);
    const cplx before = overlap_coherence(wi, wj);
    const cplx phase = g.phase();
    wi.amplitude *= phase;
    wj.amplitude *= phase;
    EXPECT_LT(std::abs(overlap_coherence(wi, wj) - before), 1e-14);
  }
}

TEST(Coherence, OrthogonalRotationInvarianceProperty) {
  Gen g(8);
  auto rotate = [](GaussianWavepacket wp, const Mat& q) {
    wp.position = q * wp.position;
    wp.momentum = q * wp.momentum;
    wp.width = symmetrized(CMat(q.cast<cplx>() * wp.width * q.transpose().cast<cplx>()));
    return wp;
  };
  for (int trial = 0; trial < 10; ++trial) {
    const auto d = 2 + trial % 3;
    const auto wi = random_packet(g, d);
    const auto wj = random_packet(g, d);
    const Mat q = g.orthogonal(d);
    const cplx before = overlap_coherence(wi, wj);
    EXPECT_LT(std::abs(overlap_coherence(rotate(wi, q), rotate(wj, q)) - before), 1e-12);
  }
}

TEST(Coherence, HalfPeriodRecurrenceInDisplacedOscillator) {
  const Vec omega = Vec::Constant(1, units::cm1_to_hartree(1500.0));
  const double half_period_fs = units::au_to_fs(std::numbers::pi / omega(0));
  const long n = 200;
  const double dt = half_period_fs / static_cast<double>(n);
  for (Variant v : {Variant::thawed, Variant::frozen}) {
    const auto ti = run(omega, SurfaceSpec{displaced(omega, 0.0)}, dt, 2 * n, v);
    const auto tj = run(omega, SurfaceSpec{displaced(omega, 1.0)}, dt, 2 * n, v);
    const auto trace = v == Variant::frozen ? analytic_coherence(ti, tj) : overlap_trace(ti, tj);
    EXPECT_NEAR(std::abs(trace.points[static_cast<std::size_t>(n)].chi), std::exp(-1.0), 1e-10);
    EXPECT_NEAR(trace.points[static_cast<std::size_t>(n)].d2_total, 4.0, 1e-10);
    EXPECT_NEAR(std::abs(trace.points.back().chi), 1.0, 1e-10);
  }
}

TEST(Coherence, AnalyticMatchesOverlapForFrozenProperty) {
  Gen g(10);
  for (int trial = 0; trial < 5; ++trial) {
    const Vec omega = g.omega(3);
    const auto ti = run(omega, SurfaceSpec{g.quartic(omega)}, 0.25, 80, Variant::frozen);
    const auto tj = run(omega, SurfaceSpec{g.quartic(omega)}, 0.25, 80, Variant::frozen);
    const auto a = analytic_coherence(ti, tj);
    const auto o = overlap_trace(ti, tj);
    for (std::size_t k = 0; k < a.points.size(); ++k) EXPECT_LT(std::abs(a.points[k].chi - o.points[k].chi), 1e-12);
  }
}

TEST(Coherence, AnalyticRejectsThawedData) {
  Gen g(12);
  const Vec omega = g.omega(2);
  const auto ti = run(omega, SurfaceSpec{g.quartic(omega)}, 0.25, 40);
  const auto tj = run(omega, SurfaceSpec{g.quartic(omega)}, 0.25, 40);
  EXPECT_THROW(analytic_coherence(ti, tj), ConfigError);
}

TEST(Coherence, GroupedSeparationIsAdditiveProperty) {
  Gen g(14);
  for (int trial = 0; trial < 6; ++trial) {
    const auto d = 3 + trial;
    const Vec omega = g.omega(d);
    const auto ti = run(omega, SurfaceSpec{g.quadratic(omega)}, 0.25, 40);
    const auto tj = run(omega, SurfaceSpec{g.quadratic(omega)}, 0.25, 40);
    const auto trace = overlap_trace(ti, tj);
    std::vector<Eigen::Index> subset;
    for (Eigen::Index j = 0; j < d; j += 2) subset.push_back(j);
    for (const auto& groups : {group_subset(d, "even", subset, "odd"), group_position_momentum(d)}) {
      const auto grouped = aggregate(trace, groups);
      for (Eigen::Index k = 0; k < grouped.d2.rows(); ++k) {
        const double total = trace.points[static_cast<std::size_t>(k)].d2_total;
        EXPECT_NEAR(grouped.d2.row(k).sum(), total, 1e-12 * std::max(1.0, total));
      }
    }
    const auto factors = per_mode_factors(ti, tj);
    for (Eigen::Index k = 0; k < factors.position.rows(); ++k) {
      EXPECT_NEAR(factors.product(k), std::exp(-0.25 * trace.points[static_cast<std::size_t>(k)].d2_total), 1e-13);
    }
  }
}

TEST(Coherence, AggregateRejectsUnknownMode) {
  Gen g(16);
  const Vec omega = g.omega(2);
  const auto t = run(omega, SurfaceSpec{g.quadratic(omega)}, 0.25, 4);
  EXPECT_THROW(aggregate(overlap_trace(t, t), group_subset(2, "x", {5})), ConfigError);
}

TEST(Coherence, IdentityObservableGivesTotalPopulation) {
  Gen g(18);
  const Vec omega = g.omega(2);
  auto ti = run(omega, SurfaceSpec{g.quartic(omega)}, 0.25, 60);
  auto tj = run(omega, SurfaceSpec{g.quartic(omega)}, 0.25, 60);
  for (auto& wp : ti.snapshots) wp.amplitude = 0.6;
  for (auto& wp : tj.snapshots) wp.amplitude = {0.0, 0.7};
  ti.id = "A";
  tj.id = "B";
  TrajectoryRecord rec{Variant::thawed, {ti, tj}};
  const std::vector<CoherenceTrace> traces{overlap_trace(ti, tj)};
  const auto identity = expectation_trace(rec, traces, {{"A", "B"}, CMat::Identity(2, 2)});
  for (double v : identity) EXPECT_NEAR(v, 0.36 + 0.49, 1e-14);

  CMat sx = CMat::Zero(2, 2);
  sx(0, 1) = sx(1, 0) = 1.0;
  const auto flip = expectation_trace(rec, traces, {{"A", "B"}, sx});
  for (std::size_t k = 0; k < flip.size(); ++k) EXPECT_NEAR(flip[k], 2.0 * traces[0].points[k].chi.real(), 1e-14);
  // same answer when the trace is stored in the opposite orientation
  const auto flipped = expectation_trace(rec, {overlap_trace(tj, ti)}, {{"A", "B"}, sx});
  for (std::size_t k = 0; k < flip.size(); ++k) EXPECT_NEAR(flipped[k], flip[k], 1e-14);

  sx(0, 1) = 2.0;
  EXPECT_THROW(expectation_trace(rec, traces, {{"A", "B"}, sx}), ConfigError);
}

TEST(Coherence, CsvHeader) {
  const auto h = coherence_csv_header(2);
  ASSERT_EQ(h.size(), 11u);
  EXPECT_EQ(h[3], "abs_coh");
  EXPECT_EQ(h[10], "d2_mom_2");
}
