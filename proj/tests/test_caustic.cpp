#include <gtest/gtest.h>

#include <cmath>

#include "caustix/caustic.hpp"
#include "caustix/flow.hpp"
#include "support/oracles.hpp"

using namespace caustix;

namespace {

Vec v3(double x, double y, double z) {
  Vec v(3);
  v << x, y, z;
  return v;
}

Mat diag(const Vec& d) { return d.asDiagonal().toDenseMatrix(); }

BilliardTable table_for(const Mat& a, TransverseField f = TransverseField::euclidean()) {
  return BilliardTable(ImplicitSurface::quadric(CentralQuadric(a)), std::move(f), Vec::Zero(a.rows()));
}

double max_free_dev(const ConservationReport& r) {
  double m = 0.0;
  for (const auto& s : r.slots)
    if (!s.at_pole) m = std::max(m, s.max_dev);
  return m;
}

}  // namespace

TEST(Conservation, EllipsoidLongOrbit) {
  const auto table = table_for(diag(v3(0.25, 0.5, 1.0)));
  const PseudoConfocalPencil pencil({4, 2, 1}, 3);
  oracle::Gen g(81);
  for (int i = 0; i < 3; ++i) {
    const Trajectory tr = orbit(table, g.box(3, -0.4, 0.4), g.unit(3), 200);
    ASSERT_EQ(tr.status, OrbitStatus::Completed);
    const ConservationReport r = conservation_report(tr, pencil);
    EXPECT_TRUE(r.pass);
    EXPECT_EQ(r.segments, 201u);
    EXPECT_EQ(r.mismatches, 0u);
    for (const auto& s : r.slots)
      if (!s.at_pole) EXPECT_LE(s.max_dev, 1e-8 * std::max(1.0, std::abs(s.lambda0)));
  }
}

TEST(Conservation, ShortRunAgreesWithLongRunPrefix) {
  const auto table = table_for(diag(v3(0.25, 0.5, 1.0)));
  const PseudoConfocalPencil pencil({4, 2, 1}, 3);
  const Vec p0 = v3(0.1, -0.2, 0.05), v0 = v3(1, 0.3, 0.2);
  const ConservationReport longer = conservation_report(orbit(table, p0, v0, 200), pencil);
  const ConservationReport shorter = conservation_report(orbit(table, p0, v0, 5), pencil);
  ASSERT_EQ(longer.slots.size(), shorter.slots.size());
  for (std::size_t i = 0; i < longer.slots.size(); ++i) {
    EXPECT_EQ(longer.slots[i].lambda0, shorter.slots[i].lambda0);
    EXPECT_LE(shorter.slots[i].max_dev, longer.slots[i].max_dev + 1e-15);
  }
}

TEST(Conservation, DiameterOrbitIsExact) {
  const auto table = table_for(Mat::Identity(3, 3));
  const Trajectory tr = orbit(table, Vec::Zero(3), v3(1, 0, 0), 10);
  const ConservationReport r = conservation_report(tr, PseudoConfocalPencil({4, 2, 1}, 3));
  EXPECT_TRUE(r.pass);
  for (const auto& s : r.slots) EXPECT_EQ(s.max_dev, 0.0);
}

TEST(Conservation, PseudoConfocalMember) {
  const PseudoConfocalPencil pencil({4, 2, 1}, 2);
  const auto table = table_for(pencil_member(pencil, 0.0).matrix(), TransverseField::q_normal(pencil.form()));
  oracle::Gen g(83);
  int completed = 0;
  for (int attempt = 0; attempt < 200 && completed < 3; ++attempt) {
    const Trajectory tr = orbit(table, g.box(3, -0.3, 0.3), g.unit(3), 100);
    if (tr.status != OrbitStatus::Completed) {
      EXPECT_EQ(tr.status, OrbitStatus::LightLikeNormal);
      continue;
    }
    ++completed;
    const ConservationReport r = conservation_report(tr, pencil, 1e-6);
    EXPECT_TRUE(r.pass) << "max dev " << max_free_dev(r);
  }
  EXPECT_EQ(completed, 3);
}

TEST(Conservation, BumpBreaksConservation) {
  const BilliardTable bumped(ImplicitSurface::implicit(parse_expression(
                                 "x1^2/4 + x2^2/2 + x3^2 - 1 + 0.05*exp(-((x1-1)^2 + x2^2 + x3^2))", 3)),
                             TransverseField::euclidean(), Vec::Zero(3));
  const PseudoConfocalPencil pencil({4, 2, 1}, 3);
  oracle::Gen g(85);
  int broken = 0;
  for (int i = 0; i < 5; ++i) {
    const Trajectory tr = orbit(bumped, g.box(3, -0.3, 0.3), g.unit(3), 20);
    const ConservationReport r = conservation_report(tr, pencil);
    if (max_free_dev(r) >= 1e-3) ++broken;
  }
  EXPECT_GE(broken, 4);
}

TEST(Conservation, InvariantUnderSignedAxisPermutation) {
  const Vec a = v3(4, 2, 1);
  const PseudoConfocalPencil pencil({4, 2, 1}, 3);
  const auto table = table_for(diag(a.cwiseInverse()));
  // x ↦ P x with P a signed permutation.
  Mat p = Mat::Zero(3, 3);
  p(0, 2) = 1;
  p(1, 0) = -1;
  p(2, 1) = 1;
  const Vec a2 = (p.cwiseAbs() * a);
  const PseudoConfocalPencil pencil2({a2[0], a2[1], a2[2]}, 3);
  const auto table2 = table_for(diag(a2.cwiseInverse()));
  oracle::Gen g(87);
  for (int i = 0; i < 5; ++i) {
    const Vec p0 = g.box(3, -0.3, 0.3), v0 = g.unit(3);
    const ConservationReport r1 = conservation_report(orbit(table, p0, v0, 50), pencil);
    const ConservationReport r2 = conservation_report(orbit(table2, p * p0, p * v0, 50), pencil2);
    ASSERT_EQ(r1.slots.size(), r2.slots.size());
    for (std::size_t k = 0; k < r1.slots.size(); ++k) {
      EXPECT_NEAR(r1.slots[k].lambda0, r2.slots[k].lambda0, 1e-9);
      EXPECT_NEAR(r1.slots[k].max_dev, r2.slots[k].max_dev, 1e-9);
    }
  }
}

TEST(Conservation, NeedsTwoSegments) {
  const std::vector<OrientedLine> one{OrientedLine(Vec::Zero(3), v3(1, 0, 0))};
  EXPECT_THROW(conservation_report(std::span<const OrientedLine>(one), PseudoConfocalPencil({4, 2, 1}, 3)),
               InputError);
}

TEST(Conservation, MismatchIsReportedNotThrown) {
  // In a pseudo-confocal pencil some lines have no real tangency parameter.
  const PseudoConfocalPencil pencil({4, 2, 1}, 2);
  const std::vector<OrientedLine> lines{OrientedLine(v3(0.1, 0.2, 0.3), v3(1, 2, 3)),
                                        OrientedLine(v3(0.56, -0.73, 0.95), v3(-0.696, 0.424, 0.58))};
  ASSERT_EQ(tangency_spectrum(pencil, lines[0]).size(), 2u);
  ASSERT_TRUE(tangency_spectrum(pencil, lines[1]).empty());
  const ConservationReport r = conservation_report(std::span<const OrientedLine>(lines), pencil);
  EXPECT_EQ(r.mismatches, 1u);
  EXPECT_FALSE(r.pass);
}

TEST(PairSpectra, NearestValueWithStableTies) {
  const TangencySpectrum ref{{1.0, false, 0}, {2.0, false, 0}};
  const TangencySpectrum now{{1.5, false, 0}, {2.1, false, 0}};
  const auto m = pair_spectra(ref, now);
  EXPECT_EQ(m[1], 1);
  EXPECT_EQ(m[0], 0);
  const TangencySpectrum tie{{1.5, false, 0}};
  const auto t = pair_spectra(ref, tie);
  EXPECT_EQ(t[0], 0);
  EXPECT_EQ(t[1], -1);
}

TEST(TangencyCheck, ConfocalMemberStaysTangent) {
  const auto table = table_for(diag(v3(0.25, 0.5, 1.0)));
  const PseudoConfocalPencil pencil({4, 2, 1}, 3);
  const Trajectory tr = orbit(table, v3(0.1, -0.2, 0.05), v3(1, 0.3, 0.2), 100);
  const auto spectrum = tangency_spectrum(pencil, segments(tr).front());
  for (const auto& root : spectrum) {
    if (root.at_pole) continue;
    const TangencyReport rep = caustic_tangency_check(tr, pencil_member(pencil, root.lambda));
    EXPECT_TRUE(rep.pass) << "lambda " << root.lambda << " residual " << rep.max_residual;
    EXPECT_LE(rep.max_residual, 1e-8);
  }
}

TEST(TangencyCheck, ShrunkEllipsoidIsNotACaustic) {
  const Mat a = diag(v3(0.25, 0.5, 1.0));
  const Mat gamma_m = a / 0.81;  // semi-axes scaled by 0.9
  const CentralQuadric gamma(gamma_m);
  oracle::Gen g(89);
  for (int i = 0; i < 5; ++i) {
    Vec dir = g.unit(3);
    const Vec on_gamma = dir / std::sqrt(dir.dot(gamma_m * dir));
    const Vec normal = gamma_m * on_gamma;
    Vec t = g.unit(3);
    t -= t.dot(normal) / normal.squaredNorm() * normal;
    const Trajectory tr = orbit(table_for(a), on_gamma, t, 5);
    const TangencyReport rep = caustic_tangency_check(tr, gamma);
    EXPECT_FALSE(rep.pass);
    EXPECT_GE(rep.max_residual, 1e-3);
  }
}

TEST(TangencyCheck, PreconditionAndSingleSegment) {
  const CentralQuadric sphere(Mat::Identity(3, 3));
  const std::vector<OrientedLine> secant{OrientedLine(Vec::Zero(3), v3(1, 0, 0))};
  EXPECT_THROW(caustic_tangency_check(std::span<const OrientedLine>(secant), sphere), InputError);
  const std::vector<OrientedLine> tangent{OrientedLine(v3(1, 0, 0), v3(0, 1, 0))};
  EXPECT_TRUE(caustic_tangency_check(std::span<const OrientedLine>(tangent), sphere).pass);
}
