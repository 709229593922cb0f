// Bounces a chord around the ellipsoid x²/4 + y²/2 + z² = 1 and prints the
// tangency spectrum with respect to the confocal pencil, which stays fixed.

#include <cstdio>

#include "caustix/caustic.hpp"
#include "caustix/flow.hpp"

int main() {
  using namespace caustix;
  Mat a = Mat::Zero(3, 3);
  a.diagonal() << 0.25, 0.5, 1.0;
  const BilliardTable table(ImplicitSurface::quadric(CentralQuadric(a)), TransverseField::euclidean(), Vec::Zero(3));

  Vec p0(3), v0(3);
  p0 << 0.1, -0.2, 0.05;
  v0 << 1.0, 0.3, 0.2;
  const Trajectory traj = orbit(table, p0, v0, 50);
  const PseudoConfocalPencil pencil({4.0, 2.0, 1.0}, 3);

  const auto lines = segments(traj);
  for (std::size_t k = 0; k < lines.size(); k += 10) {
    std::printf("segment %3zu:", k);
    for (const auto& r : tangency_spectrum(pencil, lines[k])) std::printf(" %.12f", r.lambda);
    std::printf("\n");
  }
  const ConservationReport report = conservation_report(traj, pencil);
  std::printf("conserved: %s over %zu segments\n", report.pass ? "yes" : "no", report.segments);
  return report.pass ? 0 : 1;
}
