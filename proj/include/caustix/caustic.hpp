#pragma once

// Caustic checks along trajectories: conservation of the pencil tangency
// spectrum segment by segment, and tangency to one fixed quadric.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <tuple>
#include <vector>

#include "caustix/errors.hpp"
#include "caustix/flow.hpp"
#include "caustix/geom_core.hpp"

namespace caustix {

struct SpectralSlot {
  double lambda0 = 0.0;
  double max_dev = 0.0;  ///< max |λ(k) − λ(0)| over paired roots
  bool at_pole = false;
};

struct ConservationReport {
  std::vector<SpectralSlot> slots;
  bool pass = true;
  std::size_t segments = 0;
  /// Segments whose spectrum size differs from the first segment's.
  std::size_t mismatches = 0;
  double tolerance = 0.0;
};

/// Pairs `roots` to the reference slots by nearest value, smallest gaps
/// first; ties resolve in index order. Returns, per slot, the matched index
/// into `roots` or −1.
inline std::vector<int> pair_spectra(const TangencySpectrum& reference, const TangencySpectrum& roots) {
  std::vector<std::tuple<double, std::size_t, std::size_t>> gaps;
  for (std::size_t i = 0; i < reference.size(); ++i)
    for (std::size_t j = 0; j < roots.size(); ++j)
      gaps.emplace_back(std::abs(reference[i].lambda - roots[j].lambda), i, j);
  std::stable_sort(gaps.begin(), gaps.end(),
                   [](const auto& a, const auto& b) { return std::get<0>(a) < std::get<0>(b); });
  std::vector<int> match(reference.size(), -1);
  std::vector<bool> used(roots.size(), false);
  for (const auto& [gap, i, j] : gaps) {
    if (match[i] >= 0 || used[j]) continue;
    match[i] = static_cast<int>(j);
    used[j] = true;
  }
  return match;
}

/// Each slot passes when max_dev ≤ tol · max(1, |λ0|). Pole-flagged pairs are
/// paired but do not count toward pass/fail.
inline ConservationReport conservation_report(std::span<const OrientedLine> lines,
                                              const PseudoConfocalPencil& pencil, double tol = 1e-8) {
  if (lines.size() < 2) throw InputError("conservation_report needs at least two segments");
  ConservationReport report;
  report.segments = lines.size();
  report.tolerance = tol;

  const TangencySpectrum reference = tangency_spectrum(pencil, lines[0]);
  report.slots.resize(reference.size());
  std::vector<double> graded(reference.size(), 0.0);
  for (std::size_t i = 0; i < reference.size(); ++i) {
    report.slots[i].lambda0 = reference[i].lambda;
    report.slots[i].at_pole = reference[i].at_pole;
  }
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const TangencySpectrum roots = tangency_spectrum(pencil, lines[k]);
    if (roots.size() != reference.size()) ++report.mismatches;
    const std::vector<int> match = pair_spectra(reference, roots);
    for (std::size_t i = 0; i < reference.size(); ++i) {
      if (match[i] < 0) continue;
      const SpectralRoot& r = roots[static_cast<std::size_t>(match[i])];
      const double dev = std::abs(r.lambda - reference[i].lambda);
      report.slots[i].max_dev = std::max(report.slots[i].max_dev, dev);
      if (!reference[i].at_pole && !r.at_pole) graded[i] = std::max(graded[i], dev);
    }
  }
  report.pass = report.mismatches == 0;
  for (std::size_t i = 0; i < reference.size(); ++i)
    if (graded[i] > tol * std::max(1.0, std::abs(reference[i].lambda))) report.pass = false;
  return report;
}

inline ConservationReport conservation_report(const Trajectory& traj, const PseudoConfocalPencil& pencil,
                                              double tol = 1e-8) {
  if (traj.events.size() < 2) throw InputError("conservation_report needs a trajectory with at least two events");
  const std::vector<OrientedLine> lines = segments(traj);
  return conservation_report(std::span<const OrientedLine>(lines), pencil, tol);
}

struct TangencyReport {
  std::vector<double> residuals;  ///< |tangency_discriminant| per segment
  double max_residual = 0.0;
  bool pass = true;
};

/// The first segment must already be tangent to Γ (within `precondition_tol`).
inline TangencyReport caustic_tangency_check(std::span<const OrientedLine> lines, const CentralQuadric& gamma,
                                             double tol = 1e-8, double precondition_tol = 1e-8) {
  if (lines.empty()) throw InputError("caustic_tangency_check needs at least one segment");
  TangencyReport report;
  for (const auto& l : lines) report.residuals.push_back(std::abs(tangency_discriminant(gamma, l)));
  if (report.residuals.front() > precondition_tol)
    throw InputError("first segment is not tangent to the candidate caustic (residual " +
                     std::to_string(report.residuals.front()) + ")");
  report.max_residual = *std::max_element(report.residuals.begin(), report.residuals.end());
  report.pass = report.max_residual <= tol;
  return report;
}

inline TangencyReport caustic_tangency_check(const Trajectory& traj, const CentralQuadric& gamma, double tol = 1e-8,
                                             double precondition_tol = 1e-8) {
  const std::vector<OrientedLine> lines = segments(traj);
  return caustic_tangency_check(std::span<const OrientedLine>(lines), gamma, tol, precondition_tol);
}

}  // namespace caustix
