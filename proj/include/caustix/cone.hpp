#pragma once

// Partial-cone analysis at a surface point (d = 3). In the adapted frame the
// lines through q tangent to a caustic meet the plane z = 1 along curves
// solving
//   (d − a + k₂Y² − k₁X²) X′Y′ + (b + k₁XY) X′² − (c + k₂XY) Y′² = 0,
// i.e. η = (Y′, −X′) is an eigenvector of M(f) below.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "caustix/errors.hpp"
#include "caustix/hypersurface.hpp"
#include "caustix/reflect.hpp"
#include "caustix/symmetry.hpp"

namespace caustix {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// x ↦ R(x − origin), with the rows of R = (u₁, u₂, n).
struct RigidMotion {
  Eigen::Matrix3d rotation;
  Eigen::Vector3d origin;
  double k1 = 0.0;
  double k2 = 0.0;

  Eigen::Vector3d apply(const Vec& x) const { return rotation * (Eigen::Vector3d(x) - origin); }
  Eigen::Vector3d apply_vector(const Vec& v) const { return rotation * Eigen::Vector3d(v); }
  Eigen::Vector3d u1() const { return rotation.row(0).transpose(); }
  Eigen::Vector3d u2() const { return rotation.row(1).transpose(); }
  Eigen::Vector3d normal() const { return rotation.row(2).transpose(); }
};

inline RigidMotion adapted_frame(const ImplicitSurface& s, const Vec& q) {
  if (s.dimension() != 3) throw InputError("cone analysis needs dimension 3");
  const CurvatureData cd = curvature_data(s, q);
  if (cd.degenerate)
    throw DegenerateSecondFundamentalForm("principal curvatures (" + std::to_string(cd.k[0]) + ", " +
                                          std::to_string(cd.k[1]) + ")");
  RigidMotion m;
  m.rotation.row(0) = cd.basis.col(0).transpose();
  m.rotation.row(1) = cd.basis.col(1).transpose();
  m.rotation.row(2) = cd.n.transpose();
  if (m.rotation.determinant() < 0.0) m.rotation.row(1) *= -1.0;
  m.origin = cd.point;
  m.k1 = cd.k[0];
  m.k2 = cd.k[1];
  return m;
}

struct ConeCoefficients {
  double nu1 = 0.0, nu2 = 0.0;
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
  double k1 = 1.0, k2 = 1.0;
  /// Largest third component of dν(u_i) + k_iν_iν, and of ν − (ν₁, ν₂, 1).
  double residual = 0.0;

  /// |k₂b − k₁c|, zero exactly in the L-symmetric case.
  double symmetry() const { return std::abs(k2 * b - k1 * c); }
};

inline ConeCoefficients cone_coefficients(const ImplicitSurface& s, const TransverseField& field, const Vec& q,
                                          double residual_tol = 1e-5) {
  const RigidMotion frame = adapted_frame(s, q);
  Mat basis(3, 2);
  basis.col(0) = frame.u1();
  basis.col(1) = frame.u2();
  const SymmetryDetails det = symmetry_details(s, field, frame.origin, basis);
  const Vec n = detail::oriented_normal(s, det.point, SurfaceOptions{});
  const Eigen::Vector3d nu = frame.apply_vector(field.nu(det.point, n));

  ConeCoefficients cc;
  cc.nu1 = nu[0];
  cc.nu2 = nu[1];
  cc.k1 = frame.k1;
  cc.k2 = frame.k2;
  const Eigen::Vector3d w1 = frame.apply_vector(det.dnu.col(0)) + cc.k1 * cc.nu1 * nu;
  const Eigen::Vector3d w2 = frame.apply_vector(det.dnu.col(1)) + cc.k2 * cc.nu2 * nu;
  cc.a = w1[0];
  cc.b = w1[1];
  cc.c = w2[0];
  cc.d = w2[1];
  cc.residual = std::max({std::abs(w1[2]), std::abs(w2[2]), std::abs(nu[2] - 1.0)});
  if (cc.residual > residual_tol)
    throw NumericalFailure("cone coefficients inconsistent (residual " + std::to_string(cc.residual) + ")");
  return cc;
}

inline Mat2 mf_matrix(const ConeCoefficients& cc, double x, double y) {
  Mat2 m;
  m << cc.a + cc.k1 * x * x, cc.b + cc.k1 * x * y, cc.c + cc.k2 * x * y, cc.d + cc.k2 * y * y;
  return m;
}

inline double discriminant_delta(const ConeCoefficients& cc, double x, double y) {
  const double e = cc.d - cc.a + cc.k2 * y * y - cc.k1 * x * x;
  return e * e + 4.0 * (cc.b + cc.k1 * x * y) * (cc.c + cc.k2 * x * y);
}

/// Coefficients of A s² + B s + C = 0 for the slope s = Y′/X′.
struct SlopeQuadratic {
  double A = 0.0, B = 0.0, C = 0.0;
  double discriminant() const { return B * B - 4.0 * A * C; }
};

inline SlopeQuadratic slope_quadratic(const ConeCoefficients& cc, double x, double y) {
  return {cc.c + cc.k2 * x * y, -(cc.d - cc.a + cc.k2 * y * y - cc.k1 * x * x), -(cc.b + cc.k1 * x * y)};
}

/// Left side of the cone equation at point p with direction t.
inline double cone_ode_residual(const ConeCoefficients& cc, const Vec2& p, const Vec2& t) {
  const double x = p[0], y = p[1];
  return (cc.d - cc.a + cc.k2 * y * y - cc.k1 * x * x) * t[0] * t[1] + (cc.b + cc.k1 * x * y) * t[0] * t[0] -
         (cc.c + cc.k2 * x * y) * t[1] * t[1];
}

namespace detail {

struct EigenPair {
  double value;
  Vec2 vector;  // unit
};

/// Real eigenpairs of a 2×2 matrix, larger eigenvalue first. Each vector is
/// taken from the row of M − λI that avoids cancellation.
inline std::vector<EigenPair> eigen_2x2(const Mat2& m) {
  const double h = 0.5 * (m(1, 1) - m(0, 0));
  const double disc = 4.0 * h * h + 4.0 * m(0, 1) * m(1, 0);
  if (disc < 0.0) return {};
  const double s = 0.5 * std::sqrt(disc);
  const double mid = 0.5 * (m(0, 0) + m(1, 1));
  std::vector<EigenPair> out;
  // λ₊ − m00 = h + s, m11 − λ₊ = h − s; λ₋ − m00 = h − s, m11 − λ₋ = h + s.
  const Vec2 v_plus = h >= 0.0 ? Vec2(m(0, 1), h + s) : Vec2(h - s, -m(1, 0));
  const Vec2 v_minus = h <= 0.0 ? Vec2(m(0, 1), h - s) : Vec2(h + s, -m(1, 0));
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (v_plus.norm() > 1e-300 * scale) out.push_back({mid + s, v_plus.normalized()});
  if (s > 0.0 && v_minus.norm() > 1e-300 * scale) out.push_back({mid - s, v_minus.normalized()});
  return out;
}

}  // namespace detail

struct AdmissibleDirection {
  Vec2 eta;      ///< unit normal of the admissible line in T_qS
  double alpha;  ///< its eigenvalue
};

/// Real eigenpairs (η, α) of M(f) at ξ with ⟨η|ξ⟩ ≠ 0.
inline std::vector<AdmissibleDirection> admissible_directions(const ConeCoefficients& cc, const Vec2& xi,
                                                              double orth_tol = 1e-9) {
  if (!xi.allFinite()) throw InputError("direction is not finite");
  std::vector<AdmissibleDirection> out;
  for (const auto& ep : detail::eigen_2x2(mf_matrix(cc, xi[0], xi[1])))
    if (std::abs(ep.vector.dot(xi)) > orth_tol * xi.norm()) out.push_back({ep.vector, ep.value});
  return out;
}

struct ConeCurveOptions {
  /// Integration stops once Δ falls to this value (the curve reached V).
  double delta_floor = 1e-9;
  /// Integration stops once the curve leaves this disc.
  double max_radius = 1e6;
  /// Orientation of the first step, ±1.
  int initial_sign = 1;
};

struct ConeCurve {
  std::vector<Vec2> points;
  std::vector<Vec2> tangents;  ///< unit (X′, Y′) at each point
  bool reached_v = false;
  bool left_region = false;
};

namespace detail {

struct StopIntegration {};

/// Unit tangent of the chosen branch at p, signed to agree with `ref`.
inline Vec2 branch_tangent(const ConeCoefficients& cc, const Vec2& p, int branch, const Vec2& ref,
                           double delta_floor) {
  if (!p.allFinite() || discriminant_delta(cc, p[0], p[1]) <= delta_floor) throw StopIntegration{};
  const auto pairs = eigen_2x2(mf_matrix(cc, p[0], p[1]));
  if (pairs.size() < 2) throw StopIntegration{};
  const Vec2& eta = pairs[static_cast<std::size_t>(branch - 1)].vector;
  Vec2 t(-eta[1], eta[0]);
  if (t.dot(ref) < 0.0) t = -t;
  return t;
}

}  // namespace detail

/// Classical RK4 along the unit eigen-direction field of one branch (1 = the
/// larger eigenvalue of M(f)). The sign of each stage follows the previous
/// step, so the branch is never switched.
inline ConeCurve integrate_cone_curve(const ConeCoefficients& cc, const Vec2& start, int branch, int steps,
                                      double h, const ConeCurveOptions& opt = {}) {
  if (branch != 1 && branch != 2) throw InputError("branch must be 1 or 2");
  if (steps < 0 || !(h > 0.0)) throw InputError("need steps >= 0 and h > 0");
  if (!start.allFinite() || discriminant_delta(cc, start[0], start[1]) <= opt.delta_floor)
    throw DegenerateField("start point lies on the degenerate set (discriminant <= " +
                          std::to_string(opt.delta_floor) + ")");
  ConeCurve curve;
  const auto pairs = detail::eigen_2x2(mf_matrix(cc, start[0], start[1]));
  if (pairs.size() < 2) throw DegenerateField("eigen-directions are not distinct at the start point");
  const Vec2& eta0 = pairs[static_cast<std::size_t>(branch - 1)].vector;
  Vec2 t = (opt.initial_sign >= 0 ? 1.0 : -1.0) * Vec2(-eta0[1], eta0[0]);
  Vec2 p = start;
  curve.points.push_back(p);
  curve.tangents.push_back(t);
  for (int i = 0; i < steps; ++i) {
    try {
      const Vec2 k1 = detail::branch_tangent(cc, p, branch, t, opt.delta_floor);
      const Vec2 k2 = detail::branch_tangent(cc, p + 0.5 * h * k1, branch, k1, opt.delta_floor);
      const Vec2 k3 = detail::branch_tangent(cc, p + 0.5 * h * k2, branch, k2, opt.delta_floor);
      const Vec2 k4 = detail::branch_tangent(cc, p + h * k3, branch, k3, opt.delta_floor);
      const Vec2 next = p + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      const Vec2 t_next = detail::branch_tangent(cc, next, branch, k4, opt.delta_floor);
      p = next;
      t = t_next;
    } catch (const detail::StopIntegration&) {
      curve.reached_v = true;
      break;
    }
    curve.points.push_back(p);
    curve.tangents.push_back(t);
    if (p.norm() > opt.max_radius) {
      curve.left_region = true;
      break;
    }
  }
  return curve;
}

struct ConicFit {
  std::array<double, 6> coeffs{};  ///< A..F on normalized points, unit norm
  double residual = 0.0;           ///< RMS algebraic residual on normalized points
  Vec2 center = Vec2::Zero();
  double scale = 1.0;  ///< normalized point = scale · (p − center)
};

/// Algebraic least-squares conic Ax² + Bxy + Cy² + Dx + Ey + F = 0 from the
/// smallest right singular vector of the design matrix.
inline ConicFit conic_fit(const std::vector<Vec2>& pts, double rank_tol = 1e-9) {
  if (pts.size() < 8) throw InputError("conic_fit needs at least 8 points");
  const auto n = static_cast<Eigen::Index>(pts.size());
  ConicFit fit;
  for (const auto& p : pts) {
    if (!p.allFinite()) throw InputError("conic_fit point is not finite");
    fit.center += p;
  }
  fit.center /= static_cast<double>(n);
  double spread = 0.0;
  for (const auto& p : pts) spread += (p - fit.center).squaredNorm();
  spread = std::sqrt(spread / static_cast<double>(n));
  if (!(spread > 0.0)) throw NumericalFailure("conic_fit points coincide");
  fit.scale = std::sqrt(2.0) / spread;

  Mat design(n, 6);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec2 p = fit.scale * (pts[static_cast<std::size_t>(i)] - fit.center);
    design.row(i) << p[0] * p[0], p[0] * p[1], p[1] * p[1], p[0], p[1], 1.0;
  }
  Eigen::BDCSVD<Mat> svd(design, Eigen::ComputeThinV);
  const Vec& sv = svd.singularValues();
  if (sv[4] <= rank_tol * sv[0]) throw NumericalFailure("conic_fit design matrix is rank-deficient");
  const Vec v = svd.matrixV().col(5);
  for (int j = 0; j < 6; ++j) fit.coeffs[static_cast<std::size_t>(j)] = v[j];
  fit.residual = (design * v).norm() / std::sqrt(static_cast<double>(n));
  return fit;
}

/// RMS distance to the best straight line, relative to the point spread.
inline double line_fit_residual(const std::vector<Vec2>& pts) {
  if (pts.size() < 2) return 0.0;
  Vec2 center = Vec2::Zero();
  for (const auto& p : pts) center += p;
  center /= static_cast<double>(pts.size());
  Mat2 cov = Mat2::Zero();
  for (const auto& p : pts) cov += (p - center) * (p - center).transpose();
  Eigen::SelfAdjointEigenSolver<Mat2> eig(cov);
  const double lo = std::max(0.0, eig.eigenvalues()[0]);
  const double hi = eig.eigenvalues()[1];
  return hi > 0.0 ? std::sqrt(lo / hi) : 0.0;
}

enum class ConicKind { Ellipse, Hyperbola };

struct OracleResult {
  ConicKind kind = ConicKind::Ellipse;
  std::optional<std::array<double, 3>> K;  ///< ellipse only
  double max_abs_E = 0.0;
};

/// Substitutes x = r₁cos t, y = r₂cos(t + φ) (ellipse) or the cosh analogue
/// (hyperbola) into
///   E = (e + y² − x²)x′y′ + (b + xy)x′² − (c + xy)y′²
/// and returns max|E| over 256 grid points. For ellipses also returns the
/// coefficients of E = −K₁cos²t + K₂sin²t + K₃ sin t cos t.
inline OracleResult conic_solution_oracle(double b, double c, double e, double r1, double r2, double phi,
                                          ConicKind kind) {
  for (double v : {b, c, e, r1, r2, phi})
    if (!std::isfinite(v)) throw InputError("oracle parameters must be finite");
  if (r1 == 0.0 || r2 == 0.0) throw InputError("r1 and r2 must be non-zero");
  if (kind == ConicKind::Ellipse && std::abs(std::sin(phi)) <= 1e-12)
    throw InputError("ellipse phase must not be a multiple of pi");
  if (kind == ConicKind::Hyperbola && phi == 0.0) throw InputError("hyperbola phase must be non-zero");

  OracleResult out;
  out.kind = kind;
  constexpr int kGrid = 256;
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  for (int i = 0; i < kGrid; ++i) {
    double x, y, xp, yp;
    if (kind == ConicKind::Ellipse) {
      const double t = kTwoPi * i / kGrid;
      x = r1 * std::cos(t);
      y = r2 * std::cos(t + phi);
      xp = -r1 * std::sin(t);
      yp = -r2 * std::sin(t + phi);
    } else {
      const double t = -1.0 + 2.0 * i / (kGrid - 1);
      x = r1 * std::cosh(t);
      y = r2 * std::cosh(t + phi);
      xp = r1 * std::sinh(t);
      yp = r2 * std::sinh(t + phi);
    }
    const double E = (e + y * y - x * x) * xp * yp + (b + x * y) * xp * xp - (c + x * y) * yp * yp;
    out.max_abs_E = std::max(out.max_abs_E, std::abs(E));
  }
  if (kind == ConicKind::Ellipse) {
    const double s = std::sin(phi), co = std::cos(phi);
    const double r23 = r2 * r2 * r2;
    const double K1 = r1 * r23 * s * s * co + c * r2 * r2 * s * s;
    const double K2 = b * r1 * r1 + e * r1 * r2 * co - c * r2 * r2 * co * co + r1 * r23 * s * s * co;
    const double K3 = e * r1 * r2 * s - r1 * r1 * r1 * r2 * s - 2.0 * c * r2 * r2 * s * co -
                      r1 * r23 * s * (co * co - s * s);
    out.K = std::array<double, 3>{K1, K2, K3};
  }
  return out;
}

/// Coefficients after (X, Y) → (√k₁X, √k₂Y): e = d − a, b₁ = b√(k₂/k₁),
/// c₁ = c√(k₁/k₂).
struct NormalForm {
  double e = 0.0, b1 = 0.0, c1 = 0.0;
  double sqrt_k1 = 1.0, sqrt_k2 = 1.0;

  Vec2 map(const Vec2& p) const { return {sqrt_k1 * p[0], sqrt_k2 * p[1]}; }
  Vec2 map_tangent(const Vec2& t) const { return {sqrt_k1 * t[0], sqrt_k2 * t[1]}; }
};

inline NormalForm scale_to_normal_form(const ConeCoefficients& cc) {
  if (!(cc.k1 > 0.0 && cc.k2 > 0.0)) throw InputError("normal form needs k1, k2 > 0");
  NormalForm nf;
  nf.e = cc.d - cc.a;
  nf.b1 = cc.b * std::sqrt(cc.k2 / cc.k1);
  nf.c1 = cc.c * std::sqrt(cc.k1 / cc.k2);
  nf.sqrt_k1 = std::sqrt(cc.k1);
  nf.sqrt_k2 = std::sqrt(cc.k2);
  return nf;
}

/// (e + y² − x²)x′y′ + (b₁ + xy)x′² − (c₁ + xy)y′² at p with direction t.
inline double normal_form_residual(const NormalForm& nf, const Vec2& p, const Vec2& t) {
  const double x = p[0], y = p[1];
  return (nf.e + y * y - x * x) * t[0] * t[1] + (nf.b1 + x * y) * t[0] * t[0] - (nf.c1 + x * y) * t[1] * t[1];
}

enum class ConeVerdict { QuadraticCone, NonConic, Inconclusive };

inline const char* to_string(ConeVerdict v) {
  switch (v) {
    case ConeVerdict::QuadraticCone: return "quadratic-cone";
    case ConeVerdict::NonConic: return "non-conic";
    case ConeVerdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

struct ClassifyOptions {
  int starts = 5;  ///< per ring
  double start_radius = 1.0;
  int rings = 3;  ///< ring j has radius start_radius · 2^j
  double h = 2e-3;
  /// Steps per direction; the curve is integrated both ways from each start.
  int steps = 4000;
  /// Stepping loses accuracy as Δ → 0, so stop well before V.
  double delta_floor = 1e-3;
  double max_radius = 10.0;
  int min_points = 40;
  double accept = 1e-6;  ///< residual at or below: conic
  double reject = 1e-3;  ///< residual at or above: not a conic
};

struct BranchFit {
  int branch = 1;
  Vec2 start = Vec2::Zero();
  std::size_t points = 0;
  double residual = 0.0;
  bool collinear = false;
};

struct ConeClassification {
  std::vector<BranchFit> branches;
  ConeVerdict verdict = ConeVerdict::Inconclusive;
  double worst_residual = 0.0;
};

/// One integral curve through `start`: both orientations joined end to end.
inline std::vector<Vec2> trace_through(const ConeCoefficients& cc, const Vec2& start, int branch,
                                       const ClassifyOptions& opt) {
  ConeCurveOptions copt;
  copt.delta_floor = opt.delta_floor;
  copt.max_radius = opt.max_radius;
  copt.initial_sign = -1;
  const ConeCurve back = integrate_cone_curve(cc, start, branch, opt.steps, opt.h, copt);
  copt.initial_sign = 1;
  const ConeCurve fwd = integrate_cone_curve(cc, start, branch, opt.steps, opt.h, copt);
  std::vector<Vec2> pts(back.points.rbegin(), back.points.rend());
  pts.insert(pts.end(), fwd.points.begin() + 1, fwd.points.end());
  return pts;
}

/// Integrates both branches from starts on rings around the origin and fits
/// conics. Starts on or near V are skipped.
inline ConeClassification classify_cone(const ConeCoefficients& cc, const ClassifyOptions& opt = {}) {
  ConeClassification out;
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  for (int k = 0; k < opt.starts * opt.rings; ++k) {
    const int i = k % opt.starts;
    const double radius = opt.start_radius * std::ldexp(1.0, k / opt.starts);
    // Offset angle keeps starts off the coordinate axes.
    const double ang = kTwoPi * (i + 0.37) / opt.starts;
    const Vec2 start(radius * std::cos(ang), radius * std::sin(ang));
    if (discriminant_delta(cc, start[0], start[1]) <= 10.0 * opt.delta_floor) continue;
    for (int branch = 1; branch <= 2; ++branch) {
      const std::vector<Vec2> pts = trace_through(cc, start, branch, opt);
      if (static_cast<int>(pts.size()) < opt.min_points) continue;
      BranchFit bf;
      bf.branch = branch;
      bf.start = start;
      bf.points = pts.size();
      if (line_fit_residual(pts) <= 1e-9) {
        bf.collinear = true;
      } else {
        try {
          bf.residual = conic_fit(pts).residual;
        } catch (const NumericalFailure&) {
          continue;
        }
      }
      out.worst_residual = std::max(out.worst_residual, bf.residual);
      out.branches.push_back(bf);
    }
  }
  if (out.branches.empty())
    out.verdict = ConeVerdict::Inconclusive;
  else if (out.worst_residual <= opt.accept)
    out.verdict = ConeVerdict::QuadraticCone;
  else if (out.worst_residual >= opt.reject)
    out.verdict = ConeVerdict::NonConic;
  else
    out.verdict = ConeVerdict::Inconclusive;
  return out;
}

struct DichotomyReport {
  ConeCoefficients coefficients;
  double sym = 0.0;  ///< |k₂b − k₁c|
  ConeClassification classification;
  /// Verdict agrees with sym ≤ sym_tol (inconclusive verdicts always agree).
  bool consistent = true;
};

inline DichotomyReport dichotomy_from_coefficients(const ConeCoefficients& cc, const ClassifyOptions& opt = {},
                                                   double sym_tol = 1e-5) {
  DichotomyReport r;
  r.coefficients = cc;
  r.sym = cc.symmetry();
  r.classification = classify_cone(cc, opt);
  const ConeVerdict v = r.classification.verdict;
  if (v != ConeVerdict::Inconclusive) r.consistent = (v == ConeVerdict::QuadraticCone) == (r.sym <= sym_tol);
  return r;
}

inline DichotomyReport symmetric_dichotomy(const ImplicitSurface& s, const TransverseField& field, const Vec& q,
                                           const ClassifyOptions& opt = {}, double sym_tol = 1e-5) {
  return dichotomy_from_coefficients(cone_coefficients(s, field, q), opt, sym_tol);
}

}  // namespace caustix
