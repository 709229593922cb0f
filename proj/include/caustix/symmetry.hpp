#pragma once

// L-symmetry: the bilinear form ⟨dn(u) | dν(v)⟩ on the tangent space must be
// symmetric. The defect is the operator norm of its antisymmetric part.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "caustix/errors.hpp"
#include "caustix/flow.hpp"
#include "caustix/hypersurface.hpp"
#include "caustix/reflect.hpp"

namespace caustix {

struct SymmetryOptions {
  /// Finite-difference step along the surface, relative to 1 + |q|.
  double step = 1e-5;
};

struct SymmetryDetails {
  Vec point;
  Mat basis;  ///< orthonormal tangent basis, columns
  Mat dn;     ///< dn(u_i) as columns
  Mat dnu;    ///< dν(u_i) as columns
  Mat form;   ///< form(i, j) = ⟨dn(u_i) | dν(u_j)⟩
  double defect = 0.0;
  /// max(1, ‖dn‖·‖dν‖), the scale tolerances are measured against.
  double scale = 1.0;
};

namespace detail {

inline double antisymmetric_norm(const Mat& form) {
  const Mat a = form - form.transpose();
  if (a.rows() == 0) return 0.0;
  return Eigen::JacobiSVD<Mat>(a).singularValues()[0];
}

inline double operator_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Mat>(m).singularValues()[0];
}

}  // namespace detail

/// dn and dν by extrapolated central differences along straight tangent
/// offsets projected back onto S. `basis` defaults to an orthonormal tangent basis.
inline SymmetryDetails symmetry_details(const ImplicitSurface& s, const TransverseField& field, const Vec& q_in,
                                        const std::optional<Mat>& basis = std::nullopt,
                                        const SymmetryOptions& opt = {}) {
  const SurfaceOptions sopt;
  SymmetryDetails out;
  out.point = s.surface_point(q_in, sopt);
  const Vec n0 = detail::oriented_normal(s, out.point, sopt);
  field.nu(out.point, n0);  // LightLikeNormal at q itself

  out.basis = basis ? *basis : tangent_basis(n0);
  if (out.basis.rows() != s.dimension() || out.basis.cols() != s.dimension() - 1)
    throw InputError("tangent basis has the wrong shape");

  const double h = opt.step * (1.0 + out.point.norm());
  const int m = static_cast<int>(out.basis.cols());
  out.dn.resize(s.dimension(), m);
  out.dnu.resize(s.dimension(), m);
  auto central = [&](const Vec& u, double step, Vec& dn, Vec& dnu) {
    const Vec qp = s.project(out.point + step * u, sopt);
    const Vec qm = s.project(out.point - step * u, sopt);
    const Vec np = detail::oriented_normal(s, qp, sopt);
    const Vec nm = detail::oriented_normal(s, qm, sopt);
    dn = (np - nm) / (2.0 * step);
    dnu = (field.nu(qp, np) - field.nu(qm, nm)) / (2.0 * step);
  };
  // Richardson: combining steps h and h/2 cancels the h² error term, which
  // dominates when ν is large.
  for (int i = 0; i < m; ++i) {
    Vec dn_h, dnu_h, dn_h2, dnu_h2;
    central(out.basis.col(i), h, dn_h, dnu_h);
    central(out.basis.col(i), 0.5 * h, dn_h2, dnu_h2);
    out.dn.col(i) = (4.0 * dn_h2 - dn_h) / 3.0;
    out.dnu.col(i) = (4.0 * dnu_h2 - dnu_h) / 3.0;
  }
  out.form = out.dn.transpose() * out.dnu;
  out.defect = detail::antisymmetric_norm(out.form);
  out.scale = std::max(1.0, detail::operator_norm(out.dn) * detail::operator_norm(out.dnu));
  return out;
}

inline double symmetry_defect(const ImplicitSurface& s, const TransverseField& field, const Vec& q,
                              const std::optional<Mat>& basis = std::nullopt, const SymmetryOptions& opt = {}) {
  return symmetry_details(s, field, q, basis, opt).defect;
}

/// Closed form of ⟨dν(x) | dn(y)⟩ for ν = Mn/⟨Mn|n⟩:
///   λ⟨M dn(x) | dn(y)⟩ − 2λ² ⟨Mn | dn(x)⟩⟨Mn | dn(y)⟩,   λ = 1/⟨Mn|n⟩.
inline double qnormal_pairing(const Mat& m, const Vec& n, const Vec& dn_x, const Vec& dn_y) {
  const Vec mn = m * n;
  const double lambda = 1.0 / mn.dot(n);
  return lambda * (m * dn_x).dot(dn_y) - 2.0 * lambda * lambda * mn.dot(dn_x) * mn.dot(dn_y);
}

/// Symmetry defect with exact derivatives: dn from the surface Hessian and
/// dν = λ M dn − 2λ²⟨Mn|dn⟩ Mn. Needs a q-normal field.
inline SymmetryDetails analytic_qnormal_symmetry(const ImplicitSurface& s, const TransverseField& field,
                                                 const Vec& q_in, const std::optional<Mat>& basis = std::nullopt) {
  const Mat* mp = field.q_inverse();
  if (!mp) throw InputError("analytic symmetry needs a q-normal field");
  const Mat& m = *mp;
  const SurfaceOptions sopt;
  SymmetryDetails out;
  out.point = s.surface_point(q_in, sopt);
  const Vec n = detail::oriented_normal(s, out.point, sopt);
  const Vec mn = m * n;
  const double mnn = mn.dot(n);
  if (std::abs(mnn) < kLightLikeFloor) throw LightLikeNormal("Q-normal line lies in the tangent hyperplane");
  const double lambda = 1.0 / mnn;

  out.basis = basis ? *basis : tangent_basis(n);
  const Mat shape = shape_operator_ambient(s, out.point, sopt);
  out.dn = shape * out.basis;
  out.dnu.resize(out.dn.rows(), out.dn.cols());
  for (Eigen::Index i = 0; i < out.dn.cols(); ++i) {
    const Vec dni = out.dn.col(i);
    out.dnu.col(i) = lambda * (m * dni) - 2.0 * lambda * lambda * mn.dot(dni) * mn;
  }
  out.form = out.dn.transpose() * out.dnu;
  out.defect = detail::antisymmetric_norm(out.form);
  out.scale = std::max(1.0, detail::operator_norm(out.dn) * detail::operator_norm(out.dnu));
  return out;
}

struct SymmetryReport {
  bool symmetric = true;
  Vec worst_point;
  double worst_defect = 0.0;
  int evaluated = 0;
  int skipped = 0;
};

namespace detail {

inline double halton(std::uint64_t index, unsigned base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

inline constexpr unsigned kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71};

/// Quasi-random unit directions: Halton points pushed through Box–Muller.
inline Vec halton_direction(std::uint64_t index, int d) {
  if (2 * d > static_cast<int>(std::size(kPrimes))) throw InputError("sampling supports dimension up to 10");
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  Vec g(d);
  for (int i = 0; i < d; ++i) {
    const double u1 = halton(index, kPrimes[2 * i]);
    const double u2 = halton(index, kPrimes[2 * i + 1]);
    g[i] = std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }
  const double len = g.norm();
  if (!(len > 0.0)) g = Vec::Unit(d, 0);
  return g.normalized();
}

}  // namespace detail

/// Samples S by casting quasi-random rays from the table's interior point.
/// A point passes when defect ≤ tol · scale. Points where the field line is
/// within `min_transversality` of tangent are skipped, as are rays that miss.
inline SymmetryReport is_L_symmetric(const BilliardTable& table, int samples, double tol, std::uint64_t seed = 0,
                                     double min_transversality = 1e-2, const SymmetryOptions& opt = {}) {
  if (samples < 1) throw InputError("is_L_symmetric needs at least one sample");
  const ImplicitSurface& s = table.surface();
  SymmetryReport report;
  double worst_ratio = -1.0;
  const std::uint64_t first = 1 + seed * 7919;
  for (int i = 0; i < samples; ++i) {
    const Vec dir = detail::halton_direction(first + static_cast<std::uint64_t>(i), s.dimension());
    Vec q;
    try {
      q = ray_intersect(s, table.interior_point(), dir).q;
    } catch (const Escape&) {
      ++report.skipped;
      continue;
    } catch (const GrazingHit&) {
      ++report.skipped;
      continue;
    }
    const Vec n = detail::oriented_normal(s, q, SurfaceOptions{});
    if (table.field().kind() != TransverseField::Kind::EuclideanNormal &&
        table.field().transversality(q, n) < min_transversality) {
      ++report.skipped;
      continue;
    }
    const SymmetryDetails det = symmetry_details(s, table.field(), q, std::nullopt, opt);
    ++report.evaluated;
    const double ratio = det.defect / det.scale;
    if (ratio > worst_ratio) {
      worst_ratio = ratio;
      report.worst_defect = det.defect;
      report.worst_point = det.point;
    }
    if (det.defect > tol * det.scale) report.symmetric = false;
  }
  if (report.evaluated == 0) throw InputError("no usable sample points on the surface");
  return report;
}

}  // namespace caustix
