#pragma once

// Implicit hypersurfaces F = 0: Newton projection, unit normals, and the
// second fundamental form II(u, v) = ⟨dn(u) | v⟩.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <variant>

#include "caustix/errors.hpp"
#include "caustix/expr.hpp"
#include "caustix/geom_core.hpp"

namespace caustix {

struct SurfaceOptions {
  int newton_iterations = 10;
  double newton_tol = 1e-11;
  /// Largest projection displacement accepted for a queried surface point,
  /// relative to 1 + |q|.
  double max_offset = 1e-6;
  double gradient_floor = 1e-8;
  /// Hessian step for expression surfaces, relative to 1 + |x|.
  double hessian_step = 1e-5;
};

/// S = {F = 0}. The orientation σ is chosen so that σF < 0 inside the table;
/// the unit normal σ∇F/|∇F| then points out of the interior.
class ImplicitSurface {
 public:
  static ImplicitSurface quadric(CentralQuadric q, int orientation = 1) {
    const int d = q.dimension();
    return ImplicitSurface(Source(std::move(q)), d, orientation);
  }

  static ImplicitSurface implicit(Expression e, int orientation = 1) {
    const int d = e.dimension();
    return ImplicitSurface(Source(std::move(e)), d, orientation);
  }

  int dimension() const { return dim_; }
  int orientation() const { return sigma_; }

  ImplicitSurface with_orientation(int sigma) const {
    ImplicitSurface s = *this;
    s.sigma_ = sigma >= 0 ? 1 : -1;
    return s;
  }

  const CentralQuadric* as_quadric() const { return std::get_if<CentralQuadric>(&src_); }
  const Expression* as_expression() const { return std::get_if<Expression>(&src_); }

  double value(const Vec& x) const {
    detail::require_dim(dim_, x.size(), "ImplicitSurface");
    if (const auto* q = as_quadric()) return x.dot(q->matrix() * x) - 1.0;
    return std::get<Expression>(src_).eval(x);
  }

  std::pair<double, Vec> value_and_gradient(const Vec& x) const {
    detail::require_dim(dim_, x.size(), "ImplicitSurface");
    if (const auto* q = as_quadric()) {
      const Vec ax = q->matrix() * x;
      return {x.dot(ax) - 1.0, 2.0 * ax};
    }
    return std::get<Expression>(src_).eval_with_gradient(x);
  }

  Vec gradient(const Vec& x) const { return value_and_gradient(x).second; }

  /// Exact for quadrics; central differences of the exact gradient otherwise.
  Mat hessian(const Vec& x, double step_rel = 1e-5) const {
    if (const auto* q = as_quadric()) return 2.0 * q->matrix();
    const double h = step_rel * (1.0 + x.norm());
    Mat hess(dim_, dim_);
    for (int j = 0; j < dim_; ++j) {
      Vec xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      hess.col(j) = (gradient(xp) - gradient(xm)) / (2.0 * h);
    }
    return 0.5 * (hess + hess.transpose());
  }

  /// Newton projection along the gradient. No acceptance test.
  Vec project(const Vec& x, const SurfaceOptions& opt = {}) const {
    Vec y = x;
    for (int it = 0; it < opt.newton_iterations; ++it) {
      const auto [f, g] = value_and_gradient(y);
      if (std::abs(f) <= opt.newton_tol) break;
      const double g2 = g.squaredNorm();
      if (g2 < opt.gradient_floor * opt.gradient_floor)
        throw SingularPoint("gradient vanishes during projection");
      y -= (f / g2) * g;
    }
    return y;
  }

  /// Projects `q` onto S and rejects inputs that were not already close.
  Vec surface_point(const Vec& q, const SurfaceOptions& opt = {}) const {
    detail::require_dim(dim_, q.size(), "surface point");
    if (!q.allFinite()) throw InputError("surface point is not finite");
    const Vec y = project(q, opt);
    const double moved = (y - q).norm();
    if (moved > opt.max_offset * (1.0 + q.norm()) || std::abs(value(y)) > 1e-9)
      throw InputError("point is off the surface (projection moved it by " + std::to_string(moved) + ")");
    return y;
  }

 private:
  using Source = std::variant<CentralQuadric, Expression>;

  ImplicitSurface(Source src, int dim, int orientation)
      : src_(std::move(src)), dim_(dim), sigma_(orientation >= 0 ? 1 : -1) {
    if (dim_ < 2) throw InputError("surface dimension must be at least 2");
  }

  Source src_;
  int dim_;
  int sigma_;
};

/// Orthonormal basis of n⊥ as the columns of a d × (d−1) matrix.
inline Mat tangent_basis(const Vec& n) {
  const int d = static_cast<int>(n.size());
  Eigen::HouseholderQR<Mat> qr(n);
  const Mat q = qr.householderQ() * Mat::Identity(d, d);
  return q.rightCols(d - 1);
}

namespace detail {

inline Vec oriented_normal(const ImplicitSurface& s, const Vec& q, const SurfaceOptions& opt) {
  const Vec g = s.gradient(q);
  const double gn = g.norm();
  if (gn < opt.gradient_floor) throw SingularPoint("gradient norm " + std::to_string(gn) + " below floor");
  return (s.orientation() / gn) * g;
}

}  // namespace detail

/// Outward unit normal σ∇F/|∇F| at the projection of q.
inline Vec unit_normal(const ImplicitSurface& s, const Vec& q, const SurfaceOptions& opt = {}) {
  return detail::oriented_normal(s, s.surface_point(q, opt), opt);
}

struct CurvatureData {
  Vec point;
  Vec n;
  Mat basis;  ///< principal directions u_1..u_{d−1} as columns
  Vec k;      ///< principal curvatures, descending
  Mat II;     ///< second fundamental form in `basis`
  bool degenerate = false;
};

/// dn(u) = σ P H u / |∇F| with P the tangential projector.
inline Mat shape_operator_ambient(const ImplicitSurface& s, const Vec& q, const SurfaceOptions& opt = {}) {
  const Vec g = s.gradient(q);
  const double gn = g.norm();
  if (gn < opt.gradient_floor) throw SingularPoint("gradient norm below floor");
  const Vec n = g / gn;
  const int d = s.dimension();
  const Mat proj = Mat::Identity(d, d) - n * n.transpose();
  return (s.orientation() / gn) * proj * s.hessian(q, opt.hessian_step);
}

inline bool is_degenerate_curvature(const Vec& k, double rel = 1e-6) {
  const double kmax = k.cwiseAbs().maxCoeff();
  return k.cwiseAbs().minCoeff() <= rel * std::max(1.0, kmax);
}

inline CurvatureData curvature_data(const ImplicitSurface& s, const Vec& q_in, const SurfaceOptions& opt = {}) {
  const Vec q = s.surface_point(q_in, opt);
  const Vec g = s.gradient(q);
  const double gn = g.norm();
  if (gn < opt.gradient_floor) throw SingularPoint("gradient norm below floor");
  const Vec n = (s.orientation() / gn) * g;
  const Mat form = (s.orientation() / gn) * s.hessian(q, opt.hessian_step);  // II on tangent vectors
  const Mat t = tangent_basis(n);
  Mat b = t.transpose() * form * t;
  b = 0.5 * (b + b.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Mat> eig(b);
  if (eig.info() != Eigen::Success) throw NumericalFailure("curvature eigen-solver did not converge");
  const int m = static_cast<int>(b.rows());
  CurvatureData cd;
  cd.point = q;
  cd.n = n;
  cd.k.resize(m);
  Mat vecs(m, m);
  for (int i = 0; i < m; ++i) {
    cd.k[i] = eig.eigenvalues()[m - 1 - i];
    vecs.col(i) = eig.eigenvectors().col(m - 1 - i);
  }
  cd.basis = t * vecs;
  cd.II = cd.basis.transpose() * form * cd.basis;
  cd.II = 0.5 * (cd.II + cd.II.transpose()).eval();
  cd.degenerate = is_degenerate_curvature(cd.k);
  return cd;
}

}  // namespace caustix
