#pragma once

// Quadrics, pseudo-confocal pencils, lines, tangency and the cross-ratio of
// concurrent coplanar lines.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "caustix/errors.hpp"
#include "caustix/polynomial.hpp"

namespace caustix {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

namespace detail {

inline void require_symmetric(const Mat& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() < 1) throw InputError(std::string(what) + ": matrix must be square");
  if (!m.allFinite()) throw InputError(std::string(what) + ": matrix has non-finite entries");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw InputError(std::string(what) + ": matrix is not symmetric");
}

inline void require_dim(Eigen::Index expected, Eigen::Index got, const char* what) {
  if (expected != got)
    throw InputError(std::string(what) + ": dimension mismatch (expected " + std::to_string(expected) +
                     ", got " + std::to_string(got) + ")");
}

}  // namespace detail

/// Symmetric bilinear form Q(x, y) = xᵀ G y on ℝᵈ. The identity is the
/// Euclidean product.
class QuadraticForm {
 public:
  explicit QuadraticForm(Mat matrix, double det_floor = 1e-12) : g_(std::move(matrix)), det_floor_(det_floor) {
    detail::require_symmetric(g_, "QuadraticForm");
    if (g_.rows() < 2) throw InputError("QuadraticForm: dimension must be at least 2");
    g_ = 0.5 * (g_ + g_.transpose()).eval();
  }

  static QuadraticForm euclidean(int d) { return QuadraticForm(Mat::Identity(d, d)); }

  /// diag(+1 × r, -1 × (d - r)).
  static QuadraticForm signature(int d, int r) {
    Vec diag = Vec::Constant(d, -1.0);
    diag.head(r).setOnes();
    return QuadraticForm(diag.asDiagonal().toDenseMatrix());
  }

  const Mat& matrix() const { return g_; }
  int dimension() const { return static_cast<int>(g_.rows()); }

  double operator()(const Vec& x, const Vec& y) const { return x.dot(g_ * y); }

  bool is_nondegenerate() const { return std::abs(g_.determinant()) > det_floor_; }

  /// The matrix M with Q(x, y) = ⟨M⁻¹x | y⟩.
  Mat inverse_matrix() const {
    if (!is_nondegenerate()) throw InputError("QuadraticForm: form is degenerate");
    Mat m = g_.inverse();
    return 0.5 * (m + m.transpose());
  }

 private:
  Mat g_;
  double det_floor_;
};

/// The level set {x : xᵀ A x = 1}.
class CentralQuadric {
 public:
  explicit CentralQuadric(Mat a) : a_(std::move(a)) {
    detail::require_symmetric(a_, "CentralQuadric");
    a_ = 0.5 * (a_ + a_.transpose()).eval();
  }

  const Mat& matrix() const { return a_; }
  int dimension() const { return static_cast<int>(a_.rows()); }

 private:
  Mat a_;
};

/// xᵀ A x; equals 1 on the quadric.
inline double quadric_eval(const CentralQuadric& q, const Vec& x) {
  detail::require_dim(q.dimension(), x.size(), "quadric_eval");
  return x.dot(q.matrix() * x);
}

/// A line through `point` with unit `direction`.
class OrientedLine {
 public:
  OrientedLine(Vec point, Vec direction) : p_(std::move(point)), u_(std::move(direction)) {
    detail::require_dim(p_.size(), u_.size(), "OrientedLine");
    const double len = u_.norm();
    if (!(len > 0.0) || !std::isfinite(len) || !p_.allFinite())
      throw InputError("OrientedLine: direction must be a finite nonzero vector");
    u_ /= len;
  }

  const Vec& point() const { return p_; }
  const Vec& direction() const { return u_; }
  int dimension() const { return static_cast<int>(p_.size()); }
  Vec at(double t) const { return p_ + t * u_; }

 private:
  Vec p_;
  Vec u_;
};

/// (pᵀAu)² − (uᵀAu)(pᵀAp − 1). Zero iff the line is tangent to the quadric;
/// positive for secants.
inline double tangency_discriminant(const CentralQuadric& q, const OrientedLine& line) {
  detail::require_dim(q.dimension(), line.dimension(), "tangency_discriminant");
  const Mat& a = q.matrix();
  const Vec& p = line.point();
  const Vec& u = line.direction();
  const Vec au = a * u;
  const double pau = p.dot(au);
  return pau * pau - u.dot(au) * (p.dot(a * p) - 1.0);
}

/// The λ-family  Σ_{i≤r} xᵢ²/(aᵢ−λ) + Σ_{i>r} xᵢ²/(aᵢ+λ) = 1.
/// r = d is the classical confocal family.
class PseudoConfocalPencil {
 public:
  PseudoConfocalPencil(std::vector<double> a, int r) : a_(std::move(a)), r_(r) {
    if (a_.size() < 2) throw InputError("PseudoConfocalPencil: need at least 2 semi-axis parameters");
    for (double v : a_)
      if (!(v > 0.0) || !std::isfinite(v)) throw InputError("PseudoConfocalPencil: parameters must be positive");
    if (r_ < 0 || r_ > dimension()) throw InputError("PseudoConfocalPencil: r must lie in [0, d]");
  }

  const std::vector<double>& a() const { return a_; }
  int r() const { return r_; }
  int dimension() const { return static_cast<int>(a_.size()); }

  /// +1 on the first r coordinates, −1 after.
  double sign(int i) const { return i < r_ ? 1.0 : -1.0; }

  /// Denominator of coordinate i as a function of λ: aᵢ − sᵢλ.
  double denominator(int i, double lambda) const { return a_[i] - sign(i) * lambda; }

  /// The λ making coordinate i singular.
  double pole(int i) const { return sign(i) * a_[i]; }

  /// The signature form the pencil is confocal for.
  QuadraticForm form() const { return QuadraticForm::signature(dimension(), r_); }

 private:
  std::vector<double> a_;
  int r_;
};

inline CentralQuadric pencil_member(const PseudoConfocalPencil& pencil, double lambda, double tol = 1e-10) {
  const int d = pencil.dimension();
  Vec diag(d);
  for (int i = 0; i < d; ++i) {
    const double den = pencil.denominator(i, lambda);
    if (std::abs(den) <= tol * std::max(1.0, pencil.a()[i])) throw DegenerateMember(lambda, i + 1);
    diag[i] = 1.0 / den;
  }
  return CentralQuadric(diag.asDiagonal().toDenseMatrix());
}

/// Numerator of the tangency discriminant of member(λ) after multiplying by
/// Π_k (a_k − s_kλ):
///   Σᵢ uᵢ² Π_{k≠i} D_k − Σ_{i<j} (pᵢuⱼ − pⱼuᵢ)² Π_{k≠i,j} D_k,
/// a polynomial of degree at most d − 1.
inline Polynomial tangency_polynomial(const PseudoConfocalPencil& pencil, const OrientedLine& line) {
  const int d = pencil.dimension();
  detail::require_dim(d, line.dimension(), "tangency_polynomial");
  const Vec& p = line.point();
  const Vec& u = line.direction();

  std::vector<Polynomial> den(d);
  for (int k = 0; k < d; ++k) den[k] = Polynomial::linear(pencil.a()[k], -pencil.sign(k));

  auto product_except = [&](int i, int j) {
    Polynomial acc = Polynomial::constant(1.0);
    for (int k = 0; k < d; ++k)
      if (k != i && k != j) acc = acc * den[k];
    return acc;
  };

  Polynomial result = Polynomial::constant(0.0);
  for (int i = 0; i < d; ++i) result = result + (u[i] * u[i]) * product_except(i, -1);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      const double m = p[i] * u[j] - p[j] * u[i];
      result = result + (-m * m) * product_except(i, j);
    }
  return result;
}

struct SpectralRoot {
  double lambda = 0.0;
  bool at_pole = false;
  int pole_index = 0;  ///< 1-based coordinate of the coincident pole, 0 if none
};

using TangencySpectrum = std::vector<SpectralRoot>;

/// All real λ at which `line` is tangent to member(λ), sorted. Roots within
/// `pole_tol` of a pencil pole are kept and flagged.
inline TangencySpectrum tangency_spectrum(const PseudoConfocalPencil& pencil, const OrientedLine& line,
                                          double pole_tol = 1e-7) {
  const Polynomial poly = tangency_polynomial(pencil, line);
  if (poly.max_abs_coeff() <= 1e-300)
    throw NumericalFailure("tangency_spectrum: line lies in the degenerate locus of the pencil");

  TangencySpectrum spectrum;
  for (double lambda : real_roots(poly)) {
    SpectralRoot root{lambda, false, 0};
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < pencil.dimension(); ++i) {
      const double gap = std::abs(lambda - pencil.pole(i));
      if (gap <= pole_tol * std::max(1.0, pencil.a()[i]) && gap < best) {
        best = gap;
        root.at_pole = true;
        root.pole_index = i + 1;
      }
    }
    spectrum.push_back(root);
  }
  return spectrum;
}

/// Cross-ratio of four points of ℝP¹ given in homogeneous coordinates:
/// ([a,c][b,d]) / ([a,d][b,c]) with [x,y] = det(x, y). Returns +∞ when the
/// denominator vanishes.
inline double cross_ratio_p1(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c,
                             const Eigen::Vector2d& d) {
  auto br = [](const Eigen::Vector2d& x, const Eigen::Vector2d& y) { return x[0] * y[1] - x[1] * y[0]; };
  const double num = br(a, c) * br(b, d);
  const double den = br(a, d) * br(b, c);
  const double scale = a.norm() * b.norm() * c.norm() * d.norm();
  if (std::abs(den) <= 1e-15 * scale) {
    if (std::abs(num) <= 1e-15 * scale) throw InputError("cross_ratio: three of the four lines coincide");
    return std::numeric_limits<double>::infinity();
  }
  return num / den;
}

/// Cross-ratio of four concurrent coplanar lines, read as points of the
/// projective line of the pencil of lines through their common point.
inline double cross_ratio(std::span<const OrientedLine, 4> lines, double tol = 1e-9) {
  const int d = lines[0].dimension();
  for (const auto& l : lines) detail::require_dim(d, l.dimension(), "cross_ratio");

  // Least-squares common point: Σ (I − uuᵀ) x = Σ (I − uuᵀ) p.
  Mat lhs = Mat::Zero(d, d);
  Vec rhs = Vec::Zero(d);
  double scale = 1.0;
  for (const auto& l : lines) {
    const Mat proj = Mat::Identity(d, d) - l.direction() * l.direction().transpose();
    lhs += proj;
    rhs += proj * l.point();
    scale = std::max(scale, l.point().norm());
  }
  Mat dirs(4, d);
  for (int i = 0; i < 4; ++i) dirs.row(i) = lines[i].direction().transpose();
  Eigen::JacobiSVD<Mat> svd(dirs);
  const Vec sv = svd.singularValues();
  if (sv.size() < 2 || sv[1] <= tol * sv[0]) throw InputError("cross_ratio: all four lines are parallel");
  if (sv.size() > 2 && sv[2] > tol * sv[0]) throw InputError("cross_ratio: lines are not coplanar");

  const Vec center = lhs.ldlt().solve(rhs);
  for (const auto& l : lines) {
    const Vec off = center - l.point();
    const double dist = (off - off.dot(l.direction()) * l.direction()).norm();
    if (dist > tol * scale) throw InputError("cross_ratio: lines are not concurrent");
  }

  // Orthonormal basis of the common plane.
  const Vec e1 = lines[0].direction();
  Vec e2 = Vec::Zero(d);
  for (const auto& l : lines) {
    const Vec r = l.direction() - l.direction().dot(e1) * e1;
    if (r.norm() > e2.norm()) e2 = r;
  }
  e2.normalize();
  std::array<Eigen::Vector2d, 4> h;
  for (int i = 0; i < 4; ++i) h[i] = {lines[i].direction().dot(e1), lines[i].direction().dot(e2)};
  return cross_ratio_p1(h[0], h[1], h[2], h[3]);
}

inline double cross_ratio(const OrientedLine& a, const OrientedLine& b, const OrientedLine& c,
                          const OrientedLine& d, double tol = 1e-9) {
  const std::array<OrientedLine, 4> lines{a, b, c, d};
  return cross_ratio(std::span<const OrientedLine, 4>(lines), tol);
}

}  // namespace caustix
