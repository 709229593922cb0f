#pragma once

// Independent reference computations for the tests. None of these call the
// code paths they are used to check.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Deterministic generators for the hand-rolled property tests.
struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

  Vec normal_vec(int d) {
    Vec v(d);
    for (int i = 0; i < d; ++i) v[i] = normal();
    return v;
  }
  Vec unit(int d) {
    Vec v = normal_vec(d);
    while (v.norm() < 1e-6) v = normal_vec(d);
    return v.normalized();
  }
  Vec box(int d, double lo, double hi) {
    Vec v(d);
    for (int i = 0; i < d; ++i) v[i] = uniform(lo, hi);
    return v;
  }
  Mat orthogonal(int d) {
    Mat a(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) a(i, j) = normal();
    Eigen::HouseholderQR<Mat> qr(a);
    return qr.householderQ() * Mat::Identity(d, d);
  }
  /// Symmetric positive definite with eigenvalues in [lo, hi].
  Mat spd(int d, double lo, double hi) {
    const Mat q = orthogonal(d);
    Vec ev(d);
    for (int i = 0; i < d; ++i) ev[i] = uniform(lo, hi);
    return q * ev.asDiagonal() * q.transpose();
  }
  /// Symmetric with eigenvalues of magnitude in [lo, hi], `neg` of them negative.
  Mat indefinite(int d, int neg, double lo, double hi) {
    const Mat q = orthogonal(d);
    Vec ev(d);
    for (int i = 0; i < d; ++i) ev[i] = (i < neg ? -1.0 : 1.0) * uniform(lo, hi);
    return q * ev.asDiagonal() * q.transpose();
  }
};

/// (pᵀAu)² − (uᵀAu)(pᵀAp − 1) written out coordinate by coordinate.
inline double tangency_disc_diag(const Vec& diag, const Vec& p, const Vec& u) {
  double pau = 0, uau = 0, pap = 0;
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    pau += p[i] * diag[i] * u[i];
    uau += u[i] * diag[i] * u[i];
    pap += p[i] * diag[i] * p[i];
  }
  return pau * pau - uau * (pap - 1.0);
}

/// Tangency parameters of a line against x_i²/(a_i − s_iλ) = 1 by a dense
/// scan of the rational discriminant, skipping a neighbourhood of every pole.
/// Only roots with a sign change are found.
inline std::vector<double> scan_tangency(const std::vector<double>& a, int r, const Vec& p, const Vec& u, double lo,
                                         double hi, int n = 200000) {
  const int d = static_cast<int>(a.size());
  auto f = [&](double lambda) {
    Vec diag(d);
    for (int i = 0; i < d; ++i) diag[i] = 1.0 / (a[i] - (i < r ? 1.0 : -1.0) * lambda);
    // One factor of the product clears every denominator; a second would add
    // a sign change at each pole.
    double den = 1.0;
    for (int i = 0; i < d; ++i) den *= a[i] - (i < r ? 1.0 : -1.0) * lambda;
    return tangency_disc_diag(diag, p, u) * den;
  };
  auto near_pole = [&](double lambda) {
    for (int i = 0; i < d; ++i)
      if (std::abs(lambda - (i < r ? a[i] : -a[i])) < 1e-6) return true;
    return false;
  };
  std::vector<double> roots;
  double x0 = lo, f0 = f(lo);
  for (int k = 1; k <= n; ++k) {
    const double x1 = lo + (hi - lo) * k / n;
    if (near_pole(x1)) continue;
    const double f1 = f(x1);
    if (f0 == 0.0) {
      roots.push_back(x0);
    } else if (f0 * f1 < 0.0) {
      double a0 = x0, b0 = x1, fa = f0;
      for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (a0 + b0);
        const double fm = f(m);
        if ((fm < 0) == (fa < 0)) {
          a0 = m;
          fa = fm;
        } else {
          b0 = m;
        }
      }
      roots.push_back(0.5 * (a0 + b0));
    }
    x0 = x1;
    f0 = f1;
  }
  return roots;
}

/// Central-difference gradient.
inline Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h = 1e-5) {
  Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

/// Cross-ratio of four concurrent coplanar lines through o, read off where
/// they cross a transversal line in their plane: points o + d_i meet the
/// line {o + w + s e}, and the cross-ratio of the parameters s_i is returned
/// as (s1−s3)(s2−s4)/((s1−s4)(s2−s3)).
inline double cross_ratio_by_transversal(const std::vector<Vec>& dirs) {
  // Plane basis from the first two directions.
  Vec e1 = dirs[0].normalized();
  Vec e2 = dirs[1] - dirs[1].dot(e1) * e1;
  e2.normalize();
  // A transversal avoiding all four directions: w + s·e with w, e generic.
  const double th = 0.7371;
  const Eigen::Vector2d w(std::cos(th), std::sin(th));
  const Eigen::Vector2d e(-std::sin(th + 0.3), std::cos(th + 0.3));
  double s[4];
  for (int i = 0; i < 4; ++i) {
    const Eigen::Vector2d di(dirs[i].dot(e1), dirs[i].dot(e2));
    // Solve t·di = w + s·e.
    Eigen::Matrix2d m;
    m << di[0], -e[0], di[1], -e[1];
    const Eigen::Vector2d ts = m.colPivHouseholderQr().solve(w);
    s[i] = ts[1];
  }
  return (s[0] - s[2]) * (s[1] - s[3]) / ((s[0] - s[3]) * (s[1] - s[2]));
}

/// Principal curvatures of the graph z = h(x, y) at the origin with
/// h(0) = 0, ∇h(0) = 0, from a finite-difference Hessian.
inline Eigen::Vector2d graph_curvatures(const std::function<double(double, double)>& h, double step = 1e-4) {
  const double hxx = (h(step, 0) - 2 * h(0, 0) + h(-step, 0)) / (step * step);
  const double hyy = (h(0, step) - 2 * h(0, 0) + h(0, -step)) / (step * step);
  const double hxy = (h(step, step) - h(step, -step) - h(-step, step) + h(-step, -step)) / (4 * step * step);
  Eigen::Matrix2d hess;
  hess << hxx, hxy, hxy, hyy;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(hess);
  return {eig.eigenvalues()[1], eig.eigenvalues()[0]};
}

/// Algebraic conic fit residual computed through the normal equations with
/// long double accumulation and inverse iteration; used to cross-check
/// conic_fit on small samples.
inline double smallest_eigen_residual(const std::vector<Eigen::Vector2d>& pts) {
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (const auto& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  double spread = 0;
  for (const auto& p : pts) spread += (p - c).squaredNorm();
  const double s = std::sqrt(2.0) / std::sqrt(spread / pts.size());
  Eigen::Matrix<double, 6, 6> n = Eigen::Matrix<double, 6, 6>::Zero();
  for (const auto& p0 : pts) {
    const Eigen::Vector2d p = s * (p0 - c);
    Eigen::Matrix<double, 6, 1> row;
    row << p[0] * p[0], p[0] * p[1], p[1] * p[1], p[0], p[1], 1.0;
    n += row * row.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> eig(n);
  return std::sqrt(std::max(0.0, eig.eigenvalues()[0]) / pts.size());
}

}  // namespace oracle
