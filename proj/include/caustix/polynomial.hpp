#pragma once

// Dense real polynomials and companion-free real root isolation.
//
// Roots are isolated recursively: the real roots of p' split the real line
// into intervals on which p is monotone, and each such interval holds at most
// one root, found by bisection. Critical points where |p| is negligible are
// reported as even-multiplicity roots.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "caustix/errors.hpp"

namespace caustix {

/// Coefficients in increasing degree: c[0] + c[1] x + ... .
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) {}

  static Polynomial constant(double v) { return Polynomial({v}); }
  /// offset + slope * x
  static Polynomial linear(double offset, double slope) { return Polynomial({offset, slope}); }

  const std::vector<double>& coeffs() const { return c_; }
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool empty() const { return c_.empty(); }

  double operator()(double x) const {
    double acc = 0.0;
    for (std::size_t i = c_.size(); i-- > 0;) acc = acc * x + c_[i];
    return acc;
  }

  Polynomial derivative() const {
    if (c_.size() <= 1) return Polynomial({0.0});
    std::vector<double> d(c_.size() - 1);
    for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = static_cast<double>(i) * c_[i];
    return Polynomial(std::move(d));
  }

  double max_abs_coeff() const {
    double m = 0.0;
    for (double v : c_) m = std::max(m, std::abs(v));
    return m;
  }

  /// Drops leading coefficients below `rel` times the largest one.
  Polynomial trimmed(double rel = 1e-14) const {
    const double floor = rel * max_abs_coeff();
    std::vector<double> c = c_;
    while (c.size() > 1 && std::abs(c.back()) <= floor) c.pop_back();
    return Polynomial(std::move(c));
  }

  bool is_zero() const { return max_abs_coeff() == 0.0; }

  /// Bound on |x| for all roots: 1 + max |c_i / c_n|.
  double cauchy_bound() const {
    const double lead = std::abs(c_.back());
    double m = 0.0;
    for (std::size_t i = 0; i + 1 < c_.size(); ++i) m = std::max(m, std::abs(c_[i]) / lead);
    return 1.0 + m;
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<double> c(std::max(a.c_.size(), b.c_.size()), 0.0);
    for (std::size_t i = 0; i < a.c_.size(); ++i) c[i] += a.c_[i];
    for (std::size_t i = 0; i < b.c_.size(); ++i) c[i] += b.c_[i];
    return Polynomial(std::move(c));
  }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.c_.empty() || b.c_.empty()) return Polynomial();
    std::vector<double> c(a.c_.size() + b.c_.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
    return Polynomial(std::move(c));
  }

  friend Polynomial operator*(double s, const Polynomial& a) {
    std::vector<double> c = a.c_;
    for (double& v : c) v *= s;
    return Polynomial(std::move(c));
  }

 private:
  std::vector<double> c_;
};

namespace detail {

inline double bisect_root(const Polynomial& p, double lo, double hi, double flo) {
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  // Near zero the doubles are too dense to bisect down to adjacent values.
  const double abs_floor = 1e-20 * (hi - lo);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) return mid;
    if (hi - lo <= std::max(2.0 * kEps * std::max(std::abs(lo), std::abs(hi)), abs_floor)) return mid;
    const double fm = p(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  throw NumericalFailure("bisection did not converge on [" + std::to_string(lo) + ", " +
                         std::to_string(hi) + "]");
}

// Scale of |p| near x, used to decide when a critical value counts as zero.
inline double magnitude_at(const Polynomial& p, double x) {
  double acc = 0.0, xp = 1.0;
  for (double c : p.coeffs()) {
    acc += std::abs(c) * xp;
    xp *= std::abs(x);
  }
  return acc;
}

inline std::vector<double> isolate(const Polynomial& p, double lo, double hi, double zero_rel) {
  std::vector<double> roots;
  const int deg = p.degree();
  if (deg <= 0) return roots;
  if (deg == 1) {
    const double r = -p.coeffs()[0] / p.coeffs()[1];
    if (r >= lo && r <= hi) roots.push_back(r);
    return roots;
  }
  std::vector<double> knots{lo};
  for (double c : isolate(p.derivative().trimmed(), lo, hi, zero_rel)) knots.push_back(c);
  knots.push_back(hi);

  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double a = knots[i], b = knots[i + 1];
    const double fa = p(a), fb = p(b);
    if (fa == 0.0) {
      roots.push_back(a);
      continue;
    }
    if (fb == 0.0) continue;  // picked up as the left end of the next interval
    if ((fa < 0.0) != (fb < 0.0)) roots.push_back(bisect_root(p, a, b, fa));
  }
  // Touching roots: a critical point where p is negligible without a nearby
  // sign change (a close pair of simple roots is already bracketed).
  const std::size_t simple = roots.size();
  for (std::size_t i = 1; i + 1 < knots.size(); ++i) {
    const double x = knots[i];
    if (std::abs(p(x)) > zero_rel * magnitude_at(p, x)) continue;
    const double window = 1e-6 * std::max(1.0, std::abs(x));
    bool bracketed = false;
    for (std::size_t k = 0; k < simple; ++k) bracketed = bracketed || std::abs(roots[k] - x) <= window;
    if (!bracketed) roots.push_back(x);
  }
  if (std::abs(p(hi)) == 0.0) roots.push_back(hi);

  std::sort(roots.begin(), roots.end());
  std::vector<double> unique;
  for (double r : roots) {
    if (!unique.empty() && std::abs(r - unique.back()) <= 1e-12 * std::max(1.0, std::abs(r))) continue;
    unique.push_back(r);
  }
  return unique;
}

}  // namespace detail

/// All real roots of `p`, sorted ascending. `zero_rel` sets when a critical
/// value is treated as a double root. Throws NumericalFailure for p == 0.
inline std::vector<double> real_roots(const Polynomial& p, double zero_rel = 1e-13) {
  if (p.empty() || p.is_zero()) throw NumericalFailure("real_roots: polynomial is identically zero");
  const Polynomial q = p.trimmed();
  if (q.degree() <= 0) return {};
  const double bound = q.cauchy_bound();
  return detail::isolate(q, -bound, bound, zero_rel);
}

}  // namespace caustix
