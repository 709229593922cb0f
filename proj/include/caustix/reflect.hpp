#pragma once

// Reflection laws. A transverse line field is carried by ν with ⟨ν|n⟩ = 1;
// the projective law is the involution fixing the tangent hyperplane and
// negating ν.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "caustix/errors.hpp"
#include "caustix/expr.hpp"
#include "caustix/geom_core.hpp"
#include "caustix/hypersurface.hpp"

namespace caustix {

inline constexpr double kLightLikeFloor = 1e-9;
inline constexpr double kGrazingFloor = 1e-9;

class TransverseField {
 public:
  enum class Kind { EuclideanNormal, QNormal, Custom };

  static TransverseField euclidean() { return TransverseField(Euclid{}); }

  static TransverseField q_normal(QuadraticForm q) {
    Mat m = q.inverse_matrix();
    return TransverseField(QData{std::move(q), std::move(m)});
  }

  static TransverseField custom(std::vector<Expression> nu) {
    if (nu.empty()) throw InputError("custom field needs one expression per coordinate");
    const int d = static_cast<int>(nu.size());
    for (const auto& e : nu)
      if (e.dimension() != d) throw InputError("custom field expressions must use dimension " + std::to_string(d));
    return TransverseField(Custom{std::move(nu)});
  }

  Kind kind() const {
    if (std::holds_alternative<Euclid>(data_)) return Kind::EuclideanNormal;
    if (std::holds_alternative<QData>(data_)) return Kind::QNormal;
    return Kind::Custom;
  }

  /// Present for q-normal fields.
  const QuadraticForm* form() const {
    const auto* q = std::get_if<QData>(&data_);
    return q ? &q->form : nullptr;
  }

  /// M = (matrix of Q)⁻¹ for q-normal fields.
  const Mat* q_inverse() const {
    const auto* q = std::get_if<QData>(&data_);
    return q ? &q->m : nullptr;
  }

  /// Unnormalized direction of the line at q given the unit normal n.
  Vec raw_direction(const Vec& q, const Vec& n) const {
    if (std::holds_alternative<Euclid>(data_)) return n;
    if (const auto* qd = std::get_if<QData>(&data_)) {
      detail::require_dim(qd->m.rows(), n.size(), "q-normal field");
      return qd->m * n;
    }
    const auto& exprs = std::get<Custom>(data_).nu;
    detail::require_dim(static_cast<Eigen::Index>(exprs.size()), q.size(), "custom field");
    Vec w(q.size());
    for (Eigen::Index i = 0; i < q.size(); ++i) w[i] = exprs[i].eval(q);
    return w;
  }

  /// |⟨w|n⟩| / |w| in [0, 1]: how far the line is from being tangent.
  double transversality(const Vec& q, const Vec& n) const {
    const Vec w = raw_direction(q, n);
    const double wn = w.norm();
    return wn > 0.0 ? std::abs(w.dot(n)) / wn : 0.0;
  }

  /// ν at q with ⟨ν|n⟩ = 1. Throws LightLikeNormal where the line lies in
  /// the tangent hyperplane.
  Vec nu(const Vec& q, const Vec& n) const {
    if (std::holds_alternative<Euclid>(data_)) return n;
    const Vec w = raw_direction(q, n);
    const double wn = w.dot(n);
    const double floor = std::holds_alternative<QData>(data_) ? kLightLikeFloor : kLightLikeFloor * std::max(1.0, w.norm());
    if (!(std::abs(wn) >= floor))
      throw LightLikeNormal("field line is tangent to the surface (<w|n> = " + std::to_string(wn) + ")");
    return w / wn;
  }

 private:
  struct Euclid {};
  struct QData {
    QuadraticForm form;
    Mat m;
  };
  struct Custom {
    std::vector<Expression> nu;
  };
  using Data = std::variant<Euclid, QData, Custom>;

  explicit TransverseField(Data d) : data_(std::move(d)) {}

  Data data_;
};

/// ν = Mn / ⟨Mn|n⟩ for the Q-orthogonal line to T_qS, with M the inverse of
/// Q's matrix.
inline Vec nu_from_Q(const QuadraticForm& q, const ImplicitSurface& s, const Vec& point) {
  const Vec n = unit_normal(s, point);
  const Mat m = q.inverse_matrix();
  const Vec mn = m * n;
  const double mnn = mn.dot(n);
  if (std::abs(mnn) < kLightLikeFloor) throw LightLikeNormal("Q-normal line lies in the tangent hyperplane");
  return mn / mnn;
}

/// v − 2⟨v|n⟩ν before normalization.
inline Vec projective_reflect_raw(const Vec& v, const Vec& n, const Vec& nu) { return v - 2.0 * v.dot(n) * nu; }

inline Vec projective_reflect(const Vec& v, const Vec& n, const Vec& nu) {
  if (std::abs(v.dot(n)) < kGrazingFloor) throw GrazingHit("direction is tangent to the surface");
  return projective_reflect_raw(v, n, nu).normalized();
}

/// v − 2 Q(v, w)/Q(w, w) · w before normalization.
inline Vec pseudo_reflect_raw(const Vec& v, const QuadraticForm& q, const Vec& nq) {
  const double qww = q(nq, nq);
  if (std::abs(qww) < kLightLikeFloor) throw LightLikeNormal("Q-normal direction is light-like");
  return v - 2.0 * q(v, nq) / qww * nq;
}

inline Vec pseudo_reflect(const Vec& v, const QuadraticForm& q, const Vec& nq) {
  return pseudo_reflect_raw(v, q, nq).normalized();
}

/// The lines (ℓ, ℓ′, T, L) through the hit point: incoming, outgoing, the
/// trace of the tangent hyperplane on their common plane, and the field line.
inline std::array<OrientedLine, 4> reflection_quadruple(const Vec& q, const Vec& v_in, const Vec& v_out,
                                                        const Vec& n, const Vec& nu) {
  const Vec t = v_in - v_in.dot(n) * nu;
  if (t.norm() <= 1e-12 * v_in.norm()) throw InputError("incoming direction lies on the field line");
  return {OrientedLine(q, v_in), OrientedLine(q, v_out), OrientedLine(q, t), OrientedLine(q, nu)};
}

}  // namespace caustix
