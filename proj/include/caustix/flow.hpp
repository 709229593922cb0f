#pragma once

// Ray–surface intersection and the iterated billiard map.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "caustix/errors.hpp"
#include "caustix/geom_core.hpp"
#include "caustix/hypersurface.hpp"
#include "caustix/reflect.hpp"

namespace caustix {

struct FlowOptions {
  /// Departure epsilon, relative to max(1, |p|).
  double t_min = 1e-8;
  /// Longest flight searched before declaring an escape, relative to max(1, |p|).
  double max_flight = 1e3;
  /// Largest marching step for non-quadric surfaces.
  double max_chord = 0.05;
  double min_step = 1e-7;
  int march_budget = 2'000'000;
  double polish_tol = 1e-11;
  double grazing = 1e-7;
};

struct RayHit {
  Vec q;
  double t = 0.0;
};

namespace detail {

// Newton on s(t) = F(p + t v) kept inside [lo, hi], where s changes sign.
inline double polish_on_ray(const ImplicitSurface& s, const Vec& p, const Vec& v, double lo, double hi, double t,
                            double tol) {
  double slo = s.value(p + lo * v);
  for (int it = 0; it < 200; ++it) {
    const auto [f, g] = s.value_and_gradient(p + t * v);
    if (std::abs(f) <= tol) return t;
    if ((f < 0.0) == (slo < 0.0)) {
      lo = t;
      slo = f;
    } else {
      hi = t;
    }
    const double df = g.dot(v);
    double next = df != 0.0 ? t - f / df : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == t || hi - lo <= 4e-16 * std::max(1.0, std::abs(t))) return t;
    t = next;
  }
  return t;
}

}  // namespace detail

/// First crossing of S along p + t v with t > t_min.
inline RayHit ray_intersect(const ImplicitSurface& s, const Vec& p, const Vec& v_in, const FlowOptions& opt = {}) {
  detail::require_dim(s.dimension(), p.size(), "ray_intersect");
  detail::require_dim(s.dimension(), v_in.size(), "ray_intersect");
  const Vec v = v_in.normalized();
  const double scale = std::max(1.0, p.norm());
  const double t_min = opt.t_min * scale;
  const double t_max = opt.max_flight * scale;

  double t_hit = 0.0;
  double lo = 0.0, hi = 0.0;
  if (const auto* quad = s.as_quadric()) {
    const Mat& a = quad->matrix();
    const Vec av = a * v;
    const double qa = v.dot(av);
    const double qb = p.dot(av);
    const double qc = p.dot(a * p) - 1.0;
    std::vector<double> roots;
    if (std::abs(qa) <= 1e-15 * a.norm()) {
      if (qb != 0.0) roots.push_back(-qc / (2.0 * qb));
    } else {
      const double disc = qb * qb - qa * qc;
      if (disc >= 0.0) {
        const double q = -(qb + std::copysign(std::sqrt(disc), qb));
        if (q != 0.0) roots.push_back(qc / q);
        roots.push_back(q / qa);
      }
    }
    std::sort(roots.begin(), roots.end());
    bool found = false;
    for (double r : roots)
      if (r > t_min && r <= t_max) {
        t_hit = r;
        found = true;
        break;
      }
    if (!found) throw Escape("ray leaves without meeting the quadric");
    const double bracket = 1e-6 * std::max(1.0, t_hit);
    lo = std::max(t_min, t_hit - bracket);
    hi = t_hit + bracket;
    if ((s.value(p + lo * v) < 0.0) == (s.value(p + hi * v) < 0.0)) {
      lo = hi = t_hit;  // tangential double root: keep the closed form
    }
  } else {
    double t = t_min;
    auto [f0, g0] = s.value_and_gradient(p + t * v);
    const bool neg = f0 < 0.0;
    double f = f0;
    Vec g = g0;
    int steps = 0;
    for (;;) {
      const double gn = std::max(g.norm(), 1e-12);
      const double step = std::clamp(0.5 * std::abs(f) / gn, opt.min_step * scale, opt.max_chord * scale);
      const double tn = t + step;
      if (tn > t_max) throw Escape("no crossing within the flight budget");
      auto [fn, gnext] = s.value_and_gradient(p + tn * v);
      if (fn == 0.0 || (fn < 0.0) != neg) {
        lo = t;
        hi = tn;
        break;
      }
      t = tn;
      f = fn;
      g = gnext;
      if (++steps > opt.march_budget) throw NumericalFailure("ray marching budget exhausted");
    }
    double flo = s.value(p + lo * v);
    for (int it = 0; it < 60 && hi - lo > 1e-9 * scale; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = s.value(p + mid * v);
      if ((fm < 0.0) == (flo < 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    t_hit = 0.5 * (lo + hi);
  }
  if (hi > lo) t_hit = detail::polish_on_ray(s, p, v, lo, hi, t_hit, opt.polish_tol);
  const Vec q = p + t_hit * v;

  const Vec g = s.gradient(q);
  const double gn = g.norm();
  if (gn < SurfaceOptions{}.gradient_floor) throw SingularPoint("ray hits a singular point of the surface");
  if (std::abs(v.dot(g) / gn) < opt.grazing) throw GrazingHit("ray meets the surface tangentially");
  return {q, t_hit};
}

/// The pair (Ω, L): boundary, line field, and a point inside used to orient
/// the surface so that σF < 0 in the interior.
class BilliardTable {
 public:
  BilliardTable(ImplicitSurface surface, TransverseField field, Vec interior_point)
      : surface_(std::move(surface)), field_(std::move(field)), interior_(std::move(interior_point)) {
    detail::require_dim(surface_.dimension(), interior_.size(), "BilliardTable interior point");
    const double f = surface_.value(interior_);
    if (!(std::abs(f) > 0.0)) throw InputError("interior point lies on the surface");
    surface_ = surface_.with_orientation(f < 0.0 ? 1 : -1);
    if (const auto* m = field_.q_inverse()) detail::require_dim(surface_.dimension(), m->rows(), "field");
  }

  const ImplicitSurface& surface() const { return surface_; }
  const TransverseField& field() const { return field_; }
  const Vec& interior_point() const { return interior_; }
  int dimension() const { return surface_.dimension(); }

  bool is_interior(const Vec& p) const { return surface_.orientation() * surface_.value(p) < 0.0; }

 private:
  ImplicitSurface surface_;
  TransverseField field_;
  Vec interior_;
};

enum class OrbitStatus { Completed, Escape, GrazingHit, LightLikeNormal };

inline const char* to_string(OrbitStatus s) {
  switch (s) {
    case OrbitStatus::Completed: return "Completed";
    case OrbitStatus::Escape: return "Escape";
    case OrbitStatus::GrazingHit: return "GrazingHit";
    case OrbitStatus::LightLikeNormal: return "LightLikeNormal";
  }
  return "?";
}

struct ReflectionEvent {
  Vec q;
  Vec v_in;
  Vec v_out;
  double t = 0.0;  ///< flight length from the previous point to q
  Vec n;           ///< outward unit normal at q
  Vec nu;          ///< field vector at q, ⟨ν|n⟩ = 1
};

struct Trajectory {
  Vec start;
  Vec start_direction;
  std::vector<ReflectionEvent> events;
  OrbitStatus status = OrbitStatus::Completed;
  std::string detail;
};

/// Up to N reflections from (p0, v0). Escape, grazing and light-like hits end
/// the orbit early with the matching status.
inline Trajectory orbit(const BilliardTable& table, const Vec& p0, const Vec& v0, int N, const FlowOptions& opt = {}) {
  if (N < 1) throw InputError("orbit needs at least one step");
  detail::require_dim(table.dimension(), p0.size(), "orbit start");
  detail::require_dim(table.dimension(), v0.size(), "orbit direction");
  if (!table.is_interior(p0)) throw InputError("orbit must start strictly inside the table");
  if (!(v0.norm() > 0.0)) throw InputError("orbit direction must be nonzero");

  const ImplicitSurface& s = table.surface();
  Trajectory traj;
  traj.start = p0;
  traj.start_direction = v0.normalized();
  traj.events.reserve(static_cast<std::size_t>(N));

  Vec p = p0;
  Vec v = traj.start_direction;
  for (int k = 0; k < N; ++k) {
    RayHit hit;
    try {
      hit = ray_intersect(s, p, v, opt);
    } catch (const Escape& e) {
      traj.status = OrbitStatus::Escape;
      traj.detail = e.what();
      return traj;
    } catch (const GrazingHit& e) {
      traj.status = OrbitStatus::GrazingHit;
      traj.detail = e.what();
      return traj;
    }
    const Vec n = detail::oriented_normal(s, hit.q, SurfaceOptions{});
    Vec nu;
    try {
      nu = table.field().nu(hit.q, n);
    } catch (const LightLikeNormal& e) {
      traj.status = OrbitStatus::LightLikeNormal;
      traj.detail = e.what();
      return traj;
    }
    const Vec v_out = projective_reflect(v, n, nu);
    traj.events.push_back({hit.q, v, v_out, hit.t, n, nu});
    p = hit.q;
    v = v_out;
  }
  traj.status = OrbitStatus::Completed;
  return traj;
}

/// Lines of flight: the incoming line of the first event, then every
/// outgoing line.
inline std::vector<OrientedLine> segments(const Trajectory& traj) {
  std::vector<OrientedLine> lines;
  if (traj.events.empty()) {
    if (traj.start.size() > 0) lines.emplace_back(traj.start, traj.start_direction);
    return lines;
  }
  lines.reserve(traj.events.size() + 1);
  lines.emplace_back(traj.events.front().q, traj.events.front().v_in);
  for (const auto& e : traj.events) lines.emplace_back(e.q, e.v_out);
  return lines;
}

namespace detail {

inline std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// Header `step,t,q1..qd,vi1..vid,vo1..vod`, one row per event.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const int d = traj.events.empty() ? static_cast<int>(traj.start.size())
                                    : static_cast<int>(traj.events.front().q.size());
  os << "step,t";
  for (const char* prefix : {"q", "vi", "vo"})
    for (int i = 1; i <= d; ++i) os << ',' << prefix << i;
  os << '\n';
  for (std::size_t k = 0; k < traj.events.size(); ++k) {
    const auto& e = traj.events[k];
    os << k << ',' << detail::csv_number(e.t);
    for (const Vec* vec : {&e.q, &e.v_in, &e.v_out})
      for (int i = 0; i < d; ++i) os << ',' << detail::csv_number((*vec)[i]);
    os << '\n';
  }
}

inline Trajectory read_trajectory_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InputError("trajectory CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 5 || (header.size() - 2) % 3 != 0 || header[0] != "step" || header[1] != "t")
    throw InputError("trajectory CSV header is malformed");
  const int d = static_cast<int>((header.size() - 2) / 3);
  for (int i = 0; i < d; ++i)
    if (header[2 + i] != "q" + std::to_string(i + 1) || header[2 + d + i] != "vi" + std::to_string(i + 1) ||
        header[2 + 2 * d + i] != "vo" + std::to_string(i + 1))
      throw InputError("trajectory CSV header is malformed");

  Trajectory traj;
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        cells.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw InputError("trajectory CSV row " + std::to_string(row) + ": bad number '" + cell + "'");
      }
    }
    if (cells.size() != header.size())
      throw InputError("trajectory CSV row " + std::to_string(row) + " has the wrong number of fields");
    ReflectionEvent e;
    e.t = cells[1];
    e.q = Eigen::Map<const Vec>(cells.data() + 2, d);
    e.v_in = Eigen::Map<const Vec>(cells.data() + 2 + d, d);
    e.v_out = Eigen::Map<const Vec>(cells.data() + 2 + 2 * d, d);
    if (!(e.v_in.norm() > 0.0) || !(e.v_out.norm() > 0.0) || !e.q.allFinite())
      throw InputError("trajectory CSV row " + std::to_string(row) + " has a degenerate direction");
    traj.events.push_back(std::move(e));
  }
  if (!traj.events.empty()) {
    traj.start = traj.events.front().q;
    traj.start_direction = traj.events.front().v_in.normalized();
  }
  return traj;
}

}  // namespace caustix
