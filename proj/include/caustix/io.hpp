#pragma once

// Config parsing and report serialization for the command-line tool.

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "caustix/caustic.hpp"
#include "caustix/cone.hpp"
#include "caustix/errors.hpp"
#include "caustix/flow.hpp"
#include "caustix/symmetry.hpp"

namespace caustix {

using json = nlohmann::json;

namespace io {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(what + ": " + e.what());
  }
}

inline double number(const json& j, const std::string& what) {
  if (!j.is_number()) throw InputError(what + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw InputError(what + " must be finite");
  return v;
}

inline Vec vector(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw InputError(what + " must be a non-empty array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(j[i], what);
  return v;
}

inline Mat matrix(const json& j, int d, const std::string& what) {
  if (!j.is_array() || static_cast<int>(j.size()) != d) throw InputError(what + " must have " + std::to_string(d) + " rows");
  Mat m(d, d);
  for (int r = 0; r < d; ++r) {
    const Vec row = vector(j[static_cast<std::size_t>(r)], what);
    if (row.size() != d) throw InputError(what + " must be " + std::to_string(d) + "x" + std::to_string(d));
    m.row(r) = row.transpose();
  }
  return m;
}

inline const json& member(const json& j, const char* key, const std::string& what) {
  if (!j.is_object() || !j.contains(key)) throw InputError(what + " is missing \"" + key + "\"");
  return j.at(key);
}

inline std::string string_member(const json& j, const char* key, const std::string& what) {
  const json& v = member(j, key, what);
  if (!v.is_string()) throw InputError(what + "." + key + " must be a string");
  return v.get<std::string>();
}

/// Comma-separated numbers.
inline Vec parse_csv_vector(const std::string& text, const std::string& what) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(cell, &used);
      if (cell.find_first_not_of(" \t", used) != std::string::npos || !std::isfinite(v)) throw std::invalid_argument(cell);
      vals.push_back(v);
    } catch (const std::logic_error&) {
      throw InputError(what + ": '" + cell + "' is not a number");
    }
  }
  if (vals.empty()) throw InputError(what + " is empty");
  return Eigen::Map<const Vec>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

}  // namespace io

/// {"kind":"euclidean"} | {"kind":"pseudo","Q":[[…]]} | {"kind":"custom","nu":["…",…]}
inline TransverseField field_from_json(const json& j, int d) {
  const std::string kind = io::string_member(j, "kind", "field");
  if (kind == "euclidean") return TransverseField::euclidean();
  if (kind == "pseudo") return TransverseField::q_normal(QuadraticForm(io::matrix(io::member(j, "Q", "field"), d, "field.Q")));
  if (kind == "custom") {
    const json& nu = io::member(j, "nu", "field");
    if (!nu.is_array() || static_cast<int>(nu.size()) != d)
      throw InputError("field.nu must list " + std::to_string(d) + " expressions");
    std::vector<Expression> exprs;
    for (const auto& e : nu) {
      if (!e.is_string()) throw InputError("field.nu entries must be strings");
      exprs.push_back(parse_expression(e.get<std::string>(), d));
    }
    return TransverseField::custom(std::move(exprs));
  }
  throw InputError("unknown field kind '" + kind + "'");
}

/// {"kind":"quadric","A":[[…]]} | {"kind":"implicit","expression":"…"}
inline ImplicitSurface surface_from_json(const json& j, int d) {
  const std::string kind = io::string_member(j, "kind", "surface");
  if (kind == "quadric") return ImplicitSurface::quadric(CentralQuadric(io::matrix(io::member(j, "A", "surface"), d, "surface.A")));
  if (kind == "implicit") return ImplicitSurface::implicit(parse_expression(io::string_member(j, "expression", "surface"), d));
  throw InputError("unknown surface kind '" + kind + "'");
}

inline BilliardTable table_from_json(const json& j) {
  const json& dj = io::member(j, "dimension", "table");
  if (!dj.is_number_integer() || dj.get<int>() < 2) throw InputError("table.dimension must be an integer >= 2");
  const int d = dj.get<int>();
  ImplicitSurface s = surface_from_json(io::member(j, "surface", "table"), d);
  TransverseField f = field_from_json(io::member(j, "field", "table"), d);
  const Vec interior = io::vector(io::member(j, "interior_point", "table"), "table.interior_point");
  if (interior.size() != d) throw InputError("table.interior_point must have dimension " + std::to_string(d));
  return BilliardTable(std::move(s), std::move(f), interior);
}

inline BilliardTable load_table(const std::string& path) {
  return table_from_json(io::parse_json(io::read_file(path), "table config"));
}

inline PseudoConfocalPencil pencil_from_json(const json& j) {
  const Vec a = io::vector(io::member(j, "a", "pencil"), "pencil.a");
  const json& r = io::member(j, "r", "pencil");
  if (!r.is_number_integer()) throw InputError("pencil.r must be an integer");
  return PseudoConfocalPencil(std::vector<double>(a.data(), a.data() + a.size()), r.get<int>());
}

/// Accepts inline "a1,…,ad;r=R" (r defaults to d), a JSON object, or a path
/// to a JSON file.
inline PseudoConfocalPencil parse_pencil(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return pencil_from_json(io::parse_json(text, "pencil"));
  if (std::ifstream(text).good()) return pencil_from_json(io::parse_json(io::read_file(text), "pencil file"));
  const auto semi = text.find(';');
  const Vec a = io::parse_csv_vector(text.substr(0, semi), "pencil parameters");
  int r = static_cast<int>(a.size());
  if (semi != std::string::npos) {
    const std::string rest = text.substr(semi + 1);
    if (rest.rfind("r=", 0) != 0) throw InputError("pencil must look like 'a1,...,ad;r=R'");
    try {
      std::size_t used = 0;
      r = std::stoi(rest.substr(2), &used);
      if (used != rest.size() - 2) throw std::invalid_argument(rest);
    } catch (const std::logic_error&) {
      throw InputError("pencil r='" + rest.substr(2) + "' is not an integer");
    }
  }
  return PseudoConfocalPencil(std::vector<double>(a.data(), a.data() + a.size()), r);
}

/// "p1,…,pd;v1,…,vd"
inline std::pair<Vec, Vec> parse_point_direction(const std::string& text) {
  const auto semi = text.find(';');
  if (semi == std::string::npos) throw InputError("expected 'point;direction'");
  Vec p = io::parse_csv_vector(text.substr(0, semi), "point");
  Vec v = io::parse_csv_vector(text.substr(semi + 1), "direction");
  if (p.size() != v.size()) throw InputError("point and direction dimensions differ");
  return {std::move(p), std::move(v)};
}

inline json to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline json to_json(const ConservationReport& r) {
  json slots = json::array();
  double max_dev = 0.0;
  for (const auto& s : r.slots) {
    slots.push_back({{"lambda0", s.lambda0}, {"max_dev", s.max_dev}, {"pole", s.at_pole}});
    if (!s.at_pole) max_dev = std::max(max_dev, s.max_dev);
  }
  return {{"slots", slots},
          {"max_dev", max_dev},
          {"pass", r.pass},
          {"segments", r.segments},
          {"mismatches", r.mismatches},
          {"tolerance", r.tolerance}};
}

inline json to_json(const TangencyReport& r) {
  return {{"max_residual", r.max_residual}, {"pass", r.pass}, {"segments", r.residuals.size()}};
}

inline json to_json(const SymmetryReport& r) {
  return {{"symmetric", r.symmetric},
          {"worst_defect", r.worst_defect},
          {"worst_point", to_json(r.worst_point)},
          {"evaluated", r.evaluated},
          {"skipped", r.skipped}};
}

inline json to_json(const ConeCoefficients& cc) {
  return {{"nu1", cc.nu1}, {"nu2", cc.nu2}, {"a", cc.a},   {"b", cc.b},
          {"c", cc.c},     {"d", cc.d},     {"k1", cc.k1}, {"k2", cc.k2}};
}

inline json to_json(const DichotomyReport& r) {
  json branches = json::array();
  for (const auto& b : r.classification.branches)
    branches.push_back({{"branch", b.branch}, {"residual", b.residual}, {"points", b.points}});
  return {{"sym_defect", r.sym},
          {"branches", branches},
          {"verdict", to_string(r.classification.verdict)},
          {"consistent", r.consistent},
          {"coefficients", to_json(r.coefficients)}};
}

}  // namespace caustix
