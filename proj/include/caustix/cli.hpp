#pragma once

// Command-line front end. Exit codes: 0 pass, 1 verdict failure, 2 input
// error, 3 numerical failure.

#include "CLI11.hpp"
#include "json.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "caustix/caustic.hpp"
#include "caustix/cone.hpp"
#include "caustix/errors.hpp"
#include "caustix/flow.hpp"
#include "caustix/io.hpp"
#include "caustix/symmetry.hpp"

namespace caustix::cli {

enum ExitCode : int { kPass = 0, kFail = 1, kInput = 2, kNumerical = 3 };

namespace detail {

inline void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write '" + path + "'");
  f << text;
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline ConeCoefficients parse_coefficients(const std::string& text) {
  const Vec v = io::parse_csv_vector(text, "cone coefficients");
  if (v.size() != 6 && v.size() != 8) throw InputError("--coeffs takes a,b,c,d,k1,k2 or a,b,c,d,k1,k2,nu1,nu2");
  ConeCoefficients cc;
  cc.a = v[0];
  cc.b = v[1];
  cc.c = v[2];
  cc.d = v[3];
  cc.k1 = v[4];
  cc.k2 = v[5];
  if (v.size() == 8) {
    cc.nu1 = v[6];
    cc.nu2 = v[7];
  }
  return cc;
}

}  // namespace detail

/// Runs one command line (without the program name). All output goes to
/// `out`/`err` or to files named by --out.
inline int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Projective billiard laboratory", "caustix"};
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "Seed for every sampling step")->capture_default_str();

  int code = kPass;

  // orbit
  auto* orbit_cmd = app.add_subcommand("orbit", "Iterate the billiard map and write a trajectory CSV");
  std::string o_table, o_init, o_out;
  int o_steps = 100;
  orbit_cmd->add_option("--table", o_table, "Table config JSON")->required();
  orbit_cmd->add_option("--init", o_init, "Start as 'p1,...,pd;v1,...,vd'")->required();
  orbit_cmd->add_option("--steps", o_steps, "Number of reflections")->capture_default_str();
  orbit_cmd->add_option("--out", o_out, "CSV path (default stdout)");

  // caustic
  auto* caustic_cmd = app.add_subcommand("caustic", "Check tangency-spectrum conservation along a trajectory");
  std::string c_traj, c_pencil, c_out;
  double c_tol = 1e-8;
  std::optional<double> c_gamma;
  caustic_cmd->add_option("--traj", c_traj, "Trajectory CSV")->required();
  caustic_cmd->add_option("--pencil", c_pencil, "'a1,...,ad;r=R', JSON object, or JSON file")->required();
  caustic_cmd->add_option("--tol", c_tol, "Relative tolerance per slot")->capture_default_str();
  caustic_cmd->add_option("--gamma-lambda", c_gamma, "Also check tangency to the member at this lambda");
  caustic_cmd->add_option("--out", c_out, "Report path (default stdout)");

  // symmetry
  auto* sym_cmd = app.add_subcommand("symmetry", "Sample the L-symmetry defect over the table boundary");
  std::string s_table, s_out;
  int s_samples = 200;
  double s_tol = 1e-5, s_transversality = 1e-2;
  sym_cmd->add_option("--table", s_table, "Table config JSON")->required();
  sym_cmd->add_option("--samples", s_samples, "Number of sample rays")->capture_default_str();
  sym_cmd->add_option("--tol", s_tol, "Defect tolerance")->capture_default_str();
  sym_cmd->add_option("--min-transversality", s_transversality, "Skip points with a nearly tangent field line")
      ->capture_default_str();
  sym_cmd->add_option("--out", s_out, "Report path (default stdout)");

  // cone
  auto* cone_cmd = app.add_subcommand("cone", "Classify the partial cone at a point");
  std::string k_table, k_point, k_coeffs, k_out;
  ClassifyOptions k_opt;
  double k_sym_tol = 1e-5;
  auto* k_table_opt = cone_cmd->add_option("--table", k_table, "Table config JSON (dimension 3)");
  auto* k_point_opt = cone_cmd->add_option("--point", k_point, "Surface point 'x,y,z'");
  auto* k_coeffs_opt = cone_cmd->add_option("--coeffs", k_coeffs, "Coefficients 'a,b,c,d,k1,k2[,nu1,nu2]'");
  k_table_opt->needs(k_point_opt);
  k_point_opt->needs(k_table_opt);
  k_coeffs_opt->excludes(k_table_opt);
  cone_cmd->add_option("--starts", k_opt.starts, "Start points on the circle")->capture_default_str();
  cone_cmd->add_option("--step", k_opt.h, "Integration step")->capture_default_str();
  cone_cmd->add_option("--steps", k_opt.steps, "Steps per direction")->capture_default_str();
  cone_cmd->add_option("--accept", k_opt.accept, "Conic residual accepted")->capture_default_str();
  cone_cmd->add_option("--reject", k_opt.reject, "Conic residual rejected")->capture_default_str();
  cone_cmd->add_option("--sym-tol", k_sym_tol, "Tolerance on |k2 b - k1 c|")->capture_default_str();
  cone_cmd->add_option("--out", k_out, "Report path (default stdout)");

  // pencil
  auto* pencil_cmd = app.add_subcommand("pencil", "Inspect a pseudo-confocal pencil");
  std::string p_pencil, p_line, p_out;
  std::optional<double> p_lambda;
  pencil_cmd->add_option("--pencil", p_pencil, "'a1,...,ad;r=R', JSON object, or JSON file")->required();
  auto* p_lambda_opt = pencil_cmd->add_option("--lambda", p_lambda, "Print the member matrix at lambda");
  auto* p_line_opt = pencil_cmd->add_option("--line", p_line, "Tangency spectrum of 'p;v'");
  p_lambda_opt->excludes(p_line_opt);
  pencil_cmd->add_option("--out", p_out, "Report path (default stdout)");

  // oracle
  auto* oracle_cmd = app.add_subcommand("oracle", "Substitute a parametrized conic into the normal-form equation");
  double r_b = 0, r_c = 0, r_e = 0, r_r1 = 1, r_r2 = 1, r_phi = 0, r_tol = 1e-12;
  std::string r_kind = "ellipse";
  oracle_cmd->add_option("--b", r_b)->required();
  oracle_cmd->add_option("--c", r_c)->required();
  oracle_cmd->add_option("--e", r_e)->required();
  oracle_cmd->add_option("--r1", r_r1)->required();
  oracle_cmd->add_option("--r2", r_r2)->required();
  oracle_cmd->add_option("--phi", r_phi)->required();
  oracle_cmd->add_option("--kind", r_kind)->check(CLI::IsMember({"ellipse", "hyperbola"}))->capture_default_str();
  oracle_cmd->add_option("--tol", r_tol, "Pass when max|E| is at most this")->capture_default_str();

  try {
    std::vector<std::string> argv_store;
    argv_store.reserve(args.size() + 1);
    argv_store.emplace_back("caustix");
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : argv_store) argv.push_back(s.data());
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return kPass;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return kPass;
    } catch (const CLI::ParseError& e) {
      err << "error: " << e.what() << "\n\n" << app.help();
      return kInput;
    }

    if (orbit_cmd->parsed()) {
      const BilliardTable table = load_table(o_table);
      const auto [p0, v0] = parse_point_direction(o_init);
      const Trajectory traj = orbit(table, p0, v0, o_steps);
      std::ostringstream csv;
      write_trajectory_csv(csv, traj);
      detail::emit(csv.str(), o_out, out);
      if (traj.status != OrbitStatus::Completed) {
        err << "orbit stopped after " << traj.events.size() << " reflections: " << to_string(traj.status) << " ("
            << traj.detail << ")\n";
        code = kFail;
      }
    } else if (caustic_cmd->parsed()) {
      std::ifstream in(c_traj, std::ios::binary);
      if (!in) throw InputError("cannot open '" + c_traj + "'");
      const Trajectory traj = read_trajectory_csv(in);
      const PseudoConfocalPencil pencil = parse_pencil(c_pencil);
      const ConservationReport report = conservation_report(traj, pencil, c_tol);
      json j = to_json(report);
      bool pass = report.pass;
      if (c_gamma) {
        const TangencyReport tr = caustic_tangency_check(traj, pencil_member(pencil, *c_gamma), c_tol, c_tol);
        j["tangency"] = to_json(tr);
        pass = pass && tr.pass;
      }
      detail::emit(detail::dump(j), c_out, out);
      code = pass ? kPass : kFail;
    } else if (sym_cmd->parsed()) {
      const BilliardTable table = load_table(s_table);
      const SymmetryReport report = is_L_symmetric(table, s_samples, s_tol, seed, s_transversality);
      detail::emit(detail::dump(to_json(report)), s_out, out);
      code = report.symmetric ? kPass : kFail;
    } else if (cone_cmd->parsed()) {
      DichotomyReport report;
      if (!k_coeffs.empty()) {
        report = dichotomy_from_coefficients(detail::parse_coefficients(k_coeffs), k_opt, k_sym_tol);
      } else if (!k_table.empty()) {
        const BilliardTable table = load_table(k_table);
        const Vec q = io::parse_csv_vector(k_point, "point");
        report = symmetric_dichotomy(table.surface(), table.field(), q, k_opt, k_sym_tol);
      } else {
        throw InputError("cone needs --table with --point, or --coeffs");
      }
      detail::emit(detail::dump(to_json(report)), k_out, out);
      code = report.classification.verdict == ConeVerdict::QuadraticCone ? kPass : kFail;
    } else if (pencil_cmd->parsed()) {
      const PseudoConfocalPencil pencil = parse_pencil(p_pencil);
      json j;
      if (p_lambda) {
        const CentralQuadric member = pencil_member(pencil, *p_lambda);
        json rows = json::array();
        for (Eigen::Index i = 0; i < member.matrix().rows(); ++i) rows.push_back(to_json(member.matrix().row(i).transpose()));
        j = {{"lambda", *p_lambda}, {"A", rows}};
      } else if (!p_line.empty()) {
        const auto [p, v] = parse_point_direction(p_line);
        json roots = json::array();
        for (const auto& r : tangency_spectrum(pencil, OrientedLine(p, v)))
          roots.push_back({{"lambda", r.lambda}, {"pole", r.at_pole}});
        j = {{"spectrum", roots}};
      } else {
        throw InputError("pencil needs --lambda or --line");
      }
      detail::emit(detail::dump(j), p_out, out);
    } else if (oracle_cmd->parsed()) {
      const ConicKind kind = r_kind == "hyperbola" ? ConicKind::Hyperbola : ConicKind::Ellipse;
      const OracleResult r = conic_solution_oracle(r_b, r_c, r_e, r_r1, r_r2, r_phi, kind);
      json j = {{"kind", r_kind}, {"max_abs_E", r.max_abs_E}};
      if (r.K) j["K"] = {(*r.K)[0], (*r.K)[1], (*r.K)[2]};
      out << detail::dump(j);
      code = r.max_abs_E <= r_tol ? kPass : kFail;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.is_input_error() ? kInput : kNumerical;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNumerical;
  }
  return code;
}

}  // namespace caustix::cli
