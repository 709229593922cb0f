#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "caustix/cli.hpp"
#include "caustix/flow.hpp"
#include "support/oracles.hpp"

using caustix::json;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = caustix::cli::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::string sample(const std::string& name) { return std::string(CAUSTIX_SAMPLES_DIR) + "/" + name; }

}  // namespace

TEST(Cli, OrbitWritesCsv) {
  const CliRun r = run({"orbit", "--table", sample("ellipsoid.json"), "--init", "0.1,0.2,0;1,0.3,0.2", "--steps", "200",
                     "--out", "cli_orbit.csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in("cli_orbit.csv");
  const caustix::Trajectory tr = caustix::read_trajectory_csv(in);
  EXPECT_EQ(tr.events.size(), 200u);
}

TEST(Cli, CausticOnOrbit) {
  ASSERT_EQ(run({"orbit", "--table", sample("ellipsoid.json"), "--init", "0.1,0.2,0;1,0.3,0.2", "--steps", "200",
                 "--out", "cli_orbit2.csv"})
                .code,
            0);
  const CliRun r = run({"caustic", "--traj", "cli_orbit2.csv", "--pencil", "4,2,1;r=3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json report = json::parse(r.out);
  EXPECT_TRUE(report.at("pass").get<bool>());
  EXPECT_EQ(report.at("segments").get<int>(), 201);
  EXPECT_LE(report.at("max_dev").get<double>(), 1e-8 * 5);

  const CliRun bad = run({"caustic", "--traj", "cli_orbit2.csv", "--pencil", "4,2;r=3"});
  EXPECT_EQ(bad.code, 2);
}

TEST(Cli, SymmetryVerdicts) {
  const CliRun good = run({"symmetry", "--table", sample("ellipsoid.json"), "--samples", "50"});
  EXPECT_EQ(good.code, 0) << good.err;
  const CliRun asym = run({"symmetry", "--table", sample("asymmetric_sphere.json"), "--samples", "50"});
  EXPECT_EQ(asym.code, 1);
  EXPECT_FALSE(json::parse(asym.out).at("symmetric").get<bool>());
}

TEST(Cli, ConeFromCoefficientsAndTable) {
  const CliRun sym = run({"cone", "--coeffs", "1,0.5,0.5,2,1,1"});
  EXPECT_EQ(sym.code, 0) << sym.out << sym.err;
  EXPECT_EQ(json::parse(sym.out).at("verdict").get<std::string>(), "quadratic-cone");
  const CliRun asym = run({"cone", "--coeffs", "1,0.5,-0.5,2,1,1"});
  EXPECT_EQ(asym.code, 1);
  EXPECT_EQ(json::parse(asym.out).at("verdict").get<std::string>(), "non-conic");
  const CliRun table = run({"cone", "--table", sample("ellipsoid.json"), "--point", "2,0,0"});
  EXPECT_EQ(table.code, 0) << table.err;
  EXPECT_EQ(run({"cone", "--table", sample("ellipsoid.json")}).code, 2);
  EXPECT_EQ(run({"cone", "--coeffs", "1,2,3"}).code, 2);
}

TEST(Cli, PencilAndOracle) {
  const CliRun member = run({"pencil", "--pencil", "4,2,1;r=2", "--lambda", "0"});
  ASSERT_EQ(member.code, 0) << member.err;
  const CliRun spectrum = run({"pencil", "--pencil", "4,2,1", "--line", "0.1,0.2,0.3;1,2,3"});
  ASSERT_EQ(spectrum.code, 0) << spectrum.err;
  EXPECT_EQ(run({"pencil", "--pencil", "4,2,1", "--lambda", "4"}).code, 2);

  const CliRun ok = run({"oracle", "--b=-1", "--c=-1", "--e=3", "--r1=2", "--r2=1", "--phi=1.0471975511965976"});
  EXPECT_EQ(ok.code, 0) << ok.err;
  const CliRun off = run({"oracle", "--b=1", "--c=-1", "--e=3", "--r1=2", "--r2=1", "--phi=1.0471975511965976"});
  EXPECT_EQ(off.code, 1);
  EXPECT_NEAR(json::parse(off.out).at("K")[1].get<double>(), 8.0, 1e-12);
  EXPECT_EQ(run({"oracle", "--b=0", "--c=0", "--e=0", "--r1=0", "--r2=1", "--phi=1"}).code, 2);
}

TEST(Cli, InputErrorsExitTwo) {
  EXPECT_EQ(run({"bogus"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"orbit", "--table", "does-not-exist.json", "--init", "0,0,0;1,0,0"}).code, 2);
  EXPECT_EQ(run({"orbit", "--table", sample("ellipsoid.json"), "--init", "9,0,0;1,0,0"}).code, 2);
  EXPECT_EQ(run({"orbit", "--table", sample("ellipsoid.json"), "--init", "0,0;1,0"}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, OutputIsDeterministic) {
  const std::vector<std::string> args{"symmetry", "--table", sample("pseudo_member.json"), "--samples", "30",
                                      "--seed", "4"};
  EXPECT_EQ(run(args).out, run(args).out);
  const std::vector<std::string> orbit{"orbit", "--table", sample("bumped_ellipsoid.json"), "--init",
                                       "0.1,0,0;1,1,1", "--steps", "20"};
  EXPECT_EQ(run(orbit).out, run(orbit).out);
}

TEST(Cli, FuzzedArgumentsNeverCrash) {
  oracle::Gen g(191);
  const std::vector<std::string> tokens{"orbit",  "caustic", "symmetry", "cone",      "pencil", "oracle",
                                        "--table", "--init", "--steps",  "--pencil", "--traj", "--coeffs",
                                        "--point", "--b",    "--kind",   "1,2,3",    "-1",     "nan",
                                        "x",       ";",      "",         "1e400",    "--out",  sample("ellipsoid.json")};
  for (int i = 0; i < 300; ++i) {
    std::vector<std::string> args;
    const int n = g.integer(0, 6);
    for (int k = 0; k < n; ++k) {
      std::string t = tokens[static_cast<std::size_t>(g.integer(0, static_cast<int>(tokens.size()) - 1))];
      // Never let fuzzing write files.
      if (t == "--out") t = "--steps";
      args.push_back(t);
    }
    const CliRun r = run(args);
    EXPECT_GE(r.code, 0);
    EXPECT_LE(r.code, 3);
  }
}
