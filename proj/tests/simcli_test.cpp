#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "nifb/error.hpp"
#include "nifb/ircsynth.hpp"
#include "nifb/model_io.hpp"
#include "nifb/montecarlo.hpp"
#include "nifb/report.hpp"
#include "nifb/simulate.hpp"
#include "test_util.hpp"

namespace nifb {
namespace {

const std::string kData = NIFB_DATA_DIR;
const std::string kCli = NIFB_CLI_PATH;

StateSpaceModel plant() { return load_model(kData + "/case_study_plant.json"); }
StateSpaceModel irc() { return load_model(kData + "/case_study_irc.json"); }

StateSpaceModel scalar(double a, double b, double c, double d) {
  return StateSpaceModel(MatrixXd::Constant(1, 1, a), MatrixXd::Constant(1, 1, b),
                         MatrixXd::Constant(1, 1, c), MatrixXd::Constant(1, 1, d));
}

StateSpaceModel double_integrator() {
  MatrixXd A(2, 2), B(2, 1), C(1, 2);
  A << 0, 1, 0, 0;
  B << 0, 1;
  C << 1, 0;
  return StateSpaceModel(A, B, C, MatrixXd::Zero(1, 1));
}

TEST(SimulateTest, ZeroReferenceStaysAtRest) {
  SimulationConfig c;
  c.reference = 0.0;
  c.t_end = 5.0;
  const SimulationResult r = step_response(plant(), irc(), c);
  EXPECT_EQ(r.outputs.norm(), 0.0);
  EXPECT_EQ(r.t.size(), 501u);
  EXPECT_EQ(r.Vs.size(), r.theta.size());
}

TEST(SimulateTest, HalvedStepMatchesOnCommonSamples) {
  SimulationConfig c;
  c.t_end = 20.0;
  c.dt = 0.1;
  const SimulationResult a = step_response(plant(), irc(), c);
  c.dt = 0.05;
  const SimulationResult b = step_response(plant(), irc(), c);
  ASSERT_EQ(b.t.size(), 2 * a.t.size() - 1);
  for (std::size_t i = 0; i < a.t.size(); ++i) {
    EXPECT_NEAR(a.theta[i], b.theta[2 * i], 1e-9 * (1 + std::abs(a.theta[i])));
    EXPECT_NEAR(a.Vs[i], b.Vs[2 * i], 1e-9 * (1 + std::abs(a.Vs[i])));
  }
}

TEST(SimulateTest, CaseStudySettlesToStaticEquilibrium) {
  const ModalModel m = modal_from_json(read_json_file(kData + "/case_study_plant.json")["modal"]);
  const Json ij = read_json_file(kData + "/case_study_irc.json")["irc"];
  const IrcController k = make_irc(matrix_from_json(ij["Gamma"], "G"), matrix_from_json(ij["Phi"], "P"),
                                   matrix_from_json(ij["Delta"], "D"));
  const MatrixXd Gb = k.dc_gain();
  const MatrixXd flex = m.modes[0].C / (m.modes[0].p * m.modes[0].p);
  // Rest: no hub torque, y = e1 theta_rigid + flex u, u = Gb (y - e1 r).
  // Unknowns z = [theta_rigid, u1, u2] with u1 = 0 eliminated.
  const double r = 1.0;
  const Eigen::Vector2d e1(1, 0);
  Eigen::Matrix2d M;
  M.col(0) = -Gb * e1;
  M.col(1) = Eigen::Vector2d(0, 1) - Gb * flex.col(1);
  const Eigen::Vector2d z = M.fullPivLu().solve(-Gb * e1 * r);
  const Eigen::Vector2d u(0, z(1));
  const Eigen::Vector2d y = e1 * z(0) + flex * u;

  SimulationConfig c;
  c.t_end = 900.0;
  c.dt = 0.05;
  const SimulationResult s = step_response(plant(), irc(), c);
  EXPECT_TRUE(s.hurwitz);
  EXPECT_FALSE(s.diverged);
  EXPECT_LT(s.closed_loop_abscissa, 0.0);
  // Slowest closed-loop mode decays as exp(-0.016 t); residual ~1e-7 at t_end.
  const double tol = 1e-5 * y.norm();
  EXPECT_NEAR(s.theta.back(), y(0), tol);
  EXPECT_NEAR(s.Vs.back(), y(1), tol);
}

TEST(SimulateTest, WiringsDifferAndParse) {
  for (auto w : {ReferenceWiring::kOutputError, ReferenceWiring::kChannelReplacement,
                 ReferenceWiring::kPlantInput}) {
    EXPECT_EQ(reference_wiring_from_string(to_string(w)), w);
    const ReferenceLoop L = reference_loop(plant(), irc(), w);
    EXPECT_EQ(L.A.rows(), plant().states() + irc().states());
    EXPECT_EQ(L.B.cols(), 1);
  }
  EXPECT_THROW(reference_wiring_from_string("sideways"), Error);
  // Replacing theta feedback by r changes the loop matrix; the other two share it.
  EXPECT_GT((reference_loop(plant(), irc(), ReferenceWiring::kChannelReplacement).A -
             reference_loop(plant(), irc(), ReferenceWiring::kOutputError).A).norm(), 1e-6);
  EXPECT_EQ(reference_loop(plant(), irc(), ReferenceWiring::kPlantInput).A,
            reference_loop(plant(), irc(), ReferenceWiring::kOutputError).A);
}

TEST(SimulateTest, UnstableLoopIsFlagged) {
  SimulationConfig c;
  c.t_end = 400.0;
  c.dt = 0.1;
  c.divergence_bound = 1e6;
  const SimulationResult s = step_response(double_integrator(), scalar(-1, 1, 1, -0.5), c);
  EXPECT_FALSE(s.hurwitz);
  EXPECT_TRUE(s.diverged);
  EXPECT_LT(s.t.back(), 400.0);
  EXPECT_TRUE(s.outputs.allFinite());
}

TEST(SimulateTest, HurwitzLoopsStayBounded) {
  GeneratorSpec spec;
  int checked = 0;
  for (int i = 0; i < 40 && checked < 12; ++i) {
    const TrialCase tc = generate_trial(7, i, spec);
    if (!direct_stability(tc.plant, tc.controller.realization)) continue;
    ++checked;
    SimulationConfig c;
    c.t_end = 30.0;
    c.dt = 0.05;
    c.divergence_bound = 1e8;
    const SimulationResult s = step_response(tc.plant, tc.controller.realization, c);
    EXPECT_TRUE(s.hurwitz);
    EXPECT_FALSE(s.diverged) << i;
    EXPECT_TRUE(s.outputs.allFinite());
  }
  EXPECT_GE(checked, 5);
}

TEST(SimulateTest, BadConfig) {
  SimulationConfig c;
  c.dt = 0.0;
  EXPECT_THROW(step_response(plant(), irc(), c), Error);
  EXPECT_THROW(step_response(plant(), scalar(-1, 1, 1, 0), {}), Error);
}

TEST(ReportTest, CaseStudyAnalysis) {
  const AnalysisReport r = run_analysis(read_json_file(kData + "/case_study_plant.json"),
                                        read_json_file(kData + "/case_study_irc.json"));
  EXPECT_EQ(r.verdict.outcome, Outcome::kStable);
  EXPECT_EQ(r.exit_code(), 0);
  EXPECT_EQ(r.plant_name, "slewing_beam_one_mode");
  ASSERT_TRUE(r.ni.has_value());
  EXPECT_TRUE(r.ni->is_ni);
  ASSERT_TRUE(r.sni.has_value());
  EXPECT_TRUE(r.sni->is_sni);
  const Json j = to_json(r);
  EXPECT_EQ(j["schema_version"], kReportSchemaVersion);
  EXPECT_EQ(j["verdict"]["outcome"], "Stable");
  EXPECT_EQ(j["verdict"]["theorem"], "undamped_free_body");
  EXPECT_EQ(j["verdict"]["branch"], "NSD");
  EXPECT_NE(summary_text(r).find("Stable"), std::string::npos);
}

TEST(ReportTest, NonNiPlantFailsPrecondition) {
  StateSpaceModel neg = double_integrator();
  neg = StateSpaceModel(neg.A(), neg.B(), -neg.C(), neg.D());
  const AnalysisReport r = run_analysis(neg, scalar(-1, 1, 1, -2));
  EXPECT_EQ(r.verdict.outcome, Outcome::kPreconditionFailed);
  EXPECT_EQ(r.exit_code(), 3);
}

// ---------------------------------------------------------------------------

struct CliRun {
  int code = -1;
  std::string out;
};

CliRun run_cli(const std::string& args) {
  CliRun r;
  const std::string cmd = kCli + " " + args + " 2>/dev/null";
  FILE* f = popen(cmd.c_str(), "r");
  if (!f) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, f)) > 0) r.out.append(buf, n);
  const int status = pclose(f);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string temp_file(const std::string& name, const std::string& text) {
  const std::string path = ::testing::TempDir() + name;
  std::ofstream(path) << text;
  return path;
}

TEST(CliTest, StabilityJson) {
  const CliRun r = run_cli("--json stability " + kData + "/case_study_plant.json " + kData +
                        "/case_study_irc.json");
  ASSERT_EQ(r.code, 0) << r.out;
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j["verdict"]["outcome"], "Stable");
  EXPECT_EQ(j["tool_version"], kToolVersion);
}

TEST(CliTest, ExitCodes) {
  EXPECT_EQ(run_cli("").code, 2);
  EXPECT_EQ(run_cli("nonsense").code, 2);
  EXPECT_EQ(run_cli("classify " + temp_file("bad.json", "{\"A\": [[1, 2]")).code, 2);
  EXPECT_EQ(run_cli("classify /nonexistent/model.json").code, 2);
  const std::string neg = temp_file(
      "neg.json", R"({"A": [[0, 1], [0, 0]], "B": [[0], [1]], "C": [[-1, 0]], "D": [[0]]})");
  const std::string ctl =
      temp_file("ctl.json", R"({"A": [[-1]], "B": [[1]], "C": [[1]], "D": [[-2]]})");
  EXPECT_EQ(run_cli("stability " + neg + " " + ctl).code, 3);
  EXPECT_EQ(run_cli("classify " + ctl).code, 0);
}

TEST(CliTest, BeamAndSimulateCsv) {
  const CliRun modes = run_cli("--json beam modes --count 2");
  ASSERT_EQ(modes.code, 0);
  EXPECT_FALSE(Json::parse(modes.out).empty());
  const CliRun sim = run_cli("simulate " + kData + "/case_study_plant.json " + kData +
                          "/case_study_irc.json --t-end 1 --dt 0.5");
  ASSERT_EQ(sim.code, 0);
  EXPECT_EQ(sim.out.rfind("t,theta,Vs", 0), 0u) << sim.out;
}

}  // namespace
}  // namespace nifb
