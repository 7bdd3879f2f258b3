// nifb: command-line front end for the NI free-body stability toolbox.

#include <cstdint>
#include <iomanip>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nifb/beamcase.hpp"
#include "nifb/error.hpp"
#include "nifb/freebody.hpp"
#include "nifb/model_io.hpp"
#include "nifb/montecarlo.hpp"
#include "nifb/niclass.hpp"
#include "nifb/report.hpp"
#include "nifb/simulate.hpp"

namespace {

using namespace nifb;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitPrecondition = 3;

struct Globals {
  std::optional<double> tol;
  bool json = false;
  bool csv = false;
};

VerdictOptions verdict_options(const Globals& g) {
  VerdictOptions o;
  if (g.tol) {
    o.boundary_rel = *g.tol;
    o.ni.cond2_rel = *g.tol;
  }
  return o;
}

bool is_input_error(ErrorCode c) {
  switch (c) {
    case ErrorCode::kParseError:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kDimensionMismatch:
    case ErrorCode::kNonSymmetric:
    case ErrorCode::kNotPSD:
    case ErrorCode::kNotPD:
      return true;
    default:
      return false;
  }
}

void print_matrix(std::ostream& os, const std::string& label, const MatrixXd& m) {
  Eigen::IOFormat fmt(8, 0, ", ", "\n", "    [", "]");
  os << "  " << label << " =\n" << m.format(fmt) << "\n";
}

BeamParameters beam_params(const std::string& path, double stiffness_scale) {
  BeamParameters p = path.empty() ? BeamParameters{}
                                  : beam_parameters_from_json(read_json_file(path));
  p.youngs_modulus *= stiffness_scale;
  p.validate();
  return p;
}

// ---------------------------------------------------------------------------

int cmd_classify(const Globals& g, const std::string& path, bool sni) {
  const StateSpaceModel m = load_model(path);
  const VerdictOptions o = verdict_options(g);
  if (sni) {
    const SniReport r = classify_sni(m, o.grid, o.ni);
    if (g.json) {
      std::cout << to_json(r).dump(2) << "\n";
    } else {
      std::cout << (r.is_sni ? "SNI" : "not SNI") << "\n";
      std::cout << "  poles in open left half-plane: " << (r.poles_pass ? "yes" : "no") << "\n";
      std::cout << "  frequency sign condition: " << (r.cond2_pass ? "pass" : "fail") << "\n";
    }
    return kExitOk;
  }
  const NiReport r = classify_ni(m, o.grid, o.ni);
  if (g.json) {
    std::cout << to_json(r).dump(2) << "\n";
  } else {
    std::cout << (r.is_ni ? "NI" : "not NI") << "\n";
    std::cout << "  no right-half-plane poles: " << (r.cond1_pass ? "pass" : "fail") << "\n";
    std::cout << "  frequency sign condition: " << (r.cond2_pass ? "pass" : "fail")
              << " (worst margin " << r.cond2_worst_margin << ")\n";
    std::cout << "  imaginary-axis residues: " << (r.cond3_pass ? "pass" : "fail") << "\n";
    for (const auto& rec : r.cond3_residues) {
      std::cout << "    w0 = " << rec.residue.omega0 << "  min eig " << rec.residue.min_eig
                << (rec.failure.empty() ? "" : "  " + rec.failure) << "\n";
    }
    std::cout << "  origin condition: " << (r.cond4_pass && r.cond4_higher_order ? "pass" : "fail")
              << "\n";
    for (const auto& n : r.notes) std::cout << "  note: " << n << "\n";
  }
  return kExitOk;
}

int cmd_laurent(const Globals& g, const std::string& path) {
  const LaurentResult L = laurent_coefficients(load_model(path));
  if (g.json) {
    std::cout << to_json(L).dump(2) << "\n";
    return kExitOk;
  }
  std::cout << "Laurent coefficients (block-diagonal realization)\n";
  print_matrix(std::cout, "G2", L.realization.G2);
  print_matrix(std::cout, "G1", L.realization.G1);
  print_matrix(std::cout, "G0", L.realization.G0);
  std::cout << "  relative disagreement with numeric limit: " << L.disagreement << "\n";
  return kExitOk;
}

int cmd_stability(const Globals& g, const std::string& plant,
                  const std::string& controller, bool force_mixed) {
  VerdictOptions o = verdict_options(g);
  o.force_mixed = force_mixed;
  const AnalysisReport rep =
      run_analysis(read_json_file(plant), read_json_file(controller), o);
  if (g.json) {
    std::cout << to_json(rep).dump(2) << "\n";
  } else {
    std::cout << summary_text(rep);
  }
  return rep.exit_code() == 3 ? kExitPrecondition : kExitOk;
}

int cmd_verify(const Globals& g, int count, std::uint64_t seed, unsigned threads) {
  const AgreementReport rep =
      montecarlo_agreement(count, seed, GeneratorSpec{}, verdict_options(g), threads);
  if (g.json) {
    Json cex = Json::array();
    for (const auto& c : rep.counterexamples) {
      cex.push_back({{"trial", c.trial},
                     {"family", to_string(c.family)},
                     {"verdict", to_json(c.verdict)}});
    }
    std::cout << Json{{"count", rep.count},
                      {"seed", seed},
                      {"applicable", rep.applicable},
                      {"agreed", rep.agreed},
                      {"agreement", rep.agreement()},
                      {"outcomes", rep.outcomes},
                      {"theorems", rep.theorems},
                      {"counterexamples", cex}}
                     .dump(2)
              << "\n";
  } else {
    std::cout << "trials " << rep.count << ", decisive " << rep.applicable
              << ", agreeing with eigenvalue check " << rep.agreed << " ("
              << 100.0 * rep.agreement() << "%)\n";
    for (const auto& [k, n] : rep.outcomes) std::cout << "  outcome " << k << ": " << n << "\n";
    for (const auto& [k, n] : rep.theorems) std::cout << "  test " << k << ": " << n << "\n";
    for (const auto& c : rep.counterexamples) {
      std::cout << "  DISAGREEMENT trial " << c.trial << " (" << to_string(c.family)
                << "): " << to_string(c.verdict.outcome) << "\n";
    }
  }
  return kExitOk;
}

int cmd_beam_modes(const Globals& g, const BeamParameters& p, int count) {
  double w_max = 100.0;
  std::vector<double> roots;
  for (;; w_max *= 2.0) {
    try {
      roots = find_modal_roots(p, count, w_max);
      break;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInsufficientRange || w_max > 1e7) throw;
    }
  }
  Json rows = Json::array();
  if (g.csv) std::cout << "n,omega,min_eig,max_eig,asymmetry\n";
  for (std::size_t i = 0; i < roots.size(); ++i) {
    const ModalResidue r = modal_residue(p, roots[i]);
    const double max_eig = symmetrized(r.K).trace() - r.min_eig;
    if (g.csv) {
      std::cout << std::setprecision(12) << i + 1 << "," << roots[i] << "," << r.min_eig
                << "," << max_eig << "," << r.asymmetry << "\n";
    } else if (g.json) {
      rows.push_back({{"n", i + 1},
                      {"omega", roots[i]},
                      {"K", matrix_to_json(r.K)},
                      {"min_eig", r.min_eig},
                      {"max_eig", max_eig},
                      {"asymmetry", r.asymmetry}});
    } else {
      std::cout << std::setw(3) << i + 1 << "  omega = " << std::setprecision(10)
                << std::setw(14) << roots[i] << "  residue eigenvalues "
                << std::setprecision(4) << r.min_eig << ", " << max_eig << "\n";
    }
  }
  if (g.json) std::cout << rows.dump(2) << "\n";
  return kExitOk;
}

int cmd_beam_approx(const Globals& g, const BeamParameters& p, int n,
                    const std::string& calibration) {
  KCalibration cal;
  if (calibration == "geometric") {
    cal = KCalibration::kGeometricMean;
  } else if (calibration == "low") {
    cal = KCalibration::kLowFrequency;
  } else {
    throw Error(ErrorCode::kInvalidArgument, "calibration must be 'geometric' or 'low'");
  }
  const BeamApproximation a = finite_dim_approx(p, n, cal);
  if (g.json) {
    std::cout << Json{{"modal", modal_to_json(a.model)},
                      {"k", a.k},
                      {"omega0", a.omega0},
                      {"roots", a.roots}}
                     .dump(2)
              << "\n";
    return kExitOk;
  }
  std::cout << n << "-mode approximation, k = " << a.k << ", calibrated at omega0 = "
            << a.omega0 << "\n";
  print_matrix(std::cout, "C0", *a.model.g2);
  for (std::size_t i = 0; i < a.model.modes.size(); ++i) {
    std::cout << "  p" << i + 1 << " = " << a.model.modes[i].p << "\n";
    print_matrix(std::cout, "C" + std::to_string(i + 1), a.model.modes[i].C);
  }
  return kExitOk;
}

int cmd_beam_scan(const Globals& g, const BeamParameters& p, double gamma,
                  double w_min, double w_max, int points) {
  if (points < 2 || !(w_max > w_min) || !(w_min > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "scan needs 0 < w_min < w_max and points >= 2");
  }
  std::vector<double> w;
  for (int i = 0; i < points; ++i) w.push_back(w_min + (w_max - w_min) * i / (points - 1));
  const auto scan = emit_residue_scan(p, gamma, w);
  if (g.json) {
    Json rows = Json::array();
    for (const auto& s : scan) rows.push_back({{"omega", s.omega}, {"value", s.value}});
    std::cout << rows.dump(2) << "\n";
  } else {
    std::cout << "omega,value\n" << std::setprecision(12);
    for (const auto& s : scan) std::cout << s.omega << "," << s.value << "\n";
  }
  return kExitOk;
}

int cmd_simulate(const Globals& g, const std::string& plant,
                 const std::string& controller, SimulationConfig cfg) {
  const SimulationResult r = step_response(load_model(plant), load_model(controller), cfg);
  if (g.json) {
    std::cout << Json{{"t", r.t},
                      {"theta", r.theta},
                      {"Vs", r.Vs},
                      {"wiring", to_string(cfg.wiring)},
                      {"wiring_version", r.wiring_version},
                      {"dt", cfg.dt},
                      {"hurwitz", r.hurwitz},
                      {"closed_loop_abscissa", r.closed_loop_abscissa},
                      {"diverged", r.diverged}}
                     .dump(2)
              << "\n";
  } else {
    std::cout << "t,theta,Vs\n" << std::setprecision(12);
    for (std::size_t k = 0; k < r.t.size(); ++k) {
      std::cout << r.t[k] << "," << r.theta[k] << ","
                << (r.Vs.empty() ? 0.0 : r.Vs[k]) << "\n";
    }
  }
  if (r.diverged || !r.hurwitz) {
    std::cerr << "warning: closed loop is not Hurwitz (abscissa "
              << r.closed_loop_abscissa << ")" << (r.diverged ? ", trajectory diverged" : "")
              << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stability analysis of negative-imaginary systems with free-body dynamics"};
  app.require_subcommand(1);
  Globals g;
  double tol = 0.0;
  auto* tol_opt = app.add_option("--tol", tol, "Relative tolerance for sign tests and boundary bands")
                      ->check(CLI::PositiveNumber);
  app.add_flag("--json", g.json, "Emit JSON");
  app.add_flag("--csv", g.csv, "Emit CSV where the output is tabular");

  std::string path, plant, controller;
  bool sni = false, force_mixed = false;

  auto* classify = app.add_subcommand("classify", "Check the NI (or SNI) conditions of a model");
  classify->add_option("model", path, "Model JSON")->required();
  classify->add_flag("--sni", sni, "Check strict NI instead");

  auto* laurent = app.add_subcommand("laurent", "Laurent coefficients G2, G1, G0 at s = 0");
  laurent->add_option("model", path, "Model JSON")->required();

  auto* stability = app.add_subcommand("stability", "Closed-loop stability verdict");
  stability->add_option("plant", plant, "Plant model JSON")->required();
  stability->add_option("controller", controller, "Controller model JSON")->required();
  stability->add_flag("--force-mixed", force_mixed,
                      "Route G1 = 0 plants through the general G1/G2 test");

  int count = 200;
  std::uint64_t seed = 42;
  unsigned threads = 0;
  auto* verify = app.add_subcommand("verify", "Random agreement check against closed-loop eigenvalues");
  verify->add_option("--count", count, "Number of trials")->check(CLI::NonNegativeNumber);
  verify->add_option("--seed", seed, "Random seed");
  verify->add_option("--threads", threads, "Worker threads (0 = all cores)");

  std::string params_path;
  double stiffness_scale = 1.0;
  auto* beam = app.add_subcommand("beam", "Flexible slewing beam case study");
  beam->require_subcommand(1);
  beam->add_option("--params", params_path, "Beam parameter JSON (defaults built in)");
  beam->add_option("--stiffness-scale", stiffness_scale, "Multiply Young's modulus")
      ->check(CLI::PositiveNumber);
  int mode_count = 10;
  auto* modes = beam->add_subcommand("modes", "Modal roots and residue eigenvalues");
  modes->add_option("--count", mode_count, "Number of roots")->check(CLI::PositiveNumber);
  int n_modes = 1;
  std::string calibration = "geometric";
  auto* approx = beam->add_subcommand("approx", "Finite-dimensional modal approximation");
  approx->add_option("-n,--modes", n_modes, "Retained modes")->check(CLI::PositiveNumber);
  approx->add_option("--calibration", calibration, "Gain calibration: geometric or low");
  double gamma = 1.0, w_lo = 0.1, w_hi = 260.0;
  int points = 2000;
  auto* scan = beam->add_subcommand("scan", "Residue-positivity scan as CSV (omega, value)");
  scan->add_option("--gamma", gamma, "Weight of the D^2 term");
  scan->add_option("--w-min", w_lo, "Lowest frequency");
  scan->add_option("--w-max", w_hi, "Highest frequency");
  scan->add_option("--points", points, "Number of samples");

  SimulationConfig sim;
  std::string wiring = to_string(sim.wiring);
  auto* simulate = app.add_subcommand("simulate", "Closed-loop step response as CSV (t, theta, Vs)");
  simulate->add_option("plant", plant, "Plant model JSON")->required();
  simulate->add_option("controller", controller, "Controller model JSON")->required();
  simulate->add_option("--t-end", sim.t_end, "Final time");
  simulate->add_option("--dt", sim.dt, "Sample step")->check(CLI::PositiveNumber);
  simulate->add_option("--reference", sim.reference, "Step height");
  simulate->add_option("--wiring", wiring,
                       "output_error, channel_replacement or plant_input");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }
  if (*tol_opt) g.tol = tol;

  try {
    if (*classify) return cmd_classify(g, path, sni);
    if (*laurent) return cmd_laurent(g, path);
    if (*stability) return cmd_stability(g, plant, controller, force_mixed);
    if (*verify) return cmd_verify(g, count, seed, threads);
    if (*beam) {
      const BeamParameters p = beam_params(params_path, stiffness_scale);
      if (*modes) return cmd_beam_modes(g, p, mode_count);
      if (*approx) return cmd_beam_approx(g, p, n_modes, calibration);
      if (*scan) return cmd_beam_scan(g, p, gamma, w_lo, w_hi, points);
    }
    if (*simulate) {
      sim.wiring = reference_wiring_from_string(wiring);
      return cmd_simulate(g, plant, controller, sim);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_input_error(e.code()) ? kExitInput : kExitPrecondition;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitOk;
}
