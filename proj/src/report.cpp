#include "nifb/report.hpp"

#include <cmath>
#include <sstream>

#include "nifb/error.hpp"

namespace nifb {

namespace {

Json complex_to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

// NaN and infinities are not representable in JSON.
Json number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Json cmatrix_to_json(const MatrixXcd& m) {
  Json re = Json::array(), im = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json rr = Json::array(), ri = Json::array();
    for (Index j = 0; j < m.cols(); ++j) {
      rr.push_back(m(i, j).real());
      ri.push_back(m(i, j).imag());
    }
    re.push_back(rr);
    im.push_back(ri);
  }
  return Json{{"re", re}, {"im", im}};
}

Json samples_to_json(const std::vector<FrequencySample>& s) {
  Json out = Json::array();
  for (const auto& x : s) {
    out.push_back({{"omega", x.omega}, {"min_eig", x.min_eig}, {"tol", x.tol}});
  }
  return out;
}

}  // namespace

Json to_json(const NiReport& r) {
  Json poles = Json::array();
  for (auto z : r.cond1_rhp_poles) poles.push_back(complex_to_json(z));
  Json residues = Json::array();
  for (const auto& rec : r.cond3_residues) {
    Json j{{"omega0", rec.residue.omega0},
           {"pass", rec.pass},
           {"min_eig", rec.residue.min_eig},
           {"hermitian_defect", rec.residue.hermitian_defect},
           {"multiplicity", rec.residue.multiplicity}};
    if (rec.residue.K.size() > 0) j["K"] = cmatrix_to_json(rec.residue.K);
    if (!rec.failure.empty()) j["failure"] = rec.failure;
    residues.push_back(j);
  }
  Json out{{"is_ni", r.is_ni},
           {"rhp_poles", {{"pass", r.cond1_pass}, {"poles", poles}}},
           {"frequency_sign",
            {{"pass", r.cond2_pass},
             {"worst_margin", number(r.cond2_worst_margin)},
             {"samples", samples_to_json(r.cond2_min_eig_by_freq)}}},
           {"axis_residues", {{"pass", r.cond3_pass}, {"residues", residues}}},
           {"origin",
            {{"pass", r.cond4_pass},
             {"jordan_ok", r.cond4_higher_order},
             {"asymmetry", number(r.cond4_asymmetry)}}},
           {"imaginary_poles", r.imaginary_poles},
           {"notes", r.notes}};
  if (r.cond4_G2.size() > 0) out["origin"]["G2"] = matrix_to_json(r.cond4_G2);
  return out;
}

Json to_json(const SniReport& r) {
  Json poles = Json::array();
  for (auto z : r.closed_rhp_poles) poles.push_back(complex_to_json(z));
  return Json{{"is_sni", r.is_sni},
              {"poles_pass", r.poles_pass},
              {"closed_rhp_poles", poles},
              {"frequency_sign_pass", r.cond2_pass},
              {"samples", samples_to_json(r.cond2_min_eig_by_freq)}};
}

Json to_json(const LaurentCoefficients& L) {
  return Json{{"method", to_string(L.method)},
              {"G0", matrix_to_json(L.G0)},
              {"G1", matrix_to_json(L.G1)},
              {"G2", matrix_to_json(L.G2)}};
}

Json to_json(const LaurentResult& L) {
  return Json{{"realization", to_json(L.realization)},
              {"numeric", to_json(L.numeric)},
              {"disagreement", number(L.disagreement)}};
}

Json to_json(const StabilityVerdict& v) {
  Json cv = Json::object(), tol = Json::object();
  for (const auto& [k, x] : v.condition_values) cv[k] = number(x);
  for (const auto& [k, x] : v.tolerances) tol[k] = number(x);
  Json out{{"outcome", to_string(v.outcome)},
           {"theorem", to_string(v.theorem)},
           {"branch", to_string(v.branch)},
           {"condition_values", cv},
           {"tolerances", tol},
           {"reason", v.reason}};
  if (v.laurent) out["laurent"] = to_json(*v.laurent);
  Json oracle = Json::object();
  oracle["ran"] = v.oracle_stable.has_value();
  if (v.oracle_stable) oracle["stable"] = *v.oracle_stable;
  if (v.oracle_abscissa) oracle["abscissa"] = number(*v.oracle_abscissa);
  if (v.oracle_agrees) oracle["agrees"] = *v.oracle_agrees;
  out["oracle"] = oracle;
  return out;
}

Json to_json(const AnalysisReport& r) {
  Json out{{"schema_version", kReportSchemaVersion},
           {"tool_version", kToolVersion},
           {"plant", r.plant_name},
           {"controller", r.controller_name},
           {"verdict", to_json(r.verdict)},
           {"notes", r.notes}};
  if (r.ni) out["ni_report"] = to_json(*r.ni);
  if (r.sni) out["sni_report"] = to_json(*r.sni);
  if (r.laurent) out["laurent"] = to_json(*r.laurent);
  return out;
}

AnalysisReport run_analysis(const StateSpaceModel& plant,
                            const StateSpaceModel& controller,
                            const VerdictOptions& opts) {
  AnalysisReport rep;
  rep.plant_name = plant.name();
  rep.controller_name = controller.name();
  try {
    rep.ni = classify_ni(plant, opts.grid, opts.ni);
  } catch (const Error& e) {
    rep.notes.push_back(std::string("plant classification: ") + e.what());
  }
  try {
    rep.sni = classify_sni(controller, opts.grid, opts.ni);
  } catch (const Error& e) {
    rep.notes.push_back(std::string("controller classification: ") + e.what());
  }
  if (plant.strictly_proper()) {
    try {
      rep.laurent = laurent_coefficients(plant);
    } catch (const Error& e) {
      rep.notes.push_back(std::string("laurent: ") + e.what());
    }
  }
  VerdictOptions o = opts;
  o.run_oracle = true;
  rep.verdict = stability_verdict(plant, controller, o);
  return rep;
}

AnalysisReport run_analysis(const Json& plant, const Json& controller,
                            const VerdictOptions& opts) {
  StateSpaceModel G = model_from_json(plant);
  StateSpaceModel Gbar = model_from_json(controller);
  if (G.name().empty()) G = G.with_name("plant");
  if (Gbar.name().empty()) Gbar = Gbar.with_name("controller");
  return run_analysis(G, Gbar, opts);
}

std::string summary_text(const AnalysisReport& r) {
  std::ostringstream os;
  os << "plant " << r.plant_name << ", controller " << r.controller_name << "\n";
  if (r.ni) os << "  plant NI: " << (r.ni->is_ni ? "yes" : "no") << "\n";
  if (r.sni) os << "  controller SNI: " << (r.sni->is_sni ? "yes" : "no") << "\n";
  const auto& v = r.verdict;
  os << "  outcome: " << to_string(v.outcome) << " (" << to_string(v.theorem)
     << ", " << to_string(v.branch) << ")\n";
  for (const auto& [k, x] : v.condition_values) os << "    " << k << " = " << x << "\n";
  if (!v.reason.empty()) os << "  reason: " << v.reason << "\n";
  if (v.oracle_stable) {
    os << "  eigenvalue check: " << (*v.oracle_stable ? "stable" : "unstable");
    if (v.oracle_abscissa) os << " (abscissa " << *v.oracle_abscissa << ")";
    if (v.oracle_agrees) os << (*v.oracle_agrees ? ", agrees" : ", DISAGREES");
    os << "\n";
  }
  for (const auto& n : r.notes) os << "  note: " << n << "\n";
  return os.str();
}

}  // namespace nifb
