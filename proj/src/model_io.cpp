#include "nifb/model_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "nifb/error.hpp"
#include "nifb/ircsynth.hpp"

namespace nifb {

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw Error(ErrorCode::kParseError, msg);
}

const Json& require(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    fail(where + ": missing key \"" + key + "\"");
  }
  return obj.at(key);
}

std::pair<int, int> line_col(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

MatrixXd matrix_from_json(const Json& j, const std::string& where) {
  if (!j.is_array()) fail(where + ": expected an array of rows");
  const Index rows = static_cast<Index>(j.size());
  if (rows == 0) return MatrixXd(0, 0);
  if (!j[0].is_array()) fail(where + ": row 0 is not an array");
  const Index cols = static_cast<Index>(j[0].size());
  MatrixXd m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const Json& row = j[r];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
      std::ostringstream os;
      os << where << ": row " << r << " has "
         << (row.is_array() ? std::to_string(row.size()) : std::string("no"))
         << " entries, expected " << cols;
      fail(os.str());
    }
    for (Index c = 0; c < cols; ++c) {
      const Json& v = row[c];
      if (!v.is_number()) {
        std::ostringstream os;
        os << where << "[" << r << "][" << c << "] is not a number";
        fail(os.str());
      }
      const double x = v.get<double>();
      if (!std::isfinite(x)) {
        std::ostringstream os;
        os << where << "[" << r << "][" << c << "] is not finite";
        fail(os.str());
      }
      m(r, c) = x;
    }
  }
  return m;
}

Json matrix_to_json(const MatrixXd& m) {
  Json out = Json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

ModalModel modal_from_json(const Json& j) {
  if (!j.is_object()) fail("modal: expected an object");
  ModalModel mm;
  Index m = -1;
  auto set_ports = [&](Index k, const std::string& where) {
    if (m < 0) m = k;
    if (k != m) fail(where + ": inconsistent port count");
  };
  if (j.contains("G2")) {
    mm.g2 = matrix_from_json(j["G2"], "modal.G2");
    set_ports(mm.g2->rows(), "modal.G2");
  }
  if (j.contains("G1")) {
    mm.g1 = matrix_from_json(j["G1"], "modal.G1");
    set_ports(mm.g1->rows(), "modal.G1");
  }
  if (j.contains("modes")) {
    const Json& modes = j["modes"];
    if (!modes.is_array()) fail("modal.modes: expected an array");
    for (std::size_t i = 0; i < modes.size(); ++i) {
      const std::string where = "modal.modes[" + std::to_string(i) + "]";
      const Json& p = require(modes[i], "p", where);
      if (!p.is_number() || !std::isfinite(p.get<double>())) {
        fail(where + ".p: expected a finite number");
      }
      ModalTerm t;
      t.p = p.get<double>();
      t.C = matrix_from_json(require(modes[i], "C", where), where + ".C");
      set_ports(t.C.rows(), where + ".C");
      mm.modes.push_back(std::move(t));
    }
  }
  if (m <= 0) fail("modal: no coefficient matrices given");
  mm.ports = m;
  return mm;
}

Json modal_to_json(const ModalModel& model) {
  Json out;
  if (model.g2) out["G2"] = matrix_to_json(*model.g2);
  if (model.g1) out["G1"] = matrix_to_json(*model.g1);
  out["modes"] = Json::array();
  for (const auto& t : model.modes) {
    out["modes"].push_back({{"p", t.p}, {"C", matrix_to_json(t.C)}});
  }
  return out;
}

StateSpaceModel model_from_json(const Json& j) {
  if (!j.is_object()) fail("model: expected a JSON object");
  const std::string name =
      j.contains("name") && j["name"].is_string() ? j["name"].get<std::string>()
                                                  : std::string();
  if (j.contains("irc")) {
    const Json& p = j["irc"];
    const IrcController irc =
        make_irc(matrix_from_json(require(p, "Gamma", "irc"), "irc.Gamma"),
                 matrix_from_json(require(p, "Phi", "irc"), "irc.Phi"),
                 matrix_from_json(require(p, "Delta", "irc"), "irc.Delta"));
    return irc.realization.with_name(name.empty() ? "irc" : name);
  }
  if (j.contains("modal")) {
    return modal_to_ss(modal_from_json(j["modal"])).with_name(name);
  }
  MatrixXd A = matrix_from_json(require(j, "A", "model"), "A");
  MatrixXd B = matrix_from_json(require(j, "B", "model"), "B");
  MatrixXd C = matrix_from_json(require(j, "C", "model"), "C");
  MatrixXd D;
  if (j.contains("D")) {
    D = matrix_from_json(j["D"], "D");
  } else {
    const Index m = C.rows() > 0 ? C.rows() : B.cols();
    D = MatrixXd::Zero(m, m);
  }
  if (A.size() == 0) {
    A.resize(0, 0);
    B.resize(0, D.rows());
    C.resize(D.rows(), 0);
  }
  try {
    return StateSpaceModel(A, B, C, D, name);
  } catch (const Error& e) {
    fail(std::string("model: ") + e.what());
  }
}

Json model_to_json(const StateSpaceModel& model) {
  Json out;
  if (!model.name().empty()) out["name"] = model.name();
  out["A"] = matrix_to_json(model.A());
  out["B"] = matrix_to_json(model.B());
  out["C"] = matrix_to_json(model.C());
  out["D"] = matrix_to_json(model.D());
  return out;
}

Json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte);
    std::ostringstream os;
    os << source << ":" << line << ":" << col << ": " << e.what();
    fail(os.str());
  }
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_json_text(buf.str(), path);
}

StateSpaceModel load_model(const std::string& path) {
  return model_from_json(read_json_file(path));
}

}  // namespace nifb
