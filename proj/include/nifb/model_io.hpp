#pragma once

#include <string>

#include <json.hpp>

#include "nifb/ltimodel.hpp"

namespace nifb {

using Json = nlohmann::json;

/// Row-major array of arrays of finite numbers. Ragged rows, non-numbers and
/// non-finite values throw ParseError naming `where`.
MatrixXd matrix_from_json(const Json& j, const std::string& where);
Json matrix_to_json(const MatrixXd& m);

/// Accepts one of
///   {"A": .., "B": .., "C": .., "D": .., "name": ..}   (D optional, zero)
///   {"irc": {"Gamma": .., "Phi": .., "Delta": ..}}
///   {"modal": {"G2": .., "G1": .., "modes": [{"p": .., "C": ..}, ..]}}
StateSpaceModel model_from_json(const Json& j);
Json model_to_json(const StateSpaceModel& model);

ModalModel modal_from_json(const Json& j);
Json modal_to_json(const ModalModel& model);

/// Parses a file; syntax errors are reported with line and column.
Json read_json_file(const std::string& path);
Json parse_json_text(const std::string& text, const std::string& source);

StateSpaceModel load_model(const std::string& path);

}  // namespace nifb
