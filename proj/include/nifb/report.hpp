#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nifb/freebody.hpp"
#include "nifb/model_io.hpp"
#include "nifb/niclass.hpp"

namespace nifb {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kReportSchemaVersion = "1";

struct AnalysisReport {
  std::string plant_name;
  std::string controller_name;
  std::optional<NiReport> ni;
  std::optional<SniReport> sni;
  std::optional<LaurentResult> laurent;
  StabilityVerdict verdict;
  std::vector<std::string> notes;

  /// 3 when a precondition failed, else 0.
  int exit_code() const {
    return verdict.outcome == Outcome::kPreconditionFailed ? 3 : 0;
  }
};

/// classify -> laurent -> verdict -> oracle. Parse and validation errors
/// propagate; analysis failures end up in the verdict.
AnalysisReport run_analysis(const Json& plant, const Json& controller,
                            const VerdictOptions& opts = {});
AnalysisReport run_analysis(const StateSpaceModel& plant,
                            const StateSpaceModel& controller,
                            const VerdictOptions& opts = {});

Json to_json(const NiReport& r);
Json to_json(const SniReport& r);
Json to_json(const LaurentCoefficients& L);
Json to_json(const LaurentResult& L);
Json to_json(const StabilityVerdict& v);
Json to_json(const AnalysisReport& r);

/// Human-readable one-screen summary.
std::string summary_text(const AnalysisReport& r);

}  // namespace nifb
