#pragma once

#include <string>
#include <vector>

#include "nifb/ltimodel.hpp"

namespace nifb {

/// Where the scalar reference r enters the positive-feedback loop
/// u = Gbar(uc). Channel 1 is the hub angle.
enum class ReferenceWiring {
  kOutputError,        // uc = y - e1 r  (default: regulates theta towards r)
  kChannelReplacement, // uc = y + e1 (r - theta), theta feedback replaced by r
  kPlantInput,         // uc = y, plant input u + e1 r
};
const char* to_string(ReferenceWiring w);
ReferenceWiring reference_wiring_from_string(const std::string& name);

struct SimulationConfig {
  ReferenceWiring wiring = ReferenceWiring::kOutputError;
  double t_end = 10.0;
  double dt = 1e-2;
  double reference = 1.0;  // step height
  double divergence_bound = 1e12;
};

struct SimulationResult {
  std::vector<double> t;
  std::vector<double> theta;  // output channel 1
  std::vector<double> Vs;     // output channel 2 (empty for single-port loops)
  MatrixXd outputs;           // samples x ports
  SimulationConfig config;
  double closed_loop_abscissa = 0.0;
  bool hurwitz = false;
  bool diverged = false;      // state norm crossed divergence_bound, run stopped
  std::string wiring_version = "1";
};

/// Closed-loop state and reference-input matrices for the chosen wiring,
/// plant states first. Throws IllPosed.
struct ReferenceLoop {
  MatrixXd A, B, C, D;  // x' = A x + B r, y = C x + D r
};
ReferenceLoop reference_loop(const StateSpaceModel& G,
                             const StateSpaceModel& Gbar,
                             ReferenceWiring wiring);

/// Step response from rest by exact zero-order-hold discretization of the
/// closed loop. t_end / dt is rounded to a whole number of steps.
SimulationResult step_response(const StateSpaceModel& G,
                               const StateSpaceModel& Gbar,
                               const SimulationConfig& config = {});

}  // namespace nifb
