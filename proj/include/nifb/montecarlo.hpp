#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "nifb/freebody.hpp"
#include "nifb/ircsynth.hpp"

namespace nifb {

enum class PlantFamily {
  kNoFreeBody,        // modes only
  kUndampedFreeBody,  // G2 != 0, G1 = 0
  kMixedFreeBody,     // G2 != 0, G1 != 0
  kDampedFreeBody,    // G2 = 0, G1 != 0
};
const char* to_string(PlantFamily f);

struct GeneratorSpec {
  std::vector<PlantFamily> families = {
      PlantFamily::kNoFreeBody, PlantFamily::kUndampedFreeBody,
      PlantFamily::kMixedFreeBody, PlantFamily::kDampedFreeBody};
  int ports_max = 3;
  int modes_max = 3;
  double p_min = 0.5, p_max = 5.0;
  double shortcut_prob = 0.25;   // modes confined to the range of the free-body gain
  double full_rank_prob = 0.2;   // full-rank G2 or invertible G1
  bool scramble = true;          // random well-conditioned state transform
};

struct TrialCase {
  PlantFamily family = PlantFamily::kNoFreeBody;
  ModalModel modal;
  StateSpaceModel plant;
  IrcController controller;
};

/// Random NI plant (modal form with symmetric PSD residues and PSD free-body
/// terms, optionally scrambled) paired with a random IRC controller.
TrialCase generate_trial(std::mt19937_64& rng, PlantFamily family,
                         const GeneratorSpec& spec = {});

/// Deterministic per-trial generator: depends only on (seed, trial).
TrialCase generate_trial(std::uint64_t seed, int trial,
                         const GeneratorSpec& spec = {});

struct Counterexample {
  int trial = 0;
  PlantFamily family = PlantFamily::kNoFreeBody;
  StabilityVerdict verdict;
};

struct AgreementReport {
  int count = 0;
  int applicable = 0;  // decisive verdicts
  int agreed = 0;
  std::map<std::string, int> outcomes;
  std::map<std::string, int> theorems;
  std::vector<Counterexample> counterexamples;

  double agreement() const {
    return applicable == 0 ? 1.0 : static_cast<double>(agreed) / applicable;
  }
};

/// Runs `count` trials (families taken round-robin) and compares each
/// decisive verdict with the closed-loop eigenvalue oracle. `threads` = 0
/// picks the hardware concurrency; results do not depend on it.
AgreementReport montecarlo_agreement(int count, std::uint64_t seed,
                                     const GeneratorSpec& spec = {},
                                     const VerdictOptions& opts = {},
                                     unsigned threads = 0);

}  // namespace nifb
