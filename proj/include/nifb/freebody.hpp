#pragma once

#include <map>
#include <optional>
#include <string>

#include "nifb/ltimodel.hpp"
#include "nifb/niclass.hpp"

namespace nifb {

/// Realization split into a nonsingular block, a zero block (single poles at
/// the origin) and k nilpotent pairs [[0, I], [0, 0]] (double poles at the
/// origin). States are ordered [x1; x2; x3a; x3b].
struct BlockDiagonalRealization {
  MatrixXd A1, B1, C1;
  MatrixXd B2, C2;
  MatrixXd B3a, B3b, C3a, C3b;
  MatrixXd T;  // original state = T * block state
  double cond_T = 1.0;
  StateSpaceModel original;

  Index n1() const { return A1.rows(); }
  Index n2() const { return B2.rows(); }
  Index k() const { return B3a.rows(); }

  /// The block-form realization as a model.
  StateSpaceModel assembled() const;
};

inline constexpr double kMaxTransformCond = 1e8;

/// Throws NotStrictlyProper, NotMinimal, JordanBlockTooLarge,
/// IllConditionedTransform or NumericalBreakdown.
BlockDiagonalRealization to_block_diagonal(const StateSpaceModel& model,
                                           double max_cond = kMaxTransformCond);

enum class LaurentMethod { kRealization, kNumericLimit };
const char* to_string(LaurentMethod method);

/// Leading coefficients of G(s) = G2/s^2 + G1/s + G0 + O(s).
struct LaurentCoefficients {
  MatrixXd G0, G1, G2;
  LaurentMethod method = LaurentMethod::kRealization;
};

struct LaurentResult {
  LaurentCoefficients realization;
  LaurentCoefficients numeric;
  double disagreement = 0.0;  // max_k ||G_k^R - G_k^N|| / scale
};

/// Closed-form coefficients from the block-diagonal realization.
LaurentCoefficients laurent_from_realization(const BlockDiagonalRealization& r);

/// Cauchy integral of s^2 G(s) on a circle inside the nearest nonzero pole.
/// Throws LimitDivergent when two contour radii disagree.
LaurentCoefficients laurent_numeric_limit(const StateSpaceModel& model);

/// Both methods; `disagreement` records how well they match.
LaurentResult laurent_coefficients(const StateSpaceModel& model);

/// X - X Y (Y^T X Y)^-1 Y^T X. Throws SingularInner.
MatrixXd projector_p(const MatrixXd& X, const MatrixXd& Y);

/// Basis matrix F whose range is G1 N(G2) + R(G2), built from the SVD of the
/// Hankel block [[G1, G2], [G2, 0]]. Throws G2Zero.
MatrixXd build_f_matrix(const LaurentCoefficients& L,
                        std::optional<double> rank_tol = std::nullopt);

// ---------------------------------------------------------------------------

enum class Outcome { kStable, kUnstable, kInconclusive, kPreconditionFailed, kBoundary };
enum class TheoremUsed {
  kNone,
  kMixedFreeBody,              // G2 != 0, G1 != 0
  kUndampedFreeBody,           // G1 = 0, G2 != 0, general
  kUndampedFreeBodyNullspace,  // G1 = 0, N(G2) in N(G0^T)
  kDampedFreeBody,             // G2 = 0, G1 != 0, general
  kDampedFreeBodyNullspace,    // G2 = 0, N(G1^T) in N(G0^T)
  kFullRankFreeBody,           // G2 > 0 or G1 invertible
  kDcGain,                     // no poles at the origin
};
enum class Branch { kNone, kPSD, kNSD, kNullspaceShortcut, kInvertible };

const char* to_string(Outcome o);
const char* to_string(TheoremUsed t);
const char* to_string(Branch b);

struct VerdictOptions {
  FrequencyGrid grid;
  NiTolerances ni;
  double zero_rel = 1e-8;        // ||Gi|| <= zero_rel * (1 + ||G0||) counts as zero
  double boundary_rel = 1e-7;    // strict inequalities closer than this are Boundary
  double rank_rel = 1e-9;        // rank threshold relative to the Laurent scale
  double containment_tol = 1e-8;
  double hurwitz_margin = 1e-8;
  bool check_preconditions = true;
  bool run_oracle = true;
  bool force_mixed = false;      // send G1 = 0 plants through the general G1/G2 test
  std::optional<unsigned long long> gauge_seed;  // re-gauge J, F, F1
};

struct StabilityVerdict {
  Outcome outcome = Outcome::kInconclusive;
  TheoremUsed theorem = TheoremUsed::kNone;
  Branch branch = Branch::kNone;
  std::map<std::string, double> condition_values;
  std::map<std::string, double> tolerances;
  std::string reason;
  std::optional<LaurentCoefficients> laurent;
  std::optional<bool> oracle_stable;
  std::optional<double> oracle_abscissa;
  std::optional<bool> oracle_agrees;

  bool decisive() const {
    return outcome == Outcome::kStable || outcome == Outcome::kUnstable;
  }
};

/// Dispatches to the applicable free-body stability test and, unless
/// disabled, compares the outcome with the closed-loop eigenvalue oracle.
StabilityVerdict stability_verdict(const StateSpaceModel& G,
                                   const StateSpaceModel& Gbar,
                                   const VerdictOptions& opts = {});

/// Theorem-free check: the interconnection matrix is Hurwitz.
bool direct_stability(const StateSpaceModel& G, const StateSpaceModel& Gbar,
                      double margin = 1e-8);

}  // namespace nifb
