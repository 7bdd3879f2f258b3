#pragma once

#include <string>
#include <vector>

#include "nifb/ltimodel.hpp"

namespace nifb {

/// Frequency sweep used for the frequency-domain sign conditions. A grid can
/// refute a sign condition but never prove it for all frequencies.
struct FrequencyGrid {
  double w_min = 1e-3;
  double w_max = 1e4;
  int points = 400;          // log-spaced
  int bracket_points = 8;    // extra samples around each imaginary-axis pole
  double guard_rel = 1e-4;   // samples closer than guard_rel * w0 are dropped

  /// Sorted sample frequencies avoiding the guard bands around `poles`.
  std::vector<double> frequencies(const std::vector<double>& poles = {}) const;
};

struct NiTolerances {
  double cond2_rel = 1e-7;     // min eig >= -cond2_rel * (1 + ||G(jw)||)
  double sni_floor = 1e-9;     // strict positivity threshold
  double axis_rel = 1e-7;      // |Re lambda| <= axis_rel * max(1, ||A||) is on the axis
  double hermitian_rel = 1e-6; // ||K - K^*|| <= hermitian_rel * ||K||
  double residue_rel = 1e-7;   // residue min eig >= -residue_rel * (1 + ||K||)
  double hurwitz_margin = 1e-8;
};

struct FrequencySample {
  double omega = 0.0;
  double min_eig = 0.0;
  double tol = 0.0;
};

struct ResidueResult {
  double omega0 = 0.0;
  MatrixXcd K;                // lim (s - j w0) j G(s)
  double min_eig = 0.0;       // of the Hermitian part
  double hermitian_defect = 0.0;
  Index multiplicity = 0;     // algebraic multiplicity of the eigenvalue j w0
};

struct ResidueRecord {
  ResidueResult residue;
  bool pass = false;
  std::string failure;        // empty unless the residue could not be formed
};

struct NiReport {
  bool is_ni = false;

  bool cond1_pass = false;
  std::vector<Complex> cond1_rhp_poles;

  bool cond2_pass = false;
  std::vector<FrequencySample> cond2_min_eig_by_freq;
  double cond2_worst_margin = 0.0;  // min over samples of (min_eig + tol)

  bool cond3_pass = false;
  std::vector<ResidueRecord> cond3_residues;

  bool cond4_pass = false;
  MatrixXd cond4_G2;
  Definiteness cond4_definiteness;
  double cond4_asymmetry = 0.0;
  bool cond4_higher_order = true;  // false when an origin Jordan block has size >= 3

  std::vector<double> imaginary_poles;  // distinct w0 > 0
  std::vector<std::string> notes;
};

struct SniReport {
  bool is_sni = false;
  bool poles_pass = false;
  std::vector<Complex> closed_rhp_poles;  // Re >= -margin
  bool cond2_pass = false;
  std::vector<FrequencySample> cond2_min_eig_by_freq;
};

/// Residue of j G(s) at the imaginary-axis pole j w0. A repeated eigenvalue is
/// accepted when it is semisimple (the transfer function then has a simple
/// pole); defective clusters throw NotSimple.
ResidueResult imaginary_axis_residue(const StateSpaceModel& model, double w0,
                                     const NiTolerances& tol = {});

/// Distinct imaginary-axis pole frequencies w0 > 0 of the state matrix.
std::vector<double> imaginary_axis_poles(const MatrixXd& A,
                                         double axis_rel = 1e-7);

/// Requires a minimal realization (throws NotMinimal).
NiReport classify_ni(const StateSpaceModel& model,
                     const FrequencyGrid& grid = {},
                     const NiTolerances& tol = {});

SniReport classify_sni(const StateSpaceModel& model,
                       const FrequencyGrid& grid = {},
                       const NiTolerances& tol = {});

/// j (G - G^*) as a Hermitian matrix.
MatrixXcd imaginary_part_form(const MatrixXcd& G);

/// Smallest eigenvalue of the Hermitian part of a complex matrix.
double hermitian_min_eig(const MatrixXcd& H);

}  // namespace nifb
