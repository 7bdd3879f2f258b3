#pragma once

#include <vector>

#include "nifb/ltimodel.hpp"
#include "nifb/model_io.hpp"

namespace nifb {

/// Slewing beam clamped to a rotating hub, with a piezoelectric actuator and
/// sensor pair covering the whole span. Inputs (hub torque, actuator
/// voltage), outputs (hub angle, sensor voltage). Tip mass is neglected.
struct BeamParameters {
  double hub_inertia = 0.0348;      // N m s^2
  double length = 2.0;              // m
  double density = 2712.6;          // kg/m^3
  double area = 483.87e-6;          // m^2
  double youngs_modulus = 69e9;     // N/m^2
  double area_moment = 1.63e-9;     // m^4
  double k31 = -0.340;
  double capacitance = 68.35;       // uF/m^2
  double thickness = 3.05e-4;       // m
  double actuator_gain = 1.0;       // moment per volt, divided into EI
  double sensor_gain = 1.0;         // volts per radian of relative slope

  double mass_per_length() const { return density * area; }
  double flexural_rigidity() const { return youngs_modulus * area_moment; }

  /// Throws InvalidArgument unless every constant except k31 is positive.
  void validate() const;
};

BeamParameters beam_parameters_from_json(const Json& j);
Json beam_parameters_to_json(const BeamParameters& p);

struct BeamTransferSample {
  Complex s;
  MatrixXcd G;      // 2 x 2
  Complex D_value;  // characteristic function at s
};

/// Transfer matrix at s != 0 from the boundary-value problem of the beam
/// equation, with the span propagator in its exponential eigenbasis. Throws
/// SingularBoundarySystem at a root of the characteristic function.
BeamTransferSample beam_tf(const BeamParameters& p, Complex s);

/// Closed-form characteristic function; real on the imaginary axis, zero at s = 0.
Complex d_of_s(const BeamParameters& p, Complex s);

/// First `count` positive roots of w -> D(jw), bracketed on a grid of step
/// `step` and bisected to 1e-10 relative. Throws InsufficientRange.
std::vector<double> find_modal_roots(const BeamParameters& p, int count,
                                     double w_max, double step = 0.01);

struct ModalResidue {
  double omega0 = 0.0;
  MatrixXd K;            // lim (s - j w0) j G(s), real 2 x 2
  double min_eig = 0.0;  // of the symmetric part
  double asymmetry = 0.0;
  MatrixXd N;            // lim G(s) D(s) at j w0
  double dD_domega = 0.0;
};

/// Throws NotARoot when |D(j w0)| is not negligible.
ModalResidue modal_residue(const BeamParameters& p, double w0);

/// lim s^2 G(s) along s = eps > 0, by Richardson extrapolation.
MatrixXd beam_free_body_limit(const BeamParameters& p);

enum class KCalibration {
  kGeometricMean,  // match D at sqrt(p_n p_{n+1})
  kLowFrequency,   // match D as s -> 0 (recovers the exact double-pole gain)
};

struct BeamApproximation {
  ModalModel model;
  std::vector<double> roots;  // p_1 .. p_{n+1}
  double k = 0.0;
  double omega0 = 0.0;        // calibration frequency (0 for low-frequency)
};

/// n-mode truncation G2/s^2 + sum C_i/(s^2 + p_i^2) built by partial
/// fractions of N(s)/D_f(s), with D_f(s) = k s^2 prod (s^2 + p_i^2).
BeamApproximation finite_dim_approx(
    const BeamParameters& p, int n,
    KCalibration calibration = KCalibration::kGeometricMean);

struct ScanPoint {
  double omega = 0.0;
  double value = 0.0;
};

/// min eig of D'(w)^2 K(w) + gamma D(w)^2 I where K(w) = -N(w) / D'(w),
/// sampled on `omegas`; points within 1e-4 relative of a root are skipped.
std::vector<ScanPoint> emit_residue_scan(const BeamParameters& p, double gamma,
                                         const std::vector<double>& omegas);

}  // namespace nifb
