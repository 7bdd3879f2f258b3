#pragma once

#include "nifb/ltimodel.hpp"

namespace nifb {

/// Integral resonant controller (sI + Gamma Phi)^-1 Gamma - Delta.
struct IrcController {
  MatrixXd Gamma;  // symmetric PD
  MatrixXd Phi;    // symmetric PD
  MatrixXd Delta;  // symmetric
  StateSpaceModel realization;

  /// Phi^-1 - Delta.
  MatrixXd dc_gain() const;
};

/// Validates the parameters and builds the realization
/// (A = -Gamma Phi, B = Gamma, C = I, D = -Delta).
/// Throws NotPD or NonSymmetric naming the offending matrix.
IrcController make_irc(const MatrixXd& Gamma, const MatrixXd& Phi,
                       const MatrixXd& Delta);

}  // namespace nifb
