#include "nifb/ircsynth.hpp"

#include <sstream>

#include "nifb/error.hpp"

namespace nifb {

namespace {

MatrixXd checked_symmetric(const MatrixXd& m, const char* name) {
  try {
    return symmetrized(m);
  } catch (const Error& e) {
    throw Error(e.code(), std::string(name) + ": " + e.what());
  }
}

void require_pd(const MatrixXd& m, const char* name) {
  const Definiteness d = classify_definiteness(m);
  if (!d.is_pd()) {
    std::ostringstream os;
    os << name << " is not positive definite (min eigenvalue " << d.min_eig
       << ")";
    throw Error(ErrorCode::kNotPD, os.str());
  }
}

}  // namespace

MatrixXd IrcController::dc_gain() const {
  return Phi.ldlt().solve(MatrixXd::Identity(Phi.rows(), Phi.cols())) - Delta;
}

IrcController make_irc(const MatrixXd& Gamma, const MatrixXd& Phi,
                       const MatrixXd& Delta) {
  const Index m = Gamma.rows();
  for (const MatrixXd* p : {&Gamma, &Phi, &Delta}) {
    if (p->rows() != m || p->cols() != m) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "Gamma, Phi and Delta must share one square size");
    }
  }
  IrcController irc;
  irc.Gamma = checked_symmetric(Gamma, "Gamma");
  irc.Phi = checked_symmetric(Phi, "Phi");
  irc.Delta = checked_symmetric(Delta, "Delta");
  require_pd(irc.Gamma, "Gamma");
  require_pd(irc.Phi, "Phi");
  irc.realization = StateSpaceModel(-irc.Gamma * irc.Phi, irc.Gamma,
                                    MatrixXd::Identity(m, m), -irc.Delta, "irc");
  return irc;
}

}  // namespace nifb
