#include "nifb/simulate.hpp"

#include <cmath>

#include <Eigen/LU>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include "nifb/error.hpp"

namespace nifb {

const char* to_string(ReferenceWiring w) {
  switch (w) {
    case ReferenceWiring::kOutputError: return "output_error";
    case ReferenceWiring::kChannelReplacement: return "channel_replacement";
    case ReferenceWiring::kPlantInput: return "plant_input";
  }
  return "unknown";
}

ReferenceWiring reference_wiring_from_string(const std::string& name) {
  for (auto w : {ReferenceWiring::kOutputError,
                 ReferenceWiring::kChannelReplacement,
                 ReferenceWiring::kPlantInput}) {
    if (name == to_string(w)) return w;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown wiring '" + name + "'");
}

ReferenceLoop reference_loop(const StateSpaceModel& G,
                             const StateSpaceModel& Gbar,
                             ReferenceWiring wiring) {
  const Index m = G.ports();
  if (Gbar.ports() != m) {
    throw Error(ErrorCode::kDimensionMismatch, "plant and controller port counts differ");
  }
  const Index n = G.states(), nc = Gbar.states();
  const MatrixXd I = MatrixXd::Identity(m, m);
  const VectorXd e1 = I.col(0);

  // uc = S y + w r, u = Cc xc + Dc uc + v r.
  MatrixXd S = I;
  VectorXd w = VectorXd::Zero(m), v = VectorXd::Zero(m);
  switch (wiring) {
    case ReferenceWiring::kOutputError: w = -e1; break;
    case ReferenceWiring::kChannelReplacement:
      S(0, 0) = 0.0;
      w = e1;
      break;
    case ReferenceWiring::kPlantInput: v = e1; break;
  }

  const MatrixXd DcS = Gbar.D() * S;
  const MatrixXd K = I - DcS * G.D();
  Eigen::JacobiSVD<MatrixXd> svd(K);
  const auto sv = svd.singularValues();
  if (sv(m - 1) <= 1e-12 * std::max(1.0, sv(0))) {
    throw Error(ErrorCode::kIllPosed, "I - Dbar D is singular");
  }
  const MatrixXd E = K.inverse();
  // u = Ux x + Uc xc + Ur r
  const MatrixXd Ux = E * DcS * G.C();
  const MatrixXd Uc = E * Gbar.C();
  const VectorXd Ur = E * (Gbar.D() * w + v);

  ReferenceLoop out;
  out.A.resize(n + nc, n + nc);
  out.B.resize(n + nc, 1);
  out.A.topLeftCorner(n, n) = G.A() + G.B() * Ux;
  out.A.topRightCorner(n, nc) = G.B() * Uc;
  out.B.topRows(n) = G.B() * Ur;
  // uc = S (C x + D u) + w r
  const MatrixXd SC = S * (G.C() + G.D() * Ux);
  const MatrixXd SDc = S * G.D() * Uc;
  const VectorXd Sr = S * G.D() * Ur + w;
  out.A.bottomLeftCorner(nc, n) = Gbar.B() * SC;
  out.A.bottomRightCorner(nc, nc) = Gbar.A() + Gbar.B() * SDc;
  out.B.bottomRows(nc) = Gbar.B() * Sr;

  out.C.resize(m, n + nc);
  out.C.leftCols(n) = G.C() + G.D() * Ux;
  out.C.rightCols(nc) = G.D() * Uc;
  out.D = G.D() * Ur;
  return out;
}

SimulationResult step_response(const StateSpaceModel& G,
                               const StateSpaceModel& Gbar,
                               const SimulationConfig& config) {
  if (!(config.dt > 0.0) || !(config.t_end >= 0.0) ||
      !std::isfinite(config.t_end) || !std::isfinite(config.reference)) {
    throw Error(ErrorCode::kInvalidArgument, "simulation needs dt > 0 and t_end >= 0");
  }
  const ReferenceLoop loop = reference_loop(G, Gbar, config.wiring);
  const Index N = loop.A.rows();
  const long steps = std::lround(config.t_end / config.dt);

  // exp([[A, B], [0, 0]] dt) = [[Phi, Gamma], [0, I]]
  MatrixXd aug = MatrixXd::Zero(N + 1, N + 1);
  aug.topLeftCorner(N, N) = loop.A * config.dt;
  aug.topRightCorner(N, 1) = loop.B * config.dt;
  const MatrixXd ex = aug.exp();
  const MatrixXd Phi = ex.topLeftCorner(N, N);
  const VectorXd Gam = ex.topRightCorner(N, 1) * config.reference;
  const VectorXd Dr = loop.D * config.reference;

  SimulationResult res;
  res.config = config;
  res.closed_loop_abscissa = spectral_abscissa(loop.A);
  res.hurwitz = is_hurwitz(loop.A);
  const Index m = G.ports();
  res.outputs.resize(steps + 1, m);

  VectorXd x = VectorXd::Zero(N);
  long k = 0;
  for (; k <= steps; ++k) {
    const VectorXd y = loop.C * x + Dr;
    res.outputs.row(k) = y.transpose();
    res.t.push_back(k * config.dt);
    res.theta.push_back(y(0));
    if (m > 1) res.Vs.push_back(y(1));
    if (!x.allFinite() || x.norm() > config.divergence_bound) {
      res.diverged = true;
      ++k;
      break;
    }
    x = Phi * x + Gam;
  }
  res.outputs.conservativeResize(k, m);
  return res;
}

}  // namespace nifb
