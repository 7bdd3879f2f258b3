#include "nifb/ltimodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "nifb/error.hpp"

namespace nifb {

namespace {

std::string dims(const MatrixXd& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

void check_finite(const MatrixXd& m, const char* what) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(what) + " contains non-finite entries");
  }
}

MatrixXd block_diag(const MatrixXd& a, const MatrixXd& b) {
  MatrixXd out = MatrixXd::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

MatrixXd vstack(const MatrixXd& a, const MatrixXd& b) {
  const Index cols = a.rows() > 0 ? a.cols() : b.cols();
  MatrixXd out(a.rows() + b.rows(), cols);
  if (a.rows() > 0) out.topRows(a.rows()) = a;
  if (b.rows() > 0) out.bottomRows(b.rows()) = b;
  return out;
}

MatrixXd hstack(const MatrixXd& a, const MatrixXd& b) {
  const Index rows = a.cols() > 0 ? a.rows() : b.rows();
  MatrixXd out(rows, a.cols() + b.cols());
  if (a.cols() > 0) out.leftCols(a.cols()) = a;
  if (b.cols() > 0) out.rightCols(b.cols()) = b;
  return out;
}

// Orthonormal basis of N(M) with an absolute singular-value threshold.
MatrixXd null_basis_abs(const MatrixXd& m, double tol) {
  return null_space(m, tol);
}

// Orthonormal basis of the orthogonal complement of range(Q) (Q orthonormal).
MatrixXd orth_complement(const MatrixXd& q, Index n) {
  if (q.cols() == 0) return MatrixXd::Identity(n, n);
  if (q.cols() == n) return MatrixXd(n, 0);
  Eigen::JacobiSVD<MatrixXd> svd(q, Eigen::ComputeFullU);
  return svd.matrixU().rightCols(n - q.cols());
}

// Nested kernels N(A) c N(A^2) c N(A^3), each computed from first powers of A
// so that the rank threshold never sees squared singular values.
std::vector<MatrixXd> kernel_chain(const MatrixXd& a, double tol, int depth) {
  const Index n = a.rows();
  std::vector<MatrixXd> chain;
  MatrixXd prev(n, 0);
  for (int k = 0; k < depth; ++k) {
    MatrixXd proj = MatrixXd::Identity(n, n) - prev * prev.transpose();
    MatrixXd basis = null_basis_abs(proj * a, tol);
    chain.push_back(basis);
    prev = basis;
  }
  return chain;
}

}  // namespace

StateSpaceModel::StateSpaceModel(MatrixXd A, MatrixXd B, MatrixXd C,
                                 MatrixXd D, std::string name)
    : A_(std::move(A)),
      B_(std::move(B)),
      C_(std::move(C)),
      D_(std::move(D)),
      name_(std::move(name)) {
  const Index n = A_.rows();
  const Index m = D_.rows();
  if (A_.cols() != n || B_.rows() != n || C_.cols() != n ||
      D_.cols() != m || B_.cols() != m || C_.rows() != m) {
    throw Error(ErrorCode::kDimensionMismatch,
                "inconsistent realization: A " + dims(A_) + ", B " + dims(B_) +
                    ", C " + dims(C_) + ", D " + dims(D_));
  }
  check_finite(A_, "A");
  check_finite(B_, "B");
  check_finite(C_, "C");
  check_finite(D_, "D");
}

StateSpaceModel StateSpaceModel::Static(const MatrixXd& D, std::string name) {
  const Index m = D.rows();
  return StateSpaceModel(MatrixXd(0, 0), MatrixXd(0, m), MatrixXd(m, 0), D,
                         std::move(name));
}

bool StateSpaceModel::strictly_proper(double tol) const {
  return D_.size() == 0 || D_.cwiseAbs().maxCoeff() <= tol;
}

StateSpaceModel StateSpaceModel::transformed(const MatrixXd& T) const {
  if (T.rows() != states() || T.cols() != states()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "transform " + dims(T) + " for " + std::to_string(states()) +
                    " states");
  }
  Eigen::PartialPivLU<MatrixXd> lu(T);
  return StateSpaceModel(lu.solve(A_ * T), lu.solve(B_), C_ * T, D_, name_);
}

StateSpaceModel StateSpaceModel::with_name(std::string name) const {
  StateSpaceModel out = *this;
  out.name_ = std::move(name);
  return out;
}

MatrixXcd eval_tf(const StateSpaceModel& model, Complex s) {
  const Index n = model.states();
  MatrixXcd out = model.D().cast<Complex>();
  if (n == 0) return out;
  MatrixXcd pencil = -model.A().cast<Complex>();
  pencil.diagonal().array() += s;
  Eigen::PartialPivLU<MatrixXcd> lu(pencil);
  if (!(lu.rcond() > 1e3 * std::numeric_limits<double>::epsilon())) {
    std::ostringstream os;
    os << "sI - A is singular at s = " << s.real() << (s.imag() < 0 ? "" : "+")
       << s.imag() << "j (rcond " << lu.rcond() << ")";
    throw Error(ErrorCode::kSingularAtS, os.str());
  }
  out += model.C().cast<Complex>() * lu.solve(model.B().cast<Complex>());
  return out;
}

Index reachable_dimension(const MatrixXd& A, const MatrixXd& B,
                          double rel_tol) {
  const Index n = A.rows();
  if (n == 0) return 0;
  const double b_norm = spectral_norm(B);
  if (b_norm == 0.0) return 0;
  const double a_norm =
      std::max(spectral_norm(A), std::numeric_limits<double>::min());

  MatrixXd q = range_basis(B, rel_tol * b_norm);
  MatrixXd block = q;
  while (q.cols() < n && block.cols() > 0) {
    MatrixXd w = A * block;
    for (int pass = 0; pass < 2; ++pass) w -= q * (q.transpose() * w);
    block = range_basis(w, rel_tol * a_norm);
    q = hstack(q, block);
  }
  return std::min(q.cols(), n);
}

bool is_controllable(const MatrixXd& A, const MatrixXd& B) {
  return reachable_dimension(A, B) == A.rows();
}

bool is_observable(const MatrixXd& A, const MatrixXd& C) {
  return reachable_dimension(A.transpose(), C.transpose()) == A.rows();
}

bool is_minimal(const StateSpaceModel& model) {
  return is_controllable(model.A(), model.B()) &&
         is_observable(model.A(), model.C());
}

ClosedLoop closed_loop(const StateSpaceModel& G, const StateSpaceModel& Gbar) {
  const Index m = G.ports();
  if (Gbar.ports() != m) {
    throw Error(ErrorCode::kDimensionMismatch,
                "plant has " + std::to_string(m) + " ports, controller " +
                    std::to_string(Gbar.ports()));
  }
  const MatrixXd& A = G.A();
  const MatrixXd& B = G.B();
  const MatrixXd& C = G.C();
  const MatrixXd& D = G.D();
  const MatrixXd& Ab = Gbar.A();
  const MatrixXd& Bb = Gbar.B();
  const MatrixXd& Cb = Gbar.C();
  const MatrixXd& Db = Gbar.D();

  const MatrixXd inner = MatrixXd::Identity(m, m) - D * Db;
  Eigen::JacobiSVD<MatrixXd> svd(inner);
  const auto& sv = svd.singularValues();
  if (m > 0 && sv(m - 1) <= 1e-12 * std::max(1.0, sv(0))) {
    std::ostringstream os;
    os << "I - D*Dbar is singular (smallest singular value " << sv(m - 1)
       << ")";
    throw Error(ErrorCode::kIllPosed, os.str());
  }
  const MatrixXd E = Eigen::PartialPivLU<MatrixXd>(inner).solve(
      MatrixXd::Identity(m, m));

  const Index n = G.states();
  const Index nb = Gbar.states();
  ClosedLoop out;
  out.Abreve.resize(n + nb, n + nb);
  out.Abreve.topLeftCorner(n, n) = A + B * Db * E * C;
  out.Abreve.topRightCorner(n, nb) = B * Cb + B * Db * E * D * Cb;
  out.Abreve.bottomLeftCorner(nb, n) = Bb * E * C;
  out.Abreve.bottomRightCorner(nb, nb) = Ab + Bb * E * D * Cb;
  return out;
}

double spectral_abscissa(const MatrixXd& M) {
  if (M.rows() == 0) return -std::numeric_limits<double>::infinity();
  Eigen::EigenSolver<MatrixXd> es(M, false);
  return es.eigenvalues().real().maxCoeff();
}

bool is_hurwitz(const MatrixXd& M, double margin) {
  return spectral_abscissa(M) < -margin;
}

MatrixXcd eval_modal(const ModalModel& model, Complex s) {
  const Index m = model.ports;
  MatrixXcd out = MatrixXcd::Zero(m, m);
  for (const auto& term : model.modes) {
    out += term.C.cast<Complex>() / (s * s + term.p * term.p);
  }
  if (model.g1) out += model.g1->cast<Complex>() / s;
  if (model.g2) out += model.g2->cast<Complex>() / (s * s);
  return out;
}

StateSpaceModel free_body_realization(const MatrixXd& g1, const MatrixXd& g2,
                                      double rank_tol) {
  const Index m = g1.rows();
  if (g1.cols() != m || g2.rows() != m || g2.cols() != m) {
    throw Error(ErrorCode::kDimensionMismatch,
                "free-body coefficients " + dims(g1) + " and " + dims(g2));
  }
  const MatrixXd J = full_rank_factor(g2, rank_tol).J;
  const Index k = J.cols();

  MatrixXd residual = g1;
  MatrixXd B3a(k, m), C3b(m, k);
  if (k > 0) {
    const MatrixXd pinv =
        (J.transpose() * J).ldlt().solve(J.transpose());  // k x m
    const MatrixXd Q = MatrixXd::Identity(m, m) - J * pinv;
    B3a = pinv * g1;
    C3b = Q * g1 * pinv.transpose();
    residual = Q * g1 * Q;
  }

  Eigen::JacobiSVD<MatrixXd> svd(residual,
                                 Eigen::ComputeThinU | Eigen::ComputeThinV);
  Index n2 = 0;
  while (n2 < svd.singularValues().size() &&
         svd.singularValues()(n2) > rank_tol) {
    ++n2;
  }
  const VectorXd root = svd.singularValues().head(n2).cwiseSqrt();
  const MatrixXd C2 = svd.matrixU().leftCols(n2) * root.asDiagonal();
  const MatrixXd B2 =
      root.asDiagonal() * svd.matrixV().leftCols(n2).transpose();

  const Index n = n2 + 2 * k;
  MatrixXd A = MatrixXd::Zero(n, n);
  A.block(n2, n2 + k, k, k).setIdentity();
  MatrixXd B(n, m), C(m, n);
  B << B2, B3a, J.transpose();
  C << C2, J, C3b;
  return StateSpaceModel(A, B, C, MatrixXd::Zero(m, m));
}

StateSpaceModel parallel(const StateSpaceModel& a, const StateSpaceModel& b) {
  if (a.ports() != b.ports()) {
    throw Error(ErrorCode::kDimensionMismatch, "port counts differ");
  }
  return StateSpaceModel(block_diag(a.A(), b.A()), vstack(a.B(), b.B()),
                         hstack(a.C(), b.C()), a.D() + b.D(), a.name());
}

StateSpaceModel modal_to_ss(const ModalModel& model) {
  const Index m = model.ports;
  if (m <= 0) throw Error(ErrorCode::kInvalidArgument, "modal model has no ports");

  double scale = 0.0;
  double prev_p = 0.0;
  for (const auto& term : model.modes) {
    if (!(term.p > prev_p) || !std::isfinite(term.p)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "mode frequencies must be positive, finite and strictly "
                  "increasing");
    }
    prev_p = term.p;
    if (term.C.rows() != m || term.C.cols() != m) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "mode coefficient " + dims(term.C));
    }
    scale = std::max(scale, spectral_norm(term.C));
  }
  const MatrixXd g1 = model.g1.value_or(MatrixXd::Zero(m, m));
  const MatrixXd g2 = model.g2.value_or(MatrixXd::Zero(m, m));
  scale = std::max({scale, spectral_norm(g1), spectral_norm(g2)});

  StateSpaceModel out = StateSpaceModel::Static(MatrixXd::Zero(m, m));
  for (const auto& term : model.modes) {
    const MatrixXd c = symmetrized(term.C);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(c);
    const double keep = default_rank_tol(c);
    for (Index i = es.eigenvalues().size() - 1; i >= 0; --i) {
      const double lam = es.eigenvalues()(i);
      if (std::abs(lam) <= keep) continue;
      const VectorXd v = es.eigenvectors().col(i);
      MatrixXd A(2, 2);
      A << 0.0, 1.0, -term.p * term.p, 0.0;
      MatrixXd B = MatrixXd::Zero(2, m);
      B.row(1) = lam * v.transpose();
      MatrixXd C = MatrixXd::Zero(m, 2);
      C.col(0) = v;
      out = parallel(out, StateSpaceModel(A, B, C, MatrixXd::Zero(m, m)));
    }
  }
  if (model.g1 || model.g2) {
    const double tol = 1e-12 * std::max(scale, 1e-300);
    out = parallel(out, free_body_realization(g1, g2, tol));
  }
  return out;
}

ZeroSplit split_at_zero(const MatrixXd& A, double rel_tol) {
  const Index n = A.rows();
  if (A.cols() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "state matrix " + dims(A));
  }
  ZeroSplit z;
  z.T = MatrixXd::Identity(n, n);
  z.T_inv = MatrixXd::Identity(n, n);
  if (n == 0) return z;

  const double a_norm = spectral_norm(A);
  if (a_norm == 0.0) {
    z.kernel_dim = z.gen_kernel_dim = z.cubic_kernel_dim = n;
    z.A1 = MatrixXd(0, 0);
    z.N0 = MatrixXd::Zero(n, n);
    return z;
  }
  const double tol = rel_tol * a_norm;
  const auto right = kernel_chain(A, tol, 3);
  z.kernel_dim = right[0].cols();
  z.gen_kernel_dim = right[1].cols();
  z.cubic_kernel_dim = right[2].cols();
  if (z.jordan_too_large()) return z;

  // range(A^2) is the orthogonal complement of the left generalized kernel.
  const auto left = kernel_chain(A.transpose(), tol, 2);
  if (left[1].cols() != z.gen_kernel_dim) {
    throw Error(ErrorCode::kNumericalBreakdown,
                "left and right generalized kernels disagree in dimension");
  }
  const MatrixXd V1 = orth_complement(left[1], n);
  const MatrixXd& V0 = right[1];
  z.T = hstack(V1, V0);

  Eigen::JacobiSVD<MatrixXd> svd(z.T);
  const auto& sv = svd.singularValues();
  z.cond_T = sv(n - 1) > 0.0 ? sv(0) / sv(n - 1)
                             : std::numeric_limits<double>::infinity();
  Eigen::PartialPivLU<MatrixXd> lu(z.T);
  z.T_inv = lu.inverse();

  const MatrixXd At = z.T_inv * A * z.T;
  const Index n1 = V1.cols();
  const Index n0 = V0.cols();
  z.A1 = At.topLeftCorner(n1, n1);
  z.N0 = At.bottomRightCorner(n0, n0);
  z.block_residual =
      std::max(spectral_norm(At.topRightCorner(n1, n0)),
               spectral_norm(At.bottomLeftCorner(n0, n1))) /
      a_norm;
  return z;
}

}  // namespace nifb
