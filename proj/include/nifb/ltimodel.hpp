#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nifb/matrixcore.hpp"

namespace nifb {

using Complex = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

/// Square continuous-time LTI model  x' = A x + B u,  y = C x + D u.
/// Zero-state models (pure static gains) are allowed.
class StateSpaceModel {
 public:
  StateSpaceModel() = default;
  StateSpaceModel(MatrixXd A, MatrixXd B, MatrixXd C, MatrixXd D,
                  std::string name = {});

  /// Static gain with no states.
  static StateSpaceModel Static(const MatrixXd& D, std::string name = {});

  const MatrixXd& A() const { return A_; }
  const MatrixXd& B() const { return B_; }
  const MatrixXd& C() const { return C_; }
  const MatrixXd& D() const { return D_; }
  const std::string& name() const { return name_; }

  Index states() const { return A_.rows(); }
  Index ports() const { return D_.rows(); }

  bool strictly_proper(double tol = 1e-12) const;

  /// Realization in coordinates x = T z: (T^-1 A T, T^-1 B, C T, D).
  StateSpaceModel transformed(const MatrixXd& T) const;

  StateSpaceModel with_name(std::string name) const;

 private:
  MatrixXd A_, B_, C_, D_;
  std::string name_;
};

/// G(s) = C (sI - A)^-1 B + D, evaluated with an LU solve. Throws SingularAtS
/// when sI - A is numerically singular.
MatrixXcd eval_tf(const StateSpaceModel& model, Complex s);

/// Dimension of the reachable subspace of (A, B), computed by an
/// orthonormalized Krylov sequence (a numerically stable way of taking the
/// rank of [B AB ... A^{n-1}B]).
Index reachable_dimension(const MatrixXd& A, const MatrixXd& B,
                          double rel_tol = 1e-9);

bool is_controllable(const MatrixXd& A, const MatrixXd& B);
bool is_observable(const MatrixXd& A, const MatrixXd& C);
bool is_minimal(const StateSpaceModel& model);

struct ClosedLoop {
  MatrixXd Abreve;
  bool well_posed = true;
};

/// Positive-feedback interconnection [G, Gbar]: u = Gbar y. Assembles the
/// closed-loop state matrix with the (I - D Dbar)^-1 corrections. Throws
/// IllPosed when I - D Dbar is singular.
ClosedLoop closed_loop(const StateSpaceModel& G, const StateSpaceModel& Gbar);

/// max Re(lambda(M)); -inf for an empty matrix.
double spectral_abscissa(const MatrixXd& M);

bool is_hurwitz(const MatrixXd& M, double margin = 1e-8);

// ---------------------------------------------------------------------------
// Modal models:  G(s) = G2/s^2 + G1/s + sum_i C_i / (s^2 + p_i^2).

struct ModalTerm {
  double p = 0.0;  // > 0
  MatrixXd C;      // symmetric m x m
};

struct ModalModel {
  Index ports = 0;
  std::vector<ModalTerm> modes;  // strictly increasing p
  std::optional<MatrixXd> g2;    // coefficient of 1/s^2 (PSD)
  std::optional<MatrixXd> g1;    // coefficient of 1/s
};

/// Direct evaluation of the modal sum.
MatrixXcd eval_modal(const ModalModel& model, Complex s);

/// Block-diagonal realization: one controller-canonical oscillator pair per
/// rank-one component of each C_i, then the A2 = 0 block, then the nilpotent
/// A3 = [[0, I], [0, 0]] block. Minimal whenever the coefficient matrices are
/// nonzero and the poles distinct.
StateSpaceModel modal_to_ss(const ModalModel& model);

/// Minimal realization of G1/s + G2/s^2 (G2 symmetric PSD) in the (A2, A3)
/// block form: states ordered [x2; x3a; x3b].
StateSpaceModel free_body_realization(const MatrixXd& g1, const MatrixXd& g2,
                                      double rank_tol);

/// Block-diagonal concatenation of models with equal port counts (parallel
/// connection, outputs summed).
StateSpaceModel parallel(const StateSpaceModel& a, const StateSpaceModel& b);

// ---------------------------------------------------------------------------
// Spectral split at the origin.
//
// For a state matrix whose zero eigenvalue has index <= 2, R^n splits into the
// invariant subspaces range(A^2) (nonzero spectrum) and N(A^2) (generalized
// kernel). In the coordinates x = T [z1; z0] the matrix becomes
// blockdiag(A1, N0) with A1 nonsingular and N0^2 = 0.

struct ZeroSplit {
  Index kernel_dim = 0;        // dim N(A)
  Index gen_kernel_dim = 0;    // dim N(A^2)
  Index cubic_kernel_dim = 0;  // dim N(A^3); > gen_kernel_dim => Jordan block >= 3
  MatrixXd T;                  // [V1 V0]
  MatrixXd T_inv;
  MatrixXd A1;                 // nonsingular block
  MatrixXd N0;                 // nilpotent block (gen_kernel_dim square)
  double cond_T = 1.0;
  double block_residual = 0.0; // size of the discarded off-diagonal blocks

  bool jordan_too_large() const { return cubic_kernel_dim > gen_kernel_dim; }
  Index chains_of_length_two() const { return gen_kernel_dim - kernel_dim; }
};

/// Relative threshold used to declare singular values of A^k zero.
inline constexpr double kZeroClusterRelTol = 1e-7;

ZeroSplit split_at_zero(const MatrixXd& A, double rel_tol = kZeroClusterRelTol);

}  // namespace nifb
