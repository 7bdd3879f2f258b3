#pragma once

#include <optional>

#include <Eigen/Dense>

namespace nifb {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Sign tests with tolerances. These back every "> 0", ">= 0", "< 0" hypothesis
// that the stability theorems place on symmetric matrices.
enum class DefinitenessKind {
  kPositiveDefinite,
  kPositiveSemidefinite,
  kNegativeDefinite,
  kNegativeSemidefinite,
  kIndefinite,
  kZero,
};

const char* to_string(DefinitenessKind kind);

struct Definiteness {
  DefinitenessKind kind = DefinitenessKind::kZero;
  double min_eig = 0.0;
  double max_eig = 0.0;
  double tol_used = 0.0;

  // Zero counts as both semidefinite classes.
  bool is_psd() const;
  bool is_nsd() const;
  bool is_pd() const { return kind == DefinitenessKind::kPositiveDefinite; }
  bool is_nd() const { return kind == DefinitenessKind::kNegativeDefinite; }
};

/// Largest singular value; 0 for empty matrices.
double spectral_norm(const MatrixXd& m);

/// Eigenvalue threshold max(1e-9, 1e-9 * ||M||_2).
double default_sign_tol(const MatrixXd& m);

/// Numerical-rank threshold max(rows, cols) * eps * sigma_1.
double default_rank_tol(const MatrixXd& m);

/// Returns (M + M^T) / 2, or throws NonSymmetric when ||M - M^T|| exceeds
/// 1e-8 * ||M||.
MatrixXd symmetrized(const MatrixXd& m);

Definiteness classify_definiteness(const MatrixXd& m,
                                   std::optional<double> tol = std::nullopt);

/// Symmetric PSD square root via eigendecomposition. Eigenvalues in
/// [-tol, 0) are clamped to zero; anything more negative throws NotPSD.
MatrixXd psd_sqrt(const MatrixXd& m, std::optional<double> tol = std::nullopt);

struct FullRankFactor {
  MatrixXd J;  // m x r, full column rank
  double residual = 0.0;  // ||J J^T - M||_2

  Index rank() const { return J.cols(); }
};

/// Factor a PSD matrix as J J^T with J of full column rank. Columns are kept
/// for eigenvalues above `rank_tol` (default_rank_tol when omitted) and are
/// ordered by decreasing eigenvalue.
FullRankFactor full_rank_factor(const MatrixXd& m,
                                std::optional<double> rank_tol = std::nullopt);

Index numerical_rank(const MatrixXd& m,
                     std::optional<double> rank_tol = std::nullopt);

/// Orthonormal basis of the numerical null space (right singular vectors).
MatrixXd null_space(const MatrixXd& m,
                    std::optional<double> rank_tol = std::nullopt);

/// Orthonormal basis of the numerical column space.
MatrixXd range_basis(const MatrixXd& m,
                     std::optional<double> rank_tol = std::nullopt);

/// True iff N(M1) is contained in N(M2): every null-space basis vector v of M1
/// satisfies ||M2 v|| <= tol * ||M2||. A zero M2 contains everything.
bool nullspace_contained(const MatrixXd& m1, const MatrixXd& m2, double tol,
                         std::optional<double> rank_tol = std::nullopt);

}  // namespace nifb
