#include "nifb/matrixcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "nifb/error.hpp"

namespace nifb {

namespace {

constexpr double kSymmetryRelTol = 1e-8;

void require_square(const MatrixXd& m, const char* what) {
  if (m.rows() != m.cols()) {
    std::ostringstream os;
    os << what << " must be square, got " << m.rows() << "x" << m.cols();
    throw Error(ErrorCode::kDimensionMismatch, os.str());
  }
}

Eigen::JacobiSVD<MatrixXd> full_svd(const MatrixXd& m) {
  return Eigen::JacobiSVD<MatrixXd>(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
}

}  // namespace

const char* to_string(DefinitenessKind kind) {
  switch (kind) {
    case DefinitenessKind::kPositiveDefinite: return "PositiveDefinite";
    case DefinitenessKind::kPositiveSemidefinite: return "PositiveSemidefinite";
    case DefinitenessKind::kNegativeDefinite: return "NegativeDefinite";
    case DefinitenessKind::kNegativeSemidefinite: return "NegativeSemidefinite";
    case DefinitenessKind::kIndefinite: return "Indefinite";
    case DefinitenessKind::kZero: return "Zero";
  }
  return "Unknown";
}

bool Definiteness::is_psd() const {
  return kind == DefinitenessKind::kPositiveDefinite ||
         kind == DefinitenessKind::kPositiveSemidefinite ||
         kind == DefinitenessKind::kZero;
}

bool Definiteness::is_nsd() const {
  return kind == DefinitenessKind::kNegativeDefinite ||
         kind == DefinitenessKind::kNegativeSemidefinite ||
         kind == DefinitenessKind::kZero;
}

double spectral_norm(const MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<MatrixXd> svd(m);
  return svd.singularValues()(0);
}

double default_sign_tol(const MatrixXd& m) {
  return std::max(1e-9, 1e-9 * spectral_norm(m));
}

double default_rank_tol(const MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  const double eps = std::numeric_limits<double>::epsilon();
  return static_cast<double>(std::max(m.rows(), m.cols())) * eps *
         spectral_norm(m);
}

MatrixXd symmetrized(const MatrixXd& m) {
  require_square(m, "symmetric matrix");
  const double asym = spectral_norm(m - m.transpose());
  const double scale = spectral_norm(m);
  if (asym > kSymmetryRelTol * scale) {
    std::ostringstream os;
    os << "asymmetry " << asym << " exceeds " << kSymmetryRelTol << " * "
       << scale;
    throw Error(ErrorCode::kNonSymmetric, os.str());
  }
  return 0.5 * (m + m.transpose());
}

Definiteness classify_definiteness(const MatrixXd& m,
                                   std::optional<double> tol) {
  const MatrixXd sym = symmetrized(m);
  Definiteness d;
  d.tol_used = tol.value_or(default_sign_tol(sym));
  if (sym.size() == 0) return d;

  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  d.min_eig = es.eigenvalues().minCoeff();
  d.max_eig = es.eigenvalues().maxCoeff();
  const double t = d.tol_used;

  if (std::max(std::abs(d.min_eig), std::abs(d.max_eig)) <= t) {
    d.kind = DefinitenessKind::kZero;
  } else if (d.min_eig > t) {
    d.kind = DefinitenessKind::kPositiveDefinite;
  } else if (d.min_eig >= -t) {
    d.kind = DefinitenessKind::kPositiveSemidefinite;
  } else if (d.max_eig < -t) {
    d.kind = DefinitenessKind::kNegativeDefinite;
  } else if (d.max_eig <= t) {
    d.kind = DefinitenessKind::kNegativeSemidefinite;
  } else {
    d.kind = DefinitenessKind::kIndefinite;
  }
  return d;
}

MatrixXd psd_sqrt(const MatrixXd& m, std::optional<double> tol) {
  const MatrixXd sym = symmetrized(m);
  if (sym.size() == 0) return sym;
  const double t = tol.value_or(default_sign_tol(sym));
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym);
  VectorXd lam = es.eigenvalues();
  if (lam.minCoeff() < -t) {
    std::ostringstream os;
    os << "minimum eigenvalue " << lam.minCoeff() << " below -" << t;
    throw Error(ErrorCode::kNotPSD, os.str());
  }
  lam = lam.cwiseMax(0.0).cwiseSqrt();
  const MatrixXd& v = es.eigenvectors();
  MatrixXd root = v * lam.asDiagonal() * v.transpose();
  return 0.5 * (root + root.transpose());
}

FullRankFactor full_rank_factor(const MatrixXd& m,
                                std::optional<double> rank_tol) {
  const MatrixXd sym = symmetrized(m);
  const double sign_tol = default_sign_tol(sym);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym);
  const VectorXd& lam = es.eigenvalues();
  if (sym.size() > 0 && lam.minCoeff() < -std::max(sign_tol, rank_tol.value_or(0.0))) {
    std::ostringstream os;
    os << "minimum eigenvalue " << lam.minCoeff() << " below -" << sign_tol;
    throw Error(ErrorCode::kNotPSD, os.str());
  }
  const double keep = rank_tol.value_or(default_rank_tol(sym));

  FullRankFactor f;
  f.J.resize(sym.rows(), 0);
  // Eigenvalues come out ascending; walk backwards for decreasing order.
  for (Index i = lam.size() - 1; i >= 0; --i) {
    if (lam(i) <= keep) break;
    f.J.conservativeResize(Eigen::NoChange, f.J.cols() + 1);
    f.J.col(f.J.cols() - 1) = es.eigenvectors().col(i) * std::sqrt(lam(i));
  }
  f.residual = spectral_norm(f.J * f.J.transpose() - sym);
  return f;
}

Index numerical_rank(const MatrixXd& m, std::optional<double> rank_tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<MatrixXd> svd(m);
  const double tol = rank_tol.value_or(default_rank_tol(m));
  Index r = 0;
  for (Index i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()(i) > tol) ++r;
  }
  return r;
}

MatrixXd null_space(const MatrixXd& m, std::optional<double> rank_tol) {
  if (m.cols() == 0) return MatrixXd(0, 0);
  if (m.rows() == 0) return MatrixXd::Identity(m.cols(), m.cols());
  auto svd = full_svd(m);
  const Index r = numerical_rank(m, rank_tol.value_or(default_rank_tol(m)));
  return svd.matrixV().rightCols(m.cols() - r);
}

MatrixXd range_basis(const MatrixXd& m, std::optional<double> rank_tol) {
  if (m.size() == 0) return MatrixXd(m.rows(), 0);
  auto svd = full_svd(m);
  const Index r = numerical_rank(m, rank_tol.value_or(default_rank_tol(m)));
  return svd.matrixU().leftCols(r);
}

bool nullspace_contained(const MatrixXd& m1, const MatrixXd& m2, double tol,
                         std::optional<double> rank_tol) {
  if (m1.cols() != m2.cols()) {
    std::ostringstream os;
    os << "column counts differ: " << m1.cols() << " vs " << m2.cols();
    throw Error(ErrorCode::kDimensionMismatch, os.str());
  }
  const double norm2 = spectral_norm(m2);
  if (norm2 == 0.0) return true;
  const MatrixXd basis = null_space(m1, rank_tol);
  for (Index j = 0; j < basis.cols(); ++j) {
    if ((m2 * basis.col(j)).norm() > tol * norm2) return false;
  }
  return true;
}

}  // namespace nifb
