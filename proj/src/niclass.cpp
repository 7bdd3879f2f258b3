#include "nifb/niclass.hpp"

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

double cnorm(const MatrixXcd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<MatrixXcd> svd(m);
  return svd.singularValues()(0);
}

double axis_tolerance(const MatrixXd& A, double axis_rel) {
  return axis_rel * std::max(1.0, spectral_norm(A));
}

VectorXcd eigenvalues(const MatrixXd& A) {
  if (A.rows() == 0) return VectorXcd(0);
  Eigen::EigenSolver<MatrixXd> es(A, false);
  return es.eigenvalues();
}

double cluster_radius(double w0) { return 1e-7 * std::max(1.0, std::abs(w0)); }

std::vector<FrequencySample> sweep(const StateSpaceModel& model,
                                   const std::vector<double>& freqs,
                                   double rel, double floor,
                                   std::vector<std::string>* notes) {
  std::vector<FrequencySample> out;
  out.reserve(freqs.size());
  for (double w : freqs) {
    MatrixXcd G;
    try {
      G = eval_tf(model, Complex(0.0, w));
    } catch (const Error& e) {
      if (notes) notes->push_back(std::string("skipped sample: ") + e.what());
      continue;
    }
    FrequencySample s;
    s.omega = w;
    s.min_eig = hermitian_min_eig(imaginary_part_form(G));
    s.tol = rel > 0.0 ? rel * (1.0 + cnorm(G)) : floor;
    out.push_back(s);
  }
  return out;
}

}  // namespace

std::vector<double> FrequencyGrid::frequencies(
    const std::vector<double>& poles) const {
  if (!(w_min > 0.0) || !(w_max > w_min) || points < 2) {
    throw Error(ErrorCode::kInvalidArgument, "bad frequency grid");
  }
  std::vector<double> w;
  const double lo = std::log10(w_min), hi = std::log10(w_max);
  for (int i = 0; i < points; ++i) {
    w.push_back(std::pow(10.0, lo + (hi - lo) * i / (points - 1)));
  }
  for (double p : poles) {
    double offset = 2.0 * guard_rel;
    for (int k = 0; k < bracket_points / 2; ++k, offset *= 10.0) {
      w.push_back(p * (1.0 - std::min(offset, 0.5)));
      w.push_back(p * (1.0 + offset));
    }
  }
  std::vector<double> kept;
  for (double x : w) {
    if (!(x > 0.0)) continue;
    bool near = false;
    for (double p : poles) near = near || std::abs(x - p) <= guard_rel * p;
    if (!near) kept.push_back(x);
  }
  std::sort(kept.begin(), kept.end());
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  return kept;
}

MatrixXcd imaginary_part_form(const MatrixXcd& G) {
  const Complex j(0.0, 1.0);
  return j * (G - G.adjoint());
}

double hermitian_min_eig(const MatrixXcd& H) {
  if (H.size() == 0) return 0.0;
  const MatrixXcd sym = 0.5 * (H + H.adjoint());
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

std::vector<double> imaginary_axis_poles(const MatrixXd& A, double axis_rel) {
  const double tol = axis_tolerance(A, axis_rel);
  std::vector<double> w;
  for (const Complex& l : eigenvalues(A)) {
    if (std::abs(l.real()) <= tol && l.imag() > tol) w.push_back(l.imag());
  }
  std::sort(w.begin(), w.end());
  std::vector<double> distinct;
  for (double x : w) {
    if (distinct.empty() || x - distinct.back() > cluster_radius(x)) {
      distinct.push_back(x);
    }
  }
  return distinct;
}

ResidueResult imaginary_axis_residue(const StateSpaceModel& model, double w0,
                                     const NiTolerances& tol) {
  if (!(w0 > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "pole frequency must be positive");
  }
  const Index n = model.states();
  const Complex target(0.0, w0);
  const VectorXcd lam = eigenvalues(model.A());
  Complex centre(0.0, 0.0);
  Index q = 0;
  for (Index i = 0; i < lam.size(); ++i) {
    if (std::abs(lam(i) - target) <= cluster_radius(w0)) {
      centre += lam(i);
      ++q;
    }
  }
  if (q == 0) {
    std::ostringstream os;
    os << "j*" << w0 << " is not an eigenvalue of A";
    throw Error(ErrorCode::kNotAPole, os.str());
  }
  centre /= static_cast<double>(q);

  MatrixXcd M = model.A().cast<Complex>();
  M.diagonal().array() -= centre;
  Eigen::JacobiSVD<MatrixXcd> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double thr = 1e-8 * std::max(1.0, spectral_norm(model.A()));
  if (sv(n - q) > thr) {
    std::ostringstream os;
    os << "eigenvalue j*" << w0 << " has algebraic multiplicity " << q
       << " but is defective (singular value " << sv(n - q) << ")";
    throw Error(ErrorCode::kNotSimple, os.str());
  }
  const MatrixXcd X = svd.matrixV().rightCols(q);
  const MatrixXcd Y = svd.matrixU().rightCols(q);
  const MatrixXcd YX = Y.adjoint() * X;
  Eigen::JacobiSVD<MatrixXcd> inner(YX);
  if (inner.singularValues()(q - 1) <= 1e-8) {
    throw Error(ErrorCode::kNotSimple,
                "left and right eigenspaces are nearly orthogonal");
  }
  const MatrixXcd P = X * Eigen::PartialPivLU<MatrixXcd>(YX).solve(Y.adjoint());

  ResidueResult r;
  r.omega0 = w0;
  r.multiplicity = q;
  r.K = Complex(0.0, 1.0) * (model.C().cast<Complex>() * P *
                             model.B().cast<Complex>());
  r.hermitian_defect = cnorm(r.K - r.K.adjoint());
  r.min_eig = hermitian_min_eig(r.K);
  (void)tol;
  return r;
}

NiReport classify_ni(const StateSpaceModel& model, const FrequencyGrid& grid,
                     const NiTolerances& tol) {
  if (!is_minimal(model)) {
    throw Error(ErrorCode::kNotMinimal,
                "the realization is not minimal; residue and Jordan tests need "
                "a minimal realization");
  }
  NiReport rep;
  const MatrixXd& A = model.A();
  const double axis_tol = axis_tolerance(A, tol.axis_rel);

  for (const Complex& l : eigenvalues(A)) {
    if (l.real() > axis_tol) rep.cond1_rhp_poles.push_back(l);
  }
  rep.cond1_pass = rep.cond1_rhp_poles.empty();

  rep.imaginary_poles = imaginary_axis_poles(A, tol.axis_rel);
  rep.cond3_pass = true;
  for (double w0 : rep.imaginary_poles) {
    ResidueRecord rec;
    try {
      rec.residue = imaginary_axis_residue(model, w0, tol);
      const double kn = cnorm(rec.residue.K);
      rec.pass = rec.residue.hermitian_defect <= tol.hermitian_rel * kn + 1e-14 &&
                 rec.residue.min_eig >= -tol.residue_rel * (1.0 + kn);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNotSimple && e.code() != ErrorCode::kNotAPole) {
        throw;
      }
      rec.residue.omega0 = w0;
      rec.failure = e.what();
    }
    rep.cond3_pass = rep.cond3_pass && rec.pass;
    rep.cond3_residues.push_back(std::move(rec));
  }

  const Index m = model.ports();
  const ZeroSplit split = split_at_zero(A);
  rep.cond4_G2 = MatrixXd::Zero(m, m);
  if (split.jordan_too_large()) {
    rep.cond4_higher_order = false;
    rep.cond4_pass = false;
    rep.notes.push_back("zero eigenvalue has a Jordan block of size >= 3");
  } else {
    if (split.block_residual > 1e-6) {
      std::ostringstream os;
      os << "spectral split at the origin left off-diagonal residual "
         << split.block_residual;
      throw Error(ErrorCode::kNumericalBreakdown, os.str());
    }
    const Index n0 = split.gen_kernel_dim;
    if (n0 > 0) {
      rep.cond4_G2 = model.C() * split.T.rightCols(n0) * split.N0 *
                     split.T_inv.bottomRows(n0) * model.B();
    }
    const double g2n = spectral_norm(rep.cond4_G2);
    rep.cond4_asymmetry = spectral_norm(rep.cond4_G2 - rep.cond4_G2.transpose());
    const MatrixXd sym = 0.5 * (rep.cond4_G2 + rep.cond4_G2.transpose());
    rep.cond4_definiteness =
        classify_definiteness(sym, tol.cond2_rel * (1.0 + g2n));
    rep.cond4_pass = rep.cond4_asymmetry <= 1e-6 * g2n + 1e-12 &&
                     rep.cond4_definiteness.is_psd();
    if (split.cond_T > 1e8) {
      rep.notes.push_back("origin split transform is ill conditioned");
    }
  }

  rep.cond2_min_eig_by_freq =
      sweep(model, grid.frequencies(rep.imaginary_poles), tol.cond2_rel, 0.0,
            &rep.notes);
  rep.cond2_pass = true;
  rep.cond2_worst_margin = std::numeric_limits<double>::infinity();
  for (const auto& s : rep.cond2_min_eig_by_freq) {
    rep.cond2_worst_margin = std::min(rep.cond2_worst_margin, s.min_eig + s.tol);
    rep.cond2_pass = rep.cond2_pass && s.min_eig >= -s.tol;
  }

  rep.is_ni = rep.cond1_pass && rep.cond2_pass && rep.cond3_pass &&
              rep.cond4_pass && rep.cond4_higher_order;
  return rep;
}

SniReport classify_sni(const StateSpaceModel& model, const FrequencyGrid& grid,
                       const NiTolerances& tol) {
  SniReport rep;
  for (const Complex& l : eigenvalues(model.A())) {
    if (l.real() >= -tol.hurwitz_margin) rep.closed_rhp_poles.push_back(l);
  }
  rep.poles_pass = rep.closed_rhp_poles.empty();
  rep.cond2_min_eig_by_freq =
      sweep(model, grid.frequencies(), 0.0, tol.sni_floor, nullptr);
  rep.cond2_pass = !rep.cond2_min_eig_by_freq.empty();
  for (const auto& s : rep.cond2_min_eig_by_freq) {
    rep.cond2_pass = rep.cond2_pass && s.min_eig > s.tol;
  }
  rep.is_sni = rep.poles_pass && rep.cond2_pass;
  return rep;
}

}  // namespace nifb
