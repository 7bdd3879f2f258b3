#include "nifb/freebody.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "nifb/error.hpp"

namespace nifb {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Columns completing the (approximately orthonormal) columns of q to a basis
// of R^n, taken from the left singular vectors of q.
MatrixXd complement_basis(const MatrixXd& q, Index n) {
  if (q.cols() == 0) return MatrixXd::Identity(n, n);
  Eigen::JacobiSVD<MatrixXd> svd(q, Eigen::ComputeFullU);
  return svd.matrixU().rightCols(n - q.cols());
}

double cond2(const MatrixXd& m) {
  if (m.size() == 0) return 1.0;
  Eigen::JacobiSVD<MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  const double lo = s(s.size() - 1);
  return lo > 0.0 ? s(0) / lo : std::numeric_limits<double>::infinity();
}

MatrixXd real_eval(const StateSpaceModel& model, double s) {
  return eval_tf(model, Complex(s, 0.0)).real();
}

VectorXd symmetric_eigs(const MatrixXd& m) {
  if (m.size() == 0) return VectorXd(0);
  const MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

MatrixXd random_orthogonal(Index k, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  MatrixXd g(k, k);
  for (Index i = 0; i < g.size(); ++i) g.data()[i] = nd(rng);
  Eigen::HouseholderQR<MatrixXd> qr(g);
  return qr.householderQ() * MatrixXd::Identity(k, k);
}

MatrixXd random_invertible(Index k, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  VectorXd d(k);
  for (Index i = 0; i < k; ++i) d(i) = std::exp(ud(rng));
  return random_orthogonal(k, rng) * d.asDiagonal() * random_orthogonal(k, rng);
}

// Outcome of one strict inequality.
enum class Tri { kTrue, kFalse, kBoundary };

class Checker {
 public:
  Checker(StabilityVerdict* v, double band) : v_(v), band_(band) {}

  // Y^T X Y < 0 style condition (symmetric part).
  Tri negative_definite(const std::string& name, const MatrixXd& m,
                        double scale) {
    const VectorXd e = symmetric_eigs(m);
    const double value = e.size() ? e.maxCoeff() : -1.0;
    v_->condition_values[name + "_max_eig"] = value;
    return classify(-value, scale);
  }

  // I - ... > 0 style condition (symmetric part).
  Tri positive_definite(const std::string& name, const MatrixXd& m,
                        double scale) {
    const VectorXd e = symmetric_eigs(m);
    const double value = e.size() ? e.minCoeff() : 1.0;
    v_->condition_values[name + "_min_eig"] = value;
    return classify(value, scale);
  }

  Tri nonsingular(const std::string& name, const MatrixXd& m, double scale) {
    Eigen::JacobiSVD<MatrixXd> svd(m);
    const double smin = m.size() ? svd.singularValues().minCoeff() : 1.0;
    v_->condition_values[name + "_abs_det"] = std::abs(m.determinant());
    v_->condition_values[name + "_min_sv"] = smin;
    return classify(smin, scale);
  }

  Tri classify(double margin, double scale) const {
    if (std::abs(margin) <= band_ * std::max(1.0, scale)) return Tri::kBoundary;
    return margin > 0.0 ? Tri::kTrue : Tri::kFalse;
  }

 private:
  StabilityVerdict* v_;
  double band_;
};

void settle(StabilityVerdict* v, std::initializer_list<Tri> parts) {
  bool boundary = false;
  for (Tri t : parts) {
    if (t == Tri::kFalse) {
      v->outcome = Outcome::kUnstable;
      return;
    }
    boundary = boundary || t == Tri::kBoundary;
  }
  v->outcome = boundary ? Outcome::kBoundary : Outcome::kStable;
}

void precondition_failed(StabilityVerdict* v, const std::string& why) {
  v->outcome = Outcome::kPreconditionFailed;
  v->reason = why;
}

}  // namespace

// ---------------------------------------------------------------------------

StateSpaceModel BlockDiagonalRealization::assembled() const {
  const Index a = n1(), b = n2(), c = k();
  const Index n = a + b + 2 * c;
  const Index m = original.ports();
  MatrixXd A = MatrixXd::Zero(n, n);
  A.topLeftCorner(a, a) = A1;
  A.block(a + b, a + b + c, c, c).setIdentity();
  MatrixXd B(n, m), C(m, n);
  B << B1, B2, B3a, B3b;
  C << C1, C2, C3a, C3b;
  return StateSpaceModel(A, B, C, original.D(), original.name());
}

BlockDiagonalRealization to_block_diagonal(const StateSpaceModel& model,
                                           double max_cond) {
  if (!model.strictly_proper()) {
    throw Error(ErrorCode::kNotStrictlyProper, "plant has a nonzero D matrix");
  }
  if (!is_minimal(model)) {
    throw Error(ErrorCode::kNotMinimal, "plant realization is not minimal");
  }
  const MatrixXd& A = model.A();
  const Index n = A.rows();
  const ZeroSplit z = split_at_zero(A);
  if (z.jordan_too_large()) {
    throw Error(ErrorCode::kJordanBlockTooLarge,
                "zero eigenvalue has a Jordan block of size three or more");
  }
  if (z.block_residual > 1e-6) {
    throw Error(ErrorCode::kNumericalBreakdown,
                "could not separate the zero eigenvalues");
  }
  const Index n0 = z.gen_kernel_dim;
  const Index n1 = n - n0;

  // Inside the generalized kernel: [U, V, W] with N0 W = V, N0 [U V] = 0.
  MatrixXd T0 = MatrixXd::Identity(n0, n0);
  Index k = 0;
  if (n0 > 0) {
    const double tol =
        kZeroClusterRelTol * std::max(spectral_norm(A), 1e-300);
    const MatrixXd K = null_space(z.N0, tol);
    k = n0 - K.cols();
    if (K.cols() < k) {
      throw Error(ErrorCode::kNumericalBreakdown,
                  "nilpotent block has more chains than kernel vectors");
    }
    const MatrixXd W = complement_basis(K, n0);
    MatrixXd Vq(n0, k), Wn(n0, k);
    if (k > 0) {
      Eigen::HouseholderQR<MatrixXd> qr(z.N0 * W);
      Vq = qr.householderQ() * MatrixXd::Identity(n0, k);
      const MatrixXd R =
          qr.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
      Wn = W * R.inverse();
    }
    const MatrixXd inK = K.transpose() * Vq;  // coordinates of V within K
    const MatrixXd U = K * complement_basis(inK, K.cols());
    T0.resize(n0, n0);
    T0 << U, Vq, Wn;
  }

  MatrixXd lift = MatrixXd::Identity(n, n);
  lift.bottomRightCorner(n0, n0) = T0;
  BlockDiagonalRealization r;
  r.original = model;
  r.T = z.T * lift;
  r.cond_T = cond2(r.T);
  if (r.cond_T > max_cond) {
    std::ostringstream os;
    os << "block-diagonalizing transform has condition number " << r.cond_T;
    throw Error(ErrorCode::kIllConditionedTransform, os.str());
  }
  Eigen::PartialPivLU<MatrixXd> lu(r.T);
  const MatrixXd At = lu.solve(A * r.T);
  const MatrixXd Bt = lu.solve(model.B());
  const MatrixXd Ct = model.C() * r.T;

  const Index n2 = n0 - 2 * k;
  MatrixXd expected = MatrixXd::Zero(n, n);
  expected.topLeftCorner(n1, n1) = At.topLeftCorner(n1, n1);
  expected.block(n1 + n2, n1 + n2 + k, k, k).setIdentity();
  const double a_norm = std::max(spectral_norm(A), 1e-300);
  if (spectral_norm(At - expected) > 1e-6 * a_norm * std::max(1.0, r.cond_T)) {
    throw Error(ErrorCode::kNumericalBreakdown,
                "transformed state matrix is not in block form");
  }
  r.A1 = At.topLeftCorner(n1, n1);
  if (n1 > 0) {
    Eigen::JacobiSVD<MatrixXd> svd(r.A1);
    if (svd.singularValues()(n1 - 1) <= kZeroClusterRelTol * a_norm) {
      throw Error(ErrorCode::kNumericalBreakdown, "nonzero block is singular");
    }
  }
  r.B1 = Bt.topRows(n1);
  r.C1 = Ct.leftCols(n1);
  r.B2 = Bt.middleRows(n1, n2);
  r.C2 = Ct.middleCols(n1, n2);
  r.B3a = Bt.middleRows(n1 + n2, k);
  r.B3b = Bt.bottomRows(k);
  r.C3a = Ct.middleCols(n1 + n2, k);
  r.C3b = Ct.rightCols(k);
  return r;
}

const char* to_string(LaurentMethod method) {
  return method == LaurentMethod::kRealization ? "Realization" : "NumericLimit";
}

LaurentCoefficients laurent_from_realization(const BlockDiagonalRealization& r) {
  const Index m = r.original.ports();
  LaurentCoefficients L;
  L.method = LaurentMethod::kRealization;
  L.G2 = MatrixXd::Zero(m, m);
  L.G1 = MatrixXd::Zero(m, m);
  L.G0 = r.original.D();
  if (r.k() > 0) {
    L.G2 += r.C3a * r.B3b;
    L.G1 += r.C3a * r.B3a + r.C3b * r.B3b;
  }
  if (r.n2() > 0) L.G1 += r.C2 * r.B2;
  if (r.n1() > 0) L.G0 -= r.C1 * Eigen::PartialPivLU<MatrixXd>(r.A1).solve(r.B1);
  return L;
}

namespace {

// Taylor coefficients of s^2 G(s) about 0 from the trapezoid rule on the
// circle |s| = r, which converges geometrically while r stays inside the
// nearest nonzero pole.
LaurentCoefficients contour_limit(const StateSpaceModel& model, double r) {
  constexpr int kNodes = 64;
  const Index m = model.ports();
  MatrixXcd a[3] = {MatrixXcd::Zero(m, m), MatrixXcd::Zero(m, m),
                    MatrixXcd::Zero(m, m)};
  for (int i = 0; i < kNodes; ++i) {
    const Complex z = std::polar(1.0, 2.0 * kPi * i / kNodes);
    const Complex s = r * z;
    const MatrixXcd f = s * s * eval_tf(model, s);
    Complex w = 1.0;
    for (auto& ak : a) {
      ak += f * w;
      w /= z;
    }
  }
  LaurentCoefficients L;
  L.method = LaurentMethod::kNumericLimit;
  L.G2 = a[0].real() / kNodes;
  L.G1 = a[1].real() / (kNodes * r);
  L.G0 = a[2].real() / (kNodes * r * r);
  return L;
}

double laurent_scale(const LaurentCoefficients& L) {
  return spectral_norm(L.G2) + spectral_norm(L.G1) + spectral_norm(L.G0);
}

double laurent_distance(const LaurentCoefficients& a,
                        const LaurentCoefficients& b) {
  return std::max({spectral_norm(a.G2 - b.G2), spectral_norm(a.G1 - b.G1),
                   spectral_norm(a.G0 - b.G0)});
}

}  // namespace

LaurentCoefficients laurent_numeric_limit(const StateSpaceModel& model) {
  const MatrixXd& A = model.A();
  double rho = std::numeric_limits<double>::infinity();
  if (A.rows() > 0) {
    // A double pole at 0 perturbed by rounding splits by ~sqrt(eps) |A|.
    const double zero = 1e-5 * std::max(spectral_norm(A), 1e-300);
    Eigen::EigenSolver<MatrixXd> es(A, false);
    for (const Complex& l : es.eigenvalues()) {
      if (std::abs(l) > zero) rho = std::min(rho, std::abs(l));
    }
  }
  if (!std::isfinite(rho)) rho = 1.0;
  const LaurentCoefficients coarse = contour_limit(model, rho / 2.0);
  const LaurentCoefficients fine = contour_limit(model, rho / 4.0);
  const double scale = std::max(laurent_scale(fine), 1e-300);
  const double gap = laurent_distance(coarse, fine) / scale;
  if (!(gap <= 1e-8)) {
    std::ostringstream os;
    os << "extrapolated coefficients changed by " << gap
       << " (relative) when the contour radius was halved";
    throw Error(ErrorCode::kLimitDivergent, os.str());
  }
  return fine;
}

LaurentResult laurent_coefficients(const StateSpaceModel& model) {
  LaurentResult out;
  out.realization = laurent_from_realization(to_block_diagonal(model));
  out.numeric = laurent_numeric_limit(model);
  out.disagreement = laurent_distance(out.realization, out.numeric) /
                     std::max(laurent_scale(out.realization), 1e-300);
  return out;
}

MatrixXd projector_p(const MatrixXd& X, const MatrixXd& Y) {
  const MatrixXd Xs = symmetrized(X);
  if (Y.rows() != Xs.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "projector: Y has wrong row count");
  }
  const MatrixXd inner = Y.transpose() * Xs * Y;
  if (inner.size() > 0) {
    Eigen::JacobiSVD<MatrixXd> svd(inner);
    const double ynorm = spectral_norm(Y);
    const double smin = svd.singularValues().minCoeff();
    if (smin <= 1e-10 * spectral_norm(Xs) * ynorm * ynorm) {
      std::ostringstream os;
      os << "Y^T X Y is singular (smallest singular value " << smin << ")";
      throw Error(ErrorCode::kSingularInner, os.str());
    }
  }
  const MatrixXd XY = Xs * Y;
  MatrixXd P = Xs;
  if (inner.size() > 0) {
    P -= XY * Eigen::PartialPivLU<MatrixXd>(inner).solve(XY.transpose());
  }
  return 0.5 * (P + P.transpose());
}

MatrixXd build_f_matrix(const LaurentCoefficients& L,
                        std::optional<double> rank_tol) {
  const Index m = L.G2.rows();
  if (spectral_norm(L.G2) <= rank_tol.value_or(0.0)) {
    throw Error(ErrorCode::kG2Zero, "the double-pole coefficient is zero");
  }
  MatrixXd hankel = MatrixXd::Zero(2 * m, 2 * m);
  hankel.topLeftCorner(m, m) = L.G1;
  hankel.topRightCorner(m, m) = L.G2;
  hankel.bottomLeftCorner(m, m) = L.G2;

  Eigen::JacobiSVD<MatrixXd> svd(hankel, Eigen::ComputeThinU);
  const VectorXd& s = svd.singularValues();
  const double tol = rank_tol.value_or(default_rank_tol(hankel));
  Index r = 0;
  while (r < s.size() && s(r) > tol) ++r;
  const MatrixXd U = svd.matrixU().leftCols(r) * s.head(r).asDiagonal();
  const MatrixXd U1 = U.topRows(m);
  const MatrixXd U2 = U.bottomRows(m);

  const MatrixXd M = U1.transpose() * U2;
  Eigen::JacobiSVD<MatrixXd> msvd(M, Eigen::ComputeFullV);
  const double mtol = tol * s(0);
  Index rm = 0;
  while (rm < msvd.singularValues().size() && msvd.singularValues()(rm) > mtol) {
    ++rm;
  }
  return U1 * msvd.matrixV().rightCols(r - rm);
}

// ---------------------------------------------------------------------------

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::kStable: return "Stable";
    case Outcome::kUnstable: return "Unstable";
    case Outcome::kInconclusive: return "Inconclusive";
    case Outcome::kPreconditionFailed: return "PreconditionFailed";
    case Outcome::kBoundary: return "Boundary";
  }
  return "Unknown";
}

const char* to_string(TheoremUsed t) {
  switch (t) {
    case TheoremUsed::kNone: return "none";
    case TheoremUsed::kMixedFreeBody: return "mixed_free_body";
    case TheoremUsed::kUndampedFreeBody: return "undamped_free_body";
    case TheoremUsed::kUndampedFreeBodyNullspace: return "undamped_free_body_nullspace";
    case TheoremUsed::kDampedFreeBody: return "damped_free_body";
    case TheoremUsed::kDampedFreeBodyNullspace: return "damped_free_body_nullspace";
    case TheoremUsed::kFullRankFreeBody: return "full_rank_free_body";
    case TheoremUsed::kDcGain: return "dc_gain";
  }
  return "unknown";
}

const char* to_string(Branch b) {
  switch (b) {
    case Branch::kNone: return "none";
    case Branch::kPSD: return "PSD";
    case Branch::kNSD: return "NSD";
    case Branch::kNullspaceShortcut: return "nullspace_shortcut";
    case Branch::kInvertible: return "invertible";
  }
  return "unknown";
}

bool direct_stability(const StateSpaceModel& G, const StateSpaceModel& Gbar,
                      double margin) {
  return is_hurwitz(closed_loop(G, Gbar).Abreve, margin);
}

namespace {

// Shared body of the general tests: Y^T Gbar(0) Y < 0 plus the coupling
// condition built from N = P(Gbar(0), Y). `extra` is the damping term that
// only the mixed case carries.
void general_test(StabilityVerdict* v, Checker* chk, const MatrixXd& Gb0,
                  const MatrixXd& Y, const MatrixXd& G0, const MatrixXd& extra) {
  const double gnorm = spectral_norm(Gb0);
  const double ynorm = spectral_norm(Y);
  const Tri inner =
      chk->negative_definite("inner", Y.transpose() * Gb0 * Y, gnorm * ynorm * ynorm);
  if (inner == Tri::kBoundary) {
    v->outcome = Outcome::kBoundary;
    v->reason = "Y^T Gbar(0) Y is within the boundary band";
    return;
  }
  MatrixXd N;
  try {
    N = projector_p(Gb0, Y);
  } catch (const Error& e) {
    precondition_failed(v, e.what());
    return;
  }
  const Definiteness d = classify_definiteness(N);
  v->condition_values["projector_min_eig"] = d.min_eig;
  v->condition_values["projector_max_eig"] = d.max_eig;
  const Index m = Gb0.rows();
  const MatrixXd I = MatrixXd::Identity(m, m);
  if (d.is_psd()) {
    v->branch = Branch::kPSD;
    const MatrixXd R = psd_sqrt(N, d.tol_used);
    const MatrixXd a = R * G0 * R, b = R * extra * R;
    const Tri cpl = chk->positive_definite("coupling", I - a - b,
                                           1.0 + spectral_norm(a) + spectral_norm(b));
    settle(v, {inner, cpl});
  } else if (d.is_nsd()) {
    v->branch = Branch::kNSD;
    const MatrixXd R = psd_sqrt(-N, d.tol_used);
    const MatrixXd a = R * G0 * R, b = R * extra * R;
    const Tri cpl = chk->nonsingular("coupling", I + a + b,
                                     1.0 + spectral_norm(a) + spectral_norm(b));
    settle(v, {inner, cpl});
  } else {
    v->outcome = Outcome::kInconclusive;
    v->reason = "the projected controller gain is indefinite";
  }
}

}  // namespace

StabilityVerdict stability_verdict(const StateSpaceModel& G,
                                   const StateSpaceModel& Gbar,
                                   const VerdictOptions& opts) {
  StabilityVerdict v;
  v.tolerances = {{"zero_rel", opts.zero_rel},
                  {"boundary_rel", opts.boundary_rel},
                  {"rank_rel", opts.rank_rel},
                  {"containment_tol", opts.containment_tol},
                  {"hurwitz_margin", opts.hurwitz_margin},
                  {"cond2_rel", opts.ni.cond2_rel},
                  {"sni_floor", opts.ni.sni_floor}};
  if (G.ports() != Gbar.ports()) {
    throw Error(ErrorCode::kDimensionMismatch, "plant and controller port counts differ");
  }

  auto run_oracle = [&]() {
    if (!opts.run_oracle) return;
    try {
      const double a = spectral_abscissa(closed_loop(G, Gbar).Abreve);
      v.oracle_abscissa = a;
      v.oracle_stable = a < -opts.hurwitz_margin;
      if (v.decisive()) {
        v.oracle_agrees = (v.outcome == Outcome::kStable) == *v.oracle_stable;
      }
    } catch (const Error& e) {
      v.reason += v.reason.empty() ? e.what() : std::string("; ") + e.what();
    }
  };

  if (opts.check_preconditions) {
    try {
      const NiReport ni = classify_ni(G, opts.grid, opts.ni);
      if (!ni.is_ni) {
        std::string why = "plant is not NI:";
        if (!ni.cond1_pass) why += " right-half-plane poles;";
        if (!ni.cond2_pass) why += " frequency sign condition fails;";
        if (!ni.cond3_pass) why += " imaginary-axis residue condition fails;";
        if (!ni.cond4_pass || !ni.cond4_higher_order) why += " origin condition fails;";
        precondition_failed(&v, why);
      } else if (!classify_sni(Gbar, opts.grid, opts.ni).is_sni) {
        precondition_failed(&v, "controller is not SNI");
      }
    } catch (const Error& e) {
      precondition_failed(&v, e.what());
    }
    if (v.outcome == Outcome::kPreconditionFailed) {
      run_oracle();
      return v;
    }
  }

  try {
    LaurentCoefficients L;
    if (G.strictly_proper()) {
      L = laurent_from_realization(to_block_diagonal(G));
    } else if (split_at_zero(G.A()).gen_kernel_dim == 0) {
      L.G0 = real_eval(G, 0.0);
      L.G1 = MatrixXd::Zero(G.ports(), G.ports());
      L.G2 = L.G1;
    } else {
      throw Error(ErrorCode::kNotStrictlyProper,
                  "plant with poles at the origin must be strictly proper");
    }
    v.laurent = L;
    const MatrixXd Gb0 = symmetrized(real_eval(Gbar, 0.0));
    const Index m = G.ports();

    const double n0 = spectral_norm(L.G0), n1 = spectral_norm(L.G1),
                 n2 = spectral_norm(L.G2);
    const double zero_thr = opts.zero_rel * (1.0 + n0);
    const bool g1_zero = n1 <= zero_thr;
    const bool g2_zero = n2 <= zero_thr;
    const double rank_tol = opts.rank_rel * std::max({n0, n1, n2, 1e-300});
    v.tolerances["zero_threshold"] = zero_thr;
    v.tolerances["rank_tol"] = rank_tol;
    v.condition_values["norm_G1"] = n1;
    v.condition_values["norm_G2"] = n2;

    std::mt19937_64 gauge_rng(opts.gauge_seed.value_or(0));
    auto regauge = [&](const MatrixXd& Y, bool orthogonal_only) -> MatrixXd {
      if (!opts.gauge_seed || Y.cols() == 0) return Y;
      return Y * (orthogonal_only ? random_orthogonal(Y.cols(), gauge_rng)
                                  : random_invertible(Y.cols(), gauge_rng));
    };

    Checker chk(&v, opts.boundary_rel);
    const double gnorm = spectral_norm(Gb0);

    if (g1_zero && g2_zero) {
      v.theorem = TheoremUsed::kDcGain;
      const MatrixXd prod = L.G0 * Gb0;
      double lmax = -std::numeric_limits<double>::infinity();
      if (m > 0) {
        Eigen::EigenSolver<MatrixXd> es(prod, false);
        lmax = es.eigenvalues().real().maxCoeff();
      }
      v.condition_values["dc_gain_lambda_max"] = lmax;
      settle(&v, {chk.classify(1.0 - lmax, std::abs(lmax))});
    } else if (!g2_zero && (!g1_zero || opts.force_mixed)) {
      v.theorem = TheoremUsed::kMixedFreeBody;
      LaurentCoefficients Lc = L;
      if (g1_zero) Lc.G1.setZero();
      const MatrixXd G2s = symmetrized(Lc.G2);
      const MatrixXd J = regauge(full_rank_factor(G2s, rank_tol).J, true);
      const MatrixXd F = regauge(build_f_matrix(Lc, rank_tol), false);
      const MatrixXd JtJ = J.transpose() * J;
      const MatrixXd JtJ2 = JtJ * JtJ;
      const MatrixXd extra =
          Lc.G1 * J * JtJ2.ldlt().solve(J.transpose() * Lc.G1.transpose());
      v.condition_values["f_columns"] = static_cast<double>(F.cols());
      general_test(&v, &chk, Gb0, F, L.G0, extra);
    } else if (!g2_zero) {
      const MatrixXd G2s = symmetrized(L.G2);
      const Definiteness d2 = classify_definiteness(G2s, rank_tol);
      const MatrixXd J = regauge(full_rank_factor(G2s, rank_tol).J, true);
      if (d2.is_pd()) {
        v.theorem = TheoremUsed::kFullRankFreeBody;
        v.branch = Branch::kInvertible;
        settle(&v, {chk.negative_definite("controller_dc", Gb0, gnorm)});
      } else if (nullspace_contained(G2s, L.G0.transpose(), opts.containment_tol,
                                     rank_tol)) {
        v.theorem = TheoremUsed::kUndampedFreeBodyNullspace;
        v.branch = Branch::kNullspaceShortcut;
        const double jn = spectral_norm(J);
        settle(&v, {chk.negative_definite("inner", J.transpose() * Gb0 * J,
                                          gnorm * jn * jn)});
      } else {
        v.theorem = TheoremUsed::kUndampedFreeBody;
        general_test(&v, &chk, Gb0, J, L.G0, MatrixXd::Zero(m, m));
      }
    } else {
      Eigen::JacobiSVD<MatrixXd> svd(L.G1, Eigen::ComputeThinU);
      const VectorXd& s = svd.singularValues();
      Index r = 0;
      while (r < s.size() && s(r) > rank_tol) ++r;
      const MatrixXd F1 =
          regauge(svd.matrixU().leftCols(r) * s.head(r).asDiagonal(), false);
      if (r == m) {
        v.theorem = TheoremUsed::kFullRankFreeBody;
        v.branch = Branch::kInvertible;
        settle(&v, {chk.negative_definite("controller_dc", Gb0, gnorm)});
      } else if (nullspace_contained(L.G1.transpose(), L.G0.transpose(),
                                     opts.containment_tol, rank_tol)) {
        v.theorem = TheoremUsed::kDampedFreeBodyNullspace;
        v.branch = Branch::kNullspaceShortcut;
        const double fn = spectral_norm(F1);
        settle(&v, {chk.negative_definite("inner", F1.transpose() * Gb0 * F1,
                                          gnorm * fn * fn)});
      } else {
        v.theorem = TheoremUsed::kDampedFreeBody;
        general_test(&v, &chk, Gb0, F1, L.G0, MatrixXd::Zero(m, m));
      }
    }
  } catch (const Error& e) {
    precondition_failed(&v, e.what());
  }
  run_oracle();
  return v;
}

}  // namespace nifb
