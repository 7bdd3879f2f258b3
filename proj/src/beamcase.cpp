#include "nifb/beamcase.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "nifb/error.hpp"
#include "nifb/matrixcore.hpp"

namespace nifb {

namespace {

constexpr double kRootRelTol = 1e-10;
constexpr double kSingularRcond = 1e-9;
constexpr double kResidueNoiseRel = 1e-8;

// Neville extrapolation to x = 0 of samples f(x_i), entrywise.
template <typename M>
M extrapolate_to_zero(const std::vector<double>& x, std::vector<M> f) {
  const std::size_t n = x.size();
  for (std::size_t level = 1; level < n; ++level) {
    for (std::size_t i = n - 1; i >= level; --i) {
      const double xi = x[i], xj = x[i - level];
      f[i] = (xj * f[i] - xi * f[i - 1]) / (xj - xi);
      if (i == level) break;
    }
  }
  return f[n - 1];
}

// Limit at x -> 0 of an even function h sampled at x0 / 2^k.
template <typename M>
M even_limit(const std::function<M(double)>& h, double x0, int levels = 5) {
  std::vector<double> x2;
  std::vector<M> f;
  double x = x0;
  for (int k = 0; k < levels; ++k, x *= 0.5) {
    x2.push_back(x * x);
    f.push_back(h(x));
  }
  return extrapolate_to_zero(x2, f);
}

double d_on_axis(const BeamParameters& p, double w) {
  return d_of_s(p, Complex(0.0, w)).real();
}

// Derivative of w -> D(jw), fourth-order central differences.
double d_derivative(const BeamParameters& p, double w) {
  const double h = 1e-4 * std::max(1.0, std::abs(w));
  return (8.0 * (d_on_axis(p, w + h) - d_on_axis(p, w - h)) -
          (d_on_axis(p, w + 2 * h) - d_on_axis(p, w - 2 * h))) /
         (12.0 * h);
}

// Natural frequency scale sqrt(EI / rho A) / L^2.
double frequency_scale(const BeamParameters& p) {
  return std::sqrt(p.flexural_rigidity() / p.mass_per_length()) /
         (p.length * p.length);
}

std::vector<double> roots_below(const BeamParameters& p, double w_max,
                                double step, std::size_t limit) {
  std::vector<double> roots;
  double w_prev = step;
  double d_prev = d_on_axis(p, w_prev);
  for (double w = 2 * step; w <= w_max && roots.size() < limit;) {
    const double d = d_on_axis(p, w);
    if (d == 0.0) {
      roots.push_back(w);
    } else if ((d > 0) != (d_prev > 0) && d_prev != 0.0) {
      double lo = w_prev, hi = w, dlo = d_prev;
      while (hi - lo > kRootRelTol * lo) {
        const double mid = 0.5 * (lo + hi);
        const double dm = d_on_axis(p, mid);
        if (dm == 0.0) { lo = hi = mid; break; }
        if ((dm > 0) == (dlo > 0)) { lo = mid; dlo = dm; } else { hi = mid; }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    w_prev = w;
    d_prev = d;
    w = step * std::round(w / step + 1.0);
  }
  return roots;
}

std::vector<double> first_roots(const BeamParameters& p, int count) {
  double w_max = 4.0 * frequency_scale(p) * (count + 1) * (count + 1);
  for (int attempt = 0; attempt < 8; ++attempt, w_max *= 2.0) {
    try {
      return find_modal_roots(p, count, w_max);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInsufficientRange) throw;
    }
  }
  throw Error(ErrorCode::kInsufficientRange, "could not bracket modal roots");
}

MatrixXd n_at_root(const BeamParameters& p, double w0) {
  const double d = 2e-2 * w0;
  auto h = [&](double delta) -> MatrixXd {
    auto at = [&](double w) {
      const BeamTransferSample t = beam_tf(p, Complex(0.0, w));
      return MatrixXd((t.G * t.D_value).real());
    };
    return 0.5 * (at(w0 + delta) + at(w0 - delta));
  };
  return even_limit<MatrixXd>(h, d, 4);
}

MatrixXd n_at_zero(const BeamParameters& p) {
  auto h = [&](double eps) -> MatrixXd {
    const BeamTransferSample t = beam_tf(p, Complex(eps, 0.0));
    return (t.G * t.D_value).real();
  };
  return even_limit<MatrixXd>(h, 0.05 * frequency_scale(p));
}

// The residues come out of a numerical limit; eigenvalues below the
// extrapolation noise are snapped to zero so that the rank is exact.
MatrixXd clean_residue(const MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrized(m));
  VectorXd lam = es.eigenvalues();
  const double floor = kResidueNoiseRel * lam.cwiseAbs().maxCoeff();
  for (Index i = 0; i < lam.size(); ++i) {
    if (std::abs(lam(i)) <= floor) lam(i) = 0.0;
  }
  return symmetrized(es.eigenvectors() * lam.asDiagonal() *
                     es.eigenvectors().transpose());
}

double min_sym_eig(const MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrized(m),
                                             Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace

void BeamParameters::validate() const {
  const std::pair<const char*, double> positive[] = {
      {"Ih", hub_inertia},   {"L", length},           {"rho", density},
      {"A_cs", area},        {"E", youngs_modulus},   {"I_am", area_moment},
      {"C_cap", capacitance}, {"ts", thickness},      {"Ca", actuator_gain},
      {"Cs", sensor_gain}};
  for (const auto& [name, v] : positive) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string("beam parameter ") + name + " must be positive");
    }
  }
  if (!std::isfinite(k31)) {
    throw Error(ErrorCode::kInvalidArgument, "beam parameter k31 is not finite");
  }
}

BeamParameters beam_parameters_from_json(const Json& j) {
  if (!j.is_object()) {
    throw Error(ErrorCode::kParseError, "beam parameters must be an object");
  }
  BeamParameters p;
  std::pair<const char*, double*> fields[] = {
      {"Ih", &p.hub_inertia},   {"L", &p.length},
      {"rho", &p.density},      {"A_cs", &p.area},
      {"E", &p.youngs_modulus}, {"I_am", &p.area_moment},
      {"k31", &p.k31},          {"C_cap", &p.capacitance},
      {"ts", &p.thickness},     {"Ca", &p.actuator_gain},
      {"Cs", &p.sensor_gain}};
  for (const auto& [key, value] : j.items()) {
    auto it = std::find_if(std::begin(fields), std::end(fields),
                           [&](const auto& f) { return key == f.first; });
    if (it == std::end(fields)) {
      throw Error(ErrorCode::kParseError, "unknown beam parameter '" + key + "'");
    }
    if (!value.is_number()) {
      throw Error(ErrorCode::kParseError, "beam parameter '" + key + "' is not a number");
    }
    *it->second = value.get<double>();
  }
  p.validate();
  return p;
}

Json beam_parameters_to_json(const BeamParameters& p) {
  return Json{{"Ih", p.hub_inertia},   {"L", p.length},
              {"rho", p.density},      {"A_cs", p.area},
              {"E", p.youngs_modulus}, {"I_am", p.area_moment},
              {"k31", p.k31},          {"C_cap", p.capacitance},
              {"ts", p.thickness},     {"Ca", p.actuator_gain},
              {"Cs", p.sensor_gain}};
}

BeamTransferSample beam_tf(const BeamParameters& p, Complex s) {
  p.validate();
  if (s == Complex(0.0, 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "beam transfer matrix needs s != 0");
  }
  const double EI = p.flexural_rigidity();
  const double L = p.length;
  const Complex beta = std::pow(-p.mass_per_length() * s * s / EI, 0.25);

  // Inside the span y'''' = beta^4 y. The propagator exp(A x) of the
  // companion system is expanded in its eigenbasis exp(lambda x), each term
  // anchored at the end where it decays so that no entry grows like
  // exp(beta L) and the boundary rows stay well conditioned.
  const Complex j(0.0, 1.0);
  const std::array<Complex, 4> lambda = {beta, -beta, j * beta, -j * beta};
  std::array<Complex, 4> at0, atL;  // basis functions at x = 0 and x = L
  for (int k = 0; k < 4; ++k) {
    if (lambda[k].real() > 0.0) {
      at0[k] = std::exp(-lambda[k] * L);
      atL[k] = 1.0;
    } else {
      at0[k] = 1.0;
      atL[k] = std::exp(lambda[k] * L);
    }
  }
  auto deriv = [&](int k, int order, const std::array<Complex, 4>& base) {
    return std::pow(lambda[k], order) * base[k];
  };

  // The actuator moment u = Ca Va / EI enters as curvature jumps at both
  // ends of the span, so y''(L) = u inside and Y''(0) = y''(0) - u outside.
  // Rows: y(0) = 0; hub balance; y''(L) = u; y'''(L) = 0.
  Eigen::Matrix4cd M;
  for (int k = 0; k < 4; ++k) {
    M(0, k) = at0[k];
    M(1, k) = -p.hub_inertia * s * s * deriv(k, 1, at0) + EI * deriv(k, 2, at0);
    M(2, k) = deriv(k, 2, atL);
    M(3, k) = deriv(k, 3, atL);
  }
  const Eigen::Vector4cd rows = M.rowwise().norm().cwiseInverse();
  M = rows.asDiagonal() * M;
  const Eigen::Vector4cd cols = M.colwise().norm().transpose().cwiseInverse();
  M = M * cols.asDiagonal();
  Eigen::PartialPivLU<Eigen::Matrix4cd> lu(M);
  if (!(lu.rcond() > kSingularRcond)) {
    throw Error(ErrorCode::kSingularBoundarySystem,
                "boundary system singular at a modal root");
  }

  BeamTransferSample out;
  out.s = s;
  out.D_value = d_of_s(p, s);
  out.G.resize(2, 2);
  for (int input = 0; input < 2; ++input) {
    const double tau = input == 0 ? 1.0 : 0.0;
    const double u = input == 1 ? p.actuator_gain / EI : 0.0;
    const Eigen::Vector4cd rhs(0.0, -tau + EI * u, u, 0.0);
    const Eigen::Vector4cd c =
        cols.asDiagonal() * lu.solve(rows.asDiagonal() * rhs);
    Complex slope0 = 0.0, slopeL = 0.0;
    for (int k = 0; k < 4; ++k) {
      slope0 += c(k) * deriv(k, 1, at0);
      slopeL += c(k) * deriv(k, 1, atL);
    }
    out.G(0, input) = slope0;
    out.G(1, input) = p.sensor_gain * (slopeL - slope0);
  }
  return out;
}

Complex d_of_s(const BeamParameters& p, Complex s) {
  const double EI = p.flexural_rigidity();
  const double rhoA = p.mass_per_length();
  const Complex beta = std::pow(-rhoA * s * s / EI, 0.25);
  const Complex bl = beta * p.length;
  const Complex c = std::cos(bl), sn = std::sin(bl);
  const Complex ch = std::cosh(bl), sh = std::sinh(bl);
  return 4.0 * beta * EI *
         (rhoA * (c * sh - ch * sn) -
          beta * beta * beta * p.hub_inertia * (1.0 + c * ch));
}

std::vector<double> find_modal_roots(const BeamParameters& p, int count,
                                     double w_max, double step) {
  p.validate();
  if (count < 1) throw Error(ErrorCode::kInvalidArgument, "count must be >= 1");
  if (!(step > 0.0) || !(w_max > 2 * step)) {
    throw Error(ErrorCode::kInvalidArgument, "bad root scan range");
  }
  auto roots = roots_below(p, w_max, step, static_cast<std::size_t>(count));
  if (static_cast<int>(roots.size()) < count) {
    throw Error(ErrorCode::kInsufficientRange,
                "found " + std::to_string(roots.size()) + " of " +
                    std::to_string(count) + " roots below " +
                    std::to_string(w_max) + " rad/s");
  }
  return roots;
}

ModalResidue modal_residue(const BeamParameters& p, double w0) {
  p.validate();
  if (!(w0 > 0.0)) throw Error(ErrorCode::kNotARoot, "root must be positive");
  ModalResidue r;
  r.omega0 = w0;
  r.dD_domega = d_derivative(p, w0);
  const double d0 = d_on_axis(p, w0);
  if (std::abs(d0) > 1e-6 * std::abs(r.dD_domega) * w0) {
    throw Error(ErrorCode::kNotARoot,
                "D(j w) = " + std::to_string(d0) + " at w = " + std::to_string(w0));
  }
  r.N = n_at_root(p, w0);
  r.K = -r.N / r.dD_domega;
  r.asymmetry = spectral_norm(r.K - r.K.transpose()) /
                std::max(spectral_norm(r.K), 1e-300);
  r.min_eig = min_sym_eig(r.K);
  return r;
}

MatrixXd beam_free_body_limit(const BeamParameters& p) {
  p.validate();
  auto h = [&](double eps) -> MatrixXd {
    return (beam_tf(p, Complex(eps, 0.0)).G * (eps * eps)).real();
  };
  return even_limit<MatrixXd>(h, 0.05 * frequency_scale(p));
}

BeamApproximation finite_dim_approx(const BeamParameters& p, int n,
                                    KCalibration calibration) {
  p.validate();
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "n must be >= 1");
  BeamApproximation out;
  out.roots = first_roots(p, n + 1);

  double prod_sq = 1.0;
  for (int i = 0; i < n; ++i) prod_sq *= out.roots[i] * out.roots[i];

  if (calibration == KCalibration::kGeometricMean) {
    const double w = std::sqrt(out.roots[n - 1] * out.roots[n]);
    double df = -w * w;
    for (int i = 0; i < n; ++i) df *= out.roots[i] * out.roots[i] - w * w;
    out.omega0 = w;
    out.k = d_on_axis(p, w) / df;
  } else {
    auto h = [&](double eps) -> double {
      return d_of_s(p, Complex(eps, 0.0)).real() / (eps * eps);
    };
    out.omega0 = 0.0;
    out.k = even_limit<double>(h, 0.05 * frequency_scale(p)) / prod_sq;
  }

  out.model.ports = 2;
  out.model.g2 = clean_residue(n_at_zero(p) / (out.k * prod_sq));
  for (int i = 0; i < n; ++i) {
    const double pi2 = out.roots[i] * out.roots[i];
    double denom = out.k * -pi2;
    for (int j = 0; j < n; ++j) {
      if (j != i) denom *= out.roots[j] * out.roots[j] - pi2;
    }
    ModalTerm t;
    t.p = out.roots[i];
    t.C = clean_residue(n_at_root(p, out.roots[i]) / denom);
    out.model.modes.push_back(std::move(t));
  }
  return out;
}

std::vector<ScanPoint> emit_residue_scan(const BeamParameters& p, double gamma,
                                         const std::vector<double>& omegas) {
  p.validate();
  std::vector<ScanPoint> out;
  if (omegas.empty()) return out;
  const double w_top = *std::max_element(omegas.begin(), omegas.end());
  const double step = std::min(0.01, 0.5 * frequency_scale(p));
  const auto roots = w_top > 2 * step
                         ? roots_below(p, 1.01 * w_top + step, step, SIZE_MAX)
                         : std::vector<double>{};
  for (double w : omegas) {
    if (!(w > 0.0)) continue;
    const bool near_root = std::any_of(roots.begin(), roots.end(), [&](double r) {
      return std::abs(w - r) <= 1e-4 * r;
    });
    if (near_root) continue;
    const BeamTransferSample t = beam_tf(p, Complex(0.0, w));
    const double D = t.D_value.real();
    const MatrixXd N = (t.G * t.D_value).real();
    const MatrixXd form = -N * d_derivative(p, w) +
                          gamma * D * D * MatrixXd::Identity(2, 2);
    out.push_back({w, min_sym_eig(form)});
  }
  return out;
}

}  // namespace nifb
