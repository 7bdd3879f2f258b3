#include "nifb/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include <Eigen/QR>

#include "nifb/error.hpp"

namespace nifb {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

bool coin(Rng& rng, double p) { return uniform(rng, 0.0, 1.0) < p; }

MatrixXd gaussian(Rng& rng, Index rows, Index cols) {
  std::normal_distribution<double> nd;
  MatrixXd g(rows, cols);
  for (Index i = 0; i < g.size(); ++i) g.data()[i] = nd(rng);
  return g;
}

MatrixXd orthogonal(Rng& rng, Index n) {
  Eigen::HouseholderQR<MatrixXd> qr(gaussian(rng, n, n));
  return qr.householderQ() * MatrixXd::Identity(n, n);
}

MatrixXd random_pd(Rng& rng, Index n, double lo, double hi) {
  VectorXd d(n);
  for (Index i = 0; i < n; ++i) d(i) = uniform(rng, lo, hi);
  const MatrixXd q = orthogonal(rng, n);
  return q * d.asDiagonal() * q.transpose();
}

// rows x cols (rows >= cols) with singular values in [lo, hi].
MatrixXd well_conditioned(Rng& rng, Index rows, Index cols, double lo,
                          double hi) {
  VectorXd d(cols);
  for (Index i = 0; i < cols; ++i) d(i) = uniform(rng, lo, hi);
  return orthogonal(rng, rows).leftCols(cols) * d.asDiagonal() *
         orthogonal(rng, cols);
}

// Random PSD matrix confined to range(Y), of rank between 1 and cols(Y).
MatrixXd random_psd_in(Rng& rng, const MatrixXd& Y) {
  const Index r = uniform_int(rng, 1, static_cast<int>(Y.cols()));
  const MatrixXd v = Y * well_conditioned(rng, Y.cols(), r, 0.3, 1.2);
  return v * v.transpose();
}

std::vector<double> distinct_frequencies(Rng& rng, int count, double lo,
                                         double hi) {
  std::vector<double> p;
  while (static_cast<int>(p.size()) < count) {
    const double x = uniform(rng, lo, hi);
    bool close = false;
    for (double y : p) close = close || std::abs(x - y) < 0.05;
    if (!close) p.push_back(x);
  }
  std::sort(p.begin(), p.end());
  return p;
}

IrcController random_irc(Rng& rng, Index m) {
  const MatrixXd Gamma = random_pd(rng, m, 0.3, 5.0);
  const MatrixXd Phi = random_pd(rng, m, 0.3, 3.0);
  VectorXd d(m);
  for (Index i = 0; i < m; ++i) {
    d(i) = coin(rng, 0.75) ? -uniform(rng, 0.05, 3.0) : uniform(rng, 0.05, 1.5);
  }
  const MatrixXd q = orthogonal(rng, m);
  const MatrixXd dc = q * d.asDiagonal() * q.transpose();
  const MatrixXd phi_inv = Phi.ldlt().solve(MatrixXd::Identity(m, m));
  MatrixXd Delta = phi_inv - dc;
  Delta = 0.5 * (Delta + Delta.transpose());
  return make_irc(Gamma, Phi, Delta);
}

}  // namespace

const char* to_string(PlantFamily f) {
  switch (f) {
    case PlantFamily::kNoFreeBody: return "no_free_body";
    case PlantFamily::kUndampedFreeBody: return "undamped_free_body";
    case PlantFamily::kMixedFreeBody: return "mixed_free_body";
    case PlantFamily::kDampedFreeBody: return "damped_free_body";
  }
  return "unknown";
}

TrialCase generate_trial(Rng& rng, PlantFamily family,
                         const GeneratorSpec& spec) {
  const int m = uniform_int(rng, 1, std::max(1, spec.ports_max));
  TrialCase tc;
  tc.family = family;
  tc.modal.ports = m;

  // Directions that modes are confined to when a nullspace shortcut is wanted.
  std::optional<MatrixXd> confine;
  const bool full = coin(rng, spec.full_rank_prob);

  switch (family) {
    case PlantFamily::kNoFreeBody:
      break;
    case PlantFamily::kUndampedFreeBody: {
      const int k = full ? m : uniform_int(rng, 1, std::max(1, m - 1));
      const MatrixXd J = well_conditioned(rng, m, k, 0.3, 1.5);
      tc.modal.g2 = J * J.transpose();
      if (!full && coin(rng, spec.shortcut_prob)) confine = J;
      break;
    }
    case PlantFamily::kMixedFreeBody: {
      const int k = uniform_int(rng, 1, m);
      const int n2 = uniform_int(rng, 0, m - k);
      const MatrixXd basis = well_conditioned(rng, m, k + n2, 0.3, 1.5);
      const MatrixXd J = basis.leftCols(k);
      MatrixXd S = random_pd(rng, k, 0.1, 2.0);
      if (n2 > 0 && coin(rng, 0.3)) S.setZero();
      MatrixXd G1 = J * S * J.transpose();
      if (n2 > 0) {
        const MatrixXd C2 = basis.rightCols(n2);
        G1 += C2 * random_pd(rng, n2, 0.1, 2.0) * C2.transpose();
      }
      tc.modal.g2 = J * J.transpose();
      tc.modal.g1 = G1;
      break;
    }
    case PlantFamily::kDampedFreeBody: {
      const int n2 = full ? m : uniform_int(rng, 1, std::max(1, m - 1));
      const MatrixXd C2 = well_conditioned(rng, m, n2, 0.3, 1.5);
      tc.modal.g1 = C2 * random_pd(rng, n2, 0.1, 2.0) * C2.transpose();
      if (!full && coin(rng, spec.shortcut_prob)) confine = C2;
      break;
    }
  }

  const int lo = family == PlantFamily::kNoFreeBody ? 1 : 0;
  const int modes = uniform_int(rng, lo, std::max(lo, spec.modes_max));
  for (double p : distinct_frequencies(rng, modes, spec.p_min, spec.p_max)) {
    ModalTerm t;
    t.p = p;
    t.C = random_psd_in(rng, confine ? *confine : MatrixXd::Identity(m, m));
    tc.modal.modes.push_back(std::move(t));
  }

  tc.plant = modal_to_ss(tc.modal);
  if (spec.scramble && tc.plant.states() > 0) {
    const Index n = tc.plant.states();
    VectorXd d(n);
    for (Index i = 0; i < n; ++i) d(i) = std::exp(uniform(rng, -0.7, 0.7));
    tc.plant = tc.plant.transformed(orthogonal(rng, n) * d.asDiagonal() *
                                    orthogonal(rng, n));
  }
  tc.controller = random_irc(rng, m);
  return tc;
}

TrialCase generate_trial(std::uint64_t seed, int trial,
                         const GeneratorSpec& spec) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial)};
  Rng rng(seq);
  if (spec.families.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "generator has no plant families");
  }
  const PlantFamily family = spec.families[trial % spec.families.size()];
  return generate_trial(rng, family, spec);
}

AgreementReport montecarlo_agreement(int count, std::uint64_t seed,
                                     const GeneratorSpec& spec,
                                     const VerdictOptions& opts,
                                     unsigned threads) {
  AgreementReport rep;
  rep.count = std::max(count, 0);
  if (rep.count == 0) return rep;

  std::vector<StabilityVerdict> verdicts(rep.count);
  std::vector<PlantFamily> families(rep.count);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int i = next++; i < rep.count; i = next++) {
      const TrialCase tc = generate_trial(seed, i, spec);
      families[i] = tc.family;
      VerdictOptions o = opts;
      o.run_oracle = true;
      verdicts[i] = stability_verdict(tc.plant, tc.controller.realization, o);
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(rep.count));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (int i = 0; i < rep.count; ++i) {
    const StabilityVerdict& v = verdicts[i];
    ++rep.outcomes[to_string(v.outcome)];
    ++rep.theorems[to_string(v.theorem)];
    if (!v.decisive() || !v.oracle_agrees) continue;
    ++rep.applicable;
    if (*v.oracle_agrees) {
      ++rep.agreed;
    } else {
      rep.counterexamples.push_back({i, families[i], v});
    }
  }
  return rep;
}

}  // namespace nifb
