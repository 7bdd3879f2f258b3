#include <gtest/gtest.h>

#include "nifb/error.hpp"
#include "nifb/ircsynth.hpp"
#include "nifb/ltimodel.hpp"
#include "nifb/matrixcore.hpp"
#include "nifb/model_io.hpp"
#include "test_util.hpp"

namespace nifb {
namespace {

using test::Rng;

MatrixXd M2(double a, double b, double c, double d) {
  MatrixXd m(2, 2);
  m << a, b, c, d;
  return m;
}

StateSpaceModel double_integrator() {
  MatrixXd A(2, 2), B(2, 1), C(1, 2);
  A << 0, 1, 0, 0;
  B << 0, 1;
  C << 1, 0;
  return StateSpaceModel(A, B, C, MatrixXd::Zero(1, 1));
}

IrcController case_study_irc() {
  return make_irc(M2(35, 15, 15, 20), M2(0.745, 0.521, 0.521, 1.021),
                  M2(4.29, 0, 0, 2.22));
}

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no nifb::Error thrown";
  return ErrorCode::kInvalidArgument;
}

// --- matrixcore -----------------------------------------------------------

TEST(DefinitenessTest, Examples) {
  EXPECT_EQ(classify_definiteness(MatrixXd::Identity(2, 2), 1e-9).kind,
            DefinitenessKind::kPositiveDefinite);
  EXPECT_EQ(classify_definiteness(MatrixXd::Zero(3, 3), 1e-9).kind,
            DefinitenessKind::kZero);
  EXPECT_EQ(classify_definiteness(M2(0, 0, 0, -0.182252), 1e-6).kind,
            DefinitenessKind::kNegativeSemidefinite);
  EXPECT_EQ(classify_definiteness(M2(1, 0, 0, -1)).kind, DefinitenessKind::kIndefinite);
}

TEST(DefinitenessTest, NegationSwapsClasses) {
  Rng rng(3);
  const MatrixXd cases[] = {test::rand_spd(rng, 3, 0.1, 2),
                            test::rand_psd_rank(rng, 3, 1), test::rand_sym(rng, 3),
                            MatrixXd::Zero(3, 3)};
  for (const MatrixXd& m : cases) {
    const auto k = classify_definiteness(m).kind;
    const auto n = classify_definiteness(-m).kind;
    switch (k) {
      case DefinitenessKind::kPositiveDefinite:
        EXPECT_EQ(n, DefinitenessKind::kNegativeDefinite); break;
      case DefinitenessKind::kPositiveSemidefinite:
        EXPECT_EQ(n, DefinitenessKind::kNegativeSemidefinite); break;
      case DefinitenessKind::kNegativeDefinite:
        EXPECT_EQ(n, DefinitenessKind::kPositiveDefinite); break;
      case DefinitenessKind::kNegativeSemidefinite:
        EXPECT_EQ(n, DefinitenessKind::kPositiveSemidefinite); break;
      default:
        EXPECT_EQ(n, k);
    }
  }
}

TEST(DefinitenessTest, DefaultTolerance) {
  EXPECT_DOUBLE_EQ(default_sign_tol(MatrixXd::Identity(2, 2) * 1e-3), 1e-9);
  EXPECT_DOUBLE_EQ(default_sign_tol(MatrixXd::Identity(2, 2) * 1e3), 1e-6);
}

TEST(SymmetrizeTest, RejectsLargeAsymmetry) {
  EXPECT_EQ(code_of([] { symmetrized(M2(1, 1, 0, 1)); }), ErrorCode::kNonSymmetric);
  const MatrixXd s = symmetrized(M2(1, 1 + 1e-12, 1, 1));
  EXPECT_EQ(s(0, 1), s(1, 0));
}

TEST(PsdSqrtTest, Examples) {
  EXPECT_TRUE(psd_sqrt(M2(4, 0, 0, 9)).isApprox(M2(2, 0, 0, 3), 1e-14));
  const MatrixXd r = psd_sqrt(M2(0, 0, 0, 0.182252));
  // Oracle: square back.
  EXPECT_NEAR(r(1, 1), std::sqrt(0.182252), 1e-12);
  EXPECT_TRUE((r * r).isApprox(M2(0, 0, 0, 0.182252), 1e-12));
  EXPECT_TRUE(psd_sqrt(MatrixXd::Zero(2, 2)).isZero(0));
  EXPECT_EQ(code_of([] { psd_sqrt(M2(1, 0, 0, -1)); }), ErrorCode::kNotPSD);
}

TEST(PsdSqrtTest, SquaresBackOnRandomInputs) {
  Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    const Index n = 1 + i % 4;
    const MatrixXd m = test::rand_psd_rank(rng, n, 1 + i % n);
    const MatrixXd r = psd_sqrt(m);
    EXPECT_LE(spectral_norm(r * r - m), 1e-10 * spectral_norm(m));
  }
}

TEST(FullRankFactorTest, Examples) {
  const FullRankFactor f = full_rank_factor(M2(0.14, 0, 0, 0));
  ASSERT_EQ(f.rank(), 1);
  EXPECT_NEAR(std::abs(f.J(0, 0)), std::sqrt(0.14), 1e-14);
  EXPECT_NEAR(f.J(1, 0), 0.0, 1e-14);
  const FullRankFactor id = full_rank_factor(MatrixXd::Identity(2, 2));
  EXPECT_EQ(id.rank(), 2);
  EXPECT_TRUE((id.J * id.J.transpose()).isApprox(MatrixXd::Identity(2, 2), 1e-14));
}

TEST(FullRankFactorTest, RankAndReconstruction) {
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    const Index n = 2 + i % 3;
    const Index r = 1 + i % n;
    const MatrixXd m = test::rand_psd_rank(rng, n, r);
    const FullRankFactor f = full_rank_factor(m);
    EXPECT_EQ(f.rank(), numerical_rank(m));
    EXPECT_EQ(f.rank(), r);
    EXPECT_LE(spectral_norm(f.J * f.J.transpose() - m), 1e-10 * spectral_norm(m));
  }
}

TEST(NullspaceTest, Containment) {
  const MatrixXd e1 = M2(1, 0, 0, 0);
  EXPECT_TRUE(nullspace_contained(e1, e1, 1e-10));
  EXPECT_FALSE(nullspace_contained(e1, MatrixXd::Identity(2, 2), 1e-10));
  // Case-study G2 (rank 1) against a full-rank G0: N(G2) = span(e2) is not in
  // N(G0) = {0}.
  const MatrixXd G0 = M2(0.2674, 3.08e-5, 3.08e-5, 0.2033);
  EXPECT_FALSE(nullspace_contained(M2(0.14, 0, 0, 0), G0.transpose(), 1e-8));
}

TEST(NullspaceTest, ReflexiveAndTransitive) {
  const MatrixXd a = MatrixXd::Identity(3, 3).leftCols(1) *
                     MatrixXd::Identity(3, 3).leftCols(1).transpose();  // N = {e2, e3}
  MatrixXd b = MatrixXd::Zero(3, 3);
  b(0, 0) = 1;
  b(1, 1) = 2;                                                          // N = {e3}
  const MatrixXd c = MatrixXd::Identity(3, 3);                          // N = {0}
  for (const MatrixXd* m : {&a, static_cast<const MatrixXd*>(&b), &c}) EXPECT_TRUE(nullspace_contained(*m, *m, 1e-12));
  EXPECT_TRUE(nullspace_contained(c, b, 1e-12));
  EXPECT_TRUE(nullspace_contained(b, a, 1e-12));
  EXPECT_TRUE(nullspace_contained(c, a, 1e-12));
  EXPECT_FALSE(nullspace_contained(a, b, 1e-12));
}

// --- ltimodel -------------------------------------------------------------

TEST(StateSpaceModelTest, ValidatesShapes) {
  EXPECT_EQ(code_of([] {
              StateSpaceModel(MatrixXd::Zero(2, 2), MatrixXd::Zero(3, 1),
                              MatrixXd::Zero(1, 2), MatrixXd::Zero(1, 1));
            }),
            ErrorCode::kDimensionMismatch);
  MatrixXd A = MatrixXd::Zero(1, 1);
  A(0, 0) = std::nan("");
  EXPECT_THROW(StateSpaceModel(A, MatrixXd::Ones(1, 1), MatrixXd::Ones(1, 1),
                               MatrixXd::Zero(1, 1)),
               Error);
  EXPECT_TRUE(double_integrator().strictly_proper());
  EXPECT_FALSE(case_study_irc().realization.strictly_proper());
}

TEST(EvalTfTest, Examples) {
  EXPECT_NEAR(eval_tf(double_integrator(), Complex(0, 2))(0, 0).real(), -0.25, 1e-15);
  const MatrixXcd g0 = eval_tf(case_study_irc().realization, 0.0);
  const MatrixXd expected = M2(-2.2029, -1.0650, -1.0650, -0.6971);
  EXPECT_LE((g0.real() - expected).cwiseAbs().maxCoeff(), 5e-5);
  const StateSpaceModel irc = case_study_irc().realization;
  EXPECT_LE((eval_tf(irc, Complex(0, 1e9)) - irc.D().cast<Complex>()).norm(), 1e-6);
  EXPECT_EQ(code_of([] { eval_tf(double_integrator(), 0.0); }), ErrorCode::kSingularAtS);
}

TEST(MinimalityTest, Examples) {
  EXPECT_TRUE(is_minimal(StateSpaceModel(MatrixXd::Zero(1, 1), MatrixXd::Ones(1, 1),
                                         MatrixXd::Ones(1, 1), MatrixXd::Zero(1, 1))));
  MatrixXd A = M2(-1, 0, 0, -2), B(2, 1), C(1, 2);
  B << 1, 0;
  C << 1, 0;
  EXPECT_FALSE(is_minimal(StateSpaceModel(A, B, C, MatrixXd::Zero(1, 1))));
}

TEST(MinimalityTest, InvariantUnderSimilarity) {
  Rng rng(21);
  for (int i = 0; i < 20; ++i) {
    const ModalModel m = test::rand_ni_modal(rng, 2, i % 2 == 0, i % 3 == 0, 2);
    const StateSpaceModel g = modal_to_ss(m);
    EXPECT_TRUE(is_minimal(g));
    EXPECT_TRUE(is_minimal(g.transformed(test::rand_transform(rng, g.states()))));
  }
}

TEST(ClosedLoopTest, Examples) {
  // 1/s^2 with 1/(s+1) - 2: characteristic polynomial s^3 + s^2 + 2s + 1.
  const StateSpaceModel ctrl(MatrixXd::Constant(1, 1, -1), MatrixXd::Ones(1, 1),
                             MatrixXd::Ones(1, 1), MatrixXd::Constant(1, 1, -2));
  const ClosedLoop cl = closed_loop(double_integrator(), ctrl);
  ASSERT_EQ(cl.Abreve.rows(), 3);
  const auto poly = test::char_poly(cl.Abreve);
  const std::vector<double> expected{1, 1, 2, 1};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(poly[i], expected[i], 1e-12);

  const StateSpaceModel a = StateSpaceModel::Static(MatrixXd::Constant(1, 1, 0.5));
  const StateSpaceModel b = StateSpaceModel::Static(MatrixXd::Constant(1, 1, 2.0));
  EXPECT_EQ(code_of([&] { closed_loop(a, b); }), ErrorCode::kIllPosed);
}

TEST(ClosedLoopTest, StrictlyProperPlantFormula) {
  Rng rng(8);
  const StateSpaceModel g(test::randn(rng, 3, 3), test::randn(rng, 3, 2),
                          test::randn(rng, 2, 3), MatrixXd::Zero(2, 2));
  const StateSpaceModel k(test::randn(rng, 2, 2), test::randn(rng, 2, 2),
                          test::randn(rng, 2, 2), test::randn(rng, 2, 2));
  MatrixXd expected(5, 5);
  expected << g.A() + g.B() * k.D() * g.C(), g.B() * k.C(), k.B() * g.C(), k.A();
  EXPECT_TRUE(closed_loop(g, k).Abreve.isApprox(expected, 1e-14));
}

TEST(ClosedLoopTest, SpectrumInvariantUnderSimilarity) {
  Rng rng(9);
  const ModalModel m = test::rand_ni_modal(rng, 2, true, false, 1);
  const StateSpaceModel g = modal_to_ss(m);
  const StateSpaceModel k = case_study_irc().realization;
  auto sorted_eigs = [](const MatrixXd& a) {
    Eigen::EigenSolver<MatrixXd> es(a, false);
    std::vector<Complex> v(es.eigenvalues().data(),
                           es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(v.begin(), v.end(), [](Complex x, Complex y) {
      return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
    });
    return v;
  };
  const auto e0 = sorted_eigs(closed_loop(g, k).Abreve);
  const auto e1 = sorted_eigs(closed_loop(g.transformed(test::rand_transform(rng, g.states())),
                                          k.transformed(test::rand_transform(rng, 2)))
                                  .Abreve);
  ASSERT_EQ(e0.size(), e1.size());
  for (std::size_t i = 0; i < e0.size(); ++i) EXPECT_LE(std::abs(e0[i] - e1[i]), 1e-8);
}

TEST(HurwitzTest, Examples) {
  EXPECT_TRUE(is_hurwitz(M2(-1, 0, 0, -2)));
  EXPECT_FALSE(is_hurwitz(M2(0, 1, 0, 0)));
  EXPECT_EQ(spectral_abscissa(MatrixXd(0, 0)), -std::numeric_limits<double>::infinity());
}

TEST(ModalModelTest, Examples) {
  ModalModel m;
  m.ports = 1;
  m.g2 = MatrixXd::Ones(1, 1);
  const StateSpaceModel g = modal_to_ss(m);
  ASSERT_EQ(g.states(), 2);
  EXPECT_TRUE(g.A().isApprox(M2(0, 1, 0, 0)));
  EXPECT_NEAR(eval_tf(g, Complex(0, 2))(0, 0).real(), -0.25, 1e-14);

  ModalModel mode;
  mode.ports = 1;
  mode.modes.push_back({2.0, MatrixXd::Constant(1, 1, 3.0)});
  EXPECT_NEAR(eval_tf(modal_to_ss(mode), 0.0)(0, 0).real(), 3.0 / 4.0, 1e-14);

  ModalModel bad = mode;
  bad.modes.push_back({1.0, MatrixXd::Ones(1, 1)});
  EXPECT_EQ(code_of([&] { modal_to_ss(bad); }), ErrorCode::kInvalidArgument);
}

TEST(ModalModelTest, CaseStudyRealizationMatchesModalSum) {
  ModalModel m;
  m.ports = 2;
  m.g2 = M2(0.14, 0, 0, 0);
  m.modes.push_back({3.4, M2(3.0907, 3.5573e-4, 3.5573e-4, 2.35)});
  const StateSpaceModel g = modal_to_ss(m);
  EXPECT_TRUE(is_minimal(g));
  EXPECT_LE(test::rel_diff(eval_tf(g, Complex(0, 1)), test::modal_sum(m, Complex(0, 1))),
            1e-10);
}

TEST(ModalModelTest, RealizationMatchesModalSumAtRandomPoints) {
  Rng rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const ModalModel m = test::rand_ni_modal(rng, 1 + trial % 3, trial % 2 == 0,
                                             trial % 3 != 0, 1 + trial % 3);
    const StateSpaceModel g = modal_to_ss(m);
    for (int k = 0; k < 20; ++k) {
      const Complex s(test::unif(rng, -2, 2), test::unif(rng, -6, 6));
      EXPECT_LE(test::rel_diff(eval_tf(g, s), test::modal_sum(m, s)), 1e-9);
    }
  }
}

// --- ircsynth -------------------------------------------------------------

TEST(IrcTest, CaseStudyDcGain) {
  const IrcController irc = case_study_irc();
  const MatrixXd expected = M2(-2.2029, -1.0650, -1.0650, -0.6971);
  EXPECT_LE((irc.dc_gain() - expected).cwiseAbs().maxCoeff(), 5e-5);
  EXPECT_LE((eval_tf(irc.realization, 0.0).real() - irc.dc_gain()).norm(), 1e-10);
}

TEST(IrcTest, ScalarExample) {
  const IrcController irc = make_irc(MatrixXd::Ones(1, 1), MatrixXd::Ones(1, 1),
                                     MatrixXd::Constant(1, 1, 2.0));
  EXPECT_NEAR(irc.dc_gain()(0, 0), -1.0, 1e-15);
  EXPECT_NEAR(eval_tf(irc.realization, Complex(0, 1))(0, 0).real(), 0.5 - 2.0, 1e-15);
  EXPECT_NEAR(eval_tf(irc.realization, Complex(0, 1))(0, 0).imag(), -0.5, 1e-15);
}

TEST(IrcTest, RejectsBadParameters) {
  try {
    make_irc(M2(1, 2, 2, 1), MatrixXd::Identity(2, 2), MatrixXd::Zero(2, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotPD);
    EXPECT_NE(std::string(e.what()).find("Gamma"), std::string::npos);
  }
  EXPECT_EQ(code_of([] {
              make_irc(MatrixXd::Identity(2, 2), MatrixXd::Identity(2, 2), M2(0, 1, 0, 0));
            }),
            ErrorCode::kNonSymmetric);
}

TEST(IrcTest, DcIdentityOnRandomParameters) {
  Rng rng(17);
  for (int i = 0; i < 30; ++i) {
    const Index m = 1 + i % 3;
    const IrcController irc =
        make_irc(test::rand_spd(rng, m, 0.1, 5), test::rand_spd(rng, m, 0.1, 5),
                 test::rand_sym(rng, m));
    const MatrixXd phi_inv = irc.Phi.inverse();
    EXPECT_LE((eval_tf(irc.realization, 0.0).real() - (phi_inv - irc.Delta)).norm(),
              1e-10 * (1 + phi_inv.norm()));
  }
}

// --- model_io -------------------------------------------------------------

TEST(ModelIoTest, RoundTrip) {
  const StateSpaceModel g = case_study_irc().realization.with_name("k");
  const StateSpaceModel back = model_from_json(model_to_json(g));
  EXPECT_TRUE(back.A().isApprox(g.A()));
  EXPECT_TRUE(back.D().isApprox(g.D()));
  EXPECT_EQ(back.name(), "k");
}

TEST(ModelIoTest, RejectsRaggedAndNonFinite) {
  EXPECT_EQ(code_of([] { matrix_from_json(Json::parse("[[1,2],[3]]"), "A"); }),
            ErrorCode::kParseError);
  EXPECT_EQ(code_of([] { matrix_from_json(Json::parse("[[1,\"x\"]]"), "A"); }),
            ErrorCode::kParseError);
  EXPECT_EQ(code_of([] { matrix_from_json(Json::array({Json::array({1e308 * 10})}), "A"); }),
            ErrorCode::kParseError);
  try {
    parse_json_text("{\n  \"A\": [1,\n", "m.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParseError);
    EXPECT_NE(std::string(e.what()).find("m.json:"), std::string::npos);
  }
}

TEST(ModelIoTest, IrcAndModalForms) {
  const Json irc = Json::parse(R"({"irc": {"Gamma": [[1]], "Phi": [[1]], "Delta": [[2]]}})");
  EXPECT_NEAR(eval_tf(model_from_json(irc), 0.0)(0, 0).real(), -1.0, 1e-14);
  const Json modal = Json::parse(R"({"modal": {"G2": [[1]], "modes": []}})");
  EXPECT_NEAR(eval_tf(model_from_json(modal), Complex(0, 2))(0, 0).real(), -0.25, 1e-14);
}

}  // namespace
}  // namespace nifb
