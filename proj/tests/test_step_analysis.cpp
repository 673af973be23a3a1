#include "kpos/step_analysis.hpp"

#include <gtest/gtest.h>

#include <random>

#include "test_support.hpp"

namespace kpos {
namespace {

using test::banded_zero_pole_system;
using test::banded_zero_pole_system_complex_zeros;
using test::companion_realization;
using test::two_positive_realization;

TEST(ImpulseSignChanges, BandedSystemHasTwoCrossings) {
    const auto report = impulse_sign_changes(banded_zero_pole_system(), 16);
    EXPECT_EQ(report.count, 2);
    ASSERT_EQ(report.crossings.size(), 2u);
    EXPECT_EQ(report.crossings[0], (std::pair<int, int>{2, 3}));
    EXPECT_EQ(report.crossings[1], (std::pair<int, int>{3, 4}));
}

TEST(ImpulseSignChanges, NonnegativeImpulseHasNone) {
    EXPECT_EQ(impulse_sign_changes(two_positive_realization(), 40).count, 0);
    EXPECT_THROW(impulse_sign_changes(two_positive_realization(), 1), std::invalid_argument);
}

TEST(ImpulseSignChanges, ComplexZeroVariantMeetsItsBound) {
    const auto sys = banded_zero_pole_system_complex_zeros();
    EXPECT_EQ(variation(sys.b), 2);
    EXPECT_EQ(impulse_sign_changes(sys, 16).count, 2);
}

TEST(OvershootBound, BandedSystemCertifiesBoundTwo) {
    const auto sys = banded_zero_pole_system();
    const auto result = overshoot_upper_bound(sys, 4);
    ASSERT_TRUE(result.bound.has_value());
    EXPECT_EQ(*result.bound, 2);
    EXPECT_EQ(result.var_b, 2);
    EXPECT_EQ(result.eta_ladder, (std::vector<double>{1e-4, 1e-3, 1e-2}));
    for (const auto& cond : result.conditions) EXPECT_TRUE(cond.pass) << cond.name;
}

TEST(OvershootBound, ExternallyPositiveSystemBoundZero) {
    const auto result = overshoot_upper_bound(two_positive_realization(), 1);
    ASSERT_TRUE(result.bound.has_value());
    EXPECT_EQ(*result.bound, 0);
    EXPECT_TRUE(result.eta_ladder.empty());  // nonsingular route
}

TEST(OvershootBound, VariationEqualToOrderYieldsNoBound) {
    // certified at k but var(b) == k: the bound needs var(b) <= k-1
    const auto sys = tp_realization(PartialFractions{{0.2, 0.6}, {1.0, 2.0}});
    StateSpace modified = sys;
    modified.b << 1.0, -1.0;  // var = 1 = k - 1 at k = 2, but try k = 1
    const auto result = overshoot_upper_bound(modified, 1);
    EXPECT_FALSE(result.bound.has_value());
    bool found = false;
    for (const auto& cond : result.conditions)
        if (cond.name == "var(b) <= k - 1" && !cond.pass) found = true;
    EXPECT_TRUE(found);
}

TEST(OvershootBound, ContinuousTimeRouteUsesMetzlerCompounds) {
    Matrix A = Matrix::Zero(3, 3);
    A.diagonal() << -3, -2, -1;  // ascending: observability compounds positive
    Vector b(3), c(3);
    b << 1, -1, 1;
    c << 1, 1, 1;
    const auto sys = make_state_space(A, b, c.transpose(), TimeDomain::continuous);
    const auto result = overshoot_upper_bound(sys, 3);
    ASSERT_TRUE(result.bound.has_value()) << [&] {
        std::string s;
        for (const auto& cond : result.conditions)
            if (!cond.pass) s += cond.name + "; ";
        return s;
    }();
    EXPECT_EQ(*result.bound, 2);
    EXPECT_TRUE(result.eta_ladder.empty());
    // the certified bound dominates the sampled sign changes
    EXPECT_LE(impulse_sign_changes(sys, 50).count, 2);
}

TEST(OvershootBound, CompanionFormHasNoCertificate) {
    const auto result = overshoot_upper_bound(companion_realization(), 3);
    EXPECT_FALSE(result.bound.has_value());
}

TEST(StepExtrema, MatchesImpulseSignChanges) {
    EXPECT_EQ(step_extrema_count(banded_zero_pole_system(), 16), 2);
    EXPECT_EQ(step_extrema_count(two_positive_realization(), 16), 0);  // monotone

    auto zero = two_positive_realization();
    zero.b.setZero();
    EXPECT_EQ(step_extrema_count(zero, 16), 0);
    EXPECT_THROW(step_extrema_count(zero, 2), std::invalid_argument);
}

TEST(StepExtrema, EqualsImpulseVariationOnRandomSystems) {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 40; ++trial) {
        const auto sys = test::random_stable_system(2 + static_cast<int>(rng() % 4), rng);
        for (int horizon : {8, 25, 60}) {
            EXPECT_EQ(step_extrema_count(sys, horizon),
                      impulse_sign_changes(sys, horizon).count)
                << "trial " << trial << " horizon " << horizon;
        }
    }
}

TEST(ConeMembership, RecoversNonnegativeCombinations) {
    std::mt19937_64 rng(103);
    std::uniform_real_distribution<double> entry(0.0, 2.0);
    Matrix P(5, 4);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 4; ++j) P(i, j) = entry(rng);
    const Vector v = P * Vector::Ones(4);
    const auto member = cone_membership(v, P);
    EXPECT_TRUE(member.member);
    EXPECT_GE(member.coefficients.minCoeff(), 0.0);
    EXPECT_LT((P * member.coefficients - v).norm(), 1e-8);
}

TEST(ConeMembership, SeparatesNegatedColumn) {
    Matrix P(3, 2);
    P << 1, 2,
         2, 1,
         1, 1;
    const Vector v = -P.col(0);
    EXPECT_FALSE(cone_membership(v, P).member);
}

TEST(ConeMembership, RandomConstructedInstances) {
    std::mt19937_64 rng(107);
    std::uniform_real_distribution<double> entry(-1.0, 1.0);
    std::uniform_real_distribution<double> coeff(0.0, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        Matrix P(6, 4);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 4; ++j) P(i, j) = entry(rng);
        Vector x(4);
        for (int j = 0; j < 4; ++j) x(j) = coeff(rng);
        const auto result = cone_membership(P * x, P);
        EXPECT_TRUE(result.member);
        EXPECT_LT(result.residual, 1e-10 * std::max(1.0, (P * x).norm()) + 1e-12);
    }
}

TEST(DualConeMembership, OrthantAndBoundary) {
    const Matrix I = Matrix::Identity(3, 3);
    Vector y(3);
    y << 1, 0, 2;
    EXPECT_TRUE(dual_cone_membership(y, I).member);
    y << 1, -0.1, 2;
    const auto fail = dual_cone_membership(y, I);
    EXPECT_FALSE(fail.member);
    EXPECT_EQ(fail.arg_min, 2);
    EXPECT_DOUBLE_EQ(fail.min_entry, -0.1);

    Matrix P(3, 2);
    P << 1, 0,
         0, 1,
         0, 0;
    Vector orth(3);
    orth << 0, 0, 5;  // orthogonal to the columns: boundary member
    EXPECT_TRUE(dual_cone_membership(orth, P).member);
}

TEST(DualConeMembership, TransformedObservabilityCompounds) {
    // transform between the companion form and the positive realization,
    // oriented so that A P = P A_plus: P = C^3(A,b) C^3(A_+,b_+)^{-1}
    const auto sys = companion_realization();
    const auto plus = two_positive_realization();
    const Matrix Cc = controllability_matrix(sys.A, sys.b, 3);
    const Matrix Cp = controllability_matrix(plus.A, plus.b, 3);
    const Matrix P = Cc * Cp.inverse();
    for (int j = 1; j <= 2; ++j) {
        const Matrix Oj = multiplicative_compound(observability_matrix(sys.A, sys.c, j), j);
        const auto result = dual_cone_membership(Oj.row(0).transpose(),
                                                 multiplicative_compound(P, j));
        EXPECT_TRUE(result.member) << "j=" << j << " min entry " << result.min_entry;
    }
}

TEST(ConeDuality, WitnessesAreMutuallyConsistent) {
    std::mt19937_64 rng(109);
    std::uniform_real_distribution<double> entry(-1.0, 1.0);
    int checked = 0;
    for (int trial = 0; trial < 100; ++trial) {
        Matrix P(5, 3);
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 3; ++j) P(i, j) = entry(rng);
        Vector y(5);
        for (int i = 0; i < 5; ++i) y(i) = entry(rng);
        if (!dual_cone_membership(y, P).member) continue;
        ++checked;
        Vector x(3);
        for (int j = 0; j < 3; ++j) x(j) = std::abs(entry(rng));
        EXPECT_GE(y.dot(P * x), -1e-9);  // <y, Px> >= 0 for cone members
    }
    EXPECT_GT(checked, 0);
}

TEST(VerifyRealizationTransform, AcceptsConnectingTransform) {
    const auto sys = companion_realization();
    const auto plus = two_positive_realization();
    const Matrix P = controllability_matrix(sys.A, sys.b, 3) *
                     controllability_matrix(plus.A, plus.b, 3).inverse();
    const auto verdict = verify_realization_transform(sys, plus, P, 2);
    EXPECT_TRUE(verdict.pass) << [&] {
        std::string s;
        for (const auto& c : verdict.conditions)
            if (!c.pass) s += c.name + " (" + c.witness + "); ";
        return s;
    }();
}

TEST(VerifyRealizationTransform, PerturbationBreaksSomeCondition) {
    const auto sys = companion_realization();
    const auto plus = two_positive_realization();
    Matrix P = controllability_matrix(sys.A, sys.b, 3) *
               controllability_matrix(plus.A, plus.b, 3).inverse();
    P(1, 2) += 1e-3;
    const auto verdict = verify_realization_transform(sys, plus, P, 2);
    EXPECT_FALSE(verdict.pass);
}

TEST(VerifyRealizationTransform, IdentityOnCertifiedSystem) {
    const auto sys = tp_realization(PartialFractions{{0.2, 0.5, 0.8}, {1, 4, 9}});
    const auto verdict =
        verify_realization_transform(sys, sys, Matrix::Identity(3, 3), 3);
    EXPECT_TRUE(verdict.pass);
}

TEST(VerifyRealizationTransform, RankDeficientTransformFails) {
    const auto sys = companion_realization();
    const auto plus = two_positive_realization();
    const auto verdict =
        verify_realization_transform(sys, plus, Matrix::Zero(3, 3), 2);
    EXPECT_FALSE(verdict.pass);
    EXPECT_FALSE(verdict.conditions.front().pass);  // rank condition listed first
}

TEST(VerifyRealizationTransform, PassImpliesInternalCertification) {
    const auto sys = companion_realization();
    const auto plus = two_positive_realization();
    const Matrix P = controllability_matrix(sys.A, sys.b, 3) *
                     controllability_matrix(plus.A, plus.b, 3).inverse();
    const auto verdict = verify_realization_transform(sys, plus, P, 2);
    ASSERT_TRUE(verdict.pass);
    EXPECT_GE(internal_hankel_k_positivity(plus, 2).order_certified, 2);
}

TEST(VerifyObserverTransform, SimilarityAndPaddedEmbedding) {
    const auto plus = tp_realization(PartialFractions{{0.2, 0.5, 0.8}, {1, 4, 9}});
    Matrix T(3, 3);
    T << 1, 0.2, -0.1,
         0, 1, 0.3,
         0.1, 0, 1;  // invertible change of coordinates
    const Matrix A = T * plus.A * T.inverse();
    const RowVector c = plus.c * T.inverse();

    // K = n: P is the similarity itself
    auto verdict = verify_observer_transform(A, c, plus.A, plus.c, T, 3);
    EXPECT_TRUE(verdict.pass) << [&] {
        std::string s;
        for (const auto& cond : verdict.conditions)
            if (!cond.pass) s += cond.name + " (" + cond.witness + "); ";
        return s;
    }();

    // K = n + 1: pad with an unobservable mode and a zero column in P
    Matrix A_big = Matrix::Zero(4, 4);
    A_big.topLeftCorner(3, 3) = plus.A;
    A_big(3, 3) = 0.05;
    RowVector c_big = RowVector::Zero(4);
    c_big.head(3) = plus.c;
    Matrix P_big = Matrix::Zero(3, 4);
    P_big.leftCols(3) = T;
    verdict = verify_observer_transform(A, c, A_big, c_big, P_big, 3);
    EXPECT_TRUE(verdict.pass);
}

TEST(VerifyObserverTransform, IdentityAndMismatchCases) {
    const auto banded = banded_zero_pole_system();
    const auto verdict = verify_observer_transform(banded.A, banded.c, banded.A, banded.c,
                                                   Matrix::Identity(4, 4), 4);
    EXPECT_TRUE(verdict.pass);  // O compounds nonnegative for this fixture

    RowVector wrong_c = banded.c;
    wrong_c(0) += 0.1;
    const auto broken = verify_observer_transform(banded.A, banded.c, banded.A, wrong_c,
                                                  Matrix::Identity(4, 4), 4);
    EXPECT_FALSE(broken.pass);
    bool found = false;
    for (const auto& cond : broken.conditions)
        if (cond.name == "c_plus == c P" && !cond.pass && !cond.witness.empty()) found = true;
    EXPECT_TRUE(found);

    // inobservable pair is a precondition error
    Matrix N = Matrix::Zero(2, 2);
    RowVector cz = RowVector::Zero(2);
    EXPECT_THROW(verify_observer_transform(N, cz, N, cz, Matrix::Identity(2, 2), 1),
                 PreconditionError);
}

TEST(BoundSoundness, CertifiedBoundsDominateObservedSignChanges) {
    std::mt19937_64 rng(113);
    std::uniform_real_distribution<double> pole(0.05, 0.9);
    std::uniform_real_distribution<double> residue(0.2, 3.0);
    std::uniform_real_distribution<double> entry(-1.0, 1.0);
    int bounds_checked = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 3);
        std::vector<double> poles(static_cast<std::size_t>(n)),
            residues(static_cast<std::size_t>(n));
        for (auto& p : poles) p = pole(rng);
        std::sort(poles.begin(), poles.end());
        bool distinct = true;
        for (std::size_t i = 1; i < poles.size(); ++i)
            if (poles[i] - poles[i - 1] < 1e-3) distinct = false;
        if (!distinct) continue;
        for (auto& r : residues) r = residue(rng);
        StateSpace sys = tp_realization(PartialFractions{poles, residues});
        for (int i = 0; i < n; ++i) sys.b(i) = entry(rng);  // arbitrary input vector
        const auto result = overshoot_upper_bound(sys, n);
        ASSERT_TRUE(result.bound.has_value()) << "trial " << trial;
        ++bounds_checked;
        const auto observed = impulse_sign_changes(sys, 200);
        EXPECT_LE(observed.count, *result.bound) << "trial " << trial;
    }
    EXPECT_GT(bounds_checked, 30);

    // the published-style fixtures are tight
    EXPECT_EQ(*overshoot_upper_bound(banded_zero_pole_system(), 4).bound,
              impulse_sign_changes(banded_zero_pole_system(), 200).count);
}

}  // namespace
}  // namespace kpos
