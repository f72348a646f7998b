#include <gtest/gtest.h>

#include <cmath>

#include "agrospray/error.hpp"
#include "agrospray/model.hpp"
#include "support.hpp"

using namespace agrospray;

namespace {

void expect_rel(double actual, double expected, double rel)
{
    EXPECT_NEAR(actual, expected, rel * std::abs(expected)) << "expected " << expected;
}

} // namespace

TEST(ModelParams, DefaultsAreTheReferenceSet)
{
    const ModelParams p;
    EXPECT_EQ(p.insect_birth, 1.0);
    EXPECT_EQ(p.pest_birth, 2.5);
    EXPECT_EQ(p.spider_mortality, 3.1);
    EXPECT_EQ(p.hunt_pests, 1.2);
    EXPECT_EQ(p.hunt_insects, 0.2);
    EXPECT_EQ(p.spray_intensity, 0.7);
    EXPECT_EQ(p.on_target, 0.9);
    EXPECT_EQ(p.conversion, 1.0);
    EXPECT_EQ(p.woods_capacity, 5.0);
    EXPECT_EQ(p.vineyard_capacity, 1000.0);
    EXPECT_EQ(p.spider_kill, 0.01);
    EXPECT_FALSE(p.check());
}

TEST(ModelParams, ViolationsNameTheField)
{
    ModelParams p;
    p.on_target = 1.5;
    ASSERT_TRUE(p.check());
    EXPECT_EQ(p.check()->field, "q");
    p = ModelParams{};
    p.conversion = 0.0;
    EXPECT_EQ(p.check()->field, "k");
    p = ModelParams{};
    p.woods_capacity = 0.0;
    EXPECT_EQ(p.check()->field, "W");
    p = ModelParams{};
    p.spider_kill = -1.0;
    EXPECT_EQ(p.check()->field, "K");
    EXPECT_THROW(p.validate(), InvalidArgument);
}

TEST(ModelParams, MinTimeSetChangesOnlyHuntingAndBirth)
{
    const ModelParams m = mintime_params();
    EXPECT_EQ(m.hunt_insects, 2.0);
    EXPECT_EQ(m.pest_birth, 0.3);
    EXPECT_EQ(m.spider_mortality, 3.1);
    EXPECT_EQ(m.vineyard_capacity, 1000.0);
}

TEST(Dynamics, HandEvaluatedAtInitialState)
{
    const PopulationState d = dynamics_rhs({3.1, 3.7, 2.2}, 0.0, ModelParams{});
    EXPECT_NEAR(d.insects, -1.1160, 5e-5);
    EXPECT_NEAR(d.spiders, 0.5920, 5e-5);
    EXPECT_NEAR(d.pests, -4.2801, 5e-5);
}

TEST(Dynamics, OriginWithAndWithoutSpraying)
{
    const PopulationState rest = dynamics_rhs({0, 0, 0}, 0.0, mintime_params());
    EXPECT_EQ(rest.insects, 0.0);
    EXPECT_EQ(rest.spiders, 0.0);
    EXPECT_EQ(rest.pests, 0.0);
    const PopulationState sprayed = dynamics_rhs({0, 0, 0}, 1.0, ModelParams{});
    EXPECT_NEAR(sprayed.insects, -0.07, 1e-15);
    EXPECT_NEAR(sprayed.spiders, -0.0063, 1e-15);
    EXPECT_NEAR(sprayed.pests, -0.63, 1e-15);
}

TEST(Dynamics, RejectsNonFiniteInput)
{
    EXPECT_THROW(dynamics_rhs({NAN, 0, 0}, 0.0, ModelParams{}), InvalidArgument);
    EXPECT_THROW(dynamics_rhs({0, 0, 0}, INFINITY, ModelParams{}), InvalidArgument);
    EXPECT_THROW(adjoint_rhs_fixed({0, NAN, 0}, {0, 0, 0}, ModelParams{}), InvalidArgument);
}

TEST(Dynamics, UnsprayedInvariantManifolds)
{
    auto g = support::rng();
    const ModelParams p;
    for (int i = 0; i < 100; ++i) {
        const double f = support::uniform(g, 0, 6), s = support::uniform(g, 0, 6), v = support::uniform(g, 0, 6);
        EXPECT_EQ(dynamics_rhs({0.0, s, v}, 0.0, p).insects, 0.0);
        EXPECT_EQ(dynamics_rhs({f, 0.0, v}, 0.0, p).spiders, 0.0);
        EXPECT_EQ(dynamics_rhs({f, s, 0.0}, 0.0, p).pests, 0.0);
    }
}

TEST(Adjoint, FixedHorizonExamples)
{
    const ModelParams p;
    const AdjointState zero = adjoint_rhs_fixed({0, 0, 0}, {1.3, 2.0, 0.4}, p);
    EXPECT_EQ(zero.insects, 0.0);
    EXPECT_EQ(zero.spiders, 0.0);
    EXPECT_EQ(zero.pests, -1.0);

    const AdjointState a = adjoint_rhs_fixed({1, 0, 0}, {5.0, 0, 0}, p);
    EXPECT_NEAR(a.insects, 1.0, 1e-15);
    EXPECT_NEAR(a.spiders, 1.0, 1e-15);
    EXPECT_NEAR(a.pests, -1.0, 1e-15);

    const AdjointState b = adjoint_rhs_fixed({0, 1, 0}, {0, 0, 0}, p);
    EXPECT_NEAR(b.insects, 0.0, 1e-15);
    EXPECT_NEAR(b.spiders, 3.1, 1e-15);
    EXPECT_NEAR(b.pests, -1.0, 1e-15);
}

TEST(Adjoint, MinTimeExamples)
{
    const AdjointState zero = adjoint_rhs_mintime({0, 0, 0, 0.7}, {1, 2, 3}, ModelParams{});
    EXPECT_EQ(zero.insects, 0.0);
    EXPECT_EQ(zero.spiders, 0.0);
    EXPECT_EQ(zero.pests, 0.0);

    ModelParams low;
    low.pest_birth = 0.3;
    EXPECT_NEAR(adjoint_rhs_mintime({0, 0, 1}, {0, 0, 0}, low).pests, -0.3, 1e-15);

    // Symbolic substitution oracle (tests/oracles/singular_terms.py).
    const AdjointState ones = adjoint_rhs_mintime({1, 1, 1}, {1, 1, 1}, ModelParams{});
    EXPECT_NEAR(ones.insects, -0.6, 1e-14);
    EXPECT_NEAR(ones.spiders, 3.1, 1e-14);
    EXPECT_NEAR(ones.pests, -2.495, 1e-14);
}

TEST(Adjoint, MinTimeRhsIsLinearInCostates)
{
    auto g = support::rng();
    const ModelParams p;
    for (int i = 0; i < 100; ++i) {
        const PopulationState x{support::uniform(g, -1, 6), support::uniform(g, -1, 6), support::uniform(g, -1, 6)};
        const AdjointState l{support::uniform(g, -5, 5), support::uniform(g, -5, 5), support::uniform(g, -5, 5), 0};
        const double alpha = support::uniform(g, -3, 3);
        const AdjointState base = adjoint_rhs_mintime(l, x, p);
        const AdjointState scaled = adjoint_rhs_mintime({alpha * l.insects, alpha * l.spiders, alpha * l.pests}, x, p);
        EXPECT_NEAR(scaled.insects, alpha * base.insects, 1e-12 * (1 + std::abs(base.insects)));
        EXPECT_NEAR(scaled.spiders, alpha * base.spiders, 1e-12 * (1 + std::abs(base.spiders)));
        EXPECT_NEAR(scaled.pests, alpha * base.pests, 1e-12 * (1 + std::abs(base.pests)));
    }
}

TEST(Adjoint, FixedMinusMinTimeIsTheRunningCostTerm)
{
    auto g = support::rng(3);
    const ModelParams p = mintime_params();
    for (int i = 0; i < 100; ++i) {
        const PopulationState x{support::uniform(g, 0, 6), support::uniform(g, 0, 6), support::uniform(g, 0, 6)};
        const AdjointState l{support::uniform(g, -5, 5), support::uniform(g, -5, 5), support::uniform(g, -5, 5)};
        const AdjointState a = adjoint_rhs_fixed(l, x, p), b = adjoint_rhs_mintime(l, x, p);
        EXPECT_EQ(a.insects - b.insects, 0.0);
        EXPECT_EQ(a.spiders - b.spiders, 0.0);
        EXPECT_NEAR(a.pests - b.pests, -1.0, 1e-12);
    }
}

TEST(Hamiltonian, RunningCostOnly)
{
    ModelParams p;
    EXPECT_DOUBLE_EQ(hamiltonian({0, 0, 2}, 0.0, {0, 0, 0}, p, ProblemKind::FixedHorizon), 2.0);
    p.control_weight = 50.0;
    EXPECT_DOUBLE_EQ(hamiltonian({0, 0, 0}, 0.5, {0, 0, 0}, p, ProblemKind::FixedHorizon), 6.25);
}

TEST(Hamiltonian, MinTimeIsMultiplierPlusCostateFlow)
{
    auto g = support::rng(11);
    const ModelParams p = mintime_params();
    for (int i = 0; i < 50; ++i) {
        const PopulationState x{support::uniform(g, 0, 5), support::uniform(g, 0, 5), support::uniform(g, 0, 5)};
        const AdjointState l{support::uniform(g, -2, 2), support::uniform(g, -2, 2), support::uniform(g, -2, 2),
                             support::uniform(g, 0, 1)};
        const double u = support::uniform(g, 0, 1);
        const PopulationState d = dynamics_rhs(x, u, p);
        const double flow = l.insects * d.insects + l.spiders * d.spiders + l.pests * d.pests;
        EXPECT_NEAR(hamiltonian(x, u, l, p, ProblemKind::MinTime) - l.multiplier, flow, 1e-12);
    }
}

TEST(Hamiltonian, StrictlyConvexInControlWhenWeighted)
{
    auto g = support::rng(5);
    ModelParams p;
    p.control_weight = 50.0;
    for (int i = 0; i < 100; ++i) {
        const PopulationState x{support::uniform(g, 0, 5), support::uniform(g, 0, 5), support::uniform(g, 0, 5)};
        const AdjointState l{support::uniform(g, -50, 50), support::uniform(g, -50, 50), support::uniform(g, -50, 50)};
        const double u = support::uniform(g, 0.1, 0.9), du = 0.05;
        const double second = hamiltonian(x, u + du, l, p, ProblemKind::FixedHorizon)
                              - 2 * hamiltonian(x, u, l, p, ProblemKind::FixedHorizon)
                              + hamiltonian(x, u - du, l, p, ProblemKind::FixedHorizon);
        EXPECT_GT(second, 0.0);
    }
}

TEST(ControlFromAdjoint, Examples)
{
    ModelParams p;
    p.control_weight = 50.0;
    EXPECT_EQ(control_from_adjoint({0, 0, 0}, p), 0.0);
    EXPECT_NEAR(control_from_adjoint({0, 0, 79.3651}, p), 1.0, 1e-6);
    EXPECT_NEAR(control_from_adjoint({0, 0, 50.0 / (0.7 * 0.9) * 0.5}, p), 0.5, 1e-12);
    EXPECT_EQ(control_from_adjoint({0, 0, -10}, p), 0.0);
    p.control_weight = 0.0;
    EXPECT_THROW(control_from_adjoint({0, 0, 1}, p), DivisionByZero);
}

TEST(ControlFromAdjoint, MatchesGridScanOfHamiltonian)
{
    auto g = support::rng(17);
    ModelParams p;
    p.control_weight = 50.0;
    constexpr int points = 10000;
    for (int i = 0; i < 100; ++i) {
        const PopulationState x{support::uniform(g, 0, 5), support::uniform(g, 0, 5), support::uniform(g, 0, 5)};
        const AdjointState l{support::uniform(g, -100, 100), support::uniform(g, -100, 100),
                             support::uniform(g, -100, 100)};
        double best_u = 0.0, best_h = INFINITY;
        for (int j = 0; j <= points; ++j) {
            const double u = static_cast<double>(j) / points;
            const double h = hamiltonian(x, u, l, p, ProblemKind::FixedHorizon);
            if (h < best_h) {
                best_h = h;
                best_u = u;
            }
        }
        const double formula = control_from_adjoint(l, p);
        EXPECT_GE(formula, 0.0);
        EXPECT_LE(formula, 1.0);
        EXPECT_LE(std::abs(best_u - formula), 1.0 / points + 1e-12);
    }
}

TEST(SwitchingFunction, Examples)
{
    const ModelParams p;
    EXPECT_EQ(switching_function({0, 0, 0}, p), 0.0);
    EXPECT_NEAR(switching_function({1, 0, 0}, p), -0.07, 1e-15);
    EXPECT_NEAR(switching_function({0, 1, 1}, p), -0.6363, 1e-14);
}

TEST(SwitchingFunction, IsTheControlCoefficientOfTheHamiltonian)
{
    auto g = support::rng(23);
    const ModelParams p = mintime_params();
    for (int i = 0; i < 50; ++i) {
        const PopulationState x{support::uniform(g, 0, 5), support::uniform(g, 0, 5), support::uniform(g, 0, 5)};
        const AdjointState l{support::uniform(g, -2, 2), support::uniform(g, -2, 2), support::uniform(g, -2, 2), 0.4};
        const double slope = hamiltonian(x, 1.0, l, p, ProblemKind::MinTime)
                             - hamiltonian(x, 0.0, l, p, ProblemKind::MinTime);
        EXPECT_NEAR(slope, switching_function(l, p), 1e-12);
    }
}

// Frozen values from tests/oracles/singular_terms.py, an independent symbolic
// encoding of both numerators.
struct SingularOracle {
    bool mintime;
    PopulationState x;
    AdjointState l;
    double closed_a, b, derived_a, u_sing;
};

const SingularOracle kSingularOracles[] = {
    {false, {1, 1, 1}, {1, 1, 1}, 12800068.75, -70437.5, -10720868.75, -76.101996450754215},
    {true, {1.3, 0.7, 2.1}, {0.4, -0.3, 0.8}, -102321593.2834, -226562.0, -26707254.7066, -58.940278393110937},
    {false, {2.9, 2.1, 2.0}, {-0.5, 1.7, 0.25}, -33120085.25, 262215.625, -26291222.75, 50.132830089740076},
    {true, {0.2, 3.0, 0.05}, {1.2, 0.6, -0.9}, -312279447.8016375, 198077.25, -245232372.8198625, 619.03215240483826},
};

TEST(SingularControl, ClosedFormTranscriptionMatchesOracle)
{
    for (const auto& o : kSingularOracles) {
        const ModelParams p = o.mintime ? mintime_params() : ModelParams{};
        const SingularTerms t = closed_form_singular_terms(o.x, o.l, p);
        expect_rel(t.numerator, o.closed_a, 1e-10);
        expect_rel(t.denominator, o.b, 1e-10);
    }
}

TEST(SingularControl, DerivedTermsMatchOracle)
{
    for (const auto& o : kSingularOracles) {
        const ModelParams p = o.mintime ? mintime_params() : ModelParams{};
        const SingularTerms t = singular_terms(o.x, o.l, p);
        expect_rel(t.numerator, o.derived_a, 1e-10);
        expect_rel(t.denominator, o.b, 1e-10);
        expect_rel(singular_control(o.x, o.l, p), o.u_sing, 1e-10);
    }
}

TEST(SingularControl, ZeroCostateHasNoDenominator)
{
    EXPECT_THROW(singular_control({1, 2, 3}, {0, 0, 0}, ModelParams{}), SingularDenominator);
}

TEST(SingularControl, SecondDerivativeOfSwitchingFunctionVanishes)
{
    // Along the flow driven by u = clamp(-A/(2B)) the switching function is
    // affine in time; the discrete second difference shrinks like dt^2.
    const double coarse = support::switching_curvature(0.02, 0.2, support::Numerator::Derived);
    const double fine = support::switching_curvature(0.01, 0.2, support::Numerator::Derived);
    EXPECT_LT(fine, 1e-6);
    EXPECT_GT(coarse / fine, 3.0);

    // The closed-form numerator leaves an O(1) curvature.
    const double closed = support::switching_curvature(0.01, 0.2, support::Numerator::ClosedForm);
    EXPECT_GT(closed, 1e-3);
}

TEST(Equilibrium, ReferenceValues)
{
    const PopulationState eq = coexistence_equilibrium(ModelParams{});
    EXPECT_NEAR(eq.spiders, 2.0789656369316210, 1e-12);
    EXPECT_NEAR(eq.insects, 2.9210343630683790, 1e-12);
    EXPECT_NEAR(eq.pests, 2.0964942728219368, 1e-12);
    const PopulationState r = dynamics_rhs(eq, 0.0, ModelParams{});
    EXPECT_LT(std::max({std::abs(r.insects), std::abs(r.spiders), std::abs(r.pests)}), 1e-9);
}

TEST(Equilibrium, ResidualVanishesForRandomParameters)
{
    auto g = support::rng(29);
    for (int i = 0; i < 100; ++i) {
        const ModelParams p = support::random_params_with_equilibrium(g);
        const PopulationState eq = coexistence_equilibrium(p);
        const PopulationState r = dynamics_rhs(eq, 0.0, p);
        EXPECT_LT(std::max({std::abs(r.insects), std::abs(r.spiders), std::abs(r.pests)}), 1e-9);
    }
}

TEST(Equilibrium, ThrowsWithoutInteriorPoint)
{
    ModelParams p;
    p.spider_mortality = 2000.0;
    EXPECT_THROW(coexistence_equilibrium(p), NoInteriorEquilibrium);
}

TEST(Feasibility, ReferenceSetFailsPersistence)
{
    const PestFreeFeasibility f = pest_free_feasibility(ModelParams{});
    EXPECT_FALSE(f.spiders_persist);
    EXPECT_FALSE(f.stable.has_value());
}

TEST(Feasibility, MinTimeSetPasses)
{
    const PestFreeFeasibility f = pest_free_feasibility(mintime_params());
    EXPECT_TRUE(f.spiders_persist);
    ASSERT_TRUE(f.stable.has_value());
    EXPECT_TRUE(*f.stable);
}

TEST(Feasibility, StrictBoundary)
{
    ModelParams p;
    p.spider_mortality = p.hunt_insects * p.conversion * p.woods_capacity;
    EXPECT_FALSE(pest_free_feasibility(p).spiders_persist);
}
