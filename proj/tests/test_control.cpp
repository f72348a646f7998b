#include <gtest/gtest.h>

#include <cmath>

#include "agrospray/control.hpp"
#include "agrospray/error.hpp"

using namespace agrospray;

TEST(ControlSignal, InterpolatesLinearlyAndHoldsEnds)
{
    const ControlSignal u({0.0, 1.0, 3.0}, {0.0, 1.0, 0.5});
    EXPECT_DOUBLE_EQ(u(0.5), 0.5);
    EXPECT_DOUBLE_EQ(u(2.0), 0.75);
    EXPECT_DOUBLE_EQ(u(-1.0), 0.0);
    EXPECT_DOUBLE_EQ(u(9.0), 0.5);
    EXPECT_DOUBLE_EQ(u.max(), 1.0);
    EXPECT_EQ(u.start(), 0.0);
    EXPECT_EQ(u.end(), 3.0);
}

TEST(ControlSignal, TrapezoidMean)
{
    const ControlSignal u({0.0, 1.0, 2.0, 3.0}, {0.0, 1.0, 1.0, 0.0});
    EXPECT_NEAR(u.mean(0.0, 3.0), 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(u.mean(1.0, 2.0), 1.0, 1e-12);
}

TEST(ControlSignal, RejectsInadmissibleInput)
{
    EXPECT_THROW(ControlSignal({0.0, 1.0}, {0.0, 0.0}), InvalidArgument);
    EXPECT_THROW(ControlSignal({0.0, 1.0, 1.0}, {0.0, 0.0, 0.0}), InvalidArgument);
    EXPECT_THROW(ControlSignal({0.0, 1.0, 2.0}, {0.0, 1.5, 0.0}), InvalidArgument);
    EXPECT_THROW(ControlSignal({0.0, 1.0, 2.0}, {0.0, -1e-9, 0.0}), InvalidArgument);
    EXPECT_THROW(ControlSignal({0.0, 1.0, 2.0}, {0.0, NAN, 0.0}), InvalidArgument);
    EXPECT_THROW(ControlSignal({0.0, 1.0, 2.0}, {0.0, 0.0}), InvalidArgument);
}

TEST(ControlSignal, ProjectedClampsIntoTheBox)
{
    const ControlSignal u = ControlSignal::projected({0.0, 1.0, 2.0}, {-3.0, 0.4, 7.0});
    EXPECT_EQ(u.values(), (std::vector<double>{0.0, 0.4, 1.0}));
}

TEST(ControlSignal, DefaultIsEmpty)
{
    EXPECT_TRUE(ControlSignal{}.empty());
}

TEST(TrapezoidWeights, SumToTheSpan)
{
    const auto grid = uniform_grid(0.0, 1.005, 0.01);
    const auto w = trapezoid_weights(grid);
    double total = 0.0;
    for (double x : w) total += x;
    EXPECT_NEAR(total, 1.005, 1e-12);
    EXPECT_NEAR(w.front(), 0.005, 1e-15);
    EXPECT_NEAR(w.back(), 0.0025, 1e-12);
}

TEST(UniformGrid, RejectsBadSteps)
{
    EXPECT_THROW(uniform_grid(0.0, 1.0, 0.0), InvalidArgument);
    EXPECT_THROW(uniform_grid(0.0, 1.0, -0.1), InvalidArgument);
    EXPECT_THROW(uniform_grid(1.0, 1.0, 0.1), InvalidArgument);
}
