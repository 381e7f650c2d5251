#include "oracles.hpp"

#include "deadcore/error.hpp"
#include "deadcore/grid.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace deadcore;

TEST(GridSpecValidation, RejectsBadParameters) {
    EXPECT_THROW(validate(GridSpec{1.0, 8.0, 0.3}), Error);   // a/h not integer
    EXPECT_THROW(validate(GridSpec{1.0, 1.5, 0.125}), Error); // R < 2a
    EXPECT_THROW(validate(GridSpec{1.0, 8.0, 0.5}), Error);   // a/h < 4
    EXPECT_THROW(validate(GridSpec{-1.0, 8.0, 0.125}), Error);
    EXPECT_NO_THROW(validate(GridSpec{1.0, 8.0, 0.125}));
}

TEST(Grid, NodeLayoutAndInteriorSplit) {
    const Grid g(GridSpec{1.0, 8.0, 0.125});
    EXPECT_EQ(g.size(), 129u);
    EXPECT_DOUBLE_EQ(g.x(0), -8.0);
    EXPECT_DOUBLE_EQ(g.x(128), 8.0);
    // |x| < 1 strictly: -0.875 .. 0.875
    EXPECT_EQ(g.interior().size(), 15u);
    EXPECT_EQ(g.interior().size() + g.exterior().size(), g.size());
    EXPECT_FALSE(g.is_interior(g.interior().front() - 1));
    EXPECT_EQ(g.interior_slot(g.interior()[3]), 3);
}

TEST(TailModel, EncodeDecodeRoundTrip) {
    for (const TailModel& t :
         {TailModel::zero(), TailModel::constant(0.1), TailModel::constant(-2.5, TailModel::Parity::Odd),
          TailModel::power(3.0, 0.75), TailModel::power(1.0 / 3.0, 1.5, TailModel::Parity::Odd)}) {
        EXPECT_EQ(TailModel::decode(t.encode()), t) << t.encode();
    }
    EXPECT_EQ(TailModel::constant(2.0, TailModel::Parity::Odd).encode(), "odd-const:2");
    EXPECT_THROW(TailModel::decode("linear:1"), Error);
    EXPECT_THROW(TailModel::decode("power:1"), Error);
}

TEST(TailModel, OddParityFlipsSign) {
    const TailModel t = TailModel::power(2.0, 1.0, TailModel::Parity::Odd);
    EXPECT_DOUBLE_EQ(t(10.0), 0.2);
    EXPECT_DOUBLE_EQ(t(-10.0), -0.2);
}

TEST(SupOnBall, UsesNodesWithinRadius) {
    const auto g = make_grid(GridSpec{1.0, 4.0, 0.25});
    const GridFunction u = sample([](double x) { return x; }, g);
    EXPECT_DOUBLE_EQ(sup_on_ball(u, 0.0, 0.5), 0.5);
    EXPECT_DOUBLE_EQ(sup_on_ball(u, 1.0, 0.25), 1.25);
    EXPECT_THROW(sup_on_ball(u, 3.9, 0.5), Error);
    EXPECT_THROW(sup_on_ball(u, 0.0, 0.1), Error);
}

TEST(DiscreteDerivative, ExactOnQuadratics) {
    const auto g = make_grid(GridSpec{1.0, 4.0, 0.125});
    const GridFunction u = sample([](double x) { return 3.0 * x * x - x + 2.0; }, g);
    const GridFunction du = discrete_derivative(u, 1);
    const GridFunction d2u = discrete_derivative(u, 2);
    for (std::size_t i = 0; i < g->size(); ++i) {
        EXPECT_NEAR(du.values[i], 6.0 * g->x(i) - 1.0, 1e-10);
        EXPECT_NEAR(d2u.values[i], 6.0, 1e-8);
    }
    EXPECT_THROW(discrete_derivative(u, 3), Error);
}

TEST(HolderSeminorm, LipschitzConstantOfLinearFunction) {
    const auto g = make_grid(GridSpec{1.0, 4.0, 0.125});
    const GridFunction u = sample([](double x) { return -2.0 * x; }, g);
    EXPECT_NEAR(holder_seminorm(u, 1.0, 0.0, 1.0, 0), 2.0, 1e-12);
    EXPECT_NEAR(holder_seminorm(u, 1.0, 0.0, 1.0, 1), 0.0, 1e-12);
}

TEST(TailNorm, MatchesDirectQuadrature) {
    const double s = 0.75;
    const double R = 8.0;
    const auto g = make_grid(GridSpec{1.0, R, 1.0 / 64});
    const auto f = [](long double x) { return 1.0L / (1.0L + x * x); };
    const GridFunction u = sample([&](double x) { return static_cast<double>(f(x)); }, g, TailModel::power(1.0, 2.0));
    const auto weight = [s](long double y) { return 1.0L / (1.0L + std::pow(std::fabs(y), 1.0L + 2.0L * s)); };
    // inside [-R, R] plus both tails up to 4000, with the remainder estimated analytically
    long double ref = oracle::simpson([&](long double y) { return f(y) * weight(y); }, -R, R, 4096);
    const long double far = oracle::simpson([&](long double y) { return std::pow(y, -2.0L) * weight(y); }, R, 4000.0L,
                                            400000);
    ref += 2.0L * (far + std::pow(4000.0L, -2.0L - 2.0L * s) / (2.0L + 2.0L * s));
    EXPECT_NEAR(tail_norm(u, s), static_cast<double>(ref), 2e-5);
}

TEST(TailNorm, FarFieldOfZeroTailVanishes) {
    EXPECT_EQ(tail_norm_far_field(TailModel::zero(), 8.0, 0.9), 0.0);
    // constant tail c: 2 c int_R^inf dy / (1 + y^{1+2s})
    const double s = 0.6, R = 8.0;
    const long double ref = 2.0L * oracle::simpson([s](long double y) { return 1.0L / (1.0L + std::pow(y, 1.0L + 2 * s)); },
                                                   R, 1e5L, 2000000);
    const long double rest = 2.0L * std::pow(1e5L, -2.0L * s) / (2.0L * s);
    EXPECT_NEAR(tail_norm_far_field(TailModel::constant(1.0), R, s), static_cast<double>(ref + rest), 1e-6);
}
