#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "arrowgap/delay.hpp"

using namespace arrowgap;

namespace {

// Brute-force oracle for sup_w (w/(1+w^2)) |1 - e^{-jw tau}| on a fine
// linear grid covering the peak region.
double brute_delta(double tau)
{
    double best = 0.0;
    for (int i = 1; i <= 400000; ++i) {
        const double w = 100.0 * i / 400000.0;
        best = std::max(best, w / (1.0 + w * w) * std::abs(1.0 - std::exp(Complex(0.0, -w * tau))));
    }
    return best;
}

}  // namespace

TEST(DelayStability, RootCounts)
{
    EXPECT_EQ(delay_loop_stability(0.0).rhp_root_count, 0);
    EXPECT_TRUE(delay_loop_stability(0.0).f_stable);
    for (double tau : {0.1, 0.5, 1.0, 1.5}) {
        EXPECT_EQ(delay_loop_stability(tau).rhp_root_count, 0) << tau;
        EXPECT_TRUE(delay_loop_stability(tau).f_stable) << tau;
    }
    EXPECT_GE(delay_loop_stability(1.6).rhp_root_count, 2);
    EXPECT_FALSE(delay_loop_stability(1.6).f_stable);
    const DelayStability pred = delay_loop_stability(-0.1, 200.0);
    EXPECT_GE(pred.rhp_root_count, 1);
    EXPECT_FALSE(pred.f_stable);
}

TEST(DelayStability, PredictorCountGrowsWithRadius)
{
    EXPECT_LT(delay_loop_stability(-0.1, 200.0).rhp_root_count, delay_loop_stability(-0.1, 400.0).rhp_root_count);
}

TEST(DelayStability, RadiusValidated) { EXPECT_THROW(delay_loop_stability(0.1, 5.0), Error); }

TEST(DelayGap, ZeroDelay)
{
    const DelayGapReport r = delay_gap(0.0);
    EXPECT_EQ(r.delta_l2, 0.0);
    EXPECT_EQ(r.winding, 0);
    EXPECT_EQ(r.vgap_f, 0.0);
}

TEST(DelayGap, SmallDelayIsClose)
{
    const DelayGapReport r = delay_gap(0.1);
    EXPECT_EQ(r.winding, 0);
    EXPECT_EQ(r.vgap_f, r.delta_l2);
    EXPECT_LT(r.vgap_f, 0.1);
    EXPECT_NEAR(r.delta_l2, brute_delta(0.1), 1e-8);
}

TEST(DelayGap, PredictorIsFar)
{
    const DelayGapReport r = delay_gap(-0.1);
    EXPECT_NE(r.winding, 0);
    EXPECT_EQ(r.vgap_f, 1.0);
}

TEST(DelayGap, EvenMagnitudeButAsymmetricGap)
{
    for (double tau : {0.05, 0.1, 0.4, 1.0, 2.0}) {
        EXPECT_NEAR(delay_delta_l2(tau), delay_delta_l2(-tau), 1e-14) << tau;
        EXPECT_LE(delay_delta_l2(tau), 1.0);
        EXPECT_NEAR(delay_delta_l2(tau), brute_delta(tau), 1e-7) << tau;
    }
    EXPECT_LT(delay_gap(0.1).vgap_f, 0.1);
    EXPECT_EQ(delay_gap(-0.1).vgap_f, 1.0);
}

TEST(DelayGap, DecreasesToZero)
{
    double prev = INFINITY;
    for (double tau : {0.4, 0.2, 0.1, 0.05}) {
        const double d = delay_delta_l2(tau);
        EXPECT_LT(d, prev) << tau;
        prev = d;
    }
    EXPECT_LT(delay_delta_l2(1e-4), 1e-4);
}

TEST(DelayGap, OutsideWindowThrows)
{
    try {
        delay_gap(std::numbers::pi);
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("outside analysis window"), std::string::npos);
    }
    EXPECT_THROW(delay_gap(-4.0), Error);
}

TEST(LoopGain, Examples)
{
    const StateSpace integ = StateSpace::siso(0.0, 1.0, 1.0, 0.0);
    EXPECT_TRUE(loop_gain_check(integ, StateSpace::gain(1.0), 2.0));
    EXPECT_NEAR(loop_gain_sup(integ, StateSpace::gain(1.0), 2.0), 0.5, 1e-9);
    EXPECT_FALSE(loop_gain_check(StateSpace::gain(1.0), StateSpace::gain(1.0), 5.0));
    const StateSpace lag = StateSpace::siso(-1.0, 1.0, 1.0, 0.0);
    EXPECT_TRUE(loop_gain_check(lag, StateSpace::gain(2.0), 3.0));
    EXPECT_NEAR(loop_gain_sup(lag, StateSpace::gain(2.0), 3.0), 2.0 / std::sqrt(10.0), 1e-9);
    EXPECT_FALSE(loop_gain_check(lag, StateSpace::gain(2.0), 1.0));
    EXPECT_THROW(loop_gain_check(lag, StateSpace::gain(2.0), 0.0), Error);
}
