#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "fdwd/errors.hpp"
#include "fdwd/loss.hpp"

using namespace fdwd;

TEST(Loss, ParamValidation) {
    EXPECT_THROW(LossParam{0.0}, ValidationError);
    EXPECT_THROW(LossParam{-1.0}, ValidationError);
    EXPECT_THROW(LossParam{INFINITY}, ValidationError);
    EXPECT_DOUBLE_EQ(LossParam(2.0).knot(), 2.0 / 3.0);
}

TEST(Loss, Values) {
    const LossParam q1(1.0);
    EXPECT_EQ(vq(0.0, q1), 1.0);
    EXPECT_NEAR(vq(0.5, q1), 0.5, 1e-15);
    EXPECT_NEAR(vq(std::nextafter(0.5, 1.0), q1), 0.5, 1e-15);
    EXPECT_NEAR(vq(1.0, q1), 0.25, 1e-15);
    EXPECT_NEAR(vq(-1.0, q1), 2.0, 1e-15);
}

TEST(Loss, Gradient) {
    const LossParam q1(1.0);
    const LossParam q2(2.0);
    EXPECT_EQ(vq_grad(0.0, q1), -1.0);
    EXPECT_EQ(vq_grad(q2.knot(), q2), -1.0);
    EXPECT_NEAR(vq_grad(std::nextafter(q2.knot(), 1.0), q2), -1.0, 1e-12);
    EXPECT_NEAR(vq_grad(1.0, q1), -0.25, 1e-15);
}

TEST(Loss, Cq) {
    EXPECT_NEAR(cq(LossParam(1.0)), 0.25, 1e-15);
    EXPECT_NEAR(cq(LossParam(2.0)), 4.0 / 27.0, 1e-15);
    double prev = 1.0;
    for (double q : {10.0, 100.0, 1000.0}) {
        const double c = cq(LossParam(q));
        EXPECT_GT(c, 0.0);
        EXPECT_LT(c, prev);
        prev = c;
    }
    EXPECT_LT(prev, 1e-3);
}

TEST(Loss, CurveSamples) {
    const std::vector<double> u{-1.0, 0.0, 1.0};
    const auto s = loss_curve_samples(LossParam(1.0), u);
    ASSERT_EQ(s.size(), 3u);
    EXPECT_NEAR(s[0].second, 2.0, 1e-15);
    EXPECT_NEAR(s[1].second, 1.0, 1e-15);
    EXPECT_NEAR(s[2].second, 0.25, 1e-15);
    const LossParam big(1e6);
    EXPECT_NEAR(vq(-0.3, big), 1.3, 1e-6);
    EXPECT_LT(vq(2.0, big), 1e-6);
    EXPECT_TRUE(std::isfinite(vq(1e-3 + big.knot(), big)));
}

TEST(LossProperties, Convexity) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> uu(-3.0, 5.0);
    std::uniform_real_distribution<double> tt(0.0, 1.0);
    std::uniform_real_distribution<double> lq(std::log(0.1), std::log(200.0));
    for (int i = 0; i < 10000; ++i) {
        const LossParam q(std::exp(lq(rng)));
        const double a = uu(rng);
        const double b = uu(rng);
        const double t = tt(rng);
        EXPECT_LE(vq(t * a + (1 - t) * b, q), t * vq(a, q) + (1 - t) * vq(b, q) + 1e-12);
    }
}

TEST(LossProperties, DominatesHingeAndLipschitz) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> uu(-3.0, 5.0);
    std::uniform_real_distribution<double> lq(std::log(0.1), std::log(1000.0));
    for (int i = 0; i < 10000; ++i) {
        const LossParam q(std::exp(lq(rng)));
        const double a = uu(rng);
        const double b = uu(rng);
        EXPECT_GE(vq(a, q), hinge(a));
        EXPECT_GE(vq(a, q), 0.0);
        EXPECT_LE(std::abs(vq(a, q) - vq(b, q)), std::abs(a - b) + 1e-15);
        const double g = vq_grad(a, q);
        EXPECT_LE(g, 0.0);
        EXPECT_GE(g, -1.0);
    }
}

TEST(LossProperties, FiniteDifferenceGradient) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uu(-2.0, 4.0);
    const double h = 1e-5;
    for (double qv : {0.5, 1.0, 2.0, 8.0, 60.0}) {
        const LossParam q(qv);
        for (int i = 0; i < 500; ++i) {
            const double u = uu(rng);
            if (std::abs(u - q.knot()) < 1e-3) continue;
            const double fd = (vq(u + h, q) - vq(u - h, q)) / (2 * h);
            EXPECT_NEAR(fd, vq_grad(u, q), 1e-6) << "q=" << qv << " u=" << u;
        }
    }
}

TEST(LossProperties, HingeConvergence) {
    double prev = INFINITY;
    for (double qv : {1.0, 10.0, 100.0, 1000.0}) {
        const LossParam q(qv);
        double sup = 0.0;
        for (int k = 0; k <= 4000; ++k) {
            const double u = -2.0 + 4.0 * k / 4000.0;
            sup = std::max(sup, std::abs(vq(u, q) - hinge(u)));
        }
        EXPECT_LT(sup, prev);
        prev = sup;
    }
}
