#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "egohand/smoothing.hpp"
#include "oracles.hpp"

using namespace egohand;

TEST(SavGolParams, Validation) {
    EXPECT_NO_THROW(SavGolParams(3, 0));
    EXPECT_NO_THROW(SavGolParams(9, 8));
    EXPECT_THROW(SavGolParams(4, 2), Error);
    EXPECT_THROW(SavGolParams(1, 0), Error);
    EXPECT_THROW(SavGolParams(5, 5), Error);
    EXPECT_THROW(SavGolParams(5, -1), Error);
    SavGolParams d;
    EXPECT_EQ(d.window(), 9);
    EXPECT_EQ(d.polyorder(), 2);
}

TEST(SavGolCoeffs, MovingAverage) {
    const auto w = savgol_coeffs(SavGolParams(3, 0));
    ASSERT_EQ(w.size(), 3u);
    for (double x : w) EXPECT_NEAR(x, 1.0 / 3.0, 1e-15);
}

TEST(SavGolCoeffs, Window5Order2KnownValues) {
    // Classic table: (-3, 12, 17, 12, -3) / 35
    const auto w = savgol_coeffs(SavGolParams(5, 2));
    const double expected[] = {-3.0 / 35, 12.0 / 35, 17.0 / 35, 12.0 / 35, -3.0 / 35};
    for (int i = 0; i < 5; ++i) EXPECT_NEAR(w[i], expected[i], 1e-12);
}

TEST(SavGolCoeffs, MatchesRationalOracle) {
    for (int window = 3; window <= 31; window += 2) {
        for (int order = 0; order < window && order <= 6; ++order) {
            const auto w = savgol_coeffs(SavGolParams(window, order));
            const auto ref = oracle::savgol_rational(window, order);
            double sum = 0.0;
            for (int i = 0; i < window; ++i) {
                ASSERT_NEAR(w[i], ref[i], 1e-12) << window << "/" << order << " @" << i;
                sum += w[i];
            }
            ASSERT_NEAR(sum, 1.0, 1e-12);
        }
    }
}

TEST(SmoothSeries, ConstantUnchangedExactly) {
    const std::vector<double> x(40, 3.7);
    EXPECT_EQ(smooth_series(x, SavGolParams(9, 2)), x);
    const std::vector<double> shortx(4, -2.25);
    EXPECT_EQ(smooth_series(shortx, SavGolParams(9, 2)), shortx);
}

TEST(SmoothSeries, PolynomialReproductionInterior) {
    for (int order = 0; order <= 4; ++order) {
        const SavGolParams p(11, order);
        std::vector<double> x(60);
        for (int t = 0; t < 60; ++t) x[t] = std::pow(0.1 * t - 3.0, order) + 0.5 * t * (order >= 1);
        const auto y = smooth_series(x, p);
        for (int t = p.half(); t < 60 - p.half(); ++t) ASSERT_NEAR(y[t], x[t], 1e-9) << order << " " << t;
    }
    std::vector<double> sq(30);
    for (int t = 0; t < 30; ++t) sq[t] = double(t) * t;
    const auto y = smooth_series(sq, SavGolParams(9, 2));
    for (int t = 4; t < 26; ++t) EXPECT_NEAR(y[t], sq[t], 1e-9);
}

TEST(SmoothSeries, MirrorPaddingAtEdges) {
    // Window 3, order 0: y[0] = (x[-1] + x[0] + x[1]) / 3 with x[-1] = 2 x[0] - x[1].
    std::vector<double> x{1, 4, 2, 3, 7, 5};
    const auto y = smooth_series(x, SavGolParams(3, 0));
    EXPECT_NEAR(y[0], ((2.0 * 1 - 4) + 1 + 4) / 3.0, 1e-15);
    EXPECT_NEAR(y[5], (7.0 + 5.0 + (2.0 * 5 - 7)) / 3.0, 1e-15);
    EXPECT_NEAR(y[2], 3.0, 1e-15);
    // A ramp survives up to the boundary.
    std::vector<double> ramp{0, 1, 2, 3, 4, 5};
    const auto r = smooth_series(ramp, SavGolParams(5, 0));
    for (int i = 0; i < 6; ++i) EXPECT_NEAR(r[i], ramp[i], 1e-12);
}

TEST(SmoothSeries, ShortSeriesGlobalFit) {
    EXPECT_TRUE(smooth_series({}, SavGolParams()).empty());
    EXPECT_EQ(smooth_series({5.0}, SavGolParams()), std::vector<double>{5.0});
    // Two samples: order clipped to 1, the line through them is reproduced.
    const auto y2 = smooth_series({1.0, 3.0}, SavGolParams(9, 2));
    EXPECT_NEAR(y2[0], 1.0, 1e-12);
    EXPECT_NEAR(y2[1], 3.0, 1e-12);
    // Quadratic data shorter than the window passes through an order-2 fit.
    std::vector<double> q{4.0, 1.0, 0.0, 1.0, 4.0, 9.0};
    const auto yq = smooth_series(q, SavGolParams(9, 2));
    for (int i = 0; i < 6; ++i) EXPECT_NEAR(yq[i], q[i], 1e-9);
    // Order 1 fit to a parabola: least-squares line evaluated at each sample.
    std::vector<double> p3{0.0, 1.0, 4.0};
    const auto y3 = smooth_series(p3, SavGolParams(5, 1));
    EXPECT_NEAR(y3[0], -1.0 / 3.0, 1e-12);
    EXPECT_NEAR(y3[1], 5.0 / 3.0, 1e-12);
    EXPECT_NEAR(y3[2], 11.0 / 3.0, 1e-12);
}

TEST(SmoothSeries, NoiseReductionAndSlidingFit) {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> x(500);
    for (auto& v : x) v = n(rng);
    const SavGolParams p(9, 2);
    const auto y = smooth_series(x, p);
    auto variance = [](const std::vector<double>& v) {
        const double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
        double s = 0.0;
        for (double a : v) s += (a - m) * (a - m);
        return s / (v.size() - 1);
    };
    EXPECT_LT(variance(y), variance(x));
    for (int t = 4; t < 496; ++t) ASSERT_NEAR(y[t], oracle::sliding_fit(x, t, 4, 2), 1e-9);
}

TEST(SmoothSeries, LinearityAndShiftEquivariance) {
    std::mt19937_64 rng(32);
    std::normal_distribution<double> n(0.0, 10.0);
    std::vector<double> a(80), b(80);
    for (auto& v : a) v = n(rng);
    for (auto& v : b) v = n(rng);
    const SavGolParams p(7, 3);
    std::vector<double> combo(80);
    for (int i = 0; i < 80; ++i) combo[i] = 2.5 * a[i] - 0.75 * b[i];
    const auto sa = smooth_series(a, p), sb = smooth_series(b, p), sc = smooth_series(combo, p);
    for (int i = 0; i < 80; ++i) ASSERT_NEAR(sc[i], 2.5 * sa[i] - 0.75 * sb[i], 1e-9);

    // Shifting the input by k samples shifts the interior output by k.
    const int k = 5;
    std::vector<double> shifted(a.begin() + k, a.end());
    const auto ss = smooth_series(shifted, p);
    for (int i = p.half(); i + p.half() < static_cast<int>(shifted.size()); ++i) ASSERT_NEAR(ss[i], sa[i + k], 1e-9);
}

TEST(SmoothSkeletonSequence, ConstantLinearAndDecomposition) {
    std::mt19937_64 rng(33);
    const Skeleton base = oracle::random_skeleton(rng);
    Sequence constant(20, base);
    const auto c = smooth_skeleton_sequence(constant, SavGolParams());
    for (std::size_t f = 0; f < c.size(); ++f) EXPECT_EQ(c[f].joints, base.joints);

    const Vec3 velocity(1.5, -0.5, 2.0);
    Sequence linear;
    for (int f = 0; f < 30; ++f) linear.push_back(oracle::translate(base, velocity * f));
    const auto l = smooth_skeleton_sequence(linear, SavGolParams(9, 1));
    for (std::size_t f = 0; f < l.size(); ++f)
        for (std::size_t j = 0; j < base.size(); ++j) ASSERT_LT((l[f].joints[j] - linear[f].joints[j]).norm(), 1e-9);

    Sequence noisy;
    for (int f = 0; f < 40; ++f) noisy.push_back(oracle::add_noise(linear[f % 30], rng, 3.0));
    const SavGolParams p(9, 2);
    const auto s = smooth_skeleton_sequence(noisy, p);
    for (std::size_t j = 0; j < base.size(); ++j) {
        for (int axis = 0; axis < 3; ++axis) {
            std::vector<double> series;
            for (const auto& sk : noisy) series.push_back(sk.joints[j](axis));
            const auto ref = smooth_series(series, p);
            for (std::size_t f = 0; f < noisy.size(); ++f) ASSERT_EQ(s[f].joints[j](axis), ref[f]);
        }
    }
    EXPECT_EQ(s.front().frame, noisy.front().frame);
}

TEST(SmoothSkeletonSequence, RejectsMixedJointCounts) {
    Sequence seq{Skeleton({Vec3::Zero()}, FrameTag::world()), Skeleton({Vec3::Zero(), Vec3::Zero()}, FrameTag::world())};
    EXPECT_THROW(smooth_skeleton_sequence(seq, SavGolParams()), Error);
}
