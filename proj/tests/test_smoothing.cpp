#include "helpers.hpp"

using namespace efcp;
using efcp::test::random_smooth;

TEST(DistanceMatrix, IdenticalPredictorsGiveZeros) {
    TimeGrid g(50);
    Curve c = test::two_peak_curve(g);
    std::vector<PartialCurve> xs(4, restrict(c, Interval{0.0, 0.5}));
    for (auto kind : {MetricKind::l2, MetricKind::fr, MetricKind::amplitude}) {
        auto D = distance_matrix(xs, Metric{kind});
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(D(i, j), 0.0, 1e-12);
    }
}

TEST(DistanceMatrix, MatchesPairwiseCalls) {
    TimeGrid g(100);
    std::mt19937_64 rng(1);
    std::vector<PartialCurve> xs;
    for (int i = 0; i < 3; ++i) xs.push_back(restrict(random_smooth(g, rng), Interval{0.0, 0.6}));
    auto D = distance_matrix(xs, Metric{MetricKind::l2});
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(D(i, i), 0.0);
        for (std::size_t j = 0; j < 3; ++j) {
            EXPECT_EQ(D(i, j), D(j, i));
            if (i != j) {
                EXPECT_EQ(D(i, j), l2_distance(xs[std::min(i, j)], xs[std::max(i, j)]));
            }
        }
    }
}

TEST(DistanceMatrix, AmplitudeBelowFisherRao) {
    GeneratorSpec spec;
    spec.n = 8;
    spec.T = 60;
    spec.phase_variation = true;
    spec.seed = 3;
    std::vector<PartialCurve> xs;
    for (auto& c : gen_curves(spec)) xs.push_back(restrict(c, Interval{0.0, 0.75}));
    auto Da = distance_matrix(xs, Metric{MetricKind::amplitude});
    // fr on the rescaled segment is the comparable bound
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t j = i + 1; j < xs.size(); ++j) {
            auto qi = detail::segment_srsfs(xs[i], MetricKind::amplitude);
            auto qj = detail::segment_srsfs(xs[j], MetricKind::amplitude);
            EXPECT_LE(Da(i, j), l2_distance(qi[0], qj[0]) + 1e-9);
        }
}

TEST(DistanceMatrix, ThreadsGiveIdenticalEntries) {
    TimeGrid g(60);
    std::mt19937_64 rng(4);
    std::vector<PartialCurve> xs;
    for (int i = 0; i < 9; ++i) xs.push_back(restrict(random_smooth(g, rng), Interval{0.0, 0.5}));
    auto D1 = distance_matrix(xs, Metric{MetricKind::amplitude}, 1);
    auto D4 = distance_matrix(xs, Metric{MetricKind::amplitude}, 4);
    EXPECT_EQ(D1.upper_triangle(), D4.upper_triangle());
}

TEST(DistanceMatrix, IncompatibleMetricRejected) {
    TimeGrid g(11);
    std::vector<PartialCurve> xs(2, restrict(Curve::constant(g, 0.0), Sparse{{0.0, 0.5}}));
    EXPECT_THROW(distance_matrix(xs, Metric{MetricKind::amplitude}), Error);
}

TEST(NsPredict, HandEvaluatedWeights) {
    std::vector<double> d{0.0, 0.1, 0.2}, y{100.0, 1.0, 3.0};
    auto p = ns_predict(d, y, 0, {KernelKind::gaussian, 0.1});
    const double a = std::exp(-0.5), b = std::exp(-2.0);
    EXPECT_NEAR(p.value, (a * 1.0 + b * 3.0) / (a + b), 1e-12);
    EXPECT_NEAR(p.value, 1.364851047612713, 1e-12);
    EXPECT_FALSE(p.fallback);
}

TEST(NsPredict, EqualDistancesGivePlainAverage) {
    std::vector<double> d{0.0, 0.5, 0.5, 0.5}, y{9.0, 1.0, 2.0, 6.0};
    EXPECT_NEAR(ns_predict(d, y, 0, {KernelKind::gaussian, 0.3}).value, 3.0, 1e-14);
    EXPECT_NEAR(ns_predict(d, y, 0, {KernelKind::triangular, 1.0}).value, 3.0, 1e-14);
}

TEST(NsPredict, TinyBandwidthIsNearestNeighbour) {
    std::vector<double> d{0.3, 0.0, 0.1, 0.2}, y{4.0, 100.0, 7.0, 5.0};
    EXPECT_DOUBLE_EQ(ns_predict(d, y, 1, {KernelKind::gaussian, 1e-8}).value, 7.0);
}

TEST(NsPredict, TriangularFallbackIsFlagged) {
    std::vector<double> d{0.0, 2.0, 3.0}, y{0.0, 1.0, 5.0};
    auto p = ns_predict(d, y, 0, {KernelKind::triangular, 1.0});
    EXPECT_TRUE(p.fallback);
    EXPECT_DOUBLE_EQ(p.value, 3.0);
}

TEST(NsPredict, ConvexCombinationAndContinuity) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (int r = 0; r < 50; ++r) {
        std::vector<double> d(12), y(12);
        for (auto& x : d) x = u(rng);
        for (auto& x : y) x = u(rng) - 1.0;
        d[3] = 0.0;
        double h = 0.05 + u(rng);
        double v = ns_predict(d, y, 3, {KernelKind::gaussian, h}).value;
        double lo = 1e9, hi = -1e9;
        for (std::size_t j = 0; j < 12; ++j)
            if (j != 3) lo = std::min(lo, y[j]), hi = std::max(hi, y[j]);
        EXPECT_GE(v, lo - 1e-12);
        EXPECT_LE(v, hi + 1e-12);
        double v2 = ns_predict(d, y, 3, {KernelKind::gaussian, h * (1.0 + 1e-9)}).value;
        EXPECT_NEAR(v, v2, 1e-6);
    }
}

TEST(Quantiles, OrderStatistics) {
    EXPECT_EQ(quantile_rank(10, 0.9), 9u);
    EXPECT_EQ(quantile_rank(10, 1.0), 10u);
    EXPECT_EQ(quantile_rank(3, 0.5), 2u);
    EXPECT_EQ(quantile_rank(7, 0.9 * 7.0 / 7.0), 7u);
}

TEST(BandwidthCandidates, HandOrderStatistic) {
    DistanceMatrix D(3);
    D.set(0, 1, 1.0);
    D.set(0, 2, 2.0);
    D.set(1, 2, 3.0);
    std::vector<double> beta{0.5};
    EXPECT_EQ(bandwidth_candidates(D, beta), std::vector<double>{2.0});
    std::vector<double> one{1.0};
    EXPECT_THROW(bandwidth_candidates(D, one), Error);
}

TEST(BandwidthCandidates, NineNondecreasingOnGeneratorData) {
    GeneratorSpec spec;
    spec.n = 40;
    spec.seed = 6;
    std::vector<PartialCurve> xs;
    for (auto& c : gen_curves(spec)) xs.push_back(restrict(c, Interval{0.0, 0.5}));
    auto D = distance_matrix(xs, Metric{});
    auto H = bandwidth_candidates(D, default_betas());
    ASSERT_EQ(H.size(), 9u);
    for (std::size_t i = 1; i < H.size(); ++i) EXPECT_LT(H[i - 1], H[i]);
    EXPECT_GT(H.front(), 0.0);
}

TEST(BandwidthCandidates, ZeroQuantileUsesSmallestPositive) {
    DistanceMatrix D(4);
    D.set(0, 1, 0.0);
    D.set(0, 2, 0.0);
    D.set(0, 3, 0.0);
    D.set(1, 2, 0.0);
    D.set(1, 3, 0.5);
    D.set(2, 3, 0.7);
    std::vector<double> beta{0.2, 0.9};
    EXPECT_EQ(bandwidth_candidates(D, beta), (std::vector<double>{0.5, 0.7}));
    DistanceMatrix Z(3);
    try {
        bandwidth_candidates(Z, beta);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DegenerateDistances);
    }
}

TEST(FourierProject, SpanConstantAndOrthogonality) {
    TimeGrid g(100);
    Curve inspan = Curve::sample(g, [](double t) {
        return 1.5 + 0.3 * std::sin(2 * std::numbers::pi * t) - 0.7 * std::cos(4 * std::numbers::pi * t);
    });
    EXPECT_LT(test::linf(fourier_project(inspan).values(), inspan.values()), 1e-8);
    Curve three = Curve::constant(g, 3.0);
    EXPECT_LT(test::linf(fourier_project(three).values(), three.values()), 1e-10);

    std::mt19937_64 rng(7);
    Curve f = random_smooth(g, rng, 9);
    Curve p = fourier_project(f);
    for (int c = 0; c < 10; ++c) {
        const int harmonic = (c + 1) / 2;
        std::vector<double> prod(g.size());
        for (std::size_t k = 0; k < g.size(); ++k) {
            double arg = 2 * std::numbers::pi * harmonic * g[k];
            double basis = c == 0 ? 1.0 : std::numbers::sqrt2 * (c % 2 == 1 ? std::sin(arg) : std::cos(arg));
            prod[k] = (f[k] - p[k]) * basis;
        }
        EXPECT_LT(std::abs(detail::trapezoid(prod, g.step())), 1e-8) << "basis " << c;
    }
    // idempotent and non-expansive
    EXPECT_LT(test::linf(fourier_project(p).values(), p.values()), 1e-8);
    Curve zero = Curve::constant(g, 0.0);
    EXPECT_LE(l2_distance(p, zero), l2_distance(f, zero) + 1e-12);
}

TEST(MovingAverage, IdentitiesAndBoundaryHandSums) {
    TimeGrid g(100);
    std::mt19937_64 rng(8);
    Curve f = random_smooth(g, rng);
    EXPECT_EQ(moving_average(f, 1), f);
    Curve c = Curve::constant(g, -2.5);
    EXPECT_LT(test::linf(moving_average(c).values(), c.values()), 1e-14);

    Curve lin = Curve::sample(g, [](double t) { return t; });
    Curve ma = moving_average(lin, 12);
    for (std::size_t k = 6; k + 6 < g.size(); ++k) EXPECT_NEAR(ma[k], lin[k], 1e-12);
    const double h = g.step();
    // k = 0: points 0..5 weight 1, point 6 weight 1/2
    EXPECT_NEAR(ma[0], 18.0 * h / 6.5, 1e-12);
    // k = 1: points 0..6 weight 1, point 7 weight 1/2
    EXPECT_NEAR(ma[1], 24.5 * h / 7.5, 1e-12);
    // k = 99 mirrors k = 0
    EXPECT_NEAR(ma[99], 1.0 - 18.0 * h / 6.5, 1e-12);
}
