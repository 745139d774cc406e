#include "helpers.hpp"
#include "oracles.hpp"

using namespace efcp;
using efcp::test::linf;
using efcp::test::random_smooth;

using efcp::test::exhaustive_cost;
using efcp::test::random_srsf;

TEST(EdgeCost, MatchesDirectTrapezoid) {
    TimeGrid g(20);
    std::mt19937_64 rng(1);
    auto q1 = random_srsf(g, rng), q2 = random_srsf(g, rng);
    const double h = g.step();
    // move (2,3) from node (4,5): gamma maps [t4, t6] onto [t5, t8]
    const int a = 2, b = 3, m = 3;
    double s = 0.0;
    for (int r = 0; r <= m; ++r) {
        double t = g[4] + r * (a * h) / m;
        double u = g[5] + r * (b * h) / m;
        double e = detail::interp_uniform(q1.values(), t) - std::sqrt(1.5) * detail::interp_uniform(q2.values(), u);
        s += (r == 0 || r == m ? 0.5 : 1.0) * e * e;
    }
    s *= a * h / m;
    EXPECT_NEAR(detail::edge_cost(q1.values(), q2.values(), 4, 5, {a, b}, h), s, 1e-12);
}

TEST(DynamicProgram, MatchesExhaustiveEnumeration) {
    std::mt19937_64 rng(2);
    for (int c = 0; c < 10; ++c) {
        TimeGrid g(6 + c % 6);
        auto q1 = random_srsf(g, rng), q2 = random_srsf(g, rng);
        for (DpOptions opt : {DpOptions{3, false}, DpOptions{}}) {
            double dp = pairwise_register(q1, q2, opt).distance;
            double ex = std::sqrt(exhaustive_cost(q1, q2, opt));
            EXPECT_EQ(dp, ex) << "T=" << g.size() << " max_step=" << opt.max_step;
        }
    }
}

TEST(DynamicProgram, WarpCostReproducesDistance) {
    // the returned warp, applied as a piecewise-linear lattice path, attains the reported cost
    TimeGrid g(30);
    std::mt19937_64 rng(3);
    auto q1 = srsf_transform(random_smooth(g, rng)), q2 = srsf_transform(random_smooth(g, rng));
    auto r = pairwise_register(q1, q2);
    EXPECT_LE(r.distance, l2_distance(q1, q2) + 1e-9);
    for (std::size_t k = 0; k < g.size(); ++k) {
        EXPECT_GE(r.warp[k], 0.0);
        EXPECT_LE(r.warp[k], 1.0);
    }
}

TEST(PairwiseRegister, SelfRegistrationIsIdentity) {
    TimeGrid g(100);
    auto q = srsf_transform(test::two_peak_curve(g, 2.1, 1.8));
    auto r = pairwise_register(q, q);
    EXPECT_LT(linf(r.warp.values(), g.points()), 2.0 / 100.0);
    EXPECT_LT(r.distance, 1e-3);
}

TEST(PairwiseRegister, RecoversSyntheticWarp) {
    TimeGrid g(100);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> c(0.3, 0.65); // slopes within [0.35, 1.65]
    for (int r = 0; r < 10; ++r) {
        auto q1 = srsf_transform(test::two_peak_curve(g, 2.0 + 0.1 * r, 1.8));
        Warp gam = test::quadratic_warp(g, r % 2 ? c(rng) : -c(rng));
        auto q2 = warp_srsf(q1, gam);
        auto res = pairwise_register(q1, q2);
        // (q2 o g*) sqrt(g*') = q1 needs gam o g* = id
        EXPECT_LT(linf(compose(gam, res.warp).values(), g.points()), 0.03);
        EXPECT_LT(res.distance, 0.1 * l2_distance(q1, q2));
    }
}

TEST(PairwiseRegister, SmallWarpsHitLatticeFloor) {
    // lattice slopes are quantized, so d_a bottoms out near 0.05 however small the warp
    TimeGrid g(100);
    auto q1 = srsf_transform(test::two_peak_curve(g, 2.0, 1.8));
    for (double c : {-0.15, -0.05, 0.05, 0.15}) {
        auto q2 = warp_srsf(q1, test::quadratic_warp(g, c));
        auto res = pairwise_register(q1, q2);
        EXPECT_LT(res.distance, 0.1);
        EXPECT_LT(res.distance, l2_distance(q1, q2));
    }
}

TEST(PairwiseRegister, ShiftedTwoPeakGetsCloser) {
    TimeGrid g(100);
    Curve f = test::two_peak_curve(g, 2.0, 2.0);
    Curve shifted = Curve::sample(g, [](double t) { return two_peak(std::clamp(t - 0.05, 0.0, 1.0), 2.0, 2.0); });
    EXPECT_LT(amplitude_distance(f, shifted), fr_distance(f, shifted));
}

TEST(AmplitudeDistance, BoundedByFisherRao) {
    TimeGrid g(60);
    std::mt19937_64 rng(5);
    for (int r = 0; r < 10; ++r) {
        Curve a = random_smooth(g, rng), b = random_smooth(g, rng);
        EXPECT_LE(amplitude_distance(a, b), fr_distance(a, b) + 1e-9);
    }
    Curve a = random_smooth(g, rng);
    EXPECT_LT(amplitude_distance(a, a), 1e-3);
}

TEST(AmplitudeDistance, SmallForWarpedCopies) {
    TimeGrid g(100);
    for (double c : {-0.5, 0.3, 0.6}) {
        Curve f = test::two_peak_curve(g, 2.2, 1.9);
        Curve fg = warp_curve(f, test::quadratic_warp(g, c));
        EXPECT_LT(amplitude_distance(f, fg), 0.1 * fr_distance(f, fg));
    }
}

TEST(KarcherMean, SingleCurve) {
    TimeGrid g(100);
    std::vector<Curve> one{test::two_peak_curve(g)};
    auto r = karcher_mean(one);
    EXPECT_TRUE(r.warps[0].is_identity() || linf(r.warps[0].values(), g.points()) < 1e-12);
    auto q = srsf_transform(one[0]);
    EXPECT_LT(linf(r.template_srsf.values(), q.values()), 1e-12);
    EXPECT_LT(linf(r.template_curve.values(), one[0].values()), 1e-2);
}

TEST(KarcherMean, TwoIdenticalCurves) {
    TimeGrid g(100);
    std::vector<Curve> two{test::two_peak_curve(g, 2.1, 1.9), test::two_peak_curve(g, 2.1, 1.9)};
    auto r = karcher_mean(two);
    auto q = srsf_transform(two[0]);
    EXPECT_LT(linf(r.template_srsf.values(), q.values()), 1e-6);
    // the curve itself is recovered up to the transform round trip
    EXPECT_LT(linf(r.template_curve.values(), two[0].values()), 1e-2);
    EXPECT_TRUE(r.converged);
}

class KarcherOnGenerator : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        GeneratorSpec spec;
        spec.n = 20;
        spec.T = 100;
        spec.phase_variation = true;
        spec.seed = 21;
        curves_ = new std::vector<Curve>(gen_curves(spec));
        KarcherOptions opt;
        result_ = new RegistrationResult(karcher_mean(*curves_, opt));
    }
    static void TearDownTestSuite() {
        delete curves_;
        delete result_;
    }
    static std::vector<Curve>* curves_;
    static RegistrationResult* result_;
};
std::vector<Curve>* KarcherOnGenerator::curves_ = nullptr;
RegistrationResult* KarcherOnGenerator::result_ = nullptr;

TEST_F(KarcherOnGenerator, TraceNonincreasing) {
    const auto& tr = result_->objective_trace;
    ASSERT_FALSE(tr.empty());
    for (std::size_t i = 1; i < tr.size(); ++i) EXPECT_LE(tr[i], tr[i - 1]);
}

TEST_F(KarcherOnGenerator, AlignmentReducesVariance) {
    EXPECT_LT(test::mean_variance(result_->aligned), test::mean_variance(*curves_));
}

TEST_F(KarcherOnGenerator, WarpsReproduceAligned) {
    for (std::size_t i = 0; i < curves_->size(); ++i) {
        auto again = warp_curve((*curves_)[i], result_->warps[i]);
        EXPECT_EQ(again, result_->aligned[i]);
    }
}

TEST_F(KarcherOnGenerator, ThreadCountDoesNotChangeResult) {
    KarcherOptions opt;
    opt.threads = 4;
    auto r4 = karcher_mean(*curves_, opt);
    EXPECT_EQ(r4.objective_trace, result_->objective_trace);
    EXPECT_EQ(r4.template_curve, result_->template_curve);
}

TEST_F(KarcherOnGenerator, MultipleRegistrationReducesVariance) {
    auto m = multiple_register(*curves_, result_->template_curve);
    EXPECT_LT(test::mean_variance(m.aligned), test::mean_variance(*curves_));
}

TEST(MultipleRegister, TemplateInListGetsIdentity) {
    TimeGrid g(80);
    Curve t = test::two_peak_curve(g, 2.0, 1.7);
    std::vector<Curve> cs{t, warp_curve(t, test::quadratic_warp(g, 0.4)), t};
    auto m = multiple_register(cs, t);
    EXPECT_LT(linf(m.warps[0].values(), g.points()), 2.0 / 80.0);
    EXPECT_LT(linf(m.warps[2].values(), g.points()), 2.0 / 80.0);
}

TEST(WarpDistance, ClosedFormAndProperties) {
    TimeGrid g(1001);
    Warp id = Warp::identity(g);
    std::vector<double> v(g.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = g[k] * g[k];
    Warp sq(g, v);
    EXPECT_NEAR(warp_distance(id, sq), std::acos(2.0 * std::sqrt(2.0) / 3.0), 1e-3);
    EXPECT_NEAR(warp_distance(sq, sq), 0.0, 1e-6);
    EXPECT_EQ(warp_distance(id, sq), warp_distance(sq, id));
    EXPECT_GT(warp_distance(id, test::quadratic_warp(g, 0.2)), 0.0);
    double d = warp_distance(id, sq);
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, std::numbers::pi);
}
