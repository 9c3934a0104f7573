#include <gtest/gtest.h>

#include <cmath>

#include "otstab/measures.hpp"
#include "support/oracles.hpp"

using namespace otstab;

namespace {

DiscreteMeasure random_measure(Rng& rng, int dim, int n) {
    std::vector<std::vector<double>> pts(n, std::vector<double>(dim));
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < dim; ++k) pts[i][k] = rng.uniform(-1.0, 1.0);
        w[i] = 0.1 + rng.uniform();
    }
    return make_discrete(pts, std::move(w));
}

}  // namespace

TEST(MakeDiscrete, NormalizesWeights) {
    const auto mu = make_discrete({{0.0}, {1.0}}, {1.0, 1.0});
    EXPECT_DOUBLE_EQ(mu.weights[0], 0.5);
    EXPECT_DOUBLE_EQ(mu.weights[1], 0.5);
    EXPECT_DOUBLE_EQ(mu.sigma[0], 0.5);
}

TEST(MakeDiscrete, RejectsNegativeWeight) {
    EXPECT_THROW(make_discrete({{0.0}, {1.0}}, {-1.0, 2.0}), InvalidMeasure);
}

TEST(MakeDiscrete, SingleAtomNormalizes) {
    const auto mu = make_discrete({{3.0, 4.0}}, {7.0});
    EXPECT_DOUBLE_EQ(mu.weights[0], 1.0);
    EXPECT_DOUBLE_EQ(mu.radius(), 5.0);
}

TEST(MakeDiscrete, RejectsEmptyAndBadSigma) {
    EXPECT_THROW(make_discrete({}, {}), InvalidMeasure);
    EXPECT_THROW(make_discrete({{0.0}}, {1.0}, {0.0}), InvalidMeasure);
    EXPECT_THROW(make_discrete({{0.0}, {1.0}}, {1.0, 1.0}, {1.0}), InvalidMeasure);
}

TEST(SampleSource, TwoPointGaussLegendre) {
    SourceParams params;
    params.lo = {0.0};
    params.hi = {1.0};
    const auto q = sample_source(SourceKind::uniform_box, 1, 2, params, 3);
    ASSERT_EQ(q.size(), 2);
    EXPECT_NEAR(q.weights[0], 0.5, 1e-14);
    EXPECT_NEAR(q.weights[1], 0.5, 1e-14);
    EXPECT_NEAR(q.nodes[0], 0.5 - 0.5 / std::sqrt(3.0), 1e-12);
    EXPECT_NEAR(q.nodes[1], 0.5 + 0.5 / std::sqrt(3.0), 1e-12);
    EXPECT_DOUBLE_EQ(q.r_x, 1.0);
    EXPECT_DOUBLE_EQ(q.diam, 1.0);
}

TEST(SampleSource, DeterministicFromSeed) {
    SourceParams params;
    params.lo = {0.0, 0.0};
    params.hi = {1.0, 1.0};
    params.rule = QuadRule::monte_carlo;
    const auto a = sample_source(SourceKind::uniform_box, 2, 128, params, 99);
    const auto b = sample_source(SourceKind::uniform_box, 2, 128, params, 99);
    EXPECT_EQ(a.nodes, b.nodes);
    const auto c = sample_source(SourceKind::uniform_box, 2, 128, params, 100);
    EXPECT_NE(a.nodes, c.nodes);
}

TEST(SampleSource, TruncatedGaussianNormalized) {
    SourceParams params;
    params.lo = {-1.0};
    params.hi = {1.0};
    params.mean = {0.2};
    params.stddev = 0.4;
    const auto q = sample_source(SourceKind::truncated_gaussian, 1, 64, params, 5);
    EXPECT_NEAR(pairwise_sum(q.weights), 1.0, 1e-12);
    for (int j = 0; j < q.size(); ++j) EXPECT_LE(std::abs(q.nodes[j]), q.r_x + 1e-12);
}

TEST(SampleSource, BallSamplesInsideBall) {
    SourceParams params;
    params.center = {0.5, 0.0};
    params.radius = 2.0;
    params.rule = QuadRule::monte_carlo;
    const auto q = sample_source(SourceKind::uniform_ball, 2, 256, params, 11);
    for (int j = 0; j < q.size(); ++j) {
        const double dx = q.nodes[2 * j] - 0.5;
        const double dy = q.nodes[2 * j + 1];
        EXPECT_LE(std::sqrt(dx * dx + dy * dy), 2.0 + 1e-12);
    }
    EXPECT_DOUBLE_EQ(q.r_x, 2.5);
    EXPECT_DOUBLE_EQ(q.diam, 4.0);
}

TEST(SampleSource, RejectsBadConfig) {
    SourceParams params;
    params.lo = {0.0, 0.0};
    params.hi = {1.0, 1.0};
    EXPECT_THROW(sample_source(SourceKind::uniform_box, 2, 16, params, 1), ConfigError);
    EXPECT_THROW(sample_source(SourceKind::uniform_box, 1, 0, params, 1), ConfigError);
}

TEST(W1Discrete, TwoDiracs) {
    const auto mu = make_discrete({{0.0}}, {1.0});
    const auto nu = make_discrete({{1.0}}, {1.0});
    EXPECT_NEAR(w1_discrete(mu, nu), 1.0, 1e-14);
}

TEST(W1Discrete, SplitMassExample) {
    const auto mu = make_discrete({{0.0}, {2.0}}, {0.5, 0.5});
    const auto nu = make_discrete({{1.0}}, {1.0});
    // the only coupling sends both half-masses distance 1
    EXPECT_NEAR(w1_discrete(mu, nu), 1.0, 1e-12);
}

TEST(W1Discrete, IdenticalMeasuresAndErrors) {
    Rng rng(7);
    const auto mu = random_measure(rng, 2, 9);
    EXPECT_NEAR(w1_discrete(mu, mu), 0.0, 1e-9);
    const auto nu1d = make_discrete({{0.0}}, {1.0});
    EXPECT_THROW(w1_discrete(mu, nu1d), DimensionError);
}

TEST(W1Discrete, SymmetryAndTriangle) {
    Rng rng(21);
    for (int rep = 0; rep < 20; ++rep) {
        const int dim = 1 + rep % 2;
        const auto a = random_measure(rng, dim, 4 + rng.uniform_int(4));
        const auto b = random_measure(rng, dim, 4 + rng.uniform_int(4));
        const auto c = random_measure(rng, dim, 4 + rng.uniform_int(4));
        const double ab = w1_discrete(a, b);
        EXPECT_NEAR(ab, w1_discrete(b, a), 1e-9);
        EXPECT_LE(ab, w1_discrete(a, c) + w1_discrete(c, b) + 1e-9);
    }
}

TEST(WpDiscrete, SinglePairHalfSquare) {
    const auto mu = make_discrete({{0.0}}, {1.0});
    const auto nu = make_discrete({{1.0}}, {1.0});
    const auto res = wp_discrete(mu, nu, CostSpec::power(2.0));
    EXPECT_NEAR(res.value, 0.5, 1e-14);
}

TEST(WpDiscrete, MatchesPermutationEnumeration1d) {
    Rng rng(33);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<std::vector<double>> xs, ys;
        for (int i = 0; i < 3; ++i) {
            xs.push_back({rng.uniform(-1.0, 1.0)});
            ys.push_back({rng.uniform(-1.0, 1.0)});
        }
        const auto mu = make_discrete(xs, {1.0, 1.0, 1.0});
        const auto nu = make_discrete(ys, {1.0, 1.0, 1.0});
        const CostSpec spec = CostSpec::power(rep % 2 == 0 ? 2.0 : 1.5);
        const auto res = wp_discrete(mu, nu, spec);
        EXPECT_NEAR(res.value, oracles::brute_force_equal_weight(mu, nu, spec), 1e-10);
    }
}

TEST(WpDiscrete, MatchesPermutationEnumeration2d) {
    Rng rng(34);
    for (int rep = 0; rep < 6; ++rep) {
        std::vector<std::vector<double>> xs, ys;
        for (int i = 0; i < 4; ++i) {
            xs.push_back({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
            ys.push_back({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
        }
        const auto mu = make_discrete(xs, {1.0, 1.0, 1.0, 1.0});
        const auto nu = make_discrete(ys, {1.0, 1.0, 1.0, 1.0});
        const CostSpec spec = CostSpec::power(2.0);
        const auto res = wp_discrete(mu, nu, spec);
        EXPECT_NEAR(res.value, oracles::brute_force_equal_weight(mu, nu, spec), 1e-7);
    }
}

TEST(WpDiscrete, UnequalWeightsMatchTinyGridSearch) {
    const auto mu = make_discrete({{0.0}, {1.0}}, {0.3, 0.7});
    const auto nu = make_discrete({{0.25}, {0.9}}, {0.6, 0.4});
    const CostSpec spec = CostSpec::power(1.5);
    const auto res = wp_discrete(mu, nu, spec);
    EXPECT_NEAR(res.value, oracles::brute_force_small(mu, nu, spec, 4000), 1e-7);
}

TEST(WpDiscrete, IdentityPlan) {
    Rng rng(35);
    const auto mu = random_measure(rng, 1, 5);
    const auto res = wp_discrete(mu, mu, CostSpec::power(2.0));
    EXPECT_NEAR(res.value, 0.0, 1e-12);
    for (const auto& e : res.plan) EXPECT_EQ(e.i, e.j);
}

TEST(WpDiscrete, DualCertificates) {
    Rng rng(36);
    for (int rep = 0; rep < 12; ++rep) {
        const int dim = 1 + rep % 2;
        const auto mu = random_measure(rng, dim, 3 + rng.uniform_int(5));
        const auto nu = random_measure(rng, dim, 3 + rng.uniform_int(5));
        const CostSpec spec = CostSpec::power(rep % 3 == 0 ? 1.5 : 2.0);
        const auto res = wp_discrete(mu, nu, spec);

        // dual feasibility
        for (int i = 0; i < mu.size(); ++i)
            for (int j = 0; j < nu.size(); ++j)
                EXPECT_LE(res.dual_src[i] + res.dual_tgt[j],
                          cost_eval(spec, mu.point(i), nu.point(j)) + 1e-7);
        // complementary slackness on the plan support
        for (const auto& e : res.plan) {
            if (e.mass > 1e-12) {
                EXPECT_NEAR(res.dual_src[e.i] + res.dual_tgt[e.j],
                            cost_eval(spec, mu.point(e.i), nu.point(e.j)), 1e-7);
            }
        }
        // plan marginals match the input weights
        std::vector<double> row(mu.size(), 0.0), col(nu.size(), 0.0);
        for (const auto& e : res.plan) {
            row[e.i] += e.mass;
            col[e.j] += e.mass;
        }
        for (int i = 0; i < mu.size(); ++i) EXPECT_NEAR(row[i], mu.weights[i], 1e-9);
        for (int j = 0; j < nu.size(); ++j) EXPECT_NEAR(col[j], nu.weights[j], 1e-9);
        // strong duality against the plan's own marginals
        double dual_obj = 0.0;
        for (int i = 0; i < mu.size(); ++i) dual_obj += res.dual_src[i] * row[i];
        for (int j = 0; j < nu.size(); ++j) dual_obj += res.dual_tgt[j] * col[j];
        EXPECT_NEAR(dual_obj, res.value, 1e-8);
    }
}

TEST(WpDiscrete, MonotoneInPOnNormalizedSupports) {
    Rng rng(37);
    for (int rep = 0; rep < 8; ++rep) {
        auto mu = random_measure(rng, 1, 5);
        auto nu = random_measure(rng, 1, 5);
        // scale supports into diameter <= 1 so W_p is monotone in p
        for (auto* m : {&mu, &nu})
            for (double& x : m->points) x = 0.25 * x + 0.5;
        const double w15 = wasserstein_p(mu, nu, 1.5);
        const double w2 = wasserstein_p(mu, nu, 2.0);
        const double w3 = wasserstein_p(mu, nu, 3.0);
        EXPECT_LE(w15, w2 + 1e-9);
        EXPECT_LE(w2, w3 + 1e-9);
    }
}

TEST(DiscretizeTarget, SingleCellFormula) {
    const auto mu = make_discrete({{0.2}, {0.8}}, {0.5, 0.5});
    const auto out = discretize_target(mu, {Box{{0.0}, {1.0}}});
    ASSERT_EQ(out.size(), 1);
    EXPECT_DOUBLE_EQ(out.weights[0], 1.0);
}

TEST(DiscretizeTarget, WeightsSumToOneAndFloor) {
    Rng rng(41);
    const auto mu = random_measure(rng, 1, 10);
    const int n = 8;
    std::vector<Box> cells;
    for (int c = 0; c < n; ++c)
        cells.push_back(Box{{-1.0 + 2.0 * c / n}, {-1.0 + 2.0 * (c + 1) / n}});
    const auto out = discretize_target(mu, cells);
    EXPECT_NEAR(pairwise_sum(out.weights), 1.0, 1e-12);
    for (double w : out.weights) EXPECT_GE(w, 1.0 / (n * n) - 1e-15);
}

TEST(DiscretizeTarget, W1BoundAgainstExactOracle) {
    Rng rng(43);
    const auto mu = random_measure(rng, 1, 10);
    const int n = 4;
    std::vector<Box> cells;
    for (int c = 0; c < n; ++c)
        cells.push_back(Box{{-1.0 + 2.0 * c / n}, {-1.0 + 2.0 * (c + 1) / n}});
    const auto out = discretize_target(mu, cells);
    const double eps_n = 2.0 / n;  // max cell diameter
    const double diam_y = mu.diameter();
    EXPECT_LE(w1_discrete(mu, out), eps_n + diam_y / n + 1e-12);
}

TEST(DiscretizeTarget, UncoveredSupportThrows) {
    const auto mu = make_discrete({{0.2}, {0.8}}, {0.5, 0.5});
    EXPECT_THROW(discretize_target(mu, {Box{{0.0}, {0.5}}}), PartitionError);
}

TEST(RelEntropy, BasicValues) {
    EXPECT_NEAR(rel_entropy({0.25, 0.25, 0.25, 0.25}, {0.25, 0.25, 0.25, 0.25}), 0.0, 1e-15);
    EXPECT_NEAR(rel_entropy({1.0, 0.0, 0.0, 0.0}, {0.25, 0.25, 0.25, 0.25}), std::log(4.0),
                1e-12);
}

TEST(RelEntropy, NonnegativeOnSimplexPairs) {
    Rng rng(51);
    for (int rep = 0; rep < 100; ++rep) {
        const int n = 2 + rng.uniform_int(6);
        std::vector<double> mu(n), sigma(n);
        double smu = 0.0, ssig = 0.0;
        for (int i = 0; i < n; ++i) {
            mu[i] = rng.uniform();
            sigma[i] = 0.05 + rng.uniform();
            smu += mu[i];
            ssig += sigma[i];
        }
        for (int i = 0; i < n; ++i) {
            mu[i] /= smu;
            sigma[i] /= ssig;
        }
        EXPECT_GE(rel_entropy(mu, sigma), -1e-14);
    }
}

TEST(RelEntropy, SupportViolationThrows) {
    EXPECT_THROW(rel_entropy({0.5, 0.5}, {1.0, 0.0}), SupportError);
}

TEST(SampleSource, TensorGridNormalized) {
    SourceParams params;
    params.lo = {0.0, -1.0};
    params.hi = {1.0, 1.0};
    params.rule = QuadRule::grid_tensor;
    const auto q = sample_source(SourceKind::uniform_box, 2, 64, params, 9);
    EXPECT_EQ(q.size(), 64);  // 8 x 8
    EXPECT_NEAR(pairwise_sum(q.weights), 1.0, 1e-12);
    // uniform density 1/area = 0.5 at every node
    for (double d : q.density) EXPECT_NEAR(d, 0.5, 1e-12);
}

TEST(WpDiscrete, BoundaryCostGoesThroughFlow) {
    // boundary cost is not convex in x - y, so even in 1d the solver must
    // take the min-cost-flow path; check a 2x2 instance against enumeration
    Box omega{{0.0}, {1.0}};
    const CostSpec spec = CostSpec::boundary(2.0, omega, CostScale::unit);
    const auto mu = make_discrete({{0.05}, {0.6}}, {0.5, 0.5});
    const auto nu = make_discrete({{0.95}, {0.4}}, {0.4, 0.6});
    const auto res = wp_discrete(mu, nu, spec);
    EXPECT_NEAR(res.value, oracles::brute_force_small(mu, nu, spec, 4000), 1e-6);
    EXPECT_GT(res.value_error_bound, 0.0);
}

TEST(W1Discrete, FlowPathMatchesCdfDistanceOnEmbeddedLine) {
    // the same instance computed by the 1d CDF formula and by min-cost flow
    // on a 2d embedding must agree
    Rng rng(59);
    for (int rep = 0; rep < 6; ++rep) {
        const int n = 3 + rng.uniform_int(4), m = 3 + rng.uniform_int(4);
        std::vector<std::vector<double>> p1, p2, q1, q2;
        std::vector<double> wa, wb;
        for (int i = 0; i < n; ++i) {
            const double x = rng.uniform(-1.0, 1.0);
            p1.push_back({x});
            p2.push_back({x, 0.0});
            wa.push_back(0.2 + rng.uniform());
        }
        for (int j = 0; j < m; ++j) {
            const double x = rng.uniform(-1.0, 1.0);
            q1.push_back({x});
            q2.push_back({x, 0.0});
            wb.push_back(0.2 + rng.uniform());
        }
        const double d1 = w1_discrete(make_discrete(p1, wa), make_discrete(q1, wb));
        const double d2 = w1_discrete(make_discrete(p2, wa), make_discrete(q2, wb));
        EXPECT_NEAR(d1, d2, 1e-7);
    }
}
