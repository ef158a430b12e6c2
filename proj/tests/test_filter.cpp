#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace fknock;

namespace {

VectorXd vec(std::initializer_list<double> v)
{
    VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

VectorXd random_w(Rng& rng, int p)
{
    // small integer grid so ties and zeros are common
    std::uniform_int_distribution<int> u(-6, 9);
    VectorXd w(p);
    for (auto& x : w) x = 0.5 * u(rng);
    return w;
}

MatrixXd random_graph_w(Rng& rng, int p, int lo = -4, int hi = 8)
{
    std::uniform_int_distribution<int> u(lo, hi);
    MatrixXd w = MatrixXd::Zero(p, p);
    for (int j = 0; j < p; ++j) {
        for (int k = 0; k < p; ++k) {
            if (j != k) w(j, k) = 0.25 * u(rng);
        }
    }
    return w;
}

} // namespace

TEST(Threshold, WorkedExample)
{
    const VectorXd w = vec({3, -1, 2, 1, -2});
    const double t0 = knockoff_threshold(w, 0.5, 0);
    EXPECT_EQ(t0, 2.0);
    EXPECT_EQ(select(w, t0), (std::vector<int>{0, 2}));
    EXPECT_EQ(knockoff_threshold(w, 0.5, 1), kInf);
    EXPECT_TRUE(select(w, kInf).empty());
}

TEST(Threshold, AllPositiveSelectsEverything)
{
    const VectorXd w = vec({0.7, 2.0, 0.3, 5.0});
    const double t = knockoff_threshold(w, 0.1, 0);
    EXPECT_EQ(t, 0.3);
    EXPECT_EQ(select(w, t).size(), 4u);
}

TEST(Threshold, SelectAtMinimumPositive)
{
    const VectorXd w = vec({0.7, -2.0, 0.3, 0.0, 5.0});
    EXPECT_EQ(select(w, 0.3), (std::vector<int>{0, 2, 4}));
}

TEST(Threshold, InvalidArgumentsThrow)
{
    EXPECT_THROW(knockoff_threshold(vec({1}), 1.5, 0), ConfigError);
    EXPECT_THROW(knockoff_threshold(vec({1}), 0.2, 2), ConfigError);
}

TEST(Threshold, MatchesBruteForceEnumeration)
{
    Rng rng(1);
    std::uniform_int_distribution<int> psz(1, 20);
    std::uniform_real_distribution<double> uq(0.0, 1.0);
    for (int rep = 0; rep < 1000; ++rep) {
        const VectorXd w = random_w(rng, psz(rng));
        const double q = uq(rng);
        const int delta = rep % 2;
        EXPECT_EQ(knockoff_threshold(w, q, delta), oracle::threshold(w, q, delta));
    }
}

TEST(Threshold, RaisingQNeverShrinksSelection)
{
    Rng rng(2);
    for (int rep = 0; rep < 300; ++rep) {
        const VectorXd w = random_w(rng, 15);
        std::size_t prev = 0;
        for (double q = 0.0; q <= 1.0; q += 0.05) {
            const auto s = select(w, knockoff_threshold(w, q, rep % 2)).size();
            EXPECT_GE(s, prev);
            prev = s;
        }
    }
}

TEST(KnockoffStats, DifferenceOfBlockNorms)
{
    GroupLassoFit f;
    f.blocks = {MatrixXd::Constant(2, 1, 1.0), MatrixXd::Zero(1, 1), MatrixXd::Zero(2, 1),
                MatrixXd::Constant(1, 1, -3.0)};
    const VectorXd w = knockoff_stats(f, 2);
    EXPECT_NEAR(w[0], std::sqrt(2.0), 1e-15);
    EXPECT_EQ(w[1], -3.0);
    EXPECT_THROW(knockoff_stats(f, 3), ConfigError);
}

TEST(GraphEdges, CompleteGraphAndRuleDifference)
{
    MatrixXd w = MatrixXd::Constant(3, 3, 2.0);
    for (auto rule : {Rule::AND, Rule::OR}) {
        EXPECT_EQ(fggm_edges({1, 1, 1}, w, rule).size(), 3u);
    }
    w = MatrixXd::Zero(3, 3);
    w(0, 1) = 2.0;
    w(1, 0) = 0.5;
    EXPECT_EQ(fggm_edges({1, 1, 1}, w, Rule::OR), (std::vector<Edge>{{0, 1}}));
    EXPECT_TRUE(fggm_edges({1, 1, 1}, w, Rule::AND).empty());
}

TEST(GraphEdges, AndIsSubsetOfOr)
{
    Rng rng(3);
    std::uniform_real_distribution<double> ut(0.0, 2.0);
    for (int rep = 0; rep < 100; ++rep) {
        const MatrixXd w = random_graph_w(rng, 4);
        std::vector<double> t(4);
        for (auto& x : t) x = ut(rng);
        const auto a = fggm_edges(t, w, Rule::AND), o = fggm_edges(t, w, Rule::OR);
        for (const auto& e : a) EXPECT_NE(std::find(o.begin(), o.end(), e), o.end());
    }
}

TEST(GlobalThresholds, AllPositiveGivesAllEdges)
{
    Rng rng(4);
    MatrixXd w = random_graph_w(rng, 6, 1, 8);
    for (auto rule : {Rule::AND, Rule::OR}) {
        GlobalThresholdOptions o;
        o.rule = rule;
        const auto t = fggm_global_thresholds(w, o);
        EXPECT_TRUE(fggm_feasible(t, w, o));
        EXPECT_EQ(fggm_edges(t, w, rule).size(), 15u);
    }
}

TEST(GlobalThresholds, InfeasibleGivesInfinityAndNoEdges)
{
    MatrixXd w = -MatrixXd::Constant(4, 4, 1.0);
    w.diagonal().setZero();
    GlobalThresholdOptions o;
    o.delta = 1;
    for (auto f : {fggm_global_thresholds(w, o), fggm_relaxation_thresholds(w, o)}) {
        for (double t : f) EXPECT_EQ(t, kInf);
        EXPECT_TRUE(fggm_edges(f, w, o.rule).empty());
    }
}

TEST(GlobalThresholds, SmallGraphsMatchExhaustiveOracle)
{
    Rng rng(5);
    std::uniform_real_distribution<double> uq(0.05, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
        const int p = 3 + rep % 2;
        const MatrixXd w = random_graph_w(rng, p);
        GlobalThresholdOptions o;
        o.q = uq(rng);
        o.rule = rep % 3 == 0 ? Rule::AND : Rule::OR;
        o.delta = rep % 5 == 0;
        o.c_a = 0.3; // loose enough that nonempty graphs occur at small p
        const auto t = fggm_global_thresholds(w, o);
        const auto ref = oracle::graph_exhaustive(w, o.q, o.rule == Rule::AND, o.delta, o.a, o.c_a);
        const bool feasible = fggm_feasible(t, w, o);
        EXPECT_EQ(feasible, ref.feasible);
        if (ref.feasible) EXPECT_EQ(static_cast<long>(fggm_edges(t, w, o.rule).size()), ref.edges);
    }
}

TEST(GlobalThresholds, RelaxationResultIsFeasible)
{
    Rng rng(6);
    for (int rep = 0; rep < 100; ++rep) {
        const MatrixXd w = random_graph_w(rng, 8);
        GlobalThresholdOptions o;
        o.q = 0.3;
        o.c_a = 0.2;
        const auto t = fggm_relaxation_thresholds(w, o);
        EXPECT_TRUE(fggm_feasible(t, w, o));
        // relaxation never beats the exhaustive optimum
        if (rep < 10) {
            const auto ex = fggm_exhaustive_thresholds(w, o);
            EXPECT_LE(fggm_edges(t, w, o.rule).size(), fggm_edges(ex, w, o.rule).size());
        }
    }
}

TEST(GlobalThresholds, BadInputThrows)
{
    EXPECT_THROW(fggm_global_thresholds(MatrixXd::Zero(2, 3), {}), ConfigError);
    GlobalThresholdOptions o;
    o.a = 0;
    EXPECT_THROW(fggm_global_thresholds(MatrixXd::Zero(3, 3), o), ConfigError);
}

TEST(Metrics, Examples)
{
    const std::vector<int> truth{1, 2};
    auto m = evaluate_metrics(truth, truth);
    EXPECT_EQ(m.fdp, 0.0);
    EXPECT_EQ(m.power, 1.0);
    m = evaluate_metrics(std::vector<int>{}, truth);
    EXPECT_EQ(m.fdp, 0.0);
    EXPECT_EQ(m.power, 0.0);
    m = evaluate_metrics(std::vector<int>{1, 2}, std::vector<int>{2, 3});
    EXPECT_EQ(m.fdp, 0.5);
    EXPECT_EQ(m.power, 0.5);
    const auto e = evaluate_metrics(std::vector<Edge>{{0, 1}, {1, 2}, {2, 3}}, std::vector<Edge>{{0, 1}});
    EXPECT_NEAR(e.fdp, 2.0 / 3, 1e-15);
    EXPECT_EQ(e.power, 1.0);
}
