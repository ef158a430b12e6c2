#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace fknock;

namespace {

CurvePanel random_panel(int n, int p, std::uint64_t seed, const BasisSystem& b)
{
    Rng rng(seed);
    std::normal_distribution<double> z;
    CurvePanel panel{b, {}};
    for (int j = 0; j < p; ++j) {
        MatrixXd c(n, b.size());
        // decaying spread so eigenvalues are distinct
        for (int i = 0; i < n; ++i) {
            for (int l = 0; l < b.size(); ++l) c(i, l) = z(rng) / (1.0 + l) + 0.3 * l;
        }
        panel.coords.push_back(c);
    }
    return panel;
}

} // namespace

TEST(Truncation, Examples)
{
    EXPECT_EQ(choose_truncation((VectorXd(2) << 9, 1).finished(), 0.9), 1);
    EXPECT_EQ(choose_truncation((VectorXd(4) << 4, 3, 2, 1).finished(), 0.9), 3);
    EXPECT_EQ(choose_truncation((VectorXd(3) << 1, 0, 0).finished(), 0.9), 1);
    EXPECT_EQ(choose_truncation((VectorXd(3) << 1, 0, 0).finished(), 0.1), 1);
    EXPECT_THROW(choose_truncation(VectorXd::Ones(3), 0.0), ConfigError);
}

TEST(Truncation, MatchesCumulativeSumOracle)
{
    Rng rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 200; ++rep) {
        VectorXd w(6);
        for (auto& v : w) v = u(rng);
        std::sort(w.data(), w.data() + 6, std::greater<>());
        const double frac = u(rng) * 0.99 + 0.01;
        int d = 0;
        double acc = 0.0;
        while (d < 6 && acc < frac * w.sum() - 1e-12) acc += w[d++];
        EXPECT_EQ(choose_truncation(w, frac), std::max(d, 1));
    }
}

TEST(Fpca, IdenticalCurvesAreDegenerate)
{
    const auto b = make_bspline_basis(3, 3, {});
    CurvePanel panel{b, {MatrixXd::Ones(10, 7)}};
    Diagnostics d;
    const auto f = fit_fpca(panel, 0.9, &d);
    EXPECT_EQ(f.variables[0].eigenvalues.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(f.variables[0].scores.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_TRUE(f.variables[0].degenerate);
    EXPECT_FALSE(d.empty());
}

TEST(Fpca, LargeSampleRecoversDiagonalCovariance)
{
    const auto b = make_fourier_basis(4);
    const VectorXd sd = (VectorXd(4) << 2.0, 1.5, 1.0, 0.5).finished();
    Rng rng(99);
    std::normal_distribution<double> z;
    MatrixXd c(10000, 4);
    for (int i = 0; i < 10000; ++i) {
        for (int l = 0; l < 4; ++l) c(i, l) = sd[l] * z(rng);
    }
    const auto f = fit_fpca(CurvePanel{b, {c}});
    const auto& v = f.variables[0];
    for (int l = 0; l < 4; ++l) {
        EXPECT_NEAR(v.eigenvalues[l], sd[l] * sd[l], 0.05 * sd[l] * sd[l] + 0.05);
        EXPECT_NEAR(std::abs(v.eigenvectors(l, l)), 1.0, 0.05);
    }
}

TEST(Fpca, ScoresReconstructCenteredCoordinates)
{
    const auto b = make_bspline_basis(3, 3, {});
    const auto panel = random_panel(40, 2, 1, b);
    const auto f = fit_fpca(panel);
    for (int j = 0; j < 2; ++j) {
        const MatrixXd rec = f.variables[j].scores * f.variables[j].eigenfunctions.transpose();
        EXPECT_LT((rec - panel.centered(j)).cwiseAbs().maxCoeff(), 1e-9);
    }
}

TEST(Fpca, EigenfunctionsAreOrthonormal)
{
    const auto b = make_bspline_basis(3, 3, {});
    const auto f = fit_fpca(random_panel(50, 3, 2, b));
    for (const auto& v : f.variables) {
        const MatrixXd g = v.eigenfunctions.transpose() * b.gram() * v.eigenfunctions;
        EXPECT_LT((g - MatrixXd::Identity(7, 7)).cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST(Fpca, ScoreCovarianceIsDiagonalWithEigenvalues)
{
    const auto b = make_bspline_basis(3, 3, {});
    const auto f = fit_fpca(random_panel(60, 2, 3, b));
    for (const auto& v : f.variables) {
        const MatrixXd cov = v.scores.transpose() * v.scores / 60.0;
        EXPECT_LT((cov - MatrixXd(v.eigenvalues.asDiagonal())).cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST(Fpca, SignConventionAndDeterminism)
{
    const auto b = make_bspline_basis(3, 3, {});
    const auto panel = random_panel(30, 2, 4, b);
    const auto f1 = fit_fpca(panel), f2 = fit_fpca(panel);
    for (int j = 0; j < 2; ++j) {
        const auto& v = f1.variables[j];
        for (int l = 0; l < 7; ++l) {
            Eigen::Index arg;
            v.eigenvectors.col(l).cwiseAbs().maxCoeff(&arg);
            EXPECT_GT(v.eigenvectors(arg, l), 0.0);
        }
        EXPECT_EQ(v.scores, f2.variables[j].scores);
        EXPECT_EQ(v.eigenvalues, f2.variables[j].eigenvalues);
    }
}

TEST(Fpca, EigenvaluesNonincreasingAndNonnegative)
{
    const auto b = make_bspline_basis(3, 3, {});
    const auto f = fit_fpca(random_panel(5, 2, 5, b)); // n < k: rank deficient
    for (const auto& v : f.variables) {
        for (int l = 0; l < 7; ++l) EXPECT_GE(v.eigenvalues[l], 0.0);
        for (int l = 1; l < 7; ++l) EXPECT_LE(v.eigenvalues[l], v.eigenvalues[l - 1]);
    }
}

TEST(TransformScores, MeanCurveGivesZero)
{
    const auto b = make_bspline_basis(3, 3, {});
    const auto f = fit_fpca(random_panel(30, 1, 6, b));
    EXPECT_LT(transform_scores(f, f.variables[0].mean, 0, 7).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(TransformScores, MeanPlusScaledFirstEigenfunction)
{
    const auto b = make_bspline_basis(3, 3, {});
    const auto f = fit_fpca(random_panel(30, 1, 7, b));
    const auto& v = f.variables[0];
    const VectorXd s = transform_scores(f, v.mean + 2.5 * v.eigenfunctions.col(0), 0, 4);
    EXPECT_NEAR(s[0], 2.5, 1e-9);
    EXPECT_LT(s.tail(3).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(TransformScores, MatchesQuadratureOfInnerProduct)
{
    const auto b = make_bspline_basis(3, 3, {});
    const auto f = fit_fpca(random_panel(30, 1, 8, b));
    const auto& v = f.variables[0];
    Rng rng(1);
    std::normal_distribution<double> z;
    VectorXd x(7);
    for (auto& c : x) c = z(rng);
    const VectorXd s = transform_scores(f, x, 0, 7);
    for (int l = 0; l < 7; ++l) {
        const double ref = oracle::integrate(
            [&](double t) {
                const VectorXd bv = b.values(t);
                return (x - v.mean).dot(bv) * v.eigenfunctions.col(l).dot(bv);
            },
            64);
        EXPECT_NEAR(s[l], ref, 1e-6);
    }
    EXPECT_THROW(transform_scores(f, x, 0, 8), ConfigError);
}
