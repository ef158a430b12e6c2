#pragma once

// Functional model-X knockoffs: shrunk correlation matrix of normalized FPC
// scores, the diagonal program for Theta_R (variants E1/E2/E3), and
// conditional Gaussian sampling of knockoff scores and curves.

#include "fknock/basis.hpp"
#include "fknock/diagnostics.hpp"
#include "fknock/fpca.hpp"
#include "fknock/linalg.hpp"
#include "fknock/rng.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace fknock {

enum class RVariant { E1, E2, E3 };

inline std::string to_string(RVariant v)
{
    switch (v) {
    case RVariant::E1: return "E1";
    case RVariant::E2: return "E2";
    case RVariant::E3: return "E3";
    }
    return "?";
}

struct ThetaModel {
    int p = 0;
    int k = 0;
    MatrixXd theta_s;             // sample correlation of normalized scores (pk x pk)
    double gamma = 0.0;           // shrinkage intensity
    MatrixXd theta_c;             // (1 - gamma) theta_s + gamma I
    std::vector<bool> active;     // components usable for normalization
    std::optional<RVariant> variant;
    VectorXd theta_r;             // diagonal of Theta_R
    double slack_min_eig = std::numeric_limits<double>::quiet_NaN(); // lambda_min(2 theta_c - Theta_R)
    double objective = std::numeric_limits<double>::quiet_NaN();     // sum of (1 - r) over free parameters

    int dim() const { return p * k; }
};

inline constexpr double kGammaMin = 1e-3;
inline constexpr double kComponentCut = 1e-12;

// n x pk matrix of centered scores divided by sqrt(eigenvalue). Components with
// eigenvalue below kComponentCut * leading eigenvalue are zeroed and marked inactive.
inline MatrixXd normalized_scores(const FpcaModel& fpca, std::vector<bool>* active = nullptr,
                                  Diagnostics* diag = nullptr)
{
    const int n = fpca.n(), p = fpca.p(), k = fpca.k();
    MatrixXd s = MatrixXd::Zero(n, static_cast<Eigen::Index>(p) * k);
    if (active != nullptr) {
        active->assign(static_cast<std::size_t>(p) * k, false);
    }
    int dropped = 0;
    for (int j = 0; j < p; ++j) {
        const auto& v = fpca.variables[j];
        const double lead = v.eigenvalues.size() > 0 ? v.eigenvalues[0] : 0.0;
        for (int l = 0; l < k; ++l) {
            const double w = v.eigenvalues[l];
            if (!(w > 0.0) || w < kComponentCut * lead) {
                ++dropped;
                continue;
            }
            const VectorXd col = v.scores.col(l).array() - v.scores.col(l).mean();
            s.col(j * k + l) = col / std::sqrt(w);
            if (active != nullptr) {
                (*active)[static_cast<std::size_t>(j) * k + l] = true;
            }
        }
    }
    if (dropped > 0) {
        warn(diag, "knockoff: " + std::to_string(dropped) +
                       " zero-variance components dropped from normalization");
    }
    return s;
}

// Shrinkage intensity toward the identity: sum of estimated sampling variances
// of the off-diagonal correlations over their sum of squares, clamped to
// [kGammaMin, 1]. The variance of each theta_ab is estimated as the sample
// variance of the products x_ia x_ib divided by n (divisor n - 1 inside).
inline double shrinkage_intensity(const MatrixXd& normalized, const MatrixXd& theta_s)
{
    const double n = static_cast<double>(normalized.rows());
    if (n < 2) {
        return 1.0;
    }
    const MatrixXd sq = normalized.array().square().matrix();
    const VectorXd row_sums = sq.rowwise().sum();
    const VectorXd row_quart = sq.array().square().rowwise().sum();
    const double products = row_sums.squaredNorm() - row_quart.sum(); // sum_i sum_{a!=b} x_ia^2 x_ib^2
    const double off_sq = theta_s.squaredNorm() - theta_s.diagonal().squaredNorm();
    const double var_sum = std::max(products - n * off_sq, 0.0) / (n * (n - 1.0));
    if (!(off_sq > 0.0)) {
        return 1.0;
    }
    return std::clamp(var_sum / off_sq, kGammaMin, 1.0);
}

// Sample correlation of normalized scores and its shrinkage toward identity.
// When gamma is absent it is estimated by shrinkage_intensity.
inline ThetaModel estimate_theta_c(const FpcaModel& fpca, std::optional<double> gamma = std::nullopt,
                                   Diagnostics* diag = nullptr)
{
    ThetaModel t;
    t.p = fpca.p();
    t.k = fpca.k();
    const MatrixXd s = normalized_scores(fpca, &t.active, diag);
    const double n = static_cast<double>(s.rows());
    t.theta_s = linalg::symmetrize(s.transpose() * s / n);
    for (int a = 0; a < t.dim(); ++a) {
        if (!t.active[a]) {
            t.theta_s.row(a).setZero();
            t.theta_s.col(a).setZero();
            t.theta_s(a, a) = 1.0;
        }
    }
    if (gamma) {
        if (!(*gamma >= 0.0 && *gamma <= 1.0)) {
            throw ConfigError("shrinkage gamma must lie in [0, 1]");
        }
        t.gamma = std::max(*gamma, 0.0);
    } else {
        t.gamma = shrinkage_intensity(s, t.theta_s);
    }
    t.theta_c = (1.0 - t.gamma) * t.theta_s;
    t.theta_c.diagonal().array() += t.gamma;
    return t;
}

namespace detail {

// Coordinate -> free-parameter index map for a variant.
inline std::vector<int> parameter_map(RVariant v, int p, int k)
{
    std::vector<int> map(static_cast<std::size_t>(p) * k);
    for (int a = 0; a < p * k; ++a) {
        map[a] = v == RVariant::E1 ? 0 : v == RVariant::E2 ? a / k : a;
    }
    return map;
}

inline int parameter_count(RVariant v, int p, int k)
{
    return v == RVariant::E1 ? 1 : v == RVariant::E2 ? p : p * k;
}

inline VectorXd expand(const VectorXd& r, const std::vector<int>& map)
{
    VectorXd out(static_cast<Eigen::Index>(map.size()));
    for (std::size_t a = 0; a < map.size(); ++a) {
        out[static_cast<Eigen::Index>(a)] = r[map[a]];
    }
    return out;
}

} // namespace detail

struct BarrierOptions {
    double mu_start = 1.0;
    double mu_end = 1e-10;
    int max_newton = 60;
    double newton_tol = 1e-10;
};

// Maximizes sum(r) subject to 0 <= r <= 1 and 2 C - diag(expand(r)) >= 0 with
// a primal log-barrier path-following Newton method. Returns the free parameters.
inline VectorXd barrier_solve(const MatrixXd& c, const std::vector<int>& map, int m,
                              const BarrierOptions& opt = {})
{
    const Eigen::Index dim = c.rows();
    const double lmin = linalg::min_eigenvalue(c);
    if (!(lmin > 0.0)) {
        throw NumericalError("correlation matrix is not positive definite; raise gamma");
    }
    MatrixXd indicator = MatrixXd::Zero(dim, m);
    for (Eigen::Index a = 0; a < dim; ++a) {
        indicator(a, map[a]) = 1.0;
    }
    VectorXd r = VectorXd::Constant(m, std::min(0.5, 0.999 * lmin));

    auto slack = [&](const VectorXd& x) {
        MatrixXd s = 2.0 * c;
        s.diagonal() -= indicator * x;
        return s;
    };
    auto merit = [&](const VectorXd& x, double mu, bool& ok) {
        ok = (x.array() > 0.0).all() && (x.array() < 1.0).all();
        if (!ok) {
            return -std::numeric_limits<double>::infinity();
        }
        Eigen::LLT<MatrixXd> llt(slack(x));
        if (llt.info() != Eigen::Success) {
            ok = false;
            return -std::numeric_limits<double>::infinity();
        }
        const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
        return x.sum() + mu * (logdet + x.array().log().sum() + (1.0 - x.array()).log().sum());
    };

    for (double mu = opt.mu_start;; mu *= 0.5) {
        for (int it = 0; it < opt.max_newton; ++it) {
            Eigen::LLT<MatrixXd> llt(slack(r));
            const MatrixXd sinv = llt.solve(MatrixXd::Identity(dim, dim));
            const VectorXd diag_sum = indicator.transpose() * sinv.diagonal();
            VectorXd grad = VectorXd::Ones(m) - mu * diag_sum;
            grad.array() += mu / r.array() - mu / (1.0 - r.array());
            MatrixXd neg_hess = mu * (indicator.transpose() * sinv.cwiseAbs2() * indicator);
            neg_hess.diagonal().array() += mu * (r.array().square().inverse() + (1.0 - r.array()).square().inverse());
            const VectorXd step = neg_hess.ldlt().solve(grad);
            const double decrement = grad.dot(step);
            if (!(decrement > opt.newton_tol)) {
                break;
            }
            bool ok = false;
            const double f0 = merit(r, mu, ok);
            double t = 1.0;
            bool moved = false;
            for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
                const VectorXd cand = r + t * step;
                const double f1 = merit(cand, mu, ok);
                if (ok && f1 >= f0 + 0.25 * t * decrement) {
                    r = cand;
                    moved = true;
                    break;
                }
            }
            if (!moved) {
                break;
            }
        }
        if (mu <= opt.mu_end) {
            break;
        }
    }
    return r;
}

// Fills theta_r, variant, slack and objective. E1 is solved in closed form.
inline ThetaModel solve_R(ThetaModel theta, RVariant variant, const BarrierOptions& opt = {},
                          Diagnostics* diag = nullptr)
{
    const double lmin = linalg::min_eigenvalue(theta.theta_c);
    if (!(lmin > 0.0)) {
        throw NumericalError("lambda_min(theta_c) <= 0: increase the shrinkage gamma");
    }
    const auto map = detail::parameter_map(variant, theta.p, theta.k);
    const int m = detail::parameter_count(variant, theta.p, theta.k);
    VectorXd r;
    if (variant == RVariant::E1) {
        r = VectorXd::Constant(1, std::min(1.0, 2.0 * lmin));
    } else {
        r = barrier_solve(theta.theta_c, map, m, opt);
        // Snap parameters that the barrier leaves just below 1.
        for (int i = 0; i < m; ++i) {
            if (r[i] > 1.0 - 1e-4) {
                VectorXd trial = r;
                trial[i] = 1.0;
                MatrixXd s = 2.0 * theta.theta_c;
                s.diagonal() -= detail::expand(trial, map);
                if (linalg::min_eigenvalue(s) >= 0.0) {
                    r = trial;
                }
            }
        }
        r = r.cwiseMax(0.0).cwiseMin(1.0);
    }
    theta.variant = variant;
    theta.theta_r = detail::expand(r, map);
    MatrixXd s = 2.0 * theta.theta_c;
    s.diagonal() -= theta.theta_r;
    theta.slack_min_eig = linalg::min_eigenvalue(s);
    theta.objective = (1.0 - r.array()).sum();
    if (theta.slack_min_eig < -1e-8) {
        warn(diag, "solve_R: slack matrix has eigenvalue " + std::to_string(theta.slack_min_eig));
    }
    return theta;
}

struct KnockoffPanel {
    MatrixXd normalized;  // n x pk sampled knockoff normalized scores
    MatrixXd scores;      // n x pk knockoff FPC scores (de-normalized)
    CurvePanel curves;    // knockoff curves: mean + sum_l score_l phi_l
    std::uint64_t rng_seed = 0;
};

// Draws knockoff scores from the conditional Gaussian given the original
// normalized scores, then reconstructs knockoff curves with all k_n components.
// Sample i uses its own generator derived from (seed, i).
inline KnockoffPanel sample_knockoffs(const FpcaModel& fpca, const ThetaModel& theta,
                                      std::uint64_t seed, Diagnostics* diag = nullptr)
{
    if (!theta.variant || theta.theta_r.size() != theta.dim()) {
        throw ConfigError("sample_knockoffs requires a solved ThetaModel");
    }
    if (theta.p != fpca.p() || theta.k != fpca.k()) {
        throw ConfigError("ThetaModel shape does not match the FPCA model");
    }
    const int n = fpca.n(), p = fpca.p(), k = fpca.k();
    const Eigen::Index dim = theta.dim();
    const MatrixXd s = normalized_scores(fpca);

    Eigen::LLT<MatrixXd> llt(theta.theta_c);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("theta_c is not positive definite");
    }
    const auto rdiag = theta.theta_r.asDiagonal();
    const MatrixXd cinv_r = llt.solve(MatrixXd(rdiag)); // C^{-1} R
    MatrixXd transfer = -MatrixXd(rdiag) * llt.solve(MatrixXd::Identity(dim, dim));
    transfer.diagonal().array() += 1.0;                  // I - R C^{-1}
    MatrixXd cond = -MatrixXd(rdiag) * cinv_r;
    cond.diagonal() += 2.0 * theta.theta_r;
    cond = linalg::symmetrize(cond);
    int clipped = 0;
    double worst = 0.0;
    const MatrixXd root = linalg::sym_sqrt(cond, &clipped, &worst);
    if (worst < -1e-8) {
        warn(diag, "sample_knockoffs: conditional covariance not PSD (min eig " +
                       std::to_string(worst) + "), clipped");
    }

    KnockoffPanel out;
    out.rng_seed = seed;
    out.normalized = s * transfer.transpose();
    MatrixXd z(n, dim);
    for (int i = 0; i < n; ++i) {
        Rng rng = make_rng(seed, static_cast<std::uint64_t>(i));
        std::normal_distribution<double> normal(0.0, 1.0);
        for (Eigen::Index a = 0; a < dim; ++a) {
            z(i, a) = normal(rng);
        }
    }
    out.normalized.noalias() += z * root; // root is symmetric

    out.scores = MatrixXd::Zero(n, dim);
    for (int j = 0; j < p; ++j) {
        const auto& v = fpca.variables[j];
        for (int l = 0; l < k; ++l) {
            const Eigen::Index a = static_cast<Eigen::Index>(j) * k + l;
            if (theta.active[a]) {
                out.scores.col(a) = out.normalized.col(a) * std::sqrt(v.eigenvalues[l]);
            } else {
                out.normalized.col(a).setZero();
            }
        }
    }
    out.curves.basis = fpca.basis;
    out.curves.coords.resize(p);
    for (int j = 0; j < p; ++j) {
        const auto& v = fpca.variables[j];
        MatrixXd c = out.scores.middleCols(static_cast<Eigen::Index>(j) * k, k) * v.eigenfunctions.transpose();
        c.rowwise() += v.mean.transpose();
        out.curves.coords[j] = std::move(c);
    }
    return out;
}

} // namespace fknock
