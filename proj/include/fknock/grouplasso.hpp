#pragma once

// Group lasso on grouped score designs, solved by block coordinate descent
// with one majorized proximal step per block, plus HBIC tuning.

#include "fknock/diagnostics.hpp"
#include "fknock/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace fknock {

struct Group {
    int start = 0;
    int size = 0;
};

struct GroupDesign {
    MatrixXd design;          // n x total columns (centered)
    std::vector<Group> groups;
    MatrixXd response;        // n x r

    int n() const { return static_cast<int>(design.rows()); }
    int num_groups() const { return static_cast<int>(groups.size()); }
    int response_dim() const { return static_cast<int>(response.cols()); }

    auto block(int g) const { return design.middleCols(groups[g].start, groups[g].size); }

    void validate() const
    {
        if (response.rows() != design.rows()) {
            throw ConfigError("group design: response rows differ from design rows");
        }
        int next = 0;
        for (const auto& g : groups) {
            if (g.start != next || g.size < 1) {
                throw ConfigError("group design: groups must partition the columns in order");
            }
            next += g.size;
        }
        if (next != design.cols()) {
            throw ConfigError("group design: groups do not cover all columns");
        }
    }
};

// Builds a design from per-group column blocks.
inline GroupDesign make_group_design(const std::vector<MatrixXd>& blocks, MatrixXd response)
{
    GroupDesign d;
    int total = 0;
    for (const auto& b : blocks) {
        d.groups.push_back({total, static_cast<int>(b.cols())});
        total += static_cast<int>(b.cols());
    }
    const Eigen::Index n = response.rows();
    d.design.resize(n, total);
    for (std::size_t g = 0; g < blocks.size(); ++g) {
        if (blocks[g].rows() != n) {
            throw ConfigError("group design: block row count mismatch");
        }
        d.design.middleCols(d.groups[g].start, d.groups[g].size) = blocks[g];
    }
    d.response = std::move(response);
    d.validate();
    return d;
}

struct GroupLassoFit {
    std::vector<MatrixXd> blocks; // m_g x r per group
    double lambda = 0.0;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
    double kkt = 0.0;             // worst KKT violation at exit

    double norm(int g) const { return blocks[g].norm(); }
    bool active(int g) const { return blocks[g].norm() > 0.0; }
};

struct GroupLassoOptions {
    double tol = 1e-6;
    int max_iter = 10000;
};

inline double lambda_max(const GroupDesign& d)
{
    double best = 0.0;
    for (int g = 0; g < d.num_groups(); ++g) {
        best = std::max(best, (d.block(g).transpose() * d.response).norm());
    }
    return best / d.n();
}

inline MatrixXd residual(const GroupDesign& d, const std::vector<MatrixXd>& blocks)
{
    MatrixXd r = d.response;
    for (int g = 0; g < d.num_groups(); ++g) {
        if (blocks[g].norm() > 0.0) {
            r.noalias() -= d.block(g) * blocks[g];
        }
    }
    return r;
}

inline double group_lasso_objective(const GroupDesign& d, const std::vector<MatrixXd>& blocks, double lambda)
{
    double pen = 0.0;
    for (const auto& b : blocks) {
        pen += b.norm();
    }
    return residual(d, blocks).squaredNorm() / (2.0 * d.n()) + lambda * pen;
}

// Largest KKT violation: zero groups max(0, |X_g'R|/n - lambda);
// active groups |X_g'R/n - lambda B_g/|B_g||.
inline double kkt_residual(const GroupDesign& d, const std::vector<MatrixXd>& blocks, double lambda)
{
    const MatrixXd r = residual(d, blocks);
    double worst = 0.0;
    for (int g = 0; g < d.num_groups(); ++g) {
        const MatrixXd grad = d.block(g).transpose() * r / d.n();
        const double nb = blocks[g].norm();
        if (nb > 0.0) {
            worst = std::max(worst, (grad - lambda * blocks[g] / nb).norm());
        } else {
            worst = std::max(worst, grad.norm() - lambda);
        }
    }
    return worst;
}

// Minimizes (2n)^{-1} |Y - sum_g X_g B_g|_F^2 + lambda sum_g |B_g|_F.
// `warm` optionally supplies starting blocks.
inline GroupLassoFit fit_group_lasso(const GroupDesign& d, double lambda, const GroupLassoOptions& opt = {},
                                     const std::vector<MatrixXd>* warm = nullptr)
{
    if (!(lambda >= 0.0)) {
        throw ConfigError("group lasso: lambda must be nonnegative");
    }
    const int ng = d.num_groups();
    const int r = d.response_dim();
    const double n = d.n();

    std::vector<double> lip(ng);
    for (int g = 0; g < ng; ++g) {
        const MatrixXd xtx = d.block(g).transpose() * d.block(g) / n;
        lip[g] = Eigen::SelfAdjointEigenSolver<MatrixXd>(xtx, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
    }

    GroupLassoFit fit;
    fit.lambda = lambda;
    if (warm != nullptr && static_cast<int>(warm->size()) == ng) {
        fit.blocks = *warm;
    } else {
        fit.blocks.resize(ng);
        for (int g = 0; g < ng; ++g) {
            fit.blocks[g] = MatrixXd::Zero(d.groups[g].size, r);
        }
    }
    MatrixXd res = residual(d, fit.blocks);

    // KKT gate scaled so that lambda = 0 still has a meaningful tolerance.
    const double kkt_tol = opt.tol * std::max({lambda, 1e-3 * lambda_max(d), 1e-12});

    for (int it = 1; it <= opt.max_iter; ++it) {
        double change = 0.0, scale = 0.0;
        for (int g = 0; g < ng; ++g) {
            if (!(lip[g] > 0.0)) {
                continue; // all-zero columns stay at zero
            }
            const auto x = d.block(g);
            MatrixXd& b = fit.blocks[g];
            const MatrixXd u = lip[g] * b + x.transpose() * res / n;
            const double nu = u.norm();
            MatrixXd next = nu > lambda ? MatrixXd((1.0 - lambda / nu) / lip[g] * u)
                                        : MatrixXd(MatrixXd::Zero(b.rows(), b.cols()));
            const MatrixXd delta = next - b;
            const double dn = delta.norm();
            if (dn > 0.0) {
                res.noalias() -= x * delta;
                b = std::move(next);
            }
            change = std::max(change, dn);
            scale = std::max(scale, b.norm());
        }
        fit.iterations = it;
        if (change <= opt.tol * std::max(scale, 1.0)) {
            res = residual(d, fit.blocks); // drop accumulated rounding
            fit.kkt = kkt_residual(d, fit.blocks, lambda);
            if (fit.kkt <= kkt_tol) {
                fit.converged = true;
                break;
            }
        }
    }
    if (!fit.converged) {
        fit.kkt = kkt_residual(d, fit.blocks, lambda);
    }
    fit.objective = group_lasso_objective(d, fit.blocks, lambda);
    return fit;
}

// High-dimensional BIC with per-group effective degrees of freedom.
inline double hbic(const GroupLassoFit& fit, const GroupDesign& d, double hbar, Diagnostics* diag = nullptr)
{
    double rss = residual(d, fit.blocks).squaredNorm();
    if (!(rss > 0.0)) {
        warn(diag, "hbic: zero residual sum of squares");
        rss += 1e-12;
    }
    const double dt = d.response_dim();
    double total_cols = 0.0;
    for (const auto& g : d.groups) {
        total_cols += g.size;
    }
    double df = 0.0;
    for (int g = 0; g < d.num_groups(); ++g) {
        const double nb = fit.blocks[g].norm();
        if (nb > 0.0) {
            df += (dt * d.groups[g].size - 1.0) * nb / (nb + fit.lambda) + 1.0;
        }
    }
    return d.n() * std::log(rss) + 2.0 * hbar * std::log(dt * total_cols) * df;
}

struct TuneResult {
    double lambda = 0.0;
    GroupLassoFit fit;
    double score = std::numeric_limits<double>::infinity();
    std::vector<double> grid;
    std::vector<double> scores;
    bool all_converged = true;
};

struct TuneOptions {
    int grid_size = 30;
    double hbar = 1.0;
    double ratio = 100.0;        // smallest lambda = lambda_max / ratio
    bool stop_saturated = true;  // end the path once active coefficients reach n
    GroupLassoOptions fit;
};

// Log-spaced grid lambda_max .. lambda_max/ratio with warm starts; the
// HBIC minimizer wins, ties going to the larger lambda.
inline TuneResult tune_lambda(const GroupDesign& d, const TuneOptions& opt, Diagnostics* diag = nullptr)
{
    if (opt.grid_size < 2) {
        throw ConfigError("tune_lambda: grid_size must be at least 2");
    }
    if (!(opt.hbar > 0.0)) {
        throw ConfigError("tune_lambda: hbar must be positive");
    }
    TuneResult out;
    const double top = lambda_max(d);
    if (!(top > 0.0)) {
        // Zero response correlation: the empty fit is optimal for every lambda.
        out.fit = fit_group_lasso(d, 0.0, opt.fit);
        out.lambda = 0.0;
        out.score = hbic(out.fit, d, opt.hbar, diag);
        out.grid = {0.0};
        out.scores = {out.score};
        return out;
    }
    std::vector<MatrixXd> warm;
    for (int i = 0; i < opt.grid_size; ++i) {
        const double lam = top * std::pow(opt.ratio, -static_cast<double>(i) / (opt.grid_size - 1));
        GroupLassoFit f = fit_group_lasso(d, lam, opt.fit, warm.empty() ? nullptr : &warm);
        warm = f.blocks;
        out.all_converged = out.all_converged && f.converged;
        const double s = hbic(f, d, opt.hbar, diag);
        out.grid.push_back(lam);
        out.scores.push_back(s);
        int active = 0;
        for (int g = 0; g < d.num_groups(); ++g) {
            active += f.active(g) ? d.groups[g].size * d.response_dim() : 0;
        }
        if (s < out.score) {
            out.score = s;
            out.lambda = lam;
            out.fit = std::move(f);
        }
        if (opt.stop_saturated && active >= d.n()) {
            break;
        }
    }
    if (!out.all_converged) {
        warn(diag, "tune_lambda: some grid fits hit max_iter");
    }
    return out;
}

inline TuneResult tune_lambda(const GroupDesign& d, int grid_size, double hbar, Diagnostics* diag = nullptr)
{
    TuneOptions opt;
    opt.grid_size = grid_size;
    opt.hbar = hbar;
    return tune_lambda(d, opt, diag);
}

} // namespace fknock
