#pragma once

// Independent reference implementations used as test oracles. None of these
// call into the library routines they check.

#include "fknock/fknock.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <set>
#include <vector>

namespace oracle {

using fknock::MatrixXd;
using fknock::VectorXd;

// Cox-de Boor recursion on a clamped uniform knot vector.
inline double bspline(int i, int degree, const std::vector<double>& knots, double t)
{
    if (degree == 0) {
        const bool last = t == knots.back() && knots[i + 1] == knots.back() && knots[i] < knots[i + 1];
        return (knots[i] <= t && t < knots[i + 1]) || last ? 1.0 : 0.0;
    }
    double out = 0.0;
    const double d1 = knots[i + degree] - knots[i];
    const double d2 = knots[i + degree + 1] - knots[i + 1];
    if (d1 > 0) out += (t - knots[i]) / d1 * bspline(i, degree - 1, knots, t);
    if (d2 > 0) out += (knots[i + degree + 1] - t) / d2 * bspline(i + 1, degree - 1, knots, t);
    return out;
}

inline std::vector<double> clamped_knots(int interior, int degree)
{
    std::vector<double> k(degree + 1, 0.0);
    for (int i = 1; i <= interior; ++i) k.push_back(static_cast<double>(i) / (interior + 1));
    k.insert(k.end(), degree + 1, 1.0);
    return k;
}

// 5-point Gauss-Legendre on `pieces` equal subintervals of [0,1]; exact for
// piecewise polynomials of degree <= 9 whose breaks fall on piece boundaries.
inline double integrate(const std::function<double(double)>& f, int pieces = 400)
{
    static const double x[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                0.9061798459386640};
    static const double w[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                                0.2369268850561891};
    double s = 0.0;
    const double h = 1.0 / pieces;
    for (int p = 0; p < pieces; ++p) {
        const double mid = (p + 0.5) * h;
        for (int i = 0; i < 5; ++i) s += w[i] * 0.5 * h * f(mid + 0.5 * h * x[i]);
    }
    return s;
}

// Knockoff threshold by brute force: every |W_j| (duplicates included) is
// tried and the smallest one meeting the ratio bound wins.
inline double threshold(const VectorXd& w, double q, int delta)
{
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < w.size(); ++c) {
        const double t = std::abs(w[c]);
        if (t == 0.0) continue;
        double neg = 0, pos = 0;
        for (Eigen::Index j = 0; j < w.size(); ++j) {
            if (w[j] <= -t) neg += 1;
            if (w[j] >= t) pos += 1;
        }
        if ((delta + neg) / std::max(pos, 1.0) <= q && pos > 0) best = std::min(best, t);
    }
    return best;
}

// Accelerated proximal gradient (FISTA) on the full coefficient vector with a
// global Lipschitz constant; run to a tight tolerance.
inline double group_lasso_objective(const MatrixXd& x, const MatrixXd& y, const std::vector<int>& sizes,
                                    const MatrixXd& b, double lambda)
{
    double pen = 0.0;
    for (std::size_t g = 0, s = 0; g < sizes.size(); s += sizes[g], ++g) {
        pen += b.middleRows(static_cast<Eigen::Index>(s), sizes[g]).norm();
    }
    return (y - x * b).squaredNorm() / (2.0 * x.rows()) + lambda * pen;
}

inline MatrixXd fista(const MatrixXd& x, const MatrixXd& y, const std::vector<int>& sizes, double lambda,
                      double tol = 1e-12, int max_iter = 200000)
{
    const double n = static_cast<double>(x.rows());
    const double lip = Eigen::JacobiSVD<MatrixXd>(x).singularValues()(0);
    const double step = n / (lip * lip);
    MatrixXd b = MatrixXd::Zero(x.cols(), y.cols()), z = b;
    double t = 1.0;
    for (int it = 0; it < max_iter; ++it) {
        MatrixXd u = z - step * (x.transpose() * (x * z - y) / n);
        for (std::size_t g = 0, s = 0; g < sizes.size(); s += sizes[g], ++g) {
            auto blk = u.middleRows(static_cast<Eigen::Index>(s), sizes[g]);
            const double nb = blk.norm();
            blk *= nb > step * lambda ? 1.0 - step * lambda / nb : 0.0;
        }
        const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const MatrixXd diff = u - b;
        z = u + (t - 1.0) / tn * diff;
        b = u;
        t = tn;
        if (diff.norm() <= tol * std::max(1.0, b.norm())) break;
    }
    return b;
}

// Exhaustive search for the graph thresholds: every combination of per-node
// candidates (nonzero |W_jk| plus +inf) is scored from scratch.
struct GraphSearch {
    long edges = -1;
    bool feasible = false;
};

inline GraphSearch graph_exhaustive(const MatrixXd& w, double q, bool and_rule, int delta, double a, double c_a)
{
    const int p = static_cast<int>(w.rows());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> cand(p);
    for (int j = 0; j < p; ++j) {
        std::set<double> s;
        for (int k = 0; k < p; ++k) {
            if (k != j && w(j, k) != 0.0) s.insert(std::abs(w(j, k)));
        }
        cand[j].assign(s.begin(), s.end());
        cand[j].push_back(inf);
    }
    GraphSearch best;
    std::vector<double> t(p);
    std::function<void(int)> rec = [&](int j) {
        if (j == p) {
            long e = 0;
            for (int u = 0; u < p; ++u) {
                for (int v = u + 1; v < p; ++v) {
                    const bool uv = w(u, v) >= t[u], vu = w(v, u) >= t[v];
                    e += and_rule ? (uv && vu) : (uv || vu);
                }
            }
            const double bound = (and_rule ? 2.0 : 1.0) * q / (c_a * p) * std::max<double>(static_cast<double>(e), 1.0);
            bool ok = true;
            for (int u = 0; u < p && ok; ++u) {
                int neg = 0;
                for (int v = 0; v < p; ++v) neg += v != u && t[u] < inf && w(u, v) <= -t[u];
                ok = a * delta + neg <= bound + 1e-12;
            }
            if (ok && e > best.edges) {
                best.edges = e;
                best.feasible = true;
            }
            return;
        }
        for (double c : cand[j]) {
            t[j] = c;
            rec(j + 1);
        }
    };
    rec(0);
    return best;
}

// Moral graph by pairing: for every node, connect it to each parent and
// connect every pair of its parents.
inline std::set<std::pair<int, int>> moral_graph(const std::vector<std::pair<int, int>>& dag, int p)
{
    std::vector<std::vector<int>> parents(p);
    for (const auto& [a, b] : dag) parents[b].push_back(a);
    std::set<std::pair<int, int>> out;
    for (int c = 0; c < p; ++c) {
        for (std::size_t i = 0; i < parents[c].size(); ++i) {
            out.insert({std::min(c, parents[c][i]), std::max(c, parents[c][i])});
            for (std::size_t k = i + 1; k < parents[c].size(); ++k) {
                const int u = parents[c][i], v = parents[c][k];
                out.insert({std::min(u, v), std::max(u, v)});
            }
        }
    }
    return out;
}

// Grid search for the correlation SDP: the feasible set
// {r : 2C - diag(expand(r)) >= 0} is downward closed, so each coordinate is
// scanned upward and the scan stops at the first infeasible value.
inline bool psd(const MatrixXd& m)
{
    return Eigen::SelfAdjointEigenSolver<MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues().minCoeff() >= -1e-12;
}

inline double sdp_grid(const MatrixXd& c, const std::vector<int>& map, int m, int points = 21)
{
    std::vector<double> r(m, 0.0);
    double best = std::numeric_limits<double>::infinity();
    auto feasible = [&] {
        MatrixXd s = 2.0 * c;
        for (std::size_t a = 0; a < map.size(); ++a) s(a, a) -= r[map[a]];
        return psd(s);
    };
    std::function<void(int)> rec = [&](int i) {
        if (i == m) {
            double obj = 0.0;
            for (double x : r) obj += 1.0 - x;
            best = std::min(best, obj);
            return;
        }
        for (int g = 0; g < points; ++g) {
            r[i] = static_cast<double>(g) / (points - 1);
            if (!feasible()) break;
            rec(i + 1);
        }
        r[i] = 0.0;
    };
    rec(0);
    return best;
}

} // namespace oracle
