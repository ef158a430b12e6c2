#pragma once

// Knockoff statistics, data-dependent thresholds and selection, global
// thresholds for graph estimation under the AND/OR rules, and FDP/power.

#include "fknock/diagnostics.hpp"
#include "fknock/grouplasso.hpp"
#include "fknock/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace fknock {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

using Edge = std::pair<int, int>; // unordered, stored with first < second

enum class Rule { AND, OR };

inline std::string to_string(Rule r) { return r == Rule::AND ? "and" : "or"; }

// W_j = |B_j| - |B_{j+p}| for a fit on [originals | knockoffs].
inline VectorXd knockoff_stats(const GroupLassoFit& fit, int p)
{
    if (static_cast<int>(fit.blocks.size()) != 2 * p) {
        throw ConfigError("knockoff_stats: fit must have 2p groups");
    }
    VectorXd w(p);
    for (int j = 0; j < p; ++j) {
        w[j] = fit.norm(j) - fit.norm(j + p);
    }
    return w;
}

// Sorted distinct nonzero magnitudes of w.
inline std::vector<double> threshold_candidates(const VectorXd& w)
{
    std::vector<double> c;
    for (Eigen::Index j = 0; j < w.size(); ++j) {
        if (std::abs(w[j]) > 0.0) {
            c.push_back(std::abs(w[j]));
        }
    }
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    return c;
}

inline double knockoff_threshold(const VectorXd& w, double q, int delta)
{
    if (!(q >= 0.0 && q <= 1.0)) {
        throw ConfigError("knockoff_threshold: q must lie in [0, 1]");
    }
    if (delta != 0 && delta != 1) {
        throw ConfigError("knockoff_threshold: delta must be 0 or 1");
    }
    for (double t : threshold_candidates(w)) {
        int neg = 0, pos = 0;
        for (Eigen::Index j = 0; j < w.size(); ++j) {
            neg += w[j] <= -t;
            pos += w[j] >= t;
        }
        if (pos == 0) {
            continue;
        }
        if (delta + neg <= q * pos) {
            return t;
        }
    }
    return kInf;
}

inline std::vector<int> select(const VectorXd& w, double threshold)
{
    std::vector<int> out;
    if (std::isinf(threshold)) {
        return out;
    }
    for (Eigen::Index j = 0; j < w.size(); ++j) {
        if (w[j] >= threshold) {
            out.push_back(static_cast<int>(j));
        }
    }
    return out;
}

// ---- graph thresholds -------------------------------------------------------

struct GlobalThresholdOptions {
    double q = 0.2;
    Rule rule = Rule::OR;
    int delta = 0;
    double a = 1.0;
    double c_a = 1.93;
};

inline std::vector<Edge> fggm_edges(const std::vector<double>& thresholds, const MatrixXd& w, Rule rule)
{
    const int p = static_cast<int>(w.rows());
    std::vector<Edge> edges;
    for (int j = 0; j < p; ++j) {
        for (int k = j + 1; k < p; ++k) {
            const bool jk = w(j, k) >= thresholds[j];
            const bool kj = w(k, j) >= thresholds[k];
            if (rule == Rule::AND ? (jk && kj) : (jk || kj)) {
                edges.emplace_back(j, k);
            }
        }
    }
    return edges;
}

// Per-node candidates {|W_jk| : k != j, W_jk != 0} ascending, followed by +inf.
inline std::vector<std::vector<double>> node_candidates(const MatrixXd& w)
{
    const int p = static_cast<int>(w.rows());
    std::vector<std::vector<double>> out(p);
    for (int j = 0; j < p; ++j) {
        VectorXd row(p - 1);
        for (int k = 0, c = 0; k < p; ++k) {
            if (k != j) {
                row[c++] = w(j, k);
            }
        }
        out[j] = threshold_candidates(row);
        out[j].push_back(kInf);
    }
    return out;
}

// Constraint slack per node: bound * max(|E|, 1) - (a delta + |S^-_j|).
// Nonnegative entries are feasible.
inline std::vector<double> fggm_constraint_slack(const std::vector<double>& thresholds, const MatrixXd& w,
                                                 const GlobalThresholdOptions& opt)
{
    const int p = static_cast<int>(w.rows());
    const double bound = (opt.rule == Rule::AND ? 2.0 : 1.0) * opt.q / (opt.c_a * p);
    const double edges = std::max<double>(static_cast<double>(fggm_edges(thresholds, w, opt.rule).size()), 1.0);
    std::vector<double> slack(p);
    for (int j = 0; j < p; ++j) {
        int neg = 0;
        if (!std::isinf(thresholds[j])) {
            for (int k = 0; k < p; ++k) {
                neg += k != j && w(j, k) <= -thresholds[j];
            }
        }
        slack[j] = bound * edges - (opt.a * opt.delta + neg);
    }
    return slack;
}

inline bool fggm_feasible(const std::vector<double>& thresholds, const MatrixXd& w,
                          const GlobalThresholdOptions& opt)
{
    const auto s = fggm_constraint_slack(thresholds, w, opt);
    return std::all_of(s.begin(), s.end(), [](double v) { return v >= -1e-12; });
}

inline void check_graph_stats(const MatrixXd& w, const GlobalThresholdOptions& opt)
{
    if (w.rows() != w.cols() || w.rows() < 2) {
        throw ConfigError("graph statistics must be a square matrix with p >= 2");
    }
    if (!(opt.a > 0.0 && opt.c_a > 0.0)) {
        throw ConfigError("global thresholds need a > 0 and c_a > 0");
    }
    if (opt.delta != 0 && opt.delta != 1) {
        throw ConfigError("delta must be 0 or 1");
    }
}

// Monotone relaxation: start every node at its smallest candidate and raise
// the most violating node (lowest index on ties) one candidate at a time.
inline std::vector<double> fggm_relaxation_thresholds(const MatrixXd& w, const GlobalThresholdOptions& opt)
{
    check_graph_stats(w, opt);
    const int p = static_cast<int>(w.rows());
    const auto cand = node_candidates(w);
    std::vector<std::size_t> pos(p, 0);
    std::vector<double> t(p);
    for (int j = 0; j < p; ++j) {
        t[j] = cand[j][0];
    }
    for (;;) {
        const auto slack = fggm_constraint_slack(t, w, opt);
        int worst = -1;
        for (int j = 0; j < p; ++j) {
            if (slack[j] < -1e-12 && pos[j] + 1 < cand[j].size() && (worst < 0 || slack[j] < slack[worst])) {
                worst = j;
            }
        }
        if (worst < 0) {
            if (std::all_of(slack.begin(), slack.end(), [](double v) { return v >= -1e-12; })) {
                return t;
            }
            return std::vector<double>(p, kInf); // violations left that no raise can fix
        }
        t[worst] = cand[worst][++pos[worst]];
    }
}

// Exhaustive search over the candidate product; maximal edge count among
// feasible vectors, first found in lexicographic candidate order on ties.
inline std::vector<double> fggm_exhaustive_thresholds(const MatrixXd& w, const GlobalThresholdOptions& opt)
{
    check_graph_stats(w, opt);
    const int p = static_cast<int>(w.rows());
    const auto cand = node_candidates(w);
    std::vector<std::size_t> idx(p, 0);
    std::vector<double> best(p, kInf);
    long best_edges = -1;
    std::vector<double> t(p);
    for (;;) {
        for (int j = 0; j < p; ++j) {
            t[j] = cand[j][idx[j]];
        }
        if (fggm_feasible(t, w, opt)) {
            const long e = static_cast<long>(fggm_edges(t, w, opt.rule).size());
            if (e > best_edges) {
                best_edges = e;
                best = t;
            }
        }
        int j = p - 1;
        while (j >= 0 && ++idx[j] == cand[j].size()) {
            idx[j] = 0;
            --j;
        }
        if (j < 0) {
            break;
        }
    }
    return best;
}

// Global per-node thresholds; exhaustive at p <= 4, relaxation search otherwise.
inline std::vector<double> fggm_global_thresholds(const MatrixXd& w, const GlobalThresholdOptions& opt)
{
    return w.rows() <= 4 ? fggm_exhaustive_thresholds(w, opt) : fggm_relaxation_thresholds(w, opt);
}

// Node-local thresholds at level q/p. Debugging aid only.
inline std::vector<double> fggm_local_thresholds(const MatrixXd& w, double q, int delta)
{
    const int p = static_cast<int>(w.rows());
    std::vector<double> t(p);
    for (int j = 0; j < p; ++j) {
        VectorXd row(p - 1);
        for (int k = 0, c = 0; k < p; ++k) {
            if (k != j) {
                row[c++] = w(j, k);
            }
        }
        t[j] = knockoff_threshold(row, q / p, delta);
    }
    return t;
}

// ---- metrics -----------------------------------------------------------------

struct Metrics {
    double fdp = 0.0;
    double power = 0.0;
};

template <class T>
Metrics evaluate_metrics(const std::vector<T>& selected, const std::vector<T>& truth)
{
    const std::set<T> sel(selected.begin(), selected.end());
    const std::set<T> tru(truth.begin(), truth.end());
    std::size_t hit = 0;
    for (const auto& s : sel) {
        hit += tru.count(s);
    }
    Metrics m;
    m.fdp = static_cast<double>(sel.size() - hit) / std::max<double>(static_cast<double>(sel.size()), 1.0);
    m.power = static_cast<double>(hit) / std::max<double>(static_cast<double>(tru.size()), 1.0);
    return m;
}

struct SelectionResult {
    std::vector<double> thresholds; // one entry for regression, p entries for graphs
    int delta = 0;
    double q = 0.2;
    std::vector<int> selected;
    std::vector<Edge> edges;
    bool feasible = true;           // graph constraint re-evaluated at the thresholds
    Metrics metrics;
};

} // namespace fknock
