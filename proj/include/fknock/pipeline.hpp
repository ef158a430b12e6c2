#pragma once

// End-to-end experiments: simulate, (optionally) pre-smooth, project onto
// B-splines, FPCA, knockoffs, group lasso, filter, metrics; replicate loops
// on a worker pool, aggregation and CSV reports.

#include "fknock/basis.hpp"
#include "fknock/diagnostics.hpp"
#include "fknock/filter.hpp"
#include "fknock/fpca.hpp"
#include "fknock/grouplasso.hpp"
#include "fknock/knockoff.hpp"
#include "fknock/rng.hpp"
#include "fknock/simgen.hpp"
#include "fknock/smoothing.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace fknock {

enum class Method { KF1, KF2, KF3, GL };

inline std::string to_string(Method m)
{
    switch (m) {
    case Method::KF1: return "KF1";
    case Method::KF2: return "KF2";
    case Method::KF3: return "KF3";
    case Method::GL: return "GL";
    }
    return "?";
}

inline Method parse_method(const std::string& s)
{
    std::string t = s;
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::toupper(c); });
    if (t == "KF1") return Method::KF1;
    if (t == "KF2") return Method::KF2;
    if (t == "KF3") return Method::KF3;
    if (t == "GL") return Method::GL;
    throw ConfigError("unknown method '" + s + "' (KF1, KF2, KF3, GL)");
}

inline Rule parse_rule(const std::string& s)
{
    std::string t = s;
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "and") return Rule::AND;
    if (t == "or") return Rule::OR;
    throw ConfigError("unknown rule '" + s + "' (and, or)");
}

inline RVariant variant_of(Method m)
{
    switch (m) {
    case Method::KF1: return RVariant::E1;
    case Method::KF2: return RVariant::E2;
    case Method::KF3: return RVariant::E3;
    case Method::GL: break;
    }
    throw ConfigError("GL has no knockoff variant");
}

// How score groups are scaled before the group lasso: not at all, one factor
// per group (unit mean-square group), or every component to unit variance.
enum class Scaling { none, group, component };

inline std::string to_string(Scaling s)
{
    return s == Scaling::none ? "none" : s == Scaling::group ? "group" : "component";
}

inline Scaling parse_scaling(const std::string& v)
{
    if (v == "none") return Scaling::none;
    if (v == "group") return Scaling::group;
    if (v == "component") return Scaling::component;
    throw ConfigError("unknown scaling '" + v + "' (none, group, component)");
}

struct ExperimentSpec {
    SimConfig sim;
    Method method = Method::KF1;
    double q = 0.2;
    int delta = 0;
    Rule rule = Rule::OR;
    int replicates = 1;
    double fraction = 0.9;
    std::optional<double> hbar; // HBIC constant; per-model default when unset
    std::optional<double> gamma;
    int lambda_grid = 30;
    double lambda_ratio = 100.0;
    double a = 1.0;
    double c_a = 1.93;
    int k_interior = 3;
    int degree = 3;
    bool partial = false;
    int L = 51;
    double noise_sd = 0.5;
    double bandwidth_c = 0.5;
    int smooth_grid = 101;
    int threads = 1;
    Scaling scaling = Scaling::component;
    std::string out;

    // Multi-column responses inflate the HBIC degrees of freedom by d~, so the
    // defaults shrink with the response dimension (desk-calibrated).
    double effective_hbar() const
    {
        if (hbar) return *hbar;
        switch (sim.model) {
        case Model::SFLR: return 0.3;
        case Model::FFLR: return 0.5;
        case Model::FGGM: return 0.15;
        }
        return 1.0;
    }

    TuneOptions tune_options() const
    {
        TuneOptions t;
        t.grid_size = lambda_grid;
        t.hbar = effective_hbar();
        t.ratio = lambda_ratio;
        return t;
    }

    void validate() const
    {
        sim.validate();
        if (replicates < 1) throw ConfigError("replicates must be >= 1");
        if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("q must lie in [0, 1]");
        if (delta != 0 && delta != 1) throw ConfigError("delta must be 0 or 1");
        if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("fraction must lie in (0, 1]");
        if (hbar && !(*hbar >= 0.1 && *hbar <= 3.0)) throw ConfigError("hbar must lie in [0.1, 3]");
        if (gamma && !(*gamma >= 0.0 && *gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
        if (lambda_grid < 2) throw ConfigError("lambda_grid must be >= 2");
        if (!(a > 0.0 && c_a > 0.0)) throw ConfigError("a and c_a must be positive");
        if (threads < 1) throw ConfigError("threads must be >= 1");
        if (partial && (L < 2 || !(noise_sd >= 0.0))) throw ConfigError("partial observation needs L >= 2, noise_sd >= 0");
        if (!(bandwidth_c > 0.0)) throw ConfigError("bandwidth_c must be positive");
    }
};

inline bool parse_bool(const std::string& v)
{
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw ConfigError("not a boolean: '" + v + "'");
}

// Applies one `key = value` setting; keys follow the field names.
inline void apply_setting(ExperimentSpec& s, const std::string& key, const std::string& value)
{
    auto num = [&](auto& field) {
        std::istringstream in(value);
        in >> field;
        if (in.fail() || !(in >> std::ws).eof()) {
            throw ConfigError("bad value for '" + key + "': '" + value + "'");
        }
    };
    if (key == "model") s.sim.model = parse_model(value);
    else if (key == "method") s.method = parse_method(value);
    else if (key == "rule") s.rule = parse_rule(value);
    else if (key == "n") num(s.sim.n);
    else if (key == "p") num(s.sim.p);
    else if (key == "rho") num(s.sim.rho);
    else if (key == "support") num(s.sim.support);
    else if (key == "c_lo") num(s.sim.c_lo);
    else if (key == "c_hi") num(s.sim.c_hi);
    else if (key == "null") s.sim.null_signal = parse_bool(value);
    else if (key == "grid_points") num(s.sim.grid_points);
    else if (key == "seed") num(s.sim.seed);
    else if (key == "q") num(s.q);
    else if (key == "delta") num(s.delta);
    else if (key == "replicates") num(s.replicates);
    else if (key == "fraction") num(s.fraction);
    else if (key == "hbar") { double h; num(h); s.hbar = h; }
    else if (key == "gamma") { double g; num(g); s.gamma = g; }
    else if (key == "lambda_grid") num(s.lambda_grid);
    else if (key == "a") num(s.a);
    else if (key == "c_a") num(s.c_a);
    else if (key == "k_interior") num(s.k_interior);
    else if (key == "degree") num(s.degree);
    else if (key == "partial") s.partial = parse_bool(value);
    else if (key == "L") num(s.L);
    else if (key == "noise_sd") num(s.noise_sd);
    else if (key == "bandwidth_c") num(s.bandwidth_c);
    else if (key == "threads") num(s.threads);
    else if (key == "scaling") s.scaling = parse_scaling(value);
    else if (key == "out") s.out = value;
    else throw ConfigError("unknown config key '" + key + "'");
}

// Flat `key = value` file; '#' starts a comment.
inline void load_config(ExperimentSpec& s, const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path);
    }
    std::string line;
    int lineno = 0;
    auto trim = [](std::string x) {
        const auto b = x.find_first_not_of(" \t\r");
        const auto e = x.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : x.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        }
        apply_setting(s, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

// ---- stages ---------------------------------------------------------------------

// B-spline coordinates of curves given by Fourier coordinates, either from a
// dense grid or from noisy partial samples pre-smoothed onto a grid.
inline std::vector<MatrixXd> to_bspline(const std::vector<MatrixXd>& fourier_coords, const BasisSystem& fourier,
                                        const BasisSystem& target, const ExperimentSpec& spec, std::uint64_t seed,
                                        bool partial, Diagnostics* diag)
{
    std::vector<MatrixXd> out(fourier_coords.size());
    if (!partial) {
        const auto grid = equispaced_grid(spec.sim.grid_points);
        const GridProjector proj(target, grid);
        for (std::size_t j = 0; j < fourier_coords.size(); ++j) {
            out[j] = proj.project(values_on_grid(fourier_coords[j], fourier, grid));
        }
        return out;
    }
    const auto grid = equispaced_grid(spec.smooth_grid);
    const GridProjector proj(target, grid);
    const auto raws = corrupt_partial(fourier_coords, fourier, spec.L, spec.noise_sd, seed);
    const int p = static_cast<int>(fourier_coords.size());
    const int n = p > 0 ? static_cast<int>(fourier_coords[0].rows()) : 0;
    const double h = default_bandwidth(spec.L, spec.bandwidth_c);
    for (int j = 0; j < p; ++j) {
        MatrixXd vals(n, static_cast<Eigen::Index>(grid.size()));
        for (int i = 0; i < n; ++i) {
            const auto sm = local_linear_smooth(raws[static_cast<std::size_t>(i) * p + j], grid, h, diag);
            vals.row(i) = Eigen::Map<const VectorXd>(sm.data(), static_cast<Eigen::Index>(sm.size())).transpose();
        }
        out[j] = proj.project(vals);
    }
    return out;
}

inline MatrixXd centered(const MatrixXd& m) { return m.rowwise() - m.colwise().mean(); }

// Original (and optionally knockoff) score blocks truncated to d_j columns.
struct ScoreBlocks {
    std::vector<MatrixXd> raw;      // unscaled original scores (graph responses)
    std::vector<MatrixXd> original; // scaled design blocks
    std::vector<MatrixXd> knockoff; // same scaling as `original`; empty for the baseline
    double gamma = std::numeric_limits<double>::quiet_NaN();
    double objective = std::numeric_limits<double>::quiet_NaN();
};

// Column scale factors for variable j under the chosen scaling. Knockoff
// blocks reuse the factors of their originals so swaps stay exchangeable.
inline VectorXd score_scales(const VariableFpca& v, Scaling scaling)
{
    const int d = v.truncation;
    VectorXd s = VectorXd::Ones(d);
    if (scaling == Scaling::none) {
        return s;
    }
    const double total = v.eigenvalues.head(d).sum();
    for (int l = 0; l < d; ++l) {
        const double w = scaling == Scaling::group ? total : v.eigenvalues[l];
        s[l] = w > 0.0 ? 1.0 / std::sqrt(w) : 0.0;
    }
    return s;
}

inline ScoreBlocks build_score_blocks(const FpcaModel& fpca, const ExperimentSpec& spec, std::uint64_t seed,
                                      Diagnostics* diag)
{
    ScoreBlocks sb;
    const int p = fpca.p(), k = fpca.k();
    std::vector<VectorXd> scales;
    for (int j = 0; j < p; ++j) {
        const auto& v = fpca.variables[j];
        scales.push_back(score_scales(v, spec.scaling));
        sb.raw.push_back(centered(v.scores.leftCols(v.truncation)));
        sb.original.push_back(sb.raw.back() * scales.back().asDiagonal());
    }
    if (spec.method == Method::GL) {
        return sb;
    }
    ThetaModel theta = estimate_theta_c(fpca, spec.gamma, diag);
    theta = solve_R(std::move(theta), variant_of(spec.method), {}, diag);
    sb.gamma = theta.gamma;
    sb.objective = theta.objective;
    const KnockoffPanel ko = sample_knockoffs(fpca, theta, derive_seed(seed, 6), diag);
    for (int j = 0; j < p; ++j) {
        const int d = fpca.variables[j].truncation;
        sb.knockoff.push_back(centered(ko.scores.middleCols(static_cast<Eigen::Index>(j) * k, d)) *
                              scales[j].asDiagonal());
    }
    return sb;
}

struct RegressionOutcome {
    SelectionResult selection;
    VectorXd w;           // knockoff statistics (or group norms for the baseline)
    double lambda = 0.0;
    bool converged = true;
};

// Regression selection on a response matrix (n x r, centered inside).
inline RegressionOutcome select_regression(const ScoreBlocks& sb, const MatrixXd& response,
                                           const ExperimentSpec& spec, Diagnostics* diag)
{
    const int p = static_cast<int>(sb.original.size());
    std::vector<MatrixXd> blocks = sb.original;
    blocks.insert(blocks.end(), sb.knockoff.begin(), sb.knockoff.end());
    const GroupDesign design = make_group_design(blocks, centered(response));
    const TuneResult tuned = tune_lambda(design, spec.tune_options(), diag);

    RegressionOutcome out;
    out.lambda = tuned.lambda;
    out.converged = tuned.all_converged;
    out.selection.q = spec.q;
    out.selection.delta = spec.delta;
    if (sb.knockoff.empty()) {
        out.w = VectorXd(p);
        for (int j = 0; j < p; ++j) {
            out.w[j] = tuned.fit.norm(j);
            if (out.w[j] > 0.0) out.selection.selected.push_back(j);
        }
        out.selection.thresholds = {0.0};
        return out;
    }
    out.w = knockoff_stats(tuned.fit, p);
    const double t = knockoff_threshold(out.w, spec.q, spec.delta);
    out.selection.thresholds = {t};
    out.selection.selected = select(out.w, t);
    return out;
}

struct GraphOutcome {
    SelectionResult selection;
    MatrixXd w;
    bool converged = true;
};

// Nodewise regressions of each node's scores on all other nodes (and their
// knockoffs), then global thresholds and the AND/OR edge rule.
inline GraphOutcome select_graph(const ScoreBlocks& sb, const ExperimentSpec& spec, Diagnostics* diag)
{
    const int p = static_cast<int>(sb.original.size());
    const bool ko = !sb.knockoff.empty();
    GraphOutcome out;
    out.w = MatrixXd::Zero(p, p);
    for (int j = 0; j < p; ++j) {
        std::vector<MatrixXd> blocks;
        for (int k = 0; k < p; ++k) {
            if (k != j) blocks.push_back(sb.original[k]);
        }
        if (ko) {
            for (int k = 0; k < p; ++k) {
                if (k != j) blocks.push_back(sb.knockoff[k]);
            }
        }
        const GroupDesign design = make_group_design(blocks, sb.raw[j]);
        const TuneResult tuned = tune_lambda(design, spec.tune_options(), diag);
        out.converged = out.converged && tuned.all_converged;
        for (int k = 0, g = 0; k < p; ++k) {
            if (k == j) continue;
            out.w(j, k) = tuned.fit.norm(g) - (ko ? tuned.fit.norm(g + p - 1) : 0.0);
            ++g;
        }
    }
    out.selection.q = spec.q;
    out.selection.delta = spec.delta;
    if (!ko) {
        // Baseline: any nonzero block is an edge candidate.
        out.selection.thresholds.assign(p, std::numeric_limits<double>::min());
        out.selection.edges = fggm_edges(out.selection.thresholds, out.w, spec.rule);
        return out;
    }
    GlobalThresholdOptions opt{spec.q, spec.rule, spec.delta, spec.a, spec.c_a};
    out.selection.thresholds = fggm_global_thresholds(out.w, opt);
    out.selection.feasible = fggm_feasible(out.selection.thresholds, out.w, opt);
    out.selection.edges = fggm_edges(out.selection.thresholds, out.w, spec.rule);
    return out;
}

// B-spline coordinates for loaded curves, ordered by (sample, variable).
// With `smooth` each curve is pre-smoothed onto a grid first; otherwise its
// samples are projected by least squares directly.
inline std::vector<MatrixXd> panel_from_raw(const std::vector<RawCurve>& raws, int n, int p,
                                            const BasisSystem& basis, const ExperimentSpec& spec, bool smooth,
                                            Diagnostics* diag)
{
    std::vector<MatrixXd> out(p, MatrixXd(n, basis.size()));
    const auto grid = equispaced_grid(spec.smooth_grid, basis.domain());
    const GridProjector proj(basis, grid);
    for (const auto& c : raws) {
        if (c.sample_id >= n || c.variable_id >= p) throw ConfigError("curve id out of range");
        if (smooth) {
            const int L = static_cast<int>(c.samples.size());
            const auto sm = local_linear_smooth(c, grid, default_bandwidth(L, spec.bandwidth_c), diag);
            const MatrixXd row = Eigen::Map<const VectorXd>(sm.data(), static_cast<Eigen::Index>(sm.size())).transpose();
            out[c.variable_id].row(c.sample_id) = proj.project(row);
        } else {
            out[c.variable_id].row(c.sample_id) = project_curve(c.samples, basis, diag).transpose();
        }
    }
    return out;
}

// Full selection on an observed panel and response (n x r).
inline RegressionOutcome select_on_panel(const CurvePanel& panel, const MatrixXd& response,
                                         const ExperimentSpec& spec, std::uint64_t seed, Diagnostics* diag)
{
    if (response.rows() != panel.n()) throw ConfigError("response rows differ from the number of samples");
    const FpcaModel fpca = fit_fpca(panel, spec.fraction, diag);
    const ScoreBlocks sb = build_score_blocks(fpca, spec, seed, diag);
    return select_regression(sb, response, spec, diag);
}

// ---- replicate loop ---------------------------------------------------------------

struct ReplicateResult {
    int replicate = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    SelectionResult selection;
    VectorXd w;           // regression statistics
    MatrixXd w_graph;     // graph statistics
    std::vector<int> null_indices;
    double gamma = std::numeric_limits<double>::quiet_NaN();
    double lambda = std::numeric_limits<double>::quiet_NaN();
    bool converged = true;
    double seconds = 0.0;
    std::vector<std::string> warnings;
};

inline std::uint64_t replicate_seed(std::uint64_t seed, int replicate)
{
    return derive_seed(seed, static_cast<std::uint64_t>(replicate));
}

inline ReplicateResult run_replicate(const ExperimentSpec& spec, int replicate)
{
    const auto t0 = std::chrono::steady_clock::now();
    ReplicateResult r;
    r.replicate = replicate;
    r.seed = replicate_seed(spec.sim.seed, replicate);
    Diagnostics diag;
    try {
        SimConfig c = spec.sim;
        c.seed = r.seed;
        const SimData data = generate(c);
        const BasisSystem basis = make_bspline_basis(spec.k_interior, spec.degree, {}, 201);
        const CurvePanel panel{basis, to_bspline(data.theta, data.fourier, basis, spec, r.seed, spec.partial, &diag)};
        const FpcaModel fpca = fit_fpca(panel, spec.fraction, &diag);
        const ScoreBlocks sb = build_score_blocks(fpca, spec, r.seed, &diag);
        r.gamma = sb.gamma;

        if (c.model == Model::FGGM) {
            GraphOutcome g = select_graph(sb, spec, &diag);
            r.selection = std::move(g.selection);
            r.w_graph = std::move(g.w);
            r.converged = g.converged;
            r.selection.metrics = evaluate_metrics(r.selection.edges, data.edges);
        } else {
            MatrixXd response;
            if (c.model == Model::SFLR) {
                response = data.y;
            } else {
                // Response curves: same basis projection, then FPC scores up to the 90% rule.
                const std::vector<MatrixXd> yc{data.y_coords};
                const CurvePanel ypanel{basis, to_bspline(yc, data.fourier, basis, spec, r.seed, false, &diag)};
                const FpcaModel yf = fit_fpca(ypanel, spec.fraction, &diag);
                response = yf.variables[0].scores.leftCols(yf.variables[0].truncation);
            }
            RegressionOutcome o = select_regression(sb, response, spec, &diag);
            r.selection = std::move(o.selection);
            r.w = std::move(o.w);
            r.lambda = o.lambda;
            r.converged = o.converged;
            r.selection.metrics = evaluate_metrics(r.selection.selected, data.support);
            for (int j = 0; j < c.p; ++j) {
                if (std::find(data.support.begin(), data.support.end(), j) == data.support.end()) {
                    r.null_indices.push_back(j);
                }
            }
        }
        r.ok = true;
    } catch (const std::exception& e) {
        r.ok = false;
        r.error = e.what();
    }
    r.warnings = std::move(diag.warnings);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

// Runs replicates 0..replicates-1 on `threads` workers; results are indexed
// by replicate so the order never depends on scheduling.
inline std::vector<ReplicateResult> run_pipeline(const ExperimentSpec& spec)
{
    spec.validate();
    // Build the shared covariance factor once before workers start.
    if (spec.sim.model != Model::FGGM) {
        cached_covariance(spec.sim.p, spec.sim.rho, spec.sim.fourier_size);
    }
    std::vector<ReplicateResult> results(spec.replicates);
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int r = next++; r < spec.replicates; r = next++) {
            results[r] = run_replicate(spec, r);
        }
    };
    const int nt = std::min(spec.threads, spec.replicates);
    if (nt <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return results;
}

// ---- aggregation and reports ------------------------------------------------------

struct Summary {
    std::string model;
    std::string method;
    int p = 0;
    int n = 0;
    double q = 0.0;
    int delta = 0;
    std::string rule;
    double fdr = 0.0;
    double power = 0.0;
    double fdr_sd = 0.0;
    double power_sd = 0.0;
    int n_replicates = 0;
    double seconds = 0.0;
};

inline Summary aggregate(const ExperimentSpec& spec, const std::vector<ReplicateResult>& results)
{
    Summary s;
    s.model = to_string(spec.sim.model);
    s.method = to_string(spec.method);
    s.p = spec.sim.p;
    s.n = spec.sim.n;
    s.q = spec.q;
    s.delta = spec.delta;
    s.rule = spec.sim.model == Model::FGGM ? to_string(spec.rule) : "-";
    std::vector<double> f, pw;
    for (const auto& r : results) {
        s.seconds += r.seconds;
        if (r.ok) {
            f.push_back(r.selection.metrics.fdp);
            pw.push_back(r.selection.metrics.power);
        }
    }
    if (f.empty()) {
        throw NumericalError("aggregate: no successful replicates");
    }
    auto mean_sd = [](const std::vector<double>& v, double& mean, double& sd) {
        mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    };
    mean_sd(f, s.fdr, s.fdr_sd);
    mean_sd(pw, s.power, s.power_sd);
    s.n_replicates = static_cast<int>(f.size());
    return s;
}

inline const char* summary_header()
{
    return "model,method,p,n,q,delta,rule,fdr,power,n_replicates,seconds";
}

inline std::string format_summary(const Summary& s)
{
    std::ostringstream o;
    o << std::setprecision(10) << s.model << ',' << s.method << ',' << s.p << ',' << s.n << ',' << s.q << ','
      << s.delta << ',' << s.rule << ',' << s.fdr << ',' << s.power << ',' << s.n_replicates << ','
      << std::setprecision(4) << std::fixed << s.seconds;
    return o.str();
}

inline Summary parse_summary(const std::string& line)
{
    std::vector<std::string> f;
    std::stringstream in(line);
    std::string cell;
    while (std::getline(in, cell, ',')) f.push_back(cell);
    if (f.size() != 11) {
        throw ConfigError("summary line needs 11 fields");
    }
    Summary s;
    s.model = f[0];
    s.method = f[1];
    s.p = std::stoi(f[2]);
    s.n = std::stoi(f[3]);
    s.q = std::stod(f[4]);
    s.delta = std::stoi(f[5]);
    s.rule = f[6];
    s.fdr = std::stod(f[7]);
    s.power = std::stod(f[8]);
    s.n_replicates = std::stoi(f[9]);
    s.seconds = std::stod(f[10]);
    return s;
}

inline const char* details_header()
{
    return "model,method,p,n,q,delta,rule,replicate,seed,status,fdp,power,n_selected,threshold,message";
}

// One row per replicate; contains no timings so reruns are byte-identical.
inline std::string format_detail(const ExperimentSpec& spec, const ReplicateResult& r)
{
    std::ostringstream o;
    o << std::setprecision(10) << to_string(spec.sim.model) << ',' << to_string(spec.method) << ',' << spec.sim.p
      << ',' << spec.sim.n << ',' << spec.q << ',' << spec.delta << ','
      << (spec.sim.model == Model::FGGM ? to_string(spec.rule) : "-") << ',' << r.replicate << ',' << r.seed << ','
      << (r.ok ? "ok" : "error") << ',';
    if (r.ok) {
        const std::size_t nsel =
            spec.sim.model == Model::FGGM ? r.selection.edges.size() : r.selection.selected.size();
        double thr = r.selection.thresholds.empty() ? 0.0 : r.selection.thresholds.front();
        if (spec.sim.model == Model::FGGM && !r.selection.thresholds.empty()) {
            thr = *std::min_element(r.selection.thresholds.begin(), r.selection.thresholds.end());
        }
        o << r.selection.metrics.fdp << ',' << r.selection.metrics.power << ',' << nsel << ',' << thr << ',';
    } else {
        std::string msg = r.error;
        std::replace(msg.begin(), msg.end(), ',', ';');
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        o << ",,,," << msg;
    }
    return o.str();
}

struct ReportBlock {
    ExperimentSpec spec;
    std::vector<ReplicateResult> results;
    std::optional<Summary> summary; // absent when every replicate failed
};

// Writes summary.csv and details.csv into `dir` (created if missing).
inline void emit_report(const std::vector<ReportBlock>& blocks, const std::string& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    std::ofstream sum(std::filesystem::path(dir) / "summary.csv");
    std::ofstream det(std::filesystem::path(dir) / "details.csv");
    if (!sum || !det) {
        throw ConfigError("cannot write report files in " + dir);
    }
    sum << summary_header() << '\n';
    det << details_header() << '\n';
    for (const auto& b : blocks) {
        if (b.summary) sum << format_summary(*b.summary) << '\n';
        for (const auto& r : b.results) det << format_detail(b.spec, r) << '\n';
    }
}

} // namespace fknock
