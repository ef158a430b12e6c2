// fknock command line: simulate data, build knockoffs, run selection
// experiments and the desk-scale benchmark grid.

#include "fknock/fknock.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

using namespace fknock;
namespace fs = std::filesystem;

namespace {

// Flag values are kept as strings and applied on top of the config file, so
// an explicit flag always wins over the file and the file over defaults.
struct Flags {
    std::map<std::string, std::string> values;
    std::string config;
    bool partial = false;
    CLI::Option* partial_opt = nullptr;

    void add(CLI::App& app)
    {
        app.add_option("--config", config, "key = value file with experiment settings");
        const std::vector<std::pair<std::string, std::string>> opts = {
            {"--model", "model"},   {"--method", "method"},       {"--p", "p"},
            {"--n", "n"},           {"--q", "q"},                 {"--delta", "delta"},
            {"--rule", "rule"},     {"--replicates", "replicates"}, {"--seed", "seed"},
            {"--threads", "threads"}, {"--gamma", "gamma"},       {"--hbar", "hbar"},
            {"--L", "L"},           {"--noise-sd", "noise_sd"},   {"--out", "out"},
            {"--rho", "rho"},       {"--fraction", "fraction"},   {"--scaling", "scaling"},
            {"--lambda-grid", "lambda_grid"}, {"--support", "support"},
        };
        for (const auto& [flag, key] : opts) {
            app.add_option(flag, values[key], key);
        }
        partial_opt = app.add_flag("--partial", partial, "noisy partial observation with pre-smoothing");
    }

    ExperimentSpec spec(CLI::App& app, std::optional<Model> model = std::nullopt) const
    {
        ExperimentSpec s;
        s.out = "out";
        if (!config.empty()) load_config(s, config);
        for (const auto& [key, value] : values) {
            const std::string flag = key == "noise_sd" ? "--noise-sd" : key == "lambda_grid" ? "--lambda-grid" : "--" + key;
            if (app.count(flag) > 0) apply_setting(s, key, value);
        }
        if (partial_opt->count() > 0) s.partial = partial;
        if (model) s.sim.model = *model;
        s.validate();
        return s;
    }
};

fs::path prepare_out(const ExperimentSpec& s)
{
    const fs::path dir(s.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!fs::is_directory(dir)) throw ConfigError("cannot create output directory " + s.out);
    return dir;
}

std::ofstream open_out(const fs::path& path)
{
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write " + path.string());
    return f;
}

void print_warnings(const std::vector<std::string>& w)
{
    for (const auto& m : w) std::cerr << "warning: " << m << '\n';
}

void print_summary(const std::vector<ReportBlock>& blocks)
{
    std::cout << summary_header() << '\n';
    for (const auto& b : blocks) {
        if (b.summary) std::cout << format_summary(*b.summary) << '\n';
        int failed = 0;
        for (const auto& r : b.results) failed += r.ok ? 0 : 1;
        if (failed > 0) std::cerr << failed << " replicate(s) failed, see details.csv\n";
    }
}

ReportBlock run_block(const ExperimentSpec& s)
{
    ReportBlock b{s, run_pipeline(s), std::nullopt};
    bool any = false;
    for (const auto& r : b.results) any = any || r.ok;
    if (any) b.summary = aggregate(s, b.results);
    return b;
}

// ---- subcommands -----------------------------------------------------------------

int cmd_simulate(const ExperimentSpec& s)
{
    const fs::path dir = prepare_out(s);
    SimConfig c = s.sim;
    c.seed = replicate_seed(s.sim.seed, 0);
    const SimData data = generate(c);
    const auto grid = equispaced_grid(c.grid_points);
    Diagnostics diag;

    auto curves = open_out(dir / "curves.csv");
    if (s.partial) {
        csv::write_curves(curves, corrupt_partial(data.theta, data.fourier, s.L, s.noise_sd, c.seed));
    } else {
        std::vector<MatrixXd> vals;
        for (const auto& t : data.theta) vals.push_back(values_on_grid(t, data.fourier, grid));
        csv::write_grid_curves(curves, vals, grid);
    }
    const BasisSystem basis = make_bspline_basis(s.k_interior, s.degree, {}, 201);
    auto coords = open_out(dir / "coords.csv");
    csv::write_coords(coords, to_bspline(data.theta, data.fourier, basis, s, c.seed, s.partial, &diag));

    if (c.model == Model::SFLR) {
        auto y = open_out(dir / "response.csv");
        csv::write_response(y, data.y);
    } else if (c.model == Model::FFLR) {
        auto y = open_out(dir / "response_curves.csv");
        csv::write_grid_curves(y, {values_on_grid(data.y_coords, data.fourier, grid)}, grid);
    }
    auto truth = open_out(dir / "truth.csv");
    if (c.model == Model::FGGM) {
        csv::write_truth_edges(truth, data.edges);
    } else {
        csv::write_truth(truth, data.support);
    }
    print_warnings(diag.warnings);
    std::cout << "wrote simulated " << to_string(c.model) << " data (n=" << c.n << ", p=" << c.p << ") to " << s.out
              << '\n';
    return 0;
}

// Panel from --curves when given, otherwise replicate 0 of the simulation.
CurvePanel load_or_simulate(const ExperimentSpec& s, const std::string& curves_path, SimData* data,
                            Diagnostics* diag)
{
    const BasisSystem basis = make_bspline_basis(s.k_interior, s.degree, {}, 201);
    if (!curves_path.empty()) {
        std::ifstream in(curves_path);
        if (!in) throw ConfigError("cannot open " + curves_path);
        int n = 0, p = 0;
        const auto raws = csv::read_curves(in, &n, &p);
        return CurvePanel{basis, panel_from_raw(raws, n, p, basis, s, s.partial, diag)};
    }
    SimConfig c = s.sim;
    c.seed = replicate_seed(s.sim.seed, 0);
    *data = generate(c);
    return CurvePanel{basis, to_bspline(data->theta, data->fourier, basis, s, c.seed, s.partial, diag)};
}

int cmd_knockoffs(const ExperimentSpec& s, const std::string& curves_path)
{
    if (s.method == Method::GL) throw ConfigError("knockoffs needs method KF1, KF2 or KF3");
    const fs::path dir = prepare_out(s);
    Diagnostics diag;
    SimData data;
    const CurvePanel panel = load_or_simulate(s, curves_path, &data, &diag);
    const FpcaModel fpca = fit_fpca(panel, s.fraction, &diag);
    ThetaModel theta = estimate_theta_c(fpca, s.gamma, &diag);
    theta = solve_R(std::move(theta), variant_of(s.method), {}, &diag);
    const std::uint64_t seed = derive_seed(replicate_seed(s.sim.seed, 0), 6);
    const KnockoffPanel ko = sample_knockoffs(fpca, theta, seed, &diag);

    auto f1 = open_out(dir / "fpca.csv");
    csv::write_fpca(f1, fpca);
    auto f2 = open_out(dir / "eigenfunctions.csv");
    csv::write_eigenfunctions(f2, fpca);
    auto f3 = open_out(dir / "theta_c.csv");
    csv::write_matrix(f3, theta.theta_c);
    auto f4 = open_out(dir / "theta_r.csv");
    csv::write_matrix(f4, theta.theta_r.transpose());
    auto f5 = open_out(dir / "theta_meta.csv");
    csv::write_theta_meta(f5, theta);
    auto f6 = open_out(dir / "knockoff_coords.csv");
    csv::write_coords(f6, ko.curves.coords);
    print_warnings(diag.warnings);
    std::cout << "variant " << to_string(*theta.variant) << ", gamma " << theta.gamma << ", slack min eigenvalue "
              << theta.slack_min_eig << '\n';
    return 0;
}

int cmd_select_loaded(const ExperimentSpec& s, const std::string& curves_path, const std::string& response_path,
                      const std::string& truth_path)
{
    const fs::path dir = prepare_out(s);
    Diagnostics diag;
    SimData unused;
    const CurvePanel panel = load_or_simulate(s, curves_path, &unused, &diag);
    std::ifstream yin(response_path);
    if (!yin) throw ConfigError("cannot open " + response_path);
    const VectorXd y = csv::read_response(yin);
    RegressionOutcome o = select_on_panel(panel, y, s, derive_seed(s.sim.seed, 0), &diag);
    if (!truth_path.empty()) {
        std::ifstream tin(truth_path);
        if (!tin) throw ConfigError("cannot open " + truth_path);
        o.selection.metrics = evaluate_metrics(o.selection.selected, csv::read_truth(tin));
    }
    auto sel = open_out(dir / "selection.csv");
    csv::write_selection(sel, o.w, o.selection);
    auto met = open_out(dir / "metrics.csv");
    csv::write_metrics(met, o.selection, "-");
    print_warnings(diag.warnings);
    std::cout << "selected " << o.selection.selected.size() << " of " << panel.p() << " variables\n";
    return 0;
}

int cmd_run(const ExperimentSpec& s)
{
    const fs::path dir = prepare_out(s);
    const ReportBlock b = run_block(s);
    emit_report({b}, s.out);
    if (s.replicates == 1 && b.results[0].ok) {
        const auto& r = b.results[0];
        auto sel = open_out(dir / "selection.csv");
        if (s.sim.model == Model::FGGM) {
            csv::write_graph_selection(sel, r.w_graph, r.selection);
        } else {
            csv::write_selection(sel, r.w, r.selection);
        }
        auto met = open_out(dir / "metrics.csv");
        csv::write_metrics(met, r.selection, s.sim.model == Model::FGGM ? to_string(s.rule) : "-");
    }
    print_summary({b});
    if (!b.summary) throw NumericalError("every replicate failed: " + b.results[0].error);
    return 0;
}

int cmd_bench(ExperimentSpec s, const std::vector<std::string>& cells, int graph_replicates, bool with_graph)
{
    std::vector<std::pair<int, int>> grid;
    for (const auto& c : cells) {
        const auto x = c.find('x');
        if (x == std::string::npos) throw ConfigError("cell must look like PxN, got '" + c + "'");
        grid.emplace_back(csv::to_int(c.substr(0, x)), csv::to_int(c.substr(x + 1)));
    }
    std::vector<ReportBlock> blocks;
    for (const auto& [p, n] : grid) {
        for (Model m : {Model::SFLR, Model::FFLR}) {
            for (Method meth : {Method::KF1, Method::GL}) {
                ExperimentSpec e = s;
                e.sim.model = m;
                e.sim.p = p;
                e.sim.n = n;
                e.method = meth;
                e.validate();
                std::cerr << "bench: " << to_string(m) << ' ' << to_string(meth) << " p=" << p << " n=" << n << '\n';
                blocks.push_back(run_block(e));
            }
        }
        if (with_graph) {
            ExperimentSpec e = s;
            e.sim.model = Model::FGGM;
            e.sim.p = p;
            e.sim.n = n;
            e.method = Method::KF1;
            e.replicates = graph_replicates;
            e.validate();
            std::cerr << "bench: FGGM KF1 p=" << p << " n=" << n << '\n';
            blocks.push_back(run_block(e));
        }
    }
    prepare_out(s);
    emit_report(blocks, s.out);
    print_summary(blocks);
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"functional knockoff selection"};
    app.require_subcommand(1);

    Flags f_sim, f_ko, f_sel, f_graph, f_bench;
    auto* sim = app.add_subcommand("simulate", "write one simulated data set as CSV");
    f_sim.add(*sim);

    std::string ko_curves;
    auto* ko = app.add_subcommand("knockoffs", "FPCA, correlation SDP and knockoff curves for one data set");
    f_ko.add(*ko);
    ko->add_option("--curves", ko_curves, "long-format curve CSV (default: simulate)");

    std::string sel_curves, sel_response, sel_truth;
    auto* sel = app.add_subcommand("select", "regression selection (SFLR/FFLR) over replicates, or on loaded data");
    f_sel.add(*sel);
    sel->add_option("--curves", sel_curves, "long-format curve CSV");
    sel->add_option("--response", sel_response, "scalar response CSV (sample_id,value)");
    sel->add_option("--truth", sel_truth, "true variable ids, for metrics");

    auto* graph = app.add_subcommand("fggm", "graphical model selection over replicates");
    f_graph.add(*graph);

    std::vector<std::string> cells{"50x100"};
    int graph_reps = 25;
    bool no_graph = false;
    auto* bench = app.add_subcommand("bench", "desk-scale grid: SFLR/FFLR with KF1 and GL, FGGM with KF1");
    f_bench.add(*bench);
    bench->add_option("--cells", cells, "grid cells as PxN");
    bench->add_option("--graph-replicates", graph_reps, "replicates for FGGM cells");
    bench->add_flag("--no-graph", no_graph, "skip FGGM cells");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*sim) return cmd_simulate(f_sim.spec(*sim));
        if (*ko) return cmd_knockoffs(f_ko.spec(*ko), ko_curves);
        if (*sel) {
            ExperimentSpec s = f_sel.spec(*sel);
            if (!sel_curves.empty() || !sel_response.empty()) {
                if (sel_curves.empty() || sel_response.empty()) {
                    throw ConfigError("--curves and --response must be given together");
                }
                return cmd_select_loaded(s, sel_curves, sel_response, sel_truth);
            }
            if (s.sim.model == Model::FGGM) throw ConfigError("use the fggm subcommand for graphical models");
            return cmd_run(s);
        }
        if (*graph) {
            return cmd_run(f_graph.spec(*graph, Model::FGGM));
        }
        if (*bench) {
            ExperimentSpec s = f_bench.spec(*bench);
            if (bench->count("--replicates") == 0 && f_bench.config.empty()) s.replicates = 50;
            return cmd_bench(s, cells, graph_reps, !no_graph);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
