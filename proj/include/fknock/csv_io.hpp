#pragma once

// Plain CSV readers/writers for curves, coordinates, FPCA output, Theta,
// group-lasso fits, selections and ground truth.

#include "fknock/basis.hpp"
#include "fknock/diagnostics.hpp"
#include "fknock/filter.hpp"
#include "fknock/fpca.hpp"
#include "fknock/grouplasso.hpp"
#include "fknock/knockoff.hpp"
#include "fknock/smoothing.hpp"

#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace fknock::csv {

inline std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::stringstream in(line);
    std::string cell;
    while (std::getline(in, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back(); // getline drops a trailing empty cell
    return out;
}

// Reads rows after a header that must match `expected` (column names).
inline std::vector<std::vector<std::string>> read_table(std::istream& in, const std::vector<std::string>& expected)
{
    std::string line;
    if (!std::getline(in, line) || split(line) != expected) {
        std::string want;
        for (const auto& e : expected) want += (want.empty() ? "" : ",") + e;
        throw ConfigError("CSV header must be: " + want);
    }
    std::vector<std::vector<std::string>> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto f = split(line);
        if (f.size() != expected.size()) {
            throw ConfigError("CSV line " + std::to_string(lineno) + ": expected " +
                              std::to_string(expected.size()) + " fields");
        }
        rows.push_back(std::move(f));
    }
    return rows;
}

inline double to_double(const std::string& s)
{
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != s.size() || s.empty()) throw ConfigError("not a number: '" + s + "'");
    return v;
}

inline int to_int(const std::string& s)
{
    std::size_t pos = 0;
    int v = 0;
    try {
        v = std::stoi(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != s.size() || s.empty()) throw ConfigError("not an integer: '" + s + "'");
    return v;
}

// ---- curves --------------------------------------------------------------------

inline void write_curves(std::ostream& os, const std::vector<RawCurve>& curves)
{
    os << "sample_id,variable_id,t,value\n" << std::setprecision(17);
    for (const auto& c : curves) {
        for (const auto& s : c.samples) {
            os << c.sample_id << ',' << c.variable_id << ',' << s.t << ',' << s.w << '\n';
        }
    }
}

// Curves sampled on a common grid; values[j] is n x grid.
inline void write_grid_curves(std::ostream& os, const std::vector<MatrixXd>& values, const std::vector<double>& grid)
{
    os << "sample_id,variable_id,t,value\n" << std::setprecision(17);
    const int p = static_cast<int>(values.size());
    const int n = p > 0 ? static_cast<int>(values[0].rows()) : 0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) {
            for (std::size_t g = 0; g < grid.size(); ++g) {
                os << i << ',' << j << ',' << grid[g] << ',' << values[j](i, static_cast<Eigen::Index>(g)) << '\n';
            }
        }
    }
}

// Long-format curves grouped by (sample, variable). Ids must be 0..n-1 and
// 0..p-1 with every pair present.
inline std::vector<RawCurve> read_curves(std::istream& in, int* n_out = nullptr, int* p_out = nullptr)
{
    std::map<std::pair<int, int>, RawCurve> m;
    int n = 0, p = 0;
    for (const auto& r : read_table(in, {"sample_id", "variable_id", "t", "value"})) {
        const int i = to_int(r[0]), j = to_int(r[1]);
        if (i < 0 || j < 0) throw ConfigError("negative id in curve CSV");
        auto& c = m[{i, j}];
        c.sample_id = i;
        c.variable_id = j;
        c.samples.push_back({to_double(r[2]), to_double(r[3])});
        n = std::max(n, i + 1);
        p = std::max(p, j + 1);
    }
    if (static_cast<long>(m.size()) != static_cast<long>(n) * p) {
        throw ConfigError("curve CSV must contain every (sample_id, variable_id) pair");
    }
    std::vector<RawCurve> out;
    for (auto& [key, c] : m) out.push_back(std::move(c)); // ordered by sample, then variable
    if (n_out) *n_out = n;
    if (p_out) *p_out = p;
    return out;
}

// ---- coordinates -----------------------------------------------------------------

inline void write_coords(std::ostream& os, const std::vector<MatrixXd>& coords)
{
    os << "sample_id,variable_id,coef_index,coef_value\n" << std::setprecision(17);
    const int p = static_cast<int>(coords.size());
    const int n = p > 0 ? static_cast<int>(coords[0].rows()) : 0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) {
            for (Eigen::Index c = 0; c < coords[j].cols(); ++c) {
                os << i << ',' << j << ',' << c << ',' << coords[j](i, c) << '\n';
            }
        }
    }
}

inline std::vector<MatrixXd> read_coords(std::istream& in, int k)
{
    const auto rows = read_table(in, {"sample_id", "variable_id", "coef_index", "coef_value"});
    int n = 0, p = 0;
    for (const auto& r : rows) {
        n = std::max(n, to_int(r[0]) + 1);
        p = std::max(p, to_int(r[1]) + 1);
    }
    std::vector<MatrixXd> out(p, MatrixXd::Constant(n, k, std::numeric_limits<double>::quiet_NaN()));
    for (const auto& r : rows) {
        const int i = to_int(r[0]), j = to_int(r[1]), c = to_int(r[2]);
        if (i < 0 || j < 0 || c < 0 || c >= k) throw ConfigError("coordinate index out of range");
        out[j](i, c) = to_double(r[3]);
    }
    for (const auto& m : out) {
        if (!m.allFinite()) throw ConfigError("coordinate CSV is missing entries");
    }
    return out;
}

// ---- model exports -----------------------------------------------------------------

inline void write_fpca(std::ostream& os, const FpcaModel& f)
{
    os << "variable_id,component,eigenvalue\n" << std::setprecision(17);
    for (int j = 0; j < f.p(); ++j) {
        for (int l = 0; l < f.k(); ++l) {
            os << j << ',' << l << ',' << f.variables[j].eigenvalues[l] << '\n';
        }
    }
}

inline void write_eigenfunctions(std::ostream& os, const FpcaModel& f)
{
    os << "variable_id,component,coef_index,coef_value\n" << std::setprecision(17);
    for (int j = 0; j < f.p(); ++j) {
        const auto& e = f.variables[j].eigenfunctions;
        for (int l = 0; l < f.k(); ++l) {
            for (int c = 0; c < f.k(); ++c) {
                os << j << ',' << l << ',' << c << ',' << e(c, l) << '\n';
            }
        }
    }
}

inline void write_matrix(std::ostream& os, const MatrixXd& m)
{
    os << std::setprecision(17);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            os << (c ? "," : "") << m(r, c);
        }
        os << '\n';
    }
}

inline MatrixXd read_matrix(std::istream& in)
{
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<double> r;
        for (const auto& f : split(line)) r.push_back(to_double(f));
        if (!rows.empty() && r.size() != rows[0].size()) throw ConfigError("ragged matrix CSV");
        rows.push_back(std::move(r));
    }
    MatrixXd m(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    return m;
}

inline void write_theta_meta(std::ostream& os, const ThetaModel& t)
{
    os << "key,value\n" << std::setprecision(17);
    os << "variant," << (t.variant ? to_string(*t.variant) : "unset") << '\n';
    os << "gamma," << t.gamma << '\n';
    os << "slack_min_eig," << t.slack_min_eig << '\n';
    os << "objective," << t.objective << '\n';
    os << "p," << t.p << '\n';
    os << "k," << t.k << '\n';
}

inline void write_fit(std::ostream& os, const GroupLassoFit& fit, bool full = false)
{
    os << std::setprecision(17);
    if (!full) {
        os << "group_id,frobenius_norm,active_flag\n";
        for (std::size_t g = 0; g < fit.blocks.size(); ++g) {
            os << g << ',' << fit.norm(static_cast<int>(g)) << ',' << (fit.active(static_cast<int>(g)) ? 1 : 0) << '\n';
        }
        return;
    }
    os << "group_id,row,col,value\n";
    for (std::size_t g = 0; g < fit.blocks.size(); ++g) {
        const auto& b = fit.blocks[g];
        for (Eigen::Index r = 0; r < b.rows(); ++r) {
            for (Eigen::Index c = 0; c < b.cols(); ++c) {
                os << g << ',' << r << ',' << c << ',' << b(r, c) << '\n';
            }
        }
    }
}

inline void write_selection(std::ostream& os, const VectorXd& w, const SelectionResult& s)
{
    os << "index_or_edge,w_value,selected_flag\n" << std::setprecision(17);
    for (Eigen::Index j = 0; j < w.size(); ++j) {
        const bool sel = std::find(s.selected.begin(), s.selected.end(), static_cast<int>(j)) != s.selected.end();
        os << j << ',' << w[j] << ',' << (sel ? 1 : 0) << '\n';
    }
}

inline void write_graph_selection(std::ostream& os, const MatrixXd& w, const SelectionResult& s)
{
    os << "index_or_edge,w_value,selected_flag\n" << std::setprecision(17);
    for (Eigen::Index j = 0; j < w.rows(); ++j) {
        for (Eigen::Index k = 0; k < w.cols(); ++k) {
            if (j == k) continue;
            const Edge e{static_cast<int>(std::min(j, k)), static_cast<int>(std::max(j, k))};
            const bool sel = std::find(s.edges.begin(), s.edges.end(), e) != s.edges.end();
            os << j << '-' << k << ',' << w(j, k) << ',' << (sel ? 1 : 0) << '\n';
        }
    }
}

inline void write_metrics(std::ostream& os, const SelectionResult& s, const std::string& rule)
{
    os << "q,delta,rule,fdp,power,threshold\n" << std::setprecision(17);
    double t = kInf;
    for (double x : s.thresholds) t = std::min(t, x);
    os << s.q << ',' << s.delta << ',' << rule << ',' << s.metrics.fdp << ',' << s.metrics.power << ',' << t << '\n';
}

inline void write_truth(std::ostream& os, const std::vector<int>& support)
{
    os << "variable_id\n";
    for (int j : support) os << j << '\n';
}

inline void write_truth_edges(std::ostream& os, const std::vector<Edge>& edges)
{
    os << "edge\n";
    for (const auto& [a, b] : edges) os << a << '-' << b << '\n';
}

inline void write_response(std::ostream& os, const VectorXd& y)
{
    os << "sample_id,value\n" << std::setprecision(17);
    for (Eigen::Index i = 0; i < y.size(); ++i) os << i << ',' << y[i] << '\n';
}

inline VectorXd read_response(std::istream& in)
{
    const auto rows = read_table(in, {"sample_id", "value"});
    VectorXd y = VectorXd::Constant(static_cast<Eigen::Index>(rows.size()), std::numeric_limits<double>::quiet_NaN());
    for (const auto& r : rows) {
        const int i = to_int(r[0]);
        if (i < 0 || i >= y.size()) throw ConfigError("response sample_id out of range");
        y[i] = to_double(r[1]);
    }
    if (!y.allFinite()) throw ConfigError("response CSV is missing samples");
    return y;
}

inline std::vector<int> read_truth(std::istream& in)
{
    std::vector<int> out;
    for (const auto& r : read_table(in, {"variable_id"})) out.push_back(to_int(r[0]));
    return out;
}

} // namespace fknock::csv
