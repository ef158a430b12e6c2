#pragma once

// Simulation designs: Fourier-coefficient Gaussian curves with a
// block covariance, scalar and functional responses, DAG-based graphs, and
// partial observation with noise.

#include "fknock/basis.hpp"
#include "fknock/diagnostics.hpp"
#include "fknock/filter.hpp"
#include "fknock/linalg.hpp"
#include "fknock/rng.hpp"
#include "fknock/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace fknock {

enum class Model { SFLR, FFLR, FGGM };

inline std::string to_string(Model m)
{
    switch (m) {
    case Model::SFLR: return "sflr";
    case Model::FFLR: return "fflr";
    case Model::FGGM: return "fggm";
    }
    return "?";
}

inline Model parse_model(const std::string& s)
{
    std::string t = s;
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "sflr") return Model::SFLR;
    if (t == "fflr") return Model::FFLR;
    if (t == "fggm") return Model::FGGM;
    throw ConfigError("unknown model '" + s + "' (sflr, fflr, fggm)");
}

struct SimConfig {
    Model model = Model::SFLR;
    int n = 100;
    int p = 50;
    double rho = 0.5;
    int support = 10;        // |S| for the regressions
    double c_lo = 4.0;
    double c_hi = 6.0;
    bool null_signal = false; // all coefficient functions zero
    int fourier_size = 25;
    int error_terms = 5;     // Fourier terms in FFLR error curves
    int grid_points = 101;
    std::uint64_t seed = 1;

    void validate() const
    {
        if (n < 2 || p < 1) throw ConfigError("simulation needs n >= 2 and p >= 1");
        if (!(rho >= 0.0 && rho < 1.0)) throw ConfigError("rho must lie in [0, 1)");
        if (support < 0 || (model != Model::FGGM && support > p)) throw ConfigError("support size exceeds p");
        if (model == Model::FGGM && p < 3) throw ConfigError("graph design needs p >= 3");
        if (!(c_lo <= c_hi)) throw ConfigError("coefficient range must satisfy c_lo <= c_hi");
        if (fourier_size < 1 || error_terms < 0 || error_terms > fourier_size) {
            throw ConfigError("invalid Fourier sizes");
        }
        if (grid_points < 2) throw ConfigError("grid needs at least two points");
    }
};

// RNG streams inside one replicate.
enum : std::uint64_t { kStreamCurves = 1, kStreamCoef = 2, kStreamNoise = 3, kStreamGraph = 4, kStreamPartial = 5 };

// ---- covariance ----------------------------------------------------------------

// Dense Lambda as written: diagonal blocks diag(l^-2), off-diagonal blocks
// rho^|j-k| (0.5/(l m) off the diagonal, l^-2 on it).
inline MatrixXd gen_covariance(int p, double rho, int m = 25)
{
    if (p < 1 || m < 1) {
        throw ConfigError("gen_covariance: p and basis size must be positive");
    }
    MatrixXd lam = MatrixXd::Zero(static_cast<Eigen::Index>(p) * m, static_cast<Eigen::Index>(p) * m);
    for (int j = 0; j < p; ++j) {
        for (int k = 0; k < p; ++k) {
            const double f = j == k ? 1.0 : std::pow(rho, std::abs(j - k));
            for (int l = 1; l <= m; ++l) {
                for (int q = 1; q <= m; ++q) {
                    double v;
                    if (j == k) {
                        v = l == q ? 1.0 / (l * l) : 0.0;
                    } else {
                        v = l == q ? f / (l * l) : 0.5 * f / (l * q);
                    }
                    lam(j * m + l - 1, k * m + q - 1) = v;
                }
            }
        }
    }
    return lam;
}

// Lambda = P (x) M + I (x) (D - M) with P_jk = rho^|j-k|, D = diag(l^-2) and
// M = 0.5 (u u' + D), u_l = 1/l. Rotating by the eigenvectors of P gives
// blocks pi_i M + D - M, so the eigenvalue floor is applied blockwise.
class CovarianceModel {
public:
    CovarianceModel(int p, double rho, int m = 25, double floor = 1e-8) : p_(p), m_(m), rho_(rho)
    {
        if (p < 1 || m < 1) {
            throw ConfigError("covariance: p and basis size must be positive");
        }
        MatrixXd pm(p, p);
        for (int j = 0; j < p; ++j) {
            for (int k = 0; k < p; ++k) {
                pm(j, k) = j == k ? 1.0 : std::pow(rho, std::abs(j - k));
            }
        }
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(pm);
        q_ = es.eigenvectors();
        VectorXd u(m), dvec(m);
        for (int l = 1; l <= m; ++l) {
            u[l - 1] = 1.0 / l;
            dvec[l - 1] = 1.0 / (l * l);
        }
        const MatrixXd mm = 0.5 * (u * u.transpose() + MatrixXd(dvec.asDiagonal()));
        const MatrixXd rest = MatrixXd(dvec.asDiagonal()) - mm;
        double pert2 = 0.0;
        for (int i = 0; i < p; ++i) {
            const MatrixXd blk = linalg::symmetrize(es.eigenvalues()[i] * mm + rest);
            Eigen::SelfAdjointEigenSolver<MatrixXd> eb(blk);
            VectorXd ev = eb.eigenvalues();
            for (Eigen::Index a = 0; a < ev.size(); ++a) {
                if (ev[a] < floor) {
                    pert2 += (floor - ev[a]) * (floor - ev[a]);
                    ev[a] = floor;
                    ++floored_;
                }
            }
            min_eig_ = std::min(min_eig_, eb.eigenvalues().minCoeff());
            roots_.push_back(eb.eigenvectors() * ev.cwiseSqrt().asDiagonal());
            blocks_.push_back(eb.eigenvectors() * ev.asDiagonal() * eb.eigenvectors().transpose());
        }
        perturbation_ = std::sqrt(pert2);
    }

    int p() const { return p_; }
    int m() const { return m_; }
    double rho() const { return rho_; }
    int floored() const { return floored_; }
    double perturbation() const { return perturbation_; } // Frobenius norm of the floor correction
    double raw_min_eigenvalue() const { return min_eig_; }

    // Floored Lambda as a dense matrix (tests and small p).
    MatrixXd dense() const
    {
        const Eigen::Index dim = static_cast<Eigen::Index>(p_) * m_;
        MatrixXd out = MatrixXd::Zero(dim, dim);
        for (int j = 0; j < p_; ++j) {
            for (int k = 0; k < p_; ++k) {
                MatrixXd blk = MatrixXd::Zero(m_, m_);
                for (int i = 0; i < p_; ++i) {
                    blk += q_(j, i) * q_(k, i) * blocks_[i];
                }
                out.block(static_cast<Eigen::Index>(j) * m_, static_cast<Eigen::Index>(k) * m_, m_, m_) = blk;
            }
        }
        return out;
    }

    // One draw theta ~ N(0, Lambda) as a p x m matrix (row j = theta_j).
    MatrixXd draw(Rng& rng) const
    {
        std::normal_distribution<double> normal(0.0, 1.0);
        MatrixXd y(p_, m_);
        for (int i = 0; i < p_; ++i) {
            VectorXd z(m_);
            for (int a = 0; a < m_; ++a) {
                z[a] = normal(rng);
            }
            y.row(i) = (roots_[i] * z).transpose();
        }
        return q_ * y;
    }

private:
    int p_, m_;
    double rho_;
    MatrixXd q_;
    std::vector<MatrixXd> roots_;
    std::vector<MatrixXd> blocks_;
    int floored_ = 0;
    double perturbation_ = 0.0;
    double min_eig_ = std::numeric_limits<double>::infinity();
};

// Process-wide cache keyed by (p, rho, m); the factor is immutable once built.
inline std::shared_ptr<const CovarianceModel> cached_covariance(int p, double rho, int m = 25)
{
    static std::mutex mu;
    static std::map<std::tuple<int, double, int>, std::shared_ptr<const CovarianceModel>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[{p, rho, m}];
    if (!slot) {
        slot = std::make_shared<const CovarianceModel>(p, rho, m);
    }
    return slot;
}

// ---- curves ----------------------------------------------------------------------

// n draws; result[j] is n x m coordinates of variable j in the Fourier system.
inline std::vector<MatrixXd> gen_curves(int n, const CovarianceModel& cov, std::uint64_t seed)
{
    std::vector<MatrixXd> theta(cov.p(), MatrixXd(n, cov.m()));
    Rng rng = make_rng(seed, kStreamCurves);
    for (int i = 0; i < n; ++i) {
        const MatrixXd t = cov.draw(rng);
        for (int j = 0; j < cov.p(); ++j) {
            theta[j].row(i) = t.row(j);
        }
    }
    return theta;
}

// Values of coordinate rows on a grid (n x grid).
inline MatrixXd values_on_grid(const MatrixXd& coords, const BasisSystem& basis, const std::vector<double>& grid)
{
    return coords * basis.design(grid).transpose();
}

struct SimData {
    SimConfig config;
    BasisSystem fourier;
    std::vector<MatrixXd> theta;   // per variable n x m Fourier coordinates
    VectorXd y;                    // scalar responses (SFLR)
    MatrixXd y_coords;             // n x m response coordinates (FFLR)
    std::vector<int> support;      // active variables (regressions)
    std::vector<Edge> edges;       // true undirected edges (graph)
    std::vector<Edge> dag;         // directed edges (parent, child)
    std::vector<double> c_draws;   // signal strengths drawn for this replicate

    CurvePanel panel() const { return CurvePanel{fourier, theta}; }
};

inline double draw_strength(const SimConfig& c, Rng& rng)
{
    if (c.null_signal) {
        return 0.0;
    }
    return std::uniform_real_distribution<double>(c.c_lo, c.c_hi)(rng);
}

inline SimData gen_sflr(const SimConfig& c)
{
    c.validate();
    SimData d;
    d.config = c;
    d.fourier = make_fourier_basis(c.fourier_size);
    const auto cov = cached_covariance(c.p, c.rho, c.fourier_size);
    d.theta = gen_curves(c.n, *cov, c.seed);
    Rng coef = make_rng(c.seed, kStreamCoef);
    Rng noise = make_rng(c.seed, kStreamNoise);
    std::normal_distribution<double> normal(0.0, 1.0);
    d.y = VectorXd::Zero(c.n);
    for (int j = 0; j < c.support; ++j) {
        d.support.push_back(j);
        const double cb = draw_strength(c, coef);
        d.c_draws.push_back(cb);
        VectorXd b(c.fourier_size);
        for (int l = 1; l <= c.fourier_size; ++l) {
            b[l - 1] = (l % 2 == 0 ? 1.0 : -1.0) * cb / (l * l);
        }
        d.y += d.theta[j] * b; // orthonormal system: integral = coefficient inner product
    }
    for (int i = 0; i < c.n; ++i) {
        d.y[i] += normal(noise);
    }
    return d;
}

// Coefficient matrix with entries (-1)^{l+m} scale (l+m)^-2.
inline MatrixXd alternating_kernel(int m, double scale)
{
    MatrixXd b(m, m);
    for (int l = 1; l <= m; ++l) {
        for (int q = 1; q <= m; ++q) {
            b(l - 1, q - 1) = ((l + q) % 2 == 0 ? 1.0 : -1.0) * scale / ((l + q) * (l + q));
        }
    }
    return b;
}

inline SimData gen_fflr(const SimConfig& c)
{
    c.validate();
    SimData d;
    d.config = c;
    d.fourier = make_fourier_basis(c.fourier_size);
    const auto cov = cached_covariance(c.p, c.rho, c.fourier_size);
    d.theta = gen_curves(c.n, *cov, c.seed);
    Rng coef = make_rng(c.seed, kStreamCoef);
    Rng noise = make_rng(c.seed, kStreamNoise);
    std::normal_distribution<double> normal(0.0, 1.0);
    d.y_coords = MatrixXd::Zero(c.n, c.fourier_size);
    for (int j = 0; j < c.support; ++j) {
        d.support.push_back(j);
        const double cb = draw_strength(c, coef);
        d.c_draws.push_back(cb);
        d.y_coords += d.theta[j] * alternating_kernel(c.fourier_size, cb);
    }
    for (int i = 0; i < c.n; ++i) {
        for (int l = 0; l < c.error_terms; ++l) {
            d.y_coords(i, l) += normal(noise);
        }
    }
    return d;
}

// Undirected moral graph: every directed edge plus every pair of co-parents.
inline std::vector<Edge> moralize(const std::vector<Edge>& dag, int p)
{
    std::set<Edge> out;
    std::vector<std::vector<int>> parents(p);
    for (const auto& [a, b] : dag) {
        if (a < 0 || b < 0 || a >= p || b >= p || a == b) {
            throw ConfigError("moralize: invalid directed edge");
        }
        out.insert({std::min(a, b), std::max(a, b)});
        parents[b].push_back(a);
    }
    for (const auto& pa : parents) {
        for (std::size_t x = 0; x < pa.size(); ++x) {
            for (std::size_t y = x + 1; y < pa.size(); ++y) {
                if (pa[x] != pa[y]) {
                    out.insert({std::min(pa[x], pa[y]), std::max(pa[x], pa[y])});
                }
            }
        }
    }
    return {out.begin(), out.end()};
}

// One random earlier parent per node 2..p, then floor(p/3) extra distinct
// forward edges drawn uniformly from the remaining candidates.
inline std::vector<Edge> random_dag(int p, Rng& rng)
{
    std::set<Edge> e;
    for (int j = 1; j < p; ++j) {
        e.insert({std::uniform_int_distribution<int>(0, j - 1)(rng), j});
    }
    const long available = static_cast<long>(p) * (p - 1) / 2 - static_cast<long>(e.size());
    const long extra = std::min<long>(p / 3, available);
    std::uniform_int_distribution<int> node(0, p - 1);
    for (long added = 0; added < extra;) {
        int a = node(rng), b = node(rng);
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        if (e.insert({a, b}).second) ++added;
    }
    return {e.begin(), e.end()};
}

inline SimData gen_fggm(const SimConfig& c)
{
    c.validate();
    SimData d;
    d.config = c;
    d.fourier = make_fourier_basis(c.fourier_size);
    const int m = c.fourier_size;
    Rng graph = make_rng(c.seed, kStreamGraph);
    d.dag = random_dag(c.p, graph);
    d.edges = moralize(d.dag, c.p);

    std::vector<std::vector<int>> parents(c.p);
    for (const auto& [a, b] : d.dag) {
        parents[b].push_back(a);
    }
    // Errors: independent N(0, diag(l^-2)) coordinates per node.
    Rng noise = make_rng(c.seed, kStreamCurves);
    std::normal_distribution<double> normal(0.0, 1.0);
    d.theta.assign(c.p, MatrixXd(c.n, m));
    for (int i = 0; i < c.n; ++i) {
        for (int j = 0; j < c.p; ++j) {
            for (int l = 1; l <= m; ++l) {
                d.theta[j](i, l - 1) = normal(noise) / l;
            }
        }
    }
    // s_j is the neighbourhood size of node j in the moral graph.
    std::vector<int> degree(c.p, 0);
    for (const auto& [a, b] : d.edges) {
        ++degree[a];
        ++degree[b];
    }
    Rng coef = make_rng(c.seed, kStreamCoef);
    for (int j = 0; j < c.p; ++j) { // parents precede children
        const double sj = static_cast<double>(degree[j]);
        for (int k : parents[j]) {
            const double cb = draw_strength(c, coef);
            d.c_draws.push_back(cb);
            d.theta[j] += d.theta[k] * alternating_kernel(m, cb / sj);
        }
    }
    return d;
}

inline SimData generate(const SimConfig& c)
{
    switch (c.model) {
    case Model::SFLR: return gen_sflr(c);
    case Model::FFLR: return gen_fflr(c);
    case Model::FGGM: return gen_fggm(c);
    }
    throw ConfigError("unknown model");
}

// L uniform time points per curve with additive N(0, sd^2) noise.
// Curve (i, j) uses its own generator so the result does not depend on p ordering.
inline std::vector<RawCurve> corrupt_partial(const std::vector<MatrixXd>& coords, const BasisSystem& basis, int L,
                                             double noise_sd, std::uint64_t seed)
{
    if (L < 2) {
        throw ConfigError("corrupt_partial: need L >= 2");
    }
    if (!(noise_sd >= 0.0)) {
        throw ConfigError("corrupt_partial: noise sd must be nonnegative");
    }
    std::vector<RawCurve> out;
    const int p = static_cast<int>(coords.size());
    const int n = p > 0 ? static_cast<int>(coords[0].rows()) : 0;
    const Interval dom = basis.domain();
    const std::uint64_t base = derive_seed(seed, kStreamPartial);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) {
            Rng rng = make_rng(base, static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(p) + j);
            std::uniform_real_distribution<double> unif(dom.lo, dom.hi);
            std::normal_distribution<double> normal(0.0, 1.0);
            RawCurve rc{i, j, {}};
            rc.samples.reserve(L);
            for (int l = 0; l < L; ++l) {
                const double t = unif(rng);
                const double e = noise_sd * normal(rng);
                rc.samples.push_back({t, coords[j].row(i).dot(basis.values(t)) + e});
            }
            out.push_back(std::move(rc));
        }
    }
    return out;
}

} // namespace fknock
