#pragma once

// Finite function systems on a closed interval and the coordinate mapping
// between sampled curves and basis coefficient vectors.

#include "fknock/diagnostics.hpp"
#include "fknock/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace fknock {

enum class BasisKind { bspline, fourier };

struct Interval {
    double lo = 0.0;
    double hi = 1.0;

    bool contains(double t, double slack = 1e-12) const
    {
        return t >= lo - slack && t <= hi + slack;
    }
    double length() const { return hi - lo; }
};

// Observed (t, w) pair of a raw curve.
struct Sample {
    double t;
    double w;
};

// Immutable after construction; safe for concurrent reads.
class BasisSystem {
public:
    BasisSystem() = default; // empty system (size 0); use the factories

    BasisKind kind() const { return kind_; }
    int size() const { return size_; }
    int degree() const { return degree_; }
    const Interval& domain() const { return domain_; }
    const std::vector<double>& interior_knots() const { return interior_; }
    const MatrixXd& gram() const { return gram_; }
    const MatrixXd& gram_sqrt() const { return gram_sqrt_; }
    const MatrixXd& gram_pinv_sqrt() const { return gram_pinv_sqrt_; }

    // Values b_1(t), ..., b_k(t). Throws if t lies outside the domain.
    VectorXd values(double t) const
    {
        if (!domain_.contains(t)) {
            throw ConfigError("basis evaluation point " + std::to_string(t) + " outside domain");
        }
        t = std::clamp(t, domain_.lo, domain_.hi);
        return kind_ == BasisKind::bspline ? bspline_values(t) : fourier_values(t);
    }

    // Design matrix with one row of basis values per point.
    MatrixXd design(const std::vector<double>& ts) const
    {
        MatrixXd b(static_cast<Eigen::Index>(ts.size()), size_);
        for (std::size_t i = 0; i < ts.size(); ++i) {
            b.row(static_cast<Eigen::Index>(i)) = values(ts[i]).transpose();
        }
        return b;
    }

    friend BasisSystem make_bspline_basis(int, int, Interval, int);
    friend BasisSystem make_fourier_basis(int, Interval);

private:
    VectorXd bspline_values(double t) const
    {
        // Cox-de Boor on the clamped knot vector; the right endpoint belongs to
        // the last non-degenerate span so that partition of unity holds at hi.
        const int order = degree_ + 1;
        const auto& u = knots_;
        const int nk = static_cast<int>(u.size());
        int span = order - 1;
        for (int i = order - 1; i < nk - order; ++i) {
            if (t >= u[i] && t < u[i + 1]) {
                span = i;
                break;
            }
            if (t >= u[i + 1]) {
                span = i;
            }
        }
        std::vector<double> n(order, 0.0), left(order, 0.0), right(order, 0.0);
        n[0] = 1.0;
        for (int r = 1; r <= degree_; ++r) {
            left[r] = t - u[span + 1 - r];
            right[r] = u[span + r] - t;
            double saved = 0.0;
            for (int s = 0; s < r; ++s) {
                const double denom = right[s + 1] + left[r - s];
                const double tmp = denom != 0.0 ? n[s] / denom : 0.0;
                n[s] = saved + right[s + 1] * tmp;
                saved = left[r - s] * tmp;
            }
            n[r] = saved;
        }
        VectorXd out = VectorXd::Zero(size_);
        for (int s = 0; s < order; ++s) {
            out[span - degree_ + s] = n[s];
        }
        return out;
    }

    VectorXd fourier_values(double t) const
    {
        const double len = domain_.length();
        const double x = (t - domain_.lo) / len;
        VectorXd out(size_);
        out[0] = 1.0 / std::sqrt(len);
        const double c = std::sqrt(2.0 / len);
        for (int m = 1; m < size_; ++m) {
            const int freq = (m + 1) / 2;
            const double arg = 2.0 * std::numbers::pi * freq * x;
            out[m] = (m % 2 == 1) ? c * std::sin(arg) : c * std::cos(arg);
        }
        return out;
    }

    void finalize_caches()
    {
        gram_sqrt_ = linalg::sym_sqrt(gram_);
        gram_pinv_sqrt_ = linalg::pinv_sqrt(gram_);
    }

    BasisKind kind_ = BasisKind::bspline;
    int size_ = 0;
    int degree_ = 0;
    Interval domain_;
    std::vector<double> interior_;
    std::vector<double> knots_;
    MatrixXd gram_;
    MatrixXd gram_sqrt_;
    MatrixXd gram_pinv_sqrt_;
};

// Composite Simpson weights on `points` equispaced nodes (points is forced odd).
inline std::pair<std::vector<double>, std::vector<double>> simpson_rule(Interval dom, int points)
{
    if (points % 2 == 0) {
        ++points;
    }
    const int m = points - 1;
    const double h = dom.length() / m;
    std::vector<double> t(points), w(points);
    for (int i = 0; i < points; ++i) {
        t[i] = dom.lo + h * i;
        w[i] = h / 3.0 * ((i == 0 || i == m) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0));
    }
    t[m] = dom.hi;
    return {t, w};
}

// Clamped B-splines with equally spaced interior knots; k_n = k_interior + degree + 1.
inline BasisSystem make_bspline_basis(int k_interior, int degree, Interval domain,
                                      int quadrature_points = 201)
{
    if (!(domain.lo < domain.hi)) {
        throw ConfigError("invalid basis domain: lo must be < hi");
    }
    if (k_interior < 0 || degree < 1) {
        throw ConfigError("B-spline basis needs k_interior >= 0 and degree >= 1");
    }
    const int size = k_interior + degree + 1;
    if (quadrature_points < 2 * size) {
        throw ConfigError("quadrature too coarse for basis size " + std::to_string(size));
    }
    BasisSystem b;
    b.kind_ = BasisKind::bspline;
    b.size_ = size;
    b.degree_ = degree;
    b.domain_ = domain;
    for (int i = 1; i <= k_interior; ++i) {
        b.interior_.push_back(domain.lo + domain.length() * i / (k_interior + 1));
    }
    b.knots_.assign(degree + 1, domain.lo);
    b.knots_.insert(b.knots_.end(), b.interior_.begin(), b.interior_.end());
    b.knots_.insert(b.knots_.end(), degree + 1, domain.hi);

    // Align the Simpson grid with the knots so each panel pair stays inside one span.
    int panels = std::max(quadrature_points - 1, 200);
    const int align = 2 * (k_interior + 1);
    panels = ((panels + align - 1) / align) * align;
    auto [ts, ws] = simpson_rule(domain, panels + 1);
    MatrixXd gram = MatrixXd::Zero(size, size);
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const VectorXd v = b.bspline_values(ts[i]);
        gram.noalias() += ws[i] * v * v.transpose();
    }
    if ((gram - gram.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
        throw NumericalError("Gram quadrature produced an asymmetric matrix");
    }
    b.gram_ = linalg::symmetrize(gram);
    b.finalize_caches();
    return b;
}

// Orthonormal Fourier system 1, sqrt2 sin(2 pi k x), sqrt2 cos(2 pi k x), ...
// The Gram matrix is the identity by orthonormality.
inline BasisSystem make_fourier_basis(int size, Interval domain = {})
{
    if (!(domain.lo < domain.hi)) {
        throw ConfigError("invalid basis domain: lo must be < hi");
    }
    if (size < 1) {
        throw ConfigError("Fourier basis size must be positive");
    }
    BasisSystem b;
    b.kind_ = BasisKind::fourier;
    b.size_ = size;
    b.degree_ = 0;
    b.domain_ = domain;
    b.gram_ = MatrixXd::Identity(size, size);
    b.finalize_caches();
    return b;
}

struct BasisOptions {
    BasisKind kind = BasisKind::bspline;
    int k_interior = 3;
    int degree = 3;
    int fourier_size = 25;
    Interval domain;
    int quadrature_points = 201;
};

inline BasisSystem make_basis(const BasisOptions& opt)
{
    return opt.kind == BasisKind::bspline
               ? make_bspline_basis(opt.k_interior, opt.degree, opt.domain, opt.quadrature_points)
               : make_fourier_basis(opt.fourier_size, opt.domain);
}

// Least-squares coordinates of a sampled curve. Falls back to a ridge of
// 1e-8 * trace(B'B) when fewer distinct points than basis functions exist or
// the normal equations are not positive definite.
inline VectorXd project_curve(const std::vector<Sample>& samples, const BasisSystem& basis,
                              Diagnostics* diag = nullptr)
{
    const int k = basis.size();
    if (static_cast<int>(samples.size()) < k) {
        throw ConfigError("project_curve needs at least k_n samples");
    }
    MatrixXd gram = MatrixXd::Zero(k, k);
    VectorXd rhs = VectorXd::Zero(k);
    std::set<double> distinct;
    for (const auto& s : samples) {
        const VectorXd v = basis.values(s.t);
        gram.noalias() += v * v.transpose();
        rhs.noalias() += s.w * v;
        distinct.insert(s.t);
    }
    bool ridge = static_cast<int>(distinct.size()) < k;
    if (!ridge) {
        Eigen::LLT<MatrixXd> llt(gram);
        if (llt.info() == Eigen::Success) {
            const VectorXd c = llt.solve(rhs);
            if (c.allFinite()) {
                return c;
            }
        }
        ridge = true;
    }
    warn(diag, "project_curve: rank-deficient design, ridge regularization applied");
    gram.diagonal().array() += 1e-8 * gram.trace();
    return gram.ldlt().solve(rhs);
}

// Precomputed projector for many curves sampled on one common grid.
class GridProjector {
public:
    GridProjector(const BasisSystem& basis, const std::vector<double>& grid)
    {
        if (static_cast<int>(grid.size()) < basis.size()) {
            throw ConfigError("grid has fewer points than basis functions");
        }
        const MatrixXd b = basis.design(grid);
        MatrixXd gram = b.transpose() * b;
        Eigen::LLT<MatrixXd> llt(gram);
        if (llt.info() != Eigen::Success) {
            gram.diagonal().array() += 1e-8 * gram.trace();
            llt.compute(gram);
        }
        // coords (rows) = values (rows) * hat'
        hat_ = llt.solve(b.transpose()).transpose();
    }

    // values: one curve per row, sampled on the grid; returns coordinates per row.
    MatrixXd project(const MatrixXd& values) const { return values * hat_; }

private:
    MatrixXd hat_;
};

inline double evaluate(const VectorXd& coords, const BasisSystem& basis, double t)
{
    if (coords.size() != basis.size()) {
        throw ConfigError("coordinate vector length does not match basis size");
    }
    return coords.dot(basis.values(t));
}

// Coordinate inner product <x, y> = [x]' G [y].
inline double inner_product(const VectorXd& x, const VectorXd& y, const BasisSystem& basis)
{
    return x.dot(basis.gram() * y);
}

// n x p panel of curves stored as coordinates in one shared basis.
struct CurvePanel {
    BasisSystem basis;
    std::vector<MatrixXd> coords; // per variable: n rows of length-k_n coordinates

    int n() const { return coords.empty() ? 0 : static_cast<int>(coords.front().rows()); }
    int p() const { return static_cast<int>(coords.size()); }

    VectorXd mean(int j) const { return coords.at(j).colwise().mean().transpose(); }

    // Coordinates with the per-variable mean removed.
    MatrixXd centered(int j) const
    {
        const MatrixXd& c = coords.at(j);
        return c.rowwise() - c.colwise().mean();
    }
};

} // namespace fknock
