#pragma once

// Empirical Karhunen-Loeve expansion per variable in coordinate space.

#include "fknock/basis.hpp"
#include "fknock/diagnostics.hpp"
#include "fknock/linalg.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace fknock {

struct VariableFpca {
    VectorXd eigenvalues;   // nonincreasing, clipped at zero
    MatrixXd eigenvectors;  // columns v_l, orthonormal
    MatrixXd eigenfunctions; // columns [phi_l] = G^{+1/2} v_l
    MatrixXd scores;        // n x k_n, xi_il = [X_i - mu]' G^{1/2} v_l
    VectorXd mean;          // mean coordinate vector
    int truncation = 1;     // d_j
    bool degenerate = false;
};

struct FpcaModel {
    BasisSystem basis;
    std::vector<VariableFpca> variables;

    int p() const { return static_cast<int>(variables.size()); }
    int n() const { return variables.empty() ? 0 : static_cast<int>(variables.front().scores.rows()); }
    int k() const { return basis.size(); }
};

// Smallest d with cumulative share >= fraction; at least 1.
inline int choose_truncation(const VectorXd& eigenvalues, double fraction,
                             bool* degenerate = nullptr)
{
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw ConfigError("truncation fraction must lie in (0, 1]");
    }
    const double total = eigenvalues.cwiseMax(0.0).sum();
    if (degenerate != nullptr) {
        *degenerate = !(total > 0.0);
    }
    if (!(total > 0.0)) {
        return 1;
    }
    double acc = 0.0;
    for (Eigen::Index d = 0; d < eigenvalues.size(); ++d) {
        acc += std::max(eigenvalues[d], 0.0);
        // relative slack absorbs rounding in ratios such as 9/10 == 0.9
        if (acc / total >= fraction - 1e-12) {
            return static_cast<int>(d) + 1;
        }
    }
    return static_cast<int>(eigenvalues.size());
}

// Eigen-decomposition of one variable's centered coordinates.
inline VariableFpca fit_variable(const MatrixXd& coords, const BasisSystem& basis,
                                 double fraction, Diagnostics* diag = nullptr,
                                 int variable_id = 0)
{
    const Eigen::Index n = coords.rows();
    if (n < 2) {
        throw ConfigError("FPCA needs at least two samples");
    }
    VariableFpca out;
    out.mean = coords.colwise().mean().transpose();
    const MatrixXd centered = coords.rowwise() - out.mean.transpose();
    const MatrixXd& gs = basis.gram_sqrt();
    const MatrixXd m = linalg::symmetrize(gs * (centered.transpose() * centered) * gs / static_cast<double>(n));

    Eigen::SelfAdjointEigenSolver<MatrixXd> es(m);
    const Eigen::Index k = m.rows();
    out.eigenvalues.resize(k);
    out.eigenvectors.resize(k, k);
    for (Eigen::Index l = 0; l < k; ++l) {
        out.eigenvalues[l] = std::max(es.eigenvalues()[k - 1 - l], 0.0);
        out.eigenvectors.col(l) = es.eigenvectors().col(k - 1 - l);
    }
    linalg::fix_column_signs(out.eigenvectors);
    out.eigenfunctions = basis.gram_pinv_sqrt() * out.eigenvectors;
    out.scores = centered * gs * out.eigenvectors;
    out.truncation = choose_truncation(out.eigenvalues, fraction, &out.degenerate);
    if (out.degenerate) {
        out.eigenvalues.setZero();
        out.scores.setZero();
        warn(diag, "fpca: variable " + std::to_string(variable_id) + " is degenerate (zero covariance)");
    }
    return out;
}

inline FpcaModel fit_fpca(const CurvePanel& panel, double fraction = 0.9,
                          Diagnostics* diag = nullptr)
{
    FpcaModel model{panel.basis, {}};
    model.variables.reserve(panel.coords.size());
    for (int j = 0; j < panel.p(); ++j) {
        model.variables.push_back(fit_variable(panel.coords[j], panel.basis, fraction, diag, j));
    }
    return model;
}

// Scores <x - mu_j, phi_jl>, l = 1..d, for a curve given by its coordinates.
inline VectorXd transform_scores(const FpcaModel& model, const VectorXd& coords, int j, int d)
{
    const auto& v = model.variables.at(j);
    if (d < 0 || d > model.k() || coords.size() != model.k()) {
        throw ConfigError("transform_scores: shape mismatch");
    }
    const VectorXd centered = coords - v.mean;
    return v.eigenfunctions.leftCols(d).transpose() * (model.basis.gram() * centered);
}

} // namespace fknock
