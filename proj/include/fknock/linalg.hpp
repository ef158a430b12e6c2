#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace fknock {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace linalg {

// Symmetric square root via eigen-decomposition. Negative eigenvalues are
// clipped at zero; the count of clipped values is returned through `clipped`.
inline MatrixXd sym_sqrt(const MatrixXd& a, int* clipped = nullptr,
                         double* most_negative = nullptr)
{
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(a);
    VectorXd ev = es.eigenvalues();
    int count = 0;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev[i] < 0.0) {
            ++count;
            worst = std::min(worst, ev[i]);
            ev[i] = 0.0;
        }
    }
    if (clipped != nullptr) {
        *clipped = count;
    }
    if (most_negative != nullptr) {
        *most_negative = worst;
    }
    return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

// Moore-Penrose inverse square root; eigenvalues below rel_cut * max are zeroed.
inline MatrixXd pinv_sqrt(const MatrixXd& a, double rel_cut = 1e-10)
{
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(a);
    const VectorXd& ev = es.eigenvalues();
    const double cut = rel_cut * std::max(ev.maxCoeff(), 0.0);
    VectorXd inv(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        inv[i] = (ev[i] > cut && ev[i] > 0.0) ? 1.0 / std::sqrt(ev[i]) : 0.0;
    }
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

inline double min_eigenvalue(const MatrixXd& a)
{
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(a, Eigen::EigenvaluesOnly);
    return es.eigenvalues()[0];
}

inline MatrixXd symmetrize(const MatrixXd& a)
{
    return 0.5 * (a + a.transpose());
}

// Flip each column so that its largest-magnitude entry is positive.
inline void fix_column_signs(MatrixXd& v)
{
    for (Eigen::Index c = 0; c < v.cols(); ++c) {
        Eigen::Index arg = 0;
        v.col(c).cwiseAbs().maxCoeff(&arg);
        if (v(arg, c) < 0.0) {
            v.col(c) = -v.col(c);
        }
    }
}

} // namespace linalg
} // namespace fknock
