#include "evqr/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace evqr {

SymMatrix::SymMatrix(const Matrix& a) {
    if (a.rows() != a.cols())
        throw DimensionMismatch("SymMatrix: input is not square");
    const double scale = a.cwiseAbs().maxCoeff();
    const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * scale)
        throw DomainError("SymMatrix: input is not symmetric");
    mat_ = 0.5 * (a + a.transpose());
}

SymMatrix psd_sqrt(const SymMatrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a.mat());
    if (es.info() != Eigen::Success)
        throw Error("psd_sqrt: eigendecomposition failed");
    Vector w = es.eigenvalues();
    const double lmax = std::max(w.maxCoeff(), 0.0);
    if (w.minCoeff() < -1e-12 * lmax)
        throw NotPSD("psd_sqrt: eigenvalue below -1e-12 * lambda_max");
    w = w.cwiseMax(0.0).cwiseSqrt();
    Matrix s = es.eigenvectors() * w.asDiagonal() * es.eigenvectors().transpose();
    return SymMatrix(0.5 * (s + s.transpose()));
}

Matrix sym_solve(const SymMatrix& a, const Matrix& b) {
    if (a.dim() != b.rows())
        throw DimensionMismatch("sym_solve: row count of B does not match A");
    Eigen::LLT<Matrix> llt(a.mat());
    if (llt.info() != Eigen::Success)
        throw SingularMatrix("sym_solve: Cholesky factorization failed");
    const Matrix& l = llt.matrixLLT();
    const double pivot_floor = 1e-14 * a.mat().trace() / std::max(a.dim(), 1);
    for (int i = 0; i < a.dim(); ++i) {
        if (l(i, i) * l(i, i) < pivot_floor)
            throw SingularMatrix("sym_solve: Cholesky pivot below 1e-14 * trace/d");
    }
    return llt.solve(b);
}

double bures_w2_squared(const SymMatrix& a, const SymMatrix& b) {
    if (a.dim() != b.dim())
        throw DimensionMismatch("bures_w2_squared: dimension mismatch");
    const Matrix sa = psd_sqrt(a).mat();
    Matrix m = sa * b.mat() * sa;
    m = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw Error("bures_w2_squared: eigendecomposition failed");
    const Vector& w = es.eigenvalues();
    // Eigenvalues below ~64 ulp of lambda_max carry no information; wiping
    // them removes the sqrt(machine eps) noise a singular input would
    // otherwise inject through sqrt near 0.
    const double floor = 64.0 * std::numeric_limits<double>::epsilon()
                         * std::max(w.maxCoeff(), 0.0);
    double cross = 0.0;
    for (int i = 0; i < w.size(); ++i)
        if (w[i] > floor) cross += std::sqrt(w[i]);
    const double val = a.mat().trace() + b.mat().trace() - 2.0 * cross;
    return std::max(val, 0.0);
}

} // namespace evqr
