#ifndef EVQR_LINALG_HPP
#define EVQR_LINALG_HPP

#include <Eigen/Dense>

#include "evqr/errors.hpp"

namespace evqr {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Dense symmetric matrix. Construction rejects inputs with
// ||A - A^T||_inf > 1e-12 * ||A||_inf and stores (A + A^T)/2.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(const Matrix& a);

    int dim() const { return static_cast<int>(mat_.rows()); }
    const Matrix& mat() const { return mat_; }

private:
    Matrix mat_;
};

// Symmetric PSD square root via eigendecomposition. Eigenvalues in
// [-1e-12 * max(lambda_max, 0), 0) are clamped to 0; anything lower throws.
SymMatrix psd_sqrt(const SymMatrix& a);

// Solves A X = B for symmetric positive definite A (Cholesky).
Matrix sym_solve(const SymMatrix& a, const Matrix& b);

// Squared 2-Wasserstein distance between centered Gaussians with
// covariances A and B:
//   tr A + tr B - 2 tr((A^{1/2} B A^{1/2})^{1/2}).
// Supports singular PSD inputs: eigenvalues of the inner product that are
// indistinguishable from 0 at working precision are treated as exact zeros,
// which keeps the result meaningful when A, B share a common null space.
double bures_w2_squared(const SymMatrix& a, const SymMatrix& b);

} // namespace evqr

#endif // EVQR_LINALG_HPP
