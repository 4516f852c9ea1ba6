#ifndef EVQR_GAUSSIAN_HPP
#define EVQR_GAUSSIAN_HPP

#include <vector>

#include "evqr/linalg.hpp"

namespace evqr {

// Gaussian marginals: mu = N(0, I_{d_y}) on u-space and
// nu = N((0, m_Y), Sigma) on (x, y)-space, Sigma given by blocks.
// The assembled Sigma must be positive definite.
class GaussianModel {
public:
    GaussianModel(Vector m_y, SymMatrix sigma_xx, Matrix sigma_xy,
                  SymMatrix sigma_yy);

    int dim_x() const { return sigma_xx_.dim(); }
    int dim_y() const { return static_cast<int>(m_y_.size()); }
    const Vector& m_y() const { return m_y_; }
    const SymMatrix& sigma_xx() const { return sigma_xx_; }
    const Matrix& sigma_xy() const { return sigma_xy_; }
    const SymMatrix& sigma_yy() const { return sigma_yy_; }

    // Sigma_YY - Sigma_YX Sigma_XX^{-1} Sigma_XY (= Omega_YY^{-1})
    SymMatrix schur_complement() const;
    // Omega_YY, the Y-block of Sigma^{-1}
    SymMatrix omega_yy() const;
    // G = -Sigma_XX^{-1} Sigma_XY, d_x x d_y
    Matrix g_matrix() const;
    Matrix sigma() const; // assembled (d_x + d_y) square

private:
    Vector m_y_;
    SymMatrix sigma_xx_;
    Matrix sigma_xy_;
    SymMatrix sigma_yy_;
};

// Optimal coupling N(m, Gamma) in (u, x, y) order with
// Gamma = [[I, O, Lambda], [O, Sigma_XX, Sigma_XY], [Lambda, Sigma_YX, Sigma_YY]].
// Positive definite for epsilon > 0; the epsilon -> 0 limit is PSD with
// rank d_x + d_y.
struct GaussianCoupling {
    Vector mean;      // (0, 0, m_Y)
    SymMatrix gamma;  // d_y + d_x + d_y
    SymMatrix lambda; // the U-Y cross block
};

// Closed-form dual potentials:
//   f(u) = -u' (Lambda - I) u / 2 - m_Y' u - (eps/2) log det(eps Lambda Omega_YY)
//   g(u) = G u
//   h(x, y) = -(G'x + y - m_Y)' Psi (G'x + y - m_Y) / 2 + ||y||^2 / 2
// with Psi = Lambda Omega_YY symmetric positive definite.
class GaussianPotentials {
public:
    GaussianPotentials(Matrix f_quad, Vector f_lin, double f_const,
                       Matrix g_mat, SymMatrix h_quad, Vector h_shift);

    double f(const Vector& u) const;
    Vector g(const Vector& u) const;
    double h(const Vector& x, const Vector& y) const;

    const Matrix& f_quad() const { return f_quad_; }
    const Vector& f_lin() const { return f_lin_; }
    double f_const() const { return f_const_; }
    const Matrix& g_mat() const { return g_mat_; }
    const SymMatrix& h_quad() const { return h_quad_; }
    const Vector& h_shift() const { return h_shift_; }

private:
    Matrix f_quad_;    // Lambda_eps - I
    Vector f_lin_;     // m_Y
    double f_const_;   // (eps/2) log det(eps Lambda_eps Omega_YY)
    Matrix g_mat_;     // G
    SymMatrix h_quad_; // Psi_eps
    Vector h_shift_;   // m_Y
};

// Lambda_eps = (Sigma_YY - Sigma_YX Sigma_XX^{-1} Sigma_XY + eps^2/4 I)^{1/2}
//              - eps/2 I; epsilon = 0 yields the unregularized limit.
SymMatrix lambda_eps(const GaussianModel& model, double epsilon);

GaussianCoupling optimal_gaussian_coupling(const GaussianModel& model,
                                           double epsilon);

// Frobenius norm of Lambda Omega_YY Lambda' + eps Lambda Omega_YY - I.
double riccati_residual(const GaussianModel& model, const SymMatrix& lambda,
                        double epsilon);

// Deviations of the Gamma^{-1} blocks from the closed forms
// Theta_UY = -(1/eps) I, Theta_UU = (1/eps) Lambda + I,
// Theta_XU = (1/eps) Sigma_XX^{-1} Sigma_XY, each as
// ||deviation||_F / (1 + ||closed form||_F).
struct PrecisionBlockResiduals {
    double theta_uy = 0.0;
    double theta_uu = 0.0;
    double theta_xu = 0.0;
};

PrecisionBlockResiduals precision_blocks(const GaussianCoupling& coupling,
                                         double epsilon);

GaussianPotentials gaussian_dual_potentials(const GaussianModel& model,
                                            double epsilon);

// Max absolute defect, over the given points (rows w = (u, x, y)), of
//   (f(u) + <g(u), x> + h(x,y) - ||u - y||^2/2) / eps
//     = -(w - m)' DeltaTheta (w - m) / 2 - log det(eps Lambda Omega_YY) / 2.
double log_density_identity_residual(const GaussianModel& model,
                                     double epsilon,
                                     const Matrix& sample_points);

// Weak limit of the optimal coupling as epsilon -> 0: Lambda_o is the
// Schur-complement square root, Gamma_o is PSD with rank d_x + d_y, and
// Y = m_Y + Lambda_o U + Sigma_YX Sigma_XX^{-1} X holds a.s.
GaussianCoupling limit_coupling(const GaussianModel& model);

// tr(L^{-1} Lambda_o), the coefficient of epsilon in the expansion of
// W_2^2(pi_eps, pi_o), with L = I + Lambda_o^2 + Sigma_YX Sigma_XX^{-2} Sigma_XY.
double w2_first_order(const GaussianModel& model);

// W_2^2 between N(m, Gamma_eps) and N(m, Gamma_o) via the Bures formula.
double w2_exact(const GaussianModel& model, double epsilon);

struct SweepRow {
    double epsilon = 0.0;
    double w2_exact = 0.0;
    double first_order = 0.0;        // epsilon * tr(L^{-1} Lambda_o)
    double ratio = 0.0;              // w2_exact / first_order
    double residual_over_eps2 = 0.0; // (w2_exact - first_order) / eps^2
};

std::vector<SweepRow> sweep_epsilon(const GaussianModel& model,
                                    const std::vector<double>& eps_grid);

} // namespace evqr

#endif // EVQR_GAUSSIAN_HPP
