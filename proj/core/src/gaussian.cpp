#include "evqr/gaussian.hpp"

#include <cmath>
#include <utility>

namespace evqr {

namespace {

Matrix assemble_gamma(const GaussianModel& model, const SymMatrix& lambda) {
    const int dx = model.dim_x();
    const int dy = model.dim_y();
    const int n = 2 * dy + dx;
    Matrix gamma = Matrix::Zero(n, n);
    gamma.topLeftCorner(dy, dy).setIdentity();
    gamma.block(0, dy + dx, dy, dy) = lambda.mat();
    gamma.block(dy, dy, dx, dx) = model.sigma_xx().mat();
    gamma.block(dy, dy + dx, dx, dy) = model.sigma_xy();
    gamma.block(dy + dx, 0, dy, dy) = lambda.mat();
    gamma.block(dy + dx, dy, dy, dx) = model.sigma_xy().transpose();
    gamma.block(dy + dx, dy + dx, dy, dy) = model.sigma_yy().mat();
    return gamma;
}

Vector assemble_mean(const GaussianModel& model) {
    Vector m = Vector::Zero(2 * model.dim_y() + model.dim_x());
    m.tail(model.dim_y()) = model.m_y();
    return m;
}

// log det of the symmetric PD matrix eps * Lambda * Omega_YY
double log_det_eps_psi(const SymMatrix& psi, double epsilon) {
    Matrix scaled = epsilon * psi.mat();
    Eigen::LLT<Matrix> llt(scaled);
    if (llt.info() != Eigen::Success)
        throw NotPSD("gaussian potentials: eps Lambda Omega_YY not PD");
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

} // namespace

GaussianModel::GaussianModel(Vector m_y, SymMatrix sigma_xx, Matrix sigma_xy,
                             SymMatrix sigma_yy)
    : m_y_(std::move(m_y)), sigma_xx_(std::move(sigma_xx)),
      sigma_xy_(std::move(sigma_xy)), sigma_yy_(std::move(sigma_yy)) {
    if (sigma_xy_.rows() != sigma_xx_.dim() ||
        sigma_xy_.cols() != sigma_yy_.dim() ||
        sigma_yy_.dim() != static_cast<int>(m_y_.size()))
        throw DimensionMismatch("GaussianModel: block shapes disagree");
    Eigen::LLT<Matrix> llt(sigma());
    if (llt.info() != Eigen::Success)
        throw NotPSD("GaussianModel: joint covariance is not positive definite");
}

Matrix GaussianModel::sigma() const {
    const int dx = dim_x();
    const int dy = dim_y();
    Matrix s(dx + dy, dx + dy);
    s.topLeftCorner(dx, dx) = sigma_xx_.mat();
    s.topRightCorner(dx, dy) = sigma_xy_;
    s.bottomLeftCorner(dy, dx) = sigma_xy_.transpose();
    s.bottomRightCorner(dy, dy) = sigma_yy_.mat();
    return s;
}

SymMatrix GaussianModel::schur_complement() const {
    const Matrix t = sym_solve(sigma_xx_, sigma_xy_); // Sigma_XX^{-1} Sigma_XY
    Matrix s = sigma_yy_.mat() - sigma_xy_.transpose() * t;
    return SymMatrix(0.5 * (s + s.transpose()));
}

SymMatrix GaussianModel::omega_yy() const {
    const SymMatrix s = schur_complement();
    Matrix inv = sym_solve(s, Matrix::Identity(dim_y(), dim_y()));
    return SymMatrix(0.5 * (inv + inv.transpose()));
}

Matrix GaussianModel::g_matrix() const {
    return -sym_solve(sigma_xx_, sigma_xy_);
}

SymMatrix lambda_eps(const GaussianModel& model, double epsilon) {
    if (epsilon < 0.0)
        throw DomainError("lambda_eps: epsilon must be >= 0");
    Matrix shifted = model.schur_complement().mat();
    shifted.diagonal().array() += 0.25 * epsilon * epsilon;
    const SymMatrix root = psd_sqrt(SymMatrix(shifted));
    Matrix lam = root.mat();
    lam.diagonal().array() -= 0.5 * epsilon;
    return SymMatrix(lam);
}

GaussianCoupling optimal_gaussian_coupling(const GaussianModel& model,
                                           double epsilon) {
    if (!(epsilon > 0.0))
        throw DomainError("optimal_gaussian_coupling: epsilon must be > 0");
    const SymMatrix lambda = lambda_eps(model, epsilon);
    Matrix gamma = assemble_gamma(model, lambda);
    Eigen::LLT<Matrix> llt(gamma);
    if (llt.info() != Eigen::Success)
        throw NotPSD("optimal_gaussian_coupling: Gamma_eps is not PD");
    return {assemble_mean(model), SymMatrix(gamma), lambda};
}

double riccati_residual(const GaussianModel& model, const SymMatrix& lambda,
                        double epsilon) {
    const Matrix omega = model.omega_yy().mat();
    const Matrix lo = lambda.mat() * omega;
    const Matrix res = lo * lambda.mat().transpose() + epsilon * lo -
                       Matrix::Identity(model.dim_y(), model.dim_y());
    return res.norm();
}

PrecisionBlockResiduals precision_blocks(const GaussianCoupling& coupling,
                                         double epsilon) {
    const int dy = coupling.lambda.dim();
    const int n = coupling.gamma.dim();
    const int dx = n - 2 * dy;
    if (dx < 0)
        throw DimensionMismatch("precision_blocks: inconsistent coupling dims");
    const Matrix theta =
        sym_solve(coupling.gamma, Matrix::Identity(n, n));

    const Matrix sigma_xx = coupling.gamma.mat().block(dy, dy, dx, dx);
    const Matrix sigma_xy = coupling.gamma.mat().block(dy, dy + dx, dx, dy);

    const Matrix theta_uy = theta.block(0, dy + dx, dy, dy);
    const Matrix theta_uu = theta.block(0, 0, dy, dy);
    const Matrix theta_xu = theta.block(dy, 0, dx, dy);

    const Matrix closed_uy =
        -(1.0 / epsilon) * Matrix::Identity(dy, dy);
    const Matrix closed_uu = (1.0 / epsilon) * coupling.lambda.mat() +
                             Matrix::Identity(dy, dy);
    const Matrix closed_xu =
        (1.0 / epsilon) *
        sym_solve(SymMatrix(sigma_xx), sigma_xy);

    PrecisionBlockResiduals out;
    out.theta_uy = (theta_uy - closed_uy).norm() / (1.0 + closed_uy.norm());
    out.theta_uu = (theta_uu - closed_uu).norm() / (1.0 + closed_uu.norm());
    out.theta_xu = (theta_xu - closed_xu).norm() / (1.0 + closed_xu.norm());
    return out;
}

GaussianPotentials::GaussianPotentials(Matrix f_quad, Vector f_lin,
                                       double f_const, Matrix g_mat,
                                       SymMatrix h_quad, Vector h_shift)
    : f_quad_(std::move(f_quad)), f_lin_(std::move(f_lin)), f_const_(f_const),
      g_mat_(std::move(g_mat)), h_quad_(std::move(h_quad)),
      h_shift_(std::move(h_shift)) {}

double GaussianPotentials::f(const Vector& u) const {
    return -0.5 * u.dot(f_quad_ * u) - f_lin_.dot(u) - f_const_;
}

Vector GaussianPotentials::g(const Vector& u) const { return g_mat_ * u; }

double GaussianPotentials::h(const Vector& x, const Vector& y) const {
    const Vector r = g_mat_.transpose() * x + y - h_shift_;
    return -0.5 * r.dot(h_quad_.mat() * r) + 0.5 * y.squaredNorm();
}

GaussianPotentials gaussian_dual_potentials(const GaussianModel& model,
                                            double epsilon) {
    if (!(epsilon > 0.0))
        throw DomainError("gaussian_dual_potentials: epsilon must be > 0");
    const int dy = model.dim_y();
    const SymMatrix lambda = lambda_eps(model, epsilon);
    const Matrix omega = model.omega_yy().mat();
    Matrix psi = lambda.mat() * omega;
    psi = 0.5 * (psi + psi.transpose()); // Lambda and Omega_YY commute
    const SymMatrix psi_sym(psi);
    const double logdet = log_det_eps_psi(psi_sym, epsilon);
    return GaussianPotentials(
        lambda.mat() - Matrix::Identity(dy, dy), model.m_y(),
        0.5 * epsilon * logdet, model.g_matrix(), psi_sym, model.m_y());
}

double log_density_identity_residual(const GaussianModel& model,
                                     double epsilon,
                                     const Matrix& sample_points) {
    const int dx = model.dim_x();
    const int dy = model.dim_y();
    const int n = 2 * dy + dx;
    if (sample_points.cols() != n)
        throw DimensionMismatch(
            "log_density_identity_residual: points must have d_y+d_x+d_y cols");

    const GaussianPotentials pots = gaussian_dual_potentials(model, epsilon);
    const Matrix& g = pots.g_mat();
    const Matrix& psi = pots.h_quad().mat();
    const SymMatrix lambda = lambda_eps(model, epsilon);

    Matrix delta = Matrix::Zero(n, n);
    delta.block(0, 0, dy, dy) = lambda.mat();
    delta.block(0, dy, dy, dx) = -g.transpose();
    delta.block(0, dy + dx, dy, dy) = -Matrix::Identity(dy, dy);
    delta.block(dy, 0, dx, dy) = -g;
    delta.block(dy, dy, dx, dx) = g * psi * g.transpose();
    delta.block(dy, dy + dx, dx, dy) = g * psi;
    delta.block(dy + dx, 0, dy, dy) = -Matrix::Identity(dy, dy);
    delta.block(dy + dx, dy, dy, dx) = psi * g.transpose();
    delta.block(dy + dx, dy + dx, dy, dy) = psi;
    delta /= epsilon;

    const Vector mean = assemble_mean(model);
    const double half_logdet = pots.f_const() / epsilon; // log det(...)/2

    double worst = 0.0;
    for (Eigen::Index k = 0; k < sample_points.rows(); ++k) {
        const Vector w = sample_points.row(k);
        const Vector u = w.head(dy);
        const Vector x = w.segment(dy, dx);
        const Vector y = w.tail(dy);
        const double lhs = (pots.f(u) + pots.g(u).dot(x) + pots.h(x, y) -
                            0.5 * (u - y).squaredNorm()) /
                           epsilon;
        const Vector d = w - mean;
        const double rhs = -0.5 * d.dot(delta * d) - half_logdet;
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
}

GaussianCoupling limit_coupling(const GaussianModel& model) {
    const SymMatrix lambda_o = psd_sqrt(model.schur_complement());
    return {assemble_mean(model), SymMatrix(assemble_gamma(model, lambda_o)),
            lambda_o};
}

double w2_first_order(const GaussianModel& model) {
    const int dy = model.dim_y();
    const SymMatrix lambda_o = psd_sqrt(model.schur_complement());
    const Matrix t = sym_solve(model.sigma_xx(), model.sigma_xy());
    Matrix l = Matrix::Identity(dy, dy) +
               lambda_o.mat() * lambda_o.mat() + t.transpose() * t;
    l = 0.5 * (l + l.transpose());
    return sym_solve(SymMatrix(l), lambda_o.mat()).trace();
}

double w2_exact(const GaussianModel& model, double epsilon) {
    if (epsilon < 0.0)
        throw DomainError("w2_exact: epsilon must be >= 0");
    const SymMatrix gamma_eps(
        assemble_gamma(model, lambda_eps(model, epsilon)));
    const SymMatrix gamma_o(
        assemble_gamma(model, psd_sqrt(model.schur_complement())));
    return bures_w2_squared(gamma_eps, gamma_o);
}

std::vector<SweepRow> sweep_epsilon(const GaussianModel& model,
                                    const std::vector<double>& eps_grid) {
    const double coef = w2_first_order(model);
    std::vector<SweepRow> rows;
    rows.reserve(eps_grid.size());
    for (double eps : eps_grid) {
        if (!(eps > 0.0))
            throw DomainError("sweep_epsilon: grid entries must be > 0");
        SweepRow row;
        row.epsilon = eps;
        row.w2_exact = w2_exact(model, eps);
        row.first_order = eps * coef;
        row.ratio = row.w2_exact / row.first_order;
        row.residual_over_eps2 = (row.w2_exact - row.first_order) / (eps * eps);
        rows.push_back(row);
    }
    return rows;
}

} // namespace evqr
