#include "evqr/measures.hpp"

#include <cmath>
#include <iostream>
#include <sstream>

namespace evqr {

DiscreteMeasure::DiscreteMeasure(Vector weights, Matrix points) {
    if (weights.size() != points.rows())
        throw DimensionMismatch("DiscreteMeasure: weight/point count mismatch");
    if (weights.size() == 0)
        throw DomainError("DiscreteMeasure: empty measure");
    if (!points.allFinite())
        throw DomainError("DiscreteMeasure: non-finite point coordinate");
    if (!weights.allFinite() || weights.minCoeff() < 0.0)
        throw DomainError("DiscreteMeasure: weights must be finite and >= 0");
    if (std::abs(weights.sum() - 1.0) > 1e-12)
        throw DomainError("DiscreteMeasure: weights must sum to 1 within 1e-12");

    const auto n_zero = (weights.array() == 0.0).count();
    if (n_zero == 0) {
        weights_ = std::move(weights);
        points_ = std::move(points);
        return;
    }
    const auto kept = weights.size() - n_zero;
    if (kept == 0)
        throw DomainError("DiscreteMeasure: all atoms have weight 0");
    weights_.resize(kept);
    points_.resize(kept, points.cols());
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
        if (weights[i] == 0.0) continue;
        weights_[k] = weights[i];
        points_.row(k) = points.row(i);
        ++k;
    }
    std::cerr << "evqr: dropped " << n_zero << " zero-weight atom(s)\n";
}

Matrix cost_matrix(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    const int dy = mu.dim();
    if (nu.dim() < dy)
        throw DimensionMismatch("cost_matrix: nu dimension below mu dimension");
    const Matrix& u = mu.points();
    const Matrix y = nu.points().rightCols(dy);
    Matrix c(mu.size(), nu.size());
    for (int j = 0; j < nu.size(); ++j)
        for (int i = 0; i < mu.size(); ++i)
            c(i, j) = 0.5 * (u.row(i) - y.row(j)).squaredNorm();
    return c;
}

std::pair<DiscreteMeasure, Vector> center_covariates(const DiscreteMeasure& nu,
                                                     int dim_x) {
    if (dim_x < 0 || dim_x > nu.dim())
        throw DimensionMismatch("center_covariates: dim_x out of range");
    Vector shift = nu.points().leftCols(dim_x).transpose() * nu.weights();
    Matrix pts = nu.points();
    pts.leftCols(dim_x).rowwise() -= shift.transpose();
    return {DiscreteMeasure(nu.weights(), std::move(pts)), std::move(shift)};
}

Problem::Problem(DiscreteMeasure mu, DiscreteMeasure nu, int dim_x,
                 double epsilon)
    : mu_(std::move(mu)), nu_(DiscreteMeasure(Vector::Ones(1), Matrix::Zero(1, 1))),
      dim_x_(dim_x), epsilon_(epsilon) {
    if (dim_x < 0)
        throw DimensionMismatch("Problem: dim_x must be >= 0");
    if (nu.dim() != dim_x + mu_.dim())
        throw DimensionMismatch("Problem: nu dimension must equal dim_x + dim(u)");
    if (!(epsilon > 0.0))
        throw DomainError("Problem: epsilon must be > 0");

    auto [centered, shift] = center_covariates(nu, dim_x);
    nu_ = std::move(centered);
    centering_shift_ = std::move(shift);

    cost_ = cost_matrix(mu_, nu_);
    covariates_ = nu_.points().leftCols(dim_x_);
    responses_ = nu_.points().rightCols(mu_.dim());
    log_a_ = mu_.weights().array().log();
    log_b_ = nu_.weights().array().log();
    covariate_scale_ =
        dim_x_ > 0 ? covariates_.rowwise().norm().maxCoeff() : 0.0;
}

ValidationReport validate_problem(const Problem& p) {
    ValidationReport rep;
    const int dx = p.dim_x();
    const Matrix& x = p.covariates();
    rep.x_mean_norm = (x.transpose() * p.nu().weights()).norm();

    Matrix second = x.transpose() * p.nu().weights().asDiagonal() * x;
    second = 0.5 * (second + second.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(second, Eigen::EigenvaluesOnly);
    rep.x_second_moment_min_eig = es.eigenvalues().minCoeff();

    const double rank_tol = 1e-10 * second.trace() / std::max(dx, 1);
    rep.feasible = rep.x_second_moment_min_eig > rank_tol;
    if (!rep.feasible) {
        std::ostringstream msg;
        msg << "covariate second moment is rank-deficient (min eigenvalue "
            << rep.x_second_moment_min_eig << " <= threshold " << rank_tol
            << "); the covariates concentrate on an affine hyperplane";
        rep.messages.push_back(msg.str());
    }
    return rep;
}

} // namespace evqr
