#ifndef EVQR_MEASURES_HPP
#define EVQR_MEASURES_HPP

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "evqr/errors.hpp"

namespace evqr {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Weighted atoms of a discrete probability measure. Rows of `points` are
// atom coordinates; weights are nonnegative and sum to 1 (within 1e-12).
// Atoms with weight 0 are dropped on construction.
class DiscreteMeasure {
public:
    DiscreteMeasure(Vector weights, Matrix points);

    int size() const { return static_cast<int>(weights_.size()); }
    int dim() const { return static_cast<int>(points_.cols()); }
    const Vector& weights() const { return weights_; }
    const Matrix& points() const { return points_; }

private:
    Vector weights_;
    Matrix points_;
};

// Problem data for discrete entropic VQR: reference measure mu on u-space,
// data measure nu on (x, y)-space with the x-block first, and the
// regularization strength. Covariates are centered on construction and the
// subtracted mean is recorded; cost and covariate/response views are cached.
class Problem {
public:
    Problem(DiscreteMeasure mu, DiscreteMeasure nu, int dim_x, double epsilon);

    const DiscreteMeasure& mu() const { return mu_; }
    const DiscreteMeasure& nu() const { return nu_; }
    double epsilon() const { return epsilon_; }
    int dim_x() const { return dim_x_; }
    int dim_y() const { return mu_.dim(); }
    int n() const { return mu_.size(); }
    int m() const { return nu_.size(); }
    const Vector& centering_shift() const { return centering_shift_; }

    // c(u_i, y_j) = ||u_i - y_j||^2 / 2, n x m
    const Matrix& cost() const { return cost_; }
    // x-block of nu, m x d_x (centered)
    const Matrix& covariates() const { return covariates_; }
    // y-block of nu, m x d_y
    const Matrix& responses() const { return responses_; }
    const Vector& log_mu_weights() const { return log_a_; }
    const Vector& log_nu_weights() const { return log_b_; }
    // max_j ||x_j||, the gradient scale of the per-row g solve
    double covariate_scale() const { return covariate_scale_; }

private:
    DiscreteMeasure mu_;
    DiscreteMeasure nu_;
    int dim_x_;
    double epsilon_;
    Vector centering_shift_;
    Matrix cost_;
    Matrix covariates_;
    Matrix responses_;
    Vector log_a_;
    Vector log_b_;
    double covariate_scale_ = 0.0;
};

struct ValidationReport {
    double x_mean_norm = 0.0;
    double x_second_moment_min_eig = 0.0;
    bool feasible = false;
    std::vector<std::string> messages;
};

// Squared-distance cost pairing mu atoms with the y-block (last mu.dim()
// columns) of nu atoms.
Matrix cost_matrix(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

// Subtracts the weighted mean of the first dim_x columns; returns the
// centered measure and the subtracted shift.
std::pair<DiscreteMeasure, Vector> center_covariates(const DiscreteMeasure& nu,
                                                     int dim_x);

// Feasibility of the standing assumptions: after centering, the weighted
// covariate second moment must have lambda_min above a relative spectral
// threshold, which places 0 in the interior of the convex hull of the
// covariate support and makes the per-row g solve uniquely solvable.
ValidationReport validate_problem(const Problem& p);

} // namespace evqr

#endif // EVQR_MEASURES_HPP
