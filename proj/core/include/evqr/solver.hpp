#ifndef EVQR_SOLVER_HPP
#define EVQR_SOLVER_HPP

#include <vector>

#include "evqr/measures.hpp"

namespace evqr {

// Dual triple (f, g, h): f per mu-atom, g per mu-atom as a d_x row,
// h per nu-atom. All in units of cost.
struct Potentials {
    Vector f; // n
    Matrix g; // n x d_x
    Vector h; // m

    static Potentials zero(const Problem& p);
};

struct Coupling {
    Matrix pi; // n x m, nonnegative
};

struct SolverOptions {
    double tol = 1e-9;        // outer stopping tolerance
    int max_sweeps = 10000;
    double inner_tol = 1e-12; // Newton gradient norm, relative to covariate scale
    int inner_max_iter = 50;
    double theta_max = 1e8;   // divergence guard on ||g_i||
    double ridge = 1e-12;     // Hessian regularization floor
    int threads = 1;
};

struct SolveReport {
    int sweeps = 0;
    double primal_value = 0.0;
    double dual_value = 0.0;
    double duality_gap = 0.0;
    double marginal_residual = 0.0;
    double mean_indep_residual = 0.0;
    double schrodinger_residual = 0.0;
    bool converged = false;
};

struct SolveResult {
    Coupling coupling;
    Potentials potentials;
    SolveReport report;
};

// h_j = -eps * logsumexp_i(log a_i + (f_i + <g_i, x_j> - c_ij)/eps);
// the exact dual maximizer over h given (f, g).
Vector update_h(const Problem& p, const Vector& f, const Matrix& g);

// f_i = -eps * logsumexp_j(log b_j + (<g_i, x_j> + h_j - c_ij)/eps);
// the exact dual maximizer over f given (g, h). Afterwards row i of the
// coupling sums to a_i up to roundoff.
Vector update_f(const Problem& p, const Matrix& g, const Vector& h);

// Solves the row-i mean-independence equation: the unique stationary point
// of the log-partition A_i(theta) = eps * logsumexp_j(log b_j +
// (<theta, x_j> + h_j - c_ij)/eps), by damped Newton with backtracking.
// Requires a validated problem (0 interior to the covariate hull).
Vector solve_g_row(const Problem& p, int row, const Vector& h,
                   const Vector& theta0, const SolverOptions& opts = {});

// One block-coordinate pass: for each row i, solve_g_row (warm-started at
// the previous g_i) and the matching f_i, all against the incoming h
// snapshot; then update_h. Exact coordinate maximization, so the dual value
// is nondecreasing across the pass. Row results are independent of the
// thread count. If dual_trace is non-null, the dual value is appended after
// every block update (each row block, then the h block).
Potentials sweep(const Problem& p, const Potentials& pots,
                 const SolverOptions& opts = {},
                 std::vector<double>* dual_trace = nullptr);

// pi_ij = a_i b_j exp((f_i + <g_i, x_j> + h_j - c_ij)/eps), assembled in
// the log domain.
Coupling coupling_from_potentials(const Problem& p, const Potentials& pots);

// sum_ij pi_ij c_ij + eps * KL(pi || a x b), with 0 log 0 = 0.
double primal_value(const Problem& p, const Coupling& pi);

// D = sum_i a_i f_i + sum_j b_j h_j - iota, where iota is eps times the
// excess mass of the implied coupling; iota vanishes at the optimum.
double dual_value(const Problem& p, const Potentials& pots);

double duality_gap(const Problem& p, const Coupling& pi,
                   const Potentials& pots);

// Removes the affine gauge freedom: subtracts a = sum_i a_i f_i from f and
// v = sum_i a_i g_i from every g row, and adds a + <v, x_j> to h_j. The
// implied coupling is unchanged.
Potentials gauge_fix(const Problem& p, const Potentials& pots);

struct Residuals {
    double marginal = 0.0;       // sup |row sums - a|, |col sums - b|
    double mean_independence = 0.0; // sup_i || sum_j pi_ij x_j ||_inf
    double schrodinger = 0.0;    // sup-norm defect of the three fixed-point equations
};

Residuals compute_residuals(const Problem& p, const Coupling& pi,
                            const Potentials& pots);

// Block-coordinate dual ascent until the sup-norm potential change is below
// tol * (1 + eps) and the feasibility residuals are below tol. Returns the
// gauge-fixed potentials, the implied coupling, and a report; a report with
// converged = false (rather than an exception) signals sweep exhaustion.
SolveResult solve(const Problem& p, const SolverOptions& opts = {});
SolveResult solve(const Problem& p, const SolverOptions& opts,
                  const Potentials& init);

// Off-atom evaluation of the dual potentials via the fixed-point equations.
double extend_h(const Problem& p, const Potentials& pots, const Vector& x,
                const Vector& y);
Vector extend_g(const Problem& p, const Potentials& pots, const Vector& u,
                const SolverOptions& opts = {});
double extend_f(const Problem& p, const Potentials& pots, const Vector& u,
                const SolverOptions& opts = {});

} // namespace evqr

#endif // EVQR_SOLVER_HPP
