#include "evqr/oracle.hpp"

#include <cmath>
#include <limits>

namespace evqr {

namespace {

constexpr int kMaxIter = 200;
constexpr double kGradTol = 1e-12;

// Stacked variable layout: f (n), then g row-major (n * d_x), then h (m).
struct Stacked {
    int n, m, dx;
    int dim() const { return n + n * dx + m; }
    int f(int i) const { return i; }
    int g(int i, int k) const { return n + i * dx + k; }
    int h(int j) const { return n + n * dx + j; }
};

Potentials unstack(const Stacked& s, const Vector& v) {
    Potentials pots;
    pots.f = v.head(s.n);
    pots.g.resize(s.n, s.dx);
    for (int i = 0; i < s.n; ++i)
        pots.g.row(i) = v.segment(s.g(i, 0), s.dx).transpose();
    pots.h = v.tail(s.m);
    return pots;
}

// Dual objective; -inf when the exponent leaves the representable range.
double dual_or_neg_inf(const Problem& p, const Stacked& s, const Vector& v,
                       Matrix* pi_out) {
    const Potentials pots = unstack(s, v);
    Matrix l = -p.cost();
    if (s.dx > 0) l.noalias() += pots.g * p.covariates().transpose();
    l.colwise() += pots.f;
    l.rowwise() += pots.h.transpose();
    l /= p.epsilon();
    l.colwise() += p.log_mu_weights();
    l.rowwise() += p.log_nu_weights().transpose();
    if (l.maxCoeff() > 700.0) return -std::numeric_limits<double>::infinity();
    Matrix pi = l.array().exp();
    const double mass = pi.sum();
    if (pi_out) *pi_out = std::move(pi);
    return p.mu().weights().dot(pots.f) + p.nu().weights().dot(pots.h) -
           p.epsilon() * (mass - 1.0);
}

Vector dual_gradient(const Problem& p, const Stacked& s, const Matrix& pi) {
    Vector grad(s.dim());
    grad.head(s.n) = p.mu().weights() - pi.rowwise().sum();
    if (s.dx > 0) {
        const Matrix gx = pi * p.covariates(); // n x dx
        for (int i = 0; i < s.n; ++i)
            grad.segment(s.g(i, 0), s.dx) = -gx.row(i).transpose();
    }
    grad.tail(s.m) =
        p.nu().weights() - pi.colwise().sum().transpose();
    return grad;
}

// Full dense Hessian, -(1/eps) times the Gram matrix of the exponent map
// weighted by pi.
Matrix dual_hessian(const Problem& p, const Stacked& s, const Matrix& pi) {
    const double inv_eps = 1.0 / p.epsilon();
    const Matrix& x = p.covariates();
    Matrix hess = Matrix::Zero(s.dim(), s.dim());
    const Vector rowsum = pi.rowwise().sum();
    const Vector colsum = pi.colwise().sum().transpose();

    for (int i = 0; i < s.n; ++i) hess(s.f(i), s.f(i)) = -inv_eps * rowsum[i];
    for (int j = 0; j < s.m; ++j) hess(s.h(j), s.h(j)) = -inv_eps * colsum[j];
    for (int j = 0; j < s.m; ++j)
        for (int i = 0; i < s.n; ++i) {
            hess(s.f(i), s.h(j)) = -inv_eps * pi(i, j);
            hess(s.h(j), s.f(i)) = -inv_eps * pi(i, j);
        }
    if (s.dx > 0) {
        const Matrix gx = pi * x; // n x dx: sum_j pi_ij x_j
        for (int i = 0; i < s.n; ++i) {
            const Matrix second =
                x.transpose() * pi.row(i).transpose().asDiagonal() * x;
            hess.block(s.g(i, 0), s.g(i, 0), s.dx, s.dx) = -inv_eps * second;
            hess.block(s.f(i), s.g(i, 0), 1, s.dx) =
                -inv_eps * gx.row(i);
            hess.block(s.g(i, 0), s.f(i), s.dx, 1) =
                -inv_eps * gx.row(i).transpose();
        }
        for (int j = 0; j < s.m; ++j)
            for (int i = 0; i < s.n; ++i) {
                const Vector v = -inv_eps * pi(i, j) * x.row(j).transpose();
                hess.block(s.g(i, 0), s.h(j), s.dx, 1) = v;
                hess.block(s.h(j), s.g(i, 0), 1, s.dx) = v.transpose();
            }
    }
    return hess;
}

} // namespace

OracleResult oracle_solve(const Problem& p) {
    if (p.n() * p.m() > 200)
        throw SizeGuard("oracle_solve: n*m exceeds the 200 guard");
    const ValidationReport val = validate_problem(p);
    if (!val.feasible) {
        std::string msg = "oracle_solve: infeasible problem";
        for (const auto& s : val.messages) msg += "; " + s;
        throw ConstraintInfeasible(msg);
    }

    const Stacked s{p.n(), p.m(), p.dim_x()};
    const int dim = s.dim();
    const int ngauge = 1 + s.dx;

    // Gauge rows: sum_i a_i f_i = 0 and sum_i a_i g_i = 0 (per component).
    Matrix gauge = Matrix::Zero(ngauge, dim);
    for (int i = 0; i < s.n; ++i) {
        gauge(0, s.f(i)) = p.mu().weights()[i];
        for (int k = 0; k < s.dx; ++k)
            gauge(1 + k, s.g(i, k)) = p.mu().weights()[i];
    }

    Vector v = Vector::Zero(dim);
    Matrix pi;
    double value = dual_or_neg_inf(p, s, v, &pi);
    double kkt = std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < kMaxIter; ++iter) {
        const Vector grad = dual_gradient(p, s, pi);
        kkt = grad.cwiseAbs().maxCoeff();
        if (kkt <= kGradTol) break;

        Matrix kkt_mat = Matrix::Zero(dim + ngauge, dim + ngauge);
        kkt_mat.topLeftCorner(dim, dim) = dual_hessian(p, s, pi);
        kkt_mat.topRightCorner(dim, ngauge) = gauge.transpose();
        kkt_mat.bottomLeftCorner(ngauge, dim) = gauge;
        Vector rhs = Vector::Zero(dim + ngauge);
        rhs.head(dim) = -grad;

        const Vector sol = kkt_mat.fullPivLu().solve(rhs);
        const Vector dir = sol.head(dim);
        const double slope = grad.dot(dir);
        if (!(slope > 0.0)) break; // ascent direction exhausted

        // float resolution of the dual: the mass term sums n*m exponentials
        const double resolution =
            (static_cast<double>(s.n) * s.m + 8.0) *
            std::numeric_limits<double>::epsilon() * (1.0 + std::abs(value));
        if (slope <= resolution) {
            // predicted increase is unmeasurable; take the pure Newton step
            Matrix pi_new;
            const double moved = dual_or_neg_inf(p, s, v + dir, &pi_new);
            if (std::isfinite(moved)) {
                v += dir;
                value = moved;
                pi = std::move(pi_new);
            }
            continue;
        }
        double step = 1.0;
        while (step >= 1e-16) {
            Matrix pi_cand;
            const double cand =
                dual_or_neg_inf(p, s, v + step * dir, &pi_cand);
            if (cand >= value + 1e-4 * step * slope - resolution) {
                v += step * dir;
                value = cand;
                pi = std::move(pi_cand);
                break;
            }
            step *= 0.5;
        }
        if (step < 1e-16)
            throw NoConvergence("oracle_solve: line search failed");
    }
    if (kkt > 1e-10)
        throw NoConvergence("oracle_solve: KKT residual above 1e-10");

    OracleResult out;
    out.pi = Coupling{pi};
    out.value = value;
    out.kkt_residual = kkt;
    out.potentials = unstack(s, v);
    return out;
}

OracleCompareReport oracle_compare(const Problem& p,
                                   const SolverOptions& opts) {
    const OracleResult oracle = oracle_solve(p);
    const SolveResult block = solve(p, opts);
    if (!block.report.converged)
        throw NoConvergence("oracle_compare: block solver did not converge");

    OracleCompareReport rep;
    rep.coupling_l1_gap =
        (oracle.pi.pi - block.coupling.pi).cwiseAbs().sum();
    rep.value_gap = std::abs(oracle.value - block.report.dual_value) /
                    (1.0 + std::abs(oracle.value));
    const Potentials a = gauge_fix(p, oracle.potentials);
    const Potentials& b = block.potentials; // already gauge-fixed by solve
    double sup = std::max((a.f - b.f).cwiseAbs().maxCoeff(),
                          (a.h - b.h).cwiseAbs().maxCoeff());
    if (p.dim_x() > 0)
        sup = std::max(sup, (a.g - b.g).cwiseAbs().maxCoeff());
    rep.potential_sup_gap = sup;
    return rep;
}

} // namespace evqr
