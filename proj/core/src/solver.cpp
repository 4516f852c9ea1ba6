#include "evqr/solver.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <iostream>
#include <limits>
#include <thread>
#include <utility>

namespace evqr {

namespace {

double lse(const Vector& v) {
    const double c = v.maxCoeff();
    if (!std::isfinite(c)) return c;
    double s = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) s += std::exp(v[i] - c);
    return c + std::log(s);
}

// log weights + (f + <g_i, x_j> + h - c)/eps for all pairs
Matrix log_coupling(const Problem& p, const Potentials& pots) {
    Matrix l = -p.cost();
    if (p.dim_x() > 0) l.noalias() += pots.g * p.covariates().transpose();
    l.colwise() += pots.f;
    l.rowwise() += pots.h.transpose();
    l /= p.epsilon();
    l.colwise() += p.log_mu_weights();
    l.rowwise() += p.log_nu_weights().transpose();
    return l;
}

struct GRowSolution {
    Vector theta;
    double log_partition = 0.0; // A(theta), units of cost
};

// Damped Newton on the strictly convex log partition
// A(theta) = eps * lse(base + X theta / eps), gradient sum_j p_j x_j,
// Hessian (1/eps) * weighted covariance of x.
GRowSolution newton_g_row(const Matrix& x, const Vector& base, double eps,
                          Vector theta, const SolverOptions& opts,
                          double scale) {
    const int dx = static_cast<int>(x.cols());
    GRowSolution sol;
    if (dx == 0) {
        sol.theta = theta;
        sol.log_partition = eps * lse(base);
        return sol;
    }
    const double grad_tol = opts.inner_tol * scale;

    Vector logits = base + (x * theta) / eps;
    double lse_val = lse(logits);
    for (int iter = 0; iter < opts.inner_max_iter; ++iter) {
        const Vector prob = (logits.array() - lse_val).exp();
        const Vector grad = x.transpose() * prob;
        if (grad.norm() <= grad_tol) {
            sol.theta = std::move(theta);
            sol.log_partition = eps * lse_val;
            return sol;
        }
        Matrix hess = x.transpose() * prob.asDiagonal() * x;
        hess.noalias() -= grad * grad.transpose();
        hess /= eps;
        hess = 0.5 * (hess + hess.transpose());
        Vector dir;
        Eigen::LLT<Matrix> llt(hess);
        if (llt.info() == Eigen::Success) {
            dir = -llt.solve(grad);
        } else {
            const double tr = hess.trace();
            if (tr > 0.0) {
                hess.diagonal().array() += opts.ridge * tr / dx;
                llt.compute(hess);
            }
            if (tr > 0.0 && llt.info() == Eigen::Success) {
                dir = -llt.solve(grad);
            } else {
                // softmax concentrated on one atom: the curvature vanishes
                // exactly; fall back to a gradient step at the natural scale
                dir = -(eps / (scale * scale)) * grad;
            }
        }
        // a near-singular Hessian can pass the factorization yet return a
        // direction too long for any representable backtracking step
        const double dir_cap = 1e3 * (1.0 + theta.norm());
        if (dir.norm() > dir_cap) dir *= dir_cap / dir.norm();
        double slope = grad.dot(dir);
        if (!(slope < 0.0)) {
            dir = -(eps / (scale * scale)) * grad;
            slope = grad.dot(dir);
        }
        const double a0 = eps * lse_val;
        // float resolution of A: the lse sum of x.rows() terms scatters over
        // a few ulps, so sufficient-decrease comparisons below this level
        // are meaningless
        const double resolution = (static_cast<double>(x.rows()) + 8.0) *
                                  std::numeric_limits<double>::epsilon() *
                                  (1.0 + std::abs(a0));

        if (-slope <= resolution) {
            // predicted decrease is unmeasurable; take the pure Newton step
            theta += dir;
            logits = base + (x * theta) / eps;
            lse_val = lse(logits);
        } else {
            double step = 1.0;
            Vector cand;
            Vector cand_logits;
            double cand_lse = 0.0;
            while (true) {
                cand = theta + step * dir;
                cand_logits = base + (x * cand) / eps;
                cand_lse = lse(cand_logits);
                if (eps * cand_lse <= a0 + 1e-4 * step * slope + resolution)
                    break;
                step *= 0.5;
                if (step < 1e-16)
                    throw NoConvergence("solve_g_row: line search failed");
            }
            if (step == 1.0) {
                // expand while strictly improving: crosses the max-plus
                // plateaus that appear when eps is far below the cost scale
                double best_lse = cand_lse;
                for (double t = 2.0; t <= 1e12; t *= 2.0) {
                    const Vector wide = theta + t * dir;
                    const Vector wide_logits = base + (x * wide) / eps;
                    const double wide_lse = lse(wide_logits);
                    if (eps * wide_lse >
                            a0 + 1e-4 * t * slope + resolution ||
                        eps * wide_lse > eps * best_lse - resolution)
                        break;
                    cand = wide;
                    cand_logits = wide_logits;
                    best_lse = wide_lse;
                }
                cand_lse = best_lse;
            }
            theta = std::move(cand);
            logits = std::move(cand_logits);
            lse_val = cand_lse;
        }
        if (theta.norm() > opts.theta_max)
            throw ConstraintInfeasible(
                "solve_g_row: |theta| exceeded theta_max; 0 lies on or outside "
                "the convex hull of the covariate support");
    }
    throw NoConvergence("solve_g_row: inner_max_iter exhausted");
}

Vector g_row_base(const Problem& p, int row, const Vector& h) {
    return p.log_nu_weights() +
           (h - p.cost().row(row).transpose()) / p.epsilon();
}

void check_potentials(const Problem& p, const Potentials& pots,
                      const char* where) {
    if (pots.f.size() != p.n() || pots.h.size() != p.m() ||
        pots.g.rows() != p.n() || pots.g.cols() != p.dim_x())
        throw DimensionMismatch(std::string(where) + ": potential shapes");
    if (!pots.f.allFinite() || !pots.g.allFinite() || !pots.h.allFinite())
        throw DomainError(std::string(where) + ": non-finite potential entry");
}

void check_options(const SolverOptions& opts, const char* where) {
    if (!(opts.tol > 0.0) || opts.max_sweeps <= 0 || !(opts.inner_tol > 0.0) ||
        opts.inner_max_iter <= 0 || !(opts.theta_max > 0.0) ||
        !(opts.ridge > 0.0) || opts.threads < 1)
        throw DomainError(std::string(where) + ": options must be positive");
}

} // namespace

Potentials Potentials::zero(const Problem& p) {
    return {Vector::Zero(p.n()), Matrix::Zero(p.n(), p.dim_x()),
            Vector::Zero(p.m())};
}

Vector update_h(const Problem& p, const Vector& f, const Matrix& g) {
    Matrix t = -p.cost();
    if (p.dim_x() > 0) t.noalias() += g * p.covariates().transpose();
    t.colwise() += f;
    t /= p.epsilon();
    t.colwise() += p.log_mu_weights();
    Vector h(p.m());
    for (int j = 0; j < p.m(); ++j) h[j] = -p.epsilon() * lse(t.col(j));
    return h;
}

Vector update_f(const Problem& p, const Matrix& g, const Vector& h) {
    Matrix t = -p.cost();
    if (p.dim_x() > 0) t.noalias() += g * p.covariates().transpose();
    t.rowwise() += h.transpose();
    t /= p.epsilon();
    t.rowwise() += p.log_nu_weights().transpose();
    Vector f(p.n());
    for (int i = 0; i < p.n(); ++i) {
        const Vector row = t.row(i);
        f[i] = -p.epsilon() * lse(row);
    }
    return f;
}

Vector solve_g_row(const Problem& p, int row, const Vector& h,
                   const Vector& theta0, const SolverOptions& opts) {
    if (row < 0 || row >= p.n())
        throw DimensionMismatch("solve_g_row: row out of range");
    if (h.size() != p.m() || theta0.size() != p.dim_x())
        throw DimensionMismatch("solve_g_row: input sizes");
    check_options(opts, "solve_g_row");
    return newton_g_row(p.covariates(), g_row_base(p, row, h), p.epsilon(),
                        theta0, opts, p.covariate_scale())
        .theta;
}

Potentials sweep(const Problem& p, const Potentials& pots,
                 const SolverOptions& opts, std::vector<double>* dual_trace) {
    check_potentials(p, pots, "sweep");
    check_options(opts, "sweep");
    const int n = p.n();
    Potentials out = pots;
    const Vector h_snapshot = pots.h;

    auto run_rows = [&](int lo, int hi) {
        for (int i = lo; i < hi; ++i) {
            auto sol =
                newton_g_row(p.covariates(), g_row_base(p, i, h_snapshot),
                             p.epsilon(), pots.g.row(i), opts,
                             p.covariate_scale());
            out.g.row(i) = sol.theta.transpose();
            out.f[i] = -sol.log_partition;
        }
    };

    if (dual_trace) {
        for (int i = 0; i < n; ++i) {
            run_rows(i, i + 1);
            dual_trace->push_back(
                dual_value(p, Potentials{out.f, out.g, h_snapshot}));
        }
    } else if (opts.threads <= 1 || n < 2) {
        run_rows(0, n);
    } else {
        const int nthreads = std::min(opts.threads, n);
        std::vector<std::thread> workers;
        std::vector<std::exception_ptr> errors(nthreads);
        const int chunk = (n + nthreads - 1) / nthreads;
        for (int t = 0; t < nthreads; ++t) {
            const int lo = t * chunk;
            const int hi = std::min(lo + chunk, n);
            workers.emplace_back([&, lo, hi, t] {
                try {
                    run_rows(lo, hi);
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        }
        for (auto& w : workers) w.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    out.h = update_h(p, out.f, out.g);
    if (dual_trace) dual_trace->push_back(dual_value(p, out));
    return out;
}

Coupling coupling_from_potentials(const Problem& p, const Potentials& pots) {
    check_potentials(p, pots, "coupling_from_potentials");
    Matrix l = log_coupling(p, pots);
    if (l.maxCoeff() > 700.0)
        throw Overflow("coupling_from_potentials: log entry exceeds 700; "
                       "potentials are un-normalized");
    return {l.array().exp().matrix()};
}

double primal_value(const Problem& p, const Coupling& pi) {
    if (pi.pi.rows() != p.n() || pi.pi.cols() != p.m())
        throw DimensionMismatch("primal_value: coupling shape");
    const Vector& log_a = p.log_mu_weights();
    const Vector& log_b = p.log_nu_weights();
    double cost = 0.0;
    double kl = 0.0;
    for (int j = 0; j < p.m(); ++j) {
        for (int i = 0; i < p.n(); ++i) {
            const double w = pi.pi(i, j);
            if (w < 0.0)
                throw DomainError("primal_value: negative coupling entry");
            if (w == 0.0) continue;
            cost += w * p.cost()(i, j);
            kl += w * (std::log(w) - log_a[i] - log_b[j]);
        }
    }
    return cost + p.epsilon() * kl;
}

double dual_value(const Problem& p, const Potentials& pots) {
    check_potentials(p, pots, "dual_value");
    Matrix l = log_coupling(p, pots);
    if (l.maxCoeff() > 700.0)
        throw Overflow("dual_value: log entry exceeds 700");
    const double mass = l.array().exp().sum();
    return p.mu().weights().dot(pots.f) + p.nu().weights().dot(pots.h) -
           p.epsilon() * (mass - 1.0);
}

double duality_gap(const Problem& p, const Coupling& pi,
                   const Potentials& pots) {
    return primal_value(p, pi) - dual_value(p, pots);
}

Potentials gauge_fix(const Problem& p, const Potentials& pots) {
    check_potentials(p, pots, "gauge_fix");
    const double a = p.mu().weights().dot(pots.f);
    const Vector v = pots.g.transpose() * p.mu().weights();
    Potentials out;
    out.f = pots.f.array() - a;
    out.g = pots.g.rowwise() - v.transpose();
    out.h = pots.h.array() + a;
    if (p.dim_x() > 0) out.h += p.covariates() * v;
    return out;
}

Residuals compute_residuals(const Problem& p, const Coupling& pi,
                            const Potentials& pots) {
    Residuals res;
    const Vector rowsum = pi.pi.rowwise().sum();
    const Vector colsum = pi.pi.colwise().sum().transpose();
    res.marginal =
        std::max((rowsum - p.mu().weights()).cwiseAbs().maxCoeff(),
                 (colsum - p.nu().weights()).cwiseAbs().maxCoeff());

    double cond_mean_sup = 0.0;
    if (p.dim_x() > 0) {
        const Matrix row_x_mass = pi.pi * p.covariates(); // n x d_x
        res.mean_independence = row_x_mass.cwiseAbs().maxCoeff();
        cond_mean_sup =
            (row_x_mass.array().colwise() / p.mu().weights().array())
                .abs()
                .maxCoeff();
    }
    const Vector f_fixed = update_f(p, pots.g, pots.h);
    const Vector h_fixed = update_h(p, pots.f, pots.g);
    res.schrodinger =
        std::max({(pots.f - f_fixed).cwiseAbs().maxCoeff(),
                  (pots.h - h_fixed).cwiseAbs().maxCoeff(), cond_mean_sup});
    return res;
}

namespace {

double median_cost(const Problem& p) {
    std::vector<double> v(p.cost().data(), p.cost().data() + p.cost().size());
    auto mid = v.begin() + v.size() / 2;
    std::nth_element(v.begin(), mid, v.end());
    return *mid;
}

} // namespace

SolveResult solve(const Problem& p, const SolverOptions& opts) {
    return solve(p, opts, Potentials::zero(p));
}

SolveResult solve(const Problem& p, const SolverOptions& opts,
                  const Potentials& init) {
    check_potentials(p, init, "solve");
    check_options(opts, "solve");
    const ValidationReport val = validate_problem(p);
    if (!val.feasible) {
        std::string msg = "solve: infeasible problem";
        for (const auto& s : val.messages) msg += "; " + s;
        throw ConstraintInfeasible(msg);
    }
    if (p.epsilon() < 1e-6 * median_cost(p))
        std::cerr << "evqr: warning: epsilon is below 1e-6 x median cost; "
                     "sweep counts may explode\n";

    Potentials pots = init;
    bool converged = false;
    int sweeps = 0;
    const double delta_tol = opts.tol * (1.0 + p.epsilon());
    for (int s = 1; s <= opts.max_sweeps; ++s) {
        Potentials next = sweep(p, pots, opts);
        double delta = std::max(
            {(next.f - pots.f).cwiseAbs().maxCoeff(),
             (next.h - pots.h).cwiseAbs().maxCoeff(),
             p.dim_x() > 0 ? (next.g - pots.g).cwiseAbs().maxCoeff() : 0.0});
        pots = std::move(next);
        sweeps = s;

        if (delta >= delta_tol) continue;
        const Coupling pi = coupling_from_potentials(p, pots);
        const Residuals res = compute_residuals(p, pi, pots);
        if (res.marginal <= opts.tol && res.mean_independence <= opts.tol &&
            res.schrodinger <= 10.0 * opts.tol) {
            const double pv = primal_value(p, pi);
            const double gap = pv - dual_value(p, pots);
            const double gap_scale = 1.0 + std::abs(pv);
            if (gap <= opts.tol * gap_scale && gap >= -1e-10 * gap_scale) {
                converged = true;
                break;
            }
        }
    }

    SolveResult result;
    result.potentials = gauge_fix(p, pots);
    result.coupling = coupling_from_potentials(p, result.potentials);
    const Residuals res =
        compute_residuals(p, result.coupling, result.potentials);
    SolveReport& rep = result.report;
    rep.sweeps = sweeps;
    rep.primal_value = primal_value(p, result.coupling);
    rep.dual_value = dual_value(p, result.potentials);
    rep.duality_gap = rep.primal_value - rep.dual_value;
    rep.marginal_residual = res.marginal;
    rep.mean_indep_residual = res.mean_independence;
    rep.schrodinger_residual = res.schrodinger;
    const double gap_scale = 1.0 + std::abs(rep.primal_value);
    rep.converged = converged && rep.duality_gap <= opts.tol * gap_scale &&
                    rep.duality_gap >= -1e-10 * gap_scale;
    return result;
}

double extend_h(const Problem& p, const Potentials& pots, const Vector& x,
                const Vector& y) {
    check_potentials(p, pots, "extend_h");
    if (x.size() != p.dim_x() || y.size() != p.dim_y())
        throw DimensionMismatch("extend_h: point dimensions");
    Vector t(p.n());
    for (int i = 0; i < p.n(); ++i) {
        const double c = 0.5 * (p.mu().points().row(i).transpose() - y).squaredNorm();
        double gx = p.dim_x() > 0 ? pots.g.row(i).dot(x) : 0.0;
        t[i] = p.log_mu_weights()[i] + (pots.f[i] + gx - c) / p.epsilon();
    }
    return -p.epsilon() * lse(t);
}

namespace {

Vector extension_base(const Problem& p, const Potentials& pots,
                      const Vector& u) {
    Vector base(p.m());
    for (int j = 0; j < p.m(); ++j) {
        const double c =
            0.5 * (u - p.responses().row(j).transpose()).squaredNorm();
        base[j] = p.log_nu_weights()[j] + (pots.h[j] - c) / p.epsilon();
    }
    return base;
}

} // namespace

Vector extend_g(const Problem& p, const Potentials& pots, const Vector& u,
                const SolverOptions& opts) {
    check_potentials(p, pots, "extend_g");
    if (u.size() != p.dim_y())
        throw DimensionMismatch("extend_g: point dimension");
    return newton_g_row(p.covariates(), extension_base(p, pots, u),
                        p.epsilon(), Vector::Zero(p.dim_x()), opts,
                        p.covariate_scale())
        .theta;
}

double extend_f(const Problem& p, const Potentials& pots, const Vector& u,
                const SolverOptions& opts) {
    check_potentials(p, pots, "extend_f");
    if (u.size() != p.dim_y())
        throw DimensionMismatch("extend_f: point dimension");
    return -newton_g_row(p.covariates(), extension_base(p, pots, u),
                         p.epsilon(), Vector::Zero(p.dim_x()), opts,
                         p.covariate_scale())
                .log_partition;
}

} // namespace evqr
