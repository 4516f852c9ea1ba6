// Command-line front end: validate / solve / gaussian / sweep / oracle.
// Exit codes: 0 success, 2 validation or feasibility failure,
// 3 convergence failure, 4 I/O or parse failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "evqr/io.hpp"
#include "evqr/oracle.hpp"

namespace {

using nlohmann::json;
using namespace evqr;

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 2;
constexpr int kExitNoConvergence = 3;
constexpr int kExitIo = 4;

struct RunConfig {
    double epsilon = 1.0;
    double tol = 1e-9;
    int max_sweeps = 10000;
    int threads = 1;
    unsigned int seed = 42;
    std::string out_coupling;
    std::string out_potentials;
    std::string report;
};

json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

json vector_json(const Vector& v) {
    return json(std::vector<double>(v.data(), v.data() + v.size()));
}

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw ParseError(path + ": cannot open file for writing");
    out << j.dump(2) << "\n";
}

// The h table goes next to the f,g table: "pots.csv" -> "pots_h.csv".
std::string h_path_for(const std::string& fg_path) {
    std::filesystem::path p(fg_path);
    const std::string ext = p.extension().string();
    p.replace_extension();
    return p.string() + "_h" + ext;
}

int cmd_validate(const std::string& mu_path, const std::string& nu_path) {
    const DiscreteMeasure mu = load_mu_csv(mu_path);
    auto [nu, dx] = load_nu_csv(nu_path);
    const Problem p(mu, nu, dx, 1.0);
    const ValidationReport rep = validate_problem(p);
    std::cout << "feasible: " << (rep.feasible ? "true" : "false") << "\n"
              << "x_mean_norm: " << format_double(rep.x_mean_norm) << "\n"
              << "x_second_moment_min_eig: "
              << format_double(rep.x_second_moment_min_eig) << "\n";
    for (const auto& msg : rep.messages) std::cout << "note: " << msg << "\n";
    return rep.feasible ? kExitOk : kExitInfeasible;
}

json config_json(const RunConfig& cfg, const std::string& mu_path,
                 const std::string& nu_path) {
    json j;
    j["mu"] = mu_path;
    j["nu"] = nu_path;
    j["epsilon"] = cfg.epsilon;
    j["tol"] = cfg.tol;
    j["max_sweeps"] = cfg.max_sweeps;
    j["threads"] = cfg.threads;
    j["seed"] = cfg.seed;
    return j;
}

int cmd_solve(const std::string& mu_path, const std::string& nu_path,
              const RunConfig& cfg) {
    const DiscreteMeasure mu = load_mu_csv(mu_path);
    auto [nu, dx] = load_nu_csv(nu_path);
    const Problem p(mu, nu, dx, cfg.epsilon);

    SolverOptions opts;
    opts.tol = cfg.tol;
    opts.max_sweeps = cfg.max_sweeps;
    opts.threads = cfg.threads;
    const SolveResult result = solve(p, opts);

    if (!cfg.out_coupling.empty())
        write_coupling_csv(cfg.out_coupling, result.coupling.pi);
    if (!cfg.out_potentials.empty())
        write_potentials_csv(cfg.out_potentials, h_path_for(cfg.out_potentials),
                             result.potentials);
    if (!cfg.report.empty()) {
        json j;
        j["config"] = config_json(cfg, mu_path, nu_path);
        json r;
        r["sweeps"] = result.report.sweeps;
        r["primal_value"] = result.report.primal_value;
        r["dual_value"] = result.report.dual_value;
        r["duality_gap"] = result.report.duality_gap;
        r["marginal_residual"] = result.report.marginal_residual;
        r["mean_indep_residual"] = result.report.mean_indep_residual;
        r["schrodinger_residual"] = result.report.schrodinger_residual;
        r["converged"] = result.report.converged;
        j["report"] = std::move(r);
        write_json(cfg.report, j);
    }
    return result.report.converged ? kExitOk : kExitNoConvergence;
}

int cmd_gaussian(const std::string& model_path, double epsilon,
                 unsigned int seed, const std::string& report_path) {
    const GaussianModel model = load_gaussian_model(model_path);
    const SymMatrix lambda = lambda_eps(model, epsilon);
    const GaussianCoupling coupling = optimal_gaussian_coupling(model, epsilon);
    const GaussianPotentials pots = gaussian_dual_potentials(model, epsilon);
    const PrecisionBlockResiduals prec = precision_blocks(coupling, epsilon);

    const int n = coupling.gamma.dim();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix points(100, n);
    for (Eigen::Index r = 0; r < points.rows(); ++r)
        for (Eigen::Index c = 0; c < points.cols(); ++c)
            points(r, c) = normal(rng);
    const double density_resid =
        log_density_identity_residual(model, epsilon, points);

    json j;
    j["config"] = {{"model", model_path},
                   {"epsilon", epsilon},
                   {"seed", seed}};
    j["lambda"] = matrix_json(lambda.mat());
    j["gamma"] = matrix_json(coupling.gamma.mat());
    j["mean"] = vector_json(coupling.mean);
    j["potentials"] = {{"f_quad", matrix_json(pots.f_quad())},
                       {"f_lin", vector_json(pots.f_lin())},
                       {"f_const", pots.f_const()},
                       {"g", matrix_json(pots.g_mat())},
                       {"h_quad", matrix_json(pots.h_quad().mat())},
                       {"h_shift", vector_json(pots.h_shift())}};
    j["residuals"] = {{"riccati", riccati_residual(model, lambda, epsilon)},
                      {"theta_uy", prec.theta_uy},
                      {"theta_uu", prec.theta_uu},
                      {"theta_xu", prec.theta_xu},
                      {"density_identity", density_resid}};
    if (!report_path.empty())
        write_json(report_path, j);
    else
        std::cout << j.dump(2) << "\n";
    return kExitOk;
}

int cmd_sweep(const std::string& model_path,
              const std::vector<double>& eps_grid,
              const std::string& out_path) {
    const GaussianModel model = load_gaussian_model(model_path);
    const auto rows = sweep_epsilon(model, eps_grid);
    write_sweep_csv(out_path, rows);
    return kExitOk;
}

int cmd_oracle(const std::string& mu_path, const std::string& nu_path,
               const RunConfig& cfg) {
    const DiscreteMeasure mu = load_mu_csv(mu_path);
    auto [nu, dx] = load_nu_csv(nu_path);
    const Problem p(mu, nu, dx, cfg.epsilon);

    SolverOptions opts;
    opts.tol = cfg.tol;
    opts.max_sweeps = cfg.max_sweeps;
    opts.threads = cfg.threads;
    const OracleCompareReport rep = oracle_compare(p, opts);
    const bool certified = rep.coupling_l1_gap <= 1e-6 &&
                           rep.value_gap <= 1e-8 &&
                           rep.potential_sup_gap <= 1e-6;
    json j;
    j["config"] = config_json(cfg, mu_path, nu_path);
    j["coupling_l1_gap"] = rep.coupling_l1_gap;
    j["value_gap"] = rep.value_gap;
    j["potential_sup_gap"] = rep.potential_sup_gap;
    j["certified"] = certified;
    if (!cfg.report.empty())
        write_json(cfg.report, j);
    else
        std::cout << j.dump(2) << "\n";
    return certified ? kExitOk : kExitNoConvergence;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Entropic vector quantile regression: discrete solver and "
                 "Gaussian closed forms"};
    app.require_subcommand(1);

    std::string mu_path, nu_path, model_path, out_path;
    double epsilon = 1.0;
    std::string eps_grid_str;
    RunConfig cfg;

    auto* validate = app.add_subcommand("validate", "Check the standing assumptions");
    validate->add_option("--mu", mu_path, "mu CSV")->required();
    validate->add_option("--nu", nu_path, "nu CSV")->required();

    auto* solve_cmd = app.add_subcommand("solve", "Run the dual block-coordinate solver");
    solve_cmd->add_option("--mu", mu_path, "mu CSV")->required();
    solve_cmd->add_option("--nu", nu_path, "nu CSV")->required();
    solve_cmd->add_option("--epsilon", cfg.epsilon, "regularization")->required();
    solve_cmd->add_option("--tol", cfg.tol, "outer tolerance");
    solve_cmd->add_option("--max-sweeps", cfg.max_sweeps, "sweep limit");
    solve_cmd->add_option("--threads", cfg.threads, "g-solve threads");
    solve_cmd->add_option("--seed", cfg.seed, "seed echoed into the report");
    solve_cmd->add_option("--out-coupling", cfg.out_coupling, "coupling CSV path");
    solve_cmd->add_option("--out-potentials", cfg.out_potentials,
                          "potentials CSV path (h goes to <stem>_h<ext>)");
    solve_cmd->add_option("--report", cfg.report, "report JSON path");

    auto* gaussian_cmd = app.add_subcommand("gaussian", "Closed-form Gaussian solution");
    gaussian_cmd->add_option("--model", model_path, "model JSON")->required();
    gaussian_cmd->add_option("--epsilon", epsilon, "regularization")->required();
    gaussian_cmd->add_option("--seed", cfg.seed, "seed for identity sample points");
    gaussian_cmd->add_option("--report", cfg.report, "report JSON path");

    auto* sweep_cmd = app.add_subcommand("sweep", "W2 expansion over an epsilon grid");
    sweep_cmd->add_option("--model", model_path, "model JSON")->required();
    sweep_cmd->add_option("--eps-grid", eps_grid_str, "comma-separated epsilons")->required();
    sweep_cmd->add_option("--out", out_path, "sweep CSV path")->required();

    auto* oracle_cmd = app.add_subcommand("oracle", "Certify against the dense Newton oracle");
    oracle_cmd->add_option("--mu", mu_path, "mu CSV")->required();
    oracle_cmd->add_option("--nu", nu_path, "nu CSV")->required();
    oracle_cmd->add_option("--epsilon", cfg.epsilon, "regularization")->required();
    auto* oracle_tol = oracle_cmd->add_option("--tol", cfg.tol, "solver tolerance");
    oracle_cmd->add_option("--report", cfg.report, "report JSON path");

    CLI11_PARSE(app, argc, argv);

    // certification gaps need a tighter solve than the general default
    if (app.got_subcommand(oracle_cmd) && oracle_tol->count() == 0)
        cfg.tol = 1e-11;

    try {
        if (app.got_subcommand(validate)) return cmd_validate(mu_path, nu_path);
        if (app.got_subcommand(solve_cmd)) return cmd_solve(mu_path, nu_path, cfg);
        if (app.got_subcommand(gaussian_cmd))
            return cmd_gaussian(model_path, epsilon, cfg.seed, cfg.report);
        if (app.got_subcommand(sweep_cmd)) {
            std::vector<double> grid;
            std::stringstream ss(eps_grid_str);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                if (tok.empty()) continue;
                try {
                    size_t used = 0;
                    const double v = std::stod(tok, &used);
                    if (used != tok.size()) throw std::invalid_argument(tok);
                    grid.push_back(v);
                } catch (const std::exception&) {
                    throw ParseError("--eps-grid: cannot parse '" + tok + "'");
                }
            }
            return cmd_sweep(model_path, grid, out_path);
        }
        if (app.got_subcommand(oracle_cmd)) return cmd_oracle(mu_path, nu_path, cfg);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const ConstraintInfeasible& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const NotPSD& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const SizeGuard& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const NoConvergence& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNoConvergence;
    } catch (const Overflow& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNoConvergence;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
