#ifndef EVQR_ORACLE_HPP
#define EVQR_ORACLE_HPP

#include "evqr/solver.hpp"

namespace evqr {

// Certified solution from the dense full-Hessian Newton method. The dual
// triple is carried along so that callers can compare gauge-fixed
// potentials against the block-coordinate path.
struct OracleResult {
    Coupling pi;
    double value = 0.0;        // dual objective at the solution
    double kkt_residual = 0.0; // max-norm over marginal and conditional-mean defects
    Potentials potentials;
};

// Maximizes the full dual over the stacked (f, g, h) with the gauge rows
// sum_i a_i f_i = 0 and sum_i a_i g_i = 0 pinned inside the KKT system,
// by damped Newton on the complete Hessian. A single global second-order
// method, independent of the block-coordinate sweep. Guarded to n*m <= 200.
OracleResult oracle_solve(const Problem& p);

struct OracleCompareReport {
    double coupling_l1_gap = 0.0;
    double value_gap = 0.0; // relative dual-value gap
    double potential_sup_gap = 0.0;
};

// Runs both solvers and reports the coupling L1 gap, the relative
// dual-value gap, and the sup gap of gauge-fixed potentials.
OracleCompareReport oracle_compare(const Problem& p,
                                   const SolverOptions& opts = {});

} // namespace evqr

#endif // EVQR_ORACLE_HPP
