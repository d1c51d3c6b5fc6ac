#pragma once

// Independent checks used by tests and the acceptance runs. Nothing here is
// called on a solve path.

#include <iosfwd>

#include "ccr/solver.hpp"

namespace ccr {

struct KktReport {
    RVector slack;       // achieved / target - 1 per constraint (0 = PU relay, m + 1 = CU m)
    RVector lmi_margin;  // 1 - lambda_u * (own-signal quadratic form) / target; >= 0 means the dual LMI holds
    double gap = 0.0;    // |n^T lambda - total downlink power| / total downlink power
    double orthogonality_residual = 0.0;  // transmit-ZF residual of the beams (only meaningful for ZF outputs)

    double max_abs_slack() const;
    double min_margin() const;
};

/// Never throws on bad inputs; non-finite quantities are reported as NaN.
KktReport kkt_verify(const DownlinkSolution& sol, const DualState& lam, const StackedProblem& sp,
                     const ChannelSet* ch = nullptr);

/// CSV columns: constraint, slack, margin (plus a trailing gap row)
void write_kkt_csv(std::ostream& out, const KktReport& rep);

struct ScalarParams {
    double gamma0p = 0.1;
    double gamma1 = 1.0;
    double h10 = 1.0;  // |h_10|^2
    double h11 = 1.0;  // |h_11|^2
    double g2 = 1.0;   // |g_1|^2
    double P0 = 1.0;
    double Ns = 1.0;
    double N2p = 1.0;
    double N1 = 1.0;
};

struct ScalarSolution {
    RVector lambda;  // (lambda_0, lambda_1)
    RVector p;       // (p_0, p_1) on the unit directions
    double total = 0.0;
};

/// Exact fixed point of the M = N = 1 problem. Throws InfeasibleScalar when
/// the PU target is beyond what any relay power reaches.
ScalarSolution scalar_closed_form(const ScalarParams& params);

/// Brute-force minimum-power search over the powers of fixed unit
/// directions (M <= 2). Enumerates all but the last coordinate on a log grid
/// spanning [1e-4, 1e4] x a noise-limited estimate, refines around the best
/// cell, and takes the smallest last coordinate meeting its own constraint.
/// Throws NoFeasibleGridPoint if no grid point meets every constraint.
RVector grid_power_search(const BeamSet& directions, const StackedProblem& sp, std::size_t resolution = 1000,
                          std::size_t refinements = 3);

}  // namespace ccr
