#pragma once

// Optimal solvers for the joint relay/transmit beamforming problem. Both
// algorithms work on the dual (virtual uplink) variables lambda, indexed as
// lambda[0] = relay/PU dual and lambda[m + 1] = CU m dual, and then map the
// converged uplink beams back to downlink powers.

#include <iosfwd>
#include <string>
#include <vector>

#include "ccr/model.hpp"

namespace ccr {

struct DualState {
    RVector lambda;

    static DualState zeros(std::size_t users) { return {RVector(users, 0.0)}; }
    double objective(const StackedProblem& sp) const { return dot(std::span<const double>(sp.noise), lambda); }
};

/// Unit-norm virtual-uplink receive beams.
struct BeamSet {
    std::vector<CVector> w;  // per CBS
    CVector v;               // stacked relay direction
};

/// Nonnegative system lambda >= D F lambda + D sigma encoding every uplink
/// SINR constraint for fixed beams.
struct CouplingMatrices {
    RMatrix F;
    RMatrix D;
    RVector sigma;
    RVector n;

    RMatrix DF() const { return matmul(D, F); }
    RVector Dsigma() const;
};

struct ConvergenceTrace {
    std::vector<RVector> lambdas;   // iterate 0 is the starting point
    std::vector<double> dual_objective;
    std::vector<double> err_ratio;  // filled by attach_error_ratios; NaN where undefined

    std::size_t size() const noexcept { return lambdas.size(); }
    void push(const RVector& lambda, const StackedProblem& sp);
};

/// ||lambda_{k+1} - lambda*|| / ||lambda_k - lambda*|| in the max norm.
void attach_error_ratios(ConvergenceTrace& trace, const DualState& lam_star);

/// CSV columns: iter, lambda_0..lambda_M, dual_objective, err_ratio
void write_trace_csv(std::ostream& out, const ConvergenceTrace& trace);

// ---------------------------------------------------------------------------
// alg1: fixed-point iteration on the standard interference functions

enum class UpdateOrder {
    gauss_seidel,  // CU duals from the incoming lambda, then the relay dual from the fresh CU duals
    jacobi,        // every entry from the incoming lambda
};

/// lambda_m <- gamma_m / (h_mm^H (I + lambda_0 h_m0 h_m0^H + sum_{n != m} lambda_n h_mn h_mn^H)^{-1} h_mm)
double cu_interference_function(std::size_t m, const RVector& lambda, const StackedProblem& sp);

/// alpha_j = ||g_j||^2 h_j0^H (lambda_0 Ns_j h_j0 h_j0^H + c_j I + sum_m lambda_m c_j h_jm h_jm^H)^{-1} h_j0,
/// with c_j = P0||g_j||^2 + Ns_j. Uses only CBS j's own channels.
double relay_alpha(std::size_t j, const RVector& lambda, const StackedProblem& sp);

/// lambda_0 <- gamma0' / sum_j alpha_j
double relay_interference_function(const RVector& lambda, const StackedProblem& sp);

DualState alg1_step(const DualState& lam, const StackedProblem& sp, UpdateOrder order = UpdateOrder::gauss_seidel);

struct Alg1Options {
    double tol = 1e-10;
    std::size_t cap = 100000;
    double ceiling = 1e12;
    UpdateOrder order = UpdateOrder::gauss_seidel;
};

struct Alg1Result {
    DualState lambda;
    ConvergenceTrace trace;
    std::size_t iterations = 0;
};

/// Iterates alg1_step from lambda = 0 until the max-norm relative change
/// drops below tol. Throws Diverged past the ceiling or the cap.
Alg1Result alg1_solve(const StackedProblem& sp, const Alg1Options& opts = {});

// ---------------------------------------------------------------------------
// Distributed alg1: every CBS keeps only its own CSI and exchanges
// scalars once per round.

struct LocalView {
    std::size_t index = 0;
    std::vector<CVector> h;  // h_j0 .. h_jM
    CVector g;
    double ns = 1.0;
    double p0 = 1.0;
    double cu_noise = 1.0;
    double gamma = 0.0;
};

struct DistributedProblem {
    std::vector<LocalView> nodes;
    double gamma0p = 0.0;
    double n2p = 1.0;
};

DistributedProblem make_local_views(const ChannelSet& ch, const Targets& t);

struct Message {
    std::size_t round = 0;
    std::string node;
    std::string scalar_name;
    double value = 0.0;
    std::size_t cumulative_count = 0;
};

struct MessageLog {
    std::vector<Message> records;
    std::size_t rounds = 0;

    std::size_t count() const noexcept { return records.size(); }
    void post(std::size_t round, std::string node, std::string name, double value);
};

/// CSV columns: round, node, scalar_name, value, cumulative_count
void write_message_log_csv(std::ostream& out, const MessageLog& log);

struct DistributedResult {
    DualState lambda;
    MessageLog log;
    ConvergenceTrace trace;
    std::size_t iterations = 0;  // N_I
    RMatrix conversion;          // (I - D F^T)^{-1} D shared after convergence
};

DistributedResult alg1_distributed_solve(const DistributedProblem& problem, const Alg1Options& opts = {});

/// (2 N_I M + (M+1)^2) / (2 N M^2)
double signaling_ratio(std::size_t n_iter, std::size_t M, std::size_t N);
std::size_t distributed_message_count(std::size_t n_iter, std::size_t M);

// ---------------------------------------------------------------------------
// alg2: virtual uplink matrix iteration

/// MMSE receive beams for the dual powers lambda, normalized.
BeamSet uplink_beams(const DualState& lam, const StackedProblem& sp);

CouplingMatrices coupling_matrices(const BeamSet& beams, const StackedProblem& sp);

/// (M+2)x(M+2) extended matrix whose Perron pair solves the budget-constrained
/// SINR balancing problem for fixed beams.
RMatrix extended_balancing_matrix(const CouplingMatrices& cm, double budget);

struct FeasibleInit {
    double C = 0.0;  // +inf when every target is zero
    DualState lambda;
    BeamSet beams;
    std::size_t iterations = 0;
};

FeasibleInit alg2_feasible_init(const StackedProblem& sp, double budget, double tol = 1e-10, std::size_t cap = 1000);

/// 1e6 times the sum of the noise powers.
double default_probe_budget(const StackedProblem& sp);

struct Alg2Options {
    double tol = 1e-10;
    std::size_t cap = 1000;
    double probe_budget = 0.0;  // <= 0 selects default_probe_budget
};

struct Alg2Result {
    DualState lambda;
    BeamSet beams;
    ConvergenceTrace trace;
    FeasibleInit init;
    std::size_t iterations = 0;
};

/// lambda <- (I - DF)^{-1} D sigma, beams <- uplink_beams(lambda) until the
/// relative change in lambda drops below tol. Throws Infeasible when the
/// balancing initialization reports C < 1.
Alg2Result alg2_solve(const StackedProblem& sp, const Alg2Options& opts = {});

/// One matrix-form Algorithm-1 power update for fixed beams: D F lambda + D sigma.
RVector fixed_beam_fixed_point_step(const RVector& lambda, const CouplingMatrices& cm);
/// One Algorithm-2 power update for fixed beams: (I - DF)^{-1} D sigma.
RVector fixed_beam_matrix_step(const CouplingMatrices& cm);

/// Downlink powers from the tight constraints, p = (I - D F^T)^{-1} D n,
/// and v = sqrt(p0) v~, w_m = sqrt(p_m) w~_m.
DownlinkSolution recover_downlink(const DualState& lam, const BeamSet& beams, const StackedProblem& sp);

// ---------------------------------------------------------------------------
// diagnostics

struct ConvergenceOrder {
    enum class Kind { linear, superlinear } kind = Kind::linear;
    double rate = 0.0;  // asymptotic ratio for linear, last observed ratio otherwise
};

/// Classifies an error sequence e_0, e_1, ... (already measured against the
/// limit). Throws Inconclusive with fewer than 5 usable terms.
ConvergenceOrder classify_errors(std::span<const double> errors, double floor);

ConvergenceOrder convergence_order(const ConvergenceTrace& trace, const DualState& lam_star);

/// Spectral radius of D F built from the MMSE beams at lam.
double coupling_spectral_radius(const DualState& lam, const StackedProblem& sp);

}  // namespace ccr
