#pragma once

// Monte Carlo experiment harness. Realizations are independent work items
// keyed by index, so serial and parallel execution produce identical output.

#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ccr/model.hpp"
#include "ccr/solver.hpp"

namespace ccr {

enum class SolverId { alg1, alg2, alg1_distributed, czf, pzf };
std::string_view to_string(SolverId s) noexcept;
SolverId parse_solver(std::string_view text);
std::vector<SolverId> parse_solver_list(std::string_view text);
bool is_optimal(SolverId s) noexcept;

enum class ExecPolicy { serial, parallel };

struct ExperimentConfig {
    SystemConfig sys;
    std::size_t realizations = 10000;
    std::uint64_t start_index = 0;
    RVector pbs_snr_db{4.0, 6.0, 8.0, 10.0, 12.0};
    RVector budget_db{0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0};
    RVector cu_rates{0.1, 0.5, 1.0, 1.5, 2.0};
    RVector xi2{0.0, 0.01, 0.02, 0.05, 0.1, 0.2};
    std::vector<SolverId> solvers{SolverId::alg2, SolverId::czf, SolverId::pzf};
    std::string out = "out";
    std::size_t attempt_cap = 1000;
    std::optional<double> gamma0p;  // overrides the rate-derived targets when set
    RVector gamma;
    bool nocoop_full_band = true;
    UpdateOrder alg1_order = UpdateOrder::gauss_seidel;
    ExecPolicy policy = ExecPolicy::parallel;

    /// Throws InvalidConfig on empty grids, zero realizations or a bad SystemConfig.
    void validate() const;
};

/// Applies one key=value setting. Keys mirror the field names; lists are
/// comma separated. Throws Parse on unknown keys or malformed values.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);
/// Flat "key = value" text with '#' comments.
ExperimentConfig parse_config(std::istream& in, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});

/// Runs body(i) for i in [0, n). Exceptions escaping body are rethrown
/// after the loop (the first by index).
void for_each_realization(std::size_t n, const std::function<void(std::size_t)>& body, ExecPolicy policy);

// ---------------------------------------------------------------------------
// per-realization solving

enum class InstanceClass { cooperation, mode_ii, infeasible };
std::string_view to_string(InstanceClass c) noexcept;

struct SolverOutcome {
    SolverId solver = SolverId::alg2;
    bool ok = false;
    double power = std::numeric_limits<double>::quiet_NaN();
    std::optional<ErrorKind> error;
    DownlinkSolution sol;
    std::size_t iterations = 0;
};

struct InstanceOutcome {
    std::uint64_t index = 0;
    InstanceClass cls = InstanceClass::mode_ii;
    std::vector<SolverOutcome> results;  // same order as the solver list

    const SolverOutcome* find(SolverId s) const;
};

Targets experiment_targets(const ExperimentConfig& cfg, const SystemConfig& sys, const ChannelSet& ch);

/// Solves one problem with one solver and recovers its downlink solution.
SolverOutcome run_solver(SolverId s, const ChannelSet& ch, const Targets& t, const StackedProblem& sp,
                         const ExperimentConfig& cfg);

InstanceOutcome solve_channels(const ExperimentConfig& cfg, const ChannelSet& ch, const Targets& t,
                               std::uint64_t index);
InstanceOutcome solve_realization(const ExperimentConfig& cfg, const SystemConfig& sys, std::uint64_t index);

struct RunSummary {
    std::size_t total = 0, cooperation = 0, mode_ii = 0, infeasible = 0;
    std::vector<std::pair<SolverId, std::size_t>> failures;
};
RunSummary summarize(const std::vector<InstanceOutcome>& outcomes, const std::vector<SolverId>& solvers);
void write_summary(std::ostream& out, const RunSummary& s, const std::string& label);

double to_db(double linear);
double from_db(double db);

/// Mean and standard error of a sample.
struct MeanSe {
    double mean = std::numeric_limits<double>::quiet_NaN();
    double se = std::numeric_limits<double>::quiet_NaN();
    std::size_t n = 0;
};
MeanSe mean_se(std::span<const double> x);

/// No-cooperation PU rate: log2(1 + P0 |h0p^H f|^2 / N1p) over the full band,
/// or half of it when the full-band switch is off.
double nocoop_rate(const ChannelSet& ch, bool full_band);

// ---------------------------------------------------------------------------
// commands

/// "# ccr-csv v1 command=<name> seed=<seed> realizations=<n>"
void write_csv_preamble(std::ostream& out, const std::string& command, const ExperimentConfig& cfg);

struct ConvergenceRow {
    std::string algorithm;
    std::size_t iter = 0;
    double rel_change = 0.0;
    double dual_objective = 0.0;
};
struct ConvergenceResult {
    std::uint64_t index = 0;
    std::size_t skipped = 0;
    std::vector<ConvergenceRow> rows;
};
ConvergenceResult cmd_convergence(const ExperimentConfig& cfg, const std::optional<ChannelSet>& input = {});
void write_convergence_csv(std::ostream& out, const ExperimentConfig& cfg, const ConvergenceResult& r);

/// outcomes[k][i]: grid point k, realization i.
struct GridResult {
    std::string axis_name;
    RVector axis;
    std::vector<SolverId> solvers;
    std::vector<std::vector<InstanceOutcome>> outcomes;

    /// Realizations at point k where every solver succeeded.
    std::vector<std::size_t> paired(std::size_t k) const;
    /// Mean of 10 log10(power) over the paired realizations.
    MeanSe mean_db(std::size_t k, SolverId s) const;
    /// 10 log10 of the mean linear power over the paired realizations.
    double db_of_mean(std::size_t k, SolverId s) const;
    /// Paired mean of power_db(a) - power_db(b).
    MeanSe paired_diff_db(std::size_t k, SolverId a, SolverId b) const;
};

GridResult cmd_sweep_pbs(const ExperimentConfig& cfg);
void write_sweep_csv(std::ostream& out, const ExperimentConfig& cfg, const GridResult& r);

GridResult cmd_cdf(const ExperimentConfig& cfg);
void write_cdf_csv(std::ostream& out, const ExperimentConfig& cfg, const GridResult& r);

struct OutageResult {
    RVector budget_db;
    SolverId solver = SolverId::alg2;
    std::vector<bool> nocoop_outage;  // per realization
    RVector coop_power;                // 0 when cooperation is not needed, +inf when infeasible
    RVector p_coop, p_nocoop;          // per budget
    RunSummary summary;
};
OutageResult cmd_outage(const ExperimentConfig& cfg);
void write_outage_csv(std::ostream& out, const ExperimentConfig& cfg, const OutageResult& r);

struct RobustnessResult {
    RVector xi2;
    std::vector<SolverId> solvers;
    /// rates[k][s][i]: achieved PU rate at error level k for solver s on used realization i.
    std::vector<std::vector<RVector>> rates;
    RVector nocoop;  // per used realization
    std::size_t used = 0;
    RunSummary summary;

    MeanSe mean_rate(std::size_t k, std::size_t s) const;
    /// Paired mean of rate(a) - rate(b) at level k.
    MeanSe paired_diff(std::size_t k, std::size_t a, std::size_t b) const;
};
RobustnessResult cmd_robustness(const ExperimentConfig& cfg);
void write_robustness_csv(std::ostream& out, const ExperimentConfig& cfg, const RobustnessResult& r);

struct EtaRow {
    std::uint64_t index = 0;
    std::size_t n_iter = 0;
    std::size_t messages = 0;
    std::size_t predicted = 0;
    double eta = 0.0;
    std::size_t full_csi = 0;  // 2 N M^2
};
struct EtaResult {
    std::vector<EtaRow> rows;
    RunSummary summary;
};
EtaResult cmd_eta(const ExperimentConfig& cfg);
void write_eta_csv(std::ostream& out, const ExperimentConfig& cfg, const EtaResult& r);

void write_solve_csv(std::ostream& out, const ExperimentConfig& cfg, const ChannelSet& ch, const InstanceOutcome& o);

}  // namespace ccr
