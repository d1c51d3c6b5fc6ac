#include "ccr/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "ccr/rng.hpp"
#include "ccr/zeroforcing.hpp"

namespace ccr {

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw Error(ErrorKind::Parse, key + ": not a number: '" + t + "'");
    return v;
}

std::uint64_t parse_uint(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw Error(ErrorKind::Parse, key + ": not an unsigned integer: '" + t + "'");
    return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    throw Error(ErrorKind::Parse, key + ": not a boolean: '" + t + "'");
}

std::vector<std::string> split(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

RVector parse_list(const std::string& key, const std::string& text) {
    RVector out;
    for (const auto& s : split(text)) out.push_back(parse_double(key, s));
    return out;
}

void need(bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorKind::InvalidConfig, what);
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view to_string(SolverId s) noexcept {
    switch (s) {
        case SolverId::alg1: return "alg1";
        case SolverId::alg2: return "alg2";
        case SolverId::alg1_distributed: return "alg1-distributed";
        case SolverId::czf: return "czf";
        case SolverId::pzf: return "pzf";
    }
    return "?";
}

SolverId parse_solver(std::string_view text) {
    for (auto s : {SolverId::alg1, SolverId::alg2, SolverId::alg1_distributed, SolverId::czf, SolverId::pzf})
        if (text == to_string(s)) return s;
    throw Error(ErrorKind::Parse, "unknown solver '" + std::string(text) + "'");
}

std::vector<SolverId> parse_solver_list(std::string_view text) {
    std::vector<SolverId> out;
    for (const auto& s : split(std::string(text))) {
        const SolverId id = parse_solver(s);
        if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
    }
    if (out.empty()) throw Error(ErrorKind::Parse, "empty solver list");
    return out;
}

bool is_optimal(SolverId s) noexcept { return s == SolverId::alg1 || s == SolverId::alg2 || s == SolverId::alg1_distributed; }

std::string_view to_string(InstanceClass c) noexcept {
    switch (c) {
        case InstanceClass::cooperation: return "cooperation";
        case InstanceClass::mode_ii: return "mode-ii";
        case InstanceClass::infeasible: return "infeasible";
    }
    return "?";
}

void ExperimentConfig::validate() const {
    sys.validate();
    need(realizations >= 1, "realizations must be >= 1");
    need(!pbs_snr_db.empty(), "pbs_snr_db grid is empty");
    need(!budget_db.empty(), "budget_db grid is empty");
    need(!cu_rates.empty(), "cu_rates grid is empty");
    need(!xi2.empty(), "xi2 grid is empty");
    need(!solvers.empty(), "solver list is empty");
    need(attempt_cap >= 1, "attempt_cap must be >= 1");
    for (double r : cu_rates) need(r >= 0.0, "cu_rates must be >= 0");
    for (double x : xi2) need(x >= 0.0, "xi2 must be >= 0");
    if (!gamma.empty()) need(gamma.size() == sys.M, "gamma override needs M entries");
}

void apply_setting(ExperimentConfig& cfg, const std::string& raw_key, const std::string& value) {
    const std::string key = trim(raw_key);
    SystemConfig& s = cfg.sys;
    if (key == "K") s.K = parse_uint(key, value);
    else if (key == "M") s.M = parse_uint(key, value);
    else if (key == "N") s.N = parse_uint(key, value);
    else if (key == "P0") s.P0 = parse_double(key, value);
    else if (key == "N1p") s.N1p = parse_double(key, value);
    else if (key == "N2p") s.N2p = parse_double(key, value);
    else if (key == "Ns") s.Ns = parse_list(key, value);
    else if (key == "Nm") s.Nm = parse_list(key, value);
    else if (key == "r0") s.r0 = parse_double(key, value);
    else if (key == "r") s.r = parse_list(key, value);
    else if (key == "r_cu") s.r_cu = parse_double(key, value);
    else if (key == "alpha") s.alpha = parse_double(key, value);
    else if (key == "d_pbs_pu") s.d.pbs_pu = parse_double(key, value);
    else if (key == "d_pbs_cbs") s.d.pbs_cbs = parse_double(key, value);
    else if (key == "d_cbs_pu") s.d.cbs_pu = parse_double(key, value);
    else if (key == "d_cbs_cu") s.d.cbs_cu = parse_double(key, value);
    else if (key == "fading") s.fading = parse_fading_mode(trim(value));
    else if (key == "seed") s.seed = parse_uint(key, value);
    else if (key == "realizations") cfg.realizations = parse_uint(key, value);
    else if (key == "start_index") cfg.start_index = parse_uint(key, value);
    else if (key == "pbs_snr_db") cfg.pbs_snr_db = parse_list(key, value);
    else if (key == "budget_db") cfg.budget_db = parse_list(key, value);
    else if (key == "cu_rates") cfg.cu_rates = parse_list(key, value);
    else if (key == "xi2") cfg.xi2 = parse_list(key, value);
    else if (key == "solvers") cfg.solvers = parse_solver_list(value);
    else if (key == "out") cfg.out = trim(value);
    else if (key == "attempt_cap") cfg.attempt_cap = parse_uint(key, value);
    else if (key == "gamma0p") cfg.gamma0p = parse_double(key, value);
    else if (key == "gamma") cfg.gamma = parse_list(key, value);
    else if (key == "nocoop_full_band") cfg.nocoop_full_band = parse_bool(key, value);
    else if (key == "alg1_order") {
        const std::string v = trim(value);
        if (v == "gauss-seidel" || v == "gauss_seidel") cfg.alg1_order = UpdateOrder::gauss_seidel;
        else if (v == "jacobi") cfg.alg1_order = UpdateOrder::jacobi;
        else throw Error(ErrorKind::Parse, "alg1_order: expected gauss-seidel or jacobi");
    } else if (key == "parallel") cfg.policy = parse_bool(key, value) ? ExecPolicy::parallel : ExecPolicy::serial;
    else throw Error(ErrorKind::Parse, "unknown config key '" + key + "'");
}

ExperimentConfig parse_config(std::istream& in, ExperimentConfig cfg) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorKind::Parse, "line " + std::to_string(lineno) + ": expected key = value");
        apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Parse, "cannot open config file " + path);
    return parse_config(in, std::move(base));
}

void for_each_realization(std::size_t n, const std::function<void(std::size_t)>& body, ExecPolicy policy) {
    std::vector<std::exception_ptr> errors(n);
    const auto count = static_cast<std::ptrdiff_t>(n);
    if (policy == ExecPolicy::parallel) {
#pragma omp parallel for schedule(dynamic, 8)
        for (std::ptrdiff_t i = 0; i < count; ++i) {
            try {
                body(static_cast<std::size_t>(i));
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    } else {
        for (std::ptrdiff_t i = 0; i < count; ++i) {
            try {
                body(static_cast<std::size_t>(i));
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------------------

const SolverOutcome* InstanceOutcome::find(SolverId s) const {
    for (const auto& r : results)
        if (r.solver == s) return &r;
    return nullptr;
}

Targets experiment_targets(const ExperimentConfig& cfg, const SystemConfig& sys, const ChannelSet& ch) {
    Targets t = gamma_targets(sys, ch);
    if (cfg.gamma0p) t.gamma0p = *cfg.gamma0p;
    if (!cfg.gamma.empty()) t.gamma = cfg.gamma;
    return t;
}

SolverOutcome run_solver(SolverId s, const ChannelSet& ch, const Targets& t, const StackedProblem& sp,
                         const ExperimentConfig& cfg) {
    SolverOutcome out;
    out.solver = s;
    try {
        Alg1Options o1;
        o1.order = cfg.alg1_order;
        switch (s) {
            case SolverId::alg1: {
                const Alg1Result r = alg1_solve(sp, o1);
                out.sol = recover_downlink(r.lambda, uplink_beams(r.lambda, sp), sp);
                out.iterations = r.iterations;
                break;
            }
            case SolverId::alg2: {
                const Alg2Result r = alg2_solve(sp);
                out.sol = recover_downlink(r.lambda, r.beams, sp);
                out.iterations = r.iterations;
                break;
            }
            case SolverId::alg1_distributed: {
                const DistributedResult r = alg1_distributed_solve(make_local_views(ch, t), o1);
                out.sol = recover_downlink(r.lambda, uplink_beams(r.lambda, sp), sp);
                out.iterations = r.iterations;
                break;
            }
            case SolverId::czf: out.sol = czf_solve(ch, t, sp); break;
            case SolverId::pzf: out.sol = pzf_solve(ch, t, sp); break;
        }
        out.power = total_power(out.sol, sp);
        out.ok = std::isfinite(out.power);
    } catch (const Error& e) {
        out.ok = false;
        out.error = e.kind();
    }
    return out;
}

InstanceOutcome solve_channels(const ExperimentConfig& cfg, const ChannelSet& ch, const Targets& t,
                               std::uint64_t index) {
    InstanceOutcome o;
    o.index = index;
    if (!(t.gamma0p > 0.0)) {
        o.cls = InstanceClass::mode_ii;
        for (SolverId s : cfg.solvers) o.results.push_back({s, false, std::numeric_limits<double>::quiet_NaN(),
                                                            ErrorKind::ModeII, {}, 0});
        return o;
    }
    StackedProblem sp;
    try {
        sp = build_stacked(ch, t);
    } catch (const Error& e) {
        o.cls = InstanceClass::infeasible;
        for (SolverId s : cfg.solvers)
            o.results.push_back({s, false, std::numeric_limits<double>::quiet_NaN(), e.kind(), {}, 0});
        return o;
    }
    bool all = true;
    for (SolverId s : cfg.solvers) {
        o.results.push_back(run_solver(s, ch, t, sp, cfg));
        all = all && o.results.back().ok;
    }
    o.cls = all ? InstanceClass::cooperation : InstanceClass::infeasible;
    return o;
}

InstanceOutcome solve_realization(const ExperimentConfig& cfg, const SystemConfig& sys, std::uint64_t index) {
    const ChannelSet ch = generate_instance(sys, index);
    return solve_channels(cfg, ch, experiment_targets(cfg, sys, ch), index);
}

RunSummary summarize(const std::vector<InstanceOutcome>& outcomes, const std::vector<SolverId>& solvers) {
    RunSummary s;
    s.total = outcomes.size();
    for (SolverId id : solvers) s.failures.emplace_back(id, 0);
    for (const auto& o : outcomes) {
        switch (o.cls) {
            case InstanceClass::cooperation: ++s.cooperation; break;
            case InstanceClass::mode_ii: ++s.mode_ii; break;
            case InstanceClass::infeasible: ++s.infeasible; break;
        }
        if (o.cls == InstanceClass::mode_ii) continue;
        for (std::size_t k = 0; k < solvers.size(); ++k) {
            const SolverOutcome* r = o.find(solvers[k]);
            if (r && !r->ok) ++s.failures[k].second;
        }
    }
    return s;
}

void write_summary(std::ostream& out, const RunSummary& s, const std::string& label) {
    out << label << ": total=" << s.total << " cooperation=" << s.cooperation << " mode_ii=" << s.mode_ii
        << " infeasible=" << s.infeasible;
    if (s.total > 0) out << " exclusion_rate=" << fmt(static_cast<double>(s.total - s.cooperation) / s.total);
    for (const auto& [id, n] : s.failures) out << " fail_" << to_string(id) << '=' << n;
    out << '\n';
}

double to_db(double linear) { return 10.0 * std::log10(linear); }
double from_db(double db) { return std::pow(10.0, db / 10.0); }

MeanSe mean_se(std::span<const double> x) {
    MeanSe r;
    r.n = x.size();
    if (x.empty()) return r;
    double sum = 0.0;
    for (double v : x) sum += v;
    r.mean = sum / static_cast<double>(x.size());
    if (x.size() < 2) {
        r.se = 0.0;
        return r;
    }
    double ss = 0.0;
    for (double v : x) ss += (v - r.mean) * (v - r.mean);
    r.se = std::sqrt(ss / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()));
    return r;
}

double nocoop_rate(const ChannelSet& ch, bool full_band) {
    const double r = std::log2(1.0 + ch.P0 * ch.direct_gain());
    return full_band ? r : 0.5 * r;
}

void write_csv_preamble(std::ostream& out, const std::string& command, const ExperimentConfig& cfg) {
    out << "# ccr-csv v1 command=" << command << " seed=" << cfg.sys.seed << " realizations=" << cfg.realizations
        << " K=" << cfg.sys.K << " M=" << cfg.sys.M << " N=" << cfg.sys.N << " fading=" << to_string(cfg.sys.fading)
        << '\n';
}

// ---------------------------------------------------------------------------
// convergence

namespace {

void append_rows(std::vector<ConvergenceRow>& rows, const std::string& name, const ConvergenceTrace& trace) {
    for (std::size_t k = 1; k < trace.size(); ++k) {
        const double prev = trace.dual_objective[k - 1], cur = trace.dual_objective[k];
        const double diff = std::abs(cur - prev);
        const double rel = cur == 0.0 ? (diff == 0.0 ? 0.0 : 1.0) : diff / cur;
        rows.push_back({name, k, rel, cur});
    }
}

}  // namespace

ConvergenceResult cmd_convergence(const ExperimentConfig& cfg, const std::optional<ChannelSet>& input) {
    ConvergenceResult res;
    Alg1Options o1;
    o1.order = cfg.alg1_order;
    for (std::size_t attempt = 0; attempt < (input ? 1 : cfg.attempt_cap); ++attempt) {
        const std::uint64_t index = cfg.start_index + attempt;
        const ChannelSet ch = input ? *input : generate_instance(cfg.sys, index);
        const Targets t = experiment_targets(cfg, cfg.sys, ch);
        try {
            const bool all_zero =
                t.gamma0p == 0.0 && std::all_of(t.gamma.begin(), t.gamma.end(), [](double g) { return g == 0.0; });
            StackedProblem sp;
            if (all_zero) {
                // Vacuous constraints: the solvers reach the zero optimum directly.
                sp = build_stacked(ch, {1.0, t.gamma});
                sp.targets = t;
            } else {
                sp = build_stacked(ch, t);
            }
            const Alg1Result a1 = alg1_solve(sp, o1);
            const Alg2Result a2 = alg2_solve(sp);
            res.index = index;
            append_rows(res.rows, "alg1", a1.trace);
            append_rows(res.rows, "alg2", a2.trace);
            return res;
        } catch (const Error&) {
            ++res.skipped;
        }
    }
    throw Error(ErrorKind::NoFeasibleInstance,
                "no feasible instance within " + std::to_string(input ? 1 : cfg.attempt_cap) + " attempts");
}

void write_convergence_csv(std::ostream& out, const ExperimentConfig& cfg, const ConvergenceResult& r) {
    write_csv_preamble(out, "convergence", cfg);
    out << "# realization=" << r.index << " skipped=" << r.skipped << '\n';
    out << "algorithm,iter,rel_change,dual_objective\n";
    for (const auto& row : r.rows)
        out << row.algorithm << ',' << row.iter << ',' << fmt(row.rel_change) << ',' << fmt(row.dual_objective) << '\n';
}

// ---------------------------------------------------------------------------
// grids

std::vector<std::size_t> GridResult::paired(std::size_t k) const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < outcomes[k].size(); ++i)
        if (outcomes[k][i].cls == InstanceClass::cooperation) idx.push_back(i);
    return idx;
}

MeanSe GridResult::mean_db(std::size_t k, SolverId s) const {
    RVector x;
    for (std::size_t i : paired(k)) x.push_back(to_db(outcomes[k][i].find(s)->power));
    return mean_se(x);
}

double GridResult::db_of_mean(std::size_t k, SolverId s) const {
    RVector x;
    for (std::size_t i : paired(k)) x.push_back(outcomes[k][i].find(s)->power);
    return to_db(mean_se(x).mean);
}

MeanSe GridResult::paired_diff_db(std::size_t k, SolverId a, SolverId b) const {
    RVector x;
    for (std::size_t i : paired(k))
        x.push_back(to_db(outcomes[k][i].find(a)->power) - to_db(outcomes[k][i].find(b)->power));
    return mean_se(x);
}

namespace {

std::vector<InstanceOutcome> run_point(const ExperimentConfig& cfg, const SystemConfig& sys) {
    std::vector<InstanceOutcome> out(cfg.realizations);
    for_each_realization(
        cfg.realizations, [&](std::size_t i) { out[i] = solve_realization(cfg, sys, cfg.start_index + i); },
        cfg.policy);
    // Solutions are not needed downstream of the grid commands.
    for (auto& o : out)
        for (auto& r : o.results) r.sol = {};
    return out;
}

}  // namespace

GridResult cmd_sweep_pbs(const ExperimentConfig& cfg) {
    cfg.validate();
    GridResult r;
    r.axis_name = "pbs_snr_db";
    r.axis = cfg.pbs_snr_db;
    r.solvers = cfg.solvers;
    for (double db : cfg.pbs_snr_db) {
        SystemConfig sys = cfg.sys;
        sys.P0 = from_db(db);
        r.outcomes.push_back(run_point(cfg, sys));
    }
    return r;
}

GridResult cmd_cdf(const ExperimentConfig& cfg) {
    cfg.validate();
    GridResult r;
    r.axis_name = "cu_rate";
    r.axis = cfg.cu_rates;
    r.solvers = cfg.solvers;
    for (double rate : cfg.cu_rates) {
        SystemConfig sys = cfg.sys;
        sys.r.clear();
        sys.r_cu = rate;
        r.outcomes.push_back(run_point(cfg, sys));
    }
    return r;
}

namespace {

void write_grid_summaries(std::ostream& out, const GridResult& r) {
    for (std::size_t k = 0; k < r.axis.size(); ++k) {
        std::ostringstream label;
        label << "# " << r.axis_name << '=' << fmt(r.axis[k]);
        write_summary(out, summarize(r.outcomes[k], r.solvers), label.str());
    }
}

}  // namespace

void write_sweep_csv(std::ostream& out, const ExperimentConfig& cfg, const GridResult& r) {
    write_csv_preamble(out, "sweep-pbs", cfg);
    write_grid_summaries(out, r);
    out << "pbs_snr_db,solver,n_used,mean_power_db,se_power_db,power_db_of_mean,total,cooperation,mode_ii,"
           "infeasible\n";
    for (std::size_t k = 0; k < r.axis.size(); ++k) {
        const RunSummary s = summarize(r.outcomes[k], r.solvers);
        for (SolverId id : r.solvers) {
            const MeanSe m = r.mean_db(k, id);
            out << fmt(r.axis[k]) << ',' << to_string(id) << ',' << m.n << ',' << fmt(m.mean) << ',' << fmt(m.se)
                << ',' << fmt(r.db_of_mean(k, id)) << ',' << s.total << ',' << s.cooperation << ',' << s.mode_ii
                << ',' << s.infeasible << '\n';
        }
    }
}

void write_cdf_csv(std::ostream& out, const ExperimentConfig& cfg, const GridResult& r) {
    write_csv_preamble(out, "cdf", cfg);
    write_grid_summaries(out, r);
    out << "cu_rate,solver,rank,power_db,cdf,realization\n";
    for (std::size_t k = 0; k < r.axis.size(); ++k) {
        const auto idx = r.paired(k);
        for (SolverId id : r.solvers) {
            std::vector<std::pair<double, std::uint64_t>> samples;
            for (std::size_t i : idx) samples.emplace_back(to_db(r.outcomes[k][i].find(id)->power), r.outcomes[k][i].index);
            std::sort(samples.begin(), samples.end());
            for (std::size_t q = 0; q < samples.size(); ++q)
                out << fmt(r.axis[k]) << ',' << to_string(id) << ',' << q + 1 << ',' << fmt(samples[q].first) << ','
                    << fmt(static_cast<double>(q + 1) / samples.size()) << ',' << samples[q].second << '\n';
        }
    }
}

// ---------------------------------------------------------------------------
// outage

OutageResult cmd_outage(const ExperimentConfig& cfg) {
    cfg.validate();
    OutageResult r;
    r.budget_db = cfg.budget_db;
    r.solver = SolverId::alg2;
    for (SolverId s : cfg.solvers)
        if (is_optimal(s)) {
            r.solver = s;
            break;
        }
    ExperimentConfig one = cfg;
    one.solvers = {r.solver};

    const std::size_t n = cfg.realizations;
    std::vector<InstanceOutcome> outcomes(n);
    std::vector<char> nocoop(n);
    for_each_realization(
        n,
        [&](std::size_t i) {
            const std::uint64_t index = cfg.start_index + i;
            const ChannelSet ch = generate_instance(cfg.sys, index);
            nocoop[i] = nocoop_rate(ch, cfg.nocoop_full_band) < cfg.sys.r0;
            outcomes[i] = solve_channels(one, ch, experiment_targets(cfg, cfg.sys, ch), index);
            outcomes[i].results.front().sol = {};
        },
        cfg.policy);

    r.summary = summarize(outcomes, one.solvers);
    for (std::size_t i = 0; i < n; ++i) {
        r.nocoop_outage.push_back(nocoop[i] != 0);
        const auto& o = outcomes[i];
        if (o.cls == InstanceClass::mode_ii) r.coop_power.push_back(0.0);
        else if (o.cls == InstanceClass::infeasible) r.coop_power.push_back(std::numeric_limits<double>::infinity());
        else r.coop_power.push_back(o.results.front().power);
    }
    double base = 0.0;
    for (bool b : r.nocoop_outage) base += b;
    for (double db : r.budget_db) {
        const double budget = from_db(db);
        double out = 0.0;
        for (std::size_t i = 0; i < n; ++i) out += r.nocoop_outage[i] && r.coop_power[i] > budget;
        r.p_coop.push_back(out / static_cast<double>(n));
        r.p_nocoop.push_back(base / static_cast<double>(n));
    }
    return r;
}

void write_outage_csv(std::ostream& out, const ExperimentConfig& cfg, const OutageResult& r) {
    write_csv_preamble(out, "outage", cfg);
    write_summary(out, r.summary, "# " + std::string(to_string(r.solver)));
    out << "budget_db,p_out_coop,p_out_nocoop\n";
    for (std::size_t k = 0; k < r.budget_db.size(); ++k)
        out << fmt(r.budget_db[k]) << ',' << fmt(r.p_coop[k]) << ',' << fmt(r.p_nocoop[k]) << '\n';
}

// ---------------------------------------------------------------------------
// robustness

MeanSe RobustnessResult::mean_rate(std::size_t k, std::size_t s) const { return mean_se(rates[k][s]); }

MeanSe RobustnessResult::paired_diff(std::size_t k, std::size_t a, std::size_t b) const {
    RVector d(rates[k][a].size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = rates[k][a][i] - rates[k][b][i];
    return mean_se(d);
}

RobustnessResult cmd_robustness(const ExperimentConfig& cfg) {
    cfg.validate();
    RobustnessResult r;
    r.xi2 = cfg.xi2;
    r.solvers = cfg.solvers;
    const std::size_t n = cfg.realizations, S = cfg.solvers.size(), L = cfg.xi2.size();

    struct Item {
        InstanceOutcome outcome;
        std::vector<RVector> rates;  // [level][solver]
        double nocoop = 0.0;
    };
    std::vector<Item> items(n);
    for_each_realization(
        n,
        [&](std::size_t i) {
            const std::uint64_t index = cfg.start_index + i;
            const ChannelSet est = generate_instance(cfg.sys, index);
            Item& it = items[i];
            it.outcome = solve_channels(cfg, est, experiment_targets(cfg, cfg.sys, est), index);
            it.nocoop = nocoop_rate(est, cfg.nocoop_full_band);
            if (it.outcome.cls != InstanceClass::cooperation) return;

            // Unit-variance error directions, scaled per level so every level sees the same draw.
            auto eng = realization_stream(cfg.sys.seed, index, 1);
            std::vector<CVector> z(est.M, CVector(est.N));
            for (auto& v : z)
                for (auto& x : v) x = complex_gaussian(eng);
            for (std::size_t k = 0; k < L; ++k) {
                ChannelSet truth = est;
                const double xi = std::sqrt(cfg.xi2[k]);
                for (std::size_t j = 0; j < est.M; ++j)
                    for (std::size_t a = 0; a < est.N; ++a) truth.h[j][0][a] += xi * z[j][a];
                RVector row(S);
                for (std::size_t s = 0; s < S; ++s) row[s] = evaluate(truth, it.outcome.results[s].sol).rate_pu;
                it.rates.push_back(std::move(row));
            }
            for (auto& res : it.outcome.results) res.sol = {};
        },
        cfg.policy);

    std::vector<InstanceOutcome> outcomes;
    r.rates.assign(L, std::vector<RVector>(S));
    for (auto& it : items) {
        outcomes.push_back(it.outcome);
        if (it.outcome.cls != InstanceClass::cooperation) continue;
        ++r.used;
        r.nocoop.push_back(it.nocoop);
        for (std::size_t k = 0; k < L; ++k)
            for (std::size_t s = 0; s < S; ++s) r.rates[k][s].push_back(it.rates[k][s]);
    }
    r.summary = summarize(outcomes, cfg.solvers);
    return r;
}

void write_robustness_csv(std::ostream& out, const ExperimentConfig& cfg, const RobustnessResult& r) {
    write_csv_preamble(out, "robustness", cfg);
    write_summary(out, r.summary, "# design");
    out << "xi2,series,n,mean_rate,se_rate\n";
    const MeanSe base = mean_se(r.nocoop);
    for (std::size_t k = 0; k < r.xi2.size(); ++k) {
        for (std::size_t s = 0; s < r.solvers.size(); ++s) {
            const MeanSe m = r.mean_rate(k, s);
            out << fmt(r.xi2[k]) << ',' << to_string(r.solvers[s]) << ',' << m.n << ',' << fmt(m.mean) << ','
                << fmt(m.se) << '\n';
        }
        out << fmt(r.xi2[k]) << ",no-cooperation," << base.n << ',' << fmt(base.mean) << ',' << fmt(base.se) << '\n';
    }
}

// ---------------------------------------------------------------------------
// eta

EtaResult cmd_eta(const ExperimentConfig& cfg) {
    cfg.validate();
    const std::size_t n = cfg.realizations;
    std::vector<std::optional<EtaRow>> rows(n);
    std::vector<InstanceOutcome> outcomes(n);
    Alg1Options o1;
    o1.order = cfg.alg1_order;
    for_each_realization(
        n,
        [&](std::size_t i) {
            const std::uint64_t index = cfg.start_index + i;
            const ChannelSet ch = generate_instance(cfg.sys, index);
            const Targets t = experiment_targets(cfg, cfg.sys, ch);
            InstanceOutcome& o = outcomes[i];
            o.index = index;
            o.results.push_back({SolverId::alg1_distributed, false, std::numeric_limits<double>::quiet_NaN(), {}, {}, 0});
            if (!(t.gamma0p > 0.0)) {
                o.cls = InstanceClass::mode_ii;
                return;
            }
            try {
                const DistributedResult d = alg1_distributed_solve(make_local_views(ch, t), o1);
                EtaRow row;
                row.index = index;
                row.n_iter = d.iterations;
                row.messages = d.log.count();
                row.predicted = distributed_message_count(d.iterations, ch.M);
                row.eta = signaling_ratio(d.iterations, ch.M, ch.N);
                row.full_csi = 2 * ch.N * ch.M * ch.M;
                rows[i] = row;
                o.cls = InstanceClass::cooperation;
                o.results.front().ok = true;
            } catch (const Error& e) {
                o.cls = InstanceClass::infeasible;
                o.results.front().error = e.kind();
            }
        },
        cfg.policy);
    EtaResult r;
    for (auto& row : rows)
        if (row) r.rows.push_back(*row);
    r.summary = summarize(outcomes, {SolverId::alg1_distributed});
    return r;
}

void write_eta_csv(std::ostream& out, const ExperimentConfig& cfg, const EtaResult& r) {
    write_csv_preamble(out, "eta", cfg);
    write_summary(out, r.summary, "# alg1-distributed");
    out << "realization,n_iter,messages,predicted,eta,full_csi\n";
    for (const auto& row : r.rows)
        out << row.index << ',' << row.n_iter << ',' << row.messages << ',' << row.predicted << ',' << fmt(row.eta)
            << ',' << row.full_csi << '\n';
}

// ---------------------------------------------------------------------------
// single-instance solve

void write_solve_csv(std::ostream& out, const ExperimentConfig& cfg, const ChannelSet& ch, const InstanceOutcome& o) {
    write_csv_preamble(out, "solve", cfg);
    out << "# realization=" << o.index << " class=" << to_string(o.cls) << '\n';
    out << "solver,status,total_power,total_power_db,iterations";
    for (std::size_t u = 0; u <= ch.M; ++u) out << ",p_" << u;
    out << ",sinr_pu_total,rate_pu";
    for (std::size_t m = 0; m < ch.M; ++m) out << ",sinr_cu_" << m + 1;
    out << '\n';
    for (const auto& r : o.results) {
        out << to_string(r.solver) << ',' << (r.ok ? std::string("ok") : std::string(to_string(*r.error)));
        if (!r.ok) {
            out << ",,," << r.iterations << std::string(ch.M + 1, ',') << ",," << std::string(ch.M, ',') << '\n';
            continue;
        }
        out << ',' << fmt(r.power) << ',' << fmt(to_db(r.power)) << ',' << r.iterations;
        for (double p : r.sol.p) out << ',' << fmt(p);
        const SinrReport rep = evaluate(ch, r.sol);
        out << ',' << fmt(rep.sinr_pu_total) << ',' << fmt(rep.rate_pu);
        for (double s : rep.sinr_cu) out << ',' << fmt(s);
        out << '\n';
    }
}

}  // namespace ccr
