// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ccr/experiment.hpp"
#include "ccr/oracle.hpp"
#include "ccr/solver.hpp"
#include "ccr/zeroforcing.hpp"

using namespace ccr;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) pass = false;
        if (!detail.empty()) detail += "; ";
        detail += (ok ? "" : "FAILED ") + what;
    }
};

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}
std::string fmt(const char* f, double a, double b) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}
std::string fmt(const char* f, double a, double b, double c) {
    char buf[200];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

struct Instance {
    ChannelSet ch;
    Targets t;
    StackedProblem sp;
};

SystemConfig rayleigh(std::uint64_t seed, std::size_t M = 3, std::size_t N = 4, double r_cu = 1.0) {
    SystemConfig c;
    c.M = M;
    c.N = N;
    c.r_cu = r_cu;
    c.fading = FadingMode::rayleigh;
    c.seed = seed;
    return c;
}

// Feasible cooperation-mode instances, walking realization indices.
std::vector<Instance> feasible_instances(const SystemConfig& cfg, std::size_t count) {
    std::vector<Instance> out;
    for (std::uint64_t i = 0; out.size() < count && i < 100 * count; ++i) {
        Instance in;
        in.ch = generate_instance(cfg, i);
        in.t = gamma_targets(cfg, in.ch);
        if (!(in.t.gamma0p > 0.0)) continue;
        try {
            in.sp = build_stacked(in.ch, in.t);
            alg2_solve(in.sp);
        } catch (const Error&) {
            continue;
        }
        out.push_back(std::move(in));
    }
    return out;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

double span_residual(const std::vector<CVector>& cols, const CVector& x) {
    std::vector<CVector> basis;
    for (const auto& h : cols) {
        CVector q = h;
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& b : basis) {
                const cdouble a = dot(b, q);
                for (std::size_t i = 0; i < q.size(); ++i) q[i] -= a * b[i];
            }
        if (norm(q) > 1e-12 * norm(h)) basis.push_back(normalized(q));
    }
    CVector r = x;
    for (int pass = 0; pass < 2; ++pass)
        for (const auto& b : basis) {
            const cdouble a = dot(b, r);
            for (std::size_t i = 0; i < r.size(); ++i) r[i] -= a * b[i];
        }
    return norm(r) / std::max(norm(x), 1e-300);
}

ChannelSet scalar_channels() {
    ChannelSet ch;
    ch.K = ch.M = ch.N = 1;
    ch.P0 = 1.0;
    ch.Ns = {1.0};
    ch.Nm = {1.0};
    ch.h0p = {0.0};
    ch.f = {1.0};
    ch.g = {{1.0}};
    ch.h = {{{1.0}, {1.0}}};
    return ch;
}

// ---------------------------------------------------------------------------

Verdict criterion1() {
    Verdict v;
    const ChannelSet ch = scalar_channels();
    const StackedProblem sp = build_stacked(ch, {0.1, {1.0}});
    const RVector lam_star{4.0 / 7.0, 11.0 / 7.0}, p_star{2.0 / 7.0, 11.0 / 7.0};

    const Alg1Result a1 = alg1_solve(sp);
    const Alg2Result a2 = alg2_solve(sp);
    const ScalarSolution cf = scalar_closed_form({});
    double err = 0.0;
    for (std::size_t u = 0; u < 2; ++u) {
        err = std::max({err, std::abs(a1.lambda.lambda[u] - lam_star[u]), std::abs(a2.lambda.lambda[u] - lam_star[u]),
                        std::abs(cf.lambda[u] - lam_star[u]), std::abs(cf.p[u] - p_star[u])});
    }
    for (const DualState& lam : {a1.lambda, a2.lambda}) {
        const DownlinkSolution d = recover_downlink(lam, uplink_beams(lam, sp), sp);
        for (std::size_t u = 0; u < 2; ++u) err = std::max(err, std::abs(d.p[u] - p_star[u]));
        err = std::max(err, std::abs(total_power(d, sp) - 15.0 / 7.0));
    }
    err = std::max(err, std::abs(cf.total - 15.0 / 7.0));
    v.require(err <= 1e-9, fmt("max deviation from (4/7, 11/7), (2/7, 11/7), 15/7 = %.2e", err));

    const RVector grid = grid_power_search(uplink_beams(a2.lambda, sp), sp);
    const double grid_total = grid[0] * sp.dv_quadratic(a2.beams.v) + grid[1];
    v.require(rel(grid_total, 15.0 / 7.0) <= 1e-6, fmt("grid oracle total %.9f", grid_total));

    constexpr int reps = 200;
    auto time_us = [&](const std::function<void()>& f) {
        const auto t0 = Clock::now();
        for (int i = 0; i < reps; ++i) f();
        return seconds_since(t0) / reps * 1e6;
    };
    const double t1 = time_us([&] { alg1_solve(sp); });
    const double t2 = time_us([&] { alg2_solve(sp); });
    const double t3 = time_us([&] { scalar_closed_form({}); });
    v.require(std::max({t1, t2, t3}) < 100.0, fmt("runtime alg1 %.1f us, alg2 %.1f us, closed form %.3f us", t1, t2, t3));
    return v;
}

Verdict criterion2() {
    Verdict v;
    const auto t0 = Clock::now();
    std::size_t n = 0;
    double worst = 0.0, worst_gap = 0.0;
    for (FadingMode mode : {FadingMode::rayleigh, FadingMode::phase_only}) {
        SystemConfig cfg = rayleigh(101, 3, 4, 1.0);
        cfg.fading = mode;
        for (const Instance& in : feasible_instances(cfg, 200)) {
            const Alg1Result a1 = alg1_solve(in.sp);
            const Alg2Result a2 = alg2_solve(in.sp);
            const double o1 = a1.lambda.objective(in.sp), o2 = a2.lambda.objective(in.sp);
            worst = std::max(worst, rel(o1, o2));
            for (const DualState& lam : {a1.lambda, a2.lambda}) {
                const DownlinkSolution d = recover_downlink(lam, uplink_beams(lam, in.sp), in.sp);
                worst_gap = std::max(worst_gap, kkt_verify(d, lam, in.sp).gap);
            }
            ++n;
        }
    }
    const double secs = seconds_since(t0);
    v.require(n >= 400, std::to_string(n) + " instances");
    v.require(worst <= 1e-6, fmt("max relative objective difference %.2e", worst));
    v.require(worst_gap < 1e-8, fmt("max KKT gap %.2e", worst_gap));
    v.require(secs <= 60.0, fmt("%.2f s", secs));
    return v;
}

Verdict criterion3() {
    Verdict v;
    std::size_t n = 0, fast = 0, linear = 0, bound_ok = 0, near = 0;
    double worst_short = 0.0, worst_far = 0.0;
    RVector gs_gap;
    for (const Instance& in : feasible_instances(rayleigh(202), 200)) {
        ++n;
        // alg2: relative change of the total power, first step from zero.
        const Alg2Result a2 = alg2_solve(in.sp);
        for (std::size_t k = 1; k < a2.trace.size() && k <= 10; ++k) {
            const double prev = a2.trace.dual_objective[k - 1], cur = a2.trace.dual_objective[k];
            if (std::abs(cur - prev) <= 1e-8 * cur) {
                ++fast;
                break;
            }
        }
        // alg1 in the Jacobi order against rho(D*F*).
        Alg1Options o;
        o.order = UpdateOrder::jacobi;
        o.tol = 1e-13;
        const double rho = coupling_spectral_radius(a2.lambda, in.sp);
        try {
            const Alg1Result a1 = alg1_solve(in.sp, o);
            const ConvergenceOrder co = convergence_order(a1.trace, a2.lambda);
            if (co.kind == ConvergenceOrder::Kind::linear) ++linear;
            if (co.rate >= rho - 0.05) ++bound_ok;
            else worst_short = std::max(worst_short, rho - co.rate);
            if (std::abs(co.rate - rho) <= 0.05) ++near;
            else worst_far = std::max(worst_far, std::abs(co.rate - rho));

            o.order = UpdateOrder::gauss_seidel;
            const ConvergenceOrder gs = convergence_order(alg1_solve(in.sp, o).trace, a2.lambda);
            gs_gap.push_back(rho - gs.rate);
        } catch (const Error& e) {
            v.require(false, std::string("alg1 classification: ") + e.what());
        }
    }
    const double frac = static_cast<double>(fast) / n;
    v.require(frac >= 0.95, fmt("alg2 within 10 iterations on %.1f%% of", 100.0 * frac) + " " + std::to_string(n));
    v.require(linear == n, "alg1 (jacobi) linear on " + std::to_string(linear) + "/" + std::to_string(n));
    v.require(near == n, "ratio within 0.05 of rho(D*F*) on " + std::to_string(near) + "/" + std::to_string(n) +
                             fmt(" (worst %.3f)", worst_far));
    v.require(bound_ok == n, "ratio >= rho - 0.05 on " + std::to_string(bound_ok) + "/" + std::to_string(n) +
                                 fmt(" (worst shortfall %.3f)", worst_short));
    if (!gs_gap.empty()) {
        const MeanSe m = mean_se(gs_gap);
        v.detail += fmt("; info: gauss-seidel ratio is %.3f below rho on average", m.mean);
    }
    return v;
}

Verdict criterion4() {
    Verdict v;
    std::size_t ok = 0, n = 0;
    for (const Instance& in : feasible_instances(rayleigh(303), 100)) {
        ++n;
        const FeasibleInit init = alg2_feasible_init(in.sp, default_probe_budget(in.sp));
        const CouplingMatrices cm = coupling_matrices(init.beams, in.sp);
        const RVector one_a1 = fixed_beam_fixed_point_step(init.lambda.lambda, cm);
        const RVector one_a2 = fixed_beam_matrix_step(cm);
        bool dominated = true;
        for (std::size_t u = 0; u < one_a1.size(); ++u) dominated = dominated && one_a2[u] <= one_a1[u] * (1.0 + 1e-12);
        ok += dominated;
    }
    v.require(n == 100 && ok == n, std::to_string(ok) + "/" + std::to_string(n) + " instances dominated");
    return v;
}

Verdict criterion5() {
    Verdict v;
    for (double r1 : {0.4, 0.5, 0.6}) {
        SystemConfig cfg;
        cfg.M = 1;
        cfg.r_cu = r1;
        std::size_t n = 0, ordered = 0;
        double worst_tie = 0.0, worst_cf = 0.0;
        for (std::uint64_t i = 0; n < 1000 && i < 100000; ++i) {
            const ChannelSet ch = generate_instance(cfg, i);
            const Targets t = gamma_targets(cfg, ch);
            double pc = 0, pp = 0;
            Theorem3Report rep;
            try {
                const StackedProblem sp = build_stacked(ch, t);
                pc = total_power(czf_solve(ch, t, sp), sp);
                pp = total_power(pzf_solve(ch, t, sp), sp);
                rep = theorem3_powers(ch, t);
            } catch (const Error&) {
                continue;
            }
            ++n;
            worst_cf = std::max({worst_cf, rel(rep.P_czf, pc), rel(rep.P_pzf, pp)});
            if (r1 < 0.5) ordered += pp <= pc;
            else if (r1 > 0.5) ordered += pc <= pp;
            else {
                ordered += 1;
                worst_tie = std::max(worst_tie, rel(pc, pp));
            }
        }
        const std::string tag = fmt("r1=%.1f: ", r1);
        v.require(n == 1000 && ordered == n, tag + std::to_string(ordered) + "/" + std::to_string(n) + " ordered");
        if (r1 == 0.5) v.require(worst_tie <= 1e-9, tag + fmt("max |P_czf - P_pzf|/P = %.2e", worst_tie));
        v.require(worst_cf <= 1e-9, tag + fmt("closed forms match to %.2e", worst_cf));
    }
    return v;
}

Verdict criterion6() {
    Verdict v;
    std::size_t n = 0, ok = 0;
    for (FadingMode mode : {FadingMode::rayleigh, FadingMode::phase_only}) {
        SystemConfig cfg = rayleigh(606, 3, 4, 1.0);
        cfg.fading = mode;
        for (std::uint64_t i = 0; i < 2000 && n < (mode == FadingMode::rayleigh ? 300u : 600u); ++i) {
            const ChannelSet ch = generate_instance(cfg, i);
            const Targets t = gamma_targets(cfg, ch);
            double opt, zf;
            try {
                const StackedProblem sp = build_stacked(ch, t);
                const Alg2Result a2 = alg2_solve(sp);
                opt = total_power(recover_downlink(a2.lambda, a2.beams, sp), sp);
                zf = std::min(total_power(czf_solve(ch, t, sp), sp), total_power(pzf_solve(ch, t, sp), sp));
            } catch (const Error&) {
                continue;
            }
            ++n;
            ok += opt <= zf + 1e-8 * zf;
        }
    }
    v.require(n >= 500 && ok == n, std::to_string(ok) + "/" + std::to_string(n) + " instances sandwiched");
    return v;
}

Verdict criterion7() {
    Verdict v;
    std::size_t n = 0, counts_ok = 0, eta_ok = 0;
    double worst = 0.0;
    for (const Instance& in : feasible_instances(rayleigh(707), 100)) {
        ++n;
        const Alg1Result c = alg1_solve(in.sp);
        const DistributedResult d = alg1_distributed_solve(make_local_views(in.ch, in.t));
        if (d.trace.size() != c.trace.size()) {
            worst = std::numeric_limits<double>::infinity();
            continue;
        }
        for (std::size_t k = 0; k < c.trace.size(); ++k)
            for (std::size_t u = 0; u < in.sp.users(); ++u)
                worst = std::max(worst, std::abs(d.trace.lambdas[k][u] - c.trace.lambdas[k][u]) /
                                            std::max(1.0, std::abs(c.trace.lambdas[k][u])));
        const std::size_t M = in.ch.M, N = in.ch.N, NI = d.iterations;
        counts_ok += d.log.count() == 2 * NI * M + (M + 1) * (M + 1);
        const double eta = static_cast<double>(2 * NI * M + (M + 1) * (M + 1)) / static_cast<double>(2 * N * M * M);
        eta_ok += signaling_ratio(NI, M, N) == eta;
    }
    v.require(worst <= 1e-9, fmt("max trajectory deviation %.2e", worst));
    v.require(counts_ok == n, "message counts exact on " + std::to_string(counts_ok) + "/" + std::to_string(n));
    v.require(eta_ok == n, "eta exact on " + std::to_string(eta_ok) + "/" + std::to_string(n));
    return v;
}

Verdict criterion8() {
    Verdict v;
    double worst_span = 0.0, worst_zf = 0.0;
    for (const SystemConfig& cfg : {rayleigh(808), rayleigh(809, 2, 6)}) {
        for (const Instance& in : feasible_instances(cfg, 100)) {
            const Alg2Result a2 = alg2_solve(in.sp);
            const DownlinkSolution d = recover_downlink(a2.lambda, a2.beams, in.sp);
            for (std::size_t j = 0; j < in.ch.M; ++j) {
                const auto b = in.sp.block(d.v, j);
                worst_span = std::max(worst_span, span_residual(in.ch.h[j], CVector(b.begin(), b.end())));
            }
            for (auto solve : {czf_solve, pzf_solve}) {
                try {
                    worst_zf = std::max(worst_zf, zf_orthogonality_residual(in.ch, solve(in.ch, in.t, in.sp).w));
                } catch (const Error&) {
                }
            }
        }
    }
    v.require(worst_span < 1e-10, fmt("span residual %.2e", worst_span));
    v.require(worst_zf < 1e-10, fmt("ZF orthogonality residual %.2e", worst_zf));

    // Positivity, monotonicity and scalability of I(lambda).
    std::vector<Instance> pool = feasible_instances(rayleigh(810), 20);
    std::mt19937_64 eng(810);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto I = [](const RVector& lam, const StackedProblem& sp) {
        return alg1_step({lam}, sp, UpdateOrder::jacobi).lambda;
    };
    std::size_t violations = 0;
    for (int probe = 0; probe < 1000; ++probe) {
        const StackedProblem& sp = pool[probe % pool.size()].sp;
        RVector a(sp.users()), b(sp.users());
        for (std::size_t u = 0; u < a.size(); ++u) {
            a[u] = 10.0 * unif(eng);
            b[u] = a[u] + 10.0 * unif(eng);
        }
        const double s = 1.0 + 5.0 * unif(eng);
        RVector sa = a;
        for (double& x : sa) x *= s;
        const RVector Ia = I(a, sp), Ib = I(b, sp), Isa = I(sa, sp);
        for (std::size_t u = 0; u < a.size(); ++u) {
            violations += !(Ia[u] > 0.0);
            violations += Ib[u] < Ia[u] * (1.0 - 1e-12);
            violations += !(s * Ia[u] > Isa[u]);
        }
    }
    v.require(violations == 0, std::to_string(violations) + " axiom violations on 1000 probes");
    return v;
}

Verdict criterion9() {
    Verdict v;
    const auto t0 = Clock::now();
    ExperimentConfig base;
    base.realizations = 10000;

    {  // (a) power ordering at r = 2 bps/Hz
        ExperimentConfig cfg = base;
        cfg.pbs_snr_db = {10.0};
        const GridResult r = cmd_sweep_pbs(cfg);
        const MeanSe pz = r.paired_diff_db(0, SolverId::pzf, SolverId::czf);
        const MeanSe co = r.paired_diff_db(0, SolverId::czf, SolverId::alg2);
        v.require(pz.mean - 3 * pz.se > 0.0, fmt("(a) pzf - czf = %.2f +- %.2f dB", pz.mean, pz.se));
        v.require(co.mean - 3 * co.se > 0.0, fmt("czf - opt = %.2f +- %.2f dB", co.mean, co.se));
        v.require(r.db_of_mean(0, SolverId::pzf) > r.db_of_mean(0, SolverId::czf) &&
                      r.db_of_mean(0, SolverId::czf) > r.db_of_mean(0, SolverId::alg2),
                  fmt("linear means %.2f > %.2f > %.2f dB", r.db_of_mean(0, SolverId::pzf),
                      r.db_of_mean(0, SolverId::czf), r.db_of_mean(0, SolverId::alg2)));
    }
    {  // (b) outage
        const OutageResult r = cmd_outage(base);
        bool mono = true, below = true;
        for (std::size_t k = 0; k < r.budget_db.size(); ++k) {
            below = below && r.p_coop[k] <= r.p_nocoop[k];
            if (k > 0) mono = mono && r.p_coop[k] <= r.p_coop[k - 1];
        }
        v.require(mono, "(b) outage nonincreasing in budget");
        v.require(below, fmt("cooperative <= no-cooperation (%.3f vs %.3f at the smallest budget)", r.p_coop.front(),
                             r.p_nocoop.front()));
    }
    {  // (c) robustness with one CBS/CU pair
        ExperimentConfig cfg = base;
        cfg.sys.M = 1;
        cfg.xi2 = {0.05, 0.1, 0.2};
        const RobustnessResult r = cmd_robustness(cfg);
        for (std::size_t k = 0; k < r.xi2.size(); ++k) {
            const MeanSe cp = r.paired_diff(k, 1, 2);
            const MeanSe oc = r.paired_diff(k, 0, 1);
            const MeanSe op = r.paired_diff(k, 0, 2);
            const std::string tag = fmt("(c) xi2=%.2f: ", r.xi2[k]);
            v.require(cp.mean - 3 * cp.se > 0.0 && op.mean - 3 * op.se > 0.0,
                      tag + fmt("czf - pzf = %.3f +- %.3f bps/Hz", cp.mean, cp.se));
            v.require(std::abs(oc.mean) <= 0.05 + 3 * oc.se, tag + fmt("opt - czf = %.4f +- %.4f bps/Hz", oc.mean, oc.se));
        }
    }
    const double secs = seconds_since(t0);
    v.require(secs <= 600.0, fmt("%.1f s", secs));
    return v;
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, Verdict (*)()>> criteria{
        {"1 scalar ground truth", criterion1},
        {"2 cross-algorithm agreement", criterion2},
        {"3 convergence order", criterion3},
        {"4 element-wise dominance", criterion4},
        {"5 CZF vs PZF ordering", criterion5},
        {"6 optimality sandwich", criterion6},
        {"7 distributed equivalence and signaling", criterion7},
        {"8 structure invariants", criterion8},
        {"9 figure-level trends", criterion9},
    };
    int failures = 0;
    for (const auto& [name, run] : criteria) {
        Verdict v;
        try {
            v = run();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail = std::string("exception: ") + e.what();
        }
        failures += !v.pass;
        std::printf("criterion %s: %s (%s)\n", name, v.pass ? "PASS" : "FAIL", v.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
