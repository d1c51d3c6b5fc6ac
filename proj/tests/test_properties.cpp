// Randomized invariants over many instances.

#include <algorithm>
#include <cmath>
#include <random>

#include "ccr/oracle.hpp"
#include "ccr/rng.hpp"
#include "ccr/solver.hpp"
#include "ccr/zeroforcing.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace ccr;

namespace {

// Full interference vector I(lambda): every entry from the same lambda.
RVector interference(const RVector& lambda, const StackedProblem& sp) {
    return alg1_step({lambda}, sp, UpdateOrder::jacobi).lambda;
}

// Relative residual of x after removing span{cols}.
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

}  // namespace

TEST_CASE("standard interference function axioms on 1000 random probes") {
    const SystemConfig cfg = fx::random_config(11);
    std::mt19937_64 eng(2024);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    std::vector<StackedProblem> problems;
    std::uint64_t index = 0;
    for (int i = 0; i < 20; ++i) {
        const ChannelSet ch = generate_instance(cfg, index++);
        const Targets t = gamma_targets(cfg, ch);
        if (t.gamma0p > 0.0) problems.push_back(build_stacked(ch, t));
    }
    REQUIRE(problems.size() >= 10);

    std::size_t violations = 0;
    constexpr double round = 1e-12;  // floating-point allowance only
    for (int probe = 0; probe < 1000; ++probe) {
        const StackedProblem& sp = problems[probe % problems.size()];
        RVector lam(sp.users()), lam2(sp.users());
        for (std::size_t u = 0; u < sp.users(); ++u) {
            lam[u] = 10.0 * unif(eng);
            lam2[u] = lam[u] + 10.0 * unif(eng);
        }
        const double a = 1.0 + 5.0 * unif(eng);
        RVector scaled = lam;
        for (double& x : scaled) x *= a;

        const RVector I = interference(lam, sp);
        const RVector I2 = interference(lam2, sp);
        const RVector Ia = interference(scaled, sp);
        for (std::size_t u = 0; u < sp.users(); ++u) {
            if (!(I[u] > 0.0)) ++violations;
            if (I2[u] < I[u] * (1.0 - round)) ++violations;
            if (!(a * I[u] > Ia[u])) ++violations;
        }
    }
    CHECK(violations == 0);
}

TEST_CASE("alg1 iterates from zero are nondecreasing") {
    const SystemConfig cfg = fx::random_config(5);
    std::uint64_t index = 0;
    for (int n = 0; n < 50; ++n) {
        const fx::Instance in = fx::next_feasible(cfg, index);
        for (auto order : {UpdateOrder::gauss_seidel, UpdateOrder::jacobi}) {
            Alg1Options o;
            o.order = order;
            const Alg1Result r = alg1_solve(in.sp, o);
            for (std::size_t k = 1; k < r.trace.size(); ++k)
                for (std::size_t u = 0; u < in.sp.users(); ++u)
                    CHECK(r.trace.lambdas[k][u] >= r.trace.lambdas[k - 1][u] * (1.0 - 1e-12));
        }
    }
}

TEST_CASE("optimality sandwich, duality gap and span invariant on 500 instances") {
    const SystemConfig cfg = fx::random_config(21);
    std::uint64_t index = 0;
    std::size_t sandwiched = 0;
    double worst_gap = 0.0, worst_span = 0.0;
    while (sandwiched < 500) {
        const fx::Instance in = fx::next_feasible(cfg, index);
        const Alg2Result r = alg2_solve(in.sp);
        const DownlinkSolution opt = recover_downlink(r.lambda, r.beams, in.sp);
        const double p_opt = total_power(opt, in.sp);
        worst_gap = std::max(worst_gap, kkt_verify(opt, r.lambda, in.sp).gap);

        // Each relay block lies in span{h_j0, ..., h_jM}.
        for (std::size_t j = 0; j < in.ch.M; ++j) {
            const auto block = in.sp.block(opt.v, j);
            const CVector x(block.begin(), block.end());
            worst_span = std::max(worst_span, span_residual(in.ch.h[j], x));
        }

        double best_zf = std::numeric_limits<double>::infinity();
        try {
            best_zf = std::min(total_power(czf_solve(in.ch, in.t, in.sp), in.sp),
                               total_power(pzf_solve(in.ch, in.t, in.sp), in.sp));
        } catch (const Error&) {
            continue;
        }
        CHECK(p_opt <= best_zf + 1e-8 * best_zf);
        ++sandwiched;
    }
    CHECK(worst_gap < 1e-8);
    CHECK(worst_span < 1e-10);
}

TEST_CASE("relay blocks stay in the channel span when N > M + 1") {
    // With N = 6 and M = 2 the span of the three channels is a proper subspace.
    const SystemConfig cfg = fx::random_config(8, 2, 6);
    std::uint64_t index = 0;
    double worst = 0.0;
    for (int n = 0; n < 200; ++n) {
        const fx::Instance in = fx::next_feasible(cfg, index);
        const Alg2Result r = alg2_solve(in.sp);
        for (std::size_t j = 0; j < in.ch.M; ++j) {
            const auto block = in.sp.block(r.beams.v, j);
            worst = std::max(worst, span_residual(in.ch.h[j], CVector(block.begin(), block.end())));
        }
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("signaling ratio for large M") {
    // eta * N * M = N_I + (M + 1)^2 / (2 M); close to N_I + 1/2 once N_I >> M.
    const std::size_t M = 100, N = 4, NI = 10000;
    const double scaled = signaling_ratio(NI, M, N) * static_cast<double>(N * M);
    CHECK(scaled == doctest::Approx(NI + (M + 1.0) * (M + 1.0) / (2.0 * M)).epsilon(1e-14));
    CHECK(std::abs(scaled - (NI + 0.5)) <= 0.05 * (NI + 0.5));
    for (std::size_t n : {1u, 7u, 50u}) CHECK(distributed_message_count(n, 3) == 2 * n * 3 + 16);
}

TEST_CASE("CZF vs PZF sign rule on random M = 1 instances") {
    SystemConfig cfg = fx::random_config(33, 1, 4);
    for (double rate : {0.3, 0.5, 0.8}) {
        cfg.r_cu = rate;
        const double g1 = sinr_from_rate(rate);
        std::size_t checked = 0;
        for (std::uint64_t i = 0; checked < 200 && i < 2000; ++i) {
            const ChannelSet ch = generate_instance(cfg, i);
            const Targets t = gamma_targets(cfg, ch);
            Theorem3Report rep;
            try {
                rep = theorem3_powers(ch, t);
            } catch (const Error&) {
                continue;
            }
            ++checked;
            CHECK(rep.difference == doctest::Approx(rep.P_czf - rep.P_pzf).epsilon(1e-9).scale(rep.P_czf));
            if (g1 < 1.0 - 1e-12) CHECK(rep.P_pzf <= rep.P_czf);
            else if (g1 > 1.0 + 1e-12) CHECK(rep.P_czf <= rep.P_pzf);
            else CHECK(std::abs(rep.P_czf - rep.P_pzf) <= 1e-9 * rep.P_czf);
        }
        CHECK(checked == 200);
    }
}
