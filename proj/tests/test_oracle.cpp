#include <cmath>
#include <sstream>

#include "ccr/oracle.hpp"
#include "ccr/rng.hpp"
#include "ccr/zeroforcing.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace ccr;

namespace {

ErrorKind kind_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::Parse;
}

}  // namespace

TEST_CASE("kkt_verify: scalar optimum") {
    const StackedProblem sp = fx::scalar_problem();
    const Alg2Result a = alg2_solve(sp);
    const DownlinkSolution d = recover_downlink(a.lambda, a.beams, sp);
    const KktReport k = kkt_verify(d, a.lambda, sp);
    CHECK(k.max_abs_slack() < 1e-10);
    CHECK(std::abs(k.min_margin()) < 1e-10);
    CHECK(k.gap < 1e-12);

    std::ostringstream os;
    write_kkt_csv(os, k);
    CHECK(os.str().rfind("constraint,slack,margin\npu,", 0) == 0);
}

TEST_CASE("kkt_verify: inflated relay power shows positive PU slack") {
    const StackedProblem sp = fx::scalar_problem();
    const Alg2Result a = alg2_solve(sp);
    DownlinkSolution d = recover_downlink(a.lambda, a.beams, sp);
    d.v = scaled(d.v, std::sqrt(1.01));
    const KktReport k = kkt_verify(d, a.lambda, sp);
    // PU fraction p0/(p0 + p1 + 1): 1% more p0 gives slack 0.01 (p1 + 1)/(1.01 p0 + p1 + 1).
    const double p0 = 2.0 / 7.0, p1 = 11.0 / 7.0;
    CHECK(k.slack[0] == doctest::Approx(0.01 * (p1 + 1.0) / (1.01 * p0 + p1 + 1.0)).epsilon(1e-9));
    CHECK(k.slack[0] == doctest::Approx(0.009).epsilon(0.01));
    CHECK(k.slack[0] > 0.0);
    CHECK(k.slack[0] < 0.01);
    CHECK(k.slack[1] < 0.0);
    CHECK(k.gap > 0.0);
}

TEST_CASE("kkt_verify never throws") {
    const StackedProblem sp = fx::scalar_problem();
    DownlinkSolution junk;
    const KktReport k = kkt_verify(junk, DualState{{1.0}}, sp);
    CHECK(std::isnan(k.slack[0]));
    CHECK(std::isnan(k.gap));
}

TEST_CASE("scalar_closed_form") {
    const ScalarSolution s = scalar_closed_form({});
    CHECK(s.lambda[0] == doctest::Approx(4.0 / 7.0).epsilon(1e-15));
    CHECK(s.lambda[1] == doctest::Approx(11.0 / 7.0).epsilon(1e-15));
    CHECK(s.p[0] == doctest::Approx(2.0 / 7.0).epsilon(1e-15));
    CHECK(s.p[1] == doctest::Approx(11.0 / 7.0).epsilon(1e-15));
    CHECK(s.total == doctest::Approx(15.0 / 7.0).epsilon(1e-15));

    ScalarParams zero;
    zero.gamma0p = 0.0;
    zero.gamma1 = 0.0;
    const ScalarSolution z = scalar_closed_form(zero);
    CHECK(z.lambda == RVector{0.0, 0.0});
    CHECK(z.p == RVector{0.0, 0.0});

    ScalarParams bad;
    bad.gamma0p = 0.5;
    CHECK(kind_of([&] { scalar_closed_form(bad); }) == ErrorKind::InfeasibleScalar);
}

TEST_CASE("scalar_closed_form agrees with alg1_solve on random feasible scalar instances") {
    auto eng = realization_stream(77, 0);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    int tested = 0;
    while (tested < 1000) {
        ScalarParams s;
        s.h10 = u(eng);
        s.h11 = u(eng);
        s.g2 = u(eng);
        s.P0 = u(eng);
        s.Ns = u(eng);
        s.N2p = u(eng);
        s.N1 = u(eng);
        s.gamma1 = u(eng);
        s.gamma0p = 0.3 * u(eng);
        ScalarSolution cf;
        try {
            cf = scalar_closed_form(s);
        } catch (const Error&) {
            continue;
        }
        // Keep a 5% margin from the feasibility boundary: there the iteration
        // contracts at a rate near 1 and a 1e-13 step size no longer bounds the error by 1e-10.
        const double relay = s.P0 * s.g2 + s.Ns;
        if (s.g2 - s.gamma0p * s.Ns - s.gamma0p * s.gamma1 * relay < 0.05 * s.g2) continue;
        ChannelSet ch = fx::scalar_channels(s.P0);
        ch.Ns = {s.Ns};
        ch.Nm = {s.N1};
        ch.N2p = s.N2p;
        ch.g = {{std::sqrt(s.g2)}};
        ch.h = {{{std::polar(std::sqrt(s.h10), 0.3)}, {std::polar(std::sqrt(s.h11), -1.1)}}};
        const StackedProblem sp = build_stacked(ch, fx::targets(s.gamma0p, {s.gamma1}));
        Alg1Options o;
        o.tol = 1e-13;
        const Alg1Result r = alg1_solve(sp, o);
        CHECK(std::abs(r.lambda.lambda[0] - cf.lambda[0]) <= 1e-10 * std::max(1.0, cf.lambda[0]));
        CHECK(std::abs(r.lambda.lambda[1] - cf.lambda[1]) <= 1e-10 * std::max(1.0, cf.lambda[1]));
        const Alg2Result a = alg2_solve(sp);
        const DownlinkSolution d = recover_downlink(a.lambda, a.beams, sp);
        CHECK(std::abs(d.p[0] - cf.p[0]) <= 1e-9 * std::max(1.0, cf.p[0]));
        CHECK(std::abs(d.p[1] - cf.p[1]) <= 1e-9 * std::max(1.0, cf.p[1]));
        ++tested;
    }
}

TEST_CASE("grid_power_search") {
    SUBCASE("scalar worked instance") {
        const StackedProblem sp = fx::scalar_problem();
        const BeamSet b{{{1.0}}, {1.0}};
        const RVector p = grid_power_search(b, sp);
        CHECK(std::abs(p[0] - 2.0 / 7.0) < 1e-3);
        CHECK(std::abs(p[1] - 11.0 / 7.0) < 1e-3);
    }
    SUBCASE("CZF worked instance") {
        const ChannelSet ch = fx::czf_channels();
        const StackedProblem sp = build_stacked(ch, fx::targets(0.5, {3.0}));
        const ZfDirections z = czf_directions(ch);
        const RVector p = grid_power_search({z.w, z.v}, sp);
        CHECK(std::abs(p[0] - 1.0 / 6.0) < 1e-3);
        CHECK(std::abs(p[1] - 3.0) < 1e-3);
    }
    SUBCASE("infeasible scalar case") {
        const StackedProblem sp = fx::scalar_problem(0.5, 1.0);
        const BeamSet b{{{1.0}}, {1.0}};
        CHECK(kind_of([&] { grid_power_search(b, sp); }) == ErrorKind::NoFeasibleGridPoint);
    }
    SUBCASE("M = 2 optimal directions match recover_downlink") {
        SystemConfig cfg = fx::random_config(41, 2, 3);
        std::uint64_t idx = 0;
        for (int trial = 0; trial < 3; ++trial) {
            const fx::Instance in = fx::next_feasible(cfg, idx);
            const Alg2Result a = alg2_solve(in.sp);
            const DownlinkSolution d = recover_downlink(a.lambda, a.beams, in.sp);
            const RVector p = grid_power_search(a.beams, in.sp, 300, 4);
            for (std::size_t u = 0; u < 3; ++u) CHECK(std::abs(p[u] - d.p[u]) <= 1e-3 * std::max(1.0, d.p[u]));
        }
    }
}
