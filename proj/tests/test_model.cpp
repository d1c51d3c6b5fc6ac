#include <cmath>
#include <sstream>

#include "ccr/model.hpp"
#include "ccr/rng.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace ccr;

TEST_CASE("generate_instance: phase-only magnitudes") {
    SystemConfig cfg;
    const ChannelSet ch = generate_instance(cfg, 3);
    const double far = std::pow(2.0, -1.75);
    CHECK(far == doctest::Approx(0.29730).epsilon(1e-5));
    for (const auto& x : ch.h0p) CHECK(std::abs(std::abs(x) - far) < 1e-15);
    for (const auto& row : ch.h)
        for (const auto& v : row)
            for (const auto& x : v) CHECK(std::abs(std::abs(x) - 1.0) < 1e-15);
    CHECK(std::abs(norm(ch.f) - 1.0) < 1e-12);
    CHECK(ch.g.size() == cfg.M);
    CHECK(ch.h.size() == cfg.M);
    CHECK(ch.h[0].size() == cfg.M + 1);
}

TEST_CASE("generate_instance: deterministic per (seed, index)") {
    for (auto mode : {FadingMode::phase_only, FadingMode::rayleigh}) {
        SystemConfig cfg;
        cfg.fading = mode;
        std::ostringstream a, b, c;
        write_channel_set(a, generate_instance(cfg, 42));
        write_channel_set(b, generate_instance(cfg, 42));
        write_channel_set(c, generate_instance(cfg, 43));
        CHECK(a.str() == b.str());
        CHECK(a.str() != c.str());
    }
}

TEST_CASE("gamma_targets") {
    SystemConfig cfg;
    cfg.r = {0.5, 2.0, 0.0};
    const ChannelSet ch = generate_instance(cfg, 0);
    const Targets t = gamma_targets(cfg, ch);
    CHECK(t.gamma[0] == 1.0);
    CHECK(t.gamma[1] == 15.0);
    CHECK(t.gamma[2] == 0.0);
    // |h0p^H f|^2 = K d^-alpha with MRT: 2 * 2^-3.5 = 0.17678
    CHECK(ch.direct_gain() == doctest::Approx(0.17678).epsilon(1e-4));
    CHECK(t.gamma0p == doctest::Approx(1.5 - 2.0 * std::pow(2.0, -3.5)).epsilon(1e-12));
    CHECK(t.gamma0p == doctest::Approx(1.32322).epsilon(1e-5));

    SystemConfig up = cfg;
    up.r = {0.6, 2.1, 0.1};
    const Targets t2 = gamma_targets(up, ch);
    for (std::size_t m = 0; m < 3; ++m) CHECK(t2.gamma[m] > t.gamma[m]);
}

TEST_CASE("build_stacked: scalar instance aggregates") {
    const StackedProblem sp = fx::scalar_problem();
    CHECK(sp.h0[0] == cdouble(1.0));
    CHECK(std::abs(sp.hbar[0][0][0]) == doctest::Approx(1.0));
    CHECK(std::abs(sp.hbar[1][0][0]) == doctest::Approx(std::sqrt(2.0)));
    CHECK(sp.dv[0] == doctest::Approx(2.0));
    CHECK(sp.noise == RVector{1.0, 1.0});
}

TEST_CASE("build_stacked: block-diagonal structure and errors") {
    SystemConfig cfg = fx::random_config();
    const ChannelSet ch = generate_instance(cfg, 1);
    const Targets t = fx::targets(0.5, {1.0, 1.0, 1.0});
    const StackedProblem sp = build_stacked(ch, t);
    for (std::size_t u = 0; u <= sp.M; ++u) {
        const CMatrix d = sp.dense_hbar(u);
        for (std::size_t r = 0; r < sp.M; ++r)
            for (std::size_t c = 0; c < sp.M * sp.N; ++c)
                if (c / sp.N != r) CHECK(d(r, c) == cdouble(0.0));
    }
    for (std::size_t j = 0; j < sp.M; ++j) {
        const double g2 = norm2(ch.g[j]);
        CHECK(sp.dv[j] == doctest::Approx((ch.P0 * g2 + ch.Ns[j]) * g2));
        // block j of Hbar_0 is h_j0^H sqrt(Ns) ||g||
        const CMatrix d0 = sp.dense_hbar(0);
        for (std::size_t i = 0; i < sp.N; ++i)
            CHECK(std::abs(d0(j, j * sp.N + i) - std::conj(ch.h[j][0][i]) * std::sqrt(ch.Ns[j] * g2)) < 1e-14);
    }

    try {
        build_stacked(ch, fx::targets(-0.1, {1.0, 1.0, 1.0}));
        FAIL("expected ModeII");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ModeII);
    }
    ChannelSet bad = ch;
    bad.g[1].assign(bad.N, cdouble{});
    try {
        build_stacked(bad, t);
        FAIL("expected DegenerateRelayChannel");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DegenerateRelayChannel);
    }
}

TEST_CASE("evaluate: trivial solutions") {
    SystemConfig cfg;
    const ChannelSet ch = generate_instance(cfg, 5);
    const SinrReport r = evaluate(ch, DownlinkSolution::zero(ch.M, ch.N));
    for (double s : r.sinr_cu) CHECK(s == 0.0);
    CHECK(r.sinr_pu_total == doctest::Approx(ch.P0 * ch.direct_gain()).epsilon(1e-14));

    ChannelSet c1 = fx::czf_channels();
    DownlinkSolution s = DownlinkSolution::zero(1, 2);
    s.w[0] = {1.0, 0.0};  // orthogonal to h11 = e2
    CHECK(evaluate(c1, s).sinr_cu[0] == 0.0);
}

TEST_CASE("evaluate: scalar worked instance at the optimum") {
    const ChannelSet ch = fx::scalar_channels();
    const StackedProblem sp = fx::scalar_problem();
    DownlinkSolution s;
    s.v = {std::sqrt(2.0 / 7.0)};
    s.w = {{std::sqrt(11.0 / 7.0)}};
    const SinrReport r = evaluate(ch, s);
    CHECK(r.sinr_pu_relay == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(r.sinr_cu[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(total_power(s, sp) == doctest::Approx(15.0 / 7.0).epsilon(1e-14));
    CHECK(total_power(DownlinkSolution::zero(1, 1), sp) == 0.0);

    const CMatrix a = expand_relay_matrix(s.v, ch.g[0]);
    CHECK(std::abs(a(0, 0) - std::sqrt(2.0 / 7.0)) < 1e-15);
    const double relay = ch.P0 * std::norm(a(0, 0)) + ch.Ns[0] * frobenius_norm2(a);
    CHECK(relay == doctest::Approx(4.0 / 7.0).epsilon(1e-14));
}

TEST_CASE("expand_relay_matrix: rank one") {
    const CMatrix a = expand_relay_matrix(CVector{1.0, 0.0}, CVector{0.0, 1.0});
    CHECK(a(0, 1) == cdouble(1.0));
    CHECK(frobenius_norm2(a) == 1.0);
    CHECK(frobenius_norm2(expand_relay_matrix(CVector{0.0, 0.0}, CVector{1.0, 2.0})) == 0.0);
}

TEST_CASE("evaluate matches the stacked constraints and objective on random solutions") {
    SystemConfig cfg = fx::random_config(3);
    for (std::uint64_t idx = 0; idx < 50; ++idx) {
        const ChannelSet ch = generate_instance(cfg, idx);
        const StackedProblem sp = build_stacked(ch, fx::targets(1.0, {1.0, 2.0, 3.0}));
        auto eng = realization_stream(99, idx);
        DownlinkSolution s = DownlinkSolution::zero(ch.M, ch.N);
        for (auto& w : s.w)
            for (auto& x : w) x = complex_gaussian(eng);
        for (auto& x : s.v) x = complex_gaussian(eng);
        const SinrReport r = evaluate(ch, s);
        const RVector c = constraint_sinrs(sp, s.w, s.v);
        CHECK(r.sinr_pu_relay == doctest::Approx(c[0]).epsilon(1e-10));
        for (std::size_t m = 0; m < ch.M; ++m) CHECK(r.sinr_cu[m] == doctest::Approx(c[m + 1]).epsilon(1e-10));
        CHECK(total_power(s, sp) == doctest::Approx(total_power_relay_matrices(ch, s)).epsilon(1e-10));
    }
}

TEST_CASE("channel set text round trip is bit exact") {
    SystemConfig cfg = fx::random_config(21);
    const ChannelSet ch = generate_instance(cfg, 8);
    std::stringstream ss;
    write_channel_set(ss, ch);
    const ChannelSet back = read_channel_set(ss);
    CHECK(back.h0p == ch.h0p);
    CHECK(back.f == ch.f);
    CHECK(back.g == ch.g);
    CHECK(back.h == ch.h);
    CHECK(back.Ns == ch.Ns);
    CHECK(back.P0 == ch.P0);

    std::istringstream junk("not a channel file\n");
    CHECK_THROWS_AS(read_channel_set(junk), Error);
}

TEST_CASE("config validation") {
    SystemConfig c;
    CHECK_NOTHROW(c.validate());
    c.N = 0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    c.alpha = -1.0;
    CHECK_THROWS_AS(c.validate(), Error);
    CHECK(parse_fading_mode("rayleigh") == FadingMode::rayleigh);
    CHECK_THROWS_AS(parse_fading_mode("nakagami"), Error);
}
