#pragma once

#include <cmath>

#include "ccr/model.hpp"
#include "ccr/solver.hpp"

namespace fx {

using namespace ccr;

/// M = N = K = 1 with unit channels and unit noise everywhere.
inline ChannelSet scalar_channels(double P0 = 1.0) {
    ChannelSet ch;
    ch.K = ch.M = ch.N = 1;
    ch.P0 = P0;
    ch.Ns = {1.0};
    ch.Nm = {1.0};
    ch.h0p = {0.0};
    ch.f = {1.0};
    ch.g = {{1.0}};
    ch.h = {{{1.0}, {1.0}}};
    return ch;
}

inline Targets targets(double g0p, RVector gamma) { return {g0p, std::move(gamma)}; }

inline StackedProblem scalar_problem(double g0p = 0.1, double g1 = 1.0) {
    return build_stacked(scalar_channels(), targets(g0p, {g1}));
}

/// M = 1, N = 2: h10 = e1, h11 = e2, ||g||^2 = 2, P0 = 1.
inline ChannelSet czf_channels() {
    ChannelSet ch;
    ch.K = 1;
    ch.M = 1;
    ch.N = 2;
    ch.P0 = 1.0;
    ch.Ns = {1.0};
    ch.Nm = {1.0};
    ch.h0p = {0.0};
    ch.f = {1.0};
    ch.g = {{1.0, 1.0}};
    ch.h = {{{1.0, 0.0}, {0.0, 1.0}}};
    return ch;
}

/// Default simulation geometry with Rayleigh fading, M = 3, N = 4.
inline SystemConfig random_config(std::uint64_t seed = 7, std::size_t M = 3, std::size_t N = 4, double r_cu = 1.0) {
    SystemConfig c;
    c.M = M;
    c.N = N;
    c.r_cu = r_cu;
    c.fading = FadingMode::rayleigh;
    c.seed = seed;
    return c;
}

struct Instance {
    ChannelSet ch;
    Targets t;
    StackedProblem sp;
    std::uint64_t index = 0;
};

/// Walks realization indices from `start` until one is in the cooperation
/// regime and feasible for the optimal solver.
inline Instance next_feasible(const SystemConfig& cfg, std::uint64_t& index) {
    for (;; ++index) {
        Instance in;
        in.index = index;
        in.ch = generate_instance(cfg, index);
        in.t = gamma_targets(cfg, in.ch);
        if (in.t.gamma0p <= 0.0) continue;
        in.sp = build_stacked(in.ch, in.t);
        try {
            alg2_solve(in.sp);
        } catch (const Error&) {
            continue;
        }
        ++index;
        return in;
    }
}

}  // namespace fx
