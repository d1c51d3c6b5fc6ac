#include "ccr/zeroforcing.hpp"

#include <cmath>

#include "ccr/error.hpp"

namespace ccr {

std::string_view to_string(ZfScheme s) noexcept { return s == ZfScheme::czf ? "czf" : "pzf"; }

CVector project_out(std::span<const CVector> cols, const CVector& x) {
    // Modified Gram-Schmidt; nearly dependent columns are skipped.
    std::vector<CVector> basis;
    for (const auto& c : cols) {
        CVector q = c;
        for (const auto& b : basis) {
            const cdouble a = dot(b, q);
            for (std::size_t i = 0; i < q.size(); ++i) q[i] -= a * b[i];
        }
        const double nq = norm(q);
        if (nq > 1e-12 * std::max(norm(c), 1e-300)) basis.push_back(scaled(q, 1.0 / nq));
    }
    CVector y = x;
    for (int pass = 0; pass < 2; ++pass)
        for (const auto& b : basis) {
            const cdouble a = dot(b, y);
            for (std::size_t i = 0; i < y.size(); ++i) y[i] -= a * b[i];
        }
    if (norm2(y) < 1e-12 * norm2(x)) throw Error(ErrorKind::ZeroProjection, "vector lies in the nulled span");
    return y;
}

std::vector<CVector> zf_transmit_directions(const ChannelSet& ch) {
    if (ch.N <= ch.M)
        throw Error(ErrorKind::DimensionDeficit,
                    "N = " + std::to_string(ch.N) + " antennas cannot null " + std::to_string(ch.M) + " users");
    std::vector<CVector> out;
    for (std::size_t m = 0; m < ch.M; ++m) {
        std::vector<CVector> nulled{ch.h_pu(m)};
        for (std::size_t n = 0; n < ch.M; ++n)
            if (n != m) nulled.push_back(ch.h_cu(m, n));
        out.push_back(normalized(project_out(nulled, ch.h_cu(m, m))));
    }
    return out;
}

ZfDirections czf_directions(const ChannelSet& ch) {
    ZfDirections d;
    d.scheme = ZfScheme::czf;
    d.w = zf_transmit_directions(ch);
    d.v.reserve(ch.M * ch.N);
    for (std::size_t j = 0; j < ch.M; ++j) {
        const std::vector<CVector> cus(ch.h[j].begin() + 1, ch.h[j].end());
        const CVector b = scaled(project_out(cus, ch.h_pu(j)), norm2(ch.g[j]));
        d.v.insert(d.v.end(), b.begin(), b.end());
    }
    d.v = normalized(d.v);
    return d;
}

ZfDirections pzf_directions(const ChannelSet& ch) {
    ZfDirections d;
    d.scheme = ZfScheme::pzf;
    d.w = zf_transmit_directions(ch);
    for (std::size_t j = 0; j < ch.M; ++j) d.v.insert(d.v.end(), ch.h_pu(j).begin(), ch.h_pu(j).end());
    d.v = normalized(d.v);
    return d;
}

DownlinkSolution zf_powers(const ZfDirections& dirs, const StackedProblem& sp) {
    const double g0 = sp.targets.gamma0p;
    const double denom = abs2_dot(sp.h0, dirs.v) - g0 * sp.hbar_norm2(0, dirs.v);
    if (!(denom > 0.0)) throw Error(ErrorKind::PuInfeasible, "relay direction cannot reach the PU target");

    DownlinkSolution sol;
    sol.provenance = dirs.scheme == ZfScheme::czf ? Provenance::czf : Provenance::pzf;
    sol.p.assign(sp.users(), 0.0);
    sol.p[0] = g0 * sp.noise[0] / denom;
    for (std::size_t m = 0; m < sp.M; ++m) {
        const double gain = abs2_dot(sp.h[m][m + 1], dirs.w[m]);
        sol.p[m + 1] = sp.targets.gamma[m] * (sp.noise[m + 1] + sol.p[0] * sp.hbar_norm2(m + 1, dirs.v)) / gain;
    }
    sol.v = scaled(dirs.v, std::sqrt(sol.p[0]));
    for (std::size_t m = 0; m < sp.M; ++m) sol.w.push_back(scaled(dirs.w[m], std::sqrt(sol.p[m + 1])));
    return sol;
}

DownlinkSolution czf_solve(const ChannelSet& ch, const Targets&, const StackedProblem& sp) {
    return zf_powers(czf_directions(ch), sp);
}

DownlinkSolution pzf_solve(const ChannelSet& ch, const Targets&, const StackedProblem& sp) {
    return zf_powers(pzf_directions(ch), sp);
}

double zf_orthogonality_residual(const ChannelSet& ch, std::span<const CVector> w) {
    double worst = 0.0;
    for (std::size_t m = 0; m < ch.M; ++m) {
        const double nw = norm(w[m]);
        if (nw == 0.0) continue;
        worst = std::max(worst, std::abs(dot(w[m], ch.h_pu(m))) / nw);
        for (std::size_t n = 0; n < ch.M; ++n)
            if (n != m) worst = std::max(worst, std::abs(dot(w[m], ch.h_cu(m, n))) / nw);
    }
    return worst;
}

Theorem3Report theorem3_powers(const ChannelSet& ch, const Targets& t) {
    if (ch.M != 1) throw Error(ErrorKind::OutOfRegime, "closed forms need exactly one CBS");
    const double g2 = norm2(ch.g[0]);
    const double g0 = t.gamma0p, g1 = t.gamma[0];
    const double ns = ch.Ns[0];
    if (!(g2 > g0 * ns)) throw Error(ErrorKind::OutOfRegime, "||g||^2 <= gamma0' Ns");

    const CVector& h10 = ch.h_pu(0);
    const CVector& h11 = ch.h_cu(0, 0);
    const double n10 = norm2(h10), n11 = norm2(h11);
    const double rho2 = std::norm(dot(h10, h11)) / (n10 * n11);
    const double one_minus = 1.0 - rho2;
    if (one_minus < 1e-12) throw Error(ErrorKind::ZeroProjection, "PU and CU channels are parallel");

    const double c = ch.P0 * g2 + ns;
    const double pu_term = g0 * ch.N2p * c / (n10 * (g2 - g0 * ns));
    const double cu_term = g1 * ch.Nm[0] / (n11 * one_minus);

    Theorem3Report rep;
    rep.rho = std::sqrt(rho2);
    rep.P_czf = cu_term + pu_term / one_minus;
    rep.P_pzf = g1 * pu_term * rho2 / one_minus + cu_term + pu_term;
    rep.difference = pu_term * rho2 / one_minus * (1.0 - g1);
    rep.winner = rep.difference > 0.0 ? "pzf" : (rep.difference < 0.0 ? "czf" : "tie");
    return rep;
}

}  // namespace ccr
