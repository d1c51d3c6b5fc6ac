#include "ccr/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>

#include "ccr/zeroforcing.hpp"

namespace ccr {

namespace {

constexpr double nan_v = std::numeric_limits<double>::quiet_NaN();

// Dense assembly of I + lambda_0 h_m0 h_m0^H + sum_{n != m} lambda_n h_mn h_mn^H.
CMatrix cu_dual_matrix(std::size_t m, const RVector& lambda, const StackedProblem& sp) {
    const std::size_t N = sp.N;
    CMatrix q = CMatrix::identity(N);
    for (std::size_t u = 0; u <= sp.M; ++u) {
        if (u == m + 1) continue;
        const CVector& h = sp.h[m][u];
        for (std::size_t r = 0; r < N; ++r)
            for (std::size_t c = 0; c < N; ++c) q(r, c) += lambda[u] * h[r] * std::conj(h[c]);
    }
    return q;
}

// h0^H (D_v + sum_u lambda_u Hbar_u^H Hbar_u)^{-1} h0, block by block.
double relay_quadratic(const RVector& lambda, const StackedProblem& sp) {
    const std::size_t N = sp.N;
    double total = 0.0;
    for (std::size_t j = 0; j < sp.M; ++j) {
        CMatrix r(N, N);
        for (std::size_t i = 0; i < N; ++i) r(i, i) = sp.dv[j];
        for (std::size_t u = 0; u <= sp.M; ++u) {
            const CVector& hb = sp.hbar[u][j];
            for (std::size_t a = 0; a < N; ++a)
                for (std::size_t b = 0; b < N; ++b) r(a, b) += lambda[u] * hb[a] * std::conj(hb[b]);
        }
        const auto h0j = sp.block(sp.h0, j);
        const CVector x = hermitian_solve(r, h0j);
        total += dot(h0j, x).real();
    }
    return total;
}

double margin(double lambda, double quad, double target) {
    if (target == 0.0) return lambda == 0.0 ? 1.0 : -std::numeric_limits<double>::infinity();
    return 1.0 - lambda * quad / target;
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

double KktReport::max_abs_slack() const {
    double m = 0.0;
    for (double s : slack) m = std::isnan(s) ? s : std::max(m, std::abs(s));
    return m;
}

double KktReport::min_margin() const {
    double m = std::numeric_limits<double>::infinity();
    for (double s : lmi_margin) m = std::isnan(s) ? s : std::min(m, s);
    return m;
}

KktReport kkt_verify(const DownlinkSolution& sol, const DualState& lam, const StackedProblem& sp,
                     const ChannelSet* ch) {
    const std::size_t users = sp.users();
    KktReport rep;
    rep.slack.assign(users, nan_v);
    rep.lmi_margin.assign(users, nan_v);
    rep.gap = nan_v;
    rep.orthogonality_residual = nan_v;

    try {
        const RVector achieved = constraint_sinrs(sp, sol.w, sol.v);
        for (std::size_t u = 0; u < users; ++u) {
            const double target = u == 0 ? sp.targets.gamma0p : sp.targets.gamma[u - 1];
            rep.slack[u] = target == 0.0 ? 0.0 : achieved[u] / target - 1.0;
        }
    } catch (const std::exception&) {
    }

    if (lam.lambda.size() == users) {
        try {
            rep.lmi_margin[0] = margin(lam.lambda[0], relay_quadratic(lam.lambda, sp), sp.targets.gamma0p);
        } catch (const std::exception&) {
        }
        for (std::size_t m = 0; m < sp.M; ++m) {
            try {
                const CVector& h = sp.h[m][m + 1];
                const CVector x = hermitian_solve(cu_dual_matrix(m, lam.lambda, sp), h);
                rep.lmi_margin[m + 1] = margin(lam.lambda[m + 1], dot(h, x).real(), sp.targets.gamma[m]);
            } catch (const std::exception&) {
            }
        }
        try {
            const double dual = dot(std::span<const double>(sp.noise), lam.lambda);
            const double primal = total_power(sol, sp);
            rep.gap = primal > 0.0 ? std::abs(dual - primal) / primal : std::abs(dual);
        } catch (const std::exception&) {
        }
    }

    if (ch) {
        try {
            rep.orthogonality_residual = zf_orthogonality_residual(*ch, sol.w);
        } catch (const std::exception&) {
        }
    }
    return rep;
}

void write_kkt_csv(std::ostream& out, const KktReport& rep) {
    out << "constraint,slack,margin\n";
    for (std::size_t u = 0; u < rep.slack.size(); ++u)
        out << (u == 0 ? std::string("pu") : "cu" + std::to_string(u)) << ',' << fmt(rep.slack[u]) << ','
            << fmt(rep.lmi_margin[u]) << '\n';
    out << "gap," << fmt(rep.gap) << ",\n";
}

ScalarSolution scalar_closed_form(const ScalarParams& s) {
    const double relay = s.P0 * s.g2 + s.Ns;
    const double denom = s.g2 - s.gamma0p * s.Ns - s.gamma0p * s.gamma1 * relay;
    if (!(denom > 0.0) || !(s.h10 > 0.0) || !(s.h11 > 0.0))
        throw Error(ErrorKind::InfeasibleScalar, "relay cannot reach the PU target: denominator " + fmt(denom));

    ScalarSolution out;
    const double l0 = s.gamma0p * relay * (1.0 + s.gamma1) / (s.h10 * denom);
    const double l1 = s.gamma1 * (1.0 + l0 * s.h10) / s.h11;
    const double p0 = s.gamma0p * (s.h10 * s.gamma1 * s.N1 / s.h11 + s.N2p) / (s.g2 * s.h10 * denom);
    const double p1 = s.gamma1 * (p0 * s.g2 * relay + s.N1 / s.h11);
    out.lambda = {l0, l1};
    out.p = {p0, p1};
    out.total = p0 * relay * s.g2 + p1;
    return out;
}

RVector grid_power_search(const BeamSet& dirs, const StackedProblem& sp, std::size_t resolution,
                          std::size_t refinements) {
    const std::size_t M = sp.M;
    if (M < 1 || M > 2) throw Error(ErrorKind::InvalidConfig, "grid search supports M = 1 or 2");
    if (resolution < 3) throw Error(ErrorKind::InvalidConfig, "resolution must be at least 3");

    // Link gains of the fixed unit directions, computed straight from the channels.
    const double a0 = abs2_dot(sp.h0, dirs.v);
    const double b0 = sp.hbar_norm2(0, dirs.v);
    const double s0 = sp.dv_quadratic(dirs.v);
    RVector a(M), leak(M), pu_int(M);
    std::vector<RVector> cross(M, RVector(M, 0.0));  // cross[m][n]: CBS n's beam at CU m
    for (std::size_t m = 0; m < M; ++m) {
        a[m] = abs2_dot(sp.h[m][m + 1], dirs.w[m]);
        leak[m] = sp.hbar_norm2(m + 1, dirs.v);
        pu_int[m] = abs2_dot(sp.h[m][0], dirs.w[m]);
        for (std::size_t n = 0; n < M; ++n)
            if (n != m) cross[m][n] = abs2_dot(sp.h[n][m + 1], dirs.w[n]);
    }
    const double g0 = sp.targets.gamma0p;
    const RVector& gam = sp.targets.gamma;
    if (!(a0 > 0.0)) throw Error(ErrorKind::NoFeasibleGridPoint, "relay direction misses the PU");

    auto feasible = [&](const RVector& p) {
        constexpr double rel = 1e-12;
        double d = sp.noise[0] + p[0] * b0;
        for (std::size_t m = 0; m < M; ++m) d += p[m + 1] * pu_int[m];
        if (p[0] * a0 < g0 * d * (1.0 - rel)) return false;
        for (std::size_t m = 0; m < M; ++m) {
            double dm = sp.noise[m + 1] + p[0] * leak[m];
            for (std::size_t n = 0; n < M; ++n) dm += p[n + 1] * cross[m][n];
            if (p[m + 1] * a[m] < gam[m] * dm * (1.0 - rel)) return false;
        }
        return true;
    };
    // Smallest power of the last CU for the other coordinates.
    auto complete = [&](RVector& p) {
        const std::size_t m = M - 1;
        if (gam[m] == 0.0) {
            p[M] = 0.0;
            return;
        }
        double dm = sp.noise[m + 1] + p[0] * leak[m];
        for (std::size_t n = 0; n + 1 < M; ++n) dm += p[n + 1] * cross[m][n];
        p[M] = gam[m] * dm / a[m];
    };

    // Enumerated coordinates: p0 and, for M = 2, p1.
    const std::size_t dims = M;
    RVector est(dims);
    est[0] = g0 * sp.noise[0] / a0;
    for (std::size_t k = 1; k < dims; ++k)
        est[k] = a[k - 1] > 0.0 ? gam[k - 1] * sp.noise[k] / a[k - 1] : 0.0;

    std::vector<RVector> axes(dims);
    for (std::size_t k = 0; k < dims; ++k) {
        if (est[k] == 0.0) {
            axes[k] = {0.0};
            continue;
        }
        for (std::size_t i = 0; i < resolution; ++i)
            axes[k].push_back(est[k] * std::pow(10.0, -4.0 + 8.0 * static_cast<double>(i) / (resolution - 1)));
    }

    RVector best;
    double best_total = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> best_idx(dims, 0);
    for (std::size_t level = 0; level <= refinements; ++level) {
        bool improved = false;
        RVector p(M + 1, 0.0);
        std::vector<std::size_t> idx(dims, 0);
        std::function<void(std::size_t)> walk = [&](std::size_t k) {
            if (k == dims) {
                complete(p);
                if (!feasible(p)) return;
                double total = p[0] * s0;
                for (std::size_t m = 1; m <= M; ++m) total += p[m];
                if (total < best_total) {
                    best_total = total;
                    best = p;
                    best_idx = idx;
                    improved = true;
                }
                return;
            }
            for (std::size_t i = 0; i < axes[k].size(); ++i) {
                idx[k] = i;
                p[k] = axes[k][i];
                walk(k + 1);
            }
        };
        walk(0);
        if (best.empty()) throw Error(ErrorKind::NoFeasibleGridPoint, "no grid point meets every constraint");
        if (level == refinements || !improved) break;

        // Zoom: linear grid across the neighbouring cells of the best point.
        for (std::size_t k = 0; k < dims; ++k) {
            const RVector& ax = axes[k];
            if (ax.size() == 1) continue;
            const std::size_t i = best_idx[k];
            const double lo = ax[i == 0 ? 0 : i - 1];
            const double hi = ax[std::min(i + 1, ax.size() - 1)];
            RVector fine(resolution);
            for (std::size_t t = 0; t < resolution; ++t)
                fine[t] = lo + (hi - lo) * static_cast<double>(t) / (resolution - 1);
            axes[k] = std::move(fine);
        }
    }
    return best;
}

}  // namespace ccr
