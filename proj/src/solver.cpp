#include "ccr/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace ccr {

namespace {

/// Re(x^H (c I + sum_k s_k y_k y_k^H)^{-1} x); all s_k >= 0, c > 0.
double mmse_gain(double c, std::span<const double> weights, std::span<const CVector* const> dirs,
                 const CVector& x, CVector* solution = nullptr) {
    const std::size_t n = x.size();
    CMatrix q(n, n);
    for (std::size_t i = 0; i < n; ++i) q(i, i) = c;
    for (std::size_t k = 0; k < dirs.size(); ++k)
        if (weights[k] != 0.0) add_outer(q, *dirs[k], weights[k]);
    CVector y = hermitian_solve(q, x);
    const double g = dot(x, y).real();
    if (solution) *solution = std::move(y);
    return g;
}

/// Inverse-MMSE filter of CBS m for its own CU against the PU and the other CUs.
double cu_gain(const std::vector<CVector>& hm, std::size_t m, const RVector& lambda, CVector* filter = nullptr) {
    const std::size_t M = hm.size() - 1;
    std::vector<double> weights;
    std::vector<const CVector*> dirs;
    weights.push_back(lambda[0]);
    dirs.push_back(&hm[0]);
    for (std::size_t n = 0; n < M; ++n) {
        if (n == m) continue;
        weights.push_back(lambda[n + 1]);
        dirs.push_back(&hm[n + 1]);
    }
    return mmse_gain(1.0, weights, dirs, hm[m + 1], filter);
}

/// Per-CBS relay quantity: ||g||^2 h_j0^H (lambda_0 Ns h_j0 h_j0^H + c I + sum lambda_m c h_jm h_jm^H)^{-1} h_j0.
double relay_gain_local(const std::vector<CVector>& hj, double gnorm2, double c, double ns, const RVector& lambda,
                        CVector* filter = nullptr) {
    const std::size_t M = hj.size() - 1;
    std::vector<double> weights{lambda[0] * ns};
    std::vector<const CVector*> dirs{&hj[0]};
    for (std::size_t m = 0; m < M; ++m) {
        weights.push_back(lambda[m + 1] * c);
        dirs.push_back(&hj[m + 1]);
    }
    return gnorm2 * mmse_gain(c, weights, dirs, hj[0], filter);
}

void check_lambda(const RVector& lambda, const StackedProblem& sp) {
    if (lambda.size() != sp.users()) throw Error(ErrorKind::DimensionMismatch, "lambda must have M + 1 entries");
}

double relative_change(const RVector& prev, const RVector& next) {
    double diff = 0.0;
    for (std::size_t i = 0; i < prev.size(); ++i) diff = std::max(diff, std::abs(next[i] - prev[i]));
    const double scale = norm_inf(next);
    return scale == 0.0 ? (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity()) : diff / scale;
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

// ---------------------------------------------------------------------------

RVector CouplingMatrices::Dsigma() const {
    RVector out(sigma.size());
    for (std::size_t i = 0; i < sigma.size(); ++i) out[i] = D(i, i) * sigma[i];
    return out;
}

void ConvergenceTrace::push(const RVector& lambda, const StackedProblem& sp) {
    lambdas.push_back(lambda);
    dual_objective.push_back(dot(std::span<const double>(sp.noise), lambda));
}

void attach_error_ratios(ConvergenceTrace& trace, const DualState& lam_star) {
    trace.err_ratio.assign(trace.size(), std::numeric_limits<double>::quiet_NaN());
    double prev = 0.0;
    for (std::size_t k = 0; k < trace.size(); ++k) {
        double e = 0.0;
        for (std::size_t i = 0; i < lam_star.lambda.size(); ++i)
            e = std::max(e, std::abs(trace.lambdas[k][i] - lam_star.lambda[i]));
        if (k > 0 && prev > 0.0) trace.err_ratio[k] = e / prev;
        prev = e;
    }
}

void write_trace_csv(std::ostream& out, const ConvergenceTrace& trace) {
    const std::size_t users = trace.lambdas.empty() ? 0 : trace.lambdas.front().size();
    out << "iter";
    for (std::size_t i = 0; i < users; ++i) out << ",lambda_" << i;
    out << ",dual_objective,err_ratio\n";
    for (std::size_t k = 0; k < trace.size(); ++k) {
        out << k;
        for (double x : trace.lambdas[k]) out << ',' << fmt(x);
        out << ',' << fmt(trace.dual_objective[k]) << ',';
        if (k < trace.err_ratio.size() && !std::isnan(trace.err_ratio[k])) out << fmt(trace.err_ratio[k]);
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// alg1

double cu_interference_function(std::size_t m, const RVector& lambda, const StackedProblem& sp) {
    check_lambda(lambda, sp);
    const double gamma = sp.targets.gamma[m];
    if (gamma == 0.0) return 0.0;
    return gamma / cu_gain(sp.h[m], m, lambda);
}

double relay_alpha(std::size_t j, const RVector& lambda, const StackedProblem& sp) {
    check_lambda(lambda, sp);
    return relay_gain_local(sp.h[j], sp.gnorm2[j], sp.relay_gain[j], sp.ns[j], lambda);
}

double relay_interference_function(const RVector& lambda, const StackedProblem& sp) {
    double sum = 0.0;
    for (std::size_t j = 0; j < sp.M; ++j) sum += relay_alpha(j, lambda, sp);
    return sp.targets.gamma0p / sum;
}

DualState alg1_step(const DualState& lam, const StackedProblem& sp, UpdateOrder order) {
    check_lambda(lam.lambda, sp);
    DualState next = lam;
    for (std::size_t m = 0; m < sp.M; ++m) next.lambda[m + 1] = cu_interference_function(m, lam.lambda, sp);
    next.lambda[0] =
        relay_interference_function(order == UpdateOrder::gauss_seidel ? next.lambda : lam.lambda, sp);
    return next;
}

Alg1Result alg1_solve(const StackedProblem& sp, const Alg1Options& opts) {
    if (!(opts.tol > 0.0)) throw Error(ErrorKind::InvalidConfig, "tolerance must be positive");
    Alg1Result res;
    res.lambda = DualState::zeros(sp.users());
    res.trace.push(res.lambda.lambda, sp);
    for (std::size_t it = 1; it <= opts.cap; ++it) {
        DualState next = alg1_step(res.lambda, sp, opts.order);
        for (double x : next.lambda)
            if (!std::isfinite(x) || x > opts.ceiling)
                throw Error(ErrorKind::Diverged, "dual variable exceeded " + fmt(opts.ceiling) + " at iteration " +
                                                     std::to_string(it));
        const double change = relative_change(res.lambda.lambda, next.lambda);
        res.trace.push(next.lambda, sp);
        res.lambda = std::move(next);
        res.iterations = it;
        if (change <= opts.tol) return res;
    }
    throw Error(ErrorKind::Diverged, "no convergence within " + std::to_string(opts.cap) + " iterations");
}

// ---------------------------------------------------------------------------
// distributed alg1

DistributedProblem make_local_views(const ChannelSet& ch, const Targets& t) {
    DistributedProblem dp;
    dp.gamma0p = t.gamma0p;
    dp.n2p = ch.N2p;
    for (std::size_t j = 0; j < ch.M; ++j) {
        LocalView node;
        node.index = j;
        node.h = ch.h[j];
        node.g = ch.g[j];
        node.ns = ch.Ns[j];
        node.p0 = ch.P0;
        node.cu_noise = ch.Nm[j];
        node.gamma = t.gamma[j];
        dp.nodes.push_back(std::move(node));
    }
    return dp;
}

void MessageLog::post(std::size_t round, std::string node, std::string name, double value) {
    records.push_back({round, std::move(node), std::move(name), value, records.size() + 1});
}

void write_message_log_csv(std::ostream& out, const MessageLog& log) {
    out << "round,node,scalar_name,value,cumulative_count\n";
    for (const auto& r : log.records)
        out << r.round << ',' << r.node << ',' << r.scalar_name << ',' << fmt(r.value) << ',' << r.cumulative_count
            << '\n';
}

namespace {

StackedProblem assemble(const DistributedProblem& dp) {
    const std::size_t M = dp.nodes.size();
    ChannelSet ch;
    ch.M = M;
    ch.N = M ? dp.nodes.front().g.size() : 0;
    ch.P0 = M ? dp.nodes.front().p0 : 1.0;
    ch.N2p = dp.n2p;
    Targets t;
    t.gamma0p = dp.gamma0p;
    for (const auto& node : dp.nodes) {
        ch.g.push_back(node.g);
        ch.h.push_back(node.h);
        ch.Ns.push_back(node.ns);
        ch.Nm.push_back(node.cu_noise);
        t.gamma.push_back(node.gamma);
    }
    return build_stacked(ch, t);
}

std::string node_name(std::size_t j) { return "cbs" + std::to_string(j + 1); }

}  // namespace

DistributedResult alg1_distributed_solve(const DistributedProblem& dp, const Alg1Options& opts) {
    const std::size_t M = dp.nodes.size();
    if (M == 0) throw Error(ErrorKind::DimensionMismatch, "no nodes");
    RVector noise(M + 1);
    noise[0] = dp.n2p;
    for (std::size_t j = 0; j < M; ++j) noise[j + 1] = dp.nodes[j].cu_noise;

    DistributedResult res;
    RVector lambda(M + 1, 0.0);
    auto record = [&](const RVector& l) {
        res.trace.lambdas.push_back(l);
        res.trace.dual_objective.push_back(dot(std::span<const double>(noise), l));
    };
    record(lambda);

    for (std::size_t round = 1; round <= opts.cap; ++round) {
        // Each CBS updates its own CU dual from local CSI and the shared lambda.
        RVector next = lambda;
        for (const auto& node : dp.nodes) {
            const std::size_t j = node.index;
            next[j + 1] = node.gamma == 0.0 ? 0.0 : node.gamma / cu_gain(node.h, j, lambda);
            res.log.post(round, node_name(j), "lambda_" + std::to_string(j + 1), next[j + 1]);
        }
        // Each CBS evaluates its share of the relay quadratic form and broadcasts it.
        const RVector& basis = opts.order == UpdateOrder::gauss_seidel ? next : lambda;
        double alpha_sum = 0.0;
        for (const auto& node : dp.nodes) {
            const double gn2 = norm2(node.g);
            const double alpha = relay_gain_local(node.h, gn2, node.p0 * gn2 + node.ns, node.ns, basis);
            res.log.post(round, node_name(node.index), "alpha_" + std::to_string(node.index + 1), alpha);
            alpha_sum += alpha;
        }
        next[0] = dp.gamma0p / alpha_sum;

        for (double x : next)
            if (!std::isfinite(x) || x > opts.ceiling)
                throw Error(ErrorKind::Diverged, "dual variable exceeded " + fmt(opts.ceiling) + " in round " +
                                                     std::to_string(round));
        const double change = relative_change(lambda, next);
        lambda = std::move(next);
        record(lambda);
        res.log.rounds = round;
        if (change <= opts.tol) {
            res.iterations = round;
            res.lambda.lambda = lambda;

            // Uplink-downlink conversion matrix, shared once with every CBS.
            const StackedProblem sp = assemble(dp);
            const CouplingMatrices cm = coupling_matrices(uplink_beams(res.lambda, sp), sp);
            RMatrix a = RMatrix::identity(M + 1);
            const RMatrix dft = matmul(cm.D, cm.F.transpose());
            for (std::size_t r = 0; r <= M; ++r)
                for (std::size_t c = 0; c <= M; ++c) a(r, c) -= dft(r, c);
            res.conversion = RMatrix(M + 1, M + 1);
            for (std::size_t c = 0; c <= M; ++c) {
                RVector rhs(M + 1, 0.0);
                rhs[c] = cm.D(c, c);
                const RVector col = linear_solve_real(a, rhs);
                for (std::size_t r = 0; r <= M; ++r) res.conversion(r, c) = col[r];
            }
            for (std::size_t r = 0; r <= M; ++r)
                for (std::size_t c = 0; c <= M; ++c)
                    res.log.post(round + 1, "coordinator",
                                 "conversion_" + std::to_string(r) + "_" + std::to_string(c), res.conversion(r, c));
            return res;
        }
    }
    throw Error(ErrorKind::Diverged, "no convergence within " + std::to_string(opts.cap) + " rounds");
}

std::size_t distributed_message_count(std::size_t n_iter, std::size_t M) { return 2 * n_iter * M + (M + 1) * (M + 1); }

double signaling_ratio(std::size_t n_iter, std::size_t M, std::size_t N) {
    if (n_iter < 1 || M < 1 || N < 1) throw Error(ErrorKind::InvalidConfig, "signaling_ratio arguments must be >= 1");
    return static_cast<double>(distributed_message_count(n_iter, M)) / static_cast<double>(2 * N * M * M);
}

// ---------------------------------------------------------------------------
// alg2

BeamSet uplink_beams(const DualState& lam, const StackedProblem& sp) {
    check_lambda(lam.lambda, sp);
    BeamSet beams;
    for (std::size_t m = 0; m < sp.M; ++m) {
        CVector w;
        cu_gain(sp.h[m], m, lam.lambda, &w);
        if (norm(w) < 1e-14) throw Error(ErrorKind::DegenerateDirection, "receive beam of CU " + std::to_string(m + 1));
        beams.w.push_back(normalized(w));
    }
    // Block j of (D_v + sum lambda_m Hbar_m^H Hbar_m + lambda_0 Hbar_0^H Hbar_0)^{-1} h0.
    CVector v(sp.M * sp.N);
    for (std::size_t j = 0; j < sp.M; ++j) {
        std::vector<double> weights{lam.lambda[0]};
        std::vector<const CVector*> dirs{&sp.hbar[0][j]};
        for (std::size_t m = 0; m < sp.M; ++m) {
            weights.push_back(lam.lambda[m + 1]);
            dirs.push_back(&sp.hbar[m + 1][j]);
        }
        const auto h0j = sp.block(sp.h0, j);
        CVector x;
        mmse_gain(sp.dv[j], weights, dirs, CVector(h0j.begin(), h0j.end()), &x);
        std::copy(x.begin(), x.end(), v.begin() + static_cast<std::ptrdiff_t>(j * sp.N));
    }
    if (norm(v) < 1e-14) throw Error(ErrorKind::DegenerateDirection, "relay receive beam");
    beams.v = normalized(v);
    return beams;
}

CouplingMatrices coupling_matrices(const BeamSet& beams, const StackedProblem& sp) {
    const std::size_t M = sp.M;
    if (beams.w.size() != M || beams.v.size() != M * sp.N) throw Error(ErrorKind::DimensionMismatch, "beam set");
    CouplingMatrices cm;
    cm.F = RMatrix(M + 1, M + 1);
    cm.D = RMatrix(M + 1, M + 1);
    cm.sigma.assign(M + 1, 1.0);
    cm.n = sp.noise;

    cm.F(0, 0) = sp.hbar_norm2(0, beams.v);
    for (std::size_t m = 0; m < M; ++m) {
        cm.F(0, m + 1) = sp.hbar_norm2(m + 1, beams.v);
        // Row m + 1: interference seen by CBS m's receive beam, from the
        // relay (column 0) and from every other CU (column n + 1).
        cm.F(m + 1, 0) = abs2_dot(sp.h[m][0], beams.w[m]);
        for (std::size_t n = 0; n < M; ++n)
            if (n != m) cm.F(m + 1, n + 1) = abs2_dot(sp.h[m][n + 1], beams.w[m]);
    }
    cm.sigma[0] = sp.dv_quadratic(beams.v);

    const double pu_gain = abs2_dot(sp.h0, beams.v);
    if (sp.targets.gamma0p != 0.0) {
        if (pu_gain < 1e-18) throw Error(ErrorKind::ZeroGain, "relay beam orthogonal to the PU channel");
        cm.D(0, 0) = sp.targets.gamma0p / pu_gain;
    }
    for (std::size_t m = 0; m < M; ++m) {
        const double gamma = sp.targets.gamma[m];
        if (gamma == 0.0) continue;
        const double gain = abs2_dot(sp.h[m][m + 1], beams.w[m]);
        if (gain < 1e-18) throw Error(ErrorKind::ZeroGain, "receive beam of CU " + std::to_string(m + 1));
        cm.D(m + 1, m + 1) = gamma / gain;
    }
    return cm;
}

RMatrix extended_balancing_matrix(const CouplingMatrices& cm, double budget) {
    const std::size_t n = cm.sigma.size();
    const RMatrix df = cm.DF();
    const RVector ds = cm.Dsigma();
    RMatrix ext(n + 1, n + 1);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) ext(r, c) = df(r, c);
        ext(r, n) = ds[r];
    }
    for (std::size_t c = 0; c < n; ++c) {
        double s = 0.0;
        for (std::size_t r = 0; r < n; ++r) s += cm.n[r] * df(r, c);
        ext(n, c) = s / budget;
    }
    ext(n, n) = dot(std::span<const double>(cm.n), ds) / budget;
    return ext;
}

double default_probe_budget(const StackedProblem& sp) {
    double s = 0.0;
    for (double x : sp.noise) s += x;
    return 1e6 * s;
}

FeasibleInit alg2_feasible_init(const StackedProblem& sp, double budget, double tol, std::size_t cap) {
    if (!(budget > 0.0)) throw Error(ErrorKind::InvalidConfig, "budget must be positive");
    const std::size_t users = sp.users();
    FeasibleInit out;
    out.lambda = DualState::zeros(users);
    BeamSet beams = uplink_beams(out.lambda, sp);
    double c_prev = 0.0;
    for (std::size_t it = 1; it <= cap; ++it) {
        const CouplingMatrices cm = coupling_matrices(beams, sp);
        const PerronPair pp = dominant_eigpair(extended_balancing_matrix(cm, budget));
        out.iterations = it;
        out.beams = beams;
        if (pp.rho == 0.0 || pp.x[users] == 0.0) {
            out.C = std::numeric_limits<double>::infinity();
            out.lambda = DualState::zeros(users);
            return out;
        }
        out.C = 1.0 / pp.rho;
        for (std::size_t i = 0; i < users; ++i) out.lambda.lambda[i] = pp.x[i] / pp.x[users];
        if (std::abs(out.C - c_prev) < tol * out.C) return out;
        c_prev = out.C;
        beams = uplink_beams(out.lambda, sp);
    }
    return out;
}

RVector fixed_beam_fixed_point_step(const RVector& lambda, const CouplingMatrices& cm) {
    RVector out = matvec<double>(cm.DF(), lambda);
    const RVector ds = cm.Dsigma();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += ds[i];
    return out;
}

RVector fixed_beam_matrix_step(const CouplingMatrices& cm) {
    const std::size_t n = cm.sigma.size();
    RMatrix a = RMatrix::identity(n);
    const RMatrix df = cm.DF();
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) a(r, c) -= df(r, c);
    return linear_solve_real(a, cm.Dsigma());
}

Alg2Result alg2_solve(const StackedProblem& sp, const Alg2Options& opts) {
    const double budget = opts.probe_budget > 0.0 ? opts.probe_budget : default_probe_budget(sp);
    Alg2Result res;
    res.init = alg2_feasible_init(sp, budget);
    if (res.init.C < 1.0)
        throw Error(ErrorKind::Infeasible, "balancing level C = " + fmt(res.init.C) + " < 1 at budget " + fmt(budget));

    res.lambda = DualState::zeros(sp.users());
    res.trace.push(res.lambda.lambda, sp);
    if (std::isinf(res.init.C)) {
        // Vacuous constraints: one step to the zero optimum.
        res.trace.push(res.lambda.lambda, sp);
        res.iterations = 1;
        res.beams = res.init.beams;
        return res;
    }

    BeamSet beams = res.init.beams;
    RVector prev = res.init.lambda.lambda;
    for (std::size_t it = 1; it <= opts.cap; ++it) {
        RVector next = fixed_beam_matrix_step(coupling_matrices(beams, sp));
        const double scale = norm_inf(next);
        for (double& x : next) {
            if (!std::isfinite(x) || x < -1e-12 * scale)
                throw Error(ErrorKind::Singular, "I - DF lost invertibility (negative power)");
            x = std::max(x, 0.0);
        }
        res.trace.push(next, sp);
        res.iterations = it;
        const double change = it == 1 ? std::numeric_limits<double>::infinity() : relative_change(prev, next);
        res.lambda.lambda = next;
        beams = uplink_beams(res.lambda, sp);
        prev = std::move(next);
        if (change <= opts.tol) {
            res.beams = std::move(beams);
            return res;
        }
    }
    throw Error(ErrorKind::NoConvergence, "matrix iteration did not settle in " + std::to_string(opts.cap) + " steps");
}

DownlinkSolution recover_downlink(const DualState& lam, const BeamSet& beams, const StackedProblem& sp) {
    check_lambda(lam.lambda, sp);
    const std::size_t n = sp.users();
    const CouplingMatrices cm = coupling_matrices(beams, sp);
    RMatrix a = RMatrix::identity(n);
    const RMatrix dft = matmul(cm.D, cm.F.transpose());
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) a(r, c) -= dft(r, c);
    RVector rhs(n);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = cm.D(i, i) * cm.n[i];
    RVector p = linear_solve_real(a, rhs);

    const double scale = norm_inf(p);
    for (double& x : p) {
        if (!std::isfinite(x) || x < -1e-9 * scale) throw Error(ErrorKind::NegativePower, "recovered power " + fmt(x));
        x = std::max(x, 0.0);
    }

    DownlinkSolution sol;
    sol.provenance = Provenance::optimal;
    sol.v = scaled(beams.v, std::sqrt(p[0]));
    for (std::size_t m = 0; m < sp.M; ++m) sol.w.push_back(scaled(beams.w[m], std::sqrt(p[m + 1])));
    sol.p = std::move(p);
    return sol;
}

// ---------------------------------------------------------------------------
// diagnostics

ConvergenceOrder classify_errors(std::span<const double> errors, double floor) {
    std::size_t usable = 0;
    while (usable < errors.size() && errors[usable] > floor) ++usable;
    if (usable < 5)
        throw Error(ErrorKind::Inconclusive, "only " + std::to_string(usable) + " iterates above the precision floor");

    RVector ratios;
    for (std::size_t k = 0; k + 1 < usable; ++k) ratios.push_back(errors[k + 1] / errors[k]);
    const std::size_t tail_len = std::max<std::size_t>(3, ratios.size() / 3);
    const std::span<const double> tail(ratios.data() + ratios.size() - tail_len, tail_len);

    bool nonincreasing = true;
    for (std::size_t k = 1; k < tail.size(); ++k) nonincreasing = nonincreasing && tail[k] <= tail[k - 1];
    ConvergenceOrder out;
    if (nonincreasing && tail.back() < 0.25 * tail.front()) {
        out.kind = ConvergenceOrder::Kind::superlinear;
        out.rate = tail.back();
        return out;
    }
    double log_sum = 0.0;
    for (double r : tail) log_sum += std::log(r);
    out.kind = ConvergenceOrder::Kind::linear;
    out.rate = std::exp(log_sum / static_cast<double>(tail.size()));
    return out;
}

ConvergenceOrder convergence_order(const ConvergenceTrace& trace, const DualState& lam_star) {
    RVector errors;
    for (const auto& l : trace.lambdas) {
        double e = 0.0;
        for (std::size_t i = 0; i < l.size(); ++i) e = std::max(e, std::abs(l[i] - lam_star.lambda[i]));
        errors.push_back(e);
    }
    return classify_errors(errors, 1e-10 * std::max(norm_inf(lam_star.lambda), 1e-300));
}

double coupling_spectral_radius(const DualState& lam, const StackedProblem& sp) {
    const CouplingMatrices cm = coupling_matrices(uplink_beams(lam, sp), sp);
    return dominant_eigpair(cm.DF()).rho;
}

}  // namespace ccr
