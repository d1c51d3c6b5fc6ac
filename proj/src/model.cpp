#include "ccr/model.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "ccr/rng.hpp"

namespace ccr {

std::string_view to_string(FadingMode mode) noexcept {
    return mode == FadingMode::phase_only ? "phase-only" : "rayleigh";
}

FadingMode parse_fading_mode(std::string_view text) {
    if (text == "phase-only" || text == "phase_only") return FadingMode::phase_only;
    if (text == "rayleigh") return FadingMode::rayleigh;
    throw Error(ErrorKind::InvalidConfig, "unknown fading mode '" + std::string(text) + "'");
}

std::string_view to_string(Provenance p) noexcept {
    switch (p) {
        case Provenance::optimal: return "optimal";
        case Provenance::czf: return "czf";
        case Provenance::pzf: return "pzf";
        case Provenance::manual: return "manual";
    }
    return "manual";
}

void SystemConfig::validate() const {
    auto fail = [](const std::string& what) { throw Error(ErrorKind::InvalidConfig, what); };
    if (K < 1 || M < 1 || N < 1) fail("K, M, N must be >= 1");
    if (!(P0 > 0) || !(N1p > 0) || !(N2p > 0)) fail("powers must be positive");
    if (!Ns.empty() && Ns.size() != M) fail("Ns must have M entries");
    if (!Nm.empty() && Nm.size() != M) fail("Nm must have M entries");
    if (!r.empty() && r.size() != M) fail("r must have M entries");
    for (std::size_t j = 0; j < M; ++j) {
        if (!(cbs_noise(j) > 0) || !(cu_noise(j) > 0)) fail("noise powers must be positive");
        if (!(cu_rate(j) >= 0)) fail("rates must be nonnegative");
    }
    if (!(r0 >= 0)) fail("r0 must be nonnegative");
    if (!(alpha > 0)) fail("alpha must be positive");
    if (!(d.pbs_pu > 0 && d.pbs_cbs > 0 && d.cbs_pu > 0 && d.cbs_cu > 0)) fail("distances must be positive");
    if (f_override) {
        if (f_override->size() != K) fail("f override must have K entries");
        if (std::abs(norm(*f_override) - 1.0) > 1e-12) fail("f override must be unit norm");
    }
}

double ChannelSet::direct_gain() const { return abs2_dot(h0p, f) / N1p; }

ChannelSet generate_instance(const SystemConfig& config, std::uint64_t index) {
    config.validate();
    auto eng = realization_stream(config.seed, index);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);

    auto draw = [&](double dist) {
        const double mag = std::pow(dist, -config.alpha / 2.0);
        cdouble h = std::polar(mag, phase(eng));
        if (config.fading == FadingMode::rayleigh) h *= complex_gaussian(eng);
        return h;
    };

    ChannelSet ch;
    ch.K = config.K;
    ch.M = config.M;
    ch.N = config.N;
    ch.P0 = config.P0;
    ch.N1p = config.N1p;
    ch.N2p = config.N2p;
    for (std::size_t j = 0; j < config.M; ++j) {
        ch.Ns.push_back(config.cbs_noise(j));
        ch.Nm.push_back(config.cu_noise(j));
    }

    ch.h0p.resize(config.K);
    for (auto& x : ch.h0p) x = draw(config.d.pbs_pu);
    ch.f = config.f_override ? *config.f_override : normalized(ch.h0p);

    ch.g.resize(config.M);
    for (std::size_t j = 0; j < config.M; ++j) {
        CMatrix G(config.N, config.K);
        for (std::size_t r = 0; r < config.N; ++r)
            for (std::size_t c = 0; c < config.K; ++c) G(r, c) = draw(config.d.pbs_cbs);
        ch.g[j] = matvec<cdouble>(G, ch.f);
    }

    ch.h.assign(config.M, std::vector<CVector>(config.M + 1, CVector(config.N)));
    for (std::size_t j = 0; j < config.M; ++j)
        for (std::size_t u = 0; u <= config.M; ++u)
            for (auto& x : ch.h[j][u]) x = draw(u == 0 ? config.d.cbs_pu : config.d.cbs_cu);
    return ch;
}

double rate_from_sinr(double sinr) { return 0.5 * std::log2(1.0 + sinr); }
double sinr_from_rate(double rate) { return std::exp2(2.0 * rate) - 1.0; }

Targets gamma_targets(const SystemConfig& config, const ChannelSet& ch) {
    Targets t;
    t.gamma0p = sinr_from_rate(config.r0) / ch.P0 - ch.direct_gain();
    t.gamma.resize(ch.M);
    for (std::size_t m = 0; m < ch.M; ++m) t.gamma[m] = sinr_from_rate(config.cu_rate(m));
    return t;
}

StackedProblem build_stacked(const ChannelSet& ch, const Targets& t) {
    if (!(t.gamma0p > 0.0))
        throw Error(ErrorKind::ModeII, "gamma0p = " + std::to_string(t.gamma0p) + ": direct link suffices");
    if (t.gamma.size() != ch.M) throw Error(ErrorKind::DimensionMismatch, "targets vs channel set");

    const std::size_t M = ch.M, N = ch.N;
    StackedProblem sp;
    sp.M = M;
    sp.N = N;
    sp.targets = t;
    sp.h = ch.h;
    sp.h0.resize(M * N);
    sp.hbar.assign(M + 1, std::vector<CVector>(M));
    sp.noise.resize(M + 1);
    sp.noise[0] = ch.N2p;

    for (std::size_t j = 0; j < M; ++j) {
        const double gn2 = norm2(ch.g[j]);
        if (!(gn2 > 0.0))
            throw Error(ErrorKind::DegenerateRelayChannel, "||g_" + std::to_string(j + 1) + "|| = 0");
        const double gain = ch.P0 * gn2 + ch.Ns[j];
        sp.gnorm2.push_back(gn2);
        sp.relay_gain.push_back(gain);
        sp.ns.push_back(ch.Ns[j]);
        sp.dv.push_back(gain * gn2);

        for (std::size_t i = 0; i < N; ++i) sp.h0[j * N + i] = ch.h_pu(j)[i] * gn2;
        sp.hbar[0][j] = scaled(ch.h_pu(j), std::sqrt(ch.Ns[j] * gn2));
        for (std::size_t m = 0; m < M; ++m) sp.hbar[m + 1][j] = scaled(ch.h_cu(j, m), std::sqrt(gn2 * gain));
    }
    for (std::size_t m = 0; m < M; ++m) sp.noise[m + 1] = ch.Nm[m];
    return sp;
}

CMatrix StackedProblem::dense_hbar(std::size_t u) const {
    CMatrix out(M, M * N);
    for (std::size_t j = 0; j < M; ++j)
        for (std::size_t i = 0; i < N; ++i) out(j, j * N + i) = std::conj(hbar[u][j][i]);
    return out;
}

double StackedProblem::hbar_norm2(std::size_t u, std::span<const cdouble> x) const {
    double s = 0.0;
    for (std::size_t j = 0; j < M; ++j) s += abs2_dot(hbar[u][j], block(x, j));
    return s;
}

double StackedProblem::dv_quadratic(std::span<const cdouble> x) const {
    double s = 0.0;
    for (std::size_t j = 0; j < M; ++j) s += dv[j] * norm2(block(x, j));
    return s;
}

DownlinkSolution DownlinkSolution::zero(std::size_t M, std::size_t N) {
    DownlinkSolution s;
    s.w.assign(M, CVector(N));
    s.v.assign(M * N, cdouble{});
    return s;
}

CMatrix expand_relay_matrix(std::span<const cdouble> v_j, std::span<const cdouble> g_j) { return outer(v_j, g_j); }

namespace {

void check_dims(const ChannelSet& ch, const DownlinkSolution& sol) {
    if (sol.w.size() != ch.M || sol.v.size() != ch.M * ch.N)
        throw Error(ErrorKind::DimensionMismatch, "solution does not match channel set");
    for (const auto& w : sol.w)
        if (w.size() != ch.N) throw Error(ErrorKind::DimensionMismatch, "beamformer length");
}

}  // namespace

SinrReport evaluate(const ChannelSet& ch, const DownlinkSolution& sol) {
    check_dims(ch, sol);
    const std::size_t M = ch.M, N = ch.N;

    std::vector<CMatrix> A;
    std::vector<CVector> Ag;
    A.reserve(M);
    for (std::size_t j = 0; j < M; ++j) {
        A.push_back(expand_relay_matrix(std::span(sol.v).subspan(j * N, N), ch.g[j]));
        Ag.push_back(matvec<cdouble>(A.back(), ch.g[j]));
    }
    // ||h^H A||^2 = ||A^H h||^2
    auto leak = [&](std::size_t j, const CVector& h) { return norm2(matvec<cdouble>(A[j].adjoint(), h)); };

    SinrReport rep;
    {
        cdouble coherent{};
        double denom = ch.N2p;
        for (std::size_t j = 0; j < M; ++j) {
            coherent += dot(ch.h_pu(j), Ag[j]);
            denom += abs2_dot(ch.h_pu(j), sol.w[j]) + ch.Ns[j] * leak(j, ch.h_pu(j));
        }
        rep.sinr_pu_relay = std::norm(coherent) / denom;
        rep.sinr_pu_total = ch.P0 * (ch.direct_gain() + rep.sinr_pu_relay);
        rep.rate_pu = rate_from_sinr(rep.sinr_pu_total);
    }
    for (std::size_t m = 0; m < M; ++m) {
        double denom = ch.Nm[m];
        for (std::size_t j = 0; j < M; ++j) {
            const CVector& h = ch.h_cu(j, m);
            if (j != m) denom += abs2_dot(h, sol.w[j]);
            denom += ch.P0 * abs2_dot(h, Ag[j]) + ch.Ns[j] * leak(j, h);
        }
        const double s = abs2_dot(ch.h_cu(m, m), sol.w[m]) / denom;
        rep.sinr_cu.push_back(s);
        rep.rate_cu.push_back(rate_from_sinr(s));
    }
    return rep;
}

RVector constraint_sinrs(const StackedProblem& sp, std::span<const CVector> w, std::span<const cdouble> v) {
    const std::size_t M = sp.M;
    if (w.size() != M || v.size() != M * sp.N) throw Error(ErrorKind::DimensionMismatch, "constraint_sinrs");
    RVector out(M + 1);
    double denom = sp.noise[0] + sp.hbar_norm2(0, v);
    for (std::size_t j = 0; j < M; ++j) denom += abs2_dot(sp.h[j][0], w[j]);
    out[0] = abs2_dot(sp.h0, v) / denom;
    for (std::size_t m = 0; m < M; ++m) {
        double d = sp.noise[m + 1] + sp.hbar_norm2(m + 1, v);
        for (std::size_t j = 0; j < M; ++j)
            if (j != m) d += abs2_dot(sp.h[j][m + 1], w[j]);
        out[m + 1] = abs2_dot(sp.h[m][m + 1], w[m]) / d;
    }
    return out;
}

double total_power(const DownlinkSolution& sol, const StackedProblem& sp) {
    double s = sp.dv_quadratic(sol.v);
    for (const auto& w : sol.w) s += norm2(w);
    return s;
}

double total_power_relay_matrices(const ChannelSet& ch, const DownlinkSolution& sol) {
    check_dims(ch, sol);
    double s = 0.0;
    for (std::size_t j = 0; j < ch.M; ++j) {
        const CMatrix A = expand_relay_matrix(std::span(sol.v).subspan(j * ch.N, ch.N), ch.g[j]);
        s += norm2(sol.w[j]) + ch.P0 * norm2(matvec<cdouble>(A, ch.g[j])) + ch.Ns[j] * frobenius_norm2(A);
    }
    return s;
}

// ---------------------------------------------------------------------------
// text format

namespace {

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_vector(std::ostream& out, const CVector& v) {
    for (std::size_t i = 0; i < v.size(); ++i)
        out << (i ? " " : "") << fmt_double(v[i].real()) << ',' << fmt_double(v[i].imag());
}

void write_reals(std::ostream& out, const RVector& v) {
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? " " : "") << fmt_double(v[i]);
}

[[noreturn]] void parse_fail(const std::string& what) { throw Error(ErrorKind::Parse, what); }

double to_double(const std::string& tok) {
    try {
        std::size_t used = 0;
        const double x = std::stod(tok, &used);
        if (used != tok.size()) parse_fail("trailing characters in '" + tok + "'");
        return x;
    } catch (const std::logic_error&) {
        parse_fail("bad number '" + tok + "'");
    }
}

cdouble to_complex(const std::string& tok) {
    const auto comma = tok.find(',');
    if (comma == std::string::npos) parse_fail("expected re,im pair, got '" + tok + "'");
    return {to_double(tok.substr(0, comma)), to_double(tok.substr(comma + 1))};
}

}  // namespace

void write_channel_set(std::ostream& out, const ChannelSet& ch) {
    out << "# ccr channel set v1\n";
    out << "# ordering: g_1..g_M, then h_jm row-major in (j, m); m = 0 is the PU\n";
    out << "K " << ch.K << "\nM " << ch.M << "\nN " << ch.N << '\n';
    out << "P0 " << fmt_double(ch.P0) << "\nN1p " << fmt_double(ch.N1p) << "\nN2p " << fmt_double(ch.N2p) << '\n';
    out << "Ns ";
    write_reals(out, ch.Ns);
    out << "\nNm ";
    write_reals(out, ch.Nm);
    out << "\nh0p ";
    write_vector(out, ch.h0p);
    out << "\nf ";
    write_vector(out, ch.f);
    out << '\n';
    for (std::size_t j = 0; j < ch.M; ++j) {
        out << "g " << j + 1 << ' ';
        write_vector(out, ch.g[j]);
        out << '\n';
    }
    for (std::size_t j = 0; j < ch.M; ++j)
        for (std::size_t u = 0; u <= ch.M; ++u) {
            out << "h " << j + 1 << ' ' << u << ' ';
            write_vector(out, ch.h[j][u]);
            out << '\n';
        }
}

ChannelSet read_channel_set(std::istream& in) {
    ChannelSet ch;
    bool have_dims[3] = {false, false, false};
    std::string line;
    std::size_t g_seen = 0, h_seen = 0;
    auto ensure_shape = [&] {
        if (!(have_dims[0] && have_dims[1] && have_dims[2])) parse_fail("K, M, N must precede channel data");
        if (ch.g.empty()) {
            ch.g.assign(ch.M, CVector(ch.N));
            ch.h.assign(ch.M, std::vector<CVector>(ch.M + 1, CVector(ch.N)));
        }
    };
    auto read_cvec = [&](std::istringstream& ls, std::size_t n) {
        CVector v;
        std::string tok;
        while (ls >> tok) v.push_back(to_complex(tok));
        if (v.size() != n) parse_fail("expected " + std::to_string(n) + " entries, got " + std::to_string(v.size()));
        return v;
    };
    auto read_rvec = [&](std::istringstream& ls) {
        RVector v;
        std::string tok;
        while (ls >> tok) v.push_back(to_double(tok));
        return v;
    };
    auto read_index = [&](std::istringstream& ls, std::size_t lo, std::size_t hi) {
        long long k = 0;
        if (!(ls >> k) || k < static_cast<long long>(lo) || k > static_cast<long long>(hi))
            parse_fail("index out of range in line '" + line + "'");
        return static_cast<std::size_t>(k);
    };

    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "K" || key == "M" || key == "N") {
            std::size_t v = 0;
            if (!(ls >> v) || v == 0) parse_fail("bad dimension line '" + line + "'");
            (key == "K" ? ch.K : key == "M" ? ch.M : ch.N) = v;
            have_dims[key == "K" ? 0 : key == "M" ? 1 : 2] = true;
        } else if (key == "P0" || key == "N1p" || key == "N2p") {
            const RVector v = read_rvec(ls);
            if (v.size() != 1) parse_fail("expected one value for " + key);
            (key == "P0" ? ch.P0 : key == "N1p" ? ch.N1p : ch.N2p) = v[0];
        } else if (key == "Ns" || key == "Nm") {
            (key == "Ns" ? ch.Ns : ch.Nm) = read_rvec(ls);
        } else if (key == "h0p" || key == "f") {
            ensure_shape();
            (key == "h0p" ? ch.h0p : ch.f) = read_cvec(ls, ch.K);
        } else if (key == "g") {
            ensure_shape();
            const std::size_t j = read_index(ls, 1, ch.M);
            ch.g[j - 1] = read_cvec(ls, ch.N);
            ++g_seen;
        } else if (key == "h") {
            ensure_shape();
            const std::size_t j = read_index(ls, 1, ch.M);
            const std::size_t u = read_index(ls, 0, ch.M);
            ch.h[j - 1][u] = read_cvec(ls, ch.N);
            ++h_seen;
        } else {
            parse_fail("unknown key '" + key + "'");
        }
    }
    ensure_shape();
    if (ch.Ns.size() != ch.M || ch.Nm.size() != ch.M) parse_fail("Ns/Nm must have M entries");
    if (ch.h0p.size() != ch.K || ch.f.size() != ch.K) parse_fail("missing h0p or f");
    if (g_seen != ch.M || h_seen != ch.M * (ch.M + 1)) parse_fail("incomplete channel data");
    return ch;
}

}  // namespace ccr
