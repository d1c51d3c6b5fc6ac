#pragma once

// Network model of the cooperative cognitive relay system: one K-antenna PBS
// serving a single-antenna PU, and M N-antenna CBSs each serving one CU while
// amplify-and-forwarding the PU signal with a rank-one relay matrix
// A_j = v_j g_j^H.
//
// Index conventions used throughout the library:
//   * CBS j and CU m are 0-based (0..M-1).
//   * "user" u runs over 0..M, where u = 0 is the PU and u = m + 1 is CU m.
//     Dual/power vectors of length M + 1 follow the same layout.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ccr/numerics.hpp"

namespace ccr {

enum class FadingMode { phase_only, rayleigh };

std::string_view to_string(FadingMode mode) noexcept;
FadingMode parse_fading_mode(std::string_view text);

/// Link distances. Scalar per link class; every CBS shares the same geometry.
struct Distances {
    double pbs_pu = 2.0;
    double pbs_cbs = 1.0;
    double cbs_pu = 1.0;
    double cbs_cu = 1.0;
};

struct SystemConfig {
    std::size_t K = 2;  // PBS antennas
    std::size_t M = 3;  // CBS/CU pairs
    std::size_t N = 4;  // antennas per CBS
    double P0 = 10.0;   // PBS transmit power, normalized to noise
    double N1p = 1.0;
    double N2p = 1.0;
    RVector Ns;  // per-CBS receive noise; empty means all 1
    RVector Nm;  // per-CU noise; empty means all 1
    double r0 = 2.0;
    RVector r;   // per-CU target rates; empty means all r_cu
    double r_cu = 2.0;
    double alpha = 3.5;
    Distances d;
    FadingMode fading = FadingMode::phase_only;
    std::uint64_t seed = 1;
    /// Fixed PBS beam; when absent f = h0p / ||h0p||.
    std::optional<CVector> f_override;

    double cbs_noise(std::size_t j) const { return Ns.empty() ? 1.0 : Ns.at(j); }
    double cu_noise(std::size_t m) const { return Nm.empty() ? 1.0 : Nm.at(m); }
    double cu_rate(std::size_t m) const { return r.empty() ? r_cu : r.at(m); }

    /// Throws InvalidConfig when a documented invariant is broken.
    void validate() const;
};

/// One channel realization together with the power/noise constants that the
/// SINR expressions need.
struct ChannelSet {
    std::size_t K = 0, M = 0, N = 0;
    double P0 = 1.0;
    double N1p = 1.0;
    double N2p = 1.0;
    RVector Ns;                          // size M
    RVector Nm;                          // size M
    CVector h0p;                         // PBS -> PU, size K
    CVector f;                           // unit PBS beam, size K
    std::vector<CVector> g;              // g_j = G_j f, size N each
    std::vector<std::vector<CVector>> h; // h[j][u]: CBS j -> user u (u = 0 PU)

    const CVector& h_pu(std::size_t j) const { return h[j][0]; }
    const CVector& h_cu(std::size_t j, std::size_t m) const { return h[j][m + 1]; }

    /// |h0p^H f|^2 / N1p: the direct-link PU SNR per unit PBS power.
    double direct_gain() const;
};

struct Targets {
    double gamma0p = 0.0;  // residual relay-path target; <= 0 means Mode II
    RVector gamma;         // per-CU SINR targets
};

/// Stacked aggregates of the rank-one reformulation. All block-diagonal
/// objects are stored per CBS: row j of Hbar_u is hbar[u][j]^H and lives in
/// columns j*N .. j*N+N-1.
struct StackedProblem {
    std::size_t M = 0, N = 0;
    CVector h0;                               // size M*N, block j = ||g_j||^2 h_j0
    std::vector<std::vector<CVector>> hbar;   // hbar[u][j], u = 0..M
    RVector dv;                               // (P0||g_j||^2 + Ns_j) ||g_j||^2
    RVector gnorm2;                           // ||g_j||^2
    RVector relay_gain;                       // P0||g_j||^2 + Ns_j
    RVector ns;                               // Ns_j
    std::vector<std::vector<CVector>> h;      // raw h[j][u]
    Targets targets;
    RVector noise;                            // n = (N2p, N_1, ..., N_M)

    std::size_t users() const noexcept { return M + 1; }
    std::span<const cdouble> block(std::span<const cdouble> v, std::size_t j) const {
        return v.subspan(j * N, N);
    }

    /// Dense M x MN matrix Hbar_u; used for structure checks.
    CMatrix dense_hbar(std::size_t u) const;
    /// ||Hbar_u x||^2 for a stacked x.
    double hbar_norm2(std::size_t u, std::span<const cdouble> x) const;
    /// x^H D_v x
    double dv_quadratic(std::span<const cdouble> x) const;
};

enum class Provenance { optimal, czf, pzf, manual };
std::string_view to_string(Provenance p) noexcept;

struct DownlinkSolution {
    std::vector<CVector> w;  // transmit beamformers, size N each
    CVector v;               // stacked relay vector, size M*N
    RVector p;               // (p0, p1..pM) when produced by a direction+power method
    Provenance provenance = Provenance::manual;

    static DownlinkSolution zero(std::size_t M, std::size_t N);
};

struct SinrReport {
    double sinr_pu_relay = 0.0;  // relay-path fraction, LHS of the PU constraint
    double sinr_pu_total = 0.0;  // MRC-combined PU SINR (direct + relay)
    RVector sinr_cu;
    double rate_pu = 0.0;        // 0.5 log2(1 + sinr_pu_total)
    RVector rate_cu;
};

/// Draws realization `index` of the ensemble described by `config`. The same
/// (config.seed, index) always reproduces the same channels.
ChannelSet generate_instance(const SystemConfig& config, std::uint64_t index);

Targets gamma_targets(const SystemConfig& config, const ChannelSet& ch);

/// Throws ModeII when gamma0p <= 0 and DegenerateRelayChannel when some
/// ||g_j|| vanishes.
StackedProblem build_stacked(const ChannelSet& ch, const Targets& t);

/// SINRs of an arbitrary solution, evaluated through the relay matrices
/// A_j = v_j g_j^H rather than the stacked aggregates.
SinrReport evaluate(const ChannelSet& ch, const DownlinkSolution& sol);

/// Left-hand sides of the stacked constraints: index 0 is the PU relay
/// fraction, index m + 1 the SINR of CU m.
RVector constraint_sinrs(const StackedProblem& sp, std::span<const CVector> w, std::span<const cdouble> v);

/// sum ||w_j||^2 + v^H D_v v
double total_power(const DownlinkSolution& sol, const StackedProblem& sp);

/// The same objective written on the relay matrices:
/// sum ||w_j||^2 + P0 ||A_j g_j||^2 + Ns_j ||A_j||_F^2.
double total_power_relay_matrices(const ChannelSet& ch, const DownlinkSolution& sol);

/// A_j = v_j g_j^H
CMatrix expand_relay_matrix(std::span<const cdouble> v_j, std::span<const cdouble> g_j);

double rate_from_sinr(double sinr);  // 0.5 log2(1 + sinr)
double sinr_from_rate(double rate);  // 2^(2 rate) - 1

// Text import/export of ChannelSet ("re,im" pairs, g_1..g_M then h_jm
// row-major in (j, m)). Doubles are written with 17 significant digits so a
// round trip is bit-exact.
void write_channel_set(std::ostream& out, const ChannelSet& ch);
ChannelSet read_channel_set(std::istream& in);

}  // namespace ccr
