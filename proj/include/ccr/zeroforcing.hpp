#pragma once

// Closed-form zero-forcing designs. Both schemes null every CU-bound transmit
// beam toward the PU and the other CUs; they differ in the relay direction:
// CZF nulls the relayed PU signal at every CU, PZF matches it to the PU.

#include <string_view>
#include <vector>

#include "ccr/model.hpp"

namespace ccr {

enum class ZfScheme { czf, pzf };
std::string_view to_string(ZfScheme s) noexcept;

struct ZfDirections {
    std::vector<CVector> w;  // unit transmit ZF beams
    CVector v;               // unit stacked relay direction
    ZfScheme scheme = ZfScheme::czf;
};

/// Unit-norm projection of h_mm onto the orthogonal complement of
/// {h_m0} and {h_mn, n != m}. Needs N >= M + 1.
std::vector<CVector> zf_transmit_directions(const ChannelSet& ch);

/// Orthogonal-complement projection of x against the span of `cols`.
/// Throws ZeroProjection when less than 1e-12 of ||x||^2 survives.
CVector project_out(std::span<const CVector> cols, const CVector& x);

ZfDirections czf_directions(const ChannelSet& ch);
ZfDirections pzf_directions(const ChannelSet& ch);

/// Powers from the tight constraints for fixed ZF directions:
/// p0 = gamma0' N2p / (|h0^H v|^2 - gamma0' ||Hbar_0 v||^2),
/// p_m = gamma_m (N_m + p0 ||Hbar_m v||^2) / |h_mm^H w_m|^2.
/// Throws PuInfeasible when the p0 denominator is not positive.
DownlinkSolution zf_powers(const ZfDirections& dirs, const StackedProblem& sp);

DownlinkSolution czf_solve(const ChannelSet& ch, const Targets& t, const StackedProblem& sp);
DownlinkSolution pzf_solve(const ChannelSet& ch, const Targets& t, const StackedProblem& sp);

/// Largest |w_m^H h| / ||w_m|| over the channels each transmit beam must null.
double zf_orthogonality_residual(const ChannelSet& ch, std::span<const CVector> w);

struct Theorem3Report {
    double P_czf = 0.0;
    double P_pzf = 0.0;
    double difference = 0.0;  // P_czf - P_pzf from the closed-form difference
    double rho = 0.0;
    std::string_view winner;  // "pzf", "czf" or "tie"
};

/// One CBS, one CU closed forms. Throws OutOfRegime unless M == 1 and
/// ||g_1||^2 > gamma0' Ns_1; ZeroProjection when 1 - rho^2 < 1e-12.
Theorem3Report theorem3_powers(const ChannelSet& ch, const Targets& t);

}  // namespace ccr
