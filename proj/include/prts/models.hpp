#pragma once

#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "prts/pdtc.hpp"
#include "prts/rates.hpp"

namespace prts {

/// Static-channel rate as a function of transmittance, R(eta).
using RateFn = std::function<double(double)>;

/// Which turbulence-channel composition of R(eta) to evaluate.
struct ModelKind {
    enum class Tag { Static, Simplified, RateWise, PulseWise };
    Tag tag = Tag::Static;
    double eta_T = 0.0;  ///< post-selection threshold; ignored for Static

    static ModelKind static_model() { return {Tag::Static, 0.0}; }
    static ModelKind simplified(double t) { return {Tag::Simplified, t}; }
    static ModelKind ratewise(double t) { return {Tag::RateWise, t}; }
    static ModelKind pulsewise(double t) { return {Tag::PulseWise, t}; }
};

/// No post-selection baseline: the rate evaluated at the mean
/// transmittance, R(eta0).
double rate_static(const RateFn& rate_fn, const ChannelPdtc& ch);

/// Threshold post-selection with the kept signals treated as a static
/// channel at their mean:
///   R = pass_fraction(eta_T) * R(<eta>).
/// Returns 0 when the pass fraction is degenerate (< 1e-15).
double rate_simplified(const RateFn& rate_fn, const ChannelPdtc& ch,
                       double eta_T);

/// Expectation of the rate over the PDTC,
///   R = int_{eta_T}^{1} R(eta) p(eta) deta,
/// by adaptive quadrature at 1e-8 relative tolerance. The rate function's
/// kink (its critical transmittance) should be passed as `kink_eta` so the
/// quadrature splits there; segments below the kink then contribute an
/// exact zero and the value is invariant for eta_T at or below the kink.
double rate_ratewise(const RateFn& rate_fn, const ChannelPdtc& ch,
                     double eta_T,
                     std::optional<double> kink_eta = std::nullopt);

/// How the per-photon-number QBER enters the pulse-wise sums.
enum class PulsewiseQber {
    AveragedYields,       ///< e_i = (e0 Y0 + e_d <eta_i>) / <Y_i>
    SimplifiedPointwise,  ///< e_i evaluated at <eta> as in the simplified model
};

/// Per-photon-number yields over the truncated PDTC:
///   <Y_i> = Y0 + <1 - (1 - eta eta_d)^i>,  i = 0..i_max.
/// i = 0 and i = 1 use closed forms (Y0 and Y0 + eta_d <eta>), higher
/// orders adaptive quadrature.
std::vector<double> pulsewise_yields(const ChannelPdtc& ch, double eta_T,
                                     const DeviceParams& dev, int i_max);

/// Yields the simplified model assumes, Y_i(<eta>) = Y0 + 1 - (1 - <eta> eta_d)^i.
std::vector<double> simplified_yields(const ChannelPdtc& ch, double eta_T,
                                      const DeviceParams& dev, int i_max);

/// Smallest i with Poisson(intensity) tail mass below `tail`.
int poisson_cutoff(double intensity, double tail = 1e-12);

/// Post-selected decoy rate with per-photon-number yields averaged over the
/// truncated PDTC (the photon-number distribution after post-selection is
/// no longer Poissonian; this model accounts for it), times pass fraction.
double rate_pulsewise(const ChannelPdtc& ch, double eta_T,
                      const DeviceParams& dev, const DecoySettings& dec,
                      PulsewiseQber mode = PulsewiseQber::AveragedYields);

/// A threshold with the quantities the selection produces at it.
struct ThresholdReport {
    double eta_T = 0.0;
    double pass_fraction = 0.0;
    double mean_eta = 0.0;
    double rate_static = 0.0;
    double rate_simplified = 0.0;
    double rate_ratewise = 0.0;
    /// Residual of the stationarity condition
    /// (<eta> - eta_T) R'(<eta>) - R(<eta>) at this threshold (diagnostic).
    double optimality_residual = 0.0;
};

/// Maximizes rate_simplified over eta_T in
/// [eta_crit_hint*(1-1e-3), min(1, 50*eta_crit_hint)] by coarse scan plus
/// golden-section refinement to 1e-4 relative. Among numerically tied
/// maximizers (within 1e-9 relative) the smallest threshold is returned, so
/// flat regions resolve to the hint rather than drifting right.
/// Throws std::runtime_error when rate_simplified is zero everywhere.
std::pair<double, ThresholdReport> optimal_threshold(const RateFn& rate_fn,
                                                     const ChannelPdtc& ch,
                                                     double eta_crit_hint);

}  // namespace prts
