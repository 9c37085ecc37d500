#pragma once

#include "prts/pdtc.hpp"
#include "prts/rates.hpp"

namespace prts {

/// Protocol parameters for finite-size decoy-state BB84 with three
/// intensities and biased basis choice. Defaults follow a standard
/// high-loss configuration: mu = 0.31, nu = 0.165, omega = 2e-4,
/// p_mu = 0.5, p_nu = 0.36, q_x = 0.75.
struct FiniteSettings {
    double n_total = 1e12;  ///< pulses sent by Alice
    double mu = 0.31;
    double nu = 0.165;
    double omega = 2e-4;
    double p_mu = 0.5;
    double p_nu = 0.36;     ///< p_omega = 1 - p_mu - p_nu
    double q_x = 0.75;      ///< probability of choosing the X (key) basis
    double eps_sec = 1e-10;
    double eps_cor = 1e-15;

    double p_omega() const { return 1.0 - p_mu - p_nu; }
    /// Throws std::invalid_argument on invalid fields
    /// (requires mu > nu + omega, nu > omega >= 0, probabilities in (0,1)).
    void validate() const;
};

enum class FiniteStatus {
    Ok,
    ZeroRate,                 ///< key length clamped at zero
    InsufficientStatistics,   ///< an estimated count bound turned negative
};

struct FiniteRate {
    double rate = 0.0;  ///< secure bits per sent pulse
    FiniteStatus status = FiniteStatus::Ok;
    double s_x0 = 0.0;  ///< vacuum-event lower bound (X basis)
    double s_x1 = 0.0;  ///< single-photon-event lower bound (X basis)
    double phi_x = 0.0; ///< phase-error-rate upper bound
};

/// Finite-key secret fraction for decoy-state BB84 with two decoys plus
/// vacuum, using Hoeffding concentration bounds at the configured
/// (eps_sec, eps_cor). Expected counts are simulated from the static
/// channel model at transmittance eta. Monotone in n_total, bounded above
/// by the asymptotic rate at matched intensities, and clamped at zero.
FiniteRate rate_finite_detail(double eta, const FiniteSettings& fs,
                              const DeviceParams& dev);

double rate_finite(double eta, const FiniteSettings& fs,
                   const DeviceParams& dev);

/// Post-selected finite-size rate. Selection keeps a fraction
/// F = pass_fraction(eta_T) of the block, so both the output and the
/// effective block size shrink:
///   R = F * rate_finite(<eta>, n_total <- floor(N F)).
double rate_finite_simplified(const ChannelPdtc& ch, double eta_T,
                              const FiniteSettings& fs,
                              const DeviceParams& dev);

}  // namespace prts
