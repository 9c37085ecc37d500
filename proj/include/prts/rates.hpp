#pragma once

#include <string>
#include <vector>

namespace prts {

/// Binary entropy in bits, with h2(0) = h2(1) = 0 by continuity.
/// Throws std::domain_error outside [0, 1].
double h2(double x);

/// QBER at which the Shor-Preskill rate factor 1 - 2 h2(e) vanishes,
/// solved numerically to 1e-12 (about 0.110028).
double e_critical();

/// Detector and source constants of the static channel model.
/// Defaults reproduce a 144 km free-space BB84 experiment:
/// Y0 = 1e-5 per signal window, eta_d = 25%, e_d = 3%, f = 1.22.
struct DeviceParams {
    double y0 = 1e-5;    ///< dark/background count probability per window
    double eta_d = 0.25; ///< detector efficiency
    double e_d = 0.03;   ///< misalignment error probability
    double f = 1.22;     ///< error-correction inefficiency
    double q = 1.0;      ///< sifting factor (1 for efficient BB84)

    static constexpr double e0 = 0.5;  ///< error rate of background counts

    /// Throws std::invalid_argument on out-of-range fields.
    void validate() const;

    /// True when e_d >= e_critical(), in which case the single-photon rate
    /// is identically zero. Construction-time warning, not an error.
    bool misalignment_exceeds_critical() const;
};

/// Signal / weak-decoy / vacuum-decoy intensities (mean photon numbers).
struct DecoySettings {
    double mu = 0.3;
    double nu = 0.05;
    double omega = 0.0;

    /// Requires 0 <= omega < nu < mu and nu + omega < mu.
    void validate() const;
};

/// Single-photon BB84 Shor-Preskill rate at channel transmittance eta,
///   R = max(0, (Y0 + eta_sys) * (1 - 2 h2(e))),  eta_sys = eta * eta_d,
///   e = (Y0/2 + e_d eta_sys) / (Y0 + eta_sys).
double rate_single_photon(double eta, const DeviceParams& dev);

/// Closed-form transmittance below which the single-photon rate is zero:
///   (Y0/eta_d) * (1/2 - e_c) / (e_c - e_d).
/// Throws std::invalid_argument when e_d >= e_critical().
double eta_critical_single_photon(const DeviceParams& dev);

/// Observed gain and QBER of an intensity on the static channel.
struct GainQber {
    double gain;  ///< Q = Y0 + 1 - exp(-intensity * eta_sys)
    double qber;  ///< E = (e0 Y0 + e_d (1 - exp(-intensity eta_sys))) / Q
};

GainQber channel_observables(double eta, double intensity,
                             const DeviceParams& dev);

enum class DecoyStatus {
    Ok,
    Y1NonPositive,   ///< estimated single-photon yield bound <= 0
    E1OutOfRange,    ///< estimated single-photon error bound outside [0, 1/2]
};

/// Vacuum+weak decoy-state bounds on the single-photon contribution.
struct DecoyEstimate {
    double y0_est;    ///< background yield from the vacuum decoy
    double y1_lower;  ///< lower bound on the single-photon yield
    double e1_upper;  ///< upper bound on the single-photon error rate
    double q1_lower;  ///< Q1 = y1_lower * mu * exp(-mu)
    DecoyStatus status = DecoyStatus::Ok;
};

/// Two-decoy (vacuum+weak) estimation from per-intensity observables:
///   Y1 >= mu/(mu nu - nu^2) [Q_nu e^nu - Q_mu e^mu nu^2/mu^2
///                            - (mu^2 - nu^2)/mu^2 Y0_est]
///   e1 <= (E_nu Q_nu e^nu - e0 Y0_est) / (Y1 nu)
/// with Y0_est = Q_omega e^omega taken from the vacuum decoy.
DecoyEstimate estimate_single_photon(const GainQber& q_mu,
                                     const GainQber& q_nu,
                                     const GainQber& q_omega,
                                     const DecoySettings& dec);

/// GLLP key rate from observed signal statistics and decoy bounds:
///   R = max(0, q * (-f Q_mu h2(E_mu) + Q1 (1 - h2(e1)))).
/// Returns 0 when the estimate carries a breakdown status.
double gllp_rate(const GainQber& q_mu, const DecoyEstimate& est,
                 const DeviceParams& dev);

/// Asymptotic decoy-state BB84 rate on the static channel.
double rate_decoy_asymptotic(double eta, const DeviceParams& dev,
                             const DecoySettings& dec);

/// Critical transmittance of the decoy-state rate.
struct EtaCriticalDecoy {
    double numeric;   ///< infimum of {eta : R(eta) > 0}; authoritative
    double analytic;  ///< first-order approximation, cross-check only
};

/// Numeric value by bracketing bisection to 1e-4 relative; analytic value
/// from the reduced equation h2(x/2 + e_d) + f e^mu h2(x/(2mu) + e_d) = 1
/// with eta = (Y0/eta_d)/x. Throws std::runtime_error if the rate is zero
/// on all of (0, 1].
EtaCriticalDecoy eta_critical_decoy(const DeviceParams& dev,
                                    const DecoySettings& dec);

/// An evaluated rate-vs-transmittance curve with its parameter snapshot.
struct RatePoint {
    double eta;
    double rate;
};

struct RateCurve {
    std::vector<RatePoint> points;  ///< etas strictly increasing, rates >= 0
    std::string meta;

    /// Throws std::invalid_argument when the invariants are violated.
    void validate() const;
};

}  // namespace prts
