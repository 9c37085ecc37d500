#include "prts/rates.hpp"

#include <cmath>
#include <stdexcept>

#include "prts/numerics.hpp"

namespace prts {

double h2(double x) {
    if (x < 0.0 || x > 1.0)
        throw std::domain_error("h2: argument must be in [0, 1]");
    if (x == 0.0 || x == 1.0) return 0.0;
    return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double e_critical() {
    // h2 is strictly increasing on [0, 1/2]; cache the root of h2(e) = 1/2.
    static const double root =
        bisect_root([](double e) { return h2(e) - 0.5; }, 1e-9, 0.5, 1e-14);
    return root;
}

void DeviceParams::validate() const {
    if (!(y0 >= 0.0) || !(y0 < 1.0))
        throw std::invalid_argument("DeviceParams: y0 must be in [0, 1)");
    if (!(eta_d > 0.0) || !(eta_d <= 1.0))
        throw std::invalid_argument("DeviceParams: eta_d must be in (0, 1]");
    if (!(e_d >= 0.0) || !(e_d < 0.5))
        throw std::invalid_argument("DeviceParams: e_d must be in [0, 0.5)");
    if (!(f >= 1.0))
        throw std::invalid_argument("DeviceParams: f must be >= 1");
    if (!(q > 0.0) || !(q <= 1.0))
        throw std::invalid_argument("DeviceParams: q must be in (0, 1]");
}

bool DeviceParams::misalignment_exceeds_critical() const {
    return e_d >= e_critical();
}

void DecoySettings::validate() const {
    if (!(omega >= 0.0) || !(omega < nu) || !(nu < mu))
        throw std::invalid_argument(
            "DecoySettings: need 0 <= omega < nu < mu");
    if (!(nu + omega < mu))
        throw std::invalid_argument("DecoySettings: need nu + omega < mu");
}

double rate_single_photon(double eta, const DeviceParams& dev) {
    if (eta < 0.0 || eta > 1.0)
        throw std::domain_error("rate_single_photon: eta must be in [0, 1]");
    const double eta_sys = eta * dev.eta_d;
    const double yield = dev.y0 + eta_sys;
    if (yield <= 0.0) return 0.0;
    const double e = (0.5 * dev.y0 + dev.e_d * eta_sys) / yield;
    const double r = yield * (1.0 - 2.0 * h2(e));
    return r > 0.0 ? r : 0.0;
}

double eta_critical_single_photon(const DeviceParams& dev) {
    const double ec = e_critical();
    if (dev.e_d >= ec)
        throw std::invalid_argument(
            "eta_critical_single_photon: misalignment exceeds e_critical");
    return (dev.y0 / dev.eta_d) * (0.5 - ec) / (ec - dev.e_d);
}

GainQber channel_observables(double eta, double intensity,
                             const DeviceParams& dev) {
    if (eta < 0.0 || eta > 1.0)
        throw std::domain_error("channel_observables: eta must be in [0, 1]");
    if (intensity < 0.0)
        throw std::domain_error("channel_observables: intensity must be >= 0");
    const double eta_sys = eta * dev.eta_d;
    const double detect = -std::expm1(-intensity * eta_sys);
    const double gain = dev.y0 + detect;
    const double qber = (DeviceParams::e0 * dev.y0 + dev.e_d * detect) / gain;
    return {gain, qber};
}

DecoyEstimate estimate_single_photon(const GainQber& q_mu,
                                     const GainQber& q_nu,
                                     const GainQber& q_omega,
                                     const DecoySettings& dec) {
    dec.validate();
    const double mu = dec.mu, nu = dec.nu, om = dec.omega;
    DecoyEstimate est{};
    est.y0_est = q_omega.gain * std::exp(om);
    const double y1 =
        mu / (mu * nu - nu * nu) *
        (q_nu.gain * std::exp(nu) -
         q_mu.gain * std::exp(mu) * nu * nu / (mu * mu) -
         (mu * mu - nu * nu) / (mu * mu) * est.y0_est);
    est.y1_lower = y1;
    if (y1 <= 0.0) {
        est.status = DecoyStatus::Y1NonPositive;
        return est;
    }
    est.e1_upper = (q_nu.qber * q_nu.gain * std::exp(nu) -
                    DeviceParams::e0 * est.y0_est) /
                   (y1 * nu);
    est.q1_lower = y1 * mu * std::exp(-mu);
    if (est.e1_upper < 0.0 || est.e1_upper > 0.5)
        est.status = DecoyStatus::E1OutOfRange;
    return est;
}

double gllp_rate(const GainQber& q_mu, const DecoyEstimate& est,
                 const DeviceParams& dev) {
    if (est.status != DecoyStatus::Ok) return 0.0;
    const double r = dev.q * (-dev.f * q_mu.gain * h2(q_mu.qber) +
                              est.q1_lower * (1.0 - h2(est.e1_upper)));
    return r > 0.0 ? r : 0.0;
}

double rate_decoy_asymptotic(double eta, const DeviceParams& dev,
                             const DecoySettings& dec) {
    const GainQber q_mu = channel_observables(eta, dec.mu, dev);
    const GainQber q_nu = channel_observables(eta, dec.nu, dev);
    const GainQber q_om = channel_observables(eta, dec.omega, dev);
    return gllp_rate(q_mu, estimate_single_photon(q_mu, q_nu, q_om, dec), dev);
}

EtaCriticalDecoy eta_critical_decoy(const DeviceParams& dev,
                                    const DecoySettings& dec) {
    dev.validate();
    dec.validate();
    if (!(rate_decoy_asymptotic(1.0, dev, dec) > 0.0))
        throw std::runtime_error(
            "eta_critical_decoy: rate is zero on all of (0, 1]");
    double lo = 0.0, hi = 1.0;
    while (hi - lo > 1e-4 * hi) {
        const double mid = 0.5 * (lo + hi);
        (rate_decoy_asymptotic(mid, dev, dec) > 0.0 ? hi : lo) = mid;
    }
    const double numeric = hi;

    // Reduced critical equation in x = Y0 / (eta_d * eta), valid for
    // Y0 << eta_sys << 1: h2(x/2 + e_d) + f e^mu h2(x/(2 mu) + e_d) = 1.
    const double x_hi = 2.0 * dec.mu * (0.5 - dev.e_d) * (1.0 - 1e-12);
    const double fac = dev.f * std::exp(dec.mu);
    const double x_crit = bisect_root(
        [&](double x) {
            return h2(0.5 * x + dev.e_d) + fac * h2(x / (2.0 * dec.mu) + dev.e_d) -
                   1.0;
        },
        1e-12, x_hi, 1e-12);
    return {numeric, (dev.y0 / dev.eta_d) / x_crit};
}

void RateCurve::validate() const {
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].rate < 0.0)
            throw std::invalid_argument("RateCurve: negative rate");
        if (i > 0 && !(points[i].eta > points[i - 1].eta))
            throw std::invalid_argument("RateCurve: etas must be increasing");
    }
}

}  // namespace prts
