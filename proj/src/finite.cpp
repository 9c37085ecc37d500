#include "prts/finite.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace prts {

void FiniteSettings::validate() const {
    if (!(n_total >= 1e6))
        throw std::invalid_argument("FiniteSettings: n_total must be >= 1e6");
    if (!(omega >= 0.0) || !(nu > omega) || !(mu > nu))
        throw std::invalid_argument(
            "FiniteSettings: need mu > nu > omega >= 0");
    if (!(mu > nu + omega))
        throw std::invalid_argument("FiniteSettings: need mu > nu + omega");
    if (!(p_mu > 0.0) || !(p_mu < 1.0) || !(p_nu > 0.0) || !(p_nu < 1.0) ||
        !(p_omega() > 0.0) || !(p_omega() < 1.0))
        throw std::invalid_argument(
            "FiniteSettings: send probabilities must be in (0, 1)");
    if (!(q_x > 0.0) || !(q_x < 1.0))
        throw std::invalid_argument("FiniteSettings: q_x must be in (0, 1)");
    if (!(eps_sec > 0.0) || !(eps_sec < 1.0) || !(eps_cor > 0.0) ||
        !(eps_cor < 1.0))
        throw std::invalid_argument("FiniteSettings: bad security parameters");
}

namespace {

// Statistical-fluctuation term added to the phase-error estimate when the
// Z-basis sample is transferred to the X-basis key (random-sampling bound).
double gamma_correction(double a, double b, double c, double d) {
    b = std::clamp(b, 1e-14, 1.0 - 1e-14);
    const double t1 = (c + d) * (1.0 - b) * b / (c * d * std::log(2.0));
    const double t2 =
        std::log2((c + d) / (c * d * (1.0 - b) * b) * (441.0 / (a * a)));
    const double v = t1 * t2;
    return v > 0.0 ? std::sqrt(v) : 0.0;
}

struct BasisCounts {
    // observed counts per intensity {mu, nu, omega} and their totals
    double n[3] = {0, 0, 0};
    double m[3] = {0, 0, 0};
    double n_tot = 0, m_tot = 0;
};

struct DecoyBounds {
    double s0, s1;
};

// Two-decoy vacuum/single-photon event bounds with Hoeffding deviations.
DecoyBounds decoy_bounds(const BasisCounts& c, const double k[3],
                         const double p[3], double tau0, double tau1,
                         double dev_n) {
    auto n_plus = [&](int i) {
        return std::exp(k[i]) / p[i] * (c.n[i] + dev_n);
    };
    auto n_minus = [&](int i) {
        return std::exp(k[i]) / p[i] * (c.n[i] - dev_n);
    };
    const double mu = k[0], nu = k[1], om = k[2];
    const double s0 =
        tau0 * (nu * n_minus(2) - om * n_plus(1)) / (nu - om);
    const double s1 =
        tau1 * mu *
        (n_minus(1) - n_plus(2) -
         (nu * nu - om * om) / (mu * mu) * (n_plus(0) - s0 / tau0)) /
        (mu * (nu - om) - nu * nu + om * om);
    return {s0, s1};
}

}  // namespace

FiniteRate rate_finite_detail(double eta, const FiniteSettings& fs,
                              const DeviceParams& dev) {
    fs.validate();
    if (eta < 0.0 || eta > 1.0)
        throw std::domain_error("rate_finite: eta must be in [0, 1]");

    const double k[3] = {fs.mu, fs.nu, fs.omega};
    const double p[3] = {fs.p_mu, fs.p_nu, fs.p_omega()};
    const double N = fs.n_total;

    BasisCounts X, Z;
    for (int i = 0; i < 3; ++i) {
        const GainQber o = channel_observables(eta, k[i], dev);
        X.n[i] = N * p[i] * fs.q_x * fs.q_x * o.gain;
        X.m[i] = X.n[i] * o.qber;
        Z.n[i] = N * p[i] * (1.0 - fs.q_x) * (1.0 - fs.q_x) * o.gain;
        Z.m[i] = Z.n[i] * o.qber;
        X.n_tot += X.n[i];
        X.m_tot += X.m[i];
        Z.n_tot += Z.n[i];
        Z.m_tot += Z.m[i];
    }

    FiniteRate out;
    if (X.n_tot <= 0.0 || Z.n_tot <= 0.0) {
        out.status = FiniteStatus::InsufficientStatistics;
        return out;
    }

    const double log_term = std::log(21.0 / fs.eps_sec);
    const double dev_nX = std::sqrt(0.5 * X.n_tot * log_term);
    const double dev_nZ = std::sqrt(0.5 * Z.n_tot * log_term);
    const double dev_mZ = std::sqrt(0.5 * Z.m_tot * log_term);

    double tau0 = 0.0, tau1 = 0.0;
    for (int i = 0; i < 3; ++i) {
        tau0 += p[i] * std::exp(-k[i]);
        tau1 += p[i] * k[i] * std::exp(-k[i]);
    }

    const DecoyBounds bx = decoy_bounds(X, k, p, tau0, tau1, dev_nX);
    const DecoyBounds bz = decoy_bounds(Z, k, p, tau0, tau1, dev_nZ);
    out.s_x0 = bx.s0;
    out.s_x1 = bx.s1;
    if (bx.s0 < 0.0 || bx.s1 <= 0.0 || bz.s1 <= 0.0) {
        out.status = FiniteStatus::InsufficientStatistics;
        return out;
    }

    // Single-photon bit errors in Z, then transferred to a phase-error
    // bound for the X-basis key.
    double v_z1 = tau1 *
                  (std::exp(fs.nu) / fs.p_nu * (Z.m[1] + dev_mZ) -
                   std::exp(fs.omega) / fs.p_omega() * (Z.m[2] - dev_mZ)) /
                  (fs.nu - fs.omega);
    v_z1 = std::clamp(v_z1, 0.0, bz.s1);
    const double ratio = v_z1 / bz.s1;
    out.phi_x = ratio + gamma_correction(fs.eps_sec, ratio, bz.s1, bx.s1);
    if (out.phi_x >= 0.5) {
        out.status = FiniteStatus::ZeroRate;
        return out;
    }

    const double lambda_ec = dev.f * X.n_tot * h2(X.m_tot / X.n_tot);
    const double length = bx.s0 + bx.s1 * (1.0 - h2(out.phi_x)) - lambda_ec -
                          6.0 * std::log2(21.0 / fs.eps_sec) -
                          std::log2(2.0 / fs.eps_cor);
    if (length <= 0.0) {
        out.status = FiniteStatus::ZeroRate;
        return out;
    }
    out.rate = std::floor(length) / N;
    return out;
}

double rate_finite(double eta, const FiniteSettings& fs,
                   const DeviceParams& dev) {
    return rate_finite_detail(eta, fs, dev).rate;
}

double rate_finite_simplified(const ChannelPdtc& ch, double eta_T,
                              const FiniteSettings& fs,
                              const DeviceParams& dev) {
    if (eta_T < 0.0 || eta_T >= 1.0)
        throw std::domain_error(
            "rate_finite_simplified: eta_T must be in [0, 1)");
    const double frac = ch.pass_fraction(eta_T);
    if (frac < 1e-15) return 0.0;
    FiniteSettings shrunk = fs;
    shrunk.n_total = std::floor(fs.n_total * frac);
    if (shrunk.n_total < 1e6) return 0.0;  // too few kept signals
    return frac * rate_finite(ch.truncated_mean(eta_T), shrunk, dev);
}

}  // namespace prts
