#include "prts/pdtc.hpp"

#include <cmath>
#include <stdexcept>

#include "prts/numerics.hpp"

namespace prts {

ChannelPdtc::ChannelPdtc(double eta0, double sigma)
    : eta0_(eta0), sigma_(sigma) {
    if (!(eta0 > 0.0) || !(eta0 < 1.0))
        throw std::invalid_argument("ChannelPdtc: eta0 must be in (0, 1)");
    if (!(sigma > 0.0) || !(sigma <= 3.0))
        throw std::invalid_argument("ChannelPdtc: sigma must be in (0, 3]");
    mu_log_ = std::log(eta0) - 0.5 * sigma * sigma;
    mass_above_unity_ = normal_sf(-mu_log_ / sigma_);
}

double ChannelPdtc::z(double x) const {
    return (std::log(x) - mu_log_) / sigma_;
}

double ChannelPdtc::pdf(double eta) const {
    if (!(eta > 0.0))
        throw std::domain_error("ChannelPdtc::pdf: eta must be positive");
    const double t = z(eta);
    return normal_pdf(t) / (sigma_ * eta);
}

double ChannelPdtc::cdf(double x) const {
    if (x <= 0.0) return 0.0;
    return normal_cdf(z(x));
}

double ChannelPdtc::pass_fraction(double eta_T) const {
    if (eta_T < 0.0 || eta_T > 1.0)
        throw std::domain_error("pass_fraction: eta_T must be in [0, 1]");
    const double upper = normal_sf(z(1.0));
    if (eta_T == 0.0) return 1.0 - mass_above_unity_;
    return normal_sf(z(eta_T)) - upper;
}

double ChannelPdtc::partial_mean(double a, double b) const {
    // int_0^x eta p = eta0 * Phi(z(x) - sigma) for the log-normal with
    // mean eta0, so the [a, b] slice is an upper-tail difference.
    const double za = (a > 0.0) ? z(a) : -INFINITY;
    const double zb = z(b);
    const double tail_a = (a > 0.0) ? normal_sf(za - sigma_) : 1.0;
    return eta0_ * (tail_a - normal_sf(zb - sigma_));
}

double ChannelPdtc::truncated_mean(double eta_T) const {
    if (eta_T < 0.0 || eta_T >= 1.0)
        throw std::domain_error("truncated_mean: eta_T must be in [0, 1)");
    const double frac = pass_fraction(eta_T);
    if (frac < 1e-15)
        throw std::runtime_error(
            "truncated_mean: degenerate selection, no signals survive");
    return partial_mean(eta_T, 1.0) / frac;
}

double rytov_sigma(const RytovInput& in) {
    if (!(in.cn2 > 0.0) || !(in.k > 0.0) || !(in.L > 0.0))
        throw std::invalid_argument("rytov_sigma: all inputs must be positive");
    const double s2 =
        1.23 * in.cn2 * std::pow(in.k, 7.0 / 6.0) * std::pow(in.L, 11.0 / 6.0);
    return std::sqrt(s2);
}

TransmittanceStream sample(const ChannelPdtc& ch, std::size_t n,
                           std::uint64_t seed, std::uint64_t window_pulses) {
    if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
    TransmittanceStream out;
    out.window_pulses = window_pulses;
    out.seed = seed;
    out.samples.reserve(n);
    Sampler s(ch, seed);
    for (std::size_t i = 0; i < n; ++i) out.samples.push_back(s.next());
    return out;
}

}  // namespace prts
