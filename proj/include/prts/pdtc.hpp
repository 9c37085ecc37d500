#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace prts {

/// Log-normal probability distribution of the transmission coefficient
/// (PDTC) of a turbulent free-space channel. The pair (eta0, sigma) fully
/// describes the distribution: eta0 is the mean transmittance and sigma the
/// log-normal spread. The underlying normal has location ln(eta0) - sigma^2/2
/// and scale sigma, so the distribution mean is exactly eta0.
///
/// Physical transmittance lives on [0, 1]; the log-normal carries a sliver of
/// mass above 1. Integrals here run on [eta_T, 1] without renormalizing, and
/// the sampler resamples draws above 1. heavy_upper_tail() reports when the
/// mass above 1 exceeds 1e-6 and the approximation deserves a warning.
class ChannelPdtc {
  public:
    /// Throws std::invalid_argument unless eta0 in (0,1) and sigma in (0,3].
    ChannelPdtc(double eta0, double sigma);

    double eta0() const { return eta0_; }
    double sigma() const { return sigma_; }
    /// Location parameter of ln(eta), i.e. ln(eta0) - sigma^2/2.
    double log_location() const { return mu_log_; }

    /// Density p(eta). Throws std::domain_error for eta <= 0.
    double pdf(double eta) const;

    /// P(eta <= x) of the untruncated log-normal.
    double cdf(double x) const;

    /// Integral of the density over [eta_T, 1].
    /// Monotone non-increasing in eta_T; requires eta_T in [0, 1].
    double pass_fraction(double eta_T) const;

    /// Mean transmittance of the post-selected signals,
    ///   <eta> = int_{eta_T}^{1} eta p / int_{eta_T}^{1} p.
    /// Requires eta_T in [0, 1). Throws std::runtime_error when
    /// pass_fraction(eta_T) < 1e-15 (degenerate selection).
    double truncated_mean(double eta_T) const;

    /// Partial mean int_{a}^{b} eta p(eta) deta (closed form).
    double partial_mean(double a, double b) const;

    /// P(eta > 1): log-normal mass outside the physical range.
    double mass_above_unity() const { return mass_above_unity_; }
    bool heavy_upper_tail() const { return mass_above_unity_ > 1e-6; }

  private:
    double z(double x) const;  // (ln x - mu_log) / sigma

    double eta0_;
    double sigma_;
    double mu_log_;
    double mass_above_unity_;
};

/// Turbulence-strength inputs for the Rytov approximation.
struct RytovInput {
    double cn2;  ///< refractive index structure constant, m^(-2/3)
    double k;    ///< optical wavenumber, 1/m
    double L;    ///< path length, m
};

/// sigma from the Rytov approximation, sigma^2 = 1.23 Cn^2 k^(7/6) L^(11/6).
/// Throws std::invalid_argument unless all fields are strictly positive.
double rytov_sigma(const RytovInput& in);

/// A sampled sequence of per-window channel transmittances, reproducible
/// from its seed. Every sample lies in (0, 1].
struct TransmittanceStream {
    std::vector<double> samples;
    std::uint64_t window_pulses = 1;
    std::uint64_t seed = 0;
};

/// Draws i.i.d. transmittances from the PDTC, resampling values above 1.
class Sampler {
  public:
    Sampler(const ChannelPdtc& ch, std::uint64_t seed)
        : dist_(ch.log_location(), ch.sigma()), engine_(seed) {}

    double next() {
        double x;
        do {
            x = dist_(engine_);
        } while (x > 1.0);
        return x;
    }

  private:
    std::lognormal_distribution<double> dist_;
    std::mt19937_64 engine_;
};

/// n i.i.d. draws from the PDTC of `ch`; deterministic given seed.
TransmittanceStream sample(const ChannelPdtc& ch, std::size_t n,
                           std::uint64_t seed, std::uint64_t window_pulses = 1);

}  // namespace prts
