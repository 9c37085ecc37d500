#include "prts/models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "prts/numerics.hpp"

namespace prts {

namespace {

// Integral of g(eta) * p(eta) over [lo_eta, 1] in the substituted variable
// u = ln(eta), where the density becomes a plain Gaussian. Optional
// breakpoints (in eta) seed the subdivision.
double pdtc_weighted_integral(const ChannelPdtc& ch,
                              const std::function<double(double)>& g,
                              double lo_eta,
                              std::span<const double> breaks_eta,
                              double rel_tol) {
    const double m = ch.log_location();
    const double s = ch.sigma();
    // The weight exp(u) of eta-moment integrands shifts the Gaussian center
    // by at most sigma^2; 14 sigma of margin keeps the truncation error
    // far below the tolerance.
    double lo_u = m - 14.0 * s;
    if (lo_eta > 0.0) lo_u = std::max(lo_u, std::log(lo_eta));
    const double hi_u = 0.0;  // ln(1)
    if (lo_u >= hi_u) return 0.0;

    std::vector<double> breaks_u;
    for (double b : breaks_eta)
        if (b > 0.0) breaks_u.push_back(std::log(b));

    auto integrand = [&](double u) {
        const double eta = std::exp(u);
        return g(eta) * normal_pdf((u - m) / s) / s;
    };
    QuadratureOptions opt;
    opt.rel_tol = rel_tol;
    return integrate(integrand, lo_u, hi_u, breaks_u, opt);
}

}  // namespace

double rate_static(const RateFn& rate_fn, const ChannelPdtc& ch) {
    return rate_fn(ch.eta0());
}

double rate_simplified(const RateFn& rate_fn, const ChannelPdtc& ch,
                       double eta_T) {
    if (eta_T < 0.0 || eta_T >= 1.0)
        throw std::domain_error("rate_simplified: eta_T must be in [0, 1)");
    const double frac = ch.pass_fraction(eta_T);
    if (frac < 1e-15) return 0.0;  // degenerate selection: nothing survives
    return frac * rate_fn(ch.partial_mean(eta_T, 1.0) / frac);
}

double rate_ratewise(const RateFn& rate_fn, const ChannelPdtc& ch,
                     double eta_T, std::optional<double> kink_eta) {
    if (eta_T < 0.0 || eta_T >= 1.0)
        throw std::domain_error("rate_ratewise: eta_T must be in [0, 1)");
    double breaks[1];
    std::span<const double> span_breaks;
    if (kink_eta && *kink_eta > eta_T && *kink_eta < 1.0) {
        breaks[0] = *kink_eta;
        span_breaks = {breaks, 1};
    }
    return pdtc_weighted_integral(ch, rate_fn, eta_T, span_breaks, 1e-8);
}

int poisson_cutoff(double intensity, double tail) {
    double term = std::exp(-intensity);
    double cdf = term;
    int i = 0;
    while (1.0 - cdf > tail && i < 200) {
        ++i;
        term *= intensity / i;
        cdf += term;
    }
    return i;
}

std::vector<double> pulsewise_yields(const ChannelPdtc& ch, double eta_T,
                                     const DeviceParams& dev, int i_max) {
    const double frac = ch.pass_fraction(eta_T);
    if (frac < 1e-15)
        throw std::runtime_error("pulsewise_yields: degenerate selection");
    std::vector<double> y(i_max + 1);
    y[0] = dev.y0;
    if (i_max >= 1) y[1] = dev.y0 + dev.eta_d * ch.truncated_mean(eta_T);
    for (int i = 2; i <= i_max; ++i) {
        const double mean_detect =
            pdtc_weighted_integral(
                ch,
                [&](double eta) {
                    return 1.0 - std::pow(1.0 - eta * dev.eta_d, i);
                },
                eta_T, {}, 1e-10) /
            frac;
        y[i] = dev.y0 + mean_detect;
    }
    return y;
}

std::vector<double> simplified_yields(const ChannelPdtc& ch, double eta_T,
                                      const DeviceParams& dev, int i_max) {
    const double mean_eta = ch.truncated_mean(eta_T);
    std::vector<double> y(i_max + 1);
    for (int i = 0; i <= i_max; ++i)
        y[i] = dev.y0 + 1.0 - std::pow(1.0 - mean_eta * dev.eta_d, i);
    return y;
}

double rate_pulsewise(const ChannelPdtc& ch, double eta_T,
                      const DeviceParams& dev, const DecoySettings& dec,
                      PulsewiseQber mode) {
    dec.validate();
    const double frac = ch.pass_fraction(eta_T);
    if (frac < 1e-15) return 0.0;

    const int i_max = poisson_cutoff(dec.mu);
    const std::vector<double> y_pw = pulsewise_yields(ch, eta_T, dev, i_max);
    const double mean_eta = ch.truncated_mean(eta_T);

    // Assemble per-intensity gain and QBER from the photon-number sums
    //   Q = sum_i <Y_i> P_i(k),  E Q = e0 Y0 + e_d sum_i <eta_i> P_i(k).
    auto observables = [&](double k) -> GainQber {
        double poisson = std::exp(-k);
        double gain = 0.0, err = 0.0;
        for (int i = 0; i <= i_max; ++i) {
            if (i > 0) poisson *= k / i;
            const double mean_detect = y_pw[i] - dev.y0;  // <eta_i>
            gain += y_pw[i] * poisson;
            switch (mode) {
                case PulsewiseQber::AveragedYields:
                    err += (DeviceParams::e0 * dev.y0 + dev.e_d * mean_detect) *
                           poisson;
                    break;
                case PulsewiseQber::SimplifiedPointwise: {
                    const double det_s =
                        1.0 - std::pow(1.0 - mean_eta * dev.eta_d, i);
                    const double y_s = dev.y0 + det_s;
                    if (y_s > 0.0) {
                        const double e_i =
                            (DeviceParams::e0 * dev.y0 + dev.e_d * det_s) / y_s;
                        err += e_i * y_pw[i] * poisson;
                    }
                    break;
                }
            }
        }
        return {gain, err / gain};
    };

    const GainQber q_mu = observables(dec.mu);
    const GainQber q_nu = observables(dec.nu);
    const GainQber q_om = observables(dec.omega);
    const double per_kept =
        gllp_rate(q_mu, estimate_single_photon(q_mu, q_nu, q_om, dec), dev);
    return frac * per_kept;
}

std::pair<double, ThresholdReport> optimal_threshold(const RateFn& rate_fn,
                                                     const ChannelPdtc& ch,
                                                     double eta_crit_hint) {
    if (!(eta_crit_hint > 0.0) || !(eta_crit_hint < 1.0))
        throw std::invalid_argument("optimal_threshold: bad eta_crit_hint");
    const double lo = eta_crit_hint * (1.0 - 1e-3);
    const double hi = std::min(1.0 * (1.0 - 1e-9), 50.0 * eta_crit_hint);
    auto f = [&](double t) { return rate_simplified(rate_fn, ch, t); };

    // Coarse scan first: the surface can be flat over wide stretches (deep
    // tails give numerically tied values), which defeats a bare
    // golden-section bracket.
    constexpr int kGrid = 256;
    double best_x = lo, best_v = -1.0;
    std::vector<double> xs(kGrid), vs(kGrid);
    for (int i = 0; i < kGrid; ++i) {
        xs[i] = lo + (hi - lo) * i / (kGrid - 1);
        vs[i] = f(xs[i]);
        if (vs[i] > best_v) {
            best_v = vs[i];
            best_x = xs[i];
        }
    }
    if (!(best_v > 0.0))
        throw std::runtime_error(
            "optimal_threshold: rate_simplified is zero everywhere");

    // Among ties prefer the smallest threshold, then refine locally.
    for (int i = 0; i < kGrid; ++i) {
        if (vs[i] >= best_v * (1.0 - 1e-9)) {
            best_x = xs[i];
            break;
        }
    }
    const double step = (hi - lo) / (kGrid - 1);
    const double a = std::max(lo, best_x - step);
    const double b = std::min(hi, best_x + step);
    double x_opt = golden_max(f, a, b, 1e-4 * std::max(best_x, eta_crit_hint));
    double v_opt = f(x_opt);
    if (best_v > v_opt) {
        x_opt = best_x;
        v_opt = best_v;
    }

    // Walk back to the smallest threshold whose rate ties the optimum;
    // rate_simplified increases up to the maximizer, so the predicate is
    // monotone on [lo, x_opt].
    const double tie = v_opt * (1.0 - 1e-9);
    if (f(lo) >= tie) {
        x_opt = lo;
    } else if (x_opt > lo) {
        x_opt = bisect_boundary([&](double t) { return f(t) >= tie; }, lo,
                                x_opt, 1e-5 * eta_crit_hint);
    }

    ThresholdReport rep;
    rep.eta_T = x_opt;
    rep.pass_fraction = ch.pass_fraction(x_opt);
    rep.mean_eta = ch.truncated_mean(x_opt);
    rep.rate_static = rate_static(rate_fn, ch);
    rep.rate_simplified = f(x_opt);
    rep.rate_ratewise = rate_ratewise(rate_fn, ch, x_opt, eta_crit_hint);
    // Stationarity residual (<eta> - eta_T) R'(<eta>) - R(<eta>) with a
    // central difference; diagnostic only.
    const double h = 1e-3 * rep.mean_eta;
    const double dr =
        (rate_fn(std::min(1.0, rep.mean_eta + h)) - rate_fn(rep.mean_eta - h)) /
        (std::min(1.0, rep.mean_eta + h) - (rep.mean_eta - h));
    rep.optimality_residual =
        (rep.mean_eta - x_opt) * dr - rate_fn(rep.mean_eta);
    return {x_opt, rep};
}

}  // namespace prts
