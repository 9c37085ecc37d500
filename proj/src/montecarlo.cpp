#include "prts/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <stdexcept>

#include "prts/numerics.hpp"

namespace prts {

namespace {

// Single-photon channel per window: click probability Y0 + eta*eta_d,
// error probability (e0 Y0 + e_d eta eta_d) per click.
struct WindowStats {
    std::array<GainQber, 3> decoy;
    GainQber single_photon;
};

WindowStats window_stats(double eta, const DeviceParams& dev,
                         const DecoySettings& dec) {
    WindowStats w;
    w.decoy[0] = channel_observables(eta, dec.mu, dev);
    w.decoy[1] = channel_observables(eta, dec.nu, dev);
    w.decoy[2] = channel_observables(eta, dec.omega, dev);
    const double es = eta * dev.eta_d;
    const double gain = dev.y0 + es;
    w.single_photon = {gain,
                       (DeviceParams::e0 * dev.y0 + dev.e_d * es) / gain};
    return w;
}

void accumulate_expect(IntensityTally& t, const GainQber& o, double pulses) {
    t.sent += pulses;
    t.clicks += o.gain * pulses;
    t.errors += o.gain * o.qber * pulses;
}

void accumulate_event(IntensityTally& t, const GainQber& o, std::uint64_t pulses,
                      std::mt19937_64& rng) {
    std::binomial_distribution<std::uint64_t> clicks_dist(pulses, o.gain);
    const std::uint64_t clicks = clicks_dist(rng);
    std::uint64_t errors = 0;
    if (clicks > 0) {
        std::binomial_distribution<std::uint64_t> err_dist(clicks, o.qber);
        errors = err_dist(rng);
    }
    t.sent += double(pulses);
    t.clicks += double(clicks);
    t.errors += double(errors);
}

SelectionSummary run_chunk(const ChannelPdtc& ch, double eta_T,
                           const DeviceParams& dev, const DecoySettings& dec,
                           std::uint64_t n_windows, std::uint64_t window_pulses,
                           std::uint64_t seed, SampleMode mode) {
    SelectionSummary s;
    s.eta_threshold = eta_T;
    s.window_pulses = window_pulses;
    Sampler sampler(ch, seed);
    std::mt19937_64 event_rng(seed ^ 0x5851F42D4C957F2Dull);
    for (std::uint64_t i = 0; i < n_windows; ++i) {
        const double eta = sampler.next();
        ++s.windows_total;
        if (eta < eta_T) continue;  // discarded immediately, nothing stored
        s.peak_buffer_windows = 1;  // only the current window is ever held
        ++s.windows_kept;
        s.sum_eta_kept += eta;
        const WindowStats w = window_stats(eta, dev, dec);
        if (mode == SampleMode::Expectation) {
            for (int k = 0; k < 3; ++k)
                accumulate_expect(s.decoy_tally[k], w.decoy[k],
                                  double(window_pulses));
            accumulate_expect(s.single_photon_tally, w.single_photon,
                              double(window_pulses));
        } else {
            for (int k = 0; k < 3; ++k)
                accumulate_event(s.decoy_tally[k], w.decoy[k], window_pulses,
                                 event_rng);
            accumulate_event(s.single_photon_tally, w.single_photon,
                             window_pulses, event_rng);
        }
    }
    return s;
}

}  // namespace

SelectionSummary merge(const SelectionSummary& a, const SelectionSummary& b) {
    SelectionSummary s = a;
    s.windows_total += b.windows_total;
    s.windows_kept += b.windows_kept;
    s.sum_eta_kept += b.sum_eta_kept;
    for (int k = 0; k < 3; ++k) {
        s.decoy_tally[k].sent += b.decoy_tally[k].sent;
        s.decoy_tally[k].clicks += b.decoy_tally[k].clicks;
        s.decoy_tally[k].errors += b.decoy_tally[k].errors;
    }
    s.single_photon_tally.sent += b.single_photon_tally.sent;
    s.single_photon_tally.clicks += b.single_photon_tally.clicks;
    s.single_photon_tally.errors += b.single_photon_tally.errors;
    s.peak_buffer_windows =
        std::max(s.peak_buffer_windows, b.peak_buffer_windows);
    return s;
}

SelectionSummary run_stream(const ChannelPdtc& ch, double eta_T,
                            const DeviceParams& dev, const DecoySettings& dec,
                            const StreamConfig& cfg) {
    if (cfg.n_windows < 1)
        throw std::invalid_argument("run_stream: n_windows must be >= 1");
    if (eta_T < 0.0 || eta_T > 1.0)
        throw std::domain_error("run_stream: eta_T must be in [0, 1]");
    const int workers = std::max(1, cfg.n_workers);
    if (workers == 1)
        return run_chunk(ch, eta_T, dev, dec, cfg.n_windows, cfg.window_pulses,
                         cfg.seed, cfg.mode);

    std::vector<std::future<SelectionSummary>> parts;
    const std::uint64_t base = cfg.n_windows / workers;
    const std::uint64_t rem = cfg.n_windows % workers;
    for (int w = 0; w < workers; ++w) {
        const std::uint64_t n = base + (std::uint64_t(w) < rem ? 1 : 0);
        if (n == 0) continue;
        parts.push_back(std::async(std::launch::async, [&, w, n] {
            return run_chunk(ch, eta_T, dev, dec, n, cfg.window_pulses,
                             derive_seed(cfg.seed, std::uint64_t(w)), cfg.mode);
        }));
    }
    SelectionSummary total;
    total.eta_threshold = eta_T;
    total.window_pulses = cfg.window_pulses;
    for (auto& p : parts) total = merge(total, p.get());
    total.eta_threshold = eta_T;
    total.window_pulses = cfg.window_pulses;
    return total;
}

SelectionSummary run_stream(const TransmittanceStream& stream, double eta_T,
                            const DeviceParams& dev, const DecoySettings& dec,
                            SampleMode mode, std::uint64_t event_seed) {
    SelectionSummary s;
    s.eta_threshold = eta_T;
    s.window_pulses = stream.window_pulses;
    std::mt19937_64 event_rng(event_seed ^ 0x5851F42D4C957F2Dull);
    for (double eta : stream.samples) {
        ++s.windows_total;
        if (eta < eta_T) continue;
        s.peak_buffer_windows = 1;
        ++s.windows_kept;
        s.sum_eta_kept += eta;
        const WindowStats w = window_stats(eta, dev, dec);
        if (mode == SampleMode::Expectation) {
            for (int k = 0; k < 3; ++k)
                accumulate_expect(s.decoy_tally[k], w.decoy[k],
                                  double(stream.window_pulses));
            accumulate_expect(s.single_photon_tally, w.single_photon,
                              double(stream.window_pulses));
        } else {
            for (int k = 0; k < 3; ++k)
                accumulate_event(s.decoy_tally[k], w.decoy[k],
                                 stream.window_pulses, event_rng);
            accumulate_event(s.single_photon_tally, w.single_photon,
                             stream.window_pulses, event_rng);
        }
    }
    return s;
}

double empirical_rate(const SelectionSummary& s, Protocol proto,
                      const DeviceParams& dev, const DecoySettings& dec) {
    const double pass = s.empirical_pass_fraction();
    if (s.windows_kept == 0) return 0.0;
    if (proto == Protocol::SinglePhoton) {
        const IntensityTally& t = s.single_photon_tally;
        if (t.clicks <= 0.0) return 0.0;
        const double r = t.gain() * (1.0 - 2.0 * h2(std::min(t.qber(), 1.0)));
        return pass * std::max(0.0, r);
    }
    GainQber q_mu{s.decoy_tally[0].gain(), s.decoy_tally[0].qber()};
    GainQber q_nu{s.decoy_tally[1].gain(), s.decoy_tally[1].qber()};
    GainQber q_om{s.decoy_tally[2].gain(), s.decoy_tally[2].qber()};
    if (q_mu.gain <= 0.0) return 0.0;
    return pass *
           gllp_rate(q_mu, estimate_single_photon(q_mu, q_nu, q_om, dec), dev);
}

std::vector<ScanPoint> scan_thresholds(const ChannelPdtc& ch,
                                       const DeviceParams& dev,
                                       const DecoySettings& dec,
                                       const std::vector<double>& grid,
                                       Protocol proto,
                                       const StreamConfig& cfg) {
    if (grid.empty())
        throw std::invalid_argument("scan_thresholds: grid must be non-empty");
    if (!std::is_sorted(grid.begin(), grid.end()))
        throw std::invalid_argument("scan_thresholds: grid must be sorted");

    // One pass over a single stream: each window lands in the bucket of the
    // largest threshold it passes; suffix sums then give every threshold's
    // selection (common random numbers across the whole grid).
    const std::size_t n = grid.size();
    std::vector<SelectionSummary> bucket(n + 1);  // [i]: grid[i-1] <= eta < grid[i]
    Sampler sampler(ch, cfg.seed);
    std::mt19937_64 event_rng(cfg.seed ^ 0x5851F42D4C957F2Dull);
    for (std::uint64_t i = 0; i < cfg.n_windows; ++i) {
        const double eta = sampler.next();
        const std::size_t b =
            std::upper_bound(grid.begin(), grid.end(), eta) - grid.begin();
        SelectionSummary& s = bucket[b];
        ++s.windows_total;
        if (b == 0) continue;  // below every threshold
        s.peak_buffer_windows = 1;
        ++s.windows_kept;
        s.sum_eta_kept += eta;
        const WindowStats w = window_stats(eta, dev, dec);
        if (cfg.mode == SampleMode::Expectation) {
            for (int k = 0; k < 3; ++k)
                accumulate_expect(s.decoy_tally[k], w.decoy[k],
                                  double(cfg.window_pulses));
            accumulate_expect(s.single_photon_tally, w.single_photon,
                              double(cfg.window_pulses));
        } else {
            for (int k = 0; k < 3; ++k)
                accumulate_event(s.decoy_tally[k], w.decoy[k],
                                 cfg.window_pulses, event_rng);
            accumulate_event(s.single_photon_tally, w.single_photon,
                             cfg.window_pulses, event_rng);
        }
    }

    std::vector<ScanPoint> out(n);
    SelectionSummary suffix;  // selection of everything >= grid[i]
    for (std::size_t i = n; i-- > 0;) {
        suffix = merge(suffix, bucket[i + 1]);
        SelectionSummary at = suffix;
        at.eta_threshold = grid[i];
        at.window_pulses = cfg.window_pulses;
        at.windows_total = cfg.n_windows;
        out[i].eta_T = grid[i];
        out[i].windows_kept = at.windows_kept;
        out[i].pass_fraction = at.empirical_pass_fraction();
        out[i].mean_eta = at.empirical_mean_eta_kept();
        out[i].rate = empirical_rate(at, proto, dev, dec);
    }
    return out;
}

void dump_stream(const TransmittanceStream& stream, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::ios_base::failure("dump_stream: cannot open " + path);
    f.precision(17);
    for (double eta : stream.samples) f << eta << "\n";
    if (!f)
        throw std::ios_base::failure("dump_stream: write failed for " + path);
}

}  // namespace prts
