#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "prts/pdtc.hpp"
#include "prts/rates.hpp"

namespace prts {

/// How per-window detection statistics are accumulated.
enum class SampleMode {
    Expectation,  ///< exact expected counts per window (fast, default)
    Event,        ///< Bernoulli-sampled clicks per pulse (slow, small-n studies)
};

enum class Protocol { SinglePhoton, Decoy };

/// Pulse-level tallies for one intensity.
struct IntensityTally {
    double sent = 0.0;
    double clicks = 0.0;
    double errors = 0.0;

    double gain() const { return sent > 0.0 ? clicks / sent : 0.0; }
    double qber() const { return clicks > 0.0 ? errors / clicks : 0.0; }
};

/// Aggregate result of a single-pass threshold-selection run. Rejected
/// windows update only counters and are never stored; peak_buffer_windows
/// records the memory high-water mark of the filter (always 1 window).
struct SelectionSummary {
    double eta_threshold = 0.0;
    std::uint64_t windows_total = 0;
    std::uint64_t windows_kept = 0;
    std::uint64_t window_pulses = 0;
    double sum_eta_kept = 0.0;
    std::array<IntensityTally, 3> decoy_tally{};  // mu, nu, omega
    IntensityTally single_photon_tally{};
    std::size_t peak_buffer_windows = 0;

    double empirical_pass_fraction() const {
        return windows_total ? double(windows_kept) / double(windows_total)
                             : 0.0;
    }
    double empirical_mean_eta_kept() const {
        return windows_kept ? sum_eta_kept / double(windows_kept) : 0.0;
    }
};

/// Associative merge of partial summaries (sums and maxima).
SelectionSummary merge(const SelectionSummary& a, const SelectionSummary& b);

struct StreamConfig {
    std::uint64_t n_windows = 1;
    std::uint64_t window_pulses = 1000;
    std::uint64_t seed = 1;
    SampleMode mode = SampleMode::Expectation;
    int n_workers = 1;  ///< results are deterministic per (seed, n_workers)
};

/// Single-pass pre-fixed-threshold selection over a sampled transmittance
/// stream: windows below eta_T are discarded immediately (never stored),
/// kept windows accumulate detection statistics for each decoy intensity
/// and for the single-photon channel.
SelectionSummary run_stream(const ChannelPdtc& ch, double eta_T,
                            const DeviceParams& dev, const DecoySettings& dec,
                            const StreamConfig& cfg);

/// Same selection applied to a pre-sampled stream (replay).
SelectionSummary run_stream(const TransmittanceStream& stream, double eta_T,
                            const DeviceParams& dev, const DecoySettings& dec,
                            SampleMode mode = SampleMode::Expectation,
                            std::uint64_t event_seed = 1);

/// Key rate per sent pulse reconstructed from empirical statistics:
/// the decoy pipeline feeds the measured per-intensity (Q, E) through the
/// vacuum+weak estimate and the GLLP formula; the single-photon pipeline
/// evaluates the Shor-Preskill factor at the measured gain/QBER.
double empirical_rate(const SelectionSummary& s, Protocol proto,
                      const DeviceParams& dev, const DecoySettings& dec);

struct ScanPoint {
    double eta_T = 0.0;
    double rate = 0.0;
    double pass_fraction = 0.0;
    double mean_eta = 0.0;
    std::uint64_t windows_kept = 0;
};

/// Evaluates the empirical rate on a grid of thresholds reusing one sampled
/// stream (common random numbers), so the curve is monotone-comparable
/// across thresholds. Grid values must be non-decreasing.
std::vector<ScanPoint> scan_thresholds(const ChannelPdtc& ch,
                                       const DeviceParams& dev,
                                       const DecoySettings& dec,
                                       const std::vector<double>& grid,
                                       Protocol proto,
                                       const StreamConfig& cfg);

/// Writes one eta per line (debug export; defeats the real-time storage
/// contract, so it is gated behind an explicit call).
void dump_stream(const TransmittanceStream& stream, const std::string& path);

}  // namespace prts
