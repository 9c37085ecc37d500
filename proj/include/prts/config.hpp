#pragma once

#include <optional>
#include <string>
#include <vector>

#include "prts/finite.hpp"
#include "prts/montecarlo.hpp"
#include "prts/pdtc.hpp"
#include "prts/rates.hpp"

namespace prts {

/// Full run description parsed from a flat key=value config file with
/// [section] headers. Parsing then re-serializing is idempotent.
struct RunConfig {
    enum class ProtocolKind { SinglePhoton, Decoy, DecoyFinite };
    enum class ScanAxis { Loss, Threshold, NTotal };
    enum class ScanScale { Linear, Log };

    // [channel] either loss_db or eta0 (eta0 = 10^(-loss_db/10)), plus sigma
    std::optional<double> loss_db;
    std::optional<double> eta0;
    double sigma = 0.9;

    // [device]
    DeviceParams device;

    // [decoy]
    DecoySettings decoy;

    // [finite]
    FiniteSettings finite;

    // [run]
    ProtocolKind protocol = ProtocolKind::Decoy;
    std::vector<std::string> models = {"simplified"};  // static|simplified|ratewise|pulsewise
    std::optional<double> threshold;  // empty = "auto" (rate-module eta_critical)

    // [scan]
    ScanAxis scan_axis = ScanAxis::Loss;
    double scan_start = 20.0;
    double scan_stop = 40.0;
    int scan_steps = 21;
    ScanScale scan_scale = ScanScale::Linear;

    // [stream]
    std::uint64_t stream_windows = 100000;
    std::uint64_t stream_window_pulses = 1000;
    std::uint64_t stream_seed = 1;
    SampleMode stream_mode = SampleMode::Expectation;
    std::optional<double> stream_grid_start, stream_grid_stop;
    int stream_grid_steps = 0;  // 0 = no threshold scan

    /// Resolved channel; throws std::invalid_argument on missing/conflicting
    /// channel keys or invalid parameter values.
    ChannelPdtc channel() const;
    double resolved_eta0() const;
    double resolved_loss_db() const;

    /// Threshold to use: explicit value, or the rate-module critical
    /// transmittance of the selected protocol when unset ("auto").
    double resolve_threshold() const;

    void validate() const;
};

/// Parses the config text. Unknown sections or keys are errors.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Canonical serialization; parse(serialize(c)) == c.
std::string serialize_config(const RunConfig& c);

/// Scan axis values (linear or log spacing, inclusive of both ends).
std::vector<double> scan_values(const RunConfig& c);

/// Floating-point rendering used in every text output (17 significant digits,
/// round-trips exactly through parsing).
std::string format_double(double v);

/// One row of the rate-curve CSV.
struct CsvRow {
    double loss_db;
    double eta0;
    double sigma;
    std::string model;
    double eta_T;
    double pass_fraction;
    double mean_eta;
    double rate;
};

extern const char* const kCsvHeader;  // loss_db,eta0,...,rate

std::string csv_line(const CsvRow& row);

}  // namespace prts
