// prts: key-rate engine and Monte Carlo simulator for QKD over turbulent
// free-space channels with pre-fixed-threshold real-time selection.
//
// Subcommands:
//   threshold   print the critical transmittance (analytic and numeric)
//   rate-curve  scan a parameter axis and write a CSV of rates
//   stream      run the single-pass threshold-selection simulation

#include <CLI11.hpp>
#include <atomic>
#include <cmath>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "prts/config.hpp"
#include "prts/finite.hpp"
#include "prts/models.hpp"
#include "prts/montecarlo.hpp"
#include "prts/numerics.hpp"
#include "prts/pdtc.hpp"
#include "prts/rates.hpp"

namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitIo = 3;

struct CommonFlags {
    std::string config_path;
    std::string out_path;
    std::optional<std::uint64_t> seed;
    std::optional<double> pulse_rate_hz;
    std::optional<std::string> model;
    std::optional<std::string> protocol;
};

prts::RunConfig resolve(const CommonFlags& fl) {
    prts::RunConfig cfg;
    if (!fl.config_path.empty()) cfg = prts::load_config(fl.config_path);
    if (fl.seed) cfg.stream_seed = *fl.seed;
    if (fl.protocol) {
        if (*fl.protocol == "single-photon")
            cfg.protocol = prts::RunConfig::ProtocolKind::SinglePhoton;
        else if (*fl.protocol == "decoy")
            cfg.protocol = prts::RunConfig::ProtocolKind::Decoy;
        else if (*fl.protocol == "decoy-finite")
            cfg.protocol = prts::RunConfig::ProtocolKind::DecoyFinite;
        else
            throw std::invalid_argument("unknown --protocol '" + *fl.protocol +
                                        "'");
    }
    if (fl.model) {
        cfg.models.clear();
        std::stringstream ss(*fl.model);
        std::string m;
        while (std::getline(ss, m, ','))
            if (!m.empty()) cfg.models.push_back(m);
        for (const auto& m : cfg.models)
            if (m != "static" && m != "simplified" && m != "ratewise" &&
                m != "pulsewise")
                throw std::invalid_argument("unknown --model '" + m + "'");
    }
    cfg.device.validate();
    cfg.decoy.validate();
    return cfg;
}

double rate_scale(const CommonFlags& fl) {
    return fl.pulse_rate_hz ? *fl.pulse_rate_hz : 1.0;
}

void warn_heavy_tail(const prts::ChannelPdtc& ch) {
    if (ch.heavy_upper_tail())
        std::cerr << "warning: log-normal mass above eta=1 is "
                  << prts::format_double(ch.mass_above_unity())
                  << " (exceeds 1e-6); truncation at 1 is no longer negligible\n";
}

int cmd_threshold(const CommonFlags& fl) {
    const prts::RunConfig cfg = resolve(fl);
    std::ostringstream out;
    out << "y0_over_eta_d = "
        << prts::format_double(cfg.device.y0 / cfg.device.eta_d) << "\n";
    out << "e_critical = " << prts::format_double(prts::e_critical()) << "\n";
    if (cfg.protocol == prts::RunConfig::ProtocolKind::SinglePhoton) {
        const double ec = prts::eta_critical_single_photon(cfg.device);
        out << "protocol = single-photon\n";
        out << "eta_critical_analytic = " << prts::format_double(ec) << "\n";
        // closed form is exact here; numeric root of the rate boundary
        const double numeric = prts::bisect_boundary(
            [&](double eta) {
                return prts::rate_single_photon(eta, cfg.device) > 0.0;
            },
            0.0, 1.0, 1e-4 * ec);
        out << "eta_critical_numeric = " << prts::format_double(numeric)
            << "\n";
    } else {
        prts::DecoySettings dec = cfg.decoy;
        if (cfg.protocol == prts::RunConfig::ProtocolKind::DecoyFinite)
            dec = prts::DecoySettings{cfg.finite.mu, cfg.finite.nu,
                                      cfg.finite.omega};
        const prts::EtaCriticalDecoy ec = prts::eta_critical_decoy(cfg.device, dec);
        out << "protocol = "
            << (cfg.protocol == prts::RunConfig::ProtocolKind::Decoy
                    ? "decoy"
                    : "decoy-finite")
            << "\n";
        out << "eta_critical_numeric = " << prts::format_double(ec.numeric)
            << "\n";
        out << "eta_critical_analytic = " << prts::format_double(ec.analytic)
            << "\n";
    }
    std::cout << out.str();
    return 0;
}

prts::RateFn make_rate_fn(const prts::RunConfig& cfg) {
    if (cfg.protocol == prts::RunConfig::ProtocolKind::SinglePhoton)
        return [dev = cfg.device](double eta) {
            return prts::rate_single_photon(eta, dev);
        };
    return [dev = cfg.device, dec = cfg.decoy](double eta) {
        return prts::rate_decoy_asymptotic(eta, dev, dec);
    };
}

// Critical transmittance of the configured protocol's rate function
// (the integrand kink for rate-wise integration), independent of any
// user-supplied threshold.
double critical_for_protocol(const prts::RunConfig& cfg) {
    prts::RunConfig c = cfg;
    c.threshold.reset();
    return c.resolve_threshold();
}

prts::CsvRow eval_point(const prts::RunConfig& cfg, double axis_value,
                        const std::string& model, double eta_T, double kink,
                        double scale) {
    prts::RunConfig pt = cfg;
    if (cfg.scan_axis == prts::RunConfig::ScanAxis::Loss) {
        pt.loss_db = axis_value;
        pt.eta0.reset();
    } else if (cfg.scan_axis == prts::RunConfig::ScanAxis::Threshold) {
        eta_T = axis_value;
    } else {
        pt.finite.n_total = axis_value;
    }
    const prts::ChannelPdtc ch = pt.channel();

    prts::CsvRow row{};
    row.loss_db = pt.resolved_loss_db();
    row.eta0 = ch.eta0();
    row.sigma = ch.sigma();
    row.model = model;
    row.eta_T = (model == "static") ? 0.0 : eta_T;
    row.pass_fraction = ch.pass_fraction(row.eta_T);
    row.mean_eta = row.pass_fraction >= 1e-15 ? ch.truncated_mean(row.eta_T)
                                              : 0.0;

    if (pt.protocol == prts::RunConfig::ProtocolKind::DecoyFinite) {
        if (model == "static")
            row.rate = prts::rate_finite_simplified(ch, 0.0, pt.finite, pt.device);
        else if (model == "simplified")
            row.rate = prts::rate_finite_simplified(ch, eta_T, pt.finite, pt.device);
        else
            throw std::invalid_argument(
                "model '" + model + "' is not defined for decoy-finite runs");
        row.rate *= scale;
        return row;
    }

    const prts::RateFn rate_fn = make_rate_fn(pt);
    if (model == "static") {
        row.rate = prts::rate_static(rate_fn, ch);
    } else if (model == "simplified") {
        row.rate = prts::rate_simplified(rate_fn, ch, eta_T);
    } else if (model == "ratewise") {
        row.rate = prts::rate_ratewise(rate_fn, ch, eta_T, kink);
    } else if (model == "pulsewise") {
        if (pt.protocol != prts::RunConfig::ProtocolKind::Decoy)
            throw std::invalid_argument(
                "model 'pulsewise' is only defined for the decoy protocol");
        row.rate = prts::rate_pulsewise(ch, eta_T, pt.device, pt.decoy);
    } else {
        throw std::invalid_argument("unknown model '" + model + "'");
    }
    row.rate *= scale;
    return row;
}

int cmd_rate_curve(const CommonFlags& fl) {
    const prts::RunConfig cfg = resolve(fl);
    cfg.validate();
    if (fl.out_path.empty())
        throw std::invalid_argument("rate-curve requires --out PATH");
    warn_heavy_tail(cfg.channel());

    const double eta_T = cfg.resolve_threshold();
    const double kink = cfg.threshold ? critical_for_protocol(cfg) : eta_T;
    const double scale = rate_scale(fl);
    const std::vector<double> axis = prts::scan_values(cfg);

    struct Job {
        double axis_value;
        std::string model;
    };
    std::vector<Job> jobs;
    for (double v : axis)
        for (const auto& m : cfg.models) jobs.push_back({v, m});

    // evaluated in parallel, emitted in scan order
    std::vector<prts::CsvRow> rows(jobs.size());
    const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::future<void>> futs;
    std::atomic<std::size_t> next{0};
    for (std::size_t w = 0; w < std::min<std::size_t>(hw, jobs.size()); ++w) {
        futs.push_back(std::async(std::launch::async, [&] {
            for (std::size_t i = next.fetch_add(1); i < jobs.size();
                 i = next.fetch_add(1))
                rows[i] = eval_point(cfg, jobs[i].axis_value, jobs[i].model,
                                     eta_T, kink, scale);
        }));
    }
    for (auto& f : futs) f.get();

    std::ofstream out(fl.out_path, std::ios::binary);
    if (!out) throw std::ios_base::failure("cannot open " + fl.out_path);
    out << prts::kCsvHeader << "\n";
    for (const auto& r : rows) out << prts::csv_line(r) << "\n";
    out.flush();
    if (!out) throw std::ios_base::failure("write failed for " + fl.out_path);
    return 0;
}

int cmd_stream(const CommonFlags& fl, const std::string& dump_eta_path) {
    const prts::RunConfig cfg = resolve(fl);
    cfg.validate();
    const prts::ChannelPdtc ch = cfg.channel();
    warn_heavy_tail(ch);
    const double eta_T = cfg.resolve_threshold();
    const double scale = rate_scale(fl);
    const prts::Protocol proto =
        cfg.protocol == prts::RunConfig::ProtocolKind::SinglePhoton
            ? prts::Protocol::SinglePhoton
            : prts::Protocol::Decoy;

    prts::StreamConfig sc;
    sc.n_windows = cfg.stream_windows;
    sc.window_pulses = cfg.stream_window_pulses;
    sc.seed = cfg.stream_seed;
    sc.mode = cfg.stream_mode;

    if (!dump_eta_path.empty()) {
        // gated raw export: one eta per line (defeats the O(1)-storage
        // contract, debugging only)
        prts::dump_stream(prts::sample(ch, sc.n_windows, sc.seed, sc.window_pulses),
                          dump_eta_path);
    }

    const prts::SelectionSummary s =
        prts::run_stream(ch, eta_T, cfg.device, cfg.decoy, sc);
    const double rate = prts::empirical_rate(s, proto, cfg.device, cfg.decoy);

    std::ostringstream out;
    out << "eta_T = " << prts::format_double(eta_T) << "\n";
    out << "windows_total = " << s.windows_total << "\n";
    out << "windows_kept = " << s.windows_kept << "\n";
    out << "window_pulses = " << s.window_pulses << "\n";
    out << "peak_buffer_windows = " << s.peak_buffer_windows << "\n";
    out << "empirical_pass_fraction = "
        << prts::format_double(s.empirical_pass_fraction()) << "\n";
    out << "analytic_pass_fraction = "
        << prts::format_double(ch.pass_fraction(eta_T)) << "\n";
    out << "empirical_mean_eta_kept = "
        << prts::format_double(s.empirical_mean_eta_kept()) << "\n";
    const char* names[3] = {"mu", "nu", "omega"};
    for (int k = 0; k < 3; ++k) {
        out << "empirical_Q_" << names[k] << " = "
            << prts::format_double(s.decoy_tally[k].gain()) << "\n";
        out << "empirical_E_" << names[k] << " = "
            << prts::format_double(s.decoy_tally[k].qber()) << "\n";
    }
    out << "empirical_rate = " << prts::format_double(rate * scale) << "\n";
    std::cout << out.str();

    if (cfg.stream_grid_steps > 0) {
        if (fl.out_path.empty())
            throw std::invalid_argument(
                "stream threshold scan requires --out PATH");
        if (!cfg.stream_grid_start || !cfg.stream_grid_stop)
            throw std::invalid_argument(
                "stream scan needs stream.grid_start and stream.grid_stop");
        std::vector<double> grid(cfg.stream_grid_steps);
        for (int i = 0; i < cfg.stream_grid_steps; ++i)
            grid[i] = *cfg.stream_grid_start +
                      (cfg.stream_grid_steps == 1
                           ? 0.0
                           : (*cfg.stream_grid_stop - *cfg.stream_grid_start) *
                                 i / (cfg.stream_grid_steps - 1));
        const auto points =
            prts::scan_thresholds(ch, cfg.device, cfg.decoy, grid, proto, sc);
        std::ofstream csv(fl.out_path, std::ios::binary);
        if (!csv) throw std::ios_base::failure("cannot open " + fl.out_path);
        csv << prts::kCsvHeader << "\n";
        for (const auto& p : points) {
            prts::CsvRow row{};
            row.loss_db = cfg.resolved_loss_db();
            row.eta0 = ch.eta0();
            row.sigma = ch.sigma();
            row.model = "stream";
            row.eta_T = p.eta_T;
            row.pass_fraction = p.pass_fraction;
            row.mean_eta = p.mean_eta;
            row.rate = p.rate * scale;
            csv << prts::csv_line(row) << "\n";
        }
        csv.flush();
        if (!csv) throw std::ios_base::failure("write failed for " + fl.out_path);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Key-rate engine and Monte Carlo simulator for free-space "
                 "QKD with pre-fixed-threshold real-time selection"};
    app.require_subcommand(1);

    CommonFlags fl;
    std::string dump_eta_path;
    double seed_val = -1, pulse_rate = -1;
    std::string model_arg, protocol_arg;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", fl.config_path, "config file (key=value)");
        sub->add_option("--out", fl.out_path, "output CSV path");
        sub->add_option("--seed", seed_val, "override stream seed");
        sub->add_option("--pulse-rate-hz", pulse_rate,
                        "multiply per-pulse rates into bits per second");
        sub->add_option("--model", model_arg,
                        "model list: static,simplified,ratewise,pulsewise");
        sub->add_option("--protocol", protocol_arg,
                        "single-photon | decoy | decoy-finite");
    };

    CLI::App* threshold = app.add_subcommand(
        "threshold", "print the critical transmittance for the protocol");
    add_common(threshold);
    CLI::App* curve = app.add_subcommand(
        "rate-curve", "scan an axis and write rate rows as CSV");
    add_common(curve);
    CLI::App* stream = app.add_subcommand(
        "stream", "run the real-time selection stream simulation");
    add_common(stream);
    stream->add_option("--dump-eta", dump_eta_path,
                       "write the raw transmittance stream, one eta per line");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? kExitInvalid : 0;
    }

    try {
        if (seed_val >= 0) fl.seed = static_cast<std::uint64_t>(seed_val);
        if (pulse_rate >= 0) fl.pulse_rate_hz = pulse_rate;
        if (!model_arg.empty()) fl.model = model_arg;
        if (!protocol_arg.empty()) fl.protocol = protocol_arg;

        if (threshold->parsed()) return cmd_threshold(fl);
        if (curve->parsed()) return cmd_rate_curve(fl);
        if (stream->parsed()) return cmd_stream(fl, dump_eta_path);
    } catch (const std::ios_base::failure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    }
    return 0;
}
