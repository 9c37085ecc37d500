#include "prts/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace prts {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad numeric value for '" + key +
                                    "': " + v);
    }
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    const double x = to_double(key, v);
    if (x < 0 || x != std::floor(x))
        throw std::invalid_argument("config: '" + key +
                                    "' must be a non-negative integer");
    return static_cast<std::uint64_t>(x);
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

RunConfig parse_config(const std::string& text) {
    RunConfig c;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config: malformed section at line " +
                                            std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            if (section != "channel" && section != "device" &&
                section != "decoy" && section != "finite" && section != "run" &&
                section != "scan" && section != "stream")
                throw std::invalid_argument("config: unknown section [" +
                                            section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: expected key=value at line " +
                                        std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        const std::string qual = section + "." + key;

        if (qual == "channel.loss_db") c.loss_db = to_double(qual, val);
        else if (qual == "channel.eta0") c.eta0 = to_double(qual, val);
        else if (qual == "channel.sigma") c.sigma = to_double(qual, val);
        else if (qual == "device.y0") c.device.y0 = to_double(qual, val);
        else if (qual == "device.eta_d") c.device.eta_d = to_double(qual, val);
        else if (qual == "device.e_d") c.device.e_d = to_double(qual, val);
        else if (qual == "device.f") c.device.f = to_double(qual, val);
        else if (qual == "device.q") c.device.q = to_double(qual, val);
        else if (qual == "decoy.mu") c.decoy.mu = to_double(qual, val);
        else if (qual == "decoy.nu") c.decoy.nu = to_double(qual, val);
        else if (qual == "decoy.omega") c.decoy.omega = to_double(qual, val);
        else if (qual == "finite.n_total") c.finite.n_total = to_double(qual, val);
        else if (qual == "finite.mu") c.finite.mu = to_double(qual, val);
        else if (qual == "finite.nu") c.finite.nu = to_double(qual, val);
        else if (qual == "finite.omega") c.finite.omega = to_double(qual, val);
        else if (qual == "finite.p_mu") c.finite.p_mu = to_double(qual, val);
        else if (qual == "finite.p_nu") c.finite.p_nu = to_double(qual, val);
        else if (qual == "finite.q_x") c.finite.q_x = to_double(qual, val);
        else if (qual == "finite.eps_sec") c.finite.eps_sec = to_double(qual, val);
        else if (qual == "finite.eps_cor") c.finite.eps_cor = to_double(qual, val);
        else if (qual == "run.protocol") {
            if (val == "single-photon") c.protocol = RunConfig::ProtocolKind::SinglePhoton;
            else if (val == "decoy") c.protocol = RunConfig::ProtocolKind::Decoy;
            else if (val == "decoy-finite") c.protocol = RunConfig::ProtocolKind::DecoyFinite;
            else throw std::invalid_argument("config: unknown protocol '" + val + "'");
        } else if (qual == "run.model") {
            c.models = split_list(val);
            for (const auto& m : c.models)
                if (m != "static" && m != "simplified" && m != "ratewise" &&
                    m != "pulsewise")
                    throw std::invalid_argument("config: unknown model '" + m + "'");
            if (c.models.empty())
                throw std::invalid_argument("config: empty model list");
        } else if (qual == "run.threshold") {
            if (val == "auto") c.threshold.reset();
            else c.threshold = to_double(qual, val);
        } else if (qual == "scan.axis") {
            if (val == "loss") c.scan_axis = RunConfig::ScanAxis::Loss;
            else if (val == "threshold") c.scan_axis = RunConfig::ScanAxis::Threshold;
            else if (val == "n") c.scan_axis = RunConfig::ScanAxis::NTotal;
            else throw std::invalid_argument("config: unknown scan axis '" + val + "'");
        } else if (qual == "scan.start") c.scan_start = to_double(qual, val);
        else if (qual == "scan.stop") c.scan_stop = to_double(qual, val);
        else if (qual == "scan.steps") c.scan_steps = static_cast<int>(to_u64(qual, val));
        else if (qual == "scan.scale") {
            if (val == "linear") c.scan_scale = RunConfig::ScanScale::Linear;
            else if (val == "log") c.scan_scale = RunConfig::ScanScale::Log;
            else throw std::invalid_argument("config: unknown scan scale '" + val + "'");
        } else if (qual == "stream.n_windows") c.stream_windows = to_u64(qual, val);
        else if (qual == "stream.window_pulses") c.stream_window_pulses = to_u64(qual, val);
        else if (qual == "stream.seed") c.stream_seed = to_u64(qual, val);
        else if (qual == "stream.mode") {
            if (val == "expectation") c.stream_mode = SampleMode::Expectation;
            else if (val == "event") c.stream_mode = SampleMode::Event;
            else throw std::invalid_argument("config: unknown stream mode '" + val + "'");
        } else if (qual == "stream.grid_start") c.stream_grid_start = to_double(qual, val);
        else if (qual == "stream.grid_stop") c.stream_grid_stop = to_double(qual, val);
        else if (qual == "stream.grid_steps") c.stream_grid_steps = static_cast<int>(to_u64(qual, val));
        else throw std::invalid_argument("config: unknown key '" + qual + "'");
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::ios_base::failure("cannot open config file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
    std::ostringstream o;
    o << "[channel]\n";
    if (c.loss_db) o << "loss_db = " << format_double(*c.loss_db) << "\n";
    if (c.eta0) o << "eta0 = " << format_double(*c.eta0) << "\n";
    o << "sigma = " << format_double(c.sigma) << "\n";
    o << "\n[device]\n";
    o << "y0 = " << format_double(c.device.y0) << "\n";
    o << "eta_d = " << format_double(c.device.eta_d) << "\n";
    o << "e_d = " << format_double(c.device.e_d) << "\n";
    o << "f = " << format_double(c.device.f) << "\n";
    o << "q = " << format_double(c.device.q) << "\n";
    o << "\n[decoy]\n";
    o << "mu = " << format_double(c.decoy.mu) << "\n";
    o << "nu = " << format_double(c.decoy.nu) << "\n";
    o << "omega = " << format_double(c.decoy.omega) << "\n";
    o << "\n[finite]\n";
    o << "n_total = " << format_double(c.finite.n_total) << "\n";
    o << "mu = " << format_double(c.finite.mu) << "\n";
    o << "nu = " << format_double(c.finite.nu) << "\n";
    o << "omega = " << format_double(c.finite.omega) << "\n";
    o << "p_mu = " << format_double(c.finite.p_mu) << "\n";
    o << "p_nu = " << format_double(c.finite.p_nu) << "\n";
    o << "q_x = " << format_double(c.finite.q_x) << "\n";
    o << "eps_sec = " << format_double(c.finite.eps_sec) << "\n";
    o << "eps_cor = " << format_double(c.finite.eps_cor) << "\n";
    o << "\n[run]\n";
    o << "protocol = "
      << (c.protocol == RunConfig::ProtocolKind::SinglePhoton ? "single-photon"
          : c.protocol == RunConfig::ProtocolKind::Decoy      ? "decoy"
                                                              : "decoy-finite")
      << "\n";
    o << "model = ";
    for (std::size_t i = 0; i < c.models.size(); ++i)
        o << (i ? "," : "") << c.models[i];
    o << "\n";
    o << "threshold = "
      << (c.threshold ? format_double(*c.threshold) : std::string("auto"))
      << "\n";
    o << "\n[scan]\n";
    o << "axis = "
      << (c.scan_axis == RunConfig::ScanAxis::Loss        ? "loss"
          : c.scan_axis == RunConfig::ScanAxis::Threshold ? "threshold"
                                                          : "n")
      << "\n";
    o << "start = " << format_double(c.scan_start) << "\n";
    o << "stop = " << format_double(c.scan_stop) << "\n";
    o << "steps = " << c.scan_steps << "\n";
    o << "scale = "
      << (c.scan_scale == RunConfig::ScanScale::Linear ? "linear" : "log")
      << "\n";
    o << "\n[stream]\n";
    o << "n_windows = " << c.stream_windows << "\n";
    o << "window_pulses = " << c.stream_window_pulses << "\n";
    o << "seed = " << c.stream_seed << "\n";
    o << "mode = "
      << (c.stream_mode == SampleMode::Expectation ? "expectation" : "event")
      << "\n";
    if (c.stream_grid_start)
        o << "grid_start = " << format_double(*c.stream_grid_start) << "\n";
    if (c.stream_grid_stop)
        o << "grid_stop = " << format_double(*c.stream_grid_stop) << "\n";
    if (c.stream_grid_steps > 0)
        o << "grid_steps = " << c.stream_grid_steps << "\n";
    return o.str();
}

double RunConfig::resolved_eta0() const {
    if (eta0 && loss_db)
        throw std::invalid_argument(
            "config: give either channel.eta0 or channel.loss_db, not both");
    if (eta0) return *eta0;
    if (loss_db) {
        if (*loss_db < 0.0)
            throw std::invalid_argument("config: loss_db must be >= 0");
        return std::pow(10.0, -*loss_db / 10.0);
    }
    throw std::invalid_argument(
        "config: channel needs eta0 or loss_db");
}

double RunConfig::resolved_loss_db() const {
    if (loss_db) return *loss_db;
    return -10.0 * std::log10(resolved_eta0());
}

ChannelPdtc RunConfig::channel() const {
    return ChannelPdtc(resolved_eta0(), sigma);
}

double RunConfig::resolve_threshold() const {
    if (threshold) return *threshold;
    switch (protocol) {
        case ProtocolKind::SinglePhoton:
            return eta_critical_single_photon(device);
        case ProtocolKind::Decoy:
            return eta_critical_decoy(device, decoy).numeric;
        case ProtocolKind::DecoyFinite: {
            // critical transmittance of the matched asymptotic rate
            DecoySettings d{finite.mu, finite.nu, finite.omega};
            return eta_critical_decoy(device, d).numeric;
        }
    }
    throw std::logic_error("unreachable");
}

void RunConfig::validate() const {
    device.validate();
    decoy.validate();
    finite.validate();
    (void)channel();
    if (scan_steps < 1)
        throw std::invalid_argument("config: scan.steps must be >= 1");
    if (scan_scale == ScanScale::Log && !(scan_start > 0.0 && scan_stop > 0.0))
        throw std::invalid_argument(
            "config: log scale requires positive scan bounds");
    if (threshold && (*threshold < 0.0 || *threshold >= 1.0))
        throw std::invalid_argument("config: threshold must be in [0, 1)");
}

std::vector<double> scan_values(const RunConfig& c) {
    std::vector<double> v(c.scan_steps);
    if (c.scan_steps == 1) {
        v[0] = c.scan_start;
        return v;
    }
    for (int i = 0; i < c.scan_steps; ++i) {
        const double t = double(i) / (c.scan_steps - 1);
        if (c.scan_scale == RunConfig::ScanScale::Linear)
            v[i] = c.scan_start + t * (c.scan_stop - c.scan_start);
        else
            v[i] = c.scan_start * std::pow(c.scan_stop / c.scan_start, t);
    }
    return v;
}

const char* const kCsvHeader =
    "loss_db,eta0,sigma,model,eta_T,pass_fraction,mean_eta,rate";

std::string csv_line(const CsvRow& r) {
    std::ostringstream o;
    o << format_double(r.loss_db) << ',' << format_double(r.eta0) << ','
      << format_double(r.sigma) << ',' << r.model << ','
      << format_double(r.eta_T) << ',' << format_double(r.pass_fraction) << ','
      << format_double(r.mean_eta) << ',' << format_double(r.rate);
    return o.str();
}

}  // namespace prts
