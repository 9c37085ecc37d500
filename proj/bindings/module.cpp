#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "prts/finite.hpp"
#include "prts/models.hpp"
#include "prts/montecarlo.hpp"
#include "prts/pdtc.hpp"
#include "prts/rates.hpp"

namespace py = pybind11;
using namespace prts;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Key-rate engine for free-space QKD with pre-fixed-threshold "
              "real-time selection";

    py::class_<ChannelPdtc>(m, "ChannelPdtc")
        .def(py::init<double, double>(), py::arg("eta0"), py::arg("sigma"))
        .def_property_readonly("eta0", &ChannelPdtc::eta0)
        .def_property_readonly("sigma", &ChannelPdtc::sigma)
        .def("pdf", &ChannelPdtc::pdf, py::arg("eta"))
        .def("cdf", &ChannelPdtc::cdf, py::arg("x"))
        .def("pass_fraction", &ChannelPdtc::pass_fraction, py::arg("eta_T"))
        .def("truncated_mean", &ChannelPdtc::truncated_mean, py::arg("eta_T"))
        .def("mass_above_unity", &ChannelPdtc::mass_above_unity)
        .def("heavy_upper_tail", &ChannelPdtc::heavy_upper_tail)
        .def("__repr__", [](const ChannelPdtc& c) {
            return "ChannelPdtc(eta0=" + std::to_string(c.eta0()) +
                   ", sigma=" + std::to_string(c.sigma()) + ")";
        });

    m.def(
        "rytov_sigma",
        [](double cn2, double k, double L) {
            return rytov_sigma(RytovInput{cn2, k, L});
        },
        py::arg("cn2"), py::arg("k"), py::arg("L"));

    m.def(
        "sample",
        [](const ChannelPdtc& ch, std::size_t n, std::uint64_t seed) {
            TransmittanceStream s = sample(ch, n, seed);
            return py::array_t<double>(py::ssize_t(s.samples.size()),
                                       s.samples.data());
        },
        py::arg("channel"), py::arg("n"), py::arg("seed"),
        "i.i.d. transmittance draws, resampling values above 1");

    py::class_<DeviceParams>(m, "DeviceParams")
        .def(py::init([](double y0, double eta_d, double e_d, double f,
                         double q) {
                 DeviceParams d{y0, eta_d, e_d, f, q};
                 d.validate();
                 return d;
             }),
             py::arg("y0") = 1e-5, py::arg("eta_d") = 0.25,
             py::arg("e_d") = 0.03, py::arg("f") = 1.22, py::arg("q") = 1.0)
        .def_readonly("y0", &DeviceParams::y0)
        .def_readonly("eta_d", &DeviceParams::eta_d)
        .def_readonly("e_d", &DeviceParams::e_d)
        .def_readonly("f", &DeviceParams::f)
        .def_readonly("q", &DeviceParams::q)
        .def("misalignment_exceeds_critical",
             &DeviceParams::misalignment_exceeds_critical);

    py::class_<DecoySettings>(m, "DecoySettings")
        .def(py::init([](double mu, double nu, double omega) {
                 DecoySettings d{mu, nu, omega};
                 d.validate();
                 return d;
             }),
             py::arg("mu") = 0.3, py::arg("nu") = 0.05, py::arg("omega") = 0.0)
        .def_readonly("mu", &DecoySettings::mu)
        .def_readonly("nu", &DecoySettings::nu)
        .def_readonly("omega", &DecoySettings::omega);

    py::class_<FiniteSettings>(m, "FiniteSettings")
        .def(py::init([](double n_total, double mu, double nu, double omega,
                         double p_mu, double p_nu, double q_x, double eps_sec,
                         double eps_cor) {
                 FiniteSettings f{n_total, mu,  nu,      omega,  p_mu,
                                  p_nu,    q_x, eps_sec, eps_cor};
                 f.validate();
                 return f;
             }),
             py::arg("n_total") = 1e12, py::arg("mu") = 0.31,
             py::arg("nu") = 0.165, py::arg("omega") = 2e-4,
             py::arg("p_mu") = 0.5, py::arg("p_nu") = 0.36,
             py::arg("q_x") = 0.75, py::arg("eps_sec") = 1e-10,
             py::arg("eps_cor") = 1e-15)
        .def_readwrite("n_total", &FiniteSettings::n_total)
        .def_readonly("mu", &FiniteSettings::mu)
        .def_readonly("nu", &FiniteSettings::nu)
        .def_readonly("omega", &FiniteSettings::omega)
        .def_readonly("q_x", &FiniteSettings::q_x);

    m.def("h2", &h2, py::arg("x"), "binary entropy in bits");
    m.def("e_critical", &e_critical);
    m.def("rate_single_photon", &rate_single_photon, py::arg("eta"),
          py::arg("device"));
    m.def("eta_critical_single_photon", &eta_critical_single_photon,
          py::arg("device"));
    m.def(
        "channel_observables",
        [](double eta, double intensity, const DeviceParams& dev) {
            GainQber g = channel_observables(eta, intensity, dev);
            return py::make_tuple(g.gain, g.qber);
        },
        py::arg("eta"), py::arg("intensity"), py::arg("device"),
        "(gain, qber) of an intensity on the static channel");
    m.def("rate_decoy_asymptotic", &rate_decoy_asymptotic, py::arg("eta"),
          py::arg("device"), py::arg("decoy"));
    m.def(
        "eta_critical_decoy",
        [](const DeviceParams& dev, const DecoySettings& dec) {
            EtaCriticalDecoy e = eta_critical_decoy(dev, dec);
            return py::make_tuple(e.numeric, e.analytic);
        },
        py::arg("device"), py::arg("decoy"),
        "(numeric, analytic) critical transmittance");

    m.def("rate_static", &rate_static, py::arg("rate_fn"), py::arg("channel"));
    m.def("rate_simplified", &rate_simplified, py::arg("rate_fn"),
          py::arg("channel"), py::arg("eta_T"));
    m.def("rate_ratewise", &rate_ratewise, py::arg("rate_fn"),
          py::arg("channel"), py::arg("eta_T"),
          py::arg("kink_eta") = std::nullopt);
    m.def("rate_pulsewise", &rate_pulsewise, py::arg("channel"),
          py::arg("eta_T"), py::arg("device"), py::arg("decoy"),
          py::arg("mode") = PulsewiseQber::AveragedYields);

    py::enum_<PulsewiseQber>(m, "PulsewiseQber")
        .value("AveragedYields", PulsewiseQber::AveragedYields)
        .value("SimplifiedPointwise", PulsewiseQber::SimplifiedPointwise);

    py::class_<ThresholdReport>(m, "ThresholdReport")
        .def_readonly("eta_T", &ThresholdReport::eta_T)
        .def_readonly("pass_fraction", &ThresholdReport::pass_fraction)
        .def_readonly("mean_eta", &ThresholdReport::mean_eta)
        .def_readonly("rate_static", &ThresholdReport::rate_static)
        .def_readonly("rate_simplified", &ThresholdReport::rate_simplified)
        .def_readonly("rate_ratewise", &ThresholdReport::rate_ratewise)
        .def_readonly("optimality_residual",
                      &ThresholdReport::optimality_residual);

    m.def("optimal_threshold", &optimal_threshold, py::arg("rate_fn"),
          py::arg("channel"), py::arg("eta_crit_hint"),
          "(eta_T, ThresholdReport) maximizing the simplified-model rate");

    m.def("rate_finite", &rate_finite, py::arg("eta"), py::arg("finite"),
          py::arg("device"));
    m.def("rate_finite_simplified", &rate_finite_simplified,
          py::arg("channel"), py::arg("eta_T"), py::arg("finite"),
          py::arg("device"));

    py::enum_<SampleMode>(m, "SampleMode")
        .value("Expectation", SampleMode::Expectation)
        .value("Event", SampleMode::Event);
    py::enum_<Protocol>(m, "Protocol")
        .value("SinglePhoton", Protocol::SinglePhoton)
        .value("Decoy", Protocol::Decoy);

    py::class_<IntensityTally>(m, "IntensityTally")
        .def_readonly("sent", &IntensityTally::sent)
        .def_readonly("clicks", &IntensityTally::clicks)
        .def_readonly("errors", &IntensityTally::errors)
        .def("gain", &IntensityTally::gain)
        .def("qber", &IntensityTally::qber);

    py::class_<SelectionSummary>(m, "SelectionSummary")
        .def_readonly("eta_threshold", &SelectionSummary::eta_threshold)
        .def_readonly("windows_total", &SelectionSummary::windows_total)
        .def_readonly("windows_kept", &SelectionSummary::windows_kept)
        .def_readonly("window_pulses", &SelectionSummary::window_pulses)
        .def_readonly("peak_buffer_windows",
                      &SelectionSummary::peak_buffer_windows)
        .def_readonly("decoy_tally", &SelectionSummary::decoy_tally)
        .def_readonly("single_photon_tally",
                      &SelectionSummary::single_photon_tally)
        .def("empirical_pass_fraction",
             &SelectionSummary::empirical_pass_fraction)
        .def("empirical_mean_eta_kept",
             &SelectionSummary::empirical_mean_eta_kept);

    m.def(
        "run_stream",
        [](const ChannelPdtc& ch, double eta_T, const DeviceParams& dev,
           const DecoySettings& dec, std::uint64_t n_windows,
           std::uint64_t window_pulses, std::uint64_t seed, SampleMode mode,
           int n_workers) {
            StreamConfig cfg{n_windows, window_pulses, seed, mode, n_workers};
            return run_stream(ch, eta_T, dev, dec, cfg);
        },
        py::arg("channel"), py::arg("eta_T"), py::arg("device"),
        py::arg("decoy"), py::arg("n_windows"),
        py::arg("window_pulses") = 1000, py::arg("seed") = 1,
        py::arg("mode") = SampleMode::Expectation, py::arg("n_workers") = 1);

    m.def("empirical_rate", &empirical_rate, py::arg("summary"),
          py::arg("protocol"), py::arg("device"), py::arg("decoy"));

    m.def(
        "scan_thresholds",
        [](const ChannelPdtc& ch, const DeviceParams& dev,
           const DecoySettings& dec, const std::vector<double>& grid,
           Protocol proto, std::uint64_t n_windows,
           std::uint64_t window_pulses, std::uint64_t seed, SampleMode mode) {
            StreamConfig cfg{n_windows, window_pulses, seed, mode, 1};
            auto points = scan_thresholds(ch, dev, dec, grid, proto, cfg);
            py::list out;
            for (const auto& p : points)
                out.append(py::make_tuple(p.eta_T, p.rate, p.pass_fraction,
                                          p.mean_eta, p.windows_kept));
            return out;
        },
        py::arg("channel"), py::arg("device"), py::arg("decoy"),
        py::arg("grid"), py::arg("protocol"), py::arg("n_windows"),
        py::arg("window_pulses") = 1000, py::arg("seed") = 1,
        py::arg("mode") = SampleMode::Expectation,
        "per-threshold (eta_T, rate, pass_fraction, mean_eta, windows_kept) "
        "sharing one sampled stream");

#ifdef PRTS_VERSION
    m.attr("__version__") = PRTS_VERSION;
#else
    m.attr("__version__") = "dev";
#endif
}
