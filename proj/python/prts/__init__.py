"""Key-rate engine and Monte Carlo simulator for QKD over turbulent
free-space channels, with pre-fixed-threshold real-time selection (P-RTS).

The heavy lifting lives in the C++ extension module; this package re-exports
its surface.
"""

from ._core import (  # noqa: F401
    ChannelPdtc,
    DecoySettings,
    DeviceParams,
    FiniteSettings,
    IntensityTally,
    Protocol,
    PulsewiseQber,
    SampleMode,
    SelectionSummary,
    ThresholdReport,
    __version__,
    channel_observables,
    e_critical,
    empirical_rate,
    eta_critical_decoy,
    eta_critical_single_photon,
    h2,
    optimal_threshold,
    rate_decoy_asymptotic,
    rate_finite,
    rate_finite_simplified,
    rate_pulsewise,
    rate_ratewise,
    rate_simplified,
    rate_single_photon,
    rate_static,
    run_stream,
    rytov_sigma,
    sample,
    scan_thresholds,
)

__all__ = [
    "ChannelPdtc",
    "DecoySettings",
    "DeviceParams",
    "FiniteSettings",
    "IntensityTally",
    "Protocol",
    "PulsewiseQber",
    "SampleMode",
    "SelectionSummary",
    "ThresholdReport",
    "channel_observables",
    "e_critical",
    "empirical_rate",
    "eta_critical_decoy",
    "eta_critical_single_photon",
    "h2",
    "optimal_threshold",
    "rate_decoy_asymptotic",
    "rate_finite",
    "rate_finite_simplified",
    "rate_pulsewise",
    "rate_ratewise",
    "rate_simplified",
    "rate_single_photon",
    "rate_static",
    "run_stream",
    "rytov_sigma",
    "sample",
    "scan_thresholds",
]
