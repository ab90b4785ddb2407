"""Quantum Zeno suppression of 1/f^alpha dephasing in a spin qubit.

Closed-form decoherence rates and fidelities (:mod:`.noise_model`,
:mod:`.protocols`), a density-matrix channel algebra (:mod:`.quantum_kernel`)
and an independent Monte Carlo oracle (:mod:`.mc_oracle`).
"""

from .errors import (
    ConfigError,
    DegenerateWindowError,
    DomainError,
    FitError,
    GridMismatchError,
    InsufficientPointsError,
)
from .noise_model import (
    ConstantRateSpectrum,
    LorentzianComponent,
    NoiseSpectrum,
    decoherence_exponent,
    decoherence_rate,
    desk_spectrum,
    lorentzian_psd,
    make_arithmetic_spectrum,
    mixture_correlation,
    mixture_psd,
    default_spectrum,
    psd_slope_fit,
)
from .protocols import (
    DecayCurve,
    DecayLawFit,
    ZenoSchedule,
    compose_protocol,
    fid_fidelity,
    fit_short_time_decay,
    peak_gain,
    power_law_survival,
    zeno_fidelity,
    zeno_gain,
)

__version__ = "0.1.0"
