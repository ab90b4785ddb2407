"""
1/f^alpha classical noise as a normalized mixture of Lorentzian components.

Each component is a Gaussian stationary process with correlation
``Delta**2 * exp(-2 * gamma * |t|)``; the mixture weights each component by
``gamma**-alpha`` and divides by the weight sum, so the stationary variance of
the mixture is ``Delta**2`` for any grid.

Units: ``gamma`` in 1/s, times in s, frequencies ``f`` in Hz. The Lorentzian
half-power point sits at ``pi * f = gamma``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

__all__ = [
    "LorentzianComponent",
    "NoiseSpectrum",
    "ConstantRateSpectrum",
    "make_arithmetic_spectrum",
    "default_spectrum",
    "desk_spectrum",
    "lorentzian_psd",
    "mixture_correlation",
    "mixture_psd",
    "decoherence_rate",
    "decoherence_exponent",
    "psd_slope_fit",
    "reference_power_law",
    "SERIES_THRESHOLD",
]

# Below this value of x = 2*gamma*t the per-term factor is taken from its
# Taylor series; the truncation error there is O(x**4) < 1e-16.
SERIES_THRESHOLD = 1e-4


@dataclass(frozen=True)
class LorentzianComponent:
    gamma: float
    weight: float

    def __post_init__(self):
        if not (self.gamma > 0 and np.isfinite(self.gamma)):
            raise DomainError(f"gamma must be positive, got {self.gamma!r}")
        if not (self.weight > 0 and np.isfinite(self.weight)):
            raise DomainError(f"weight must be positive, got {self.weight!r}")


def _shape_factor(x, t):
    """(x - 1 + exp(-x)) / x**2 * t, i.e. the per-component rate term.

    ``x`` is ``2*gamma*t``. The direct form cancels catastrophically for
    small ``x``, where the series ``t*(1/2 - x/6 + x**2/24 - x**3/120)`` is
    used instead.
    """
    x = np.asarray(x, dtype=float)
    small = x < SERIES_THRESHOLD
    xs = np.where(small, x, 0.0)
    series = 0.5 - xs / 6.0 + xs**2 / 24.0 - xs**3 / 120.0
    xd = np.where(small, 1.0, x)
    direct = (xd + np.expm1(-xd)) / xd**2
    return np.where(small, series, direct) * t


@dataclass(frozen=True, eq=False)
class NoiseSpectrum:
    """Weighted Lorentzian mixture approximating 1/f^alpha noise.

    Parameters
    ----------
    amplitude_delta : float
        Noise amplitude Delta in 1/s (angular frequency units).
    alpha : float
        Spectral exponent, 0 < alpha < 2.
    components : tuple of LorentzianComponent
        Components ordered by strictly increasing ``gamma``.

    The weight sum is computed once at construction and cached in
    ``normalization``; ``gammas`` and ``norm_weights`` hold the arrays used
    by every evaluation.
    """

    amplitude_delta: float
    alpha: float
    components: tuple
    normalization: float = field(init=False)
    gammas: np.ndarray = field(init=False, repr=False)
    norm_weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not (self.amplitude_delta > 0 and np.isfinite(self.amplitude_delta)):
            raise DomainError(f"amplitude_delta must be positive, got {self.amplitude_delta!r}")
        if not (0 < self.alpha < 2):
            raise DomainError(f"alpha must lie in (0, 2), got {self.alpha!r}")
        comps = tuple(self.components)
        if not comps:
            raise DomainError("spectrum needs at least one component")
        gammas = np.array([c.gamma for c in comps], dtype=float)
        if np.any(np.diff(gammas) <= 0):
            raise DomainError("component gammas must be strictly increasing")
        weights = np.array([c.weight for c in comps], dtype=float)
        norm = float(np.sum(weights))
        gammas.setflags(write=False)
        nw = weights / norm
        nw.setflags(write=False)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "normalization", norm)
        object.__setattr__(self, "gammas", gammas)
        object.__setattr__(self, "norm_weights", nw)

    @property
    def size(self):
        return len(self.components)

    @property
    def variances(self):
        """Stationary variance carried by each component, summing to Delta**2."""
        return self.amplitude_delta**2 * self.norm_weights

    @property
    def long_time_rate(self):
        """Limit of the decoherence rate for t -> infinity."""
        return float(self.amplitude_delta**2 * np.sum(self.norm_weights / (2.0 * self.gammas)))

    def correlation(self, lag):
        lag = np.abs(np.asarray(lag, dtype=float))
        terms = np.exp(-2.0 * lag[..., None] * self.gammas)
        return self.amplitude_delta**2 * (terms @ self.norm_weights)

    def psd(self, f):
        f = np.asarray(f, dtype=float)
        g = self.gammas
        per = (self.amplitude_delta**2 / g) / (1.0 + (np.pi * f[..., None] / g) ** 2)
        return per @ self.norm_weights

    def decoherence_exponent(self, t):
        """Gamma(t) * t, defined for t >= 0 with value 0 at t = 0."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise DomainError("time must be non-negative")
        tt = t[..., None]
        x = 2.0 * self.gammas * tt
        per = _shape_factor(x, tt * tt)
        return self.amplitude_delta**2 * (per @ self.norm_weights)

    def decoherence_rate(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0):
            raise DomainError("decoherence rate needs t > 0; use decoherence_exponent at t = 0")
        tt = t[..., None]
        per = _shape_factor(2.0 * self.gammas * tt, tt)
        return self.amplitude_delta**2 * (per @ self.norm_weights)


@dataclass(frozen=True)
class ConstantRateSpectrum:
    """Stub with a time-independent decoherence rate (white-noise dephasing).

    Gives purely exponential decay, so no measurement schedule changes the
    fidelity. Used as the null model for Zeno gain.
    """

    rate: float

    def __post_init__(self):
        if not (self.rate >= 0 and np.isfinite(self.rate)):
            raise DomainError(f"rate must be non-negative, got {self.rate!r}")

    def decoherence_rate(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0):
            raise DomainError("decoherence rate needs t > 0")
        return np.full(t.shape, self.rate)

    def decoherence_exponent(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise DomainError("time must be non-negative")
        return self.rate * t


def make_arithmetic_spectrum(amplitude_delta, alpha, gamma1, step_delta, count_m):
    """Spectrum on the arithmetic grid ``gamma_k = gamma1 + (k-1)*step_delta``.

    Weights are ``gamma_k**-alpha``; ``count_m`` components are built.
    """
    for name, value in (("gamma1", gamma1), ("step_delta", step_delta)):
        if not (value > 0 and np.isfinite(value)):
            raise DomainError(f"{name} must be positive, got {value!r}")
    if int(count_m) != count_m or count_m < 1:
        raise DomainError(f"count_m must be a positive integer, got {count_m!r}")
    if not (0 < alpha < 2):
        raise DomainError(f"alpha must lie in (0, 2), got {alpha!r}")
    gammas = gamma1 + step_delta * np.arange(int(count_m))
    comps = tuple(LorentzianComponent(float(g), float(g ** -alpha)) for g in gammas)
    return NoiseSpectrum(float(amplitude_delta), float(alpha), comps)


def default_spectrum(t2=5e-3):
    """1000 components at gamma_k = k 1/s, alpha = 1.5, Delta = 1/T2."""
    return make_arithmetic_spectrum(1.0 / t2, 1.5, 1.0, 1.0, 1000)


def desk_spectrum(t2=5e-3):
    """Reduced 20-component grid (gamma_k = 50*k 1/s) for Monte Carlo checks."""
    return make_arithmetic_spectrum(1.0 / t2, 1.5, 50.0, 50.0, 20)


def lorentzian_psd(component, amplitude_delta, f):
    """Power spectral density of one Lorentzian, ``(D**2/g) / (1 + (pi f/g)**2)``."""
    f = np.asarray(f, dtype=float)
    g = component.gamma
    return (amplitude_delta**2 / g) / (1.0 + (np.pi * f / g) ** 2)


def mixture_correlation(spec, t1, t2):
    return spec.correlation(np.asarray(t1, dtype=float) - np.asarray(t2, dtype=float))


def mixture_psd(spec, f):
    return spec.psd(f)


def decoherence_rate(spec, t):
    return spec.decoherence_rate(t)


def decoherence_exponent(spec, t):
    return spec.decoherence_exponent(t)


def psd_slope_fit(spec, f_min, f_max, n_points=200):
    """Least-squares slope of log10 PSD against log10 f on a geometric grid.

    Both band edges are included in the grid.
    """
    if not (0 < f_min < f_max) or not np.isfinite(f_max):
        raise DomainError(f"need 0 < f_min < f_max, got ({f_min!r}, {f_max!r})")
    if int(n_points) != n_points or n_points < 2:
        raise DomainError(f"n_points must be an integer >= 2, got {n_points!r}")
    f = np.geomspace(f_min, f_max, int(n_points))
    slope, _ = np.polyfit(np.log10(f), np.log10(spec.psd(f)), 1)
    return float(slope)


def reference_power_law(spec, f, f_min, f_max):
    """Pure f**-alpha curve anchored to the mixture at the band's geometric midpoint."""
    f_mid = np.sqrt(f_min * f_max)
    anchor = float(spec.psd(f_mid))
    return anchor * (np.asarray(f, dtype=float) / f_mid) ** (-spec.alpha)
