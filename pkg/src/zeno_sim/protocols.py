"""
Closed-form experiment drivers: free induction decay, the N-measurement Zeno
protocol and the short-time power-law machinery.

The Zeno closed form uses ``N`` measurements separating ``N + 1`` free
segments of length ``T / (N + 1)``; the decoherence rate is evaluated at the
segment length and multiplied by the total time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import quantum_kernel as qk
from .errors import DegenerateWindowError, DomainError, InsufficientPointsError

FIT_WINDOW = (1e-6, 0.05)


@dataclass(frozen=True)
class ZenoSchedule:
    total_time: float
    n_measurements: int
    axis: str = "x"

    def __post_init__(self):
        if not (self.total_time > 0 and np.isfinite(self.total_time)):
            raise DomainError(f"total_time must be positive, got {self.total_time!r}")
        if int(self.n_measurements) != self.n_measurements or self.n_measurements < 0:
            raise DomainError(f"n_measurements must be a non-negative integer, got {self.n_measurements!r}")
        if self.axis not in ("x", "z"):
            raise DomainError(f"axis must be 'x' or 'z', got {self.axis!r}")

    @property
    def interval(self):
        return self.total_time / (self.n_measurements + 1)

    @property
    def n_segments(self):
        return self.n_measurements + 1


@dataclass
class DecayCurve:
    times: np.ndarray
    fidelities: np.ndarray
    meta: dict = field(default_factory=dict)
    std_errors: np.ndarray | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.fidelities = np.asarray(self.fidelities, dtype=float)
        if self.times.shape != self.fidelities.shape or self.times.ndim != 1:
            raise DomainError("times and fidelities must be 1-D arrays of equal length")
        if np.any(np.diff(self.times) <= 0):
            raise DomainError("times must be strictly increasing")


@dataclass(frozen=True)
class DecayLawFit:
    """Result of fitting ``1 - F = (lambda * t)**n``."""

    exponent_n: float
    rate_lambda: float
    fit_window: tuple
    residual: float

    @property
    def zeno_capable(self):
        # upper edge widened by regression round-off so an exact t**2 law qualifies
        return 1.0 < self.exponent_n <= 2.0 + 1e-9


def fid_fidelity(spec, t):
    """Free-induction-decay fidelity ``(1 + exp(-Gamma(t) t)) / 2`` from |+>."""
    return 0.5 * (1.0 + np.exp(-spec.decoherence_exponent(t)))


def zeno_fidelity(spec, schedule):
    if schedule.axis != "x":
        raise DomainError("closed-form Zeno fidelity is defined for sigma_x measurements on |+>")
    return float(zeno_fidelity_curve(spec, schedule.total_time, schedule.n_measurements))


def zeno_fidelity_curve(spec, total_time, n_measurements):
    """Vectorized closed form over an array of total times."""
    T = np.asarray(total_time, dtype=float)
    tau = T / (n_measurements + 1)
    # Gamma(tau) * T == (N + 1) * Gamma(tau) * tau; the exponent form is exact at T = 0.
    return 0.5 * (1.0 + np.exp(-(n_measurements + 1) * spec.decoherence_exponent(tau)))


def zeno_gain(spec, total_time, n_measurements):
    if n_measurements < 1:
        raise DomainError("zeno_gain needs at least one measurement")
    return zeno_fidelity_curve(spec, total_time, n_measurements) - fid_fidelity(spec, total_time)


def peak_gain(spec, n_measurements, t_max, n_grid=400, span=1e-6, rtol=1e-4):
    """Maximize the Zeno gain over total times in (0, t_max].

    A geometric grid of ``n_grid`` points on ``[span * t_max, t_max]`` locates
    the peak, then golden-section search on log T refines it until the
    bracket is below ``rtol`` in relative T.

    Returns
    -------
    (t_star, gain_star)
    """
    if n_measurements < 1:
        raise DomainError("peak_gain needs at least one measurement")
    if not t_max > 0:
        raise DomainError(f"t_max must be positive, got {t_max!r}")
    logs = np.linspace(np.log(span * t_max), np.log(t_max), max(int(n_grid), 200))
    grid = np.exp(logs)
    gains = zeno_gain(spec, grid, n_measurements)
    i = int(np.argmax(gains))
    if i == 0 or i == len(grid) - 1 or gains[i] <= 0:
        return float(grid[i]), float(gains[i])
    if not gains[i - 1] < gains[i] > gains[i + 1]:
        # flat top (round-off level gains): nothing to refine
        return float(grid[i]), float(gains[i])

    def neg(logt):
        return -float(zeno_gain(spec, np.exp(logt), n_measurements))

    try:
        res = optimize.minimize_scalar(neg, bracket=tuple(logs[i - 1:i + 2]), method="golden", tol=rtol / 4)
    except ValueError:
        # scalar and vectorized evaluation disagree at round-off level on a flat top
        return float(grid[i]), float(gains[i])
    if -res.fun >= gains[i]:
        return float(np.exp(res.x)), float(-res.fun)
    return float(grid[i]), float(gains[i])


def _measurement_channel(axis, electron_p):
    if electron_p is None:
        return qk.nsm_x() if axis == "x" else qk.nsm_z()
    nsm = qk.electron_mediated_nsm_channel(electron_p)
    if axis == "z":
        return nsm
    return qk.compose(qk.rotation_y(-np.pi / 2), nsm, qk.rotation_y(np.pi / 2))


def compose_protocol(spec, schedule, electron_p=None):
    """Density matrix after alternating free dephasing and measurements.

    Starts from ``|+><+|`` and applies ``N + 1`` dephasing segments of length
    ``T / (N + 1)`` with a non-selective measurement between consecutive
    segments. With ``electron_p`` set, each measurement is realized through
    the electron-mediated sequence with residual electron coherence ``p``.
    """
    tau = schedule.interval
    free = qk.dephasing_channel(float(spec.decoherence_exponent(tau)))
    meas = _measurement_channel(schedule.axis, electron_p)
    rho = qk.projector(qk.plus_state())
    rho = free(rho)
    for _ in range(schedule.n_measurements):
        rho = free(meas(rho))
    return rho


def fit_short_time_decay(curve, window=FIT_WINDOW, min_points=5):
    """Fit ``1 - F = (lambda t)**n`` on the early part of a decay curve.

    Only points whose infidelity lies inside ``window`` are used. The fit is a
    straight line of ``log(1 - F)`` against ``log t``.
    """
    infid = 1.0 - curve.fidelities
    if np.all(infid < 1e-12):
        raise DegenerateWindowError("curve shows no decay: all infidelities below 1e-12")
    lo, hi = window
    mask = (infid >= lo) & (infid <= hi) & (curve.times > 0)
    if mask.sum() < min_points:
        raise InsufficientPointsError(
            f"only {int(mask.sum())} points with 1-F in [{lo:g}, {hi:g}], need {min_points}"
        )
    x = np.log(curve.times[mask])
    y = np.log(infid[mask])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return DecayLawFit(
        exponent_n=float(slope),
        rate_lambda=float(np.exp(intercept / slope)),
        fit_window=(float(curve.times[mask][0]), float(curve.times[mask][-1])),
        residual=float(np.sqrt(np.mean(resid**2))),
    )


def power_law_survival(rate_lambda, exponent_n, t, n_measurements):
    """Survival probability ``(1 - (lambda t/N)**n)**N`` after N projective checks.

    For small arguments this behaves as ``1 - (lambda t)**n / N**(n-1)``: no N
    dependence for n = 1, and approach to unity with N for n > 1.
    """
    if n_measurements < 1:
        raise DomainError("need at least one measurement")
    q = (rate_lambda * t / n_measurements) ** exponent_n
    if np.any(q >= 1):
        raise DomainError("(lambda*tau)**n must be below 1")
    return (1.0 - q) ** n_measurements


def fid_curve(spec, times):
    times = np.asarray(times, dtype=float)
    return DecayCurve(times, fid_fidelity(spec, times), meta={"protocol": "fid"})
