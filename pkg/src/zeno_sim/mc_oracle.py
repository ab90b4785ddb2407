"""
Monte Carlo dephasing oracle built from sampled noise trajectories.

The noise is a sum of independent Ornstein-Uhlenbeck components, one per
Lorentzian in the spectrum. Component ``k`` has stationary variance
``Delta**2 * w_k`` and correlation ``exp(-2 gamma_k |t|)``, so its
mean-reversion rate is ``2 gamma_k``. Paths are advanced with the exact OU
transition and the phase is integrated with the trapezoidal rule. No closed
form from :mod:`zeno_sim.noise_model` is used here beyond the component
parameters.

Every Gaussian draw comes from a counter-based stream keyed by
``(seed, trajectory, component, draw index)``; trajectories are processed in
fixed-size blocks and reduced in trajectory order, so results are
bit-identical for any worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .errors import DomainError, GridMismatchError
from .rng import standard_normals

FRESH = "fresh_after_measurement"
PERSISTENT = "persistent"
BLOCK = 500
THREADS_ENV = "ZENO_SIM_THREADS"


@dataclass(frozen=True)
class TrajectoryConfig:
    """Sampling parameters for the Monte Carlo engine.

    ``rate_scale`` multiplies every OU mean-reversion rate. It exists only to
    inject a known fault in validation runs; leave it at 1.
    """

    time_step: float
    n_steps: int
    n_trajectories: int = 10_000
    seed: int = 0
    noise_mode: str = FRESH
    rate_scale: float = 1.0
    workers: int | None = None

    def __post_init__(self):
        if not (self.time_step > 0 and np.isfinite(self.time_step)):
            raise DomainError(f"time_step must be positive, got {self.time_step!r}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise DomainError(f"n_steps must be a positive integer, got {self.n_steps!r}")
        if self.n_trajectories < 100:
            raise DomainError(f"need at least 100 trajectories, got {self.n_trajectories}")
        if self.noise_mode not in (FRESH, PERSISTENT):
            raise DomainError(f"unknown noise_mode {self.noise_mode!r}")
        if not self.rate_scale > 0:
            raise DomainError("rate_scale must be positive")

    @property
    def duration(self):
        return self.n_steps * self.time_step

    def check_resolution(self, spec):
        fastest = 2.0 * float(np.max(spec.gammas))
        if self.time_step > 1.0 / (10.0 * fastest) * (1 + 1e-12):
            raise DomainError(
                f"time_step {self.time_step:g} s does not resolve the fastest component "
                f"(need <= {1.0 / (10.0 * fastest):g} s)"
            )


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n_samples: int

    @classmethod
    def from_samples(cls, x):
        x = np.asarray(x, dtype=float)
        n = x.size
        return cls(float(np.mean(x)), float(np.std(x, ddof=1) / np.sqrt(n)), n)

    def z_score(self, expected):
        return (self.mean - expected) / self.std_error if self.std_error > 0 else (
            0.0 if self.mean == expected else np.inf)


@dataclass(frozen=True)
class PhaseStatistics:
    """Per-time Monte Carlo summary of the accumulated phase."""

    time: float
    cos: McEstimate
    sin: McEstimate
    variance: float


def resolve_workers(workers=None):
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get(THREADS_ENV, "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise DomainError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    return 1


def sample_ou_step(prev, gamma, sigma, dt, gaussian_draw):
    """Exact OU transition over ``dt`` for correlation ``sigma**2 exp(-2 gamma |t|)``."""
    decay = np.exp(-2.0 * gamma * dt)
    return prev * decay + sigma * np.sqrt(-np.expm1(-4.0 * gamma * dt)) * gaussian_draw


def _steps_for(t, dt, what="time"):
    n = t / dt
    k = int(round(n))
    if k < 0 or abs(n - k) > 1e-9 * max(1.0, n):
        raise GridMismatchError(f"{what} {t!r} s is not a multiple of the step {dt!r} s")
    return k


class _Engine:
    """Simulates blocks of trajectories with optional phase resets."""

    def __init__(self, spec, config):
        config.check_resolution(spec)
        self.config = config
        self.sigmas = np.sqrt(spec.variances)
        rates = 2.0 * spec.gammas * config.rate_scale
        self.decay = np.exp(-rates * config.time_step)
        self.kick = self.sigmas * np.sqrt(-np.expm1(-2.0 * rates * config.time_step))
        self.n_comp = spec.size

    def component_paths(self, traj, segments):
        """Yield per-segment component paths, shape (steps+1, len(traj), M).

        ``segments`` lists segment lengths in steps. Segment 0 starts from a
        stationary draw; later segments continue the previous path
        (persistent) or restart from fresh stationary draws.
        """
        fresh = self.config.noise_mode == FRESH
        n_draws = 1 + sum(segments) + (len(segments) - 1 if fresh else 0)
        z = standard_normals(self.config.seed, traj, np.arange(self.n_comp), n_draws)
        d = 0
        x0 = None
        for j, n in enumerate(segments):
            if x0 is None or fresh:
                x0 = self.sigmas * z[d]
                d += 1
            path = np.empty((n + 1,) + x0.shape)
            path[0] = x0
            for k in range(self.n_comp):
                a = self.decay[k]
                path[1:, :, k] = lfilter(
                    [1.0], [1.0, -a], self.kick[k] * z[d:d + n, :, k], axis=0,
                    zi=(a * x0[:, k])[None, :],
                )[0]
            d += n
            x0 = path[-1]
            yield path

    def segment_phases(self, traj, segments, record=None):
        """Trapezoidal phases per segment, plus cumulative phases at ``record`` steps
        within the first segment when requested."""
        dt = self.config.time_step
        phases = np.empty((len(traj), len(segments)))
        recorded = None
        for j, path in enumerate(self.component_paths(traj, segments)):
            eta = path.sum(axis=2)
            cum = np.cumsum(0.5 * dt * (eta[:-1] + eta[1:]), axis=0)
            phases[:, j] = cum[-1]
            if j == 0 and record is not None:
                recorded = cum[np.asarray(record) - 1].T
        return phases, recorded


def _run_blocks(n_trajectories, workers, fn):
    blocks = [np.arange(s, min(s + BLOCK, n_trajectories)) for s in range(0, n_trajectories, BLOCK)]
    workers = resolve_workers(workers)
    if workers == 1:
        parts = [fn(b) for b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(fn, blocks))
    return parts


def sample_noise_path(spec, config, trajectory_index):
    """One noise realization eta(t) on ``n_steps + 1`` grid points (no resets)."""
    engine = _Engine(spec, config)
    path = next(engine.component_paths(np.array([trajectory_index]), [config.n_steps]))
    return path[:, 0, :].sum(axis=1)


def sample_noise_paths(spec, config, trajectory_indices):
    """Noise realizations for several trajectories, shape (n_steps+1, n_traj)."""
    engine = _Engine(spec, config)
    path = next(engine.component_paths(np.asarray(trajectory_indices), [config.n_steps]))
    return path.sum(axis=2)


def integrate_phase(eta, dt, stride=1):
    """Trapezoidal integral of a sampled path, using every ``stride``-th sample."""
    eta = np.asarray(eta)[::stride]
    h = dt * stride
    return h * (0.5 * eta[0] + eta[1:-1].sum(axis=0) + 0.5 * eta[-1])


def mc_phases(spec, times, config):
    """Accumulated phase per trajectory at each time, shape (n_traj, len(times))."""
    steps = [_steps_for(t, config.time_step) for t in np.atleast_1d(times)]
    if min(steps) < 1 or max(steps) > config.n_steps:
        raise GridMismatchError("requested times must lie in (0, n_steps * dt]")
    engine = _Engine(spec, config)

    def block(traj):
        return engine.segment_phases(traj, [max(steps)], record=steps)[1]

    return np.concatenate(_run_blocks(config.n_trajectories, config.workers, block), axis=0)


def mc_coherence_curve(spec, times, config):
    phases = mc_phases(spec, times, config)
    out = []
    for t, phi in zip(np.atleast_1d(times), phases.T):
        out.append(PhaseStatistics(
            time=float(t),
            cos=McEstimate.from_samples(np.cos(phi)),
            sin=McEstimate.from_samples(np.sin(phi)),
            variance=float(np.var(phi, ddof=1)),
        ))
    return out


def mc_coherence(spec, t, config):
    """Estimate ``E[cos phi(t)]`` with ``phi(t)`` the integrated noise.

    ``t`` must equal ``config.n_steps * config.time_step``. The closed-form
    counterpart is ``exp(-Gamma(t) t)``.
    """
    if t == 0:
        return McEstimate(1.0, 0.0, config.n_trajectories)
    if _steps_for(t, config.time_step) != config.n_steps:
        raise GridMismatchError(f"t={t!r} s does not equal n_steps * dt = {config.duration!r} s")
    return mc_coherence_curve(spec, [t], config)[0].cos


def mc_zeno_fidelity(spec, schedule, config):
    """Trajectory-level fidelity for N sigma_x non-selective measurements.

    Between measurements the z-phase rotates the Bloch vector; the sigma_x
    measurement then keeps only its x component, so per trajectory
    ``x = prod_j cos(phi_j)`` and the fidelity is ``(1 + E[x]) / 2``.
    """
    if schedule.axis != "x":
        raise DomainError("Monte Carlo Zeno protocol is implemented for sigma_x measurements")
    total = _steps_for(schedule.total_time, config.time_step, "total time")
    if total % schedule.n_segments:
        raise GridMismatchError(
            f"{total} steps cannot be split into {schedule.n_segments} equal segments"
        )
    if total > config.n_steps:
        raise GridMismatchError("schedule is longer than n_steps * dt")
    segments = [total // schedule.n_segments] * schedule.n_segments
    engine = _Engine(spec, config)

    def block(traj):
        return np.prod(np.cos(engine.segment_phases(traj, segments)[0]), axis=1)

    x = np.concatenate(_run_blocks(config.n_trajectories, config.workers, block))
    est = McEstimate.from_samples(x)
    return McEstimate(0.5 * (1.0 + est.mean), 0.5 * est.std_error, est.n_samples)
