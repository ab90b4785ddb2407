"""
Command-line front end.

    zeno-sim <psd|rate|zeno|mc-validate|fit> --config <path> [--csv <path>] [--svg <path>] [--seed <u64>]

Exit codes: 0 success, 1 configuration/IO/domain error, 2 validation failure.
CSV files are only written when a path is given (``--csv`` or
``[output] csv_path``); summaries go to standard output.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys

import numpy as np

from . import mc_oracle as mc
from . import protocols as pr
from . import quantum_kernel as qk
from .config import RunConfig, check_writable, load_config
from .errors import ConfigError, DomainError, FitError, GridMismatchError
from .noise_model import psd_slope_fit, reference_power_law
from .output import read_curve_csv, write_csv, write_svg

EXIT_OK, EXIT_ERROR, EXIT_VALIDATION = 0, 1, 2
Z_LIMIT = 4.0
COMPOSE_TOL = 1e-12


class ValidationFailure(Exception):
    pass


def _emit(cfg, header, rows, svg=None):
    if cfg.output.csv_path:
        write_csv(cfg.output.csv_path, header, rows)
    if cfg.output.svg_path and svg is not None:
        series, kwargs = svg
        write_svg(cfg.output.svg_path, series, **kwargs)


def cmd_psd(cfg, out=sys.stdout):
    spec = cfg.spectrum.build_mixture()
    lo, hi = cfg.spectrum.band
    f = np.geomspace(lo, hi, cfg.spectrum.n_freq)
    psd = spec.psd(f)
    ref = reference_power_law(spec, f, lo, hi)
    slope = psd_slope_fit(spec, lo, hi, cfg.spectrum.n_freq)
    rows = list(zip(f, psd, ref))
    _emit(cfg, ["f_hz", "psd_mixture", "psd_reference_powerlaw"], rows, svg=(
        [("Lorentzian mixture", f, psd), (f"1/f^{spec.alpha:g} reference", f, ref)],
        dict(title="Noise power spectral density", xlabel="f (Hz)", ylabel="S(f)",
             logx=True, logy=True),
    ))
    print(f"slope={slope:.17g}", file=out)
    return EXIT_OK


def cmd_rate(cfg, out=sys.stdout):
    spec = cfg.spectrum.build()
    t = cfg.protocol.time_grid()
    rate = spec.decoherence_rate(t)
    _emit(cfg, ["t_s", "gamma_per_s"], list(zip(t, rate)), svg=(
        [("Gamma(t)", t, rate)],
        dict(title="Time-dependent decoherence rate", xlabel="t (s)", ylabel="Gamma (1/s)",
             logx=cfg.protocol.spacing == "log"),
    ))
    print(f"gamma_min={float(rate[0]):.17g} gamma_max={float(rate[-1]):.17g}", file=out)
    return EXIT_OK


def cmd_zeno(cfg, out=sys.stdout):
    spec = cfg.spectrum.build()
    t = cfg.protocol.time_grid()
    ns = [n for n in cfg.protocol.n_measurements if n > 0]
    fid0 = pr.fid_fidelity(spec, t)
    fids = {n: pr.zeno_fidelity_curve(spec, t, n) for n in ns}

    # closed form against literal channel composition with the configured measurement
    p = cfg.protocol.electron_p
    worst = 0.0
    for n in ns:
        for T, closed in zip(t, fids[n]):
            rho = pr.compose_protocol(spec, pr.ZenoSchedule(float(T), n), electron_p=p)
            worst = max(worst, abs(qk.fidelity(rho, qk.plus_state()) - float(closed)))
    header = ["t_s", "fid_N0"] + [f"fid_N{n}" for n in ns] + [f"gain_N{n}" for n in ns]
    cols = [t, fid0] + [fids[n] for n in ns] + [fids[n] - fid0 for n in ns]
    rows = list(zip(*cols))
    _emit(cfg, header, rows, svg=(
        [("N=0 (FID)", t, fid0)] + [(f"N={n}", t, fids[n]) for n in ns],
        dict(title="Fidelity under N non-selective measurements", xlabel="T (s)",
             ylabel="fidelity", logx=cfg.protocol.spacing == "log"),
    ))
    for n in ns:
        t_star, g_star = pr.peak_gain(spec, n, cfg.protocol.t_max_s)
        print(f"peak_gain N={n} T={t_star:.6g} gain={g_star:.6g}", file=out)
    if worst > COMPOSE_TOL:
        raise ValidationFailure(f"channel composition deviates from closed form by {worst:.3e}")
    return EXIT_OK


def _snap_steps(times, dt):
    return sorted({max(1, int(round(t / dt))) for t in times})


def cmd_mc_validate(cfg, out=sys.stdout):
    if cfg.spectrum.constant_rate_per_s is not None:
        raise ConfigError("mc-validate needs a Lorentzian spectrum, not constant_rate_per_s",
                          key="constant_rate_per_s")
    spec = cfg.spectrum.build_mixture()
    dt = cfg.mc_time_step()
    steps = _snap_steps(cfg.protocol.time_grid(), dt)
    base = dict(time_step=dt, n_trajectories=cfg.mc.n_trajectories, seed=cfg.mc.seed,
                noise_mode=cfg.mc.noise_mode, rate_scale=cfg.mc.rate_scale)
    rows = []
    times = [k * dt for k in steps]
    stats = mc.mc_coherence_curve(spec, times, mc.TrajectoryConfig(n_steps=steps[-1], **base))
    for s in stats:
        analytic = float(pr.fid_fidelity(spec, s.time))
        mean, se = 0.5 * (1 + s.cos.mean), 0.5 * s.cos.std_error
        rows.append(("fid", s.time, analytic, mean, se, (mean - analytic) / se))
    for s in stats:
        rows.append(("fid_sin", s.time, 0.0, s.sin.mean, s.sin.std_error, s.sin.z_score(0.0)))

    ns = list(cfg.protocol.n_measurements)
    if ns:
        lcm = math.lcm(*(n + 1 for n in ns))
        T = cfg.protocol.total_time_s or cfg.protocol.t_max_s
        n_total = max(lcm, int(round(T / dt / lcm)) * lcm)
        T = n_total * dt
        conf = mc.TrajectoryConfig(n_steps=n_total, **base)
        for n in ns:
            sched = pr.ZenoSchedule(T, n)
            est = mc.mc_zeno_fidelity(spec, sched, conf)
            analytic = pr.zeno_fidelity(spec, sched)
            rows.append((f"zeno_N{n}", T, analytic, est.mean, est.std_error, est.z_score(analytic)))

    _emit(cfg, ["series", "t_s", "analytic", "mc_mean", "mc_stderr", "z_score"], rows, svg=(
        [("FID analytic", times, [r[2] for r in rows if r[0] == "fid"]),
         ("FID Monte Carlo", times, [r[3] for r in rows if r[0] == "fid"])],
        dict(title="Monte Carlo vs closed form", xlabel="t (s)", ylabel="fidelity", logx=True),
    ))
    print(f"{'series':<10} {'t_s':>12} {'analytic':>12} {'mc_mean':>12} {'mc_stderr':>11} {'z':>8}", file=out)
    for r in rows:
        print(f"{r[0]:<10} {r[1]:>12.6g} {r[2]:>12.6g} {r[3]:>12.6g} {r[4]:>11.3g} {r[5]:>8.3f}", file=out)
    worst = max(abs(r[5]) for r in rows)
    verdict = "PASS" if worst <= Z_LIMIT else "FAIL"
    print(f"max|z|={worst:.3f} limit={Z_LIMIT:g} {verdict}", file=out)
    if worst > Z_LIMIT:
        raise ValidationFailure(f"Monte Carlo disagrees with closed form (max |z| = {worst:.2f})")
    return EXIT_OK


def cmd_fit(cfg, out=sys.stdout):
    if cfg.protocol.curve_path:
        t, f = read_curve_csv(cfg.protocol.curve_path)
        curve = pr.DecayCurve(t, f, meta={"source": cfg.protocol.curve_path})
    else:
        curve = pr.fid_curve(cfg.spectrum.build(), cfg.protocol.time_grid())
    fit = pr.fit_short_time_decay(curve)
    if cfg.output.csv_path:
        write_csv(cfg.output.csv_path, ["n", "lambda_per_s", "residual", "t_min_s", "t_max_s"],
                  [(fit.exponent_n, fit.rate_lambda, fit.residual, *fit.fit_window)])
    print(f"n={fit.exponent_n:.6g} lambda={fit.rate_lambda:.6g} residual={fit.residual:.3g}", file=out)
    return EXIT_OK


COMMANDS = {
    "psd": cmd_psd,
    "rate": cmd_rate,
    "zeno": cmd_zeno,
    "mc-validate": cmd_mc_validate,
    "fit": cmd_fit,
}


def build_parser():
    p = argparse.ArgumentParser(prog="zeno-sim", description=__doc__.split("\n\n")[0].strip())
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="configuration file (defaults apply when omitted)")
    p.add_argument("--csv", help="CSV output path (overrides [output] csv_path)")
    p.add_argument("--svg", help="SVG output path (overrides [output] svg_path)")
    p.add_argument("--seed", type=int, help="Monte Carlo seed (overrides [mc] seed)")
    return p


def _apply_overrides(cfg, args):
    output = cfg.output
    if args.csv:
        check_writable(args.csv, "csv")
        output = dataclasses.replace(output, csv_path=args.csv)
    if args.svg:
        check_writable(args.svg, "svg")
        output = dataclasses.replace(output, svg_path=args.svg)
    mc_block = cfg.mc
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer", key="seed")
        mc_block = dataclasses.replace(mc_block, seed=args.seed)
    return dataclasses.replace(cfg, output=output, mc=mc_block)


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        cfg = _apply_overrides(cfg, args)
        return COMMANDS[args.command](cfg, out=out)
    except ValidationFailure as exc:
        print(f"zeno-sim: validation failed: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ConfigError, DomainError, GridMismatchError, FitError, OSError, ValueError) as exc:
        print(f"zeno-sim: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
