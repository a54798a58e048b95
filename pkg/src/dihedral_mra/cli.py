"""Command-line front door.

Exit codes: 0 success, 1 validation error (bad flags, malformed files,
dimension mismatches), 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .experiments import (
    SweepSpec,
    run_length_sweep,
    run_noise_sweep,
    save_length_sweep,
    save_noise_sweep,
)
from .invariants import InvariantMoments, compute_moments
from .marching import dihedral_sign_search, frequency_marching_cyclic, sign_assignment_count
from .recovery import RecoveryConfig, recover_multi
from .report import read_aggregates_csv, render_aggregates_png, render_aggregates_svg
from .signals import GROUPS, load_signal_csv, random_unit_signal, save_signal_csv
from .simulate import estimate_moments, sample_observations, save_observations
from .theory import run_theory_suite

__all__ = ["main"]


class _UsageError(Exception):
    """Raised for anything the user got wrong; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    p = _Parser(prog="dihedral-mra",
                description="Orbit recovery for cyclic/dihedral multi-reference alignment")
    p.add_argument("--version", action="version", version=f"dihedral-mra {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="generate noisy group-translated observations")
    sim.add_argument("--n", type=int, help="signal length (required with --signal random)")
    sim.add_argument("--sigma", type=float, required=True, help="noise std dev per sample")
    sim.add_argument("--samples", type=int, required=True, help="number of observations")
    sim.add_argument("--group", choices=GROUPS, required=True)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--signal", required=True,
                     help="path to a signal CSV, or 'random' for a seeded unit-norm draw")
    sim.add_argument("--out", required=True, help="output directory")

    inv = sub.add_parser("invariants", help="exact invariant moments of a signal")
    inv.add_argument("--signal", required=True, help="signal CSV (header index,value)")
    inv.add_argument("--group", choices=GROUPS, required=True)
    inv.add_argument("--out", required=True, help="moments JSON path")

    rec = sub.add_parser("recover", help="quasi-Newton recovery from moments")
    rec.add_argument("--moments", required=True, help="moments JSON path")
    rec.add_argument("--group", choices=GROUPS,
                     help="must match the moments file when given")
    rec.add_argument("--inits", type=int, default=1, help="number of random initializations")
    rec.add_argument("--seed", type=int, default=0)
    rec.add_argument("--third-only", action="store_true",
                     help="optimize the third-moment residual alone")
    rec.add_argument("--report", choices=("best", "mean"), default="best",
                     help="best-loss trial or aligned average of all trials")
    rec.add_argument("--max-iters", type=int, default=5000)
    rec.add_argument("--out", help="result JSON path (stdout when omitted)")

    mar = sub.add_parser("march", help="cyclic frequency marching from moments")
    mar.add_argument("--moments", required=True)
    mar.add_argument("--out", help="result JSON path (stdout when omitted)")

    sgn = sub.add_parser("sign-search", help="small-n dihedral conjugate-sign search")
    sgn.add_argument("--moments", required=True)
    sgn.add_argument("--n-max", type=int, default=14)

    exp = sub.add_parser("experiment", help="seeded sweep experiments")
    expsub = exp.add_subparsers(dest="experiment", required=True)

    ls = expsub.add_parser("length-sweep", help="recovery error vs signal length")
    ls.add_argument("--n-min", type=int, default=5)
    ls.add_argument("--n-max", type=int, default=120)
    ls.add_argument("--step", type=int, default=5)
    ls.add_argument("--trials", type=int, default=100)
    ls.add_argument("--groups", default="cyclic,dihedral",
                    help="comma-separated subset of cyclic,dihedral")
    ls.add_argument("--seed", type=int, default=17)
    ls.add_argument("--workers", type=int, default=1)
    ls.add_argument("--loss-tol", type=float, default=1e-6,
                    help="stop once the objective is matched to this residual")
    ls.add_argument("--weights", default="0,0.01,1",
                    help="comma-separated objective weights w1,w2,w3")
    ls.add_argument("--out", required=True, help="output directory")

    ns = expsub.add_parser("noise-sweep", help="estimator scaling and recovery from noisy data")
    ns.add_argument("--n", type=int, default=21)
    ns.add_argument("--sigmas", default="2,4,8,16", help="comma-separated noise levels")
    ns.add_argument("--samples", type=int, default=10000)
    ns.add_argument("--trials", type=int, default=4)
    ns.add_argument("--groups", default="dihedral")
    ns.add_argument("--seed", type=int, default=17)
    ns.add_argument("--out", required=True, help="output directory")

    ver = sub.add_parser("verify-theory", help="exact combinatorial checks and counterexamples")
    ver.add_argument("--k-max", type=int, default=30)
    ver.add_argument("--out", help="report JSON path (stdout when omitted)")

    plo = sub.add_parser("plot", help="render an aggregates CSV as a chart")
    plo.add_argument("--in", dest="infile", required=True, help="aggregates.csv path")
    plo.add_argument("--out", required=True, help="output .svg (deterministic) or .png (matplotlib)")
    return p


def _parse_groups(arg: str) -> tuple[str, ...]:
    groups = tuple(g.strip() for g in arg.split(",") if g.strip())
    bad = [g for g in groups if g not in GROUPS]
    if bad or not groups:
        raise _UsageError(f"--groups must name a subset of {','.join(GROUPS)}, got {arg!r}")
    return groups


def _load_moments(path: str) -> InvariantMoments:
    if not Path(path).exists():
        raise _UsageError(f"--moments: no such file: {path}")
    try:
        return InvariantMoments.load(path)
    except (ValueError, KeyError, TypeError) as exc:
        raise _UsageError(f"--moments: {path}: malformed moments file ({exc})")


def _write_json(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _cmd_simulate(args) -> int:
    if args.signal == "random":
        if args.n is None:
            raise _UsageError("--signal random requires --n")
        x = random_unit_signal(args.n, args.seed)
    else:
        if not Path(args.signal).exists():
            raise _UsageError(f"--signal: no such file: {args.signal}")
        x = load_signal_csv(args.signal)
        if args.n is not None and args.n != x.n:
            raise _UsageError(f"--n {args.n} does not match signal length {x.n}")
    obs = sample_observations(x, args.sigma, args.samples, args.group, args.seed)
    out = Path(args.out)
    save_observations(obs, out)
    save_signal_csv(x, out / "truth.csv")
    moments = estimate_moments(obs)
    moments.save(out / "estimated_moments.json")
    print(f"wrote {args.samples} {args.group} observations (n={x.n}, sigma={args.sigma}) to {out}")
    return 0


def _cmd_invariants(args) -> int:
    if not Path(args.signal).exists():
        raise _UsageError(f"--signal: no such file: {args.signal}")
    x = load_signal_csv(args.signal)
    moments = compute_moments(x, args.group)
    moments.save(args.out)
    print(f"wrote {args.group} moments of length-{x.n} signal to {args.out} "
          f"({len(moments.third)} third-order entries)")
    return 0


def _cmd_recover(args) -> int:
    moments = _load_moments(args.moments)
    if args.group is not None and args.group != moments.group:
        raise _UsageError(f"--group {args.group} does not match moments group {moments.group}")
    cfg = RecoveryConfig(group=moments.group, third_only=args.third_only,
                         max_iters=args.max_iters)
    result = recover_multi(moments, cfg, args.inits, args.seed, report=args.report)
    payload = result.to_json_dict()
    payload["final_loss"] = result.final_loss
    _write_json(payload, args.out)
    if args.out:
        print(f"recovered length-{moments.n} signal ({args.report} of {args.inits} inits, "
              f"final loss {result.final_loss:.3e}) -> {args.out}")
    return 0


def _cmd_march(args) -> int:
    moments = _load_moments(args.moments)
    signal = frequency_marching_cyclic(moments)
    recomputed = compute_moments(signal, "cyclic")
    residual = float(np.max(np.abs(recomputed.third_vector() - moments.third_vector())))
    _write_json({"n": moments.n, "signal": signal.values.tolist(),
                 "moment_residual": residual}, args.out)
    if args.out:
        print(f"marched length-{moments.n} spectrum (moment residual {residual:.3e}) -> {args.out}")
    return 0


def _cmd_sign_search(args) -> int:
    moments = _load_moments(args.moments)
    candidates = dihedral_sign_search(moments, n_max=args.n_max)
    _write_json({
        "n": moments.n,
        "sign_assignments": sign_assignment_count(moments.n),
        "orbit_count": len(candidates),
        "orbits": [c.values.tolist() for c in candidates],
    }, None)
    return 0


def _cmd_length_sweep(args) -> int:
    try:
        weights = tuple(float(w) for w in args.weights.split(","))
        if len(weights) != 3:
            raise ValueError
    except ValueError:
        raise _UsageError(f"--weights must be three comma-separated numbers, got {args.weights!r}")
    spec = SweepSpec(kind="length_sweep", n_min=args.n_min, n_max=args.n_max,
                     step=args.step, trials=args.trials, groups=_parse_groups(args.groups),
                     master_seed=args.seed, workers=args.workers,
                     weights=weights, loss_tol=args.loss_tol)
    result = run_length_sweep(spec)
    save_length_sweep(result, args.out)
    for a in result.aggregates:
        print(f"{a.group:8s} n={a.n:3d}: mean error {a.mean_error:.6f} "
              f"(std {a.std_error:.6f}, failed {a.failed_trials})")
    print(f"wrote manifest.json, rows.csv, aggregates.csv, figure.svg, figure.png to {args.out}")
    return 0


def _cmd_noise_sweep(args) -> int:
    try:
        sigmas = tuple(float(s) for s in args.sigmas.split(",") if s.strip())
    except ValueError:
        raise _UsageError(f"--sigmas must be comma-separated numbers, got {args.sigmas!r}")
    spec = SweepSpec(kind="noise_sweep", n_min=args.n, n_max=args.n, trials=args.trials,
                     groups=_parse_groups(args.groups), sigmas=sigmas,
                     samples=args.samples, master_seed=args.seed)
    result = run_noise_sweep(spec)
    save_noise_sweep(result, args.out)
    for sigma, std in sorted(result.scaling.items()):
        print(f"sigma={sigma:g}: third-moment estimator std {std:.6g}")
    if len(result.scaling) >= 2:
        s = np.log(np.array(sorted(result.scaling)))
        v = np.log(np.array([result.scaling[k] for k in sorted(result.scaling)]))
        slope = float(np.polyfit(s, v, 1)[0])
        print(f"log-log std slope vs sigma: {slope:.3f}")
    print(f"wrote noise sweep results to {args.out}")
    return 0


def _cmd_verify_theory(args) -> int:
    report = run_theory_suite(args.k_max)
    _write_json(report, args.out)
    n_checks = len(report["checks"])
    n_pass = sum(c["pass"] for c in report["checks"])
    print(f"{n_pass}/{n_checks} checks passed (k_max={args.k_max})")
    return 0 if report["all_pass"] else 2


def _cmd_plot(args) -> int:
    if not Path(args.infile).exists():
        raise _UsageError(f"--in: no such file: {args.infile}")
    aggregates = read_aggregates_csv(args.infile)
    if not aggregates:
        raise _UsageError(f"--in: {args.infile} contains no aggregate rows")
    if args.out.endswith(".png"):
        render_aggregates_png(aggregates, args.out)
    else:
        render_aggregates_svg(aggregates, args.out)
    print(f"rendered {args.infile} -> {args.out}")
    return 0


_HANDLERS = {
    "simulate": _cmd_simulate,
    "invariants": _cmd_invariants,
    "recover": _cmd_recover,
    "march": _cmd_march,
    "sign-search": _cmd_sign_search,
    "verify-theory": _cmd_verify_theory,
    "plot": _cmd_plot,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "experiment":
            handler = _cmd_length_sweep if args.experiment == "length-sweep" else _cmd_noise_sweep
        else:
            handler = _HANDLERS[args.command]
        return handler(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # argparse --help / --version
        return int(exc.code or 0)
    except Exception as exc:  # noqa: BLE001 - surface anything unexpected as exit 2
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
