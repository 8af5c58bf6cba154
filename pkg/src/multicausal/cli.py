"""Command-line entry point.

Exit codes: 0 success or verdict yes, 3 verdict no, 2 invalid input,
4 resource guard tripped, 1 failed selftest.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .curves import build_trajectory_measure, evaluate_pushforward, verify_causal_evolution
from .errors import MulticausalError, NonCausalEvolutionError, ResourceLimitError
from .io import (dumps, load_coefficients, load_curves, load_evolution, load_measure,
                 load_modes, read_density_dir, read_json, write_density, write_json,
                 write_series)
from .order import check_equivalences, oracle_subset_condition, precedes_measures
from .seeding import rng_for
from .wave.certify import certify_causal_evolution
from .wave.simulate import WaveRunConfig, default_coefficients, default_state, simulate
from .wave.state import FactorizedWaveState

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NO, EXIT_RESOURCE = 0, 1, 2, 3, 4

CHECKS = {
    "precede": "causal coupling exists iff every atom subset keeps its mass inside its causal future",
    "oracle": "mass of every atom subset is at most the later mass of its causal future",
    "equivalences": "coupling, subset, future-set, causal-function and flat-slice tests agree",
    "curves_build": "a causal evolution lifts to a measure on causal trajectories",
    "curves_eval": "time evaluation of a trajectory measure recovers a slice measure",
    "curves_verify": "an evolution is causal iff every earlier slice precedes every later one",
    "speed_bound": "particle velocities of the free wave dynamics never exceed c",
    "continuity": "density and velocities satisfy the multi-particle continuity equation",
    "certify": "the discretised density evolution is causally ordered",
}


class InputError(MulticausalError):
    pass


def _emit(report: dict, args) -> None:
    text = dumps(report)
    path = getattr(args, "report", None)
    if path:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text, encoding="utf-8")
    sys.stdout.write(text)


def _need(args, *names):
    missing = [n for n in names if getattr(args, n, None) in (None, "")]
    if missing:
        raise InputError("missing required option(s): " + ", ".join("--" + m.replace("_", "-")
                                                                     for m in missing))


def _existing(path) -> Path:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"input file not found: {p}")
    return p


def _base(args, command: str) -> dict:
    return {"command": command, "seed": args.seed, "version": __version__}


def cmd_precede(args) -> int:
    _need(args, "mu", "nu")
    mu = load_measure(_existing(args.mu), exact=args.exact)
    nu = load_measure(_existing(args.nu), exact=args.exact)
    cert = precedes_measures(mu, nu, slack=args.slack)
    report = _base(args, "precede")
    report.update({"exact": args.exact, "slack": args.slack, "check": CHECKS["precede"],
                   "result": cert.to_dict()})
    if cert.verdict and args.emit_witness:
        write_json(cert.witness.to_dict(), args.emit_witness)
        report["witness_file"] = str(args.emit_witness)
    if not cert.verdict:
        violator = {
            "t": mu.t,
            "atoms": [int(i) for i in cert.violator],
            "positions": mu.positions[cert.violator].tolist(),
            "mu_mass": cert.to_dict()["violator_mu_mass"],
            "nu_future_mass": cert.to_dict()["violator_nu_mass"],
        }
        report["violator"] = violator
        if args.violator_out:
            write_json(violator, args.violator_out)
            report["violator_file"] = str(args.violator_out)
    if args.check_equivalences:
        eq = check_equivalences(mu, nu, rng_for(args.seed, 0), slack=args.slack)
        report["equivalences"] = {"check": CHECKS["equivalences"], **eq}
    report["wall_time_s"] = round(time.perf_counter() - args.t0, 6)
    _emit(report, args)
    return EXIT_OK if cert.verdict else EXIT_NO


def cmd_oracle(args) -> int:
    _need(args, "mu", "nu")
    mu = load_measure(_existing(args.mu), exact=args.exact)
    nu = load_measure(_existing(args.nu), exact=args.exact)
    cert = oracle_subset_condition(mu, nu, slack=args.slack)
    report = _base(args, "oracle")
    report.update({"exact": args.exact, "check": CHECKS["oracle"], "result": cert.to_dict(),
                   "wall_time_s": round(time.perf_counter() - args.t0, 6)})
    _emit(report, args)
    return EXIT_OK if cert.verdict else EXIT_NO


def cmd_curves(args) -> int:
    report = _base(args, f"curves {args.action}")
    if args.action == "build":
        _need(args, "evo", "out")
        evo = load_evolution(_existing(args.evo), exact=args.exact)
        try:
            sigma = build_trajectory_measure(evo)
        except NonCausalEvolutionError as exc:
            report.update({"check": CHECKS["curves_build"], "verdict": "no",
                           "failing_pair": list(exc.pair), "result": exc.certificate.to_dict()})
            report["wall_time_s"] = round(time.perf_counter() - args.t0, 6)
            _emit(report, args)
            return EXIT_NO
        write_json(sigma.to_dict(), args.out)
        report.update({"check": CHECKS["curves_build"], "verdict": "yes",
                       "trajectories": len(sigma), "grid": sigma.grid.tolist(),
                       "out": str(args.out)})
    elif args.action == "eval":
        _need(args, "sigma", "t")
        sigma = load_curves(_existing(args.sigma), exact=args.exact)
        try:
            mu = evaluate_pushforward(sigma, args.t)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        if args.out:
            write_json(mu.to_dict(), args.out)
        report.update({"check": CHECKS["curves_eval"], "t": args.t, "measure": mu.to_dict()})
    else:
        _need(args, "evo")
        evo = load_evolution(_existing(args.evo), exact=args.exact)
        rep = verify_causal_evolution(evo)
        report.update({"check": CHECKS["curves_verify"], "verdict": "yes" if rep.causal else "no",
                       "matrix": rep.matrix.astype(int).tolist(),
                       "failing_pairs": [list(p) for p in rep.failing_pairs()]})
        report["wall_time_s"] = round(time.perf_counter() - args.t0, 6)
        _emit(report, args)
        return EXIT_OK if rep.causal else EXIT_NO
    report["wall_time_s"] = round(time.perf_counter() - args.t0, 6)
    _emit(report, args)
    return EXIT_OK


def _certification_block(rep) -> dict:
    return {"check": CHECKS["certify"], **rep.to_dict()}


def cmd_evolve(args) -> int:
    cfg = WaveRunConfig(species=args.species, N=args.n_particles, M=args.grid, L=args.box,
                        dt=args.dt, steps=args.steps, width=args.width, mass=args.mass,
                        coarsen=args.coarsen, record_every=args.record_every)
    if args.modes or args.coeffs:
        _need(args, "modes", "coeffs")
        modes = load_modes(_existing(args.modes), cfg.species, cfg.grid)
        C = load_coefficients(_existing(args.coeffs))
        if C.ndim != cfg.N:
            raise InputError(f"coefficient tensor has rank {C.ndim}, expected {cfg.N}")
        state = FactorizedWaveState(cfg.species, modes, C, mass=cfg.mass)
    else:
        state = default_state(cfg)
    run = simulate(cfg, state)
    report = _base(args, "evolve")
    report["config"] = cfg.to_dict()
    report["coarsen"] = run.coarsen
    report["speed_bound"] = {"check": CHECKS["speed_bound"], "max_speed": run.max_speed(),
                             "bound": cfg.c, "passed": run.max_speed() <= cfg.c * (1 + 1e-9)}
    report["continuity"] = {"check": CHECKS["continuity"], "max_residual_l1": run.max_residual()}
    report["max_norm_drift"] = run.max_norm_drift()
    report["wrap"] = {"flagged": run.wrap_flagged, "max_boundary_mass": run.max_boundary_mass}
    rows = [dict(r) for r in run.series]
    code = EXIT_OK
    if args.certify:
        rep = certify_causal_evolution(run.snapshots, args.eps_support, args.slack, dt=cfg.dt)
        report["certification"] = _certification_block(rep)
        escaped = [None] + [c.escaped for c in rep.consecutive]
        for row, e in zip(rows, escaped):
            row["escaped_mass"] = e
        code = EXIT_OK if rep.verdict else EXIT_NO
    out = Path(args.emit_density) if args.emit_density else None
    if out is not None:
        for k, snap in enumerate(run.snapshots):
            write_density(snap, out, k)
        write_series(rows, out / "series.csv",
                     ["step", "time", "norm_drift", "max_speed", "residual", "boundary_mass",
                      "escaped_mass"])
        report["density_dir"] = str(out)
    report["wall_time_s"] = round(time.perf_counter() - args.t0, 6)
    _emit(report, args)
    return code


def cmd_certify(args) -> int:
    _need(args, "snapshots")
    if not Path(args.snapshots).is_dir():
        raise InputError(f"snapshot directory not found: {args.snapshots}")
    snaps = read_density_dir(args.snapshots)
    rep = certify_causal_evolution(snaps, args.eps_support, args.slack, dt=args.dt)
    report = _base(args, "certify")
    report["certification"] = _certification_block(rep)
    report["wall_time_s"] = round(time.perf_counter() - args.t0, 6)
    _emit(report, args)
    return EXIT_OK if rep.verdict else EXIT_NO


def cmd_selftest(args) -> int:
    from .acceptance import run_all
    from .fixtures import blocked_matching, point_pair

    ok = True
    fixtures = []
    for name, make, expect in (("point pair", point_pair, True),
                               ("blocked matching", blocked_matching, False)):
        cert = precedes_measures(*make())
        passed = cert.verdict == expect and (expect or cert.violator is not None)
        ok &= passed
        fixtures.append({"fixture": name, "passed": passed, "result": cert.to_dict()})
        print(f"[{'PASS' if passed else 'FAIL'}] fixture: {name}", flush=True)
    results = run_all(seed=args.seed, scale=args.scale, echo=lambda s: print(s, flush=True))
    ok &= all(r.passed for r in results)
    if args.report:
        write_json({"command": "selftest", "seed": args.seed, "scale": args.scale,
                    "fixtures": fixtures, "criteria": [r.to_dict() for r in results]},
                   args.report)
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="multicausal",
                                description="Causal order of N-particle measures and wave dynamics.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON file mirroring the flags; flags win")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--report", help="also write the JSON report here")
        return sp

    for name, fn in (("precede", cmd_precede), ("oracle", cmd_oracle)):
        sp = common(sub.add_parser(name, help=f"decide mu <= nu ({'max-flow' if name == 'precede' else 'subset enumeration'})"))
        sp.add_argument("--mu")
        sp.add_argument("--nu")
        sp.add_argument("--exact", action="store_true", help="rational weights, zero tolerance")
        sp.add_argument("--slack", type=float, default=0.0)
        if name == "precede":
            sp.add_argument("--emit-witness", help="write the coupling here on yes")
            sp.add_argument("--violator-out", help="write the violating atoms here on no")
            sp.add_argument("--check-equivalences", action="store_true")
        sp.set_defaults(func=fn)

    sp = common(sub.add_parser("curves", help="trajectory measures"))
    sp.add_argument("action", choices=["build", "eval", "verify"])
    sp.add_argument("--evo")
    sp.add_argument("--sigma")
    sp.add_argument("--t", type=float)
    sp.add_argument("--out")
    sp.add_argument("--exact", action="store_true")
    sp.set_defaults(func=cmd_curves)

    sp = common(sub.add_parser("evolve", help="simulate free photons or fermions"))
    sp.add_argument("--species", choices=["photon", "fermion"], default="photon")
    sp.add_argument("--n-particles", type=int, default=2)
    sp.add_argument("--grid", type=int, default=16)
    sp.add_argument("--box", type=float, default=16.0)
    sp.add_argument("--dt", type=float, default=0.025)
    sp.add_argument("--steps", type=int, default=40)
    sp.add_argument("--width", type=float, default=0.85)
    sp.add_argument("--mass", type=float, default=1.0)
    sp.add_argument("--coarsen", type=int)
    sp.add_argument("--record-every", type=int, default=1)
    sp.add_argument("--modes", help="JSON list of Gaussian packets")
    sp.add_argument("--coeffs", help="JSON coefficient tensor")
    sp.add_argument("--emit-density", help="directory for snapshots and series.csv")
    sp.add_argument("--certify", action="store_true")
    sp.add_argument("--eps-support", type=float, default=1e-3)
    sp.add_argument("--slack", type=float, default=1.0)
    sp.set_defaults(func=cmd_evolve)

    sp = common(sub.add_parser("certify", help="certify snapshots written by evolve"))
    sp.add_argument("--snapshots")
    sp.add_argument("--eps-support", type=float, default=1e-3)
    sp.add_argument("--slack", type=float, default=1.0)
    sp.add_argument("--dt", type=float)
    sp.set_defaults(func=cmd_certify)

    sp = common(sub.add_parser("selftest", help="run the acceptance checks"))
    sp.add_argument("--scale", type=float, default=0.1)
    sp.set_defaults(func=cmd_selftest)
    return p


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not args.config:
        return args
    cfg = read_json(_existing(args.config))
    if not isinstance(cfg, dict):
        raise InputError("config file must hold a JSON object")
    sub = next(a for a in parser._subparsers._group_actions if a.dest == "command")
    sp = sub.choices[args.command]
    known = {a.dest for a in sp._actions}
    cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
    unknown = sorted(set(cfg) - known - {"command"})
    if unknown:
        raise InputError(f"unknown config keys for {args.command}: {', '.join(unknown)}")
    cfg.pop("command", None)
    # config values become defaults, so explicit flags still win
    sp.set_defaults(**cfg)
    return parser.parse_args(argv)


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    t0 = time.perf_counter()
    try:
        args = _apply_config(parser, argv)
        args.t0 = t0
        return args.func(args)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_INPUT
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (MulticausalError, ValueError, KeyError, TypeError, OSError,
            json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
