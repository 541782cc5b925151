"""Command line entry point ``deps``.

Exit codes: 0 for a complete run, 1 for configuration or input errors,
2 when a branch failure cut a trajectory short (the partial file is kept).
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .config import load_config
from .errors import InvalidConfiguration
from .harness import EXIT_CONFIG, EXIT_OK, compare_limit, parse_grid, phase_portrait, run, run_sweep
from .trajectory import TrajectoryFormatError, invariant_report


def _common(p):
    p.add_argument("config", help="flat key = value configuration file")
    p.add_argument("--out", help="output path (overrides sim.output)")
    p.add_argument("--format", choices=("csv", "json"), help="output format (overrides sim.format)")
    p.add_argument("--policy", choices=("continuity", "smallest", "largest"), help="branch policy")
    p.add_argument("--steps", type=int, help="number of steps (overrides sim.steps)")
    p.add_argument("--seed-override", nargs="*", default=[], metavar="KEY=VALUE",
                   help="override any configuration field, e.g. init.q1=0.3")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="deps", description="Discrete Euler-Poincare-Suslov simulations")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate one trajectory (or a sweep) and write it to a file")
    _common(p)

    p = sub.add_parser("portrait", help="sample orbits over a grid of initial conditions")
    _common(p)
    p.add_argument("--grid", required=True, help="name=start:stop:count[,name=start:stop:count]")
    p.add_argument("--backward", action="store_true", help="also integrate each orbit backward")

    p = sub.add_parser("limit", help="continuous-limit convergence table")
    _common(p)
    p.add_argument("--eps", required=True, help="comma-separated epsilons, each half the previous")

    p = sub.add_parser("report", help="invariant drift of a trajectory file")
    p.add_argument("trajectory")
    return parser


def _load(args):
    overrides = list(args.seed_override)
    if args.format:
        overrides.append(f"sim.format={args.format}")
    if args.policy:
        overrides.append(f"sim.policy={args.policy}")
    if args.steps is not None:
        overrides.append(f"sim.steps={args.steps}")
    return load_config(args.config, overrides)


def _report(path) -> int:
    res = invariant_report(path)
    print(f"system: {res.system}")
    print(f"{'invariant':<12} {'initial':>24} {'max_abs_drift':>12} {'max_rel_drift':>12} {'step':>8}")
    for r in res.reports:
        print(f"{r.name:<12} {r.initial:>24.17g} {r.max_abs_drift:>12.3e} {r.max_rel_drift:>12.3e} {r.step_of_max:>8d}")
    for name, dev in res.consistency.items():
        print(f"self-consistency {name}: {dev:.3e}")
    if not res.consistent:
        print("error: stored invariants do not match the state columns", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "report":
            return _report(args.trajectory)
        cfg = _load(args)
        if args.command == "run":
            res = run_sweep(cfg, args.out) if cfg.sweep else run(cfg, args.out)
            for p in res.paths:
                print(p)
            if res.exit_code:
                print(f"branch failure: {res.trajectory.summary.get('failure', {}).get('message', 'see summary')}",
                      file=sys.stderr)
            return res.exit_code
        if args.command == "portrait":
            res = phase_portrait(cfg, parse_grid(args.grid), args.backward, args.out)
            for p in res.paths:
                print(p)
            return res.exit_code
        eps = [float(e) for e in args.eps.split(",") if e.strip()]
        res = compare_limit(cfg, eps, args.out)
        print(f"{'eps':>12} {'steps':>7} {'error':>12} {'order':>7}")
        for e, n, err, order in res.rows:
            print(f"{e:>12.4g} {n:>7d} {err:>12.4e} {order:>7.3f}")
        print("order check: " + ("pass" if res.ok else "FAIL"))
        return EXIT_OK if res.ok else EXIT_CONFIG
    except (InvalidConfiguration, TrajectoryFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
