"""Simulation driver: trajectories, phase portraits, continuous-limit tables, sweeps.

Every entry point takes a :class:`~deps.config.SimConfig` and is
deterministic: the same configuration produces byte-identical files.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import SimConfig, build_config, replace_init, without_sweep
from .errors import BranchFailure, InvalidConfiguration
from .liegroup import AdmissibleRotationParam, PoseSE2, se2_compose, se2_inverse
from .ode import rk4_integrate, rk4_step
from .sleigh import (
    SleighDisplacement,
    SleighMomentum,
    constraint_residual,
    contact_circle,
    discrete_momentum_se2,
    displacement_from_momentum,
    free_inverse,
    local_radii,
    radial_deviations,
    sleigh_continuous_momentum,
    sleigh_continuous_rhs,
    sleigh_energy,
    sleigh_free_step,
    sleigh_naive_step,
    sleigh_step,
    sleigh_velocities,
)
from .suslov import (
    SuslovDiscreteState,
    classify_equilibrium,
    momentum_from_q,
    suslov_energy,
    suslov_quadratic_integral,
    suslov_quartic_integral,
    suslov_rhs,
    suslov_step,
)
from .trajectory import COLUMNS, INVARIANTS, Trajectory, drift_report, write_trajectory

__all__ = [
    "EXIT_OK",
    "EXIT_CONFIG",
    "EXIT_BRANCH",
    "RunResult",
    "LimitResult",
    "simulate",
    "run",
    "run_sweep",
    "parse_grid",
    "phase_portrait",
    "compare_limit",
    "suslov_constrained_M3",
]

EXIT_OK, EXIT_CONFIG, EXIT_BRANCH = 0, 1, 2
_GAMMA = np.array([0.0, 0.0, 1.0])
_TAG_TOL = 1e-9


@dataclass
class RunResult:
    exit_code: int
    paths: List[Path]
    trajectory: Trajectory


def _meta(cfg: SimConfig) -> Dict[str, str]:
    meta = {"system": cfg.system, "steps": str(cfg.steps), "policy": cfg.policy.value,
            "direction": str(cfg.direction)}
    if cfg.system.endswith("cont"):
        meta["dt"] = repr(cfg.dt)
    prefix = "suslov" if cfg.is_suslov else "sleigh"
    for k, v in vars(cfg.params).items():
        meta[f"{prefix}.{k}"] = repr(float(v))
    return meta


def suslov_constrained_M3(M1: float, M2: float, I) -> float:
    """``M3`` making the angular velocity orthogonal to ``e3``."""
    Ii = np.linalg.inv(I.matrix)
    return float(-(Ii[2, 0] * M1 + Ii[2, 1] * M2) / Ii[2, 2])


# ---------------------------------------------------------------------------
# per-system trajectory generators; each yields rows and may raise BranchFailure

def _suslov_disc_row(k, p, J, branch, roots, its):
    M = momentum_from_q(p, J)
    return [k, p.q0, p.q1, p.q2, M[0], M[1], M[2], suslov_quadratic_integral(M, J),
            suslov_quartic_integral(p, J), suslov_energy(M, J.inertia()),
            p.q0 ** 2 + p.q1 ** 2 + p.q2 ** 2 - 1.0, branch, roots, its]


def _suslov_disc(cfg, rows):
    J = cfg.params
    p = AdmissibleRotationParam.from_disk(cfg.init["q1"], cfg.init["q2"])
    rows.append(_suslov_disc_row(0, p, J, "initial", 0, 0))
    state = SuslovDiscreteState(p)
    for k in range(1, cfg.steps + 1):
        st = suslov_step(state, J, cfg.policy, cfg.newton, cfg.direction, cfg.method)
        state = st.state
        rows.append(_suslov_disc_row(k * cfg.direction, state.p, J, st.branch, st.root_count, st.iterations))


def _suslov_cont(cfg, rows):
    I = cfg.params.inertia()
    M = np.array([cfg.init["M1"], cfg.init["M2"], 0.0])
    M[2] = suslov_constrained_M3(M[0], M[1], I)
    h = cfg.dt * cfg.direction
    f = lambda y: suslov_rhs(y, I, _GAMMA, check=False)  # noqa: E731
    for k in range(cfg.steps + 1):
        if k:
            M = rk4_step(f, M, h)
        rows.append([k * cfg.direction, k * h, M[0], M[1], M[2], suslov_energy(M, I), float(I.inv(M) @ _GAMMA)])


def _sleigh_row(k, d, P, pose, extra):
    return [k, d.dtheta, d.V1, d.V2, P[0], P[1], P[2], pose.theta, pose.x, pose.y] + extra


def _sleigh_pose0(cfg):
    return PoseSE2(cfg.init["theta"], cfg.init["x"], cfg.init["y"])


def _sleigh_disc(cfg, rows):
    prm = cfg.params
    if "p_theta" in cfg.init:
        d = displacement_from_momentum(cfg.init["p_theta"], cfg.init["p1"], prm, cfg.policy, cfg=cfg.newton)
        P = SleighMomentum(cfg.init["p_theta"], cfg.init["p1"], discrete_momentum_se2(d, prm).p2)
    else:
        d = SleighDisplacement.admissible(cfg.init["dtheta"], cfg.init["V1"])
        P = discrete_momentum_se2(d, prm)
    pose = _sleigh_pose0(cfg)

    def extra(d, P, branch, roots, its):
        return [sleigh_energy(P[0], P[1], prm), constraint_residual(d), branch, roots, its]

    rows.append(_sleigh_row(0, d, P, pose, extra(d, P, "initial", 0, 0)))
    for k in range(1, cfg.steps + 1):
        if cfg.direction == 1:
            st = sleigh_step(d, prm, cfg.policy, P=P, cfg=cfg.newton)
            pose = se2_compose(pose, PoseSE2(*d))
        else:
            st = sleigh_step(d, prm, cfg.policy, cfg=cfg.newton, direction=-1)
            pose = se2_compose(pose, se2_inverse(PoseSE2(*st.d_next)))
        d, P = st.d_next, st.P_next
        rows.append(_sleigh_row(k * cfg.direction, d, P, pose,
                                extra(d, P, st.branch, st.root_count, st.iterations)))


def _sleigh_naive(cfg, rows):
    prm = cfg.params
    if cfg.direction != 1:
        raise InvalidConfiguration("field sim.direction: sleigh-naive runs forward only")
    d = SleighDisplacement(cfg.init["dtheta"], cfg.init["V1"], 0.0)
    pose = _sleigh_pose0(cfg)

    def extra(d, P, branch, roots, its):
        return [sleigh_energy(P[0], P[1], prm), constraint_residual(d), branch, roots, its]

    P = discrete_momentum_se2(d, prm)
    rows.append(_sleigh_row(0, d, P, pose, extra(d, P, "initial", 0, 0)))
    for k in range(1, cfg.steps + 1):
        st = sleigh_naive_step(d, prm, cfg.newton)
        pose = se2_compose(pose, PoseSE2(*d))
        d, P = st.d_next, st.P_next
        rows.append(_sleigh_row(k, d, P, pose, extra(d, P, st.branch, st.root_count, st.iterations)))


def _sleigh_free(cfg, rows):
    prm = cfg.params
    if cfg.direction != 1:
        raise InvalidConfiguration("field sim.direction: sleigh-free runs forward only")
    d = SleighDisplacement(cfg.init["dtheta"], cfg.init["V1"], cfg.init["V2"])
    P = discrete_momentum_se2(d, prm)
    pose = _sleigh_pose0(cfg)
    rows.append(_sleigh_row(0, d, P, pose, [P[1] ** 2 + P[2] ** 2]))
    for k in range(1, cfg.steps + 1):
        P = sleigh_free_step(d, P, prm)
        pose = se2_compose(pose, PoseSE2(*d))
        d = free_inverse(P, prm, near=d.dtheta)
        rows.append(_sleigh_row(k, d, P, pose, [P[1] ** 2 + P[2] ** 2]))


def _sleigh_cont_rhs(prm):
    def f(y):
        pt, p1, th = y[0], y[1], y[2]
        om, v1 = sleigh_velocities(pt, p1, prm)
        dpt, dp1 = sleigh_continuous_rhs(pt, p1, prm)
        return np.array([dpt, dp1, om, v1 * math.cos(th), v1 * math.sin(th)])
    return f


def _sleigh_cont(cfg, rows):
    prm = cfg.params
    y = np.array([cfg.init["p_theta"], cfg.init["p1"], cfg.init["theta"], cfg.init["x"], cfg.init["y"]])
    h = cfg.dt * cfg.direction
    f = _sleigh_cont_rhs(prm)
    for k in range(cfg.steps + 1):
        if k:
            y = rk4_step(f, y, h)
        rows.append([k * cfg.direction, k * h, y[0], y[1], y[2], y[3], y[4], sleigh_energy(y[0], y[1], prm)])


_GENERATORS = {
    "suslov-disc": _suslov_disc,
    "suslov-cont": _suslov_cont,
    "sleigh-disc": _sleigh_disc,
    "sleigh-naive": _sleigh_naive,
    "sleigh-free": _sleigh_free,
    "sleigh-cont": _sleigh_cont,
}


def _geometry(cfg, traj):
    """Circle diagnostics for the a = 0 sleigh, where every orbit is a circle."""
    if cfg.is_suslov or cfg.system == "sleigh-cont" or cfg.params.a != 0.0 or len(traj.rows) < 1:
        return None
    recs = traj.records()
    poses = [PoseSE2(r["theta"], r["x"], r["y"]) for r in recs]
    d0 = (recs[0]["dtheta"], recs[0]["V1"])
    out = {}
    if math.sin(d0[0]) != 0.0:
        cx, cy, rho = contact_circle(poses[0], d0)
        dev = radial_deviations(poses, (cx, cy), rho)
        out.update(radius=abs(rho), max_radial_deviation=max(abs(v) for v in dev))
    radii = local_radii(poses)
    if len(radii) >= 2:
        diffs = np.diff(radii)
        out.update(local_radius_first=radii[0], local_radius_last=radii[-1],
                   local_radius_strictly_monotone=bool(np.all(diffs < 0) or np.all(diffs > 0)))
    return out


def simulate(cfg: SimConfig) -> Tuple[Trajectory, Optional[dict]]:
    """Run the configured system; a branch failure stops the run and is returned, not raised."""
    rows: List[list] = []
    failure = None
    try:
        _GENERATORS[cfg.system](cfg, rows)
    except BranchFailure as exc:
        failure = {"step": len(rows), "message": str(exc),
                   "diagnostic": json.loads(json.dumps(exc.diagnostic, default=repr))}
    traj = Trajectory(_meta(cfg), list(COLUMNS[cfg.system]), rows)
    inv = []
    if rows:
        ks = [r[0] for r in rows]
        for name in INVARIANTS[cfg.system]:
            inv.append(drift_report(name, traj.column(name), ks).as_dict())
    summary = {"status": "branch-failure" if failure else "complete",
               "steps_completed": max(len(rows) - 1, 0), "invariants": inv}
    if failure:
        summary["failure"] = failure
    geo = _geometry(cfg, traj) if rows else None
    if geo:
        summary["geometry"] = geo
    traj.summary = summary
    return traj, failure


def run(cfg: SimConfig, output: Optional[str] = None) -> RunResult:
    traj, failure = simulate(cfg)
    paths = write_trajectory(output or cfg.output, traj, cfg.fmt)
    return RunResult(EXIT_BRANCH if failure else EXIT_OK, paths, traj)


def run_sweep(cfg: SimConfig, output: Optional[str] = None) -> RunResult:
    """Run every member of the sweep into its own file, then write a combined summary."""
    if cfg.sweep is None:
        raise InvalidConfiguration("field sweep.param: no sweep block in the configuration")
    base = Path(output or cfg.output)
    members, paths, code = [], [], EXIT_OK
    for i, value in enumerate(cfg.sweep.values()):
        out = base.with_name(f"{base.stem}_{i:03d}{base.suffix}")
        res = run(without_sweep(cfg, value, str(out)))
        paths.extend(res.paths)
        code = max(code, res.exit_code)
        members.append({"index": i, "value": value, "file": out.name, **res.trajectory.summary})
    summary = base.with_name(f"{base.stem}_sweep.json")
    summary.write_text(json.dumps({"param": cfg.sweep.param, "members": members}, indent=1,
                                  sort_keys=True) + "\n", newline="\n")
    paths.append(summary)
    return RunResult(code, paths, Trajectory(_meta(cfg), [], [], {"members": members}))


# ---------------------------------------------------------------------------
# phase portraits

def parse_grid(spec: str) -> Dict[str, Tuple[float, float, int]]:
    """Parse ``name=start:stop:count[,name=start:stop:count]``; names are init fields."""
    grid = {}
    for part in (s.strip() for s in spec.split(",") if s.strip()):
        try:
            name, rng = part.split("=", 1)
            a, b, n = rng.split(":")
            grid[name.strip().removeprefix("init.")] = (float(a), float(b), int(n))
        except ValueError:
            raise InvalidConfiguration(f"grid entry {part!r} must look like name=start:stop:count") from None
        if grid[name.strip().removeprefix("init.")][2] < 1:
            raise InvalidConfiguration(f"grid entry {part!r}: count must be >= 1")
    if not grid:
        raise InvalidConfiguration("empty grid specification")
    return grid


def _axis(start, stop, n):
    return [start] if n == 1 else [start + i * (stop - start) / (n - 1) for i in range(n)]


def _tag(cfg, rec) -> str:
    if cfg.system == "suslov-disc":
        return classify_equilibrium((rec["q0"], rec["q1"], rec["q2"]), cfg.params, _TAG_TOL).value
    if cfg.system == "suslov-cont":
        return "equilibrium" if abs(rec["M3"]) <= _TAG_TOL else "non-equilibrium"
    prm = cfg.params
    if abs(rec["p_theta"] + prm.b * rec["p1"]) > _TAG_TOL:
        return "non-equilibrium"
    s = prm.a * rec["p1"]
    return "stable" if s > 0 else "unstable" if s < 0 else "stationary"


def phase_portrait(cfg: SimConfig, grid: Dict[str, Tuple[float, float, int]], backward: bool = False,
                   output: Optional[str] = None) -> RunResult:
    """Sample one orbit per grid point into a single file with ``orbit`` and ``tag`` columns.

    With ``backward`` each orbit also runs in reverse time; those rows carry
    negative step indices and precede the forward rows.
    """
    axes = [(name, _axis(*spec)) for name, spec in grid.items()]
    points = [{}]
    for name, vals in axes:
        points = [dict(p, **{name: v}) for p in points for v in vals]
    columns = ["orbit", "tag"] + COLUMNS[cfg.system]
    rows, failures = [], []
    for i, pt in enumerate(points):
        member = replace_init(cfg, **pt)
        parts = []
        if backward:
            back = build_config(dict(member.raw, **{"sim.direction": "-1"}))
            tb, fb = simulate(back)
            parts.extend(reversed(tb.rows[1:]))
            if fb:
                failures.append({"orbit": i, "direction": -1, **fb})
        tf, ff = simulate(member)
        parts.extend(tf.rows)
        if ff:
            failures.append({"orbit": i, "direction": 1, **ff})
        for r in parts:
            rec = dict(zip(COLUMNS[cfg.system], r))
            rows.append([i, _tag(cfg, rec)] + list(r))
    traj = Trajectory(_meta(cfg), columns, rows,
                      {"orbits": len(points), "grid": {k: list(v) for k, v in grid.items()},
                       "status": "branch-failure" if failures else "complete", "failures": failures})
    paths = write_trajectory(output or cfg.output, traj, cfg.fmt)
    return RunResult(EXIT_BRANCH if failures else EXIT_OK, paths, traj)


# ---------------------------------------------------------------------------
# continuous limit

@dataclass
class LimitResult:
    epsilons: List[float]
    errors: List[float]
    orders: List[float]
    threshold: float = 0.9
    rows: List[list] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(math.isnan(o) or o >= self.threshold for o in self.orders)


def _limit_suslov(cfg, eps):
    J, I = cfg.params, cfg.params.inertia()
    w1, w2, T = cfg.limit["omega1"], cfg.limit["omega2"], cfg.limit["T"]
    n = int(round(T / eps))
    p = AdmissibleRotationParam.from_disk(0.5 * eps * w1, 0.5 * eps * w2)
    M0 = momentum_from_q(p, J) / eps
    if cfg.limit["align"] == "momentum":
        y0 = np.array([M0[0], M0[1], suslov_constrained_M3(M0[0], M0[1], I)])
    else:
        y0 = I.matrix @ np.array([w1, w2, 0.0])
    disc = [M0]
    state = SuslovDiscreteState(p)
    for _ in range(n):
        st = suslov_step(state, J, cfg.policy, cfg.newton, 1, cfg.method)
        state = st.state
        disc.append(np.asarray(st.M_next) / eps)
    ref = rk4_integrate(lambda y: suslov_rhs(y, I, _GAMMA, check=False), y0, eps, n, substeps=4)
    return float(np.max(np.abs(np.array(disc) - ref))), n


def _limit_sleigh(cfg, eps):
    prm = cfg.params
    om, v1, T = cfg.limit["omega"], cfg.limit["v1"], cfg.limit["T"]
    n = int(round(T / eps))
    d = SleighDisplacement.admissible(eps * om, eps * v1)
    P = discrete_momentum_se2(d, prm)
    if cfg.limit["align"] == "momentum":
        y0 = np.array(P[:2]) / eps
    else:
        y0 = np.array(sleigh_continuous_momentum(om, v1, 0.0, prm)[:2])
    disc = [np.array(P[:2]) / eps]
    for _ in range(n):
        st = sleigh_step(d, prm, cfg.policy, P=P, cfg=cfg.newton)
        d, P = st.d_next, st.P_next
        disc.append(np.array(P[:2]) / eps)
    ref = rk4_integrate(lambda y: np.array(sleigh_continuous_rhs(y[0], y[1], prm)), y0, eps, n, substeps=4)
    return float(np.max(np.abs(np.array(disc) - ref))), n


def compare_limit(cfg: SimConfig, epsilons: Sequence[float], output: Optional[str] = None) -> LimitResult:
    """Sup-norm gap between the scaled discrete momenta and an RK4 reference over a fixed arc.

    The discrete run starts from the displacement ``eps`` times the
    configured velocities and step ``k`` is compared with time ``k eps``.
    With ``limit.align = velocity`` the reference starts from the continuous
    momentum of those velocities; with ``momentum`` it starts from the
    discrete initial momentum divided by ``eps``.
    """
    eps = [float(e) for e in epsilons]
    if len(eps) < 2:
        raise InvalidConfiguration("need at least two epsilon values")
    for a, b in zip(eps, eps[1:]):
        if not b > 0 or abs(a / b - 2.0) > 1e-9:
            raise InvalidConfiguration("each epsilon must halve the previous one")
    if cfg.system not in ("suslov-disc", "suslov-cont", "sleigh-disc", "sleigh-cont"):
        raise InvalidConfiguration(f"field sim.system: no continuous limit for {cfg.system}")
    fn = _limit_suslov if cfg.is_suslov else _limit_sleigh
    errs, steps = [], []
    for e in eps:
        err, n = fn(cfg, e)
        errs.append(err)
        steps.append(n)
    orders = []
    for a, b in zip(errs, errs[1:]):
        orders.append(math.log2(a / b) if a > 0 and b > 0 else math.nan)
    rows = [[e, n, err, (orders[i - 1] if i else math.nan)] for i, (e, n, err) in enumerate(zip(eps, steps, errs))]
    res = LimitResult(eps, errs, orders, rows=rows)
    if output:
        traj = Trajectory(_meta(cfg), ["k", "eps", "steps", "error", "order"], [[i] + r for i, r in enumerate(rows)],
                          {"ok": res.ok, "threshold": res.threshold, "align": cfg.limit["align"]})
        write_trajectory(output, traj, "json" if str(output).endswith(".json") else "csv")
    return res
