"""Trajectory files and invariant-drift reports.

CSV files open with ``# key = value`` metadata lines (the system and its
parameters), then a mandatory header row and one row per step. Floats are
written with 17 significant digits so every value round-trips; lines end in
LF. JSON files hold the same content as ``meta``, ``columns``, ``records``
and a ``summary`` block.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .errors import DepsError
from .liegroup import AdmissibleRotationParam
from .sleigh import SleighParams, sleigh_energy
from .suslov import MassTensor, suslov_energy, suslov_quadratic_integral, suslov_quartic_integral

__all__ = [
    "TrajectoryFormatError",
    "Trajectory",
    "InvariantReport",
    "ReportResult",
    "COLUMNS",
    "INVARIANTS",
    "format_value",
    "write_trajectory",
    "read_trajectory",
    "summary_path",
    "params_from_meta",
    "recompute_invariant",
    "drift_report",
    "invariant_report",
]


class TrajectoryFormatError(DepsError, ValueError):
    """Malformed trajectory file; the message carries the line number."""


COLUMNS = {
    "suslov-disc": ["k", "q0", "q1", "q2", "M1", "M2", "M3", "quadratic", "quartic", "energy",
                    "constraint_residual", "branch", "roots", "iterations"],
    "suslov-cont": ["k", "t", "M1", "M2", "M3", "energy", "constraint_residual"],
    "sleigh-disc": ["k", "dtheta", "V1", "V2", "p_theta", "p1", "p2", "theta", "x", "y", "energy",
                    "constraint_residual", "branch", "roots", "iterations"],
    "sleigh-naive": ["k", "dtheta", "V1", "V2", "p_theta", "p1", "p2", "theta", "x", "y", "energy",
                     "constraint_residual", "branch", "roots", "iterations"],
    "sleigh-free": ["k", "dtheta", "V1", "V2", "p_theta", "p1", "p2", "theta", "x", "y", "casimir"],
    "sleigh-cont": ["k", "t", "p_theta", "p1", "theta", "x", "y", "energy"],
}

# invariant columns checked for drift; the naive sleigh energy is tracked to show it is not kept
INVARIANTS = {
    "suslov-disc": ["quadratic", "quartic", "energy"],
    "suslov-cont": ["energy"],
    "sleigh-disc": ["energy"],
    "sleigh-naive": ["energy"],
    "sleigh-free": ["casimir"],
    "sleigh-cont": ["energy"],
}

_INT_COLUMNS = {"k", "roots", "iterations", "orbit"}
_STR_COLUMNS = {"branch", "tag"}


def format_value(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


@dataclass
class Trajectory:
    meta: Dict[str, str]
    columns: List[str]
    rows: List[list]
    summary: Optional[dict] = None

    @property
    def system(self) -> str:
        return self.meta.get("system", "")

    def column(self, name) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows], dtype=float)

    def records(self):
        return [dict(zip(self.columns, r)) for r in self.rows]


def summary_path(path) -> Path:
    p = Path(path)
    return p.with_name(p.name + ".summary.json")


def write_trajectory(path, traj: Trajectory, fmt: str = "csv") -> List[Path]:
    """Write ``traj``; CSV output also gets a JSON summary sidecar when a summary is present."""
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    written = [path]
    if fmt == "json":
        doc = {"meta": traj.meta, "columns": traj.columns, "records": traj.rows,
               "summary": traj.summary or {}}
        path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n", newline="\n")
        return written
    lines = [f"# {k} = {v}" for k, v in sorted(traj.meta.items())]
    lines.append(",".join(traj.columns))
    lines.extend(",".join(format_value(v) for v in row) for row in traj.rows)
    path.write_text("\n".join(lines) + "\n", newline="\n")
    if traj.summary is not None:
        sp = summary_path(path)
        sp.write_text(json.dumps(traj.summary, indent=1, sort_keys=True) + "\n", newline="\n")
        written.append(sp)
    return written


def _convert(name, text, lineno):
    if name in _STR_COLUMNS:
        return text
    try:
        return int(text) if name in _INT_COLUMNS else float(text)
    except ValueError:
        raise TrajectoryFormatError(f"line {lineno}: column {name}: cannot parse {text!r}") from None


def read_trajectory(path) -> Trajectory:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise TrajectoryFormatError(f"cannot read {path}: {exc}") from exc
    if text.lstrip().startswith("{"):
        return _read_json(text)
    meta, columns, rows = {}, None, []
    for lineno, line in enumerate(text.split("\n"), start=1):
        if not line:
            continue
        if line.startswith("#"):
            if columns is not None:
                raise TrajectoryFormatError(f"line {lineno}: metadata after the header row")
            if "=" not in line:
                raise TrajectoryFormatError(f"line {lineno}: metadata must look like '# key = value'")
            k, v = line[1:].split("=", 1)
            meta[k.strip()] = v.strip()
            continue
        cells = line.split(",")
        if columns is None:
            columns = cells
            if "k" not in columns:
                raise TrajectoryFormatError(f"line {lineno}: header row must contain a k column")
            continue
        if len(cells) != len(columns):
            raise TrajectoryFormatError(f"line {lineno}: expected {len(columns)} fields, got {len(cells)}")
        rows.append([_convert(c, t, lineno) for c, t in zip(columns, cells)])
    if columns is None:
        raise TrajectoryFormatError("line 1: missing header row")
    return Trajectory(meta, columns, rows)


def _read_json(text) -> Trajectory:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TrajectoryFormatError(f"line {exc.lineno}: invalid JSON: {exc.msg}") from None
    try:
        meta, columns, rows = doc["meta"], doc["columns"], doc["records"]
    except (KeyError, TypeError):
        raise TrajectoryFormatError("line 1: JSON trajectory needs meta, columns and records") from None
    for i, r in enumerate(rows):
        if len(r) != len(columns):
            raise TrajectoryFormatError(f"record {i}: expected {len(columns)} fields, got {len(r)}")
    return Trajectory(meta, columns, rows, doc.get("summary"))


def params_from_meta(meta):
    system = meta.get("system", "")
    try:
        if system.startswith("suslov"):
            return MassTensor(**{k: float(meta[f"suslov.{k}"]) for k in ("J11", "J22", "J33", "J12", "J13", "J23")})
        if system.startswith("sleigh"):
            return SleighParams(**{k: float(meta[f"sleigh.{k}"]) for k in ("m", "J", "a", "b")})
    except KeyError as exc:
        raise TrajectoryFormatError(f"line 1: metadata lacks {exc.args[0]}") from None
    raise TrajectoryFormatError(f"line 1: unknown system {system!r}")


def recompute_invariant(name: str, rec: dict, params, system: str) -> float:
    """Invariant value recomputed from the state columns of one record."""
    if name == "quadratic":
        return suslov_quadratic_integral((rec["M1"], rec["M2"]), params)
    if name == "quartic":
        p = AdmissibleRotationParam.canonical(rec["q0"], rec["q1"], rec["q2"])
        return suslov_quartic_integral(p, params)
    if name == "energy" and system.startswith("suslov"):
        return suslov_energy((rec["M1"], rec["M2"], rec["M3"]), params.inertia())
    if name == "energy":
        return sleigh_energy(rec["p_theta"], rec["p1"], params)
    if name == "casimir":
        return rec["p1"] ** 2 + rec["p2"] ** 2
    raise KeyError(name)


@dataclass(frozen=True)
class InvariantReport:
    name: str
    initial: float
    max_abs_drift: float
    max_rel_drift: float
    step_of_max: int

    def as_dict(self):
        return asdict(self)


def drift_report(name: str, values: Sequence[float], steps: Optional[Sequence[int]] = None) -> InvariantReport:
    v = np.asarray(values, dtype=float)
    ks = list(steps) if steps is not None else list(range(len(v)))
    if v.size == 0:
        return InvariantReport(name, math.nan, 0.0, 0.0, 0)
    d = np.abs(v - v[0])
    i = int(np.argmax(d))
    scale = abs(v[0])
    rel = float(d[i] / scale) if scale > 0 else float(d[i])
    return InvariantReport(name, float(v[0]), float(d[i]), rel, int(ks[i]))


@dataclass(frozen=True)
class ReportResult:
    system: str
    reports: List[InvariantReport]
    consistency: Dict[str, float]
    tolerance: float = 1e-12

    @property
    def consistent(self) -> bool:
        return all(v <= self.tolerance for v in self.consistency.values())


def invariant_report(path) -> ReportResult:
    """Drift statistics for every invariant column of a trajectory file.

    ``consistency`` holds, per invariant, the largest difference between the
    stored column and its recomputation from the state columns, relative to
    ``max(1, |value|)``.
    """
    traj = read_trajectory(path)
    system = traj.system
    if system not in INVARIANTS:
        raise TrajectoryFormatError(f"line 1: unknown or missing system {system!r}")
    params = params_from_meta(traj.meta)
    recs = traj.records()
    ks = [r["k"] for r in recs]
    reports, consistency = [], {}
    for name in INVARIANTS[system]:
        if name not in traj.columns:
            raise TrajectoryFormatError(f"line 1: invariant column {name} missing")
        stored = [float(r[name]) for r in recs]
        reports.append(drift_report(name, stored, ks))
        worst = 0.0
        for r, s in zip(recs, stored):
            worst = max(worst, abs(recompute_invariant(name, r, params, system) - s) / max(1.0, abs(s)))
        consistency[name] = worst
    return ReportResult(system, reports, consistency)
