"""Small numerical kernels shared by the dynamics modules.

Real roots of cubics and quartics, a damped Newton iteration in two
variables, a multistart driver that enumerates and deduplicates roots,
and central finite differences used by the test oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

__all__ = [
    "NewtonConfig",
    "NewtonResult",
    "MultistartResult",
    "real_roots_quadratic",
    "real_roots_cubic",
    "real_roots_quartic",
    "polyval",
    "newton2",
    "multistart",
    "euclidean2",
    "fd_derivative",
    "fd_gradient",
    "fd_jacobian",
]


@dataclass(frozen=True)
class NewtonConfig:
    residual_tol: float = 1e-12
    max_iter: int = 60
    damping: float = 0.5
    fd_step: float = 1e-7
    dedupe_radius: float = 1e-8
    # smallest line-search factor tried before giving up
    damping_floor: float = 1e-6
    # extra full steps taken after the tolerance is met
    polish_steps: int = 2

    def __post_init__(self):
        for name in ("residual_tol", "max_iter", "damping", "fd_step",
                     "dedupe_radius", "damping_floor"):
            if not getattr(self, name) > 0:
                raise ValueError(f"NewtonConfig.{name} must be positive")
        if self.polish_steps < 0:
            raise ValueError("NewtonConfig.polish_steps must be >= 0")
        if not self.damping < 1:
            raise ValueError("NewtonConfig.damping must be < 1")


@dataclass
class NewtonResult:
    x: np.ndarray
    converged: bool
    iterations: int
    residual: float
    message: str = ""


@dataclass
class MultistartResult:
    roots: list
    outcomes: list = field(default_factory=list)

    def __len__(self):
        return len(self.roots)


# ---------------------------------------------------------------------------
# polynomials (coefficients in ascending order: c0 + c1 x + c2 x^2 + ...)

def polyval(coeffs: Sequence[float], x):
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _polyder(coeffs):
    return [k * c for k, c in enumerate(coeffs)][1:]


def _normalize(coeffs, degree):
    c = [float(v) for v in coeffs]
    if len(c) != degree + 1:
        raise ValueError(f"expected {degree + 1} coefficients, got {len(c)}")
    if not all(math.isfinite(v) for v in c):
        raise ValueError("coefficients must be finite")
    if c[-1] == 0.0:
        raise ValueError(f"leading coefficient vanishes; not a degree-{degree} polynomial")
    return c


def _polish(coeffs, x, steps=2):
    """A couple of guarded Newton steps on the original polynomial."""
    d = _polyder(coeffs)
    fx = polyval(coeffs, x)
    for _ in range(steps):
        dfx = polyval(d, x)
        if dfx == 0.0 or fx == 0.0:
            break
        xn = x - fx / dfx
        fn = polyval(coeffs, xn)
        if abs(fn) >= abs(fx):
            break
        x, fx = xn, fn
    return x


def _merge(coeffs, candidates, radius):
    """Polish, sort and merge (root, multiplicity) pairs closer than ``radius``."""
    pairs = sorted((_polish(coeffs, r), m) for r, m in candidates)
    merged = []
    for r, m in pairs:
        if merged and abs(r - merged[-1][0]) <= radius * max(1.0, abs(r)):
            r0, m0 = merged[-1]
            merged[-1] = ((r0 * m0 + r * m) / (m0 + m), m0 + m)
        else:
            merged.append((r, m))
    return merged


def _quadratic_candidates(a, b, c, radius):
    # a x^2 + b x + c with a != 0
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        im = math.sqrt(-disc) / (2.0 * abs(a))
        re = -b / (2.0 * a)
        if im <= 0.5 * radius * max(1.0, abs(re)):
            return [(re, 2)]
        return []
    sq = math.sqrt(disc)
    if sq == 0.0:
        return [(-b / (2.0 * a), 2)]
    qq = -0.5 * (b + math.copysign(sq, b))
    r1 = qq / a
    r2 = c / qq if qq != 0.0 else -b / a - r1
    return [(r1, 1), (r2, 1)]


def real_roots_quadratic(coeffs, dedupe_radius=1e-8):
    """Real roots of ``c0 + c1 x + c2 x^2`` as sorted (root, multiplicity) pairs."""
    c0, c1, c2 = _normalize(coeffs, 2)
    return _merge([c0, c1, c2], _quadratic_candidates(c2, c1, c0, dedupe_radius),
                  dedupe_radius)


def _one_real_cubic_root(a, b, c):
    """One real root of the monic cubic x^3 + a x^2 + b x + c."""
    p = b - a * a / 3.0
    q = 2.0 * a ** 3 / 27.0 - a * b / 3.0 + c
    shift = -a / 3.0
    if p == 0.0:
        return shift + np.cbrt(-q)
    D = (q / 2.0) ** 2 + (p / 3.0) ** 3
    if D >= 0.0:
        u = np.cbrt(-q / 2.0 - math.copysign(math.sqrt(D), q))
        t = u - p / (3.0 * u) if u != 0.0 else 0.0
        return shift + t
    # three real roots; the k=0 trigonometric root is the largest
    rho = 2.0 * math.sqrt(-p / 3.0)
    arg = 3.0 * q / (p * rho)
    arg = min(1.0, max(-1.0, arg))
    return shift + rho * math.cos(math.acos(arg) / 3.0)


def real_roots_cubic(coeffs, dedupe_radius=1e-8):
    """Real roots of ``c0 + c1 x + c2 x^2 + c3 x^3``.

    Returns a sorted list of ``(root, multiplicity)``. One root comes from
    the depressed-cubic closed form; the remaining quadratic factor is
    solved after deflation, and every root gets a Newton polish against the
    original coefficients. Roots closer than ``dedupe_radius`` (relative for
    large roots) are reported once with summed multiplicity.
    """
    c = _normalize(coeffs, 3)
    a, b, cc = c[2] / c[3], c[1] / c[3], c[0] / c[3]
    monic = [cc, b, a, 1.0]
    r = _polish(monic, _one_real_cubic_root(a, b, cc), steps=3)
    # synthetic division by (x - r)
    q2, q1 = 1.0, a + r
    q0 = b + r * q1
    cands = [(r, 1)] + _quadratic_candidates(q2, q1, q0, dedupe_radius)
    return _merge(monic, cands, dedupe_radius)


def real_roots_quartic(coeffs, dedupe_radius=1e-8):
    """Real roots of a quartic via Ferrari's resolvent cubic."""
    c = _normalize(coeffs, 4)
    a, b, cc, d = (c[3] / c[4], c[2] / c[4], c[1] / c[4], c[0] / c[4])
    monic = [d, cc, b, a, 1.0]
    # depressed quartic y^4 + p y^2 + q y + r, x = y - a/4
    p = b - 3.0 * a * a / 8.0
    q = cc - a * b / 2.0 + a ** 3 / 8.0
    r = d - a * cc / 4.0 + a * a * b / 16.0 - 3.0 * a ** 4 / 256.0
    shift = -a / 4.0
    scale = max(1.0, abs(p), math.sqrt(abs(r)))
    cands = []
    if abs(q) <= 1e-14 * scale ** 1.5:
        # biquadratic in y^2
        for w, mult in _quadratic_candidates(1.0, p, r, dedupe_radius):
            if w > 0.0:
                s = math.sqrt(w)
                cands += [(shift + s, mult), (shift - s, mult)]
            elif w >= -0.25 * dedupe_radius ** 2 * scale:
                cands.append((shift, 2 * mult))
    else:
        # resolvent 8 m^3 + 8 p m^2 + (2 p^2 - 8 r) m - q^2 has a positive root
        res = real_roots_cubic([-q * q, 2.0 * p * p - 8.0 * r, 8.0 * p, 8.0], dedupe_radius)
        m = max(root for root, _ in res)
        m = max(m, 1e-300)
        s = math.sqrt(2.0 * m)
        for sign in (1.0, -1.0):
            # y^2 - sign*s*y + (p/2 + m + sign*q/(2 s)) = 0
            for y, mult in _quadratic_candidates(1.0, -sign * s,
                                                 p / 2.0 + m + sign * q / (2.0 * s),
                                                 dedupe_radius):
                cands.append((shift + y, mult))
    return _merge(monic, cands, dedupe_radius)


# ---------------------------------------------------------------------------
# finite differences

def fd_derivative(f: Callable[[float], float], x: float, h: float = 1e-6) -> float:
    return (f(x + h) - f(x - h)) / (2.0 * h)


def fd_gradient(f, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2.0 * h)
    return g


def fd_jacobian(F, x, h=1e-7):
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        cols.append((np.asarray(F(x + e), dtype=float) - np.asarray(F(x - e), dtype=float)) / (2.0 * h))
    return np.column_stack(cols)


# ---------------------------------------------------------------------------
# Newton in two variables
#
# The iteration works on plain floats: the dynamics modules call it many
# times per step, and numpy dispatch would dominate the cost.

def _fd_jac2(F, x, y, h):
    a1, a2 = F(x + h, y)
    b1, b2 = F(x - h, y)
    c1, c2 = F(x, y + h)
    d1, d2 = F(x, y - h)
    s = 2.0 * h
    return ((a1 - b1) / s, (c1 - d1) / s), ((a2 - b2) / s, (c2 - d2) / s)


def _finite2(r):
    return math.isfinite(r[0]) and math.isfinite(r[1])


def newton2(F, seed, jac=None, cfg: Optional[NewtonConfig] = None) -> NewtonResult:
    """Damped Newton iteration for a system of two equations in two unknowns.

    ``F(x, y)`` returns a pair of residuals and may return non-finite values
    outside its domain; such trial points are rejected by the backtracking
    line search. ``jac(x, y)`` returns ``((dF1/dx, dF1/dy), (dF2/dx, dF2/dy))``;
    central differences with ``cfg.fd_step`` are used when it is omitted.
    Once the residual tolerance is met, up to ``cfg.polish_steps`` further
    full steps are taken while they keep reducing the residual.

    The result always states whether the tolerance was met; callers decide
    whether failure is fatal.
    """
    cfg = cfg or NewtonConfig()
    x, y = (float(v) for v in seed)
    r = F(x, y)
    if not _finite2(r):
        return NewtonResult(np.array([x, y]), False, 0, math.inf, "residual not finite at seed")
    nr = math.hypot(r[0], r[1])
    it = 0
    polished = 0
    while True:
        if nr < cfg.residual_tol:
            if nr == 0.0 or polished >= cfg.polish_steps:
                return NewtonResult(np.array([x, y]), True, it, nr)
            polished += 1
        elif it >= cfg.max_iter:
            return NewtonResult(np.array([x, y]), False, it, nr, "max_iter exceeded")
        (j11, j12), (j21, j22) = jac(x, y) if jac is not None else _fd_jac2(F, x, y, cfg.fd_step)
        det = j11 * j22 - j12 * j21
        if det == 0.0 or not math.isfinite(det):
            if nr < cfg.residual_tol:
                return NewtonResult(np.array([x, y]), True, it, nr)
            return NewtonResult(np.array([x, y]), False, it, nr, "singular Jacobian")
        dx = (-r[0] * j22 + r[1] * j12) / det
        dy = (-r[1] * j11 + r[0] * j21) / det
        t = 1.0
        while True:
            xn, yn = x + t * dx, y + t * dy
            rn = F(xn, yn)
            if _finite2(rn):
                nn = math.hypot(rn[0], rn[1])
                if nn < nr:
                    break
            t *= cfg.damping
            if t < cfg.damping_floor:
                if nr < cfg.residual_tol:
                    return NewtonResult(np.array([x, y]), True, it, nr)
                return NewtonResult(np.array([x, y]), False, it, nr, "line search stalled")
        if nr < cfg.residual_tol and t < 1.0:
            # polishing only accepts full steps
            return NewtonResult(np.array([x, y]), True, it, nr)
        x, y, r, nr = xn, yn, rn, nn
        it += 1


def euclidean2(a, b) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def multistart(F, seeds, jac=None, cfg: Optional[NewtonConfig] = None,
               distance=None) -> MultistartResult:
    """Run :func:`newton2` from every seed and keep distinct converged roots.

    Two roots are the same when ``distance(a, b) <= cfg.dedupe_radius``
    (Euclidean by default); the root reached from the earliest seed is
    kept. Roots come back in lexicographic order, so the output depends
    only on the inputs.
    """
    cfg = cfg or NewtonConfig()
    distance = distance or euclidean2
    outcomes = [newton2(F, s, jac=jac, cfg=cfg) for s in seeds]
    roots = []
    for res in outcomes:
        if not res.converged:
            continue
        if any(distance(res.x, k) <= cfg.dedupe_radius for k in roots):
            continue
        roots.append(res.x)
    roots.sort(key=lambda v: (float(v[0]), float(v[1])))
    return MultistartResult(roots, outcomes)
