"""Chaplygin sleigh: continuous momentum flow on se*(2) and its discrete map.

A planar body slides on a blade at the origin of its frame; the centre of
mass sits at ``(a, b)`` in body coordinates. The continuous half covers
the reduced Lagrangian, the momentum equation, its energy integral and the
closed-form reconstruction for ``a = 0``.

The discrete half works with body displacements ``(dtheta, V1, V2)`` that
satisfy ``V1 (1 - cos dtheta) = V2 sin dtheta``: the sleigh turns by half
the angle, slides, then turns by the other half. A step updates
``(p_theta, p1)`` explicitly and recovers the next displacement from the
discrete Legendre transform; the cubic in ``z = sin dtheta`` (for
``b = 0``) describes the momentum surface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import BranchFailure, ConstraintViolation, DomainError, InvalidConfiguration
from .liegroup import PoseSE2, coad_se2, exp_d_se2, se2_compose, wrap_angle
from .policy import BranchPolicy
from .rootfind import NewtonConfig, newton2, real_roots_cubic

__all__ = [
    "SleighParams",
    "SleighMomentum",
    "SleighDisplacement",
    "HatCoords",
    "SurfaceClass",
    "SleighStep",
    "AsymptoticsReport",
    "sleigh_reduced_lagrangian",
    "sleigh_reduced_lagrangian_form",
    "sleigh_continuous_momentum",
    "sleigh_velocities",
    "sleigh_continuous_rhs",
    "sleigh_energy",
    "energy_bound",
    "reconstruct_continuous_a0",
    "discrete_lagrangian_se2",
    "discrete_momentum_se2",
    "constraint_residual",
    "v2_from_constraint",
    "naive_constraint_v2",
    "group_constraint_residual",
    "mid_angle_residuals",
    "hat_coords",
    "cubic_coefficients",
    "cubic_residual",
    "ellipse_residual",
    "discriminant_curve",
    "surface_classify",
    "sleigh_free_step",
    "free_inverse",
    "displacement_from_momentum",
    "sleigh_step",
    "sleigh_naive_step",
    "reconstruct_discrete",
    "contact_circle",
    "radial_deviations",
    "local_radii",
    "sleigh_asymptotics_check",
]

_POLE_MARGIN = 1e-9


# ---------------------------------------------------------------------------
# value types

@dataclass(frozen=True)
class SleighParams:
    m: float
    J: float
    a: float = 0.0
    b: float = 0.0

    def __post_init__(self):
        for name in ("m", "J", "a", "b"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidConfiguration(f"sleigh parameter {name} must be finite")
        if not self.m > 0:
            raise InvalidConfiguration("sleigh mass m must be positive")
        if not self.J > 0:
            raise InvalidConfiguration("sleigh moment of inertia J must be positive")

    @property
    def J_contact(self) -> float:
        """Moment of inertia about the contact point, ``J + m (a^2 + b^2)``."""
        return self.J + self.m * (self.a * self.a + self.b * self.b)


class SleighMomentum(NamedTuple):
    p_theta: float
    p1: float
    p2: float


class SleighDisplacement(NamedTuple):
    dtheta: float
    V1: float
    V2: float

    @classmethod
    def admissible(cls, dtheta: float, V1: float) -> "SleighDisplacement":
        """Displacement on the constraint variety with the given angle and forward slide."""
        return cls(float(dtheta), float(V1), v2_from_constraint(dtheta, V1))


class HatCoords(NamedTuple):
    p_theta: float
    p_hat1: float
    z: float


@dataclass(frozen=True)
class SurfaceClass:
    quadrant: str
    cos_sign: int
    discriminant: float
    preimages: int
    ellipse: float

    @property
    def single_valued(self) -> bool:
        return self.preimages <= 1

    @property
    def v1_sign(self) -> int:
        """Sign of V1 on the fibre, from the side of the V1 = 0 ellipse."""
        return -1 if self.ellipse < 0 else 1


# ---------------------------------------------------------------------------
# continuous sleigh

def sleigh_reduced_lagrangian(omega, v1, v2, params: SleighParams) -> float:
    """Reduced Lagrangian as commonly printed, with a ``v1^2`` in the b cross term.

    Not a quadratic form for ``b != 0``; see :func:`sleigh_reduced_lagrangian_form`.
    """
    m, a, b = params.m, params.a, params.b
    return 0.5 * (params.J_contact * omega * omega + m * (v1 * v1 + v2 * v2)
                  - 2.0 * m * b * omega * v1 * v1 + 2.0 * m * a * omega * v2)


def _inertia_block(params: SleighParams) -> np.ndarray:
    m, a, b, J = params.m, params.a, params.b, params.J
    return np.array([[J / 2 + m * a * a, m * a * b, m * a],
                     [m * a * b, J / 2 + m * b * b, m * b],
                     [m * a, m * b, m]])


def sleigh_reduced_lagrangian_form(omega, v1, v2, params: SleighParams) -> float:
    """Kinetic energy ``1/2 tr(xi K xi^T)`` of the body velocity ``xi`` in se(2)."""
    xi = np.array([[0.0, -omega, v1], [omega, 0.0, v2], [0.0, 0.0, 0.0]])
    return 0.5 * float(np.trace(xi @ _inertia_block(params) @ xi.T))


def sleigh_continuous_momentum(omega, v1, v2, params: SleighParams) -> SleighMomentum:
    """Body momentum, the gradient of the quadratic kinetic energy."""
    m, a, b = params.m, params.a, params.b
    return SleighMomentum(params.J_contact * omega + m * (a * v2 - b * v1),
                          m * (v1 - b * omega),
                          m * (v2 + a * omega))


def sleigh_velocities(p_theta, p1, params: SleighParams):
    """``(omega, v1)`` of the constrained motion (``v2 = 0``) with the given momenta."""
    m, a, b = params.m, params.a, params.b
    omega = (p_theta + b * p1) / (params.J + m * a * a)
    return omega, p1 / m + b * omega


def sleigh_continuous_rhs(p_theta, p1, params: SleighParams):
    m, a, b = params.m, params.a, params.b
    k = params.J + m * a * a
    s = p_theta + b * p1
    if b == 0.0:
        return (-a * p_theta * p1 / k, m * a * p_theta * p_theta / (k * k))
    return (-a / (k * k) * s * (m * b * p_theta + params.J_contact * p1),
            m * a / (k * k) * s * s)


def sleigh_energy(p_theta, p1, params: SleighParams) -> float:
    m, b = params.m, params.b
    return m * p_theta * p_theta + 2.0 * b * m * p_theta * p1 + params.J_contact * p1 * p1


def energy_bound(params: SleighParams) -> float:
    """Energy below which the b = 0 map is single valued near the origin."""
    m, a = params.m, params.a
    return m * m * a * a * (params.J + m * a * a)


def reconstruct_continuous_a0(pose0: PoseSE2, omega: float, v1: float, t: float) -> PoseSE2:
    """Pose after time ``t`` at constant turn rate and forward speed (circle or line)."""
    return se2_compose(PoseSE2(*pose0), exp_d_se2(omega, v1, t))


# ---------------------------------------------------------------------------
# discrete kinematics

def constraint_residual(d) -> float:
    dtheta, V1, V2 = d
    return V1 * (1.0 - math.cos(dtheta)) - V2 * math.sin(dtheta)


def v2_from_constraint(dtheta: float, V1: float) -> float:
    if not abs(dtheta) < math.pi - _POLE_MARGIN:
        raise ConstraintViolation(f"|dtheta| = {abs(dtheta)!r} too close to pi; the side slip is unbounded")
    return V1 * math.tan(0.5 * dtheta)


def naive_constraint_v2(dtheta: float, V1: float) -> float:
    """The rejected discrete constraint: no side slip at all."""
    return 0.0


def group_constraint_residual(pose_k: PoseSE2, pose_k1: PoseSE2) -> float:
    """Mid-angle form of the constraint on a pair of poses."""
    mid = 0.5 * (pose_k.theta + pose_k.theta + wrap_angle(pose_k1.theta - pose_k.theta))
    return (-math.sin(mid) * (pose_k1.x - pose_k.x) + math.cos(mid) * (pose_k1.y - pose_k.y))


def mid_angle_residuals(pose_k: PoseSE2, pose_k1: PoseSE2):
    """Residuals of the two circular-translation identities for a pose pair.

    The forward slide measured in either heading agrees, and the side slips
    in the two headings are opposite.
    """
    dx, dy = pose_k1.x - pose_k.x, pose_k1.y - pose_k.y
    c0, s0 = math.cos(pose_k.theta), math.sin(pose_k.theta)
    c1, s1 = math.cos(pose_k1.theta), math.sin(pose_k1.theta)
    return ((dx * c0 + dy * s0) - (dx * c1 + dy * s1),
            (-dx * s0 + dy * c0) - (dx * s1 - dy * c1))


def discrete_lagrangian_se2(pose_k: PoseSE2, pose_k1: PoseSE2, params: SleighParams) -> float:
    m, a, b = params.m, params.a, params.b
    dx, dy = pose_k1.x - pose_k.x, pose_k1.y - pose_k.y
    dth = pose_k1.theta - pose_k.theta
    dc = math.cos(pose_k1.theta) - math.cos(pose_k.theta)
    ds = math.sin(pose_k1.theta) - math.sin(pose_k.theta)
    return (0.5 * m * (dx * dx + dy * dy) + params.J_contact * (1.0 - math.cos(dth))
            + a * m * (ds * dy + dc * dx) + b * m * (dc * dy - ds * dx))


def discrete_momentum_se2(d, params: SleighParams) -> SleighMomentum:
    dtheta, V1, V2 = d
    m, a, b = params.m, params.a, params.b
    s, omc = math.sin(dtheta), 1.0 - math.cos(dtheta)
    am, bm = a * m, b * m
    return SleighMomentum(params.J_contact * s + am * V2 - bm * V1,
                          m * V1 - am * omc - bm * s,
                          m * V2 + am * s - bm * omc)


# ---------------------------------------------------------------------------
# momentum surface for b = 0

def _require_b0(params):
    if params.b != 0.0:
        raise DomainError("the cubic momentum surface is defined for b = 0 only")


def hat_coords(P, dtheta: float, params: SleighParams) -> HatCoords:
    a, m = params.a, params.m
    return HatCoords(float(P[0]), a * float(P[1]) + 2.0 * m * a * a, math.sin(dtheta))


def cubic_coefficients(p_theta: float, p_hat1: float, params: SleighParams):
    """Ascending coefficients ``[c0, c1, c2, c3]`` of the cubic in ``z = sin(dtheta)``."""
    _require_b0(params)
    J = params.J
    return [-2.0 * p_theta * p_hat1,
            p_hat1 * p_hat1 + 2.0 * J * p_hat1 + p_theta * p_theta,
            -2.0 * J * p_theta,
            J * J]


def cubic_residual(h: HatCoords, params: SleighParams) -> float:
    c0, c1, c2, c3 = cubic_coefficients(h.p_theta, h.p_hat1, params)
    z = h.z
    return ((c3 * z + c2) * z + c1) * z + c0


def ellipse_residual(p_theta: float, p_hat1: float, params: SleighParams) -> float:
    """Negative inside the curve where V1 = 0, positive outside, zero on it."""
    ma2 = params.m * params.a * params.a
    if ma2 == 0.0:
        raise DomainError("the V1 = 0 ellipse degenerates for a = 0")
    return (p_theta / (params.J + ma2)) ** 2 + ((p_hat1 - ma2) / ma2) ** 2 - 1.0


def discriminant_curve(p_theta: float, p_hat1: float, params: SleighParams) -> float:
    J = params.J
    y, x = p_hat1, p_theta
    return (y ** 4 + 6 * J * y ** 3 + y * y * (12 * J * J + 2 * x * x)
            - y * (10 * J * x * x - 8 * J ** 3) + x ** 4 - J * J * x * x)


def _cos_from_root(z, p_theta, p_hat1, J):
    # on the surface, J z^2 - p_theta z + p_hat1 (1 - cos) = 0
    if p_hat1 == 0.0:
        return math.nan
    return 1.0 + (J * z * z - p_theta * z) / p_hat1


def surface_classify(p_theta: float, p_hat1: float, params: SleighParams) -> SurfaceClass:
    _require_b0(params)
    J = params.J
    u, v = -p_hat1 + p_theta, -p_hat1 - p_theta
    if u > J and v > J:
        quadrant, cos_sign = "L++", 1
    elif u < J and v < J:
        quadrant, cos_sign = "L--", 1
    elif u > J:
        quadrant, cos_sign = "L+-", -1
    else:
        quadrant, cos_sign = "L-+", -1
    roots = real_roots_cubic(cubic_coefficients(p_theta, p_hat1, params))
    n = sum(1 for z, _ in roots if abs(z) <= 1.0 + 1e-12)
    ell = ellipse_residual(p_theta, p_hat1, params) if params.a != 0.0 else math.nan
    return SurfaceClass(quadrant, cos_sign, discriminant_curve(p_theta, p_hat1, params), n, ell)


# ---------------------------------------------------------------------------
# free (unconstrained) map

def sleigh_free_step(d, P, params: Optional[SleighParams] = None) -> SleighMomentum:
    """Momentum after one unconstrained step: the coadjoint action of the displacement."""
    return SleighMomentum(*coad_se2(d, P))


def free_inverse(P, params: SleighParams, near: float = 0.0) -> SleighDisplacement:
    """Unconstrained displacement whose discrete momentum is ``P``.

    Eliminating the slides gives ``J sin(dtheta) = p_theta - a p2 + b p1``;
    of the two angles with that sine the one closer to ``near`` is returned.
    """
    pt, p1, p2 = (float(v) for v in P)
    m, a, b, J = params.m, params.a, params.b, params.J
    s = (pt - a * p2 + b * p1) / J
    if abs(s) > 1.0:
        raise BranchFailure("no real displacement for this momentum", {"sin": s, "P": (pt, p1, p2)})
    base = math.asin(s)
    cands = [base, wrap_angle(math.pi - base)]
    dth = min(cands, key=lambda t: abs(wrap_angle(t - near)))
    c = math.cos(dth)
    V1 = (p1 + a * m * (1.0 - c) + b * m * s) / m
    V2 = (p2 - a * m * s + b * m * (1.0 - c)) / m
    return SleighDisplacement(dth, V1, V2)


# ---------------------------------------------------------------------------
# constrained step

def _step_system(pt_next, p1_next, params: SleighParams):
    m, a, b, Jc = params.m, params.a, params.b, params.J_contact
    am, bm = a * m, b * m
    lim = math.pi - _POLE_MARGIN

    def G(th, V1):
        if not abs(th) < lim:
            return (math.nan, math.nan)
        s, c = math.sin(th), math.cos(th)
        t = math.tan(0.5 * th)
        return (Jc * s + (am * t - bm) * V1 - pt_next,
                m * V1 - am * (1.0 - c) - bm * s - p1_next)

    def jac(th, V1):
        s, c = math.sin(th), math.cos(th)
        ch = math.cos(0.5 * th)
        return ((Jc * c + am * V1 / (2.0 * ch * ch), am * math.tan(0.5 * th) - bm),
                (-am * s - bm * c, m))

    def reduced(th):
        # G1 with V1 eliminated through G2; vectorized over th
        s, c = np.sin(th), np.cos(th)
        V1 = (p1_next + am * (1.0 - c) + bm * s) / m
        return Jc * s + (am * np.tan(0.5 * th) - bm) * V1 - pt_next

    def v1_of(th):
        return (p1_next + am * (1.0 - math.cos(th)) + bm * math.sin(th)) / m

    return G, jac, reduced, v1_of


_GRID = np.linspace(-math.pi, math.pi, 1441)[1:-1]


def _angle_seeds(pt_next, p1_next, params, reduced):
    seeds = []
    if params.b == 0.0 and params.a != 0.0:
        p_hat1 = params.a * p1_next + 2.0 * params.m * params.a ** 2
        for z, _ in real_roots_cubic(cubic_coefficients(pt_next, p_hat1, params)):
            if abs(z) > 1.0:
                continue
            base = math.asin(max(-1.0, min(1.0, z)))
            c = _cos_from_root(z, pt_next, p_hat1, params.J)
            seeds.append(base if not c < 0 else wrap_angle(math.pi - base))
    g = reduced(_GRID)
    sgn = np.sign(g)
    idx = np.nonzero(sgn[:-1] * sgn[1:] <= 0)[0]
    for i in idx:
        # skip the jump through the pole of tan at +-pi (never inside the grid) and
        # sign flips caused by huge values on both sides
        if abs(g[i]) + abs(g[i + 1]) < 1e6:
            seeds.append(0.5 * (_GRID[i] + _GRID[i + 1]))
    return seeds


@dataclass(frozen=True)
class SleighStep:
    d_next: SleighDisplacement
    P: SleighMomentum
    P_next: SleighMomentum
    multiplier: float
    roots: list = field(default_factory=list)
    residual: float = 0.0
    iterations: int = 0
    branch: str = ""

    @property
    def root_count(self) -> int:
        return len(self.roots)


def _choose(roots, current, policy, root_index):
    if root_index is not None:
        ordered = sorted(range(len(roots)), key=lambda i: roots[i][0])
        if not -len(roots) <= root_index < len(roots):
            raise BranchFailure(f"root index {root_index} out of range", {"roots": roots})
        return ordered[root_index]
    if policy is BranchPolicy.CONTINUITY:
        return min(range(len(roots)), key=lambda i: (abs(roots[i][0] - current), i))
    zs = [abs(math.sin(r[0])) for r in roots]
    if policy is BranchPolicy.SMALLEST:
        return min(range(len(roots)), key=lambda i: (zs[i], abs(roots[i][0])))
    return max(range(len(roots)), key=lambda i: (zs[i], -abs(roots[i][0])))


def _solve_displacement(pt_next, p1_next, params, seed, policy, cfg, root_index=None):
    G, jac, reduced, v1_of = _step_system(pt_next, p1_next, params)
    seeds = [tuple(seed)] + [(th, v1_of(th)) for th in _angle_seeds(pt_next, p1_next, params, reduced)]
    roots, outcomes = [], []
    for s in seeds:
        res = newton2(G, s, jac=jac, cfg=cfg)
        if not res.converged:
            continue
        th, V1 = float(res.x[0]), float(res.x[1])
        if any(abs(th - r[0]) <= cfg.dedupe_radius for r in roots):
            continue
        roots.append((th, V1))
        outcomes.append(res)
    if not roots:
        raise BranchFailure("no admissible real displacement for the updated momentum",
                            {"p_theta": pt_next, "p1": p1_next, "seeds": seeds})
    i = _choose(roots, seed[0], policy, root_index)
    order = sorted(range(len(roots)), key=lambda k: roots[k])
    return roots[i], [roots[k] for k in order], outcomes[i]


def displacement_from_momentum(p_theta: float, p1: float, params: SleighParams,
                               policy: BranchPolicy = BranchPolicy.CONTINUITY,
                               near: float = 0.0, cfg: Optional[NewtonConfig] = None) -> SleighDisplacement:
    """Admissible displacement whose discrete momenta are ``(p_theta, p1)``."""
    cfg = cfg or NewtonConfig()
    policy = BranchPolicy.parse(policy)
    if params.a == 0.0:
        # J' sin(dtheta) - b m V1 = p_theta and m V1 - b m sin(dtheta) = p1 decouple
        s = (p_theta + params.b * p1) / params.J
        if abs(s) > 1.0:
            raise BranchFailure("no real displacement for this momentum", {"sin": s})
        base = math.asin(s)
        th = min((base, wrap_angle(math.pi - base)), key=lambda t: abs(t - near))
        return SleighDisplacement.admissible(th, (p1 + params.b * params.m * math.sin(th)) / params.m)
    seed = (near, p1 / params.m)
    (th, V1), _, _ = _solve_displacement(p_theta, p1, params, seed, policy, cfg)
    return SleighDisplacement.admissible(th, V1)


def sleigh_step(d, params: SleighParams, policy: BranchPolicy = BranchPolicy.CONTINUITY,
                P=None, cfg: Optional[NewtonConfig] = None, root_index: Optional[int] = None,
                direction: int = 1) -> SleighStep:
    """One step of the constrained discrete sleigh.

    ``d`` must satisfy the constraint. ``P`` defaults to the discrete
    momentum of ``d``; passing the previous ``P_next`` carries the exact
    momentum update along a trajectory. The returned ``P_next`` holds the
    updated ``(p_theta, p1)`` and the third component of the new
    displacement's momentum; ``multiplier`` is the jump in that component
    relative to the coadjoint image.

    ``direction=-1`` runs the inverse map by conjugating with
    ``(dtheta, V1) -> (-dtheta, -V1)``, the inverse displacement.
    """
    cfg = cfg or NewtonConfig()
    policy = BranchPolicy.parse(policy)
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    d = SleighDisplacement(*(float(v) for v in d))
    res = constraint_residual(d)
    if abs(res) > 1e-10 * max(1.0, abs(d.V1)):
        raise ConstraintViolation(f"displacement violates the constraint (residual {res:.3g})")
    if direction == -1:
        inv = SleighDisplacement.admissible(-d.dtheta, -d.V1)
        st = sleigh_step(inv, params, policy, None, cfg, root_index, 1)
        d_next = SleighDisplacement.admissible(-st.d_next.dtheta, -st.d_next.V1)
        P = discrete_momentum_se2(d, params)
        P_next = discrete_momentum_se2(d_next, params)
        return SleighStep(d_next, P, P_next, st.multiplier, st.roots, st.residual, st.iterations, st.branch)

    P = SleighMomentum(*P) if P is not None else discrete_momentum_se2(d, params)
    m, a = params.m, params.a
    pt_next = P.p_theta - 2.0 * a * m * d.V2
    p1_next = P.p1 + 2.0 * a * m * (1.0 - math.cos(d.dtheta))
    coad = coad_se2(d, P)
    if a == 0.0:
        d_next, roots, resid, its = d, [(d.dtheta, d.V1)], 0.0, 0
    else:
        (th, V1), roots, outcome = _solve_displacement(
            pt_next, p1_next, params, (d.dtheta, d.V1), policy, cfg, root_index)
        if th == d.dtheta and V1 == d.V1:
            d_next = d
        else:
            d_next = SleighDisplacement.admissible(th, V1)
        resid, its = outcome.residual, outcome.iterations
    p2_next = discrete_momentum_se2(d_next, params).p2
    P_next = SleighMomentum(pt_next, p1_next, p2_next)
    tag = f"index:{root_index}" if root_index is not None else policy.value
    return SleighStep(d_next, P, P_next, float(p2_next - coad[2]), roots, float(resid), int(its), tag)


def sleigh_naive_step(d, params: SleighParams, cfg: Optional[NewtonConfig] = None) -> SleighStep:
    """Step under the rejected constraint ``V2 = 0``, continuing the branch nearest ``dtheta``."""
    cfg = cfg or NewtonConfig()
    d = SleighDisplacement(float(d[0]), float(d[1]), 0.0)
    P = discrete_momentum_se2(d, params)
    pt_next, p1_next, _ = coad_se2(d, P)
    m, a, b, Jc = params.m, params.a, params.b, params.J_contact
    am, bm = a * m, b * m

    def G(th, V1):
        return (Jc * math.sin(th) - bm * V1 - pt_next,
                m * V1 - am * (1.0 - math.cos(th)) - bm * math.sin(th) - p1_next)

    def jac(th, V1):
        return ((Jc * math.cos(th), -bm), (-am * math.sin(th) - bm * math.cos(th), m))

    res = newton2(G, (d.dtheta, d.V1), jac=jac, cfg=cfg)
    if not res.converged:
        raise BranchFailure("naive step did not converge", {"message": res.message})
    d_next = SleighDisplacement(wrap_angle(float(res.x[0])), float(res.x[1]), 0.0)
    P_next = discrete_momentum_se2(d_next, params)
    coad = coad_se2(d, P)
    return SleighStep(d_next, P, P_next, float(P_next.p2 - coad[2]), [(d_next.dtheta, d_next.V1)],
                      float(res.residual), int(res.iterations), "naive")


def reconstruct_discrete(pose0: PoseSE2, displacements: Sequence) -> list:
    """Poses ``X_{k+1} = X_k Omega_k`` starting from ``pose0``."""
    poses = [PoseSE2(wrap_angle(pose0[0]), float(pose0[1]), float(pose0[2]))]
    for d in displacements:
        poses.append(se2_compose(poses[-1], PoseSE2(*d)))
    return poses


def contact_circle(pose: PoseSE2, d) -> tuple:
    """Centre and radius ``V1 / sin(dtheta)`` of the circle the contact point follows."""
    dtheta, V1 = float(d[0]), float(d[1])
    if math.sin(dtheta) == 0.0:
        raise DomainError("straight-line displacement has no finite circle")
    rho = V1 / math.sin(dtheta)
    return (pose.x - rho * math.sin(pose.theta), pose.y + rho * math.cos(pose.theta), rho)


def radial_deviations(poses: Sequence, center, rho: float) -> list:
    """Signed distance of each contact point from the circle ``|x - center| = |rho|``."""
    cx, cy = center
    return [math.hypot(p.x - cx, p.y - cy) - abs(rho) for p in poses]


def local_radii(poses: Sequence) -> list:
    """Circumradius of each triple of consecutive contact points (inf when collinear)."""
    out = []
    for p0, p1, p2 in zip(poses, poses[1:], poses[2:]):
        a = math.hypot(p1.x - p0.x, p1.y - p0.y)
        b = math.hypot(p2.x - p1.x, p2.y - p1.y)
        c = math.hypot(p2.x - p0.x, p2.y - p0.y)
        area2 = abs((p1.x - p0.x) * (p2.y - p0.y) - (p1.y - p0.y) * (p2.x - p0.x))
        out.append(math.inf if area2 == 0.0 else a * b * c / (2.0 * area2))
    return out


# ---------------------------------------------------------------------------
# asymptotics

@dataclass(frozen=True)
class AsymptoticsReport:
    steps: int
    energy: float
    energy_drift: float
    min_forward_p1_increment: float
    p_theta_sign_constant: bool
    forward_limit: tuple
    backward_limit: tuple
    forward_stable: bool
    backward_unstable: bool

    @property
    def ok(self) -> bool:
        return (self.min_forward_p1_increment >= 0.0 and self.p_theta_sign_constant
                and self.forward_stable and self.backward_unstable)


def sleigh_asymptotics_check(p_theta: float, p1: float, params: SleighParams, steps: int = 10_000,
                             tol: float = 1e-6, cfg: Optional[NewtonConfig] = None) -> AsymptoticsReport:
    """Run the b = 0 map both ways from ``(p_theta, p1)`` and summarise the limits.

    The forward limit should sit on ``{p_theta = 0, 0 < p1 < m a}`` and the
    backward limit on ``{p_theta = 0, -m a < p1 < 0}`` with ``|p_theta| < tol``.
    """
    if params.b != 0.0 or not params.a > 0:
        raise DomainError("asymptotics are stated for b = 0 and a > 0")
    E0 = sleigh_energy(p_theta, p1, params)
    if not E0 < energy_bound(params):
        raise DomainError(f"energy {E0!r} is not below the single-valued bound {energy_bound(params)!r}")
    d0 = displacement_from_momentum(p_theta, p1, params, cfg=cfg)
    sign0 = math.copysign(1.0, p_theta) if p_theta != 0 else 0.0
    same_sign = True
    drift = 0.0
    min_inc = math.inf
    ma = params.m * params.a

    d, P = d0, SleighMomentum(p_theta, p1, discrete_momentum_se2(d0, params).p2)
    for _ in range(steps):
        st = sleigh_step(d, params, P=P, cfg=cfg)
        min_inc = min(min_inc, st.P_next.p1 - P.p1)
        d, P = st.d_next, st.P_next
        if sign0 and P.p_theta != 0 and math.copysign(1.0, P.p_theta) != sign0:
            same_sign = False
        drift = max(drift, abs(sleigh_energy(P.p_theta, P.p1, params) - E0))
    fwd = (P.p_theta, P.p1)

    d = d0
    for _ in range(steps):
        st = sleigh_step(d, params, direction=-1, cfg=cfg)
        d = st.d_next
        Pb = st.P_next
        if sign0 and Pb.p_theta != 0 and math.copysign(1.0, Pb.p_theta) != sign0:
            same_sign = False
        drift = max(drift, abs(sleigh_energy(Pb.p_theta, Pb.p1, params) - E0))
    bwd = (Pb.p_theta, Pb.p1)
    rel = drift / E0 if E0 else drift
    return AsymptoticsReport(
        steps, E0, rel, min_inc, same_sign, fwd, bwd,
        abs(fwd[0]) < tol and 0.0 < fwd[1] < ma,
        abs(bwd[0]) < tol and -ma < bwd[1] < 0.0)
