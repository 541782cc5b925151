"""Suslov rigid body: continuous flow on so*(3) and the discrete map on RP^2.

The continuous half integrates the momentum equation of a rigid body whose
angular velocity is orthogonal to a body-fixed covector ``gamma``.

The discrete half works with finite rotations about axes in the e1-e2
plane, parameterized by canonical points ``(q0, q1, q2)`` of RP^2. One
step transports the first two momentum components by the coadjoint action,
inverts the momentum parameterization for the new rotation, and
recomputes the third component; the constraint multiplier absorbs the
difference. A quadratic form in ``(M1, M2)`` is conserved exactly and the
orbits drift from an unstable to a stable half of the stationary line
``J13 q1 + J23 q2 = 0``.

Momentum vectors follow ``M = (-M23, M13, -M12)`` for the skew matrix
``M = Omega J - J Omega^T``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Optional

import numpy as np

from .errors import BranchFailure, DomainError, InvalidConfiguration
from .liegroup import AdmissibleRotationParam, admissible_rotation_so3, vee3
from .policy import BranchPolicy
from .rootfind import NewtonConfig, multistart, polyval

__all__ = [
    "MassTensor",
    "InertiaOperator",
    "CalCoords",
    "EquilibriumKind",
    "SuslovDiscreteState",
    "SuslovStep",
    "suslov_rhs",
    "suslov_rhs_multiplier",
    "suslov_rk4_step",
    "suslov_energy",
    "suslov_degenerate_integral",
    "suslov_reduced_energy",
    "euler_angle_matrix",
    "discrete_lagrangian_trace",
    "discrete_lagrangian_so3",
    "discrete_lagrangian_euler_angles",
    "discrete_lagrangian_euler_angles_printed",
    "momentum_from_q",
    "momentum_matrix_form",
    "coadjoint_momentum_from_q",
    "steiner_residual",
    "chordal_distance",
    "default_seeds",
    "resultant_candidates",
    "solve_sys",
    "suslov_step",
    "suslov_quadratic_integral",
    "suslov_quartic_integral",
    "stationary_defect",
    "q_form",
    "cal_coords",
    "cal_monotonicity_increment",
    "classify_equilibrium",
]


# ---------------------------------------------------------------------------
# parameters

@dataclass(frozen=True)
class MassTensor:
    """Symmetric mass tensor J of the discrete top.

    Construction checks that ``[[J22+J33, -J12], [-J12, J11+J33]]`` is
    positive definite; the root-count bound of the discrete map relies on it.
    """

    J11: float
    J22: float
    J33: float
    J12: float = 0.0
    J13: float = 0.0
    J23: float = 0.0

    def __post_init__(self):
        vals = (self.J11, self.J22, self.J33, self.J12, self.J13, self.J23)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidConfiguration("mass tensor entries must be finite")
        a, b = self.J22 + self.J33, self.J11 + self.J33
        if not (a > 0 and a * b - self.J12 ** 2 > 0):
            raise InvalidConfiguration(
                "the form [[J22+J33, -J12], [-J12, J11+J33]] must be positive definite")

    @classmethod
    def diagonal(cls, J1, J2, J3):
        return cls(J1, J2, J3)

    @classmethod
    def from_matrix(cls, m):
        m = np.asarray(m, dtype=float)
        if m.shape != (3, 3) or np.max(np.abs(m - m.T)) > 1e-12:
            raise InvalidConfiguration("mass tensor must be a symmetric 3x3 matrix")
        return cls(m[0, 0], m[1, 1], m[2, 2], m[0, 1], m[0, 2], m[1, 2])

    def matrix(self) -> np.ndarray:
        return np.array([[self.J11, self.J12, self.J13],
                         [self.J12, self.J22, self.J23],
                         [self.J13, self.J23, self.J33]])

    @property
    def is_balanced(self) -> bool:
        return self.J13 == 0.0 and self.J23 == 0.0

    @property
    def is_diagonal(self) -> bool:
        return self.J12 == 0.0 and self.J13 == 0.0 and self.J23 == 0.0

    def inertia(self) -> "InertiaOperator":
        """Inertia operator of the body, ``I w = J w + w J`` read on vectors."""
        m = self.matrix()
        return InertiaOperator(np.trace(m) * np.eye(3) - m)


@dataclass(frozen=True, eq=False)
class InertiaOperator:
    """Symmetric positive definite inertia operator on R^3."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.shape != (3, 3) or not np.all(np.isfinite(m)):
            raise InvalidConfiguration("inertia operator must be a finite 3x3 matrix")
        if np.max(np.abs(m - m.T)) > 1e-12 * max(1.0, np.max(np.abs(m))):
            raise InvalidConfiguration("inertia operator must be symmetric")
        try:
            np.linalg.cholesky(m)
        except np.linalg.LinAlgError:
            raise InvalidConfiguration("inertia operator must be positive definite") from None
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def diag(cls, I1, I2, I3):
        return cls(np.diag([float(I1), float(I2), float(I3)]))

    @property
    def is_diagonal(self) -> bool:
        m = self.matrix
        return m[0, 1] == 0.0 and m[0, 2] == 0.0 and m[1, 2] == 0.0

    def inv(self, v) -> np.ndarray:
        return np.linalg.solve(self.matrix, np.asarray(v, dtype=float))


class CalCoords(NamedTuple):
    cal_M1: float
    cal_M2: float


class EquilibriumKind(str, Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    # on the stationary line where the stability form also vanishes
    STATIONARY = "stationary"
    NON_EQUILIBRIUM = "non-equilibrium"


# ---------------------------------------------------------------------------
# continuous Suslov problem

def _check_gamma(gamma):
    g = np.asarray(gamma, dtype=float)
    if g.shape != (3,) or not np.all(np.isfinite(g)) or not np.linalg.norm(g) > 0:
        raise InvalidConfiguration("gamma must be a finite nonzero 3-vector")
    return g


def suslov_rhs(M, I: InertiaOperator, gamma, check: bool = True) -> np.ndarray:
    """Time derivative of the body momentum ``M = I w`` under ``(w, gamma) = 0``.

    Coded as ``(M, gamma) / (gamma, I^{-1} gamma) * (I^{-1} gamma x w)``,
    which equals the multiplier form on the constraint surface.
    """
    g = _check_gamma(gamma)
    M = np.asarray(M, dtype=float)
    w = I.inv(M)
    if check:
        defect = abs(w @ g)
        if defect > 1e-8 * max(1.0, np.linalg.norm(w)) * np.linalg.norm(g):
            raise DomainError(f"angular velocity violates the constraint: (w, gamma) = {defect:.3g}")
    ig = I.inv(g)
    return (M @ g) / (g @ ig) * np.cross(ig, w)


def suslov_rhs_multiplier(M, I: InertiaOperator, gamma) -> np.ndarray:
    """The same vector field written as ``M x w + lambda gamma``."""
    g = _check_gamma(gamma)
    M = np.asarray(M, dtype=float)
    w = I.inv(M)
    ig = I.inv(g)
    lam = -(np.cross(M, w) @ ig) / (g @ ig)
    return np.cross(M, w) + lam * g


def suslov_rk4_step(M, I: InertiaOperator, gamma, dt: float) -> np.ndarray:
    if not dt > 0:
        raise ValueError("dt must be positive")
    f = lambda y: suslov_rhs(y, I, gamma, check=False)  # noqa: E731
    M = np.asarray(M, dtype=float)
    k1 = f(M)
    k2 = f(M + 0.5 * dt * k1)
    k3 = f(M + 0.5 * dt * k2)
    k4 = f(M + dt * k3)
    return M + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def suslov_energy(M, I: InertiaOperator) -> float:
    M = np.asarray(M, dtype=float)
    return float(M @ I.inv(M))


def suslov_degenerate_integral(M, I_diag, gamma) -> float:
    """Degenerate quadratic integral for a diagonal inertia operator.

    On the constraint plane ``(M, I^{-1} gamma) = 0`` this equals the energy
    ``(M, I^{-1} M)`` times ``I2 I3 g1^2 + I1 I3 g2^2 + I1 I2 g3^2``.
    """
    if isinstance(I_diag, InertiaOperator):
        if not I_diag.is_diagonal:
            raise DomainError("the degenerate integral needs a diagonal inertia operator")
        I1, I2, I3 = np.diag(I_diag.matrix)
    else:
        I1, I2, I3 = (float(v) for v in I_diag)
    g1, g2, g3 = _check_gamma(gamma)
    Ih = np.array([
        [I2 * g3 * g3 + I3 * g2 * g2, -I3 * g1 * g2, -I2 * g1 * g3],
        [-I3 * g1 * g2, I1 * g3 * g3 + I3 * g1 * g1, -I1 * g2 * g3],
        [-I2 * g1 * g3, -I1 * g2 * g3, I1 * g2 * g2 + I2 * g1 * g1],
    ])
    M = np.asarray(M, dtype=float)
    return float(M @ Ih @ M)


def suslov_reduced_energy(M, I: InertiaOperator) -> float:
    """Reduced constrained energy for ``gamma = e3``."""
    m = I.matrix
    M1, M2 = float(M[0]), float(M[1])
    return m[1, 1] * M1 * M1 - 2.0 * m[0, 1] * M1 * M2 + m[0, 0] * M2 * M2


# ---------------------------------------------------------------------------
# discrete Lagrangians

def euler_angle_matrix(phi, theta, psi) -> np.ndarray:
    cf, sf = math.cos(phi), math.sin(phi)
    ct, st = math.cos(theta), math.sin(theta)
    cp, sp = math.cos(psi), math.sin(psi)
    return np.array([
        [cf * cp - ct * sf * sp, -cf * sp - ct * sf * cp, st * sf],
        [sf * cp + ct * cf * sp, -sf * sp + ct * cf * cp, -st * cf],
        [st * sp, st * cp, ct],
    ])


def discrete_lagrangian_trace(Omega, J) -> float:
    """``1/2 tr(Omega J)`` for any rotation ``Omega``."""
    Jm = J.matrix() if isinstance(J, MassTensor) else np.asarray(J, dtype=float)
    return 0.5 * float(np.trace(np.asarray(Omega, dtype=float) @ Jm))


def discrete_lagrangian_so3(p: AdmissibleRotationParam, J: MassTensor) -> float:
    return discrete_lagrangian_trace(admissible_rotation_so3(p), J)


def discrete_lagrangian_euler_angles(angles_k, angles_k1, A1, A2, A3) -> float:
    """``1/2 tr(R_k J R_{k+1}^T)`` in Euler angles ``(phi, theta, psi)``.

    ``A1 = J2 + J3``, ``A2 = J1 + J3``, ``A3 = J1 + J2`` are the principal
    moments of inertia of a diagonal mass tensor.
    """
    f0, t0, p0 = angles_k
    f1, t1, p1 = angles_k1
    c0, c1 = math.cos(t0), math.cos(t1)
    ss = math.sin(t0) * math.sin(t1)
    cdf, sdf = math.cos(f1 - f0), math.sin(f1 - f0)
    cdp, sdp = math.cos(p1 - p0), math.sin(p1 - p0)
    csp, ssp = math.cos(p0 + p1), math.sin(p0 + p1)
    cc = c0 * c1
    b1 = cc * (1 + cdf * csp) + ss * (csp + cdf) - cdf * csp + (c1 - c0) * sdf * ssp
    b2 = cc * (1 - cdf * csp) + ss * (cdf - csp) + cdf * csp - (c1 - c0) * sdf * ssp
    b3 = cdf * cdp * (1 + cc) - cc + ss * (cdp - cdf) - (c0 + c1) * sdf * sdp
    return 0.25 * (A1 * b1 + A2 * b2 + A3 * b3)


def discrete_lagrangian_euler_angles_printed(angles_k, angles_k1, A1, A2, A3) -> float:
    """Euler-angle Lagrangian exactly as it is usually printed.

    Kept for comparison only: it is not a function of the relative
    rotation and does not reproduce the trace form.
    """
    f0, t0, p0 = angles_k
    f1, t1, p1 = angles_k1
    c0, c1 = math.cos(t0), math.cos(t1)
    ss = math.sin(t0) * math.sin(t1)
    cdf, sdf = math.cos(f1 - f0), math.sin(f1 - f0)
    cdp, sdp = math.cos(p1 - p0), math.sin(p1 - p0)
    csp, ssp = math.cos(p0 + p1), math.sin(p0 + p1)
    ssf = math.sin(f0 + f1)
    cc = c0 * c1
    b1 = (cc * (1 + cdf * csp) + csp * ss + cdf * (ss - csp)
          + 0.5 * (c1 - c0) * sdf * ssp)
    b2 = (cc + cdf * cdp - cc * cdf * cdp + cdf * ss - cdp * ss
          - c0 * ssf * sdp - c1 * sdf * ssp)
    b3 = cdf * cdp + cc * cdf * cdp - cc + ss * (cdp - cdf) - (c0 + c1) * sdf * sdp
    return 0.5 * (b1 * A1 + b2 * A2 - b3 * A3)


# ---------------------------------------------------------------------------
# discrete momentum

def _parts(q0, q1, q2, J: MassTensor):
    # shared pieces of the momentum and its coadjoint image; keeping them
    # common makes the two agree bitwise on the stationary line
    a1 = (J.J22 + J.J33) * q0 * q1 - J.J12 * q0 * q2
    a2 = (J.J11 + J.J33) * q0 * q2 - J.J12 * q0 * q1
    a3 = (J.J11 - J.J22) * q1 * q2 - J.J12 * (q1 * q1 - q2 * q2)
    L = J.J13 * q1 + J.J23 * q2
    return a1, a2, a3, L


def momentum_from_q(p: AdmissibleRotationParam, J: MassTensor) -> np.ndarray:
    q0, q1, q2 = p
    a1, a2, a3, L = _parts(q0, q1, q2, J)
    return 2.0 * np.array([a1 - L * q2, a2 + L * q1, a3 - L * q0])


def momentum_matrix_form(p: AdmissibleRotationParam, J: MassTensor) -> np.ndarray:
    """Vector of the skew matrix ``Omega J - J Omega^T`` (independent of :func:`momentum_from_q`)."""
    om = admissible_rotation_so3(p)
    Jm = J.matrix()
    # vee reads off (-M23, M13, -M12), the momentum vector convention
    return vee3(om @ Jm - Jm @ om.T)


def coadjoint_momentum_from_q(p: AdmissibleRotationParam, J: MassTensor) -> np.ndarray:
    """``Omega^T M`` for ``M = momentum_from_q(p, J)``, in closed form."""
    q0, q1, q2 = p
    a1, a2, a3, L = _parts(q0, q1, q2, J)
    return 2.0 * np.array([a1 + L * q2, a2 - L * q1, -a3 - L * q0])


def steiner_residual(M, J_diag) -> float:
    """Quartic whose zero set contains every momentum of a diagonal mass tensor."""
    if isinstance(J_diag, MassTensor):
        if not J_diag.is_diagonal:
            raise DomainError("steiner_residual needs a diagonal mass tensor")
        J1, J2, J3 = J_diag.J11, J_diag.J22, J_diag.J33
    else:
        J1, J2, J3 = (float(v) for v in J_diag)
    d12, s23, s13 = J1 - J2, J2 + J3, J1 + J3
    if d12 == 0.0 or s23 == 0.0 or s13 == 0.0:
        raise DomainError("degenerate mass tensor: need J1 != J2 and J_i + J_j != 0")
    M1, M2, M3 = (float(v) for v in M)
    return (d12 / (s23 * s13) * M1 * M1 * M2 * M2
            + s13 / (s23 * d12) * M1 * M1 * M3 * M3
            + s23 / (s13 * d12) * M2 * M2 * M3 * M3
            - 2.0 * M1 * M2 * M3)


# ---------------------------------------------------------------------------
# inverting the momentum map

def chordal_distance(a, b) -> float:
    """Distance on RP^2 between points given by their ``(q1, q2)`` disk coordinates."""
    a0 = math.sqrt(max(0.0, 1.0 - a[0] * a[0] - a[1] * a[1]))
    b0 = math.sqrt(max(0.0, 1.0 - b[0] * b[0] - b[1] * b[1]))
    d_plus = math.sqrt((a0 - b0) ** 2 + (a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2)
    d_minus = math.sqrt((a0 + b0) ** 2 + (a[0] + b[0]) ** 2 + (a[1] + b[1]) ** 2)
    return min(d_plus, d_minus)


def default_seeds():
    """Sixteen starting points covering the unit disk: the center and three rings of five."""
    seeds = [(0.0, 0.0)]
    for r, phase in ((0.4, 0.0), (0.75, 0.2 * math.pi), (0.95, 0.1 * math.pi)):
        for j in range(5):
            a = phase + 2.0 * math.pi * j / 5.0
            seeds.append((r * math.cos(a), r * math.sin(a)))
    return seeds


def _sys_functions(t1, t2, J: MassTensor):
    A, B, J12, J13, J23 = J.J22 + J.J33, J.J11 + J.J33, J.J12, J.J13, J.J23

    def F(x, y):
        s = 1.0 - x * x - y * y
        if s < 0.0:
            return (math.nan, math.nan)
        q0 = math.sqrt(s)
        L = J13 * x + J23 * y
        return (2.0 * ((A * x - J12 * y) * q0 - L * y) - t1,
                2.0 * ((B * y - J12 * x) * q0 + L * x) - t2)

    def jac(x, y):
        s = 1.0 - x * x - y * y
        q0 = math.sqrt(s) if s > 0.0 else 0.0
        if q0 == 0.0:
            return ((math.nan, math.nan), (math.nan, math.nan))
        L = J13 * x + J23 * y
        u = A * x - J12 * y
        v = B * y - J12 * x
        return ((2.0 * (A * q0 - u * x / q0 - J13 * y), 2.0 * (-J12 * q0 - u * y / q0 - J23 * y - L)),
                (2.0 * (-J12 * q0 - v * x / q0 + J13 * x + L), 2.0 * (B * q0 - v * y / q0 + J23 * x)))

    return F, jac


def _pmul(a, b):
    out = [0.0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _psub(a, b):
    n = max(len(a), len(b))
    a = list(a) + [0.0] * (n - len(a))
    b = list(b) + [0.0] * (n - len(b))
    return [x - y for x, y in zip(a, b)]


def _conic_matrices(t1, t2, J: MassTensor):
    """Symmetric matrices ``S`` with ``q^T S q = F_i(q) - t_i |q|^2`` for homogeneous ``q = (q0, q1, q2)``."""
    A, B, J12, J13, J23 = J.J22 + J.J33, J.J11 + J.J33, J.J12, J.J13, J.J23
    S1 = np.array([[-t1, A, -J12], [A, -t1, -J13], [-J12, -J13, -2.0 * J23 - t1]])
    S2 = np.array([[-t2, -J12, B], [-J12, 2.0 * J13 - t2, J23], [B, J23, -t2]])
    return S1, S2


# a second affine chart; roots near the q0 = 0 line of the first chart are at finite points here
_CHARTS = (np.eye(3),
           np.linalg.qr(np.array([[0.6, 0.3, -0.7], [0.5, -0.8, 0.2], [0.6, 0.5, 0.6]]))[0])


def _chart_candidates(S1, S2, R, cscale):
    """Common zeros of two conics in the chart ``w = R (1, u, v)``, as unit vectors."""
    conics = []
    T1, T2 = R.T @ S1 @ R, R.T @ S2 @ R
    Tl1, Tl2 = T1.tolist(), T2.tolist()
    for T in (T1, T2):
        # a v^2 + b(u) v + c(u), coefficients ascending in u
        conics.append(([T[2, 2]], [2 * T[0, 2], 2 * T[1, 2]], [T[0, 0], 2 * T[0, 1], T[1, 1]]))
    (a1, b1, c1), (a2, b2, c2) = conics
    r = _psub(_pmul(a1, c2), _pmul(a2, c1))
    s = _psub(_pmul(a1, b2), _pmul(a2, b1))
    t = _psub(_pmul(b1, c2), _pmul(b2, c1))
    res = _psub(_pmul(r, r), _pmul(s, t))
    scale = max(abs(c) for c in res)
    # the resultant is quartic in the conic coefficients
    if not scale > 1e-13 * cscale ** 4:
        return None
    res = [c / scale for c in res]
    deg = max((i for i, c in enumerate(res) if abs(c) > 1e-14), default=-1)
    if deg <= 0:
        return []
    out = []
    for u in np.roots(res[deg::-1]):
        if abs(u.imag) > 1e-6 * (1.0 + abs(u.real)):
            continue
        u = float(u.real)
        if abs(u) > 1e8:
            # far out in this chart; the other chart sees the point at finite coordinates
            continue
        vs = []
        sv, rv = polyval(s, u), polyval(r, u)
        if sv != 0.0:
            vs.append(-rv / sv)
        # the common root is also among the roots of either quadratic
        for qa, qb, qc in ((a1[0], polyval(b1, u), polyval(c1, u)), (a2[0], polyval(b2, u), polyval(c2, u))):
            if qa != 0.0:
                disc = qb * qb - 4 * qa * qc
                if disc >= 0.0:
                    d = math.sqrt(disc)
                    vs += [(-qb + d) / (2 * qa), (-qb - d) / (2 * qa)]
            elif qb != 0.0:
                vs.append(-qc / qb)
        for v in vs:
            if not abs(v) <= 1e8:
                continue
            z = np.array([1.0, u, v])
            if max(abs(z @ T1 @ z), abs(z @ T2 @ z)) > 1e-3 * cscale * (z @ z):
                continue
            z[1:] = _chart_polish(Tl1, Tl2, u, v)
            w = R @ z
            w /= np.linalg.norm(w)
            if max(abs(w @ S1 @ w), abs(w @ S2 @ w)) <= 1e-6 * cscale:
                out.append(w)
    return out


def _chart_polish(T1, T2, u, v, iters=4):
    """A few Newton steps on both chart conics ``z^T T z``, ``z = (1, u, v)``."""
    for _ in range(iters):
        z = (1.0, u, v)
        g1 = [sum(T1[i][k] * z[k] for k in range(3)) for i in range(3)]
        g2 = [sum(T2[i][k] * z[k] for k in range(3)) for i in range(3)]
        f1 = sum(z[i] * g1[i] for i in range(3))
        f2 = sum(z[i] * g2[i] for i in range(3))
        det = 2.0 * (g1[1] * g2[2] - g1[2] * g2[1])
        if det == 0.0 or not math.isfinite(det):
            break
        du = -(f1 * g2[2] - f2 * g1[2]) / det
        dv = -(g1[1] * f2 - g2[1] * f1) / det
        if not (abs(du) < 1e8 and abs(dv) < 1e8):
            break
        u, v = u + du, v + dv
    return u, v


def resultant_candidates(M1_target: float, M2_target: float, J: MassTensor):
    """Approximate common points of the two momentum conics, as disk coordinates.

    Both equations are quadratic forms on RP^2. In an affine chart they are
    quadratic in ``v``, and their Sylvester resultant is a quartic in ``u``.
    Each real root ``u`` gives candidate values of ``v``, kept when both
    conics nearly vanish. Two charts are used so that no root sits at
    infinity in both. Candidates are unpolished. Returns ``None`` when the
    resultant vanishes identically in a chart, in which case callers fall
    back to multistart.
    """
    t1, t2 = float(M1_target), float(M2_target)
    S1, S2 = _conic_matrices(t1, t2, J)
    cscale = max(np.max(np.abs(S1)), np.max(np.abs(S2)))
    out = []
    for R in _CHARTS:
        # points at infinity of a chart overflow harmlessly and are filtered out
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            cands = _chart_candidates(S1, S2, R, cscale)
        if cands is None:
            return None
        for w in cands:
            if w[0] < 0.0:
                w = -w
            cand = (float(w[1]), float(w[2]))
            if all(chordal_distance(cand, c) > 1e-9 for c in out):
                out.append(cand)
    return out


def _equator_roots(t1, t2, J: MassTensor, tol):
    """Roots with ``q0 = 0``, where the system reads ``2 L (-q2, q1) = (t1, t2)``."""
    if t1 == 0.0 and t2 == 0.0:
        if J.J13 == 0.0 and J.J23 == 0.0:
            return []
        phis = [math.atan2(-J.J13, J.J23)]
    else:
        phis = [math.atan2(-t1, t2)]
    out = []
    for phi in phis:
        x, y = math.cos(phi), math.sin(phi)
        if y < 0.0 or (y == 0.0 and x < 0.0):
            x, y = -x, -y
        L = J.J13 * x + J.J23 * y
        if max(abs(-2.0 * L * y - t1), abs(2.0 * L * x - t2)) <= tol:
            out.append((x, y))
    return out


def solve_sys(M1_target: float, M2_target: float, J: MassTensor, seeds=None,
              cfg: Optional[NewtonConfig] = None, *, method: str = "algebraic",
              with_report: bool = False):
    """All real ``(q1, q2)`` on the unit disk whose momentum has the given first two components.

    The unknowns are the disk coordinates of the upper-hemisphere
    representative, ``q0 = sqrt(1 - q1^2 - q2^2)``. Damped Newton is run from
    ``seeds`` and then from enumeration points: with ``method="algebraic"``
    these are the candidates of :func:`resultant_candidates`, with
    ``method="multistart"`` the sixteen points of :func:`default_seeds`.
    Roots are deduplicated by chordal distance on RP^2 and each has a
    residual below ``cfg.residual_tol``.

    When ``J13 = J23 = 0`` and the target is ``(0, 0)`` (both up to
    round-off) the whole equator
    ``q0 = 0`` solves the system; only the isolated root at the identity
    is returned then.
    """
    if not (math.isfinite(M1_target) and math.isfinite(M2_target)):
        raise ValueError("targets must be finite")
    if method not in ("algebraic", "multistart"):
        raise ValueError(f"unknown method {method!r}")
    cfg = cfg or NewtonConfig()
    F, jac = _sys_functions(float(M1_target), float(M2_target), J)
    scale = max(J.J11, J.J22, J.J33)
    if (max(abs(J.J13), abs(J.J23)) <= 1e-14 * scale
            and max(abs(M1_target), abs(M2_target)) <= cfg.residual_tol):
        res = multistart(F, [(0.0, 0.0)], jac=jac, cfg=cfg, distance=chordal_distance)
        roots = [(0.0, 0.0)]
        return (roots, res) if with_report else roots
    all_seeds = [tuple(s) for s in (seeds or [])]
    cands = resultant_candidates(M1_target, M2_target, J) if method == "algebraic" else None
    all_seeds += default_seeds() if cands is None else cands
    res = multistart(F, all_seeds, jac=jac, cfg=cfg, distance=chordal_distance)
    roots = [(float(r[0]), float(r[1])) for r in res.roots]
    # roots near q0 = 0 defeat Newton in disk coordinates; keep chart-polished candidates that are exact
    S1, S2 = _conic_matrices(float(M1_target), float(M2_target), J)
    extra = []
    for c in cands or []:
        w = np.array([math.sqrt(max(0.0, 1.0 - c[0] * c[0] - c[1] * c[1])), c[0], c[1]])
        if max(abs(w @ S1 @ w), abs(w @ S2 @ w)) <= cfg.residual_tol:
            extra.append(c)
    for e in extra + _equator_roots(float(M1_target), float(M2_target), J, cfg.residual_tol):
        if all(chordal_distance(e, r) > cfg.dedupe_radius for r in roots):
            roots.append(e)
    if with_report:
        return roots, res
    return roots


# ---------------------------------------------------------------------------
# discrete step

@dataclass(frozen=True)
class SuslovDiscreteState:
    p: AdmissibleRotationParam
    pose: Optional[np.ndarray] = None
    branch_history: tuple = ()

    def __post_init__(self):
        if not isinstance(self.p, AdmissibleRotationParam):
            object.__setattr__(self, "p", AdmissibleRotationParam.canonical(*self.p))
        if self.pose is not None:
            m = np.array(self.pose, dtype=float)
            m.setflags(write=False)
            object.__setattr__(self, "pose", m)


@dataclass(frozen=True)
class SuslovStep:
    state: SuslovDiscreteState
    M: np.ndarray
    coad: np.ndarray
    M_next: np.ndarray
    multiplier: float
    roots: list = field(default_factory=list)
    residual: float = 0.0
    iterations: int = 0
    branch: str = ""

    @property
    def root_count(self) -> int:
        return len(self.roots)

    @property
    def delta_M3(self) -> float:
        """Third-component jump ``M3_{k+1} - (Omega^T M)_3``; equals minus the multiplier."""
        return float(self.M_next[2] - self.coad[2])


def _select(roots, current, policy: BranchPolicy):
    if policy is BranchPolicy.CONTINUITY:
        key = lambda r: chordal_distance(r, current)  # noqa: E731
        return min(range(len(roots)), key=lambda i: key(roots[i]))
    norms = [r[0] * r[0] + r[1] * r[1] for r in roots]
    if policy is BranchPolicy.SMALLEST:
        return min(range(len(roots)), key=norms.__getitem__)
    return max(range(len(roots)), key=norms.__getitem__)


def _forward(state: SuslovDiscreteState, J, policy, cfg, method):
    p = state.p
    M = momentum_from_q(p, J)
    coad = coadjoint_momentum_from_q(p, J)
    roots, report = solve_sys(coad[0], coad[1], J, seeds=[(p.q1, p.q2)], cfg=cfg,
                              method=method, with_report=True)
    if not roots:
        raise BranchFailure(
            "no real solution for the next rotation",
            {"q": (p.q0, p.q1, p.q2), "targets": (float(coad[0]), float(coad[1])),
             "newton": [(o.x.tolist(), o.residual, o.message) for o in report.outcomes]})
    i = _select(roots, (p.q1, p.q2), policy)
    x, y = roots[i]
    if x == p.q1 and y == p.q2:
        p_next = p
    else:
        p_next = AdmissibleRotationParam.from_disk(x, y)
    M_next = momentum_from_q(p_next, J)
    M_next = np.array([coad[0], coad[1], M_next[2]])
    outcome = next(o for o in report.outcomes
                   if o.converged and chordal_distance(o.x, (x, y)) <= cfg.dedupe_radius)
    return p_next, M, coad, M_next, roots, outcome


def suslov_step(state: SuslovDiscreteState, J: MassTensor,
                policy: BranchPolicy = BranchPolicy.CONTINUITY,
                cfg: Optional[NewtonConfig] = None, direction: int = 1,
                method: str = "algebraic") -> SuslovStep:
    """Advance the discrete Suslov top by one step (``direction=-1`` steps backward).

    The backward step conjugates by the inversion ``(q0, q1, q2) -> (q0, -q1, -q2)``,
    which maps the rotation to its transpose. Raises :class:`BranchFailure`
    when the momentum equations have no real solution.
    """
    cfg = cfg or NewtonConfig()
    policy = BranchPolicy.parse(policy)
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    work = state if direction == 1 else SuslovDiscreteState(state.p.conjugate())
    p_next, M, coad, M_next, roots, outcome = _forward(work, J, policy, cfg, method)
    if direction == -1:
        p_next = p_next.conjugate()
    pose = None
    if state.pose is not None:
        om = admissible_rotation_so3(state.p if direction == 1 else p_next)
        pose = state.pose @ om if direction == 1 else state.pose @ om.T
    new_state = SuslovDiscreteState(p_next, pose, state.branch_history + (policy.value,))
    lam = float(coad[2] - M_next[2])
    return SuslovStep(new_state, M, coad, M_next, lam, roots,
                      float(outcome.residual), int(outcome.iterations), policy.value)


# ---------------------------------------------------------------------------
# integrals and stationary structure

def suslov_quadratic_integral(M, J: MassTensor) -> float:
    M1, M2 = float(M[0]), float(M[1])
    return ((J.J11 + J.J33) * M1 * M1 + 2.0 * J.J12 * M1 * M2 + (J.J22 + J.J33) * M2 * M2)


def suslov_quartic_integral(p: AdmissibleRotationParam, J: MassTensor) -> float:
    """Quartic H in ``(q0, q1, q2)``; the quadratic integral of the momentum is ``4 H``."""
    q0, q1, q2 = p
    form = (J.J22 + J.J33) * q1 * q1 - 2.0 * J.J12 * q1 * q2 + (J.J11 + J.J33) * q2 * q2
    L = J.J13 * q1 + J.J23 * q2
    D = (J.J11 + J.J33) * (J.J22 + J.J33) - J.J12 ** 2
    return form * (L * L + D * q0 * q0)


def stationary_defect(p, J: MassTensor) -> float:
    """``J13 q1 + J23 q2``; zero exactly on the stationary line."""
    q1, q2 = (p.q1, p.q2) if isinstance(p, AdmissibleRotationParam) else (p[1], p[2])
    return J.J13 * q1 + J.J23 * q2


def q_form(p, J: MassTensor) -> float:
    """Linear form whose sign separates stable (positive) from unstable stationary points."""
    q1, q2 = (p.q1, p.q2) if isinstance(p, AdmissibleRotationParam) else (p[1], p[2])
    return ((J.J12 * J.J13 + J.J22 * J.J23 + J.J23 * J.J33) * q1
            - (J.J11 * J.J13 + J.J12 * J.J23 + J.J13 * J.J33) * q2)


def cal_coords(M, J: MassTensor) -> CalCoords:
    """Coordinates in which one is sign-preserved and the other monotone along orbits."""
    M1, M2 = float(M[0]), float(M[1])
    c1 = (J.J13 * (J.J11 + J.J33) + J.J12 * J.J23) * M1 + (J.J23 * (J.J22 + J.J33) + J.J12 * J.J13) * M2
    c2 = J.J23 * M1 - J.J13 * M2
    return CalCoords(c1, c2)


def cal_monotonicity_increment(p, J: MassTensor) -> float:
    """Exact one-step increase of ``cal_coords(M).cal_M2``: ``4 (J13 q1 + J23 q2)^2``."""
    L = stationary_defect(p, J)
    return 4.0 * L * L


def classify_equilibrium(p, J: MassTensor, tol: float = 1e-10) -> EquilibriumKind:
    if abs(stationary_defect(p, J)) > tol:
        return EquilibriumKind.NON_EQUILIBRIUM
    s = q_form(p, J)
    if s > tol:
        return EquilibriumKind.STABLE
    if s < -tol:
        return EquilibriumKind.UNSTABLE
    return EquilibriumKind.STATIONARY
