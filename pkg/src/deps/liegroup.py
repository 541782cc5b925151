"""Exact kinematics on SO(3), SO(n) and SE(2).

Covers the hat/vee identification of R^3 with so(3), the Euler-Rodrigues
rotation matrix, the two-dimensional variety of admissible rotations (a
rotation about an axis in the e1-e2 plane, parameterized by RP^2), planar
poses and their helical displacements, the constrained exponential on
SE(2), and the coadjoint actions used by the discrete maps.

Angles are kept in (-pi, pi]. Vectors and matrices are plain numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConstraintViolation, InvalidAlgebraElement

__all__ = [
    "AdmissibleRotationParam",
    "PoseSE2",
    "HelicalDisplacement",
    "wrap_angle",
    "hat3",
    "vee3",
    "rotation_from_euler_rodrigues",
    "admissible_rotation_so3",
    "admissible_rotation_son",
    "log_admissible_so3",
    "se2_matrix",
    "pose_from_matrix",
    "se2_compose",
    "se2_inverse",
    "helical_displacement",
    "exp_d_se2",
    "coad_so3",
    "coad_se2",
]

ORTHO_TOL = 1e-12
INPUT_TOL = 1e-10
_SERIES_THRESHOLD = 1e-8


def wrap_angle(a: float) -> float:
    """Map an angle to (-pi, pi]."""
    r = math.remainder(float(a), 2.0 * math.pi)
    return math.pi if r <= -math.pi else r


@dataclass(frozen=True)
class AdmissibleRotationParam:
    """Point of RP^2 labelling a rotation about an axis in the e1-e2 plane.

    Stored as the canonical representative on the unit sphere: ``q0 >= 0``
    and, on the equator, the first nonzero of ``(q1, q2)`` positive. Use
    :meth:`canonical` to build one from an arbitrary nonzero triple.
    """

    q0: float
    q1: float
    q2: float

    def __post_init__(self):
        n = self.q0 ** 2 + self.q1 ** 2 + self.q2 ** 2
        if not math.isfinite(n) or abs(n - 1.0) > INPUT_TOL:
            raise ValueError(f"(q0, q1, q2) must be a unit vector, |q|^2 = {n!r}")
        if self.q0 < 0.0 or (self.q0 == 0.0 and _first_nonzero(self.q1, self.q2) < 0.0):
            raise ValueError("not the canonical representative; use AdmissibleRotationParam.canonical")

    @classmethod
    def canonical(cls, q0, q1, q2):
        v = np.array([q0, q1, q2], dtype=float)
        n = np.linalg.norm(v)
        if not n > 0.0:
            raise ValueError("zero vector does not define a point of RP^2")
        v /= n
        if v[0] < 0.0 or (v[0] == 0.0 and _first_nonzero(v[1], v[2]) < 0.0):
            v = -v
        return cls(float(v[0]), float(v[1]), float(v[2]))

    @classmethod
    def from_disk(cls, q1, q2):
        """Upper-hemisphere point over ``(q1, q2)``, with ``q0 = sqrt(1 - q1^2 - q2^2)``."""
        s = q1 * q1 + q2 * q2
        if s > 1.0 + INPUT_TOL:
            raise ValueError(f"(q1, q2) outside the unit disk: {s!r}")
        return cls.canonical(math.sqrt(max(0.0, 1.0 - s)), q1, q2)

    @classmethod
    def identity(cls):
        return cls(1.0, 0.0, 0.0)

    def conjugate(self):
        """Parameter of the inverse rotation (the transpose matrix)."""
        return type(self).canonical(self.q0, -self.q1, -self.q2)

    def as_array(self):
        return np.array([self.q0, self.q1, self.q2])

    def __iter__(self):
        return iter((self.q0, self.q1, self.q2))


def _first_nonzero(a, b):
    return a if a != 0.0 else b


class PoseSE2(NamedTuple):
    theta: float
    x: float
    y: float


class HelicalDisplacement(NamedTuple):
    """Body-frame increment X_k^{-1} X_{k+1}: rotation angle and translation."""

    dtheta: float
    t1: float
    t2: float


# ---------------------------------------------------------------------------
# so(3)

def hat3(v) -> np.ndarray:
    """Skew matrix with ``hat3(v) @ w == np.cross(v, w)``."""
    x, y, z = np.asarray(v, dtype=float)
    return np.array([[0.0, -z, y],
                     [z, 0.0, -x],
                     [-y, x, 0.0]])


def vee3(m, tol: float = INPUT_TOL) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.shape != (3, 3):
        raise InvalidAlgebraElement(f"expected a 3x3 matrix, got shape {m.shape}")
    asym = np.max(np.abs(m + m.T))
    if asym > tol:
        raise InvalidAlgebraElement(f"matrix is not skew-symmetric (|m + m^T| = {asym:.3g})")
    return np.array([m[2, 1] - m[1, 2], m[0, 2] - m[2, 0], m[1, 0] - m[0, 1]]) / 2.0


def rotation_from_euler_rodrigues(q) -> np.ndarray:
    """Rotation matrix of the Euler-Rodrigues parameters ``(q0, q1, q2, q3)``.

    Follows the sign layout used for the discrete Suslov top: the textbook
    unit-quaternion matrix of ``(q0, q1, q2, -q3)``. ``q`` and ``-q`` give
    the same rotation.
    """
    q0, q1, q2, q3 = (float(v) for v in q)
    n = q0 * q0 + q1 * q1 + q2 * q2 + q3 * q3
    if abs(n - 1.0) > INPUT_TOL:
        raise ValueError(f"Euler-Rodrigues parameters must have unit norm, got {n!r}")
    return np.array([
        [q0 * q0 + q1 * q1 - q2 * q2 - q3 * q3, 2 * (q1 * q2 + q3 * q0), -2 * (q1 * q3 - q2 * q0)],
        [2 * (q1 * q2 - q3 * q0), q0 * q0 + q2 * q2 - q1 * q1 - q3 * q3, -2 * (q2 * q3 + q0 * q1)],
        [-2 * (q1 * q3 + q2 * q0), -2 * (q2 * q3 - q0 * q1), q0 * q0 + q3 * q3 - q1 * q1 - q2 * q2],
    ])


def admissible_rotation_so3(p: AdmissibleRotationParam) -> np.ndarray:
    q0, q1, q2 = p
    return np.array([
        [2 * (q0 * q0 + q1 * q1) - 1, 2 * q1 * q2, 2 * q0 * q2],
        [2 * q1 * q2, 2 * (q0 * q0 + q2 * q2) - 1, -2 * q0 * q1],
        [-2 * q0 * q2, 2 * q0 * q1, 2 * q0 * q0 - 1],
    ])


def admissible_rotation_son(z) -> np.ndarray:
    """Admissible rotation of SO(n) for a point ``(z0, ..., z_{n-1})`` of the unit sphere.

    The upper (n-1)x(n-1) block is ``I - 2 z z^T``, the last column is
    ``2 z0 z`` with the opposite sign in the last row, and the corner is
    ``2 z0^2 - 1``.
    """
    z = np.asarray(z, dtype=float)
    n = z.size
    if n < 2:
        raise ValueError("need n >= 2")
    if abs(z @ z - 1.0) > INPUT_TOL:
        raise ValueError("z must lie on the unit sphere")
    z0, zs = z[0], z[1:]
    om = np.empty((n, n))
    om[:-1, :-1] = np.eye(n - 1) - 2.0 * np.outer(zs, zs)
    om[:-1, -1] = 2.0 * z0 * zs
    om[-1, :-1] = -2.0 * z0 * zs
    om[-1, -1] = 2.0 * z0 * z0 - 1.0
    return om


def log_admissible_so3(R, tol: float = 1e-8) -> AdmissibleRotationParam:
    """Recover the canonical RP^2 parameter of an admissible rotation.

    Raises :class:`ConstraintViolation` when ``R`` is not orthogonal with
    unit determinant, or is not symmetric in its upper 2x2 block and
    antisymmetric in the last row and column.
    """
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        raise ConstraintViolation(f"expected a 3x3 matrix, got shape {R.shape}")
    ortho = np.max(np.abs(R.T @ R - np.eye(3)))
    defect = max(abs(R[0, 1] - R[1, 0]), abs(R[0, 2] + R[2, 0]), abs(R[1, 2] + R[2, 1]))
    if ortho > tol or defect > tol or np.linalg.det(R) < 0:
        raise ConstraintViolation(
            f"matrix is off the admissible variety (orthogonality {ortho:.3g}, structure {defect:.3g})")
    sq = np.array([(R[2, 2] + 1.0) / 2.0, 0.0, 0.0])
    sq[1] = (R[0, 0] + 1.0) / 2.0 - sq[0]
    sq[2] = (R[1, 1] + 1.0) / 2.0 - sq[0]
    i = int(np.argmax(sq))
    s = math.sqrt(max(sq[i], 0.0))
    if i == 0:
        q = (s, (R[2, 1] - R[1, 2]) / (4 * s), (R[0, 2] - R[2, 0]) / (4 * s))
    elif i == 1:
        q = ((R[2, 1] - R[1, 2]) / (4 * s), s, (R[0, 1] + R[1, 0]) / (4 * s))
    else:
        q = ((R[0, 2] - R[2, 0]) / (4 * s), (R[0, 1] + R[1, 0]) / (4 * s), s)
    return AdmissibleRotationParam.canonical(*q)


def coad_so3(p: AdmissibleRotationParam, M) -> np.ndarray:
    """Vector form of ``Omega^T M Omega``, i.e. ``Omega^T`` applied to the momentum vector."""
    return admissible_rotation_so3(p).T @ np.asarray(M, dtype=float)


# ---------------------------------------------------------------------------
# SE(2)

def se2_matrix(a: PoseSE2) -> np.ndarray:
    c, s = math.cos(a.theta), math.sin(a.theta)
    return np.array([[c, -s, a.x], [s, c, a.y], [0.0, 0.0, 1.0]])


def pose_from_matrix(m) -> PoseSE2:
    m = np.asarray(m, dtype=float)
    return PoseSE2(wrap_angle(math.atan2(m[1, 0], m[0, 0])), float(m[0, 2]), float(m[1, 2]))


def se2_compose(a: PoseSE2, b: PoseSE2) -> PoseSE2:
    c, s = math.cos(a.theta), math.sin(a.theta)
    return PoseSE2(wrap_angle(a.theta + b.theta),
                   a.x + c * b.x - s * b.y,
                   a.y + s * b.x + c * b.y)


def se2_inverse(a: PoseSE2) -> PoseSE2:
    c, s = math.cos(a.theta), math.sin(a.theta)
    return PoseSE2(wrap_angle(-a.theta), -(c * a.x + s * a.y), s * a.x - c * a.y)


def helical_displacement(a: PoseSE2, b: PoseSE2) -> HelicalDisplacement:
    dx, dy = b.x - a.x, b.y - a.y
    c, s = math.cos(a.theta), math.sin(a.theta)
    return HelicalDisplacement(wrap_angle(b.theta - a.theta), c * dx + s * dy, -s * dx + c * dy)


def exp_d_se2(omega: float, v: float, t: float = 1.0) -> PoseSE2:
    """``exp(t S)`` for S in the constraint subspace: turn rate ``omega``, speed ``v`` along the blade."""
    phi = omega * t
    if abs(phi) < _SERIES_THRESHOLD:
        vt = v * t
        return PoseSE2(wrap_angle(phi), vt * (1.0 - phi * phi / 6.0), vt * phi / 2.0)
    r = v / omega
    h = math.sin(0.5 * phi)
    return PoseSE2(wrap_angle(phi), r * math.sin(phi), 2.0 * r * h * h)


def coad_se2(d, P) -> tuple:
    """Coadjoint action of the displacement ``(dtheta, V1, V2)`` on ``(p_theta, p1, p2)``."""
    dtheta, V1, V2 = d
    pt, p1, p2 = P
    c, s = math.cos(dtheta), math.sin(dtheta)
    return (pt - p2 * V1 + p1 * V2, c * p1 + s * p2, -s * p1 + c * p2)
