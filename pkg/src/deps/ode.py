"""Classical fourth-order Runge-Kutta, used for the continuous reference flows."""

from __future__ import annotations

import numpy as np

__all__ = ["rk4_step", "rk4_integrate"]


def rk4_step(f, y, dt: float):
    y = np.asarray(y, dtype=float)
    k1 = np.asarray(f(y))
    k2 = np.asarray(f(y + 0.5 * dt * k1))
    k3 = np.asarray(f(y + 0.5 * dt * k2))
    k4 = np.asarray(f(y + dt * k3))
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_integrate(f, y0, dt: float, steps: int, substeps: int = 1) -> np.ndarray:
    """Return an array of ``steps + 1`` samples spaced ``dt`` apart.

    Each sample interval is covered by ``substeps`` RK4 steps of size
    ``dt / substeps``.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    if steps < 0 or substeps < 1:
        raise ValueError("steps must be >= 0 and substeps >= 1")
    y = np.asarray(y0, dtype=float)
    out = np.empty((steps + 1,) + y.shape)
    out[0] = y
    h = dt / substeps
    for k in range(steps):
        for _ in range(substeps):
            y = rk4_step(f, y, h)
        out[k + 1] = y
    return out
