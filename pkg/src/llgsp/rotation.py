"""Crank-Nicolson (Cayley) rotation kernel for ``m_t = -m x a`` with frozen ``a``.

One step solves

    (m' - m) / dt = -((m' + m) / 2) x a,

i.e. ``(I - beta*K) m' = (I + beta*K) m`` with ``K w = a x w`` and
``beta = dt/2``.  The system determinant is ``S = 1 + beta^2 |a|^2 >= 1``, so the
solve always exists and ``m' = A m`` with ``A`` orthogonal.

All functions broadcast over leading axes: ``m`` and ``a`` have shape ``(..., 3)``.
"""

from __future__ import annotations

import numpy as np


def _dot(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.einsum("...i,...i->...", u, v)


def cross(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Cross product along the last axis (``np.cross`` without its axis shuffling)."""
    u1, u2, u3 = u[..., 0], u[..., 1], u[..., 2]
    v1, v2, v3 = v[..., 0], v[..., 1], v[..., 2]
    out = np.empty(np.broadcast_shapes(u.shape, v.shape))
    out[..., 0] = u2 * v3 - u3 * v2
    out[..., 1] = u3 * v1 - u1 * v3
    out[..., 2] = u1 * v2 - u2 * v1
    return out


def _half_step(dt) -> np.ndarray:
    dt = np.asarray(dt, dtype=np.float64)
    if np.any(dt <= 0):
        raise ValueError("dt must be positive")
    return 0.5 * dt


def rotation_determinant(a: np.ndarray, dt) -> np.ndarray:
    """``S = 1 + (dt/2)^2 |a|^2`` per cell."""
    beta = _half_step(dt)
    return 1.0 + beta * beta * _dot(a, a)


def cn_rotate(m: np.ndarray, a: np.ndarray, dt) -> np.ndarray:
    """Return the Crank-Nicolson update of ``m`` about axis ``a`` over ``dt``.

    Closed-form Cramer solution of the 3x3 system:
    ``m' = m + 2 beta (a x m + beta a x (a x m)) / S``.
    ``dt`` may be a scalar or an array broadcasting against ``m[..., 0]``.
    """
    beta = _half_step(dt)
    a = np.asarray(a, dtype=np.float64)
    m = np.asarray(m, dtype=np.float64)
    axm = cross(a, m)
    aaxm = cross(a, axm)
    s = 1.0 + beta * beta * _dot(a, a)
    return m + (2.0 * beta / s)[..., None] * (axm + beta[..., None] * aaxm)


def cn_inverse_apply(r: np.ndarray, a: np.ndarray, dt) -> np.ndarray:
    """Solve ``(I - beta*K) x = r`` for ``x``.

    Used to fold an additive source into the rotation step.
    """
    beta = _half_step(dt)
    a = np.asarray(a, dtype=np.float64)
    s = 1.0 + beta * beta * _dot(a, a)
    return (r + beta[..., None] * cross(a, r) + (beta * beta * _dot(a, r))[..., None] * a) / s[..., None]


def cayley_matrix(a: np.ndarray, dt) -> np.ndarray:
    """Explicit matrix ``A = (I - beta*K)^-1 (I + beta*K)``, entry by entry.

    Kept as an independent code path to ``cn_rotate``.  Batched: ``a`` of shape
    ``(..., 3)`` gives ``(..., 3, 3)``.
    """
    b = _half_step(dt)
    a = np.asarray(a, dtype=np.float64)
    a1, a2, a3 = a[..., 0], a[..., 1], a[..., 2]
    b2 = b * b
    q = b2 * (a1 * a1 + a2 * a2 + a3 * a3)
    s = 1.0 + q
    mat = np.empty(np.broadcast_shapes(a1.shape, b.shape) + (3, 3))
    mat[..., 0, 0] = 1.0 - q + 2 * b2 * a1 * a1
    mat[..., 0, 1] = -2 * b * a3 + 2 * b2 * a1 * a2
    mat[..., 0, 2] = 2 * b * a2 + 2 * b2 * a1 * a3
    mat[..., 1, 0] = 2 * b * a3 + 2 * b2 * a1 * a2
    mat[..., 1, 1] = 1.0 - q + 2 * b2 * a2 * a2
    mat[..., 1, 2] = -2 * b * a1 + 2 * b2 * a2 * a3
    mat[..., 2, 0] = -2 * b * a2 + 2 * b2 * a1 * a3
    mat[..., 2, 1] = 2 * b * a1 + 2 * b2 * a2 * a3
    mat[..., 2, 2] = 1.0 - q + 2 * b2 * a3 * a3
    return mat / s[..., None, None]
