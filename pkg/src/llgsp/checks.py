"""Randomized property checks for the rotation kernel and the Neumann Laplacian.

Used by the ``selftest`` command; each returns the measured worst-case values
so callers can compare them against their own thresholds.
"""

from __future__ import annotations

import numpy as np

from .grid import Grid, VectorField, laplacian_neumann
from .rotation import cayley_matrix, cn_rotate

ROTATION_LIMITS = {
    "norm_preservation": 1e-14,
    "orthogonality": 1e-14,
    "matrix_agreement": 1e-13,
    "reversibility": 1e-12,
}

LAPLACIAN_LIMITS = {
    "constant_annihilation": 1e-9,
    "symmetry": 1e-12,
    "semidefinite": 1e-12,
}


def random_rotation_inputs(n: int, rng: np.random.Generator, max_axis: float = 1e6):
    """Random ``(m, a, dt)`` with log-uniform axis lengths up to ``max_axis`` and ``dt`` in (0, 1]."""
    m = rng.normal(size=(n, 3)) * np.exp(rng.uniform(-3, 3, size=(n, 1)))
    direction = rng.normal(size=(n, 3))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    a = direction * np.exp(rng.uniform(np.log(1e-6), np.log(max_axis), size=(n, 1)))
    dt = rng.uniform(1e-6, 1.0, size=(n, 1))
    return m, a, dt


def rotation_properties(n: int = 100_000, seed: int = 0) -> dict[str, float]:
    rng = np.random.default_rng(seed)
    m, a, dt = random_rotation_inputs(n, rng)
    out = cn_rotate(m, a, dt[:, 0])
    back = cn_rotate(out, -a, dt[:, 0])
    lm = np.linalg.norm(m, axis=1)
    norm_err = np.max(np.abs(np.linalg.norm(out, axis=1) - lm) / lm)
    rev_err = np.max(np.linalg.norm(back - m, axis=1) / lm)

    A = cayley_matrix(a, dt[:, 0])
    gram = np.einsum("nji,njk->nik", A, A) - np.eye(3)
    orth = float(np.max(np.abs(gram)))
    agree = float(np.max(np.linalg.norm(np.einsum("nij,nj->ni", A, m) - out, axis=1) / lm))
    return {
        "norm_preservation": float(norm_err),
        "orthogonality": orth,
        "matrix_agreement": agree,
        "reversibility": float(rev_err),
    }


def laplacian_properties(seed: int = 0) -> dict[str, float]:
    rng = np.random.default_rng(seed)
    worst = dict.fromkeys(LAPLACIAN_LIMITS, 0.0)
    for grid in (Grid((2,)), Grid((17,)), Grid((64,)), Grid((3, 4, 5)), Grid((8, 8, 8))):
        const = VectorField.constant(grid, rng.normal(size=3))
        scale = max(1.0 / h ** 2 for h in grid.spacing)
        worst["constant_annihilation"] = max(
            worst["constant_annihilation"],
            float(np.max(np.abs(laplacian_neumann(const).data))) / scale)
        u = VectorField(grid, rng.normal(size=grid.shape + (3,)))
        v = VectorField(grid, rng.normal(size=grid.shape + (3,)))
        lu = laplacian_neumann(u).data
        lv = laplacian_neumann(v).data
        uv = float(np.sum(lu * v.data))
        vu = float(np.sum(u.data * lv))
        ref = float(np.sum(np.abs(lu * v.data)))
        worst["symmetry"] = max(worst["symmetry"], abs(uv - vu) / ref)
        uu = float(np.sum(lu * u.data))
        worst["semidefinite"] = max(worst["semidefinite"], max(uu, 0.0) / float(np.sum(np.abs(lu * u.data))))
    return worst
