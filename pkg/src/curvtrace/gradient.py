"""Per-cell media gradient estimation.

Two estimators: a weighted least-squares regression over neighbor cell
centroids (the default; weights are inverse centroid distances) and a
Green-Gauss style face-flux estimate used as a comparison baseline and as
the fallback for rank-deficient neighborhoods.  Both recover globally
linear fields exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

ALPHA_EPS = 1e-12  # below this gradient magnitude a cell counts as uniform


@dataclass
class CellGradient:
    """A cell's media gradient with magnitude and uniformity flag."""

    vector: np.ndarray
    magnitude: float
    direction: np.ndarray
    is_uniform: bool
    method: str = "regression"
    fallback: bool = False

    @classmethod
    def from_vector(cls, g, method="regression", fallback=False):
        g = np.asarray(g, dtype=float)
        mag = float(np.linalg.norm(g))
        uniform = mag < ALPHA_EPS
        direction = g / mag if not uniform else np.zeros(3)
        return cls(g, mag, direction, uniform, method, fallback)


def _cholesky_coeffs(dX, w):
    """Explicit regression coefficients p_k with sum_k p_k * dm_k = grad m.

    dX is (k, 3) of neighbor centroid offsets, w the (k,) weights.  The
    triangular factors follow the printed closed form (the R factor of the
    weighted design matrix); the published version omits the trailing
    per-neighbor weight factor, which is restored here so the result
    solves the weighted normal equations.  Returns None when the
    neighborhood is rank deficient.
    """
    dx, dy, dz = dX[:, 0], dX[:, 1], dX[:, 2]
    scale = math.sqrt(float(np.sum(w * (dx * dx + dy * dy + dz * dz))))
    tiny = 1e-12 * max(scale, 1e-300)
    s11 = float(np.sum(w * dx * dx))
    if s11 <= tiny * tiny:
        return None
    r11 = math.sqrt(s11)
    r12 = float(np.sum(w * dx * dy)) / r11
    r13 = float(np.sum(w * dx * dz)) / r11
    s22 = float(np.sum(w * dy * dy)) - r12 * r12
    if s22 <= tiny * tiny:
        return None
    r22 = math.sqrt(s22)
    r23 = (float(np.sum(w * dy * dz)) - r12 * r13) / r22
    s33 = float(np.sum(w * dz * dz)) - r13 * r13 - r23 * r23
    if s33 <= tiny * tiny:
        return None
    r33 = math.sqrt(s33)
    beta = (r12 * r23 - r13 * r22) / (r11 * r22)
    a1 = dx / (r11 * r11)
    a2 = (dy - (r12 / r11) * dx) / (r22 * r22)
    a3 = (dz - (r23 / r22) * dy + beta * dx) / (r33 * r33)
    p = np.empty_like(dX)
    p[:, 0] = a1 - (r12 / r11) * a2 + beta * a3
    p[:, 1] = a2 - (r23 / r22) * a3
    p[:, 2] = a3
    return p * w[:, None]


def _cholesky_coeffs_batch(dX, w):
    """Vectorized coefficients for (n, k, 3) offset stacks.

    Returns (p, ok): p is (n, k, 3), ok flags rows whose triangular
    factors are well conditioned.
    """
    dx, dy, dz = dX[..., 0], dX[..., 1], dX[..., 2]
    scale2 = np.sum(w * (dx * dx + dy * dy + dz * dz), axis=1)
    tiny2 = (1e-12 ** 2) * np.maximum(scale2, 1e-300)
    s11 = np.sum(w * dx * dx, axis=1)
    ok = s11 > tiny2
    r11 = np.sqrt(np.where(ok, s11, 1.0))
    r12 = np.sum(w * dx * dy, axis=1) / r11
    r13 = np.sum(w * dx * dz, axis=1) / r11
    s22 = np.sum(w * dy * dy, axis=1) - r12 * r12
    ok &= s22 > tiny2
    r22 = np.sqrt(np.where(ok, s22, 1.0))
    r23 = (np.sum(w * dy * dz, axis=1) - r12 * r13) / r22
    s33 = np.sum(w * dz * dz, axis=1) - r13 * r13 - r23 * r23
    ok &= s33 > tiny2
    r33 = np.sqrt(np.where(ok, s33, 1.0))
    beta = (r12 * r23 - r13 * r22) / (r11 * r22)
    a1 = dx / (r11 * r11)[:, None]
    a2 = (dy - (r12 / r11)[:, None] * dx) / (r22 * r22)[:, None]
    a3 = (dz - (r23 / r22)[:, None] * dy + beta[:, None] * dx) / (r33 * r33)[:, None]
    p = np.empty_like(dX)
    p[..., 0] = a1 - (r12 / r11)[:, None] * a2 + beta[:, None] * a3
    p[..., 1] = a2 - (r23 / r22)[:, None] * a3
    p[..., 2] = a3
    return p * w[..., None], ok


def _vertex_adjacency(mesh):
    if getattr(mesh, "_vertex_cells", None) is None:
        cells = [[] for _ in range(mesh.n_vertices)]
        for t, tet in enumerate(mesh.tets):
            for v in tet:
                cells[int(v)].append(t)
        mesh._vertex_cells = cells
    return mesh._vertex_cells


def _neighborhood(mesh, tet, min_count=4):
    """Face-neighbor cells, extended with vertex-adjacent cells when the
    cell sits on the hull and has fewer than `min_count` face neighbors."""
    nbrs = [int(n) for n in mesh.neighbors[tet] if n >= 0]
    if len(nbrs) < min_count:
        vc = _vertex_adjacency(mesh)
        extra = set()
        for v in mesh.tets[tet]:
            extra.update(vc[int(v)])
        extra.discard(int(tet))
        extra.difference_update(nbrs)
        if extra:
            extra = sorted(extra, key=lambda t: float(np.linalg.norm(
                mesh.cell_centroids[t] - mesh.cell_centroids[tet])))
            nbrs.extend(extra[:max(min_count - len(nbrs), 0)])
    return nbrs


def regression_gradient(mesh, tet):
    """Weighted least-squares gradient of one cell from neighbor centroids.

    Weights are inverse centroid distances.  Hull cells with fewer than
    four face neighbors borrow vertex-adjacent centroids; if the
    neighborhood is still rank deficient the Green-Gauss estimate is
    returned with the fallback flag set.
    """
    nbrs = _neighborhood(mesh, tet)
    x0 = mesh.cell_centroids[tet]
    m0 = mesh.cell_values[tet]
    if len(nbrs) >= 3:
        dX = mesh.cell_centroids[nbrs] - x0
        dm = mesh.cell_values[nbrs] - m0
        dist = np.linalg.norm(dX, axis=1)
        if np.all(dist > 0):
            p = _cholesky_coeffs(dX, 1.0 / dist)
            if p is not None:
                return CellGradient.from_vector(p.T @ dm, "regression")
    gg = green_gauss_gradient(mesh, tet)
    return CellGradient.from_vector(gg.vector, "regression", fallback=True)


def _face_area_normals(mesh, tets=None):
    """Outward vector areas A_k * N_k for the face opposite each vertex."""
    idx = slice(None) if tets is None else tets
    v = mesh.points[mesh.tets[idx]]
    out = np.empty_like(v)
    for i in range(4):
        rest = [j for j in range(4) if j != i]
        a, b, c = v[:, rest[0]], v[:, rest[1]], v[:, rest[2]]
        s = 0.5 * np.cross(b - a, c - a)
        flip = np.einsum("nj,nj->n", s, v[:, i] - a) > 0
        s[flip] *= -1.0
        out[:, i] = s
    return out


def green_gauss_gradient(mesh, tet):
    """Face-flux gradient of one cell; exact on linear fields."""
    if mesh.volumes[tet] <= 0:
        raise ValueError(f"cell {tet} has zero volume")
    an = _face_area_normals(mesh, np.array([tet]))[0]
    m = mesh.values[mesh.tets[tet]]
    g = -(an * m[:, None]).sum(axis=0) / (3.0 * mesh.volumes[tet])
    return CellGradient.from_vector(g, "green_gauss")


def bake_gradients(mesh, method="regression"):
    """Fill the mesh's per-cell gradient arrays.

    Per-cell failures fall back to Green-Gauss and are flagged rather
    than aborting the whole mesh.  Re-running is idempotent.
    """
    nt = mesh.n_cells
    grad = np.zeros((nt, 3))
    fallback = np.zeros(nt, dtype=bool)
    if method == "green_gauss":
        an = _face_area_normals(mesh)
        m = mesh.values[mesh.tets]
        grad = -np.einsum("nkj,nk->nj", an, m) / (3.0 * mesh.volumes)[:, None]
    elif method == "regression":
        interior = np.all(mesh.neighbors >= 0, axis=1)
        ii = np.where(interior)[0]
        if len(ii):
            nb = mesh.neighbors[ii]
            dX = mesh.cell_centroids[nb] - mesh.cell_centroids[ii][:, None, :]
            dm = mesh.cell_values[nb] - mesh.cell_values[ii][:, None]
            w = 1.0 / np.linalg.norm(dX, axis=2)
            p, ok = _cholesky_coeffs_batch(dX, w)
            grad[ii] = np.einsum("nkj,nk->nj", p, dm)
            bad = ii[~ok]
        else:
            bad = np.array([], dtype=int)
        rest = list(np.where(~interior)[0]) + list(bad)
        for t in rest:
            cg = regression_gradient(mesh, int(t))
            grad[t] = cg.vector
            fallback[t] = cg.fallback
    else:
        raise ValueError(f"unknown gradient method {method!r}")
    mesh.grad = grad
    mesh.grad_mag = np.linalg.norm(grad, axis=1)
    mesh.grad_uniform = mesh.grad_mag < ALPHA_EPS
    mesh.grad_fallback = fallback
    mesh.gradient_method = method
    mesh.invalidate_caches()
    return mesh


def cell_gradient(mesh, tet):
    """The baked CellGradient of one cell."""
    if mesh.grad is None:
        raise ValueError("gradients not baked; call bake_gradients first")
    return CellGradient(
        mesh.grad[tet], float(mesh.grad_mag[tet]),
        mesh.grad[tet] / mesh.grad_mag[tet] if not mesh.grad_uniform[tet]
        else np.zeros(3),
        bool(mesh.grad_uniform[tet]), mesh.gradient_method,
        bool(mesh.grad_fallback[tet]))
