"""Gradient-adaptive resampling and tetrahedral meshing of media grids.

The pipeline: a spacing field derived from the slowness gradient sets the
local sample density, a face-centered-cubic lattice grown from the domain
center realizes it, and a Delaunay tetrahedralization of the samples (via
Qhull) provides the traversal structure.  Boundary triangles are linked to
every cell they overlap rather than embedded as mesh constraints.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import Delaunay, QhullError, cKDTree

from .media import MediaGrid, convert_values

EPS_BARY = 1e-9

# the 12 nearest-neighbor directions of a face-centered-cubic lattice
_SQ = 1.0 / math.sqrt(2.0)
FCC_NEIGHBORS = np.array([
    (+1, +1, 0), (+1, -1, 0), (-1, +1, 0), (-1, -1, 0),
    (+1, 0, +1), (+1, 0, -1), (-1, 0, +1), (-1, 0, -1),
    (0, +1, +1), (0, +1, -1), (0, -1, +1), (0, -1, -1),
], dtype=float) * _SQ


class MeshError(ValueError):
    pass


class OutsideDomainError(ValueError):
    """Query point lies outside the mesh hull."""


@dataclass
class ResampleParams:
    """Controls of the gradient-adaptive resampling.

    sigma is the per-cell variation budget: the spacing satisfies
    (1/4) * |grad k| * d^2 = sigma with k the slowness 1/c, clamped to
    [d_min, d_max].  Defaults: d_min is the input grid spacing, d_max a
    quarter of the domain diagonal.
    """

    sigma: float
    d_min: float | None = None
    d_max: float | None = None
    grading: float | None = 1.0

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be > 0")
        if self.d_min is not None and self.d_max is not None \
                and not 0 < self.d_min <= self.d_max:
            raise ValueError("need 0 < d_min <= d_max")
        if self.grading is not None and self.grading <= 0:
            raise ValueError("grading must be positive (or None to disable)")

    def resolved(self, grid: MediaGrid):
        d_min = self.d_min if self.d_min is not None else float(grid.spacing.max())
        d_max = self.d_max if self.d_max is not None else grid.diagonal / 4.0
        if not 0 < d_min <= d_max:
            raise ValueError("need 0 < d_min <= d_max")
        return d_min, d_max


@dataclass
class SamplePoints:
    """Accepted resample sites with their media values and local spacing."""

    positions: np.ndarray
    values: np.ndarray
    spacing: np.ndarray
    candidates_seen: int = 0


def compute_spacing_field(grid: MediaGrid, params: ResampleParams):
    """Per-grid-point target spacing d = sqrt(4 sigma / |grad k|).

    The slowness gradient is estimated by central finite differences
    (one sided at the borders).  Zero gradient clamps to d_max.  The
    field is then Lipschitz limited (|d(x) - d(y)| <= grading * |x - y|)
    so that refinement can actually propagate: the lattice keeps sites
    (d_i + d_j)/2 apart, and a spacing field that collapses faster than
    it can be walked leaves its fine regions shadowed by coarse samples.
    """
    d_min, d_max = params.resolved(grid)
    c = convert_values(grid.values, grid.quantity, "c", grid.c0)
    k = 1.0 / c
    gx, gy, gz = np.gradient(k, *grid.spacing)
    mag = np.sqrt(gx * gx + gy * gy + gz * gz)
    with np.errstate(divide="ignore"):
        d = np.sqrt(4.0 * params.sigma / mag)
    d = np.clip(d, d_min, d_max)
    if params.grading is not None:
        d = _lipschitz_limit(d, grid.spacing, params.grading)
    return d


def _lipschitz_limit(d, spacing, beta):
    """Min-plus envelope d(x) = min_y (d(y) + beta * |x - y|_1).

    Separable 1D forward/backward scans per axis compute the L1-cone
    envelope exactly; it is exact along the axes and conservative within
    a factor sqrt(3) on diagonals, which is plenty for a grading limiter.
    """
    d = d.copy()
    for ax in range(3):
        step = beta * spacing[ax]
        dm = np.moveaxis(d, ax, 0)
        for i in range(1, dm.shape[0]):
            np.minimum(dm[i], dm[i - 1] + step, out=dm[i])
        for i in range(dm.shape[0] - 2, -1, -1):
            np.minimum(dm[i], dm[i + 1] + step, out=dm[i])
    return d


def _trilinear_field(grid: MediaGrid, fld, points):
    """Trilinear interpolation of an arbitrary per-grid-point field."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    rel = (pts - grid.origin) / grid.spacing
    idx = np.clip(np.floor(rel).astype(int), 0, np.array(grid.dims) - 2)
    f = np.clip(rel - idx, 0.0, 1.0)
    i, j, k = idx[:, 0], idx[:, 1], idx[:, 2]
    fx, fy, fz = f[:, 0], f[:, 1], f[:, 2]
    v = np.asarray(fld).reshape(grid.dims)
    c00 = v[i, j, k] * (1 - fx) + v[i + 1, j, k] * fx
    c10 = v[i, j + 1, k] * (1 - fx) + v[i + 1, j + 1, k] * fx
    c01 = v[i, j, k + 1] * (1 - fx) + v[i + 1, j, k + 1] * fx
    c11 = v[i, j + 1, k + 1] * (1 - fx) + v[i + 1, j + 1, k + 1] * fx
    out = (c00 * (1 - fy) + c10 * fy) * (1 - fz) + (c01 * (1 - fy) + c11 * fy) * fz
    return out if np.asarray(points).ndim > 1 else float(out[0])


def resample_fcc(grid: MediaGrid, spacing_field, params: ResampleParams,
                 seed=0, jitter=1e-3, boundary="clamp", cover_frac=0.85):
    """Grow an FCC lattice from the grid center at the local spacing.

    A candidate site is accepted when the grid sample nearest to it is
    still uncovered; acceptance covers all grid samples within
    cover_frac * d(x) and enqueues the 12 FCC neighbor sites at distance
    d(x).  Candidates are processed finest-first (a priority queue on the
    local spacing) so refinement fills fine regions before coarse samples
    exclude them.  The covering radius stays strictly below the lattice
    spacing: marking (or testing) full-spacing balls would overlap every
    neighbor site of an accepted point and stall the growth after one
    sample.  Candidates falling outside the domain are clamped onto it
    (boundary="clamp", keeps the hull tight) or dropped
    (boundary="discard").  A small deterministic jitter breaks the exact
    cospherical degeneracies of the lattice that breed sliver cells.
    """
    if any(d < 2 for d in grid.dims):
        raise MeshError("grid needs at least 2 samples per axis")
    if boundary not in ("clamp", "discard"):
        raise ValueError("boundary must be 'clamp' or 'discard'")
    lo = grid.origin
    hi = grid.upper
    h = grid.spacing
    dims = np.array(grid.dims)
    axes = [grid.axis_coords(i) for i in range(3)]
    covered = np.zeros(grid.dims, dtype=bool)
    rng = np.random.default_rng(seed)
    center = np.asarray(grid.center, dtype=float)
    heap = [(float(_trilinear_field(grid, spacing_field, center)), 0, center)]
    tie = 1
    positions, spacings = [], []
    seen = 0
    while heap:
        _, _, p = heapq.heappop(heap)
        seen += 1
        if np.any(p < lo - 1e-12) or np.any(p > hi + 1e-12):
            if boundary == "discard":
                continue
            p = np.clip(p, lo, hi)
        d = float(_trilinear_field(grid, spacing_field, p))
        p = np.clip(p + rng.uniform(-1.0, 1.0, 3) * (jitter * d), lo, hi)
        # snap back onto domain faces so boundary point sets stay exactly
        # coplanar; off-plane remnants of the jitter breed sliver cells
        snap = 2.0 * jitter * d
        p = np.where(p - lo < snap, lo, p)
        p = np.where(hi - p < snap, hi, p)
        d = float(_trilinear_field(grid, spacing_field, p))
        nearest = tuple(np.clip(np.rint((p - lo) / h).astype(int), 0, dims - 1))
        if covered[nearest]:
            continue
        rad = cover_frac * d
        i0 = np.maximum(np.ceil((p - rad - lo) / h).astype(int), 0)
        i1 = np.minimum(np.floor((p + rad - lo) / h).astype(int), dims - 1)
        if not np.any(i1 < i0):
            dx2 = (axes[0][i0[0]:i1[0] + 1] - p[0]) ** 2
            dy2 = (axes[1][i0[1]:i1[1] + 1] - p[1]) ** 2
            dz2 = (axes[2][i0[2]:i1[2] + 1] - p[2]) ** 2
            mask = (dx2[:, None, None] + dy2[None, :, None]
                    + dz2[None, None, :]) <= rad * rad
            covered[i0[0]:i1[0] + 1, i0[1]:i1[1] + 1, i0[2]:i1[2] + 1][mask] = True
        covered[nearest] = True
        positions.append(p)
        spacings.append(d)
        for u in FCC_NEIGHBORS:
            site = p + d * u
            probe = np.clip(site, lo, hi)
            pri = float(_trilinear_field(grid, spacing_field, probe))
            heapq.heappush(heap, (pri, tie, site))
            tie += 1
    positions = np.array(positions)
    values = grid.trilinear(positions)
    return SamplePoints(positions, np.asarray(values), np.array(spacings), seen)


def corner_points(grid: MediaGrid):
    """The 8 domain corners with their exact grid values."""
    lo, hi = grid.origin, grid.upper
    pts = np.array([[x, y, z] for x in (lo[0], hi[0])
                    for y in (lo[1], hi[1]) for z in (lo[2], hi[2])])
    return pts, grid.trilinear(pts)


# ---------------------------------------------------------------------------
# boundary scenes


@dataclass
class BoundaryScene:
    """Triangle soup of reflective boundary surfaces."""

    triangles: np.ndarray          # (m, 3, 3)
    surface_ids: np.ndarray        # (m,)
    materials: dict = field(default_factory=dict)

    def __post_init__(self):
        self.triangles = np.asarray(self.triangles, dtype=float).reshape(-1, 3, 3)
        if len(self.surface_ids) != len(self.triangles):
            raise ValueError("one surface id per triangle")
        self.surface_ids = np.asarray(self.surface_ids, dtype=np.int32)
        e1 = self.triangles[:, 1] - self.triangles[:, 0]
        e2 = self.triangles[:, 2] - self.triangles[:, 0]
        n = np.cross(e1, e2)
        areas = 0.5 * np.linalg.norm(n, axis=1)
        if np.any(areas <= 0):
            raise ValueError("degenerate triangle (zero area)")
        self.normals = n / (2.0 * areas)[:, None]
        self.areas = areas

    def __len__(self):
        return len(self.triangles)

    @classmethod
    def empty(cls):
        return cls(np.zeros((0, 3, 3)), np.zeros(0, dtype=int))

    @classmethod
    def rectangle(cls, p0, p1, p2, p3, surface_id=0):
        """Two triangles covering the (planar) quad p0 p1 p2 p3."""
        tris = np.array([[p0, p1, p2], [p0, p2, p3]], dtype=float)
        return cls(tris, np.full(2, surface_id, dtype=int))

    @classmethod
    def merge(cls, scenes):
        tris = np.concatenate([s.triangles for s in scenes])
        ids = np.concatenate([s.surface_ids for s in scenes])
        mats = {}
        for s in scenes:
            mats.update(s.materials)
        return cls(tris, ids, mats)


def ground_scene(grid: MediaGrid, z=None, surface_id=0, margin=0.0):
    """A reflective ground rectangle spanning the grid footprint."""
    lo, hi = grid.origin, grid.upper
    zg = lo[2] if z is None else z
    return BoundaryScene.rectangle(
        (lo[0] - margin, lo[1] - margin, zg), (hi[0] + margin, lo[1] - margin, zg),
        (hi[0] + margin, hi[1] + margin, zg), (lo[0] - margin, hi[1] + margin, zg),
        surface_id)


# ---------------------------------------------------------------------------
# the mesh


class AdaptiveMesh:
    """Tetrahedra over media samples, with adjacency and per-cell data.

    neighbors[t, i] is the cell across the face opposite vertex i of cell
    t (-1 on the hull); face_planes[t, i] holds that face's unit outward
    normal and plane offset.  Gradients are filled by the gradient module.
    """

    def __init__(self, points, values, tets, neighbors, transform,
                 quantity="c", c0=340.0, qhull=None, spacing=None):
        self.points = np.asarray(points, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self.tets = np.asarray(tets, dtype=np.int32)
        self.neighbors = np.asarray(neighbors, dtype=np.int32)
        self.transform = np.asarray(transform, dtype=float)
        self.quantity = quantity
        self.c0 = float(c0)
        self.spacing = spacing
        self._qhull = qhull
        self._kdtree = None
        self._hot = None
        self.gradient_method = None
        self.grad = None
        self.grad_mag = None
        self.grad_uniform = None
        self.grad_fallback = None
        self.scene = None
        self.linked_offsets = np.zeros(len(self.tets) + 1, dtype=np.int64)
        self.linked_tris = np.zeros(0, dtype=np.int32)
        self._finalize_geometry()

    def _finalize_geometry(self):
        v = self.points[self.tets]                      # (nt, 4, 3)
        self.cell_centroids = v.mean(axis=1)
        self.cell_values = self.values[self.tets].mean(axis=1)
        d1, d2, d3 = v[:, 1] - v[:, 0], v[:, 2] - v[:, 0], v[:, 3] - v[:, 0]
        self.volumes = np.abs(np.einsum("ij,ij->i", d1, np.cross(d2, d3))) / 6.0
        planes = np.empty((len(self.tets), 4, 4))
        for i in range(4):
            idx = [j for j in range(4) if j != i]
            a, b, c = v[:, idx[0]], v[:, idx[1]], v[:, idx[2]]
            n = np.cross(b - a, c - a)
            n /= np.linalg.norm(n, axis=1, keepdims=True)
            inward = np.einsum("ij,ij->i", n, v[:, i] - a) > 0
            n[inward] *= -1.0
            planes[:, i, :3] = n
            planes[:, i, 3] = np.einsum("ij,ij->i", n, a)
        self.face_planes = planes

    # -- basic queries ------------------------------------------------------

    @property
    def n_vertices(self):
        return len(self.points)

    @property
    def n_cells(self):
        return len(self.tets)

    def barycentric(self, tet, x):
        T = self.transform[tet]
        lam = T[:3] @ (np.asarray(x, dtype=float) - T[3])
        return np.array([lam[0], lam[1], lam[2], 1.0 - lam.sum()])

    def locate(self, x, hint=None):
        """Walk the adjacency toward the cell containing x.

        Falls back to an exhaustive scan when the walk stalls; raises
        OutsideDomainError for points beyond the hull.
        """
        x = np.asarray(x, dtype=float)
        nt = self.n_cells
        if hint is not None and 0 <= hint < nt:
            t = int(hint)
        else:
            t = (int(abs(x[0]) * 73856093.0 + abs(x[1]) * 19349663.0
                     + abs(x[2]) * 83492791.0)) % nt
        max_steps = 64 + 4 * int(round(nt ** (1.0 / 3.0)))
        for _ in range(max_steps):
            lam = self.barycentric(t, x)
            worst = int(np.argmin(lam))
            if lam[worst] >= -EPS_BARY:
                return t
            nb = int(self.neighbors[t, worst])
            if nb < 0:
                break
            t = nb
        return self._scan(x)

    def _scan(self, x):
        T = self.transform
        lam3 = np.einsum("nij,nj->ni", T[:, :3], x - T[:, 3])
        lam = np.concatenate([lam3, 1.0 - lam3.sum(axis=1, keepdims=True)], axis=1)
        worst = lam.min(axis=1)
        best = int(np.argmax(worst))
        if worst[best] < -EPS_BARY:
            raise OutsideDomainError(f"point {x.tolist()} lies outside the mesh hull")
        return best

    def interpolate_at(self, tet, x):
        lam = self.barycentric(tet, x)
        return float(lam @ self.values[self.tets[tet]])

    def contains(self, x):
        try:
            self.locate(x)
            return True
        except OutsideDomainError:
            return False

    # -- bulk queries ---------------------------------------------------------

    def bulk_locate(self, points):
        """Cell index per query point, -1 outside the hull."""
        pts = np.asarray(points, dtype=float)
        if self._qhull is not None:
            simp = self._qhull.find_simplex(pts, tol=EPS_BARY)
            out = simp.astype(np.int64)
            miss = np.where(simp < 0)[0]
            if len(miss):
                out[miss] = self._bulk_walk(pts[miss])
            return out
        return self._bulk_walk(pts)

    def _bulk_walk(self, pts):
        if self._kdtree is None:
            self._kdtree = cKDTree(self.cell_centroids)
        n = len(pts)
        result = np.full(n, -2, dtype=np.int64)
        cur = self._kdtree.query(pts)[1].astype(np.int64)
        active = np.arange(n)
        max_iter = 64 + 4 * int(round(self.n_cells ** (1.0 / 3.0)))
        for _ in range(max_iter):
            T = self.transform[cur[active]]
            lam3 = np.einsum("nij,nj->ni", T[:, :3], pts[active] - T[:, 3])
            lam = np.concatenate([lam3, 1.0 - lam3.sum(axis=1, keepdims=True)],
                                 axis=1)
            worst = lam.argmin(axis=1)
            lam_w = lam[np.arange(len(active)), worst]
            done = lam_w >= -EPS_BARY
            result[active[done]] = cur[active[done]]
            keep = ~done
            active = active[keep]
            if not len(active):
                break
            nb = self.neighbors[cur[active], worst[keep]]
            hull = nb < 0
            result[active[hull]] = -1
            active = active[~hull]
            cur[active] = nb[~hull].astype(np.int64)
        for i in active:  # walk stalled (ties); resolve individually
            try:
                result[i] = self._scan(pts[i])
            except OutsideDomainError:
                result[i] = -1
        return result

    def bulk_interpolate(self, points):
        """(values, inside_mask) at query points; outside entries are nan."""
        pts = np.asarray(points, dtype=float)
        cells = self.bulk_locate(pts)
        inside = cells >= 0
        out = np.full(len(pts), np.nan)
        if inside.any():
            c = cells[inside]
            T = self.transform[c]
            lam3 = np.einsum("nij,nj->ni", T[:, :3], pts[inside] - T[:, 3])
            lam = np.concatenate([lam3, 1.0 - lam3.sum(axis=1, keepdims=True)],
                                 axis=1)
            out[inside] = np.einsum("ni,ni->n", lam, self.values[self.tets[c]])
        return out, inside

    # -- quality and caches ---------------------------------------------------

    def radius_edge_stats(self):
        """(max, mean) circumradius over shortest-edge ratio."""
        v = self.points[self.tets]
        a = v[:, 0]
        rows = np.stack([v[:, i] - a for i in (1, 2, 3)], axis=1)
        rhs = 0.5 * np.einsum("nij,nij->ni", rows, rows)
        try:
            centers = np.linalg.solve(rows, rhs[..., None])[..., 0]
        except np.linalg.LinAlgError:
            return math.inf, math.inf
        radius = np.linalg.norm(centers, axis=1)
        edges = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
        emin = np.min(np.stack(
            [np.linalg.norm(v[:, i] - v[:, j], axis=1) for i, j in edges]), axis=0)
        ratio = radius / emin
        return float(ratio.max()), float(ratio.mean())

    def hot_arrays(self):
        """Per-cell python-list caches for the scalar traversal loop."""
        if self._hot is None:
            nt = self.n_cells
            self._hot = {
                "planes": self.face_planes.reshape(nt, 16),
                "neigh": self.neighbors,
                "tets": self.tets,
                "tf": self.transform.reshape(nt, 12),
                "vals": self.values[self.tets],
                "grad": self.grad,
                "gmag": self.grad_mag,
                "guni": self.grad_uniform,
                "loff": self.linked_offsets,
                "ltris": self.linked_tris,
            }
        return self._hot

    def invalidate_caches(self):
        self._hot = None


def tetrahedralize(points, values=None, quantity="c", c0=340.0, spacing=None):
    """Unconstrained Delaunay tetrahedralization with adjacency.

    Values default to zeros (useful for pure-geometry tests).  Raises
    MeshError when the points are coplanar or too few.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise MeshError("points must be (n, 3)")
    if len(pts) < 4:
        raise MeshError("need at least 4 points")
    try:
        qh = Delaunay(pts)
    except QhullError as exc:
        raise MeshError(f"tetrahedralization failed (coplanar input?): {exc}") from exc
    if len(qh.simplices) == 0:
        raise MeshError("tetrahedralization produced no cells")
    if values is None:
        values = np.zeros(len(pts))
    return AdaptiveMesh(pts, values, qh.simplices, qh.neighbors, qh.transform,
                        quantity=quantity, c0=c0, qhull=qh, spacing=spacing)


def point_locate(mesh: AdaptiveMesh, x, hint=None):
    """Cell containing x (barycentric coords all >= -eps)."""
    return mesh.locate(x, hint)


def interpolate(mesh: AdaptiveMesh, tet, x):
    """Barycentric interpolation of the media value at x inside a cell."""
    if mesh.volumes[tet] <= 0.0:
        raise MeshError(f"cell {tet} is degenerate")
    return mesh.interpolate_at(tet, x)


# ---------------------------------------------------------------------------
# boundary linking


_TET_EDGES = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


def _sat_overlap(tri, tet, tol):
    """Separating-axis overlap test between a triangle and a tetrahedron.

    Exact for convex shapes up to the tolerance; errs toward overlap so
    linking never produces false negatives.
    """
    axes = []
    te1 = tri[1] - tri[0]
    te2 = tri[2] - tri[0]
    axes.append(np.cross(te1, te2))
    for i in range(4):
        idx = [j for j in range(4) if j != i]
        a, b, c = tet[idx[0]], tet[idx[1]], tet[idx[2]]
        axes.append(np.cross(b - a, c - a))
    tri_edges = (te1, te2, tri[2] - tri[1])
    for i, j in _TET_EDGES:
        e = tet[j] - tet[i]
        for f in tri_edges:
            axes.append(np.cross(e, f))
    for ax in axes:
        norm = np.linalg.norm(ax)
        if norm < 1e-14:
            continue
        ax = ax / norm
        p_tri = tri @ ax
        p_tet = tet @ ax
        if p_tri.max() < p_tet.min() - tol or p_tet.max() < p_tri.min() - tol:
            return False
    return True


def link_boundary(mesh: AdaptiveMesh, scene: BoundaryScene):
    """Attach each boundary triangle to every cell it overlaps.

    Returns the number of triangles that overlap no cell at all (outside
    the hull); those are skipped.
    """
    nt = mesh.n_cells
    links = [[] for _ in range(nt)]
    ignored = 0
    if len(scene):
        v = mesh.points[mesh.tets]
        tet_lo = v.min(axis=1)
        tet_hi = v.max(axis=1)
        scale = float(np.linalg.norm(mesh.points.max(0) - mesh.points.min(0)))
        tol = 1e-12 * max(scale, 1.0)
        pad = tol
        for k, tri in enumerate(scene.triangles):
            lo = tri.min(axis=0) - pad
            hi = tri.max(axis=0) + pad
            cand = np.where(np.all(tet_lo <= hi, axis=1)
                            & np.all(tet_hi >= lo, axis=1))[0]
            found = False
            for t in cand:
                if _sat_overlap(tri, v[t], tol):
                    links[int(t)].append(k)
                    found = True
            if not found:
                ignored += 1
    counts = np.array([len(l) for l in links], dtype=np.int64)
    mesh.linked_offsets = np.concatenate([[0], np.cumsum(counts)])
    mesh.linked_tris = np.array([k for l in links for k in l], dtype=np.int32)
    mesh.scene = scene
    mesh.invalidate_caches()
    return ignored


# ---------------------------------------------------------------------------
# full pipeline


def build_adaptive_mesh(grid: MediaGrid, params: ResampleParams, *,
                        scene: BoundaryScene | None = None,
                        gradient_method="regression", seed=0,
                        boundary="clamp", corner_samples=True,
                        jitter=1e-6):
    """Grid -> spacing field -> FCC resampling -> Delaunay -> gradients.

    The eight domain corners are added to the sample set so the hull spans
    the exact grid box; their media values come from the grid like every
    other sample.  Returns the mesh with gradients baked and the scene
    linked when given.
    """
    from .gradient import bake_gradients

    spacing_field = compute_spacing_field(grid, params)
    samples = resample_fcc(grid, spacing_field, params, seed=seed,
                           jitter=jitter, boundary=boundary)
    pos, vals, dloc = samples.positions, samples.values, samples.spacing
    if corner_samples:
        cpts, cvals = corner_points(grid)
        keep = []
        for i, cp in enumerate(cpts):
            if not len(pos) or np.min(np.linalg.norm(pos - cp, axis=1)) > 1e-9:
                keep.append(i)
        if keep:
            cd = _trilinear_field(grid, spacing_field, cpts[keep])
            pos = np.vstack([pos, cpts[keep]])
            vals = np.concatenate([vals, np.asarray(cvals)[keep]])
            dloc = np.concatenate([dloc, np.asarray(cd)])
    mesh = tetrahedralize(pos, vals, grid.quantity, grid.c0, spacing=dloc)
    bake_gradients(mesh, gradient_method)
    if scene is not None:
        link_boundary(mesh, scene)
    return mesh
