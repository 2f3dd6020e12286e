"""Cell-to-cell traversal of analytic ray curves through an adaptive mesh.

Each traversed cell contributes one analytic segment built from the cell's
baked gradient and the media value interpolated at the entry point.  The
exit is the earliest closed-form intersection with the cell's four face
planes; cells carrying linked boundary triangles test those first and
reflect specularly.  The loop is written with scalar math on purpose: it
is the hot path and runs per ray.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .curves import RaySegment, build_segment
from .mesh import AdaptiveMesh, OutsideDomainError


@dataclass
class TraceConfig:
    """Limits and tolerances of a single trace."""

    max_reflections: int = 64
    max_cells: int = 100000
    max_travel: float = math.inf
    epsilon_exit: float | None = None   # admissibility offset [m]; None: 1e-9 * scale

    def __post_init__(self):
        if self.max_reflections <= 0 or self.max_cells <= 0 or self.max_travel <= 0:
            raise ValueError("config limits must be positive")


@dataclass
class BoundaryEvent:
    """One specular reflection at a boundary triangle."""

    position: tuple
    incident: tuple
    reflected: tuple
    surface_id: int
    travel: float


@dataclass
class PropagationPath:
    """Ordered analytic segments plus boundary events for one ray."""

    segments: list = field(default_factory=list)
    cells: list = field(default_factory=list)
    entries: list = field(default_factory=list)
    exits: list = field(default_factory=list)
    events: list = field(default_factory=list)
    total_travel: float = 0.0
    termination: str = "exited"
    launch_direction: tuple = (1.0, 0.0, 0.0)
    hit_point: tuple | None = None
    hit_tangent: tuple | None = None
    points: np.ndarray | None = None    # stepper paths store their polyline
    meta: dict = field(default_factory=dict)

    def polyline(self, samples_per_segment=8):
        """Sampled 3D points along the path, reflections included."""
        if self.points is not None:
            return np.asarray(self.points)
        pts = []
        for seg, t_end in zip(self.segments, self._param_ends()):
            n = max(2, samples_per_segment)
            for u in np.linspace(0.0, t_end, n):
                pts.append(seg.point_at(u))
        return np.array(pts) if pts else np.zeros((0, 3))

    def _param_ends(self):
        return [seg.param_end for seg in self.segments]


def _reflect(dx, dy, dz, nx, ny, nz):
    dot = dx * nx + dy * ny + dz * nz
    rx = dx - 2.0 * dot * nx
    ry = dy - 2.0 * dot * ny
    rz = dz - 2.0 * dot * nz
    inv = 1.0 / math.sqrt(rx * rx + ry * ry + rz * rz)
    return rx * inv, ry * inv, rz * inv


def _tri_hot(scene):
    """Precomputed per-triangle plane and 2D barycentric frame."""
    hot = []
    for tri, n in zip(scene.triangles, scene.normals):
        a = tri[0]
        e1 = tri[1] - tri[0]
        e2 = tri[2] - tri[0]
        g11 = float(e1 @ e1)
        g12 = float(e1 @ e2)
        g22 = float(e2 @ e2)
        inv_det = 1.0 / (g11 * g22 - g12 * g12)
        hot.append((float(n[0]), float(n[1]), float(n[2]), float(n @ a),
                    float(a[0]), float(a[1]), float(a[2]),
                    float(e1[0]), float(e1[1]), float(e1[2]),
                    float(e2[0]), float(e2[1]), float(e2[2]),
                    g11, g12, g22, inv_det))
    return hot


def _point_in_tri(hot, px, py, pz, slack=1e-9):
    (nx, ny, nz, e, ax, ay, az, e1x, e1y, e1z, e2x, e2y, e2z,
     g11, g12, g22, inv_det) = hot
    wx, wy, wz = px - ax, py - ay, pz - az
    d1 = wx * e1x + wy * e1y + wz * e1z
    d2 = wx * e2x + wy * e2y + wz * e2z
    u = (g22 * d1 - g12 * d2) * inv_det
    v = (g11 * d2 - g12 * d1) * inv_det
    return u >= -slack and v >= -slack and u + v <= 1.0 + slack


def trace(mesh: AdaptiveMesh, origin, direction, cfg: TraceConfig | None = None,
          hint=None, force_linear=False):
    """Propagate one ray through the mesh (curved-ray traversal).

    Returns a PropagationPath; termination is "exited" (left the hull),
    "max_depth" (reflection budget), "max_travel", or "trapped" (no
    admissible exit found or the cell budget was hit).  With force_linear
    every cell is traversed by a straight segment regardless of its
    gradient, which is the reference behavior for uniform media.
    """
    if mesh.grad is None:
        raise ValueError("mesh has no gradients; run bake_gradients first")
    if mesh.quantity not in ("c", "n2"):
        raise ValueError(
            f"no analytic ray primitive for quantity {mesh.quantity!r}; "
            "build the mesh from a c or n2 grid")
    cfg = cfg or TraceConfig()
    px, py, pz = (float(v) for v in origin)
    dx, dy, dz = (float(v) for v in direction)
    dn = math.sqrt(dx * dx + dy * dy + dz * dz)
    if dn == 0.0:
        raise ValueError("direction must be nonzero")
    dx, dy, dz = dx / dn, dy / dn, dz / dn

    t_cell = mesh.locate((px, py, pz), hint)
    hot = mesh.hot_arrays()
    planes16 = hot["planes"]
    tf12 = hot["tf"]
    vals4 = hot["vals"]
    neigh = hot["neigh"]
    grad = hot["grad"]
    gmag = hot["gmag"]
    guni = hot["guni"]
    loff = hot["loff"]
    ltris = hot["ltris"]
    quantity = mesh.quantity

    scene = mesh.scene
    tri_hot = mesh._hot.setdefault(
        "tri", _tri_hot(scene) if scene is not None and len(scene) else [])
    surf_ids = scene.surface_ids if scene is not None else None

    span = mesh.points.max(axis=0) - mesh.points.min(axis=0)
    scale = math.sqrt(float(span @ span))
    eps_exit = cfg.epsilon_exit if cfg.epsilon_exit is not None else 1e-9 * scale

    path = PropagationPath(launch_direction=(dx, dy, dz))
    travel = 0.0
    n_reflections = 0
    n_cells = 0
    n_nudges = 0
    stalls = 0

    while True:
        n_cells += 1
        if n_cells > cfg.max_cells:
            path.termination = "trapped"
            path.meta["reason"] = "cell budget exhausted"
            break

        tf = tf12[t_cell].tolist()
        qx, qy, qz = px - tf[9], py - tf[10], pz - tf[11]
        l0 = tf[0] * qx + tf[1] * qy + tf[2] * qz
        l1 = tf[3] * qx + tf[4] * qy + tf[5] * qz
        l2 = tf[6] * qx + tf[7] * qy + tf[8] * qz
        l3 = 1.0 - l0 - l1 - l2
        worst = min(l0, l1, l2, l3)
        if worst < -1e-6:
            # drifted out of the advertised cell (sliver crossing); relocate
            try:
                t_cell = mesh.locate((px + 2 * eps_exit * dx,
                                      py + 2 * eps_exit * dy,
                                      pz + 2 * eps_exit * dz), hint=t_cell)
            except OutsideDomainError:
                path.termination = "exited"
                path.hit_point = (px, py, pz)
                path.hit_tangent = (dx, dy, dz)
                break
            n_nudges += 1
            tf = tf12[t_cell].tolist()
            qx, qy, qz = px - tf[9], py - tf[10], pz - tf[11]
            l0 = tf[0] * qx + tf[1] * qy + tf[2] * qz
            l1 = tf[3] * qx + tf[4] * qy + tf[5] * qz
            l2 = tf[6] * qx + tf[7] * qy + tf[8] * qz
            l3 = 1.0 - l0 - l1 - l2
        vv = vals4[t_cell].tolist()
        m0 = l0 * vv[0] + l1 * vv[1] + l2 * vv[2] + l3 * vv[3]
        if m0 <= 0.0:
            path.termination = "trapped"
            path.meta["reason"] = f"non-positive media value in cell {t_cell}"
            break

        g = grad[t_cell].tolist()
        seg = build_segment(px, py, pz, dx, dy, dz, g[0], g[1], g[2],
                            float(gmag[t_cell]),
                            bool(guni[t_cell]) or force_linear, m0, quantity)
        seg.cell = t_cell
        # admissibility offset in parameter units
        if seg.kind == "circular":
            eps_par = eps_exit / seg.rad
        elif seg.kind == "parabolic":
            eps_par = eps_exit * math.cos(seg.theta0)
        else:
            eps_par = eps_exit
        frame = seg.frame

        pl = planes16[t_cell].tolist()
        best_t = math.inf
        best_face = -1
        for f in range(4):
            o = 4 * f
            loc = frame.plane_to_local(pl[o], pl[o + 1], pl[o + 2], pl[o + 3])
            tt = seg.intersect_local(loc, t_min=eps_par)
            if tt is not None and tt < best_t:
                best_t = tt
                best_face = f

        # linked boundary triangles win ties against face exits
        tri_t = math.inf
        tri_idx = -1
        lo_k, hi_k = int(loff[t_cell]), int(loff[t_cell + 1])
        if hi_k > lo_k:
            window = best_t + eps_par if best_t < math.inf else None
            for kk in range(lo_k, hi_k):
                k = int(ltris[kk])
                th = tri_hot[k]
                loc = frame.plane_to_local(th[0], th[1], th[2], th[3])
                for tt in seg.intersect_local_all(loc, t_min=eps_par,
                                                  t_max=window):
                    if tt >= tri_t:
                        continue
                    hx, hy, hz = seg.point_at(tt)
                    if _point_in_tri(th, hx, hy, hz,
                                     slack=1e-9 * max(scale, 1.0)):
                        tri_t = tt
                        tri_idx = k
                        break

        if tri_idx >= 0 and (best_face < 0 or tri_t <= best_t + eps_par):
            hx, hy, hz = seg.point_at(tri_t)
            tx, ty, tz = seg.tangent_at(tri_t)
            th = tri_hot[tri_idx]
            nx, ny, nz = th[0], th[1], th[2]
            if tx * nx + ty * ny + tz * nz > 0.0:
                nx, ny, nz = -nx, -ny, -nz
            rx, ry, rz = _reflect(tx, ty, tz, nx, ny, nz)
            arc = seg.arc_length_to(tri_t)
            seg.param_end = tri_t
            seg.travel_length = arc
            travel += arc
            path.segments.append(seg)
            path.cells.append(t_cell)
            path.entries.append((px, py, pz))
            path.exits.append((hx, hy, hz))
            path.events.append(BoundaryEvent(
                (hx, hy, hz), (tx, ty, tz), (rx, ry, rz),
                int(surf_ids[tri_idx]), travel))
            n_reflections += 1
            px, py, pz = hx, hy, hz
            dx, dy, dz = rx, ry, rz
            if n_reflections >= cfg.max_reflections:
                path.termination = "max_depth"
                path.hit_point = (px, py, pz)
                path.hit_tangent = (dx, dy, dz)
                break
            if travel >= cfg.max_travel:
                path.termination = "max_travel"
                path.hit_point = (px, py, pz)
                path.hit_tangent = (dx, dy, dz)
                break
            stalls = 0
            continue

        if best_face < 0:
            # stuck (tangential or degenerate corner): nudge and relocate
            stalls += 1
            if stalls > 8:
                path.termination = "trapped"
                path.meta["reason"] = "no admissible exit"
                break
            nx2 = px + 4.0 * eps_exit * dx
            ny2 = py + 4.0 * eps_exit * dy
            nz2 = pz + 4.0 * eps_exit * dz
            try:
                t_cell = mesh.locate((nx2, ny2, nz2), hint=t_cell)
            except OutsideDomainError:
                path.termination = "exited"
                path.hit_point = (px, py, pz)
                path.hit_tangent = (dx, dy, dz)
                break
            px, py, pz = nx2, ny2, nz2
            n_nudges += 1
            continue
        stalls = 0

        # tie break between near-simultaneous face exits: leave through the
        # face most aligned with the exit tangent, against edge crawling
        ex_tan = seg.tangent_at(best_t)
        if best_t < math.inf:
            for f in range(4):
                if f == best_face:
                    continue
                o = 4 * f
                loc = frame.plane_to_local(pl[o], pl[o + 1], pl[o + 2], pl[o + 3])
                tt = seg.intersect_local(loc, t_min=eps_par)
                if tt is not None and tt <= best_t + eps_par:
                    d_new = (pl[o] * ex_tan[0] + pl[o + 1] * ex_tan[1]
                             + pl[o + 2] * ex_tan[2])
                    ob = 4 * best_face
                    d_old = (pl[ob] * ex_tan[0] + pl[ob + 1] * ex_tan[1]
                             + pl[ob + 2] * ex_tan[2])
                    if d_new > d_old:
                        best_face = f

        hx, hy, hz = seg.point_at(best_t)
        # the exit must still lie on this cell (an exit filtered by the
        # admissibility offset can otherwise hand over a crossing with a
        # face-plane extension far outside the cell)
        exq = (hx - tf[9], hy - tf[10], hz - tf[11])
        xl0 = tf[0] * exq[0] + tf[1] * exq[1] + tf[2] * exq[2]
        xl1 = tf[3] * exq[0] + tf[4] * exq[1] + tf[5] * exq[2]
        xl2 = tf[6] * exq[0] + tf[7] * exq[1] + tf[8] * exq[2]
        if min(xl0, xl1, xl2, 1.0 - xl0 - xl1 - xl2) < -1e-3:
            stalls += 1
            if stalls > 8:
                path.termination = "trapped"
                path.meta["reason"] = "exit left the cell"
                break
            nx2 = px + 4.0 * eps_exit * dx
            ny2 = py + 4.0 * eps_exit * dy
            nz2 = pz + 4.0 * eps_exit * dz
            try:
                t_cell = mesh.locate((nx2, ny2, nz2), hint=t_cell)
            except OutsideDomainError:
                path.termination = "exited"
                path.hit_point = (px, py, pz)
                path.hit_tangent = (dx, dy, dz)
                break
            px, py, pz = nx2, ny2, nz2
            n_nudges += 1
            continue
        tx, ty, tz = seg.tangent_at(best_t)
        arc = seg.arc_length_to(best_t)
        seg.param_end = best_t
        seg.travel_length = arc
        travel += arc
        path.segments.append(seg)
        path.cells.append(t_cell)
        path.entries.append((px, py, pz))
        path.exits.append((hx, hy, hz))
        px, py, pz = hx, hy, hz
        dx, dy, dz = tx, ty, tz
        if travel >= cfg.max_travel:
            path.termination = "max_travel"
            path.hit_point = (px, py, pz)
            path.hit_tangent = (dx, dy, dz)
            break
        nb = int(neigh[t_cell, best_face])
        if nb < 0:
            path.termination = "exited"
            path.hit_point = (px, py, pz)
            path.hit_tangent = (dx, dy, dz)
            break
        t_cell = nb

    path.total_travel = travel
    if path.hit_point is None:
        path.hit_point = (px, py, pz)
        path.hit_tangent = (dx, dy, dz)
    path.meta.setdefault("cells_traversed", n_cells)
    path.meta.setdefault("nudges", n_nudges)
    return path


def trace_straight(mesh, origin, direction, cfg=None, hint=None):
    """Linear-segment traversal of the same mesh (flat-media reference)."""
    return trace(mesh, origin, direction, cfg, hint, force_linear=True)


def fan_directions(angles_deg, azimuth_deg=0.0):
    """Unit directions at the given elevations within one vertical plane."""
    az = math.radians(azimuth_deg)
    dirs = []
    for a in np.atleast_1d(angles_deg):
        e = math.radians(float(a))
        dirs.append((math.cos(e) * math.cos(az), math.cos(e) * math.sin(az),
                     math.sin(e)))
    return dirs


def trace_fan(mesh, origin, angles_deg, cfg=None, azimuth_deg=0.0,
              chain_hint=True):
    """Trace a fan of rays sharing one origin.

    The origin cell is located once and reused as the point-location hint
    for every ray.  Per-ray failures are recorded in the returned list as
    the exception instead of aborting the batch.
    """
    cfg = cfg or TraceConfig()
    hint = None
    paths = []
    for d in fan_directions(angles_deg, azimuth_deg):
        try:
            p = trace(mesh, origin, d, cfg, hint=hint)
            paths.append(p)
            if chain_hint and p.cells:
                hint = p.cells[0]
        except (OutsideDomainError, ValueError) as exc:
            paths.append(exc)
    return paths
