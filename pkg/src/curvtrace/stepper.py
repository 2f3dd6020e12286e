"""Piecewise-linear ray stepping: the ground-truth and baseline tracer.

Integrates the ray equation in first-order form on the state (position,
slowness-like vector): w = dir/c for speed media, w = n*dir for index
media.  Euler and classic fourth-order Runge-Kutta steppers are provided,
a convergence driver that halves the step until the hit point settles,
and a vectorized batch variant for large ray sets on analytic media.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .media import AnalyticMedia
from .mesh import AdaptiveMesh, OutsideDomainError
from .traversal import BoundaryEvent, PropagationPath, _reflect, _tri_hot, _point_in_tri


class ConvergenceError(RuntimeError):
    pass


@dataclass
class StepperConfig:
    """Step size, integrator choice, and the usual trace limits."""

    ds: float = 1.0
    integrator: str = "rk4"
    max_reflections: int = 64
    max_travel: float = math.inf
    max_steps: int = 5_000_000
    store_every: int = 0   # 0: endpoints only; k: keep every k-th position

    def __post_init__(self):
        if self.ds <= 0:
            raise ValueError("ds must be > 0")
        if self.integrator not in ("euler", "rk4"):
            raise ValueError("integrator must be 'euler' or 'rk4'")


class MeshMedia:
    """Mesh-interpolated media source: barycentric values, cell gradients."""

    def __init__(self, mesh: AdaptiveMesh):
        if mesh.grad is None:
            raise ValueError("mesh has no gradients; run bake_gradients first")
        self.mesh = mesh
        self.quantity = mesh.quantity
        self.c0 = mesh.c0
        self._hint = None

    @property
    def bounds(self):
        return self.mesh.points.min(axis=0), self.mesh.points.max(axis=0)

    def eval(self, x, y, z):
        cell = self.mesh.locate((x, y, z), self._hint)
        self._hint = cell
        v = self.mesh.interpolate_at(cell, (x, y, z))
        g = self.mesh.grad[cell]
        return v, float(g[0]), float(g[1]), float(g[2])


def _slowness_state(media, x, y, z, dx, dy, dz):
    v = media.eval(x, y, z)[0]
    if media.quantity == "c":
        return dx / v, dy / v, dz / v
    n = v if media.quantity == "n" else math.sqrt(v)
    return n * dx, n * dy, n * dz


def _deriv(media, x, y, z, wx, wy, wz):
    """d/ds of (x, w): unit tangent and the media-gradient forcing."""
    v, gx, gy, gz = media.eval(x, y, z)
    wn = math.sqrt(wx * wx + wy * wy + wz * wz)
    ux, uy, uz = wx / wn, wy / wn, wz / wn
    q = media.quantity
    if q == "c":
        f = -1.0 / (v * v)
        return ux, uy, uz, f * gx, f * gy, f * gz
    if q == "n":
        return ux, uy, uz, gx, gy, gz
    f = 0.5 / math.sqrt(v)
    return ux, uy, uz, f * gx, f * gy, f * gz


def _clip_to_box(p0, p1, lo, hi):
    """Fraction of the chord p0 -> p1 inside the box, and the exit point."""
    tau = 1.0
    for a in range(3):
        d = p1[a] - p0[a]
        if d > 0 and p1[a] > hi[a]:
            tau = min(tau, (hi[a] - p0[a]) / d)
        elif d < 0 and p1[a] < lo[a]:
            tau = min(tau, (lo[a] - p0[a]) / d)
    tau = max(tau, 0.0)
    return tau, tuple(p0[a] + tau * (p1[a] - p0[a]) for a in range(3))


def step_trace(media, origin, direction, cfg: StepperConfig,
               scene=None, bounds=None):
    """Integrate one ray with fixed-size linear steps.

    `media` is an AnalyticMedia or MeshMedia.  Scene triangles are tested
    against the straight chord of every step and reflect specularly.
    `bounds` is the (lo, hi) domain box; it defaults to the media's own
    bounds when it has any (mesh media), and is required otherwise.
    """
    if bounds is None:
        if hasattr(media, "bounds"):
            lo, hi = media.bounds
        else:
            raise ValueError("bounds required for unbounded analytic media")
    else:
        lo, hi = (np.asarray(b, dtype=float) for b in bounds)
    x, y, z = (float(v) for v in origin)
    dx, dy, dz = (float(v) for v in direction)
    dn = math.sqrt(dx * dx + dy * dy + dz * dz)
    dx, dy, dz = dx / dn, dy / dn, dz / dn
    wx, wy, wz = _slowness_state(media, x, y, z, dx, dy, dz)

    tri_hot = _tri_hot(scene) if scene is not None and len(scene) else []
    surf_ids = scene.surface_ids if scene is not None else None

    path = PropagationPath(launch_direction=(dx, dy, dz))
    path.meta["integrator"] = cfg.integrator
    path.meta["ds"] = cfg.ds
    pts = [(x, y, z)]
    travel = 0.0
    refl = 0
    n_steps = 0
    ds = cfg.ds
    rk4 = cfg.integrator == "rk4"
    for step in range(cfg.max_steps):
        n_steps += 1
        if rk4:
            a = _deriv(media, x, y, z, wx, wy, wz)
            b = _deriv(media, x + 0.5 * ds * a[0], y + 0.5 * ds * a[1],
                       z + 0.5 * ds * a[2], wx + 0.5 * ds * a[3],
                       wy + 0.5 * ds * a[4], wz + 0.5 * ds * a[5])
            c = _deriv(media, x + 0.5 * ds * b[0], y + 0.5 * ds * b[1],
                       z + 0.5 * ds * b[2], wx + 0.5 * ds * b[3],
                       wy + 0.5 * ds * b[4], wz + 0.5 * ds * b[5])
            d = _deriv(media, x + ds * c[0], y + ds * c[1], z + ds * c[2],
                       wx + ds * c[3], wy + ds * c[4], wz + ds * c[5])
            x1 = x + ds / 6.0 * (a[0] + 2 * b[0] + 2 * c[0] + d[0])
            y1 = y + ds / 6.0 * (a[1] + 2 * b[1] + 2 * c[1] + d[1])
            z1 = z + ds / 6.0 * (a[2] + 2 * b[2] + 2 * c[2] + d[2])
            wx1 = wx + ds / 6.0 * (a[3] + 2 * b[3] + 2 * c[3] + d[3])
            wy1 = wy + ds / 6.0 * (a[4] + 2 * b[4] + 2 * c[4] + d[4])
            wz1 = wz + ds / 6.0 * (a[5] + 2 * b[5] + 2 * c[5] + d[5])
        else:
            a = _deriv(media, x, y, z, wx, wy, wz)
            x1, y1, z1 = x + ds * a[0], y + ds * a[1], z + ds * a[2]
            wx1, wy1, wz1 = wx + ds * a[3], wy + ds * a[4], wz + ds * a[5]

        # boundary triangles against the straight chord of this step
        if tri_hot:
            seg_len = math.sqrt((x1 - x) ** 2 + (y1 - y) ** 2 + (z1 - z) ** 2)
            best_tau, best_k = math.inf, -1
            for k, th in enumerate(tri_hot):
                nx, ny, nz, e = th[0], th[1], th[2], th[3]
                f0 = nx * x + ny * y + nz * z - e
                f1 = nx * x1 + ny * y1 + nz * z1 - e
                if f0 == f1 or (f0 > 0) == (f1 > 0):
                    continue
                tau = f0 / (f0 - f1)
                if tau <= 1e-12 or tau >= best_tau:
                    continue
                hx, hy, hz = x + tau * (x1 - x), y + tau * (y1 - y), z + tau * (z1 - z)
                if _point_in_tri(th, hx, hy, hz):
                    best_tau, best_k = tau, k
            if best_k >= 0:
                th = tri_hot[best_k]
                hx, hy, hz = (x + best_tau * (x1 - x), y + best_tau * (y1 - y),
                              z + best_tau * (z1 - z))
                wn = math.sqrt(wx * wx + wy * wy + wz * wz)
                ux, uy, uz = wx / wn, wy / wn, wz / wn
                nx, ny, nz = th[0], th[1], th[2]
                if ux * nx + uy * ny + uz * nz > 0:
                    nx, ny, nz = -nx, -ny, -nz
                rx, ry, rz = _reflect(ux, uy, uz, nx, ny, nz)
                travel += best_tau * seg_len
                path.events.append(BoundaryEvent(
                    (hx, hy, hz), (ux, uy, uz), (rx, ry, rz),
                    int(surf_ids[best_k]), travel))
                x, y, z = hx, hy, hz
                wx, wy, wz = (wn * rx, wn * ry, wn * rz)
                pts.append((x, y, z))
                refl += 1
                if refl >= cfg.max_reflections:
                    path.termination = "max_depth"
                    break
                continue

        if not (lo[0] <= x1 <= hi[0] and lo[1] <= y1 <= hi[1]
                and lo[2] <= z1 <= hi[2]):
            tau, hit = _clip_to_box((x, y, z), (x1, y1, z1), lo, hi)
            travel += tau * ds
            x, y, z = hit
            pts.append(hit)
            path.termination = "exited"
            break
        x, y, z = x1, y1, z1
        wx, wy, wz = wx1, wy1, wz1
        travel += ds
        if cfg.store_every and step % cfg.store_every == 0:
            pts.append((x, y, z))
        if travel >= cfg.max_travel:
            path.termination = "max_travel"
            pts.append((x, y, z))
            break
    else:
        path.termination = "max_travel"
        pts.append((x, y, z))

    wn = math.sqrt(wx * wx + wy * wy + wz * wz)
    path.hit_point = (x, y, z)
    path.hit_tangent = (wx / wn, wy / wn, wz / wn)
    path.total_travel = travel
    if pts[-1] != (x, y, z):
        pts.append((x, y, z))
    path.points = np.array(pts)
    path.meta["steps"] = n_steps
    return path


def converged_trace(media, origin, direction, tol, ds0=None, cfg=None,
                    scene=None, bounds=None, max_halvings=14):
    """Halve the step until successive hit points differ by less than tol.

    Returns (path, info); info records the ds sequence and hit deltas.
    Raises ConvergenceError when the budget of halvings runs out.
    """
    base = cfg or StepperConfig()
    if ds0 is None:
        ds0 = base.ds
    prev = None
    history = []
    ds = ds0
    for k in range(max_halvings + 1):
        c = StepperConfig(ds=ds, integrator=base.integrator,
                          max_reflections=base.max_reflections,
                          max_travel=base.max_travel, max_steps=base.max_steps,
                          store_every=base.store_every)
        path = step_trace(media, origin, direction, c, scene=scene, bounds=bounds)
        if prev is not None:
            delta = math.dist(path.hit_point, prev.hit_point)
            history.append((ds, delta))
            if delta < tol:
                path.meta["converged_ds"] = ds
                path.meta["history"] = history
                return path, {"ds": ds, "history": history, "iterations": k}
        prev = path
        ds *= 0.5
    raise ConvergenceError(f"no convergence after {max_halvings} halvings: {history}")


# ---------------------------------------------------------------------------
# vectorized batch stepping (analytic media, no scene)


def batch_step_trace(media: AnalyticMedia, origins, directions, ds, bounds,
                     integrator="rk4", max_steps=2_000_000):
    """Step many rays at once through analytic media in an empty scene.

    Returns (hit_points, travels).  Rays all use the same step size and
    stop at the domain box.  Matches step_trace ray for ray; the scalar
    version remains the reference implementation.
    """
    lo, hi = (np.asarray(b, dtype=float) for b in bounds)
    x = np.atleast_2d(np.asarray(origins, dtype=float)).copy()
    if x.shape[0] == 1 and len(np.atleast_2d(directions)) > 1:
        x = np.repeat(x, len(np.atleast_2d(directions)), axis=0)
    d = np.atleast_2d(np.asarray(directions, dtype=float))
    d = d / np.linalg.norm(d, axis=1, keepdims=True)
    n = len(x)
    q = media.quantity
    v0 = media.value_batch(x)
    if q == "c":
        w = d / v0[:, None]
    elif q == "n":
        w = d * v0[:, None]
    else:
        w = d * np.sqrt(v0)[:, None]

    hits = np.zeros((n, 3))
    travels = np.zeros(n)
    active = np.arange(n)

    def deriv(xs, ws):
        v, g = media.eval_batch(xs)
        u = ws / np.linalg.norm(ws, axis=1, keepdims=True)
        if q == "c":
            f = (-1.0 / (v * v))[:, None] * g
        elif q == "n":
            f = g
        else:
            f = (0.5 / np.sqrt(v))[:, None] * g
        return u, f

    steps = 0
    while len(active) and steps < max_steps:
        steps += 1
        xa, wa = x[active], w[active]
        if integrator == "rk4":
            u1, f1 = deriv(xa, wa)
            u2, f2 = deriv(xa + 0.5 * ds * u1, wa + 0.5 * ds * f1)
            u3, f3 = deriv(xa + 0.5 * ds * u2, wa + 0.5 * ds * f2)
            u4, f4 = deriv(xa + ds * u3, wa + ds * f3)
            x1 = xa + ds / 6.0 * (u1 + 2 * u2 + 2 * u3 + u4)
            w1 = wa + ds / 6.0 * (f1 + 2 * f2 + 2 * f3 + f4)
        else:
            u1, f1 = deriv(xa, wa)
            x1 = xa + ds * u1
            w1 = wa + ds * f1
        outside = np.any((x1 < lo) | (x1 > hi), axis=1)
        if outside.any():
            gone = active[outside]
            p0, p1 = x[gone], x1[outside]
            seg = p1 - p0
            tau = np.ones(len(gone))
            for a in range(3):
                with np.errstate(divide="ignore", invalid="ignore"):
                    t_hi = (hi[a] - p0[:, a]) / seg[:, a]
                    t_lo = (lo[a] - p0[:, a]) / seg[:, a]
                pos = seg[:, a] > 0
                neg = seg[:, a] < 0
                over = pos & (p1[:, a] > hi[a])
                under = neg & (p1[:, a] < lo[a])
                tau[over] = np.minimum(tau[over], t_hi[over])
                tau[under] = np.minimum(tau[under], t_lo[under])
            tau = np.clip(tau, 0.0, 1.0)
            hits[gone] = p0 + tau[:, None] * seg
            travels[gone] += tau * ds
        keep = ~outside
        x[active[keep]] = x1[keep]
        w[active[keep]] = w1[keep]
        travels[active[keep]] += ds
        active = active[keep]
    if len(active):
        hits[active] = x[active]
    return hits, travels
