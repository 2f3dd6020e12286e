"""Analytic ray curve primitives in a local ray-plane frame.

A ray entering a region whose media value varies linearly along a fixed
gradient direction follows a closed-form plane curve: a circular arc when
the propagation speed c is linear, a parabola when the squared index n^2
is linear.  The curve lives in the plane spanned by the gradient direction
(the local z axis) and the launch direction; the in-plane horizontal axis
r is chosen so the ray moves toward non-negative r.

Parametrization used throughout:

    linear     t = arc length  s >= 0
    circular   t = swept angle; the point sits at angle phi0 - t on the
               circle of radius Rad about (rc, zc), traversed clockwise
    parabolic  t = in-plane horizontal coordinate r >= 0,
               with z(r) = A r^2 + B r

Both curved parametrizations stay single valued through the turning point,
so one segment covers the ascending and descending branches.
"""

from __future__ import annotations

import math

_EPS_COS = 1e-12       # |cos(theta0)| below this: ray parallel to gradient
_EPS_UNIFORM = 1e-12   # gradient magnitude below this: uniform cell
_EPS_CURV = 1e-14      # curvature below this [1/m]: treat as straight
_EPS_PARALLEL = 1e-14


class PlaneLocal:
    """A 3D plane restricted to the ray plane: a_r * r + a_z * z = e."""

    __slots__ = ("a_r", "a_z", "e", "parallel")

    def __init__(self, a_r, a_z, e, parallel=False):
        self.a_r = a_r
        self.a_z = a_z
        self.e = e
        self.parallel = parallel


class RayPlaneFrame:
    """Orthonormal local frame: origin, r axis, z axis (gradient), normal."""

    __slots__ = ("ox", "oy", "oz", "rx", "ry", "rz", "zx", "zy", "zz")

    def __init__(self, ox, oy, oz, rx, ry, rz, zx, zy, zz):
        self.ox, self.oy, self.oz = ox, oy, oz
        self.rx, self.ry, self.rz = rx, ry, rz
        self.zx, self.zy, self.zz = zx, zy, zz

    @property
    def origin(self):
        return (self.ox, self.oy, self.oz)

    @property
    def r_axis(self):
        return (self.rx, self.ry, self.rz)

    @property
    def z_axis(self):
        return (self.zx, self.zy, self.zz)

    @property
    def normal(self):
        # normal = z_axis x r_axis, completing a right-handed (r, n, z) triad
        return (self.zy * self.rz - self.zz * self.ry,
                self.zz * self.rx - self.zx * self.rz,
                self.zx * self.ry - self.zy * self.rx)

    def lift(self, r, z):
        """Map in-plane coordinates (r, z) to a 3D point."""
        return (self.ox + r * self.rx + z * self.zx,
                self.oy + r * self.ry + z * self.zy,
                self.oz + r * self.rz + z * self.zz)

    def lift_dir(self, tr, tz):
        return (tr * self.rx + tz * self.zx,
                tr * self.ry + tz * self.zy,
                tr * self.rz + tz * self.zz)

    def plane_to_local(self, nx, ny, nz, e):
        a_r = nx * self.rx + ny * self.ry + nz * self.rz
        a_z = nx * self.zx + ny * self.zy + nz * self.zz
        e_loc = e - (nx * self.ox + ny * self.oy + nz * self.oz)
        scale = math.sqrt(nx * nx + ny * ny + nz * nz)
        par = math.hypot(a_r, a_z) <= _EPS_PARALLEL * max(scale, 1.0)
        return PlaneLocal(a_r, a_z, e_loc, par)


class DomainError(ValueError):
    """Parameter outside a segment's valid range."""


class RaySegment:
    """One analytic curve piece: linear, circular, or parabolic.

    Fields follow the launch state: `alpha` is the gradient magnitude in
    the cell, `m0` the media value at the segment origin (c or n^2),
    `xi0` the conserved Snell constant, `theta0` the launch angle from the
    r axis.  Kind-specific coefficients are cached at construction.
    """

    __slots__ = ("kind", "frame", "alpha", "m0", "xi0", "theta0",
                 "dirx", "diry", "dirz",
                 "rad", "rc", "zc", "phi0", "A", "B",
                 "param_end", "travel_length", "cell")

    def __init__(self, kind, frame, alpha, m0, xi0, theta0, direction):
        self.kind = kind
        self.frame = frame
        self.alpha = alpha
        self.m0 = m0
        self.xi0 = xi0
        self.theta0 = theta0
        self.dirx, self.diry, self.dirz = direction
        self.rad = self.rc = self.zc = self.phi0 = 0.0
        self.A = self.B = 0.0
        self.param_end = math.inf
        self.travel_length = 0.0
        self.cell = -1

    # -- in-plane geometry ------------------------------------------------

    def point_frame(self, t):
        if self.kind == "circular":
            phi = self.phi0 - t
            return (self.rc + self.rad * math.cos(phi),
                    self.zc + self.rad * math.sin(phi))
        if self.kind == "parabolic":
            return (t, (self.A * t + self.B) * t)
        c, s = math.cos(self.theta0), math.sin(self.theta0)
        return (t * c, t * s)

    def tangent_frame(self, t):
        if self.kind == "circular":
            phi = self.phi0 - t
            return (math.sin(phi), -math.cos(phi))
        if self.kind == "parabolic":
            zp = 2.0 * self.A * t + self.B
            inv = 1.0 / math.sqrt(1.0 + zp * zp)
            return (inv, zp * inv)
        return (math.cos(self.theta0), math.sin(self.theta0))

    def z_of_param(self, t):
        return self.point_frame(t)[1]

    def param_of_z(self, z):
        """Parameter on the pre-turning branch reaching height z.

        Raises DomainError for z past the turning point or behind the
        launch, where the monotone first branch is undefined.
        """
        if self.kind == "linear":
            s = math.sin(self.theta0)
            if abs(s) < _EPS_COS:
                if z == 0.0:
                    return 0.0
                raise DomainError("horizontal linear ray never reaches z != 0")
            t = z / s
            if t < 0.0:
                raise DomainError("z behind the launch point")
            return t
        if self.kind == "circular":
            sphi = (z - self.zc) / self.rad
            if sphi < -1.0 or sphi > 1.0:
                raise DomainError("z beyond the turning point")
            if math.sin(self.theta0) >= 0.0:
                if z < 0.0:
                    raise DomainError("z behind the launch point")
                phi = math.pi - math.asin(sphi)
            else:
                if z > 0.0:
                    raise DomainError("z behind the launch point")
                phi = math.asin(sphi)
            t = self.phi0 - phi
            return 0.0 if abs(t) < 1e-15 else t
        # parabolic: z = A r^2 + B r, A > 0
        if self.B >= 0.0:
            if z < 0.0:
                raise DomainError("z behind the launch point")
            disc = self.B * self.B + 4.0 * self.A * z
            return 2.0 * z / (self.B + math.sqrt(disc)) if z != 0.0 else 0.0
        disc = self.B * self.B + 4.0 * self.A * z
        if disc < 0.0:
            raise DomainError("z beyond the turning point")
        if z > 0.0:
            raise DomainError("z behind the launch point")
        big = (-self.B + math.sqrt(disc)) / (2.0 * self.A)
        if big <= 0.0:
            return 0.0
        return -z / (self.A * big)

    def turning_param(self):
        """Parameter of the turning point, or None if not ahead of the ray."""
        if self.kind == "circular":
            t = self.phi0 - 0.5 * math.pi
            return t if t >= 0.0 else None
        if self.kind == "parabolic":
            if self.B > 0.0:
                return None
            return -self.B / (2.0 * self.A)
        return None

    def turning_z(self):
        t = self.turning_param()
        return None if t is None else self.z_of_param(t)

    # -- 3D interface ------------------------------------------------------

    def point_at(self, t):
        r, z = self.point_frame(t)
        return self.frame.lift(r, z)

    def tangent_at(self, t):
        tr, tz = self.tangent_frame(t)
        return self.frame.lift_dir(tr, tz)

    def arc_length_to(self, t):
        if self.kind == "circular":
            return self.rad * abs(t)
        if self.kind == "parabolic":
            return _parabola_arc(self.A, self.B, t)
        return abs(t)

    def media_value_at(self, t):
        """Cell-linear media value along the curve (c or n^2)."""
        return self.m0 + self.alpha * self.point_frame(t)[1]

    def intersect_local(self, loc: PlaneLocal, t_min=1e-12, t_max=None):
        """Smallest parameter > t_min where the curve meets a local plane.

        Returns the parameter or None.  `t_max` defaults to the segment's
        own parameter bound.
        """
        hi = self.param_end if t_max is None else min(t_max, self.param_end)
        if loc.parallel:
            return None
        a_r, a_z, e = loc.a_r, loc.a_z, loc.e
        if self.kind == "linear":
            c, s = math.cos(self.theta0), math.sin(self.theta0)
            den = a_r * c + a_z * s
            if den == 0.0:
                return None
            t = e / den
            return t if t_min < t <= hi else None
        if self.kind == "circular":
            M = math.hypot(a_r, a_z)
            C = (e - a_r * self.rc - a_z * self.zc) / (self.rad * M)
            if C > 1.0:
                if C > 1.0 + 1e-9:
                    return None
                C = 1.0
            elif C < -1.0:
                if C < -1.0 - 1e-9:
                    return None
                C = -1.0
            psi = math.atan2(a_z, a_r)
            delta = math.acos(C)
            best = None
            for phi in (psi - delta, psi + delta):
                for k in (0.0, 2.0 * math.pi, -2.0 * math.pi):
                    t = self.phi0 - (phi + k)
                    if t_min < t <= hi and (best is None or t < best):
                        best = t
            return best
        # parabolic: (a_z A) t^2 + (a_r + a_z B) t - e = 0
        qa = a_z * self.A
        qb = a_r + a_z * self.B
        qc = -e
        scale = abs(qa) * max(hi if math.isfinite(hi) else 1.0, 1.0) + abs(qb)
        if abs(qa) <= 1e-16 * max(abs(qb), 1e-300):
            if qb == 0.0:
                return None
            t = -qc / qb
            return t if t_min < t <= hi else None
        disc = qb * qb - 4.0 * qa * qc
        if disc < 0.0:
            return None
        sq = math.sqrt(disc)
        if qb >= 0.0:
            q = -0.5 * (qb + sq)
        else:
            q = -0.5 * (qb - sq)
        roots = []
        if qa != 0.0:
            roots.append(q / qa)
        if q != 0.0:
            roots.append(qc / q)
        best = None
        for t in roots:
            if t_min < t <= hi and (best is None or t < best):
                best = t
        return best

    def intersect_local_all(self, loc: PlaneLocal, t_min=1e-12, t_max=None):
        """All admissible plane crossings in ascending parameter order."""
        return _segment_intersections_all(self, loc, t_min, t_max)


def _segment_intersections_all(seg, loc, t_min, t_max):
    hi = seg.param_end if t_max is None else min(t_max, seg.param_end)
    if loc.parallel:
        return []
    a_r, a_z, e = loc.a_r, loc.a_z, loc.e
    out = []
    if seg.kind == "linear":
        c, s = math.cos(seg.theta0), math.sin(seg.theta0)
        den = a_r * c + a_z * s
        if den != 0.0:
            t = e / den
            if t_min < t <= hi:
                out.append(t)
        return out
    if seg.kind == "circular":
        M = math.hypot(a_r, a_z)
        C = (e - a_r * seg.rc - a_z * seg.zc) / (seg.rad * M)
        if abs(C) > 1.0 + 1e-9:
            return []
        C = max(-1.0, min(1.0, C))
        psi = math.atan2(a_z, a_r)
        delta = math.acos(C)
        for phi in (psi - delta, psi + delta):
            for k in (0.0, 2.0 * math.pi, -2.0 * math.pi):
                t = seg.phi0 - (phi + k)
                if t_min < t <= hi:
                    out.append(t)
        return sorted(set(out))
    qa = a_z * seg.A
    qb = a_r + a_z * seg.B
    qc = -e
    if abs(qa) <= 1e-16 * max(abs(qb), 1e-300):
        if qb != 0.0:
            t = -qc / qb
            if t_min < t <= hi:
                out.append(t)
        return out
    disc = qb * qb - 4.0 * qa * qc
    if disc < 0.0:
        return []
    sq = math.sqrt(disc)
    q = -0.5 * (qb + sq) if qb >= 0.0 else -0.5 * (qb - sq)
    roots = []
    if qa != 0.0:
        roots.append(q / qa)
    if q != 0.0:
        roots.append(qc / q)
    for t in roots:
        if t_min < t <= hi:
            out.append(t)
    return sorted(set(out))


def _parabola_arc(A, B, r):
    """Closed-form arc length of z = A u^2 + B u over u in [0, r]."""
    if r == 0.0:
        return 0.0
    v1 = 2.0 * A * r + B
    if abs(2.0 * A * r) < 1e-8 * (1.0 + abs(B)):
        vm = A * r + B
        return abs(r) * math.sqrt(1.0 + vm * vm)
    fa = v1 * math.sqrt(1.0 + v1 * v1) + math.asinh(v1)
    fb = B * math.sqrt(1.0 + B * B) + math.asinh(B)
    return abs((fa - fb) / (4.0 * A))


def _perpendicular(dx, dy, dz):
    # any unit vector orthogonal to (dx, dy, dz)
    if abs(dx) <= abs(dy) and abs(dx) <= abs(dz):
        px, py, pz = 0.0, -dz, dy
    elif abs(dy) <= abs(dz):
        px, py, pz = -dz, 0.0, dx
    else:
        px, py, pz = -dy, dx, 0.0
    inv = 1.0 / math.sqrt(px * px + py * py + pz * pz)
    return px * inv, py * inv, pz * inv


def build_segment(px, py, pz, dx, dy, dz, gx, gy, gz, alpha, uniform,
                  m0, quantity):
    """Construct the analytic segment for a launch state inside one cell.

    `quantity` is "c" (circular arcs) or "n2" (parabolic arcs).  The
    direction must be unit length and the media value m0 positive.  Falls
    back to a straight segment for uniform cells, launches parallel to the
    gradient, and curvatures too small to matter numerically.
    """
    if m0 <= 0.0:
        raise ValueError("media value at segment origin must be positive")
    direction = (dx, dy, dz)
    if uniform or alpha <= _EPS_UNIFORM:
        zx, zy, zz = _perpendicular(dx, dy, dz)
        frame = RayPlaneFrame(px, py, pz, dx, dy, dz, zx, zy, zz)
        return RaySegment("linear", frame, 0.0, m0, 0.0, 0.0, direction)
    inv_a = 1.0 / alpha
    zx, zy, zz = gx * inv_a, gy * inv_a, gz * inv_a
    d_z = dx * zx + dy * zy + dz * zz
    wx, wy, wz = dx - d_z * zx, dy - d_z * zy, dz - d_z * zz
    wn = math.sqrt(wx * wx + wy * wy + wz * wz)
    if wn < _EPS_COS:
        # straight ray along the gradient axis
        rx, ry, rz = _perpendicular(zx, zy, zz)
        frame = RayPlaneFrame(px, py, pz, rx, ry, rz, zx, zy, zz)
        theta0 = math.copysign(0.5 * math.pi, d_z)
        seg = RaySegment("linear", frame, alpha, m0, 0.0, theta0, direction)
        return seg
    inv_w = 1.0 / wn
    rx, ry, rz = wx * inv_w, wy * inv_w, wz * inv_w
    frame = RayPlaneFrame(px, py, pz, rx, ry, rz, zx, zy, zz)
    cos0 = wn
    sin0 = d_z
    theta0 = math.atan2(sin0, cos0)
    if quantity == "c":
        xi0 = cos0 / m0
        curvature = alpha * xi0
        if curvature <= _EPS_CURV:
            return RaySegment("linear", frame, alpha, m0, xi0, theta0, direction)
        seg = RaySegment("circular", frame, alpha, m0, xi0, theta0, direction)
        seg.rad = 1.0 / (xi0 * alpha)
        seg.rc = seg.rad * sin0
        seg.zc = -seg.rad * cos0
        seg.phi0 = math.atan2(cos0, -sin0)
        seg.param_end = seg.phi0
        return seg
    if quantity == "n2":
        n0 = math.sqrt(m0)
        xi0 = n0 * cos0
        curvature = alpha * xi0 / (2.0 * m0 * n0)
        if curvature <= _EPS_CURV:
            return RaySegment("linear", frame, alpha, m0, xi0, theta0, direction)
        seg = RaySegment("parabolic", frame, alpha, m0, xi0, theta0, direction)
        seg.A = alpha / (4.0 * xi0 * xi0)
        seg.B = sin0 / cos0
        return seg
    raise ValueError(f"no analytic curve for quantity {quantity!r}")


# ---------------------------------------------------------------------------
# public operations


def make_segment(origin, direction, cell_gradient, media_value, quantity="c"):
    """Build the analytic ray segment for a launch inside one cell.

    `cell_gradient` is a CellGradient or any object with vector /
    magnitude / is_uniform attributes (a plain 3-sequence also works).
    """
    px, py, pz = (float(v) for v in origin)
    dx, dy, dz = (float(v) for v in direction)
    norm = math.sqrt(dx * dx + dy * dy + dz * dz)
    if abs(norm - 1.0) > 1e-9:
        raise ValueError("direction must be unit length")
    if hasattr(cell_gradient, "vector"):
        gx, gy, gz = (float(v) for v in cell_gradient.vector)
        alpha = float(cell_gradient.magnitude)
        uniform = bool(cell_gradient.is_uniform)
    else:
        gx, gy, gz = (float(v) for v in cell_gradient)
        alpha = math.sqrt(gx * gx + gy * gy + gz * gz)
        uniform = False
    return build_segment(px, py, pz, dx, dy, dz, gx, gy, gz, alpha, uniform,
                         float(media_value), quantity)


def eval_r(segment: RaySegment, z):
    """In-plane horizontal offset r at height z on the pre-turning branch."""
    t = segment.param_of_z(z)
    return segment.point_frame(t)[0]


def tangent(segment: RaySegment, z):
    """3D unit tangent at height z (pre-turning branch)."""
    t = segment.param_of_z(z)
    return segment.tangent_at(t)


def turning_point(segment: RaySegment):
    """Frame height of the turning point, or None if the ray never turns."""
    return segment.turning_z()


def arc_length(segment: RaySegment, z=None, param=None):
    """Closed-form arc length from the origin to a height or parameter."""
    if (z is None) == (param is None):
        raise ValueError("pass exactly one of z or param")
    t = segment.param_of_z(z) if param is None else param
    return segment.arc_length_to(t)


def intersect_plane(segment: RaySegment, normal, offset, t_min=1e-12,
                    t_max=None):
    """First crossing of the segment with the 3D plane normal . x = offset.

    Returns (parameter, hit_point) for the smallest admissible parameter
    greater than t_min, or None when the curve misses the plane.
    """
    nx, ny, nz = (float(v) for v in normal)
    loc = segment.frame.plane_to_local(nx, ny, nz, float(offset))
    t = segment.intersect_local(loc, t_min=t_min, t_max=t_max)
    if t is None:
        return None
    return t, segment.point_at(t)
