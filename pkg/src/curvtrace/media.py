"""Physically based media profiles and the sampled grids they are baked onto.

Atmospheric sound speed and refractive index models used as benchmarks:
a logarithmic stratified profile, cosine-mode turbulence, a localized hot
spot, wind over an analytic hill, and mirage index profiles.  All profiles
can be evaluated in any of the three interchangeable quantities

    c   propagation speed [m/s]
    n   refractive index, n = c0 / c
    n2  squared refractive index

with exact algebraic conversions between them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

QUANTITIES = ("c", "n", "n2")


@dataclass(frozen=True)
class AtmosphericConstants:
    """Gas and optics constants used by the atmospheric models."""

    molar_mass: float = 28.96e-3        # kg/mol
    gas_constant: float = 8.3145        # J/(mol K)
    gamma: float = 1.4                  # cp/cv for dry air
    dry_air_gas_constant: float = 287.05  # J/(kg K)
    cauchy_a: float = 2879e-5
    cauchy_b: float = 567e-5            # um^2

    def __post_init__(self):
        for name in ("molar_mass", "gas_constant", "gamma",
                     "dry_air_gas_constant", "cauchy_a", "cauchy_b"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")


DEFAULT_CONSTANTS = AtmosphericConstants()

# Sea-level standard conditions used to normalize density for the
# Gladstone-Dale relation.
STANDARD_PRESSURE = 101325.0   # Pa
STANDARD_TEMPERATURE = 288.15  # K


def density_from_gas_law(pressure, temperature, consts=DEFAULT_CONSTANTS):
    """Air density rho = P*M/(R*T) from the perfect gas law [kg/m^3]."""
    if pressure <= 0:
        raise ValueError("pressure must be > 0")
    if temperature <= 0:
        raise ValueError("temperature must be > 0")
    return pressure * consts.molar_mass / (consts.gas_constant * temperature)


def reference_density(consts=DEFAULT_CONSTANTS):
    """Sea-level standard density used to normalize the Gladstone-Dale law."""
    return density_from_gas_law(STANDARD_PRESSURE, STANDARD_TEMPERATURE, consts)


def cauchy_index(wavelength_um, consts=DEFAULT_CONSTANTS):
    """Wavelength-dependent index n(lambda) = a*(1 + b/lambda^2) + 1.

    The wavelength is in micrometers.  The constants follow the printed
    source values; note that they give n - 1 about 100x the physical value
    for air, which we reproduce as printed rather than silently correct.
    """
    if wavelength_um <= 0:
        raise ValueError("wavelength must be > 0")
    a, b = consts.cauchy_a, consts.cauchy_b
    return a * (1.0 + b / (wavelength_um * wavelength_um)) + 1.0


def light_refractive_index(rho, wavelength_um, consts=DEFAULT_CONSTANTS):
    """Gladstone-Dale index of air at density rho [kg/m^3].

    n(x, lambda) = rho_rel * (n(lambda) - 1) + 1 with rho_rel the density
    relative to the sea-level reference, so rho = reference_density()
    reproduces the standard air index.
    """
    if rho < 0:
        raise ValueError("density must be >= 0")
    n_lam = cauchy_index(wavelength_um, consts)
    rho_rel = rho / reference_density(consts)
    return rho_rel * (n_lam - 1.0) + 1.0


def sound_speed_from_temperature(temperature, consts=DEFAULT_CONSTANTS):
    """Dry-air sound speed c = sqrt(gamma * Rd * T) [m/s].

    The virtual temperature is approximated by the absolute temperature,
    i.e. humidity effects are ignored.
    """
    if temperature <= 0:
        raise ValueError("temperature must be > 0")
    return math.sqrt(consts.gamma * consts.dry_air_gas_constant * temperature)


# ---------------------------------------------------------------------------
# quantity conversions


def convert_values(values, src, dst, c0):
    """Convert an array (or scalar) between the c / n / n2 quantities."""
    if src not in QUANTITIES or dst not in QUANTITIES:
        raise ValueError(f"unknown quantity: {src!r} -> {dst!r}")
    if src == dst:
        return values
    if src == "c":
        n = c0 / values
    elif src == "n":
        n = values
    else:
        n = np.sqrt(values) if isinstance(values, np.ndarray) else math.sqrt(values)
    if dst == "c":
        return c0 / n
    if dst == "n":
        return n
    return n * n


def convert_value_grad(value, grad, src, dst, c0):
    """Convert (value, gradient) pairs between quantities via the chain rule.

    `grad` may be a length-3 sequence or an (n, 3) array matching `value`.
    """
    if src == dst:
        return value, grad
    grad = np.asarray(grad, dtype=float)
    scalar = np.ndim(value) == 0
    v = np.asarray(value, dtype=float)
    # reduce to (n, dn)
    if src == "c":
        n = c0 / v
        dn = grad * (-c0 / (v * v))[..., None] if not scalar else grad * (-c0 / (v * v))
    elif src == "n":
        n, dn = v, grad
    else:
        n = np.sqrt(v)
        dn = grad / (2.0 * n)[..., None] if not scalar else grad / (2.0 * n)
    if dst == "n":
        out_v, out_g = n, dn
    elif dst == "n2":
        out_v = n * n
        out_g = dn * (2.0 * n)[..., None] if not scalar else dn * (2.0 * n)
    else:
        out_v = c0 / n
        out_g = dn * (-c0 / (n * n))[..., None] if not scalar else dn * (-c0 / (n * n))
    if scalar:
        return float(out_v), out_g
    return out_v, out_g


# ---------------------------------------------------------------------------
# analytic profiles


class Profile:
    """Base class for analytic media profiles.

    Subclasses define `quantity` (the native quantity), `c0`, and
    `value_batch(points)`.  The gradient defaults to central differences;
    profiles with cheap analytic derivatives override `grad_batch`.
    """

    quantity = "c"
    c0 = 340.0
    fd_step = 1e-4

    def value_batch(self, points):
        raise NotImplementedError

    def grad_batch(self, points):
        pts = np.asarray(points, dtype=float)
        h = self.fd_step
        g = np.empty_like(pts)
        for ax in range(3):
            dp = np.zeros(3)
            dp[ax] = h
            g[..., ax] = (self.value_batch(pts + dp) - self.value_batch(pts - dp)) / (2 * h)
        return g

    def value(self, x, y, z):
        return float(self.value_batch(np.array([[x, y, z]], dtype=float))[0])

    def grad(self, x, y, z):
        g = self.grad_batch(np.array([[x, y, z]], dtype=float))[0]
        return float(g[0]), float(g[1]), float(g[2])


@dataclass
class StratifiedProfile(Profile):
    """Logarithmic stratified sound speed: c(z) = c0 + b*ln(z/zg + 1).

    The acoustic index is n(z) = c0 / c(z).  b > 0 refracts downward
    (night-time), b < 0 upward (day-time).
    """

    b: float = -1.0
    c0: float = 340.0
    zg: float = 1.0

    quantity = "n"

    def __post_init__(self):
        if self.c0 <= 0:
            raise ValueError("c0 must be > 0")
        if self.zg <= 0:
            raise ValueError("zg must be > 0")

    def n(self, z):
        if np.any(np.asarray(z) < 0):
            raise ValueError("altitude must be >= 0")
        return self.c0 / (self.c0 + self.b * np.log(np.asarray(z) / self.zg + 1.0))

    def c(self, z):
        return self.c0 + self.b * np.log(np.asarray(z) / self.zg + 1.0)

    def value_batch(self, points):
        z = np.maximum(np.asarray(points, dtype=float)[..., 2], 0.0)
        return self.c0 / (self.c0 + self.b * np.log(z / self.zg + 1.0))

    def grad_batch(self, points):
        pts = np.asarray(points, dtype=float)
        z = np.maximum(pts[..., 2], 0.0)
        denom = self.c0 + self.b * np.log(z / self.zg + 1.0)
        dz = -self.c0 * self.b / ((z + self.zg) * denom * denom)
        g = np.zeros_like(pts)
        g[..., 2] = dz
        return g

    def value(self, x, y, z):
        zc = z if z > 0.0 else 0.0
        return self.c0 / (self.c0 + self.b * math.log(zc / self.zg + 1.0))

    def grad(self, x, y, z):
        zc = z if z > 0.0 else 0.0
        denom = self.c0 + self.b * math.log(zc / self.zg + 1.0)
        return 0.0, 0.0, -self.c0 * self.b / ((zc + self.zg) * denom * denom)


def stratified_n(z, profile: StratifiedProfile):
    """Stratified acoustic index at altitude z (>= 0)."""
    return profile.n(z)


@dataclass
class FluctuationField:
    """Sum-of-cosines index fluctuation.

    modes: list of (wave_vector (3,), phase in [0, 2pi], amplitude).
    Evaluates n_flu(x) = sum_i G_i * cos(k_i . x + phi_i).
    """

    modes: list = field(default_factory=list)

    def __post_init__(self):
        for k, phi, G in self.modes:
            if not 0.0 <= phi <= 2.0 * math.pi:
                raise ValueError("phases must lie in [0, 2*pi]")

    @classmethod
    def random(cls, n_modes, amplitude, lambda_min, lambda_max, seed=0):
        """Seeded random modes with wavelengths log-uniform in a band.

        Per-mode amplitudes scale as lambda^(5/3) and are normalized so the
        amplitude sum equals `amplitude`.
        """
        rng = np.random.default_rng(seed)
        dirs = rng.normal(size=(n_modes, 3))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        lams = np.exp(rng.uniform(math.log(lambda_min), math.log(lambda_max), n_modes))
        w = lams ** (5.0 / 3.0)
        amps = amplitude * w / w.sum()
        phases = rng.uniform(0.0, 2.0 * math.pi, n_modes)
        modes = [((2.0 * math.pi / lam) * d, float(phi), float(G))
                 for d, lam, phi, G in zip(dirs, lams, phases, amps)]
        return cls(modes)

    def value_batch(self, points):
        pts = np.asarray(points, dtype=float)
        out = np.zeros(pts.shape[:-1])
        for k, phi, G in self.modes:
            out += G * np.cos(pts @ np.asarray(k) + phi)
        return out

    def grad_batch(self, points):
        pts = np.asarray(points, dtype=float)
        g = np.zeros_like(pts)
        for k, phi, G in self.modes:
            k = np.asarray(k)
            g += (-G * np.sin(pts @ k + phi))[..., None] * k
        return g

    def value(self, x, y, z):
        s = 0.0
        for k, phi, G in self.modes:
            s += G * math.cos(k[0] * x + k[1] * y + k[2] * z + phi)
        return s

    def grad(self, x, y, z):
        gx = gy = gz = 0.0
        for k, phi, G in self.modes:
            f = -G * math.sin(k[0] * x + k[1] * y + k[2] * z + phi)
            gx += f * k[0]
            gy += f * k[1]
            gz += f * k[2]
        return gx, gy, gz


def fluctuation_n(x, fluct: FluctuationField):
    """Fluctuation index contribution at position x."""
    x = np.asarray(x, dtype=float)
    return float(fluct.value_batch(x[None])[0]) if x.ndim == 1 else fluct.value_batch(x)


@dataclass
class StratifiedFluctuationProfile(Profile):
    """Stratified index plus turbulence: n(x) = n_str(z) + n_flu(x)."""

    stratified: StratifiedProfile = field(default_factory=StratifiedProfile)
    fluctuation: FluctuationField = field(default_factory=FluctuationField)

    quantity = "n"

    @property
    def c0(self):
        return self.stratified.c0

    def value_batch(self, points):
        return self.stratified.value_batch(points) + self.fluctuation.value_batch(points)

    def grad_batch(self, points):
        return self.stratified.grad_batch(points) + self.fluctuation.grad_batch(points)

    def value(self, x, y, z):
        return self.stratified.value(x, y, z) + self.fluctuation.value(x, y, z)

    def grad(self, x, y, z):
        a = self.stratified.grad(x, y, z)
        b = self.fluctuation.grad(x, y, z)
        return a[0] + b[0], a[1] + b[1], a[2] + b[2]


@dataclass
class HotSpotProfile(Profile):
    """Localized heat source superimposed on a stratified atmosphere.

    The spot temperature decays as T(d) = T0 + (Ts - T0) * exp(-d / d0)
    with d the distance to the spot center.  The induced sound speed
    perturbation sqrt(gamma*Rd*T) - sqrt(gamma*Rd*T0) is added to the base
    stratified speed.
    """

    center: tuple = (0.0, 0.0, 0.0)
    spot_temperature: float = 373.0
    ambient_temperature: float = 273.0
    dropoff: float = 10.0
    base: StratifiedProfile = field(default_factory=StratifiedProfile)
    consts: AtmosphericConstants = DEFAULT_CONSTANTS

    quantity = "c"

    def __post_init__(self):
        if self.spot_temperature <= 0 or self.ambient_temperature <= 0:
            raise ValueError("temperatures must be > 0")
        if self.dropoff <= 0:
            raise ValueError("dropoff length must be > 0")

    @property
    def c0(self):
        return self.base.c0

    def temperature(self, points):
        pts = np.asarray(points, dtype=float)
        d = np.linalg.norm(pts - np.asarray(self.center), axis=-1)
        return self.ambient_temperature + (
            self.spot_temperature - self.ambient_temperature) * np.exp(-d / self.dropoff)

    def value_batch(self, points):
        grd = self.consts.gamma * self.consts.dry_air_gas_constant
        dc = np.sqrt(grd * self.temperature(points)) - math.sqrt(grd * self.ambient_temperature)
        return self.base.c(np.maximum(np.asarray(points, float)[..., 2], 0.0)) + dc


def hotspot_temperature(x, profile: HotSpotProfile):
    """Temperature at position x under the hot spot model [K]."""
    x = np.asarray(x, dtype=float)
    return float(profile.temperature(x[None])[0]) if x.ndim == 1 else profile.temperature(x)


@dataclass
class WindOverHillProfile(Profile):
    """Effective sound speed for log-law wind over an analytic hill.

    Mean wind u(z) = (u*/K) * ln(z/zg); the hill of height h and radius L,
    terrain  z_s(x) = h / (1 + (x/L)^2)  along the wind axis x, perturbs
    the wind by a closed-form delta evaluated at the height dz above the
    local terrain (clamped to >= z0).  The wind component is added to the
    reference sound speed for upwind propagation and subtracted for
    downwind propagation.
    """

    friction_velocity: float = 0.5
    von_karman: float = 0.4
    zg: float = 0.1
    hill_height: float = 20.0
    hill_radius: float = 40.0
    influence_thickness: float = 10.0
    z0: float = 0.1
    direction: str = "upwind"
    hill_center: float = 0.0
    c_ref: float = 340.0

    quantity = "c"

    def __post_init__(self):
        if self.hill_radius <= 0 or self.influence_thickness <= 0 or self.z0 <= 0:
            raise ValueError("L, l, z0 must be > 0")
        if self.direction not in ("upwind", "downwind"):
            raise ValueError("direction must be 'upwind' or 'downwind'")

    @property
    def c0(self):
        return self.c_ref

    def terrain(self, x):
        rel = (np.asarray(x, dtype=float) - self.hill_center) / self.hill_radius
        return self.hill_height / (1.0 + rel * rel)

    def mean_wind(self, z):
        return self.friction_velocity / self.von_karman * np.log(np.asarray(z) / self.zg)

    def delta_u(self, x, dz):
        """Hill-induced wind perturbation at height dz above the terrain."""
        X = (np.asarray(x, dtype=float) - self.hill_center) / self.hill_radius
        dz = np.maximum(np.asarray(dz, dtype=float), self.z0)
        u_L = float(self.mean_wind(self.hill_radius))
        lead = u_L * (self.hill_height / self.hill_radius) * (
            math.log(self.hill_radius / self.z0)
            / math.log(self.influence_thickness / self.z0) ** 2)
        X2 = X * X
        shape = (1.0 - X2) / (1.0 + X2)
        decay = 2.0 * X / (1.0 + X2) ** 2 * (dz - self.z0) / self.influence_thickness
        return lead * np.log(dz / self.z0) * (shape - decay)

    def wind(self, x, z):
        dz = np.maximum(np.asarray(z) - self.terrain(x), self.z0)
        return self.mean_wind(dz) + self.delta_u(x, dz)

    def value_batch(self, points):
        pts = np.asarray(points, dtype=float)
        u = self.wind(pts[..., 0], pts[..., 2])
        return self.c_ref + u if self.direction == "upwind" else self.c_ref - u


def wind_speed(x, z, profile: WindOverHillProfile):
    """Horizontal wind speed at along-wind coordinate x and height z (> 0)."""
    if np.any(np.asarray(z) <= 0):
        raise ValueError("height must be > 0")
    out = profile.wind(x, z)
    return float(out) if np.ndim(out) == 0 else out


@dataclass
class MirageProfile(Profile):
    """Squared-index profile for inferior and superior mirages.

    inferior: n^2(z) = mu0^2 + mu1^2 * (1 - exp(-beta z))
    superior: n^2(z) = mu0^2 + mu1^2 * exp(-beta z)
    """

    mu0: float = 1.000233
    mu1: float = 0.4584
    beta: float = 2.303
    kind: str = "inferior"
    c_ref: float = 1.0

    quantity = "n2"

    def __post_init__(self):
        if self.kind not in ("inferior", "superior"):
            raise ValueError("kind must be 'inferior' or 'superior'")

    @property
    def c0(self):
        return self.c_ref

    def n2(self, z):
        e = np.exp(-self.beta * np.asarray(z, dtype=float))
        if self.kind == "inferior":
            return self.mu0 ** 2 + self.mu1 ** 2 * (1.0 - e)
        return self.mu0 ** 2 + self.mu1 ** 2 * e

    def value_batch(self, points):
        return self.n2(np.asarray(points, dtype=float)[..., 2])

    def grad_batch(self, points):
        pts = np.asarray(points, dtype=float)
        e = np.exp(-self.beta * pts[..., 2])
        sign = 1.0 if self.kind == "inferior" else -1.0
        g = np.zeros_like(pts)
        g[..., 2] = sign * self.mu1 ** 2 * self.beta * e
        return g


@dataclass
class UniformProfile(Profile):
    """Constant propagation speed."""

    c_const: float = 340.0
    quantity = "c"

    @property
    def c0(self):
        return self.c_const

    def value_batch(self, points):
        pts = np.asarray(points, dtype=float)
        return np.full(pts.shape[:-1], self.c_const)

    def grad_batch(self, points):
        return np.zeros_like(np.asarray(points, dtype=float))

    def value(self, x, y, z):
        return self.c_const

    def grad(self, x, y, z):
        return 0.0, 0.0, 0.0


@dataclass
class LinearSpeedProfile(Profile):
    """Globally linear speed c(x) = c_ref + g . x; rays are exact circles."""

    c_ref: float = 340.0
    g: tuple = (0.0, 0.0, 1.0)
    quantity = "c"

    @property
    def c0(self):
        return self.c_ref

    def value_batch(self, points):
        return self.c_ref + np.asarray(points, dtype=float) @ np.asarray(self.g)

    def grad_batch(self, points):
        pts = np.asarray(points, dtype=float)
        return np.broadcast_to(np.asarray(self.g, dtype=float), pts.shape).copy()

    def value(self, x, y, z):
        return self.c_ref + self.g[0] * x + self.g[1] * y + self.g[2] * z

    def grad(self, x, y, z):
        return self.g[0], self.g[1], self.g[2]


@dataclass
class LinearSquaredIndexProfile(Profile):
    """Globally linear squared index n2(x) = n2_ref + g . x; rays are parabolas."""

    n2_ref: float = 1.0
    g: tuple = (0.0, 0.0, 0.01)
    c_ref: float = 340.0
    quantity = "n2"

    @property
    def c0(self):
        return self.c_ref

    def value_batch(self, points):
        return self.n2_ref + np.asarray(points, dtype=float) @ np.asarray(self.g)

    def grad_batch(self, points):
        pts = np.asarray(points, dtype=float)
        return np.broadcast_to(np.asarray(self.g, dtype=float), pts.shape).copy()

    def value(self, x, y, z):
        return self.n2_ref + self.g[0] * x + self.g[1] * y + self.g[2] * z

    def grad(self, x, y, z):
        return self.g[0], self.g[1], self.g[2]


class GridMedia:
    """Trilinear media source backed by a sampled grid.

    Value is the trilinear interpolant (continuous); the gradient is its
    in-cell analytic derivative, constant-per-face-direction and
    discontinuous across grid planes.  Exposes the same eval interface as
    AnalyticMedia so the stepper can integrate directly on grid files.
    """

    def __init__(self, grid, quantity=None):
        self.grid = grid
        self.quantity = quantity or grid.quantity
        self.c0 = grid.c0
        self._src = grid.quantity

    @property
    def bounds(self):
        return self.grid.origin.copy(), self.grid.upper.copy()

    def _raw_batch(self, points):
        g = self.grid
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        rel = (pts - g.origin) / g.spacing
        idx = np.clip(np.floor(rel).astype(int), 0, np.array(g.dims) - 2)
        f = np.clip(rel - idx, 0.0, 1.0)
        i, j, k = idx[:, 0], idx[:, 1], idx[:, 2]
        fx, fy, fz = f[:, 0], f[:, 1], f[:, 2]
        v = g.values
        c000 = v[i, j, k]
        c100 = v[i + 1, j, k]
        c010 = v[i, j + 1, k]
        c110 = v[i + 1, j + 1, k]
        c001 = v[i, j, k + 1]
        c101 = v[i + 1, j, k + 1]
        c011 = v[i, j + 1, k + 1]
        c111 = v[i + 1, j + 1, k + 1]
        c00 = c000 * (1 - fx) + c100 * fx
        c10 = c010 * (1 - fx) + c110 * fx
        c01 = c001 * (1 - fx) + c101 * fx
        c11 = c011 * (1 - fx) + c111 * fx
        c0_ = c00 * (1 - fy) + c10 * fy
        c1_ = c01 * (1 - fy) + c11 * fy
        val = c0_ * (1 - fz) + c1_ * fz
        dx = (((c100 - c000) * (1 - fy) + (c110 - c010) * fy) * (1 - fz)
              + ((c101 - c001) * (1 - fy) + (c111 - c011) * fy) * fz) / g.spacing[0]
        dy = ((c10 - c00) * (1 - fz) + (c11 - c01) * fz) / g.spacing[1]
        dz = (c1_ - c0_) / g.spacing[2]
        return val, np.column_stack([dx, dy, dz])

    def eval_batch(self, points):
        v, grad = self._raw_batch(points)
        if self._src == self.quantity:
            return v, grad
        return convert_value_grad(v, grad, self._src, self.quantity, self.c0)

    def value_batch(self, points):
        return self.eval_batch(points)[0]

    def eval(self, x, y, z):
        v, grad = self.eval_batch(np.array([[x, y, z]]))
        return float(v[0]), float(grad[0, 0]), float(grad[0, 1]), float(grad[0, 2])


class AnalyticMedia:
    """Adapter exposing a profile's value and gradient in a chosen quantity.

    Scalar `eval` returns plain floats for the stepping hot loop; `eval_batch`
    vectorizes over (n, 3) point arrays.
    """

    def __init__(self, profile: Profile, quantity=None):
        self.profile = profile
        self.quantity = quantity or profile.quantity
        self.c0 = profile.c0
        self._src = profile.quantity
        if self.quantity not in QUANTITIES:
            raise ValueError(f"unknown quantity {self.quantity!r}")

    def eval(self, x, y, z):
        v = self.profile.value(x, y, z)
        g = self.profile.grad(x, y, z)
        if self._src == self.quantity:
            return v, g[0], g[1], g[2]
        v2, g2 = convert_value_grad(v, g, self._src, self.quantity, self.c0)
        return v2, float(g2[0]), float(g2[1]), float(g2[2])

    def eval_batch(self, points):
        v = self.profile.value_batch(points)
        g = self.profile.grad_batch(points)
        if self._src == self.quantity:
            return v, g
        return convert_value_grad(v, g, self._src, self.quantity, self.c0)

    def value_batch(self, points):
        v = self.profile.value_batch(points)
        return convert_values(v, self._src, self.quantity, self.c0)


# ---------------------------------------------------------------------------
# sampled grids


@dataclass
class MediaGrid:
    """Regular 3D grid of media samples with a physical extent.

    `values` has shape dims and is indexed [ix, iy, iz]; the sample at
    index (i, j, k) sits at origin + (i, j, k) * spacing.
    """

    dims: tuple
    origin: np.ndarray
    spacing: np.ndarray
    values: np.ndarray
    quantity: str = "c"
    c0: float = 340.0

    def __post_init__(self):
        self.dims = tuple(int(d) for d in self.dims)
        self.origin = np.asarray(self.origin, dtype=float)
        self.spacing = np.asarray(self.spacing, dtype=float)
        self.values = np.asarray(self.values, dtype=float).reshape(self.dims)
        if self.quantity not in QUANTITIES:
            raise ValueError(f"unknown quantity {self.quantity!r}")
        if any(d < 1 for d in self.dims):
            raise ValueError("grid dims must be positive")
        if np.any(self.spacing <= 0):
            raise ValueError("grid spacing must be positive")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("grid values must be finite")
        if np.any(self.values <= 0):
            raise ValueError("grid values must be strictly positive")

    @property
    def upper(self):
        return self.origin + (np.array(self.dims) - 1) * self.spacing

    @property
    def center(self):
        return 0.5 * (self.origin + self.upper)

    @property
    def diagonal(self):
        return float(np.linalg.norm(self.upper - self.origin))

    def axis_coords(self, ax):
        return self.origin[ax] + np.arange(self.dims[ax]) * self.spacing[ax]

    def grid_points(self):
        """All sample positions, shape (nx*ny*nz, 3), index order C."""
        xs, ys, zs = (self.axis_coords(i) for i in range(3))
        X, Y, Z = np.meshgrid(xs, ys, zs, indexing="ij")
        return np.column_stack([X.ravel(), Y.ravel(), Z.ravel()])

    def convert(self, quantity):
        if quantity == self.quantity:
            return self
        vals = convert_values(self.values, self.quantity, quantity, self.c0)
        return MediaGrid(self.dims, self.origin, self.spacing, vals, quantity, self.c0)

    def trilinear(self, points):
        """Trilinear interpolation at points clamped to the grid bounds."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        rel = (pts - self.origin) / self.spacing
        out = np.empty(len(pts))
        idx = np.clip(np.floor(rel).astype(int), 0, np.array(self.dims) - 2)
        f = np.clip(rel - idx, 0.0, 1.0)
        i, j, k = idx[:, 0], idx[:, 1], idx[:, 2]
        fx, fy, fz = f[:, 0], f[:, 1], f[:, 2]
        v = self.values
        c00 = v[i, j, k] * (1 - fx) + v[i + 1, j, k] * fx
        c10 = v[i, j + 1, k] * (1 - fx) + v[i + 1, j + 1, k] * fx
        c01 = v[i, j, k + 1] * (1 - fx) + v[i + 1, j, k + 1] * fx
        c11 = v[i, j + 1, k + 1] * (1 - fx) + v[i + 1, j + 1, k + 1] * fx
        out = (c00 * (1 - fy) + c10 * fy) * (1 - fz) + (c01 * (1 - fy) + c11 * fy) * fz
        return out if np.asarray(points).ndim > 1 else float(out[0])


def bake_grid(profile: Profile, dims, origin, spacing, quantity="c"):
    """Sample an analytic profile onto a regular grid at cell corners."""
    dims = tuple(int(d) for d in dims)
    if any(d < 2 for d in dims):
        raise ValueError("need at least 2 samples per axis")
    origin = np.asarray(origin, dtype=float)
    spacing = np.asarray(spacing, dtype=float)
    xs = origin[0] + np.arange(dims[0]) * spacing[0]
    ys = origin[1] + np.arange(dims[1]) * spacing[1]
    zs = origin[2] + np.arange(dims[2]) * spacing[2]
    X, Y, Z = np.meshgrid(xs, ys, zs, indexing="ij")
    pts = np.stack([X, Y, Z], axis=-1)
    native = profile.value_batch(pts)
    vals = convert_values(native, profile.quantity, quantity, profile.c0)
    return MediaGrid(dims, origin, spacing, vals, quantity, profile.c0)


# ---------------------------------------------------------------------------
# benchmark catalog


def benchmark_profile(kind, seed=0, fluctuation_amplitude=None,
                      fluctuation_band=None, fluctuation_modes=8):
    """Named benchmark profiles.

    a-lu / a-ld       upward / downward refracting stratified atmosphere
    a-lu-f / a-ld-f   stratified plus turbulence (calm by default; amplitude
                      and wavelength band are adjustable)
    a-lu-f-rough      stratified plus strong short turbulence (density fixture)
    a-hs              hot spot over an upward refracting atmosphere
    a-uw / a-dw       wind over a hill, upwind / downwind
    v-im / v-sm       inferior / superior mirage (squared index)
    uniform           constant speed
    """
    kind = kind.lower()
    if kind == "uniform":
        return UniformProfile()
    if kind == "a-lu":
        return StratifiedProfile(b=-1.0, c0=340.0, zg=1.0)
    if kind == "a-ld":
        return StratifiedProfile(b=1.0, c0=340.0, zg=1.0)
    if kind in ("a-lu-f", "a-ld-f"):
        b = -1.0 if kind == "a-lu-f" else 1.0
        amp = 1.5e-4 if fluctuation_amplitude is None else fluctuation_amplitude
        band = (70.0, 140.0) if fluctuation_band is None else fluctuation_band
        fl = FluctuationField.random(fluctuation_modes, amp, band[0], band[1],
                                     seed=seed)
        return StratifiedFluctuationProfile(StratifiedProfile(b=b), fl)
    if kind == "a-lu-f-rough":
        fl = FluctuationField.random(12, 0.05, 15.0, 40.0, seed=seed)
        return StratifiedFluctuationProfile(StratifiedProfile(b=-1.0), fl)
    if kind == "a-hs":
        return HotSpotProfile(center=(80.0, 80.0, 40.0), spot_temperature=330.0,
                              dropoff=20.0, base=StratifiedProfile(b=-1.0))
    if kind in ("a-uw", "a-dw"):
        return WindOverHillProfile(direction="upwind" if kind == "a-uw" else "downwind",
                                   hill_center=80.0)
    if kind == "v-im":
        return MirageProfile(kind="inferior")
    if kind == "v-sm":
        return MirageProfile(kind="superior")
    raise ValueError(f"unknown profile kind {kind!r}")
