import math

import numpy as np
import pytest

from curvtrace.media import (AtmosphericConstants, DEFAULT_CONSTANTS,
                             FluctuationField, HotSpotProfile, MediaGrid,
                             MirageProfile, StratifiedProfile,
                             WindOverHillProfile, bake_grid,
                             benchmark_profile, cauchy_index, convert_values,
                             density_from_gas_law, fluctuation_n,
                             hotspot_temperature, light_refractive_index,
                             reference_density, sound_speed_from_temperature,
                             stratified_n, wind_speed)


class TestGasLaw:
    def test_standard_conditions(self):
        # direct arithmetic oracle: P*M/(R*T)
        rho = density_from_gas_law(101325.0, 288.15)
        expect = 101325.0 * 28.96e-3 / (8.3145 * 288.15)
        assert rho == pytest.approx(expect, rel=1e-14)
        assert rho == pytest.approx(1.2250, abs=1e-3)

    def test_rejects_non_positive(self):
        with pytest.raises(ValueError):
            density_from_gas_law(0.0, 288.15)
        with pytest.raises(ValueError):
            density_from_gas_law(101325.0, -3.0)

    def test_doubling_temperature_halves_density(self):
        r1 = density_from_gas_law(90000.0, 250.0)
        r2 = density_from_gas_law(90000.0, 500.0)
        assert r2 == pytest.approx(r1 / 2.0, rel=1e-14)


class TestLightIndex:
    def test_zero_density_gives_unity(self):
        assert light_refractive_index(0.0, 0.589) == 1.0

    def test_long_wavelength_limit(self):
        n = cauchy_index(1e9)
        assert n == pytest.approx(1.0 + DEFAULT_CONSTANTS.cauchy_a, abs=1e-12)

    def test_sodium_line_at_reference_density(self):
        # a*(1 + b/lambda^2) + 1 evaluated directly at lambda = 0.589 um
        n_lam = 0.02879 * (1.0 + 0.00567 / 0.589 ** 2) + 1.0
        n = light_refractive_index(reference_density(), 0.589)
        assert n == pytest.approx(n_lam, rel=1e-12)
        assert n == pytest.approx(1.0292605, abs=1e-6)


class TestSoundSpeed:
    def test_cold_air(self):
        c = sound_speed_from_temperature(273.0)
        assert c == pytest.approx(math.sqrt(1.4 * 287.05 * 273.0), rel=1e-14)
        assert c == pytest.approx(331.226, abs=0.05)

    def test_sqrt_scaling(self):
        assert sound_speed_from_temperature(4 * 300.0) == pytest.approx(
            2 * sound_speed_from_temperature(300.0), rel=1e-14)

    def test_limit_and_domain(self):
        assert sound_speed_from_temperature(1e-9) < 0.1
        with pytest.raises(ValueError):
            sound_speed_from_temperature(0.0)


class TestStratified:
    def test_ground_level_is_unity(self):
        p = StratifiedProfile(b=1.0, c0=340.0, zg=1.0)
        assert stratified_n(0.0, p) == 1.0

    def test_log_profile_values(self):
        p = StratifiedProfile(b=1.0, c0=340.0, zg=1.0)
        assert stratified_n(math.e - 1.0, p) == pytest.approx(340.0 / 341.0, rel=1e-12)
        p = StratifiedProfile(b=-1.0, c0=340.0, zg=1.0)
        assert stratified_n(math.e - 1.0, p) == pytest.approx(340.0 / 339.0, rel=1e-12)

    def test_monotonicity_by_sign(self):
        z = np.linspace(0.0, 200.0, 400)
        down = StratifiedProfile(b=1.0).n(z)
        up = StratifiedProfile(b=-1.0).n(z)
        assert np.all(np.diff(down) < 0)
        assert np.all(np.diff(up) > 0)

    def test_negative_altitude_rejected(self):
        with pytest.raises(ValueError):
            stratified_n(-1.0, StratifiedProfile())


class TestFluctuation:
    def test_empty_sum(self):
        assert fluctuation_n((1.0, 2.0, 3.0), FluctuationField([])) == 0.0

    def test_single_mode(self):
        f = FluctuationField([(np.array([0.0, 0.0, math.pi]), 0.0, 0.1)])
        assert fluctuation_n((0.0, 0.0, 1.0), f) == pytest.approx(-0.1, rel=1e-12)

    def test_amplitude_bound(self):
        f = FluctuationField.random(12, 3e-3, 20.0, 80.0, seed=4)
        bound = sum(abs(G) for _, _, G in f.modes)
        pts = np.random.default_rng(0).uniform(-500, 500, (2000, 3))
        assert np.all(np.abs(f.value_batch(pts)) <= bound + 1e-12)

    def test_phases_validated(self):
        with pytest.raises(ValueError):
            FluctuationField([(np.zeros(3), 7.0, 0.1)])

    def test_gradient_matches_finite_difference(self):
        f = FluctuationField.random(6, 1e-2, 10.0, 50.0, seed=1)
        x = np.array([3.0, -2.0, 7.0])
        g = f.grad(*x)
        h = 1e-6
        for ax in range(3):
            dp = np.zeros(3)
            dp[ax] = h
            fd = (f.value(*(x + dp)) - f.value(*(x - dp))) / (2 * h)
            assert g[ax] == pytest.approx(fd, abs=1e-7)


class TestHotSpot:
    def test_center_is_spot_temperature(self):
        p = HotSpotProfile(center=(1.0, 2.0, 3.0), spot_temperature=373.0)
        assert hotspot_temperature((1.0, 2.0, 3.0), p) == pytest.approx(373.0)

    def test_one_dropoff_length(self):
        p = HotSpotProfile(center=(0.0, 0.0, 0.0), spot_temperature=373.0,
                           ambient_temperature=273.0, dropoff=5.0)
        assert hotspot_temperature((5.0, 0.0, 0.0), p) == pytest.approx(
            273.0 + 100.0 / math.e, rel=1e-12)

    def test_far_field(self):
        p = HotSpotProfile(center=(0.0, 0.0, 0.0), dropoff=2.0,
                           ambient_temperature=280.0)
        assert hotspot_temperature((5000.0, 0.0, 0.0), p) == pytest.approx(280.0)


class TestWind:
    def test_zero_at_roughness_length(self):
        p = WindOverHillProfile(zg=0.1, hill_height=0.0)
        assert wind_speed(1000.0, 0.1, p) == pytest.approx(0.0, abs=1e-12)

    def test_log_law_value(self):
        p = WindOverHillProfile(friction_velocity=0.5, von_karman=0.4, zg=0.1,
                                hill_height=0.0)
        assert wind_speed(1000.0, 1.0, p) == pytest.approx(
            1.25 * math.log(10.0), rel=1e-9)

    def test_hill_shape_factor_at_apex(self):
        X = 0.0
        assert (1 - X * X) / (1 + X * X) == 1.0
        p = WindOverHillProfile()
        du_apex = p.delta_u(p.hill_center, 5.0)
        du_far = p.delta_u(p.hill_center + 50 * p.hill_radius, 5.0)
        assert abs(du_apex) > abs(du_far)

    def test_domain(self):
        with pytest.raises(ValueError):
            wind_speed(0.0, 0.0, WindOverHillProfile())


class TestMirage:
    def test_inferior_increasing_superior_decreasing(self):
        z = np.linspace(0.0, 5.0, 200)
        inf = MirageProfile(kind="inferior").n2(z)
        sup = MirageProfile(kind="superior").n2(z)
        assert np.all(np.diff(inf) > 0)
        assert np.all(np.diff(sup) < 0)

    def test_defaults(self):
        p = MirageProfile()
        assert p.mu0 == 1.000233 and p.mu1 == 0.4584 and p.beta == 2.303


class TestConversions:
    def test_round_trip_identity(self):
        rng = np.random.default_rng(3)
        field = rng.uniform(200.0, 400.0, 257)
        n = convert_values(field, "c", "n", 340.0)
        n2 = convert_values(n, "n", "n2", 340.0)
        back = convert_values(n2, "n2", "c", 340.0)
        assert np.max(np.abs(back - field) / field) < 1e-12

    def test_unknown_quantity(self):
        with pytest.raises(ValueError):
            convert_values(np.ones(3), "c", "velocity", 340.0)


class TestBakeGrid:
    def test_constant_profile(self):
        g = bake_grid(benchmark_profile("uniform"), (4, 5, 6), (0, 0, 0), (1, 1, 1), "c")
        assert np.all(g.values == g.values.ravel()[0])

    def test_quantity_consistency(self):
        prof = benchmark_profile("a-lu")
        g_c = bake_grid(prof, (9, 9, 9), (0, 0, 0), (5, 5, 5), "c")
        g_n2 = bake_grid(prof, (9, 9, 9), (0, 0, 0), (5, 5, 5), "n2")
        conv = convert_values(g_c.values, "c", "n2", g_c.c0)
        assert np.max(np.abs(conv - g_n2.values) / g_n2.values) < 1e-12

    def test_alu_index_increases_with_height(self):
        g = bake_grid(benchmark_profile("a-lu"), (5, 5, 33), (0, 0, 0), (10, 10, 5), "n")
        assert np.all(np.diff(g.values, axis=2) > 0)

    def test_dims_validated(self):
        with pytest.raises(ValueError):
            bake_grid(benchmark_profile("uniform"), (1, 4, 4), (0, 0, 0), (1, 1, 1))

    def test_grid_invariants(self):
        with pytest.raises(ValueError):
            MediaGrid((2, 2, 2), (0, 0, 0), (1, 1, 1), -np.ones((2, 2, 2)), "c", 340.0)
        with pytest.raises(ValueError):
            MediaGrid((2, 2, 2), (0, 0, 0), (1, 1, 1),
                      np.full((2, 2, 2), np.nan), "c", 340.0)


class TestConstants:
    def test_positive_required(self):
        with pytest.raises(ValueError):
            AtmosphericConstants(gamma=-1.0)

    def test_defaults(self):
        c = DEFAULT_CONSTANTS
        assert c.molar_mass == 28.96e-3
        assert c.gas_constant == 8.3145
        assert c.cauchy_a == 2879e-5
        assert c.cauchy_b == 567e-5
