import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import brentq

from layered_gas import (GasEOS, InvalidArgument, MediumProfile, RandomProfileParams, fluct, fluct_antideriv,
                         homog_coeffs, mass_coordinate_map, mean, random_profile, sample_K)
from layered_gas.medium import random_modulations

TWO_PHASE = MediumProfile.piecewise_constant(0.25, 1.75, 0.5, 1.0, "lagrangian")
EULER_LAYERS = MediumProfile.piecewise_constant(0.25, 1.75, 0.5, 1.0, "eulerian")
MASS_LAYERS = MediumProfile.piecewise_constant(0.25, 1.75, 1 / 8, 1.0, "lagrangian")


def two_level(n=256):
    return np.where(np.arange(n) < n // 2, 4.0, 4.0 / 7.0)


class TestAveraging:
    def test_mean_of_constant(self):
        assert mean(np.full(16, 3.0)) == 3.0

    def test_mean_of_odd_harmonic(self):
        y = np.arange(256) / 256
        assert abs(mean(np.sin(2 * np.pi * y))) < 1e-14

    def test_mean_two_level(self):
        assert mean(two_level()) == pytest.approx((4 + 4 / 7) / 2, rel=1e-14)

    @pytest.mark.parametrize("bad", [[], [1.0], np.ones((2, 2))])
    def test_rejects_degenerate_samples(self, bad):
        with pytest.raises(InvalidArgument):
            mean(bad)

    def test_fluct_of_constant(self):
        assert np.all(fluct(np.full(8, 5.0)) == 0)

    def test_fluct_removes_mean(self):
        y = np.arange(128) / 128
        np.testing.assert_allclose(fluct(1 + np.cos(2 * np.pi * y)), np.cos(2 * np.pi * y), atol=1e-14)

    def test_fluct_two_level(self):
        f = fluct(two_level())
        np.testing.assert_allclose(f[:128], 12 / 7, rtol=1e-14)
        np.testing.assert_allclose(f[128:], -12 / 7, rtol=1e-14)

    def test_antideriv_of_constant(self):
        np.testing.assert_allclose(fluct_antideriv(np.full(32, 2.0)), 0, atol=1e-15)

    def test_antideriv_of_cosine(self):
        y = np.arange(512) / 512
        out = fluct_antideriv(np.cos(2 * np.pi * y))
        np.testing.assert_allclose(out, np.sin(2 * np.pi * y) / (2 * np.pi), atol=1e-14)

    def test_antideriv_matches_cumulative_quadrature(self):
        y = np.arange(2048) / 2048
        f = np.exp(np.sin(2 * np.pi * y))
        g = f - f.mean()
        cum = np.concatenate(([0.0], np.cumsum(0.5 * (g[1:] + g[:-1])) / 2048))
        cum -= cum.mean()
        np.testing.assert_allclose(fluct_antideriv(f), cum, atol=1e-6)

    def test_triangle_variance(self):
        F = fluct_antideriv(two_level(2**14), piecewise=True)
        # mean of squares of a piecewise-linear function: midpoint value plus in-cell variance
        h = 1 / 2**14
        var = np.mean(F**2) + np.mean(((12 / 7) * h) ** 2 / 12)
        assert var == pytest.approx(3 / 49, rel=1e-10)


class TestCoefficients:
    def test_golden_two_phase(self):
        c = homog_coeffs(TWO_PHASE, GasEOS())
        assert c.mean_Kinv == pytest.approx(16 / 7, rel=1e-12)
        assert c.mu == pytest.approx(3 / 256, rel=1e-10)
        assert c.zeta == pytest.approx(48 / 343, rel=1e-10)
        assert c.nu == pytest.approx(759 / 65536, rel=1e-10)

    def test_mu_closed_form(self):
        a, b = 4.0, 4 / 7
        kinv = (a + b) / 2
        assert homog_coeffs(TWO_PHASE).mu == pytest.approx((a - b) ** 2 / (192 * kinv**2), rel=1e-10)

    @pytest.mark.parametrize("profile", [EULER_LAYERS, MASS_LAYERS])
    def test_layers_by_position_and_by_mass(self, profile):
        c = homog_coeffs(profile)
        assert c.mean_Kinv == pytest.approx(1.0, rel=1e-12)
        assert c.mu == pytest.approx(3 / 256, rel=1e-10)
        assert c.zeta == pytest.approx(3 / 256, rel=1e-10)
        assert c.nu == pytest.approx(759 / 65536, rel=1e-10)

    def test_homogeneous_medium(self):
        c = homog_coeffs(MediumProfile.uniform(1.0))
        assert c.mean_Kinv == pytest.approx(1.0)
        assert max(abs(c.mu), abs(c.zeta), abs(c.nu)) < 1e-14

    def test_cosine_medium_finite(self):
        c = homog_coeffs(MediumProfile.sinusoidal(1.0, 1.0))
        assert np.isfinite([c.mean_Kinv, c.mu, c.zeta]).all()
        assert c.mu > 0 and c.zeta > 0

    @settings(max_examples=25, deadline=None)
    @given(a=st.floats(0.1, 0.9), b=st.floats(1.1, 5.0), duty=st.floats(0.1, 0.9))
    def test_coefficients_non_negative(self, a, b, duty):
        c = homog_coeffs(MediumProfile.piecewise_constant(a, b, duty, 1.0, "lagrangian"), n_quad=2**10)
        assert c.mu >= 0 and c.zeta >= 0

    @pytest.mark.parametrize("profile", [TWO_PHASE, MASS_LAYERS], ids=["equal-mass", "mass-1/8"])
    def test_mu_against_bloch_dispersion(self, profile):
        """Small-k expansion of the exact Floquet-Bloch branch of the layered wave equation."""
        eos = GasEOS()
        rho = np.array([profile.a_low, profile.a_high])
        duty = profile.duty
        m = np.array([duty, 1 - duty])  # layer masses
        v = 1 / rho
        Z = np.sqrt(eos.gamma / v)  # acoustic impedance per unit mass coordinate
        tau = m / Z
        ratio = 0.5 * (Z[0] / Z[1] + Z[1] / Z[0])
        c0 = math.sqrt(eos.gamma / np.dot(m, v))

        def omega(k):
            f = lambda w: (math.cos(w * tau[0]) * math.cos(w * tau[1])
                           - ratio * math.sin(w * tau[0]) * math.sin(w * tau[1]) - math.cos(k))
            return brentq(f, 0.5 * c0 * k, 1.5 * c0 * k, xtol=1e-15, rtol=1e-15)

        ks = np.array([0.04, 0.08, 0.12, 0.16, 0.2])
        y = np.array([omega(k) / (c0 * k) - 1 for k in ks])
        c2 = np.linalg.lstsq(np.vander(ks**2, 4, increasing=True)[:, 1:], y, rcond=None)[0][0]
        assert c2 == pytest.approx(-homog_coeffs(profile).mu / 2, rel=1e-6)


class TestCoordinateMap:
    def test_identity(self):
        cmap = mass_coordinate_map(MediumProfile.uniform(1.0), np.linspace(0, 1, 5))
        np.testing.assert_allclose(cmap.to_lagrangian(np.linspace(0, 3, 7)), np.linspace(0, 3, 7), atol=1e-14)

    @pytest.mark.parametrize("profile", [MediumProfile.sinusoidal(1.0, 1.0), EULER_LAYERS])
    def test_unit_mass_per_period(self, profile):
        cmap = mass_coordinate_map(profile, np.array([0.0, 1.0]))
        x = cmap.to_lagrangian(np.array([0.0, 1.0]))
        assert x[1] - x[0] == pytest.approx(1.0, rel=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(-20, 20))
    def test_round_trip(self, chi):
        cmap = mass_coordinate_map(EULER_LAYERS, np.array([0.0, 1.0]))
        back = cmap.to_eulerian(cmap.to_lagrangian(np.array([chi])))
        assert back[0] == pytest.approx(chi, abs=1e-10)


class TestSampleK:
    def test_uniform(self):
        np.testing.assert_allclose(sample_K(MediumProfile.uniform(1.0), np.linspace(0, 2, 9)), 1.0)

    def test_two_phase_values(self):
        K = sample_K(TWO_PHASE, np.array([0.25, 0.75]))
        np.testing.assert_allclose(K, [0.25, 1.75])

    def test_near_vacuum_positive(self):
        prof = MediumProfile.sinusoidal(1.0, 0.999)
        x = np.linspace(0, 1, 4001)
        K = sample_K(prof, x)
        assert K.min() > 0
        assert K.min() == pytest.approx(0.001, rel=0.05)


class TestRandomProfile:
    def test_noise_free_limit(self):
        p = RandomProfileParams(sigma_A=0.0, sigma_B=0.0, n_smooth=10, grid_n=2048, L=8.0, clip=False)
        chi, A, B = random_modulations(p)
        np.testing.assert_allclose(A, 1.0)
        np.testing.assert_allclose(B, 1.0)
        rho = random_profile(p).samples
        np.testing.assert_allclose(rho, 1 + 0.8 * np.sin(2 * np.pi * chi), atol=1e-12)

    def test_deterministic(self):
        p = RandomProfileParams(n_smooth=200, grid_n=4096, L=16.0, seed=5)
        np.testing.assert_array_equal(random_profile(p).samples, random_profile(p).samples)

    def test_mean_of_amplitude_modulation(self):
        means = []
        for seed in range(10):
            _, A, _ = random_modulations(RandomProfileParams(n_smooth=2000, grid_n=8192, L=32.0, seed=seed))
            means.append(A.mean())
        assert abs(np.mean(means) - 1) < 0.15

    def test_positive_after_clipping(self):
        prof = random_profile(RandomProfileParams(n_smooth=100, grid_n=4096, L=16.0, seed=1))
        assert prof.samples.min() > 0
