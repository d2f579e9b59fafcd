import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from layered_gas import DomainError, FieldState, GasEOS, HomogCoeffs, InvalidArgument, MediumProfile, RunRecord
from layered_gas.diagnostics import (LEPMonitor, StabilityParams, c_max, dispersion_omega, entropy_change,
                                     front_speed, local_entropy_production, shock_classifier, stability_delta4,
                                     stability_ly, total_entropy)
from layered_gas.fv import SolverConfig, solve_euler
from layered_gas.medium import homog_coeffs

EOS = GasEOS()
TWO_PHASE = MediumProfile.piecewise_constant(0.25, 1.75, 0.5, 1.0, "lagrangian")


def eul(t, x, rho, u, p):
    return FieldState(t, x, "eulerian", {"rho": rho, "u": u, "p": p})


def lag(t, x, v, u, p):
    return FieldState(t, x, "lagrangian", {"v": v, "u": u, "p": p})


def centres(n, lo=0.0, hi=1.0):
    return lo + (np.arange(n) + 0.5) * (hi - lo) / n


# --------------------------------------------------------------------------
# total entropy


def test_total_entropy_of_uniform_state_is_zero():
    x = centres(32)
    one = np.ones_like(x)
    assert total_entropy(eul(0, x, one, 0 * x, one), EOS) == 0.0


def test_total_entropy_two_phase_background_closed_form():
    x = centres(64)
    rho = np.where(x < 0.5, 0.25, 1.75)
    S = total_entropy(eul(0, x, rho, 0 * x, np.ones_like(x)), EOS)
    closed = -1.4 * (0.25 * math.log(0.25) + 1.75 * math.log(1.75)) / 2
    assert S == pytest.approx(closed, rel=1e-14)


def test_total_entropy_frames_agree_on_mass():
    # same state described on Eulerian cells and on the matching mass cells
    n = 40
    x = centres(n)
    rho = 1 + 0.5 * np.sin(2 * np.pi * x) ** 2
    p = 1 + 0.1 * np.cos(2 * np.pi * x)
    S_e = total_entropy(eul(0, x, rho, 0 * x, p), EOS)
    dm = rho / n
    S_l = float(np.sum(dm * EOS.entropy(p, 1 / rho)))
    assert S_e == pytest.approx(S_l, rel=1e-13)


def test_total_entropy_rejects_non_positive_fields():
    x = centres(4)
    with pytest.raises(DomainError):
        total_entropy(eul(0, x, np.array([1.0, 0.0, 1.0, 1.0]), 0 * x, np.ones(4)), EOS)


def test_entropy_change_needs_two_snapshots():
    x = centres(8)
    rec = RunRecord(snapshots=[eul(0, x, np.ones(8), np.zeros(8), np.ones(8))])
    with pytest.raises(InvalidArgument):
        entropy_change(rec, EOS)


def test_entropy_change_rejects_mismatched_grids():
    a = eul(0, centres(8), np.ones(8), np.zeros(8), np.ones(8))
    b = eul(1, centres(16), np.ones(16), np.zeros(16), np.ones(16))
    with pytest.raises(InvalidArgument):
        entropy_change(RunRecord(snapshots=[a, b]), EOS)


def test_entropy_change_reports_difference_and_curve():
    x = centres(10)
    one = np.ones(10)
    snaps = [eul(t, x, one, 0 * x, one * math.exp(0.1 * t)) for t in (0.0, 1.0, 2.0)]
    ch = entropy_change(RunRecord(snapshots=snaps), EOS)
    assert ch.delta == pytest.approx(0.2, rel=1e-12)
    np.testing.assert_allclose(ch.values, [0.0, 0.1, 0.2], rtol=1e-12, atol=1e-15)


# --------------------------------------------------------------------------
# local entropy production


@pytest.mark.parametrize("frame", ["eulerian", "lagrangian"])
def test_lep_vanishes_on_constant_state(frame):
    x = centres(16)
    one = np.ones(16)
    mk = eul if frame == "eulerian" else lag
    rec = RunRecord(snapshots=[mk(t, x, one * 0.7, one * 0.3, one * 1.2) for t in (0.0, 0.5, 1.0)])
    assert local_entropy_production(rec, EOS).max_abs == 0.0


def test_lep_contract_errors():
    x = centres(8)
    one = np.ones(8)
    with pytest.raises(InvalidArgument):
        local_entropy_production(RunRecord(snapshots=[eul(0, x, one, 0 * x, one)]), EOS)
    uneven = RunRecord(snapshots=[eul(t, x, one, 0 * x, one) for t in (0.0, 0.5, 1.5)])
    with pytest.raises(InvalidArgument):
        local_entropy_production(uneven, EOS)


def test_lep_matches_entropy_equation_for_advected_entropy():
    # rho s advected with constant u: eta = S_t + (u S)_x vanishes up to the difference errors
    u0 = 0.5
    n = 200
    x = centres(n)

    def state(t):
        rho = 1 + 0.2 * np.sin(2 * np.pi * (x - u0 * t))
        return eul(t, x, rho, u0 * np.ones(n), np.ones(n))

    etas = []
    for dt in (1e-2, 5e-3):
        rec = RunRecord(snapshots=[state(k * dt) for k in range(3)])
        etas.append(local_entropy_production(rec, EOS).max_abs)
    assert etas[0] < 5e-2
    assert etas[1] < 0.6 * etas[0]


def test_lep_decreases_with_resolution_on_smooth_acoustics():
    vals = []
    for n in (64, 128):
        x = centres(n)
        h = 1.0 / n
        rho = 1 + 1e-3 * np.sin(2 * np.pi * x)
        p = rho**EOS.gamma
        mon = LEPMonitor(EOS)
        cfg = SolverConfig(cfl=1.0)
        solve_euler(eul(0, x, rho, 0 * x, p), cfg, 0.2, output_times=np.linspace(h, 0.2, round(0.2 / h)),
                    eos=EOS, monitors=[mon])
        vals.append(mon.max_abs)
    assert vals[1] < 0.7 * vals[0]


# --------------------------------------------------------------------------
# c_max


def test_c_max_uniform_equals_sound_speed():
    cm = c_max(MediumProfile.uniform(2.0), EOS)
    assert cm.lagrangian == pytest.approx(math.sqrt(1.4 * 2.0), rel=1e-12)
    assert cm.eulerian == pytest.approx(math.sqrt(1.4 / 2.0), rel=1e-12)


def test_c_max_two_phase_harmonic_mean():
    c1, c2 = math.sqrt(0.35), math.sqrt(2.45)
    cm = c_max(TWO_PHASE, EOS)
    assert cm.lagrangian == pytest.approx(2 * c1 * c2 / (c1 + c2), rel=1e-10)
    assert cm.lagrangian == pytest.approx(0.8586, abs=1e-4)


def test_c_max_rejects_non_positive_pressure():
    with pytest.raises(DomainError):
        c_max(TWO_PHASE, EOS, p=0.0)


@settings(max_examples=40, deadline=None)
@given(lo=st.floats(0.05, 1.0), hi=st.floats(1.0, 5.0), duty=st.floats(0.1, 0.9))
def test_c_max_below_arithmetic_mean(lo, hi, duty):
    prof = MediumProfile.piecewise_constant(lo, hi, duty, 1.0, "lagrangian")
    cm = c_max(prof, EOS, n_quad=2**12)
    arith = duty * math.sqrt(1.4 * lo) + (1 - duty) * math.sqrt(1.4 * hi)
    assert cm.lagrangian <= arith * (1 + 1e-12)


# --------------------------------------------------------------------------
# dispersion


def test_dispersion_zero_wavenumber():
    d = dispersion_omega(0.0, homog_coeffs(TWO_PHASE), EOS)
    assert d.omega == 0.0


def test_dispersion_non_dispersive_limit():
    co = HomogCoeffs(16 / 7, 0.0, 0.0, 0.0)
    k = np.linspace(0, 5, 11)
    d = dispersion_omega(k, co, EOS)
    np.testing.assert_allclose(d.omega, math.sqrt(1.4 * 7 / 16) * k, rtol=1e-15)


def test_dispersion_two_phase_value_at_unit_k():
    co = homog_coeffs(TWO_PHASE)
    c = math.sqrt(1.4 * 7 / 16)
    assert float(dispersion_omega(1.0, co, EOS).omega) == pytest.approx(
        c / math.sqrt(1 + 3 / 256 + 759 / 65536), rel=1e-10)
    assert c == pytest.approx(0.78262, abs=5e-6)


def test_dispersion_small_k_expansion():
    co = homog_coeffs(TWO_PHASE)
    k = np.array([0.02, 0.04])
    d = dispersion_omega(k, co, EOS)
    err = np.abs(d.omega - d.expansion(k)) / d.omega
    # the first neglected term is O(k^6)
    assert np.all(err < 1e-9)
    assert err[1] / err[0] == pytest.approx(64, rel=0.05)


def test_dispersion_phase_speed_monotone_for_positive_nu():
    co = homog_coeffs(TWO_PHASE)
    k = np.linspace(0.01, 50, 500)
    d = dispersion_omega(k, co, EOS)
    assert np.all(d.valid)
    assert np.all(np.diff(d.omega / k) < 0)


def test_dispersion_flags_negative_prefactor():
    co = HomogCoeffs(1.0, 0.01, 0.0, -0.01)
    d = dispersion_omega(np.array([1.0, 10.0]), co, EOS)
    assert d.valid.tolist() == [True, False]
    assert np.isnan(d.omega[1])


# --------------------------------------------------------------------------
# stability


def test_stability_params_from_two_phase_medium():
    sp = StabilityParams.from_coeffs(homog_coeffs(TWO_PHASE), EOS)
    assert sp.beta1 == pytest.approx(1.4 * 7 / 16, rel=1e-12)
    assert sp.beta_tilde == pytest.approx(3 / 256 * 1.4, rel=1e-10)


def test_stability_params_validation():
    with pytest.raises(InvalidArgument):
        StabilityParams(1.0, 0.0, 0.0, 1.0)


def test_stability_quadratic_case_has_roots_of_opposite_sign():
    res = stability_delta4(1.0, StabilityParams(1.0, 0.5, 0.0, 1.0))
    Y = np.sort(res.Y.real)
    assert np.all(np.abs(res.Y.imag) < 1e-14)
    assert Y[0] < 0 < Y[1]
    assert res.unstable


@settings(max_examples=50, deadline=None)
@given(b1=st.floats(0.01, 10), b2=st.floats(0.01, 10), b3=st.floats(1e-3, 10), k=st.floats(0.05, 20))
def test_stability_cubic_has_one_positive_root_and_a_growing_mode(b1, b2, b3, k):
    res = stability_delta4(k, StabilityParams(b1, b2, b3, 1.0))
    real_pos = [y for y in res.Y if abs(y.imag) <= 1e-9 * max(1, abs(y)) and y.real > 0]
    assert len(real_pos) == 1
    assert res.unstable and res.growth > 0


def test_stability_zero_wavenumber_has_no_growth():
    res = stability_delta4(0.0, StabilityParams(1.0, 1.0, 1.0, 1.0))
    assert not res.unstable
    assert np.all(res.omega == 0)


def test_stability_growth_increases_with_wavenumber():
    sp = StabilityParams(0.6, 0.02, 0.001, 0.02)
    g = [stability_delta4(k, sp).growth for k in (1.0, 10.0, 100.0, 1000.0)]
    assert all(b > a for a, b in zip(g, g[1:]))


def test_ly_branches_and_cutoff():
    sp = StabilityParams.from_coeffs(homog_coeffs(TWO_PHASE), EOS)
    res = stability_ly(np.array([0.0, 1.0]), sp)
    assert res.cutoff == pytest.approx(math.sqrt(112 / 3), rel=1e-10)
    assert res.omega[0, 0] == 0
    assert abs(res.omega[0, 1].imag) == 0
    at_cut = stability_ly(res.cutoff, sp)
    assert abs(at_cut.omega[0]) < 1e-6
    beyond = stability_ly(2 * res.cutoff, sp)
    assert beyond.omega[0].imag != 0


# --------------------------------------------------------------------------
# front speed and shock classification


def step_record(speed, n_snap=11, t_end=10.0):
    x = centres(4000, 0.0, 40.0)
    snaps = []
    for t in np.linspace(0.0, t_end, n_snap):
        front = 5.0 + speed * t
        p = 1.0 + 0.3 * 0.5 * (1 - np.tanh((x - front) / 0.2))
        snaps.append(lag(t, x, np.ones_like(x), np.zeros_like(x), p))
    return RunRecord(snapshots=snaps)


def test_front_speed_of_moving_step():
    assert front_speed(step_record(1.3), p_right=1.0) == pytest.approx(1.3, rel=1e-6)


@pytest.mark.parametrize("factor, label", [(1.3, "shock-forming"), (0.8, "dispersive"), (1.02, "ambiguous")])
def test_shock_classifier_labels(factor, label):
    uniform = MediumProfile.uniform(1.0)
    c = math.sqrt(1.4)
    res = shock_classifier(step_record(factor * c), uniform, EOS, p_right=1.0)
    assert res.label == label
    assert res.ratio == pytest.approx(factor, rel=1e-5)


def test_shock_classifier_without_front():
    x = centres(16)
    one = np.ones(16)
    rec = RunRecord(snapshots=[lag(t, x, one, 0 * x, one) for t in (0.0, 1.0)])
    with pytest.raises(InvalidArgument):
        shock_classifier(rec, MediumProfile.uniform(1.0), EOS)
