import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cirsim.em_field import (ChamberConfig, PatternSweep, cascaded_gain, chamber_sweep,
                             focusing_gain_db, fresnel_field, fresnel_sweep, lobe_width,
                             surface_response, write_sweep_csv)
from cirsim.geometry import build_cylindrical_layout, unit_direction
from cirsim.phase import AngleSpec, PhaseProfile, phase_general, zero_reference_profile

from conftest import LAMBDA_26, make_layout, single_element


def test_response_broadside_planar_all_ones():
    lay = make_layout(4, 3, 0.004, 0.004, None)
    # planar offsets lie in the y-z plane; +x is normal to all of them
    assert np.allclose(surface_response(lay, 0.0, math.pi / 2), 1.0)


def test_response_single_element():
    r = surface_response(single_element(), 1.2, 0.4)
    assert r.shape == (1,) and r[0] == 1.0


def test_response_two_by_two_along_y():
    lay = make_layout(2, 2, LAMBDA_26 / 2, LAMBDA_26 / 2, None)
    r = surface_response(lay, math.pi / 2, math.pi / 2)
    # y = -+lambda/4 -> phase -k y = +-pi/2, alternating along columns
    assert np.allclose(np.angle(r), [math.pi / 2, -math.pi / 2] * 2)
    assert np.allclose(np.abs(r), 1.0)


def test_gain_single_element_zero_phase():
    lay = single_element()
    g = cascaded_gain(lay, zero_reference_profile(lay), (0.3, 1.0), (-0.2, 2.0))
    assert g == pytest.approx(1.0)


def test_gain_two_by_two_brute_force():
    rng = np.random.default_rng(7)
    lay = make_layout(2, 2, 0.004, 0.005, 0.2)
    phases = rng.uniform(-math.pi, math.pi, 4)
    prof = PhaseProfile(phases, "random")
    inc, out = (0.4, 1.3), (-1.1, 2.0)
    k = 2 * math.pi / LAMBDA_26
    s = unit_direction(*inc) + unit_direction(*out)
    expected = 0j
    for i in range(4):
        p = lay.offsets[i]
        expected += complex(math.cos(phases[i] + k * (p @ s)), math.sin(phases[i] + k * (p @ s)))
    assert cascaded_gain(lay, prof, inc, out) == pytest.approx(expected, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(ti=st.floats(-1.5, 1.5), pi_=st.floats(0.2, 2.9), to=st.floats(-1.5, 1.5),
       po=st.floats(0.2, 2.9), radius=st.floats(0.1, 10.0))
def test_general_profile_attains_bound(ti, pi_, to, po, radius):
    lay = make_layout(12, 9, LAMBDA_26 / 4, LAMBDA_26 / 4, radius)
    prof = phase_general(lay, AngleSpec(ti, pi_, to, po))
    g = cascaded_gain(lay, prof, (ti, pi_), (to, po))
    assert abs(g) == pytest.approx(lay.size, rel=1e-9)
    g_full = cascaded_gain(lay, prof, (ti, pi_), (to, po), separable=False)
    assert g_full == pytest.approx(g, rel=1e-9)


def test_random_profiles_below_bound():
    rng = np.random.default_rng(3)
    lay = make_layout(8, 8, LAMBDA_26 / 4, LAMBDA_26 / 4, 0.5)
    for _ in range(200):
        prof = PhaseProfile(rng.uniform(-math.pi, math.pi, lay.size), "random")
        g = cascaded_gain(lay, prof, (rng.uniform(-1, 1), 1.5), (rng.uniform(-1, 1), 1.6))
        assert abs(g) <= lay.size * (1 + 1e-12)


def test_retro_specular_planar_zero_phase():
    lay = make_layout(6, 7, 0.004, 0.004, None)
    # u_o = -u_i: sum of unit vectors vanishes
    g = cascaded_gain(lay, zero_reference_profile(lay), (0.3, 1.2), (0.3 - math.pi, math.pi - 1.2))
    assert g == pytest.approx(lay.size, rel=1e-12)


def test_fresnel_single_element_magnitude():
    lay = single_element()
    prof = zero_reference_profile(lay)
    tx, rx = np.array([2.0, 0.0, 1.0]), np.array([2.0, 0.0, -1.0])
    r = math.sqrt(5.0)
    assert abs(fresnel_field(lay, prof, tx, rx)) == pytest.approx(1 / (4 * math.pi * r * r))
    doubled = abs(fresnel_field(lay, prof, 2 * tx, 2 * rx))
    assert doubled == pytest.approx(abs(fresnel_field(lay, prof, tx, rx)) / 4, rel=1e-12)


def test_fresnel_three_elements_manual_sum():
    lay = make_layout(3, 1, 0.005, 0.005, 0.4)
    phases = np.array([0.3, -1.2, 2.5])
    prof = PhaseProfile(phases, "toy")
    tx, rx = np.array([1.0, 0.2, 0.1]), np.array([0.8, -0.3, 0.4])
    k = 2 * math.pi / LAMBDA_26
    total = 0j
    for i in range(3):
        p = lay.offsets[i]
        r1 = math.dist(p, tx)
        r2 = math.dist(p, rx)
        ang = phases[i] - k * (r1 + r2)
        total += complex(math.cos(ang), math.sin(ang)) / (4 * math.pi * r1 * r2)
    assert fresnel_field(lay, prof, tx, rx) == pytest.approx(total, rel=1e-12)


@settings(max_examples=20, deadline=None)
@given(c=st.floats(1e-3, 1e3))
def test_fresnel_amplitude_scaling(c):
    lay = make_layout(4, 3, 0.004, 0.004, 0.3)
    prof = phase_general(lay, AngleSpec(0.1, 1.4, 0.2, 1.6))
    tx, rx = [1.0, 0.1, 0.2], [1.2, -0.1, -0.3]
    base = abs(fresnel_field(lay, prof, tx, rx))
    assert abs(fresnel_field(lay, prof, tx, rx, amplitudes=c)) == pytest.approx(c * base, rel=1e-10)


def test_fresnel_converges_to_far_field():
    lay = make_layout(8, 6, LAMBDA_26 / 4, LAMBDA_26 / 4, 0.3)
    rng = np.random.default_rng(5)
    prof = PhaseProfile(rng.uniform(-math.pi, math.pi, lay.size), "random")
    inc, out = (0.3, 1.4), (-0.5, 1.7)
    k = 2 * math.pi / LAMBDA_26
    s = unit_direction(*inc) + unit_direction(*out)
    far = np.exp(1j * (prof.unwrapped + k * lay.offsets @ s))
    corr = []
    for dist in (1.0, 10.0, 1000.0):
        tx, rx = dist * unit_direction(*inc), dist * unit_direction(*out)
        r1 = np.linalg.norm(lay.offsets - tx, axis=1)
        r2 = np.linalg.norm(lay.offsets - rx, axis=1)
        near = np.exp(1j * (prof.unwrapped - k * (r1 + r2 - 2 * dist)))
        corr.append(abs(np.vdot(far, near)) / lay.size)
    assert corr[0] < corr[1] < corr[2]
    assert corr[2] > 1 - 1e-6


def test_fresnel_rejects_coincident_point():
    lay = single_element()
    with pytest.raises(ValueError):
        fresnel_field(lay, zero_reference_profile(lay), [1.0, 0.0, 0.0], [0.0, 0.0, 0.0])


def test_chamber_identical_profiles_give_identical_sweeps():
    cfg = replace(ChamberConfig(), points=41)
    lay = build_cylindrical_layout(cfg.cirs_params())
    ref, pat = chamber_sweep(cfg, lay, zero_reference_profile(lay))
    assert np.array_equal(ref.field_db, pat.field_db)
    assert ref.peak_db == pytest.approx(0.0)


def test_chamber_track_covers_18_degrees():
    ref, _ = chamber_sweep(replace(ChamberConfig(), points=21))
    assert ref.angles[0] == pytest.approx(-18.43, abs=0.01)
    assert ref.angles[-1] == pytest.approx(18.43, abs=0.01)
    assert np.all(np.diff(ref.angles) > 0)


def test_chamber_planar_targets_equal():
    ref, pat = chamber_sweep(replace(ChamberConfig(), radius=None, points=41))
    assert focusing_gain_db(ref, pat) == pytest.approx(0.0, abs=1e-9)


def test_chamber_resolution_convergence():
    base = ChamberConfig()
    g1 = focusing_gain_db(*chamber_sweep(base))
    g2 = focusing_gain_db(*chamber_sweep(replace(base, points=2 * base.points - 1)))
    assert abs(g1 - g2) < 0.1


def test_chamber_single_point():
    ref, pat = chamber_sweep(replace(ChamberConfig(), points=1))
    assert ref.angles.tolist() == [0.0]
    assert len(pat.field_db) == 1


def test_lobe_width_triangle():
    sweep = PatternSweep(np.arange(-5.0, 6.0), -np.abs(np.arange(-5.0, 6.0)))
    assert lobe_width(sweep) == 6.0
    assert lobe_width(sweep, drop_db=10) == 10.0


def test_sweep_csv(tmp_path):
    ref = PatternSweep(np.array([-1.0, 0.0, 1.0]), np.array([-3.0, 0.0, -3.0]))
    path = tmp_path / "s.csv"
    write_sweep_csv(ref, ref, path, "cirsim t seed=0")
    lines = path.read_text().splitlines()
    assert lines[1] == "phi_o_deg,ref_db,cirs_db"
    assert len(lines) == 5
