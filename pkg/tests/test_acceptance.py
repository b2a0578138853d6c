"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

import math
import time

import numpy as np
import pytest

from cirsim.beams import Codebooks, select_beam_pair, snr_linear
from cirsim.channel import LinkParams, PathTerm, composite_channel, fspl_amplitude, ula_steering
from cirsim.cli import main
from cirsim.em_field import ChamberConfig, cascaded_gain, chamber_sweep, focusing_gain_db, lobe_width
from cirsim.experiment import SurfaceSpec, SweepConfig, run_v2v_sweep, stats_table
from cirsim.geometry import CirsParams, build_cylindrical_layout, wavelength_of
from cirsim.phase import AngleSpec, PhaseProfile, phase_cylindrical_mirror, phase_general, wrap_phase

P_GRID = (0.0, 0.25, 0.5, 0.75, 1.0)
RHOS = (10.0, 50.0)
LAM = wavelength_of(26e9)


@pytest.fixture
def report(capsys):
    def emit(label, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
        return ok
    return emit


def _random_layout(rng, max_rows=64, max_cols=16):
    R = rng.uniform(0.1, 20.0)
    rows = int(rng.integers(1, max_rows + 1))
    cols = int(rng.integers(1, max_cols + 1))
    d_m = min(rng.uniform(0.1, 1.0) * LAM, 2 * R)
    d_n = rng.uniform(0.1, 1.0) * LAM
    return build_cylindrical_layout(CirsParams.from_radius(rows, cols, d_m, d_n, R, LAM))


def test_criterion_1_mirror_specialization(report):
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        lay = _random_layout(rng)
        theta_bar = rng.uniform(-math.pi / 2, math.pi / 2)
        gen = phase_general(lay, AngleSpec.mirror(theta_bar)).unwrapped
        mir = phase_cylindrical_mirror(lay, theta_bar).unwrapped
        worst = max(worst, float(np.max(np.abs(wrap_phase(gen - mir)))))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and elapsed < 1.0
    report("1 mirror specialization", ok, f"max |diff| {worst:.2e} rad, {elapsed:.3f} s")
    assert worst <= 1e-9
    assert elapsed < 1.0


def test_criterion_2_coherent_bound(report):
    rng = np.random.default_rng(202)
    t0 = time.perf_counter()
    max_ratio, worst_eq = 0.0, 0.0
    for _ in range(1000):
        lay = _random_layout(rng, max_rows=32, max_cols=32)
        inc = (rng.uniform(-math.pi / 2, math.pi / 2), rng.uniform(0.05, math.pi - 0.05))
        out = (rng.uniform(-math.pi / 2, math.pi / 2), rng.uniform(0.05, math.pi - 0.05))
        prof = PhaseProfile(rng.uniform(-math.pi, math.pi, lay.size), "random")
        max_ratio = max(max_ratio, abs(cascaded_gain(lay, prof, inc, out)) / lay.size)
        aligned = phase_general(lay, AngleSpec(*inc, *out))
        g = cascaded_gain(lay, aligned, inc, out, separable=False)
        worst_eq = max(worst_eq, abs(abs(g) - lay.size) / lay.size)
    elapsed = time.perf_counter() - t0
    ok = max_ratio <= 1 + 1e-12 and worst_eq <= 1e-9 and elapsed < 5.0
    report("2 coherent-sum bound", ok,
           f"max |g|/MN {max_ratio:.6f}, aligned rel err {worst_eq:.2e}, {elapsed:.2f} s")
    assert max_ratio <= 1 + 1e-12
    assert worst_eq <= 1e-9
    assert elapsed < 5.0


def test_criterion_3_chamber_focusing(report):
    t0 = time.perf_counter()
    ref, pat = chamber_sweep(ChamberConfig())
    elapsed = time.perf_counter() - t0
    gain = focusing_gain_db(ref, pat)
    w_ref, w_pat = lobe_width(ref), lobe_width(pat)
    covers = ref.angles[0] <= -18 and ref.angles[-1] >= 18
    ok = abs(gain - 10.0) <= 4.0 and w_pat <= 0.5 * w_ref and covers and elapsed < 30
    report("3 chamber focusing", ok,
           f"gain {gain:.2f} dB, -3 dB widths {w_pat:.2f} vs {w_ref:.2f} deg, {elapsed:.2f} s")
    assert abs(gain - 10.0) <= 4.0
    assert w_pat <= 0.5 * w_ref
    assert covers
    assert elapsed < 30


def _sweep(surface: SurfaceSpec):
    cfg = SweepConfig(rho_list=RHOS, p_grid=P_GRID, drops_per_point=200, surface=surface)
    t0 = time.perf_counter()
    stats = run_v2v_sweep(cfg, threads=8)
    return stats_table(stats), time.perf_counter() - t0


@pytest.fixture(scope="module")
def full_sweep():
    return _sweep(SurfaceSpec())


@pytest.fixture(scope="module")
def smoke_sweep():
    return _sweep(SurfaceSpec(rows=100, cols=100))


def _tol(a, b):
    return max(a.std_error, b.std_error)


def _monotone_violations(table, mode="cirs"):
    bad = []
    for rho in RHOS:
        for lo, hi in zip(P_GRID, P_GRID[1:]):
            a, b = table[(mode, rho, lo)], table[(mode, rho, hi)]
            if b.mean_db < a.mean_db - _tol(a, b):
                bad.append((rho, lo, hi, round(b.mean_db - a.mean_db, 2)))
    return bad


def _means(table, mode, rho):
    return " ".join(f"{table[(mode, rho, P)].mean_db:.2f}" for P in P_GRID)


def test_criterion_4a_monotone_full(report, full_sweep):
    table, elapsed = full_sweep
    bad = _monotone_violations(table)
    ok = not bad and elapsed < 600
    report("4a cirs monotone in P (MN=160000)", ok,
           f"rho=10: {_means(table, 'cirs', 10.0)} | rho=50: {_means(table, 'cirs', 50.0)} dB; "
           f"violations {bad}; {elapsed:.1f} s")
    assert not bad
    assert elapsed < 600


def test_criterion_4a_monotone_smoke(report, smoke_sweep):
    table, elapsed = smoke_sweep
    bad = _monotone_violations(table)
    ok = not bad and elapsed < 60
    report("4a cirs monotone in P (MN=10000 smoke)", ok, f"violations {bad}; {elapsed:.1f} s")
    assert not bad
    assert elapsed < 60


def test_criterion_4b_gain_levels(report, full_sweep):
    table, _ = full_sweep
    gains = {rho: table[("cirs", rho, 1.0)].mean_db - table[("direct", rho, 1.0)].mean_db
             for rho in RHOS}
    ok10 = abs(gains[10.0] - 8.0) <= 5.0
    ok50 = abs(gains[50.0] - 25.0) <= 6.0
    report("4b cirs gain at P=1", ok10 and ok50,
           f"rho=10: {gains[10.0]:.2f} dB (target 8 +- 5), "
           f"rho=50: {gains[50.0]:.2f} dB (target 25 +- 6)")
    assert ok10
    assert ok50


def test_criterion_5_ordering(report, full_sweep):
    table, _ = full_sweep
    bad = []
    for rho in RHOS:
        for P in P_GRID:
            d, c, r = (table[(m, rho, P)] for m in ("direct", "cirs", "cris"))
            if c.mean_db < d.mean_db - _tol(c, d) or r.mean_db < c.mean_db - _tol(r, c):
                bad.append((rho, P))
    report("5 mode ordering cris >= cirs >= direct", not bad, f"violations {bad}")
    assert not bad


def test_criterion_5_cris_flatness(report, full_sweep):
    table, _ = full_sweep
    spread = {rho: abs(table[("cris", rho, 0.25)].mean_db - table[("cris", rho, 1.0)].mean_db)
              for rho in RHOS}
    ok = all(v <= 3.0 for v in spread.values())
    report("5 cris flatness |P=0.25 - P=1| <= 3 dB", ok,
           f"rho=10: {_means(table, 'cris', 10.0)} (spread {spread[10.0]:.2f}) | "
           f"rho=50: {_means(table, 'cris', 50.0)} (spread {spread[50.0]:.2f}) dB")
    assert ok


def test_criterion_6_determinism(report, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"sweep": {"rho_list": [10, 50], "p_grid": [0, 0.5, 1], '
                   '"drops_per_point": 4}, "surface": {"rows": 100, "cols": 100}}')
    same = {}
    for cmd in ("v2v", "chamber"):
        outs = []
        for threads in (1, 4, 8):
            out = tmp_path / f"{cmd}_{threads}.csv"
            assert main([cmd, "--config", str(cfg), "--out", str(out), "--seed", "42",
                         "--threads", str(threads)]) == 0
            outs.append(out.read_bytes())
        same[cmd] = all(o == outs[0] for o in outs)
    ok = all(same.values())
    report("6 determinism across thread counts", ok, f"{same}")
    assert ok


def test_criterion_7_link_budget(report):
    fspl_db = 20 * math.log10(fspl_amplitude(100.0, LAM))
    ok_fspl = abs(fspl_db - (-100.75)) <= 0.01

    params = LinkParams()
    K = params.antennas
    a_tx = ula_steering(K, params.spacing, LAM, 0.41)
    a_rx = ula_steering(K, params.spacing, LAM, -0.23)
    alpha = fspl_amplitude(100.0, LAM) * np.exp(1.1j)
    chan = composite_channel(PathTerm(alpha, a_tx, a_rx))
    books = Codebooks(a_tx[None, :], a_rx[None, :], np.zeros(1), np.zeros(1), ("direct",))
    dec = select_beam_pair(chan, books, params)
    # sigma_s^2 |alpha K^2|^2 / (K sigma_n^2)
    closed = params.tx_power_mw * abs(alpha) ** 2 * K ** 3 / params.noise_power_mw
    got = 10 ** (dec.snr_db / 10)
    rel = abs(got - closed) / closed
    rel_direct = abs(snr_linear(chan.bilinear(a_rx, a_tx), params) - closed) / closed
    ok = ok_fspl and rel <= 1e-9 and rel_direct <= 1e-9
    report("7 link-budget oracles", ok,
           f"FSPL(100 m) {fspl_db:.4f} dB, matched SNR rel err {max(rel, rel_direct):.1e}")
    assert ok_fspl
    assert rel <= 1e-9 and rel_direct <= 1e-9
