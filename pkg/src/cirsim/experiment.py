"""Monte Carlo V2V sweeps and the chamber experiment."""

from __future__ import annotations

import csv
import functools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .beams import build_codebooks, select_beam_pair
from .channel import LinkParams, NearFieldError, cascaded_channel, composite_channel, direct_channel
from .em_field import ChamberConfig, PatternSweep, chamber_sweep, focusing_gain_db, lobe_width
from .geometry import CirsLayout, CirsParams, build_cylindrical_layout
from .phase import AngleSpec, PhaseProfile, phase_cylindrical_mirror, phase_general
from .scenario import HighwayConfig, Scenario, ScenarioError, count_blockers, generate_scenario, relay_candidates

MODES = ("direct", "cirs", "cris")


@dataclass(frozen=True)
class SurfaceSpec:
    """Vehicle-door surface. Spacings default to a quarter wavelength."""

    rows: int = 400
    cols: int = 400
    row_spacing: float | None = None
    col_spacing: float | None = None
    radius: float | None = 8.0
    theta_bar_deg: float = 80.0

    def params(self, wavelength: float) -> CirsParams:
        d_m = self.row_spacing if self.row_spacing is not None else wavelength / 4
        d_n = self.col_spacing if self.col_spacing is not None else wavelength / 4
        return CirsParams.from_radius(self.rows, self.cols, d_m, d_n, self.radius, wavelength)


@dataclass(frozen=True)
class SweepConfig:
    rho_list: tuple[float, ...] = (10.0, 50.0)
    p_grid: tuple[float, ...] = (0.0, 0.25, 0.5, 0.75, 1.0)
    drops_per_point: int = 1000
    modes: tuple[str, ...] = MODES
    global_seed: int = 0
    averaging: str = "db"
    snr_floor_db: float = -50.0
    link: LinkParams = field(default_factory=LinkParams)
    highway: HighwayConfig = field(default_factory=HighwayConfig)
    surface: SurfaceSpec = field(default_factory=SurfaceSpec)

    def __post_init__(self):
        if self.drops_per_point < 1:
            raise ValueError("drops_per_point must be >= 1")
        if not self.rho_list or not self.p_grid or not self.modes:
            raise ValueError("rho_list, p_grid and modes must be non-empty")
        if any(r < 0 for r in self.rho_list):
            raise ValueError("densities must be >= 0")
        if any(not 0 <= p <= 1 for p in self.p_grid):
            raise ValueError("p_grid entries must lie in [0, 1]")
        bad = set(self.modes) - set(MODES)
        if bad:
            raise ValueError(f"unknown modes {sorted(bad)}")
        if self.averaging not in ("db", "linear"):
            raise ValueError("averaging must be 'db' or 'linear'")
        if self.global_seed < 0:
            raise ValueError("global_seed must be >= 0")


@dataclass(frozen=True)
class SnrStats:
    mode: str
    rho: float
    P: float
    mean_db: float
    std_db: float
    drop_count: int
    blockage_rate: float
    failed: int = 0

    @property
    def std_error(self) -> float:
        return self.std_db / math.sqrt(self.drop_count) if self.drop_count else math.inf


@functools.lru_cache(maxsize=8)
def _surface(spec: SurfaceSpec, wavelength: float) -> tuple[CirsLayout, PhaseProfile]:
    layout = build_cylindrical_layout(spec.params(wavelength))
    return layout, phase_cylindrical_mirror(layout, math.radians(spec.theta_bar_deg))


def drop_seed(global_seed: int, rho: float, drop: int) -> np.random.SeedSequence:
    """Per-drop seed. Mode and CAV fraction are left out on purpose: all
    modes and all P values see the same vehicles (common random numbers)."""
    return np.random.SeedSequence([int(global_seed), int(round(rho * 1000)), int(drop)])


def _evaluate_mode(scn: Scenario, mode: str, config: SweepConfig, layout, mirror, seed):
    link = config.link
    chan_rng = np.random.default_rng(seed)
    ex = (Scenario.TX, Scenario.RX)
    direct_blk = count_blockers(scn.p_tx, scn.p_rx, scn, exclude=ex)
    direct = direct_channel(scn.p_tx, scn.p_rx, direct_blk, link, chan_rng)

    if mode == "direct":
        cands = []
    elif mode == "cirs":
        cands = relay_candidates(scn, layout.length)
    else:
        cands = relay_candidates(scn, None)

    used, terms, skipped = [], [], 0
    for c in cands:
        b_in = count_blockers(scn.p_tx, c.position, scn, exclude=(Scenario.TX, c.vehicle))
        b_out = count_blockers(c.position, scn.p_rx, scn, exclude=(Scenario.RX, c.vehicle))
        if mode == "cris":
            profile = phase_general(layout, AngleSpec(*c.pose.local_angles(scn.p_tx),
                                                      *c.pose.local_angles(scn.p_rx)))
        else:
            profile = mirror
        try:
            term = cascaded_channel(scn.p_tx, scn.p_rx, c.pose, layout, profile, b_in, b_out,
                                    link, chan_rng, label=str(c.vehicle))
        except NearFieldError:
            skipped += 1
            continue
        used.append(c)
        terms.append(term)

    chan = composite_channel(direct, terms)
    decision = select_beam_pair(chan, build_codebooks(scn, used, link), link)
    snr = max(decision.snr_db, config.snr_floor_db)
    diag = {
        "direct_blockers": direct_blk,
        "candidates": len(used),
        "near_field_skipped": skipped,
        "target": decision.chosen_target,
        "raw_snr_db": decision.snr_db,
    }
    return snr, diag


def simulate_drop(config: SweepConfig, P: float, rho: float, seed, modes=None):
    """All requested modes on one drop. Returns {mode: (snr_db, diagnostics)}."""
    modes = config.modes if modes is None else modes
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    scn_seed, chan_seed = seed.spawn(2)
    hw = replace(config.highway, density=rho, cav_fraction=P)
    scn = generate_scenario(hw, np.random.default_rng(scn_seed))
    layout, mirror = _surface(config.surface, config.link.wavelength)
    return {m: _evaluate_mode(scn, m, config, layout, mirror, chan_seed) for m in modes}


def run_drop(config: SweepConfig, P: float, rho: float, mode: str, drop_seed):
    """(snr_db, diagnostics) of one drop in one mode."""
    return simulate_drop(config, P, rho, drop_seed, modes=(mode,))[mode]


def _task(args):
    config, rho, P, drop = args
    try:
        res = simulate_drop(config, P, rho, drop_seed(config.global_seed, rho, drop))
    except ScenarioError:
        return None
    return {m: (snr, d["direct_blockers"] > 0) for m, (snr, d) in res.items()}


def _aggregate(config: SweepConfig, mode, rho, P, results) -> SnrStats:
    ok = [r[mode] for r in results if r is not None]
    failed = len(results) - len(ok)
    if not ok:
        return SnrStats(mode, rho, P, math.nan, math.nan, 0, math.nan, failed)
    snr = np.array([s for s, _ in ok])
    blocked = np.array([b for _, b in ok], dtype=float)
    if config.averaging == "db":
        mean = float(np.mean(snr))
    else:
        mean = float(10 * np.log10(np.mean(10 ** (snr / 10))))
    std = float(np.std(snr, ddof=1)) if len(snr) > 1 else 0.0
    return SnrStats(mode, rho, P, mean, std, len(ok), float(blocked.mean()), failed)


def run_v2v_sweep(config: SweepConfig, threads: int = 1) -> list[SnrStats]:
    """SNR statistics for every (mode, rho, P). Output is independent of
    ``threads``: drops are seeded individually and reduced in drop order."""
    tasks = [(config, rho, P, d)
             for rho in config.rho_list for P in config.p_grid
             for d in range(config.drops_per_point)]
    if threads > 1:
        chunk = max(1, len(tasks) // (threads * 8))
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_task, tasks, chunksize=chunk))
    else:
        results = [_task(t) for t in tasks]

    stats = []
    n = config.drops_per_point
    i = 0
    for rho in config.rho_list:
        for P in config.p_grid:
            block = results[i:i + n]
            i += n
            for mode in config.modes:
                stats.append(_aggregate(config, mode, rho, P, block))
    return stats


def write_results_csv(stats: list[SnrStats], path, header_comment: str | None = None) -> None:
    with open(path, "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["mode", "rho", "P", "mean_snr_db", "std_snr_db", "drops", "blockage_rate"])
        for s in stats:
            w.writerow([s.mode, f"{s.rho:g}", f"{s.P:g}", f"{s.mean_db:.6f}",
                        f"{s.std_db:.6f}", s.drop_count, f"{s.blockage_rate:.6f}"])


def stats_table(stats: list[SnrStats]) -> dict:
    """{(mode, rho, P): SnrStats}"""
    return {(s.mode, s.rho, s.P): s for s in stats}


def run_chamber(config: ChamberConfig = ChamberConfig()) -> tuple[PatternSweep, PatternSweep, dict]:
    ref, pat = chamber_sweep(config)
    summary = {
        "focusing_gain_db": focusing_gain_db(ref, pat),
        "ref_width_3db_deg": lobe_width(ref),
        "cirs_width_3db_deg": lobe_width(pat),
    }
    return ref, pat, summary


def header_comment(seed) -> str:
    return f"cirsim {__version__} seed={seed}"
