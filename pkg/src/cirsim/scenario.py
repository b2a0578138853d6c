"""Randomized multi-lane highway drops.

Global frame: y along the road (direction of motion), x across it, z up.
The road spans x in [0, lanes * lane_width] and y in [0, length]. Vehicles
are axis-aligned boxes resting on the ground.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .geometry import SurfacePose


class ScenarioError(RuntimeError):
    """Vehicles could not be placed without overlap."""


@dataclass(frozen=True)
class HighwayConfig:
    length: float = 500.0
    lanes: int = 5
    lane_width: float = 5.0
    density: float = 10.0             # cars/km/lane
    cav_fraction: float = 0.5
    vehicle_length: float = 5.0
    vehicle_width: float = 1.8
    vehicle_height: float = 1.5
    antenna_height: float = 0.75
    cirs_center_height: float = 0.75
    tx_rx_distance: float = 100.0
    tx_lane: int | None = None        # None: center lane

    def __post_init__(self):
        for name in ("length", "lane_width", "vehicle_length", "vehicle_width",
                     "vehicle_height", "antenna_height", "cirs_center_height",
                     "tx_rx_distance"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.lanes < 1:
            raise ValueError("lanes must be >= 1")
        if self.density < 0:
            raise ValueError("density must be >= 0")
        if not 0.0 <= self.cav_fraction <= 1.0:
            raise ValueError("cav_fraction must lie in [0, 1]")
        if self.vehicle_width > self.lane_width:
            raise ValueError("vehicle wider than lane")
        if self.tx_rx_distance + self.vehicle_length > self.length:
            raise ValueError("Tx-Rx distance does not fit on the road")
        if self.tx_lane is not None and not 0 <= self.tx_lane < self.lanes:
            raise ValueError("tx_lane out of range")

    @property
    def link_lane(self) -> int:
        return self.lanes // 2 if self.tx_lane is None else self.tx_lane

    def lane_center(self, lane) -> float:
        return (np.asarray(lane) + 0.5) * self.lane_width

    @property
    def width(self) -> float:
        return self.lanes * self.lane_width


@dataclass(frozen=True, eq=False)
class Scenario:
    """One static drop. Vehicle 0 is the Tx, vehicle 1 the Rx."""

    config: HighwayConfig
    centers: np.ndarray      # (V, 3) box centers
    dims: np.ndarray         # (V, 3) extents along (x, y, z)
    is_cav: np.ndarray       # (V,) bool
    lane: np.ndarray         # (V,) int
    p_tx: np.ndarray
    p_rx: np.ndarray

    TX = 0
    RX = 1

    @property
    def count(self) -> int:
        return len(self.centers)

    @property
    def box_min(self) -> np.ndarray:
        lo = self.centers - self.dims / 2
        return lo

    @property
    def box_max(self) -> np.ndarray:
        return self.centers + self.dims / 2

    @property
    def midpoint(self) -> np.ndarray:
        return (self.p_tx + self.p_rx) / 2

    def relay_region(self, surface_length: float) -> tuple[float, float, float, float]:
        """(x0, x1, y0, y1): full road width, 2L long, centered at the
        Tx-Rx midpoint."""
        y = self.midpoint[1]
        return (0.0, self.config.width, y - surface_length, y + surface_length)


def _place_lane(rng, count, lo, hi, gap, fixed, budget):
    """Uniform positions in [lo, hi] with pairwise spacing >= gap, also
    from ``fixed``. Sequential rejection; ``budget`` is a one-element list
    of remaining retries shared across lanes."""
    placed = list(fixed)
    out = []
    for _ in range(count):
        while True:
            y = rng.uniform(lo, hi)
            if all(abs(y - q) >= gap for q in placed):
                placed.append(y)
                out.append(y)
                break
            budget[0] -= 1
            if budget[0] < 0:
                raise ScenarioError("vehicle placement exceeded the retry budget")
    return out


def generate_scenario(config: HighwayConfig, rng) -> Scenario:
    """Poisson drop of vehicles plus the forced Tx and Rx CAVs.

    The random stream is consumed identically for every ``cav_fraction``:
    CAV flags come from one uniform draw per vehicle compared against the
    fraction, so drops sharing a seed differ only in which vehicles are CAVs.
    """
    cfg = config
    L = cfg.vehicle_length
    link_lane = cfg.link_lane
    y_tx = cfg.length / 2 - cfg.tx_rx_distance / 2
    y_rx = cfg.length / 2 + cfg.tx_rx_distance / 2

    counts = rng.poisson(cfg.density * cfg.length / 1000.0, size=cfg.lanes)
    budget = [100 * int(counts.sum())]
    ys, lanes = [y_tx, y_rx], [link_lane, link_lane]
    for lane in range(cfg.lanes):
        fixed = (y_tx, y_rx) if lane == link_lane else ()
        pos = _place_lane(rng, int(counts[lane]), L / 2, cfg.length - L / 2, L, fixed, budget)
        ys.extend(pos)
        lanes.extend([lane] * len(pos))
    draws = rng.uniform(size=len(ys) - 2)

    lanes = np.array(lanes, dtype=int)
    V = len(ys)
    centers = np.column_stack([cfg.lane_center(lanes), np.array(ys),
                               np.full(V, cfg.vehicle_height / 2)])
    dims = np.tile([cfg.vehicle_width, cfg.vehicle_length, cfg.vehicle_height], (V, 1))
    is_cav = np.concatenate([[True, True], draws < cfg.cav_fraction])
    x_link = float(cfg.lane_center(link_lane))
    return Scenario(
        config=cfg, centers=centers, dims=dims, is_cav=is_cav, lane=lanes,
        p_tx=np.array([x_link, y_tx, cfg.antenna_height]),
        p_rx=np.array([x_link, y_rx, cfg.antenna_height]),
    )


@dataclass(frozen=True)
class RelayCandidate:
    vehicle: int
    pose: SurfacePose

    @property
    def position(self) -> np.ndarray:
        return self.pose.position


def surface_pose(scn: Scenario, vehicle: int) -> SurfacePose | None:
    """Pose of the vehicle side surface facing the Tx-Rx lane, or None for
    vehicles in that lane (neither side faces the link)."""
    dx = scn.p_tx[0] - scn.centers[vehicle, 0]
    if abs(dx) < 1e-9:
        return None
    s = math.copysign(1.0, dx)
    pos = np.array([scn.centers[vehicle, 0] + s * scn.dims[vehicle, 0] / 2,
                    scn.centers[vehicle, 1], scn.config.cirs_center_height])
    return SurfacePose(pos, np.array([s, 0.0, 0.0]))


def relay_candidates(scn: Scenario, surface_length: float | None) -> list[RelayCandidate]:
    """CAVs (other than Tx and Rx) whose surface phase center lies in the
    relay region. ``surface_length=None`` searches the whole road."""
    out = []
    region = None if surface_length is None else scn.relay_region(surface_length)
    for v in np.flatnonzero(scn.is_cav):
        if v in (Scenario.TX, Scenario.RX):
            continue
        pose = surface_pose(scn, int(v))
        if pose is None:
            continue
        if region is not None:
            x0, x1, y0, y1 = region
            x, y = pose.position[0], pose.position[1]
            if not (x0 <= x <= x1 and y0 <= y <= y1):
                continue
        out.append(RelayCandidate(int(v), pose))
    return out


def segment_box_hits(p_a, p_b, box_min: np.ndarray, box_max: np.ndarray) -> np.ndarray:
    """Boolean mask of boxes blocking segment p_a -> p_b.

    A box blocks when the segment's horizontal footprint crosses its
    footprint (closed) and the segment height somewhere over the crossing
    is at or below the box top. Boxes rest on the ground.
    """
    p_a = np.asarray(p_a, dtype=float)
    p_b = np.asarray(p_b, dtype=float)
    d = p_b - p_a
    n = len(box_min)
    t0 = np.zeros(n)
    t1 = np.ones(n)
    ok = np.ones(n, dtype=bool)
    for ax in (0, 1):
        lo = box_min[:, ax] - p_a[ax]
        hi = box_max[:, ax] - p_a[ax]
        if d[ax] == 0.0:
            ok &= (lo <= 0.0) & (hi >= 0.0)
            continue
        ta = lo / d[ax]
        tb = hi / d[ax]
        t0 = np.maximum(t0, np.minimum(ta, tb))
        t1 = np.minimum(t1, np.maximum(ta, tb))
    ok &= t0 <= t1
    z_low = p_a[2] + d[2] * np.where(d[2] >= 0, t0, t1)
    tol = 1e-9 * max(1.0, abs(p_a[2]), abs(p_b[2]))
    return ok & (z_low <= box_max[:, 2] + tol)


def count_blockers(p_a, p_b, scn: Scenario, exclude=()) -> int:
    if np.array_equal(np.asarray(p_a), np.asarray(p_b)):
        raise ValueError("segment endpoints coincide")
    hits = segment_box_hits(p_a, p_b, scn.box_min, scn.box_max)
    if len(exclude):
        hits[list(exclude)] = False
    return int(hits.sum())


def write_scenario_csv(scn: Scenario, path, header_comment: str | None = None) -> None:
    with open(path, "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["vehicle_id", "x", "y", "z", "len", "wid", "hgt", "is_cav"])
        for i in range(scn.count):
            x, y, z = scn.centers[i]
            wid, ln, hgt = scn.dims[i]
            w.writerow([i] + [f"{v:.6f}" for v in (x, y, z, ln, wid, hgt)] + [int(scn.is_cav[i])])
