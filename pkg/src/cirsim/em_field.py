"""Scattered-field evaluation for phased conformal surfaces.

Directions point from the surface toward the source or observer. A plane
wave arriving from direction u reaches element p with phase
exp(+j k <p, u>) relative to the phase center, so the reflected sum for an
(incident, outgoing) pair is sum exp(j Phi) exp(+j k <p, u_i + u_o>).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .geometry import CirsLayout, CirsParams, build_cylindrical_layout, unit_direction, wavelength_of
from .phase import PhaseProfile, phase_cylindrical_mirror, zero_reference_profile


def surface_response(layout: CirsLayout, theta: float, phi: float) -> np.ndarray:
    """Far-field array response exp(-j k <offset, u(theta, phi)>) per element."""
    k = 2.0 * np.pi / layout.wavelength
    u = unit_direction(theta, phi)
    return np.exp(-1j * k * (layout.offsets @ u))


def cascaded_gain(layout: CirsLayout, profile: PhaseProfile,
                  incident: tuple[float, float], outgoing: tuple[float, float],
                  separable: bool = True) -> complex:
    """Coherent reflection gain of the surface for one (AoI, AoR) pair.

    Bounded by the element count; reaches it when ``profile`` is the general
    configuration for the same pair.
    """
    if len(profile) != layout.size:
        raise ValueError("profile and layout sizes differ")
    k = 2.0 * np.pi / layout.wavelength
    s = unit_direction(*incident) + unit_direction(*outgoing)
    if separable and profile.separable:
        row = np.exp(1j * (profile.row_phase + k * (layout.x_rows * s[0] + layout.z_rows * s[2])))
        col = np.exp(1j * (profile.col_phase + k * layout.y_cols * s[1]))
        return complex(row.sum() * col.sum())
    return complex(np.sum(np.exp(1j * (profile.unwrapped + k * (layout.offsets @ s)))))


def fresnel_field(layout: CirsLayout, profile: PhaseProfile, tx, rx,
                  amplitudes=1.0) -> complex:
    """Spherical-wave bistatic field from ``tx`` to ``rx`` via every element.

    Points are in the surface's local frame (phase center at the origin).
    """
    fields = fresnel_sweep(layout, profile, tx, np.atleast_2d(rx), amplitudes)
    return complex(fields[0])


def fresnel_sweep(layout: CirsLayout, profile: PhaseProfile, tx, rx_points,
                  amplitudes=1.0) -> np.ndarray:
    """:func:`fresnel_field` for many receiver positions, (P, 3) -> (P,)."""
    if len(profile) != layout.size:
        raise ValueError("profile and layout sizes differ")
    k = 2.0 * np.pi / layout.wavelength
    pos = layout.offsets
    r1 = np.linalg.norm(pos - np.asarray(tx, dtype=float), axis=1)
    rx_points = np.asarray(rx_points, dtype=float)
    r2 = np.linalg.norm(pos[None, :, :] - rx_points[:, None, :], axis=2)
    if np.any(r1 == 0) or np.any(r2 == 0):
        raise ValueError("field point coincides with a surface element")
    weights = np.asarray(amplitudes) * np.exp(1j * (profile.unwrapped - k * r1)) / (4.0 * np.pi * r1)
    terms = weights[None, :] * np.exp(-1j * k * r2) / r2
    return terms.sum(axis=1)


@dataclass(frozen=True)
class PatternSweep:
    angles: np.ndarray
    field_db: np.ndarray

    def __post_init__(self):
        if len(self.angles) != len(self.field_db):
            raise ValueError("angles and field_db lengths differ")

    @property
    def peak_db(self) -> float:
        return float(np.max(self.field_db))


@dataclass(frozen=True)
class ChamberConfig:
    """Anechoic-chamber replica. Defaults follow the 26 GHz prototype:
    R = 30 cm, 20 x 20 cm surface, 37 rows x 27 columns = 999 elements,
    Tx at 1.5 m broadside, Rx track at 1.5 m spanning 1 m.

    Set ``radius`` to None for a planar target.
    """

    frequency: float = 26e9
    radius: float | None = 0.3
    rows: int = 37
    cols: int = 27
    arc_length: float = 0.2
    surface_length: float = 0.2
    tx_distance: float = 1.5
    tx_angle_deg: float = 0.0
    rx_distance: float = 1.5
    track_length: float = 1.0
    points: int = 201
    design_angle_deg: float = 0.0

    def __post_init__(self):
        if self.points < 1:
            raise ValueError("points must be >= 1")
        for name in ("frequency", "arc_length", "surface_length", "tx_distance",
                     "rx_distance", "track_length"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.rows < 1 or self.cols < 1:
            raise ValueError("rows and cols must be >= 1")
        if self.radius is not None and self.radius <= 0:
            raise ValueError("radius must be positive or None")
        if self.radius is not None and self.arc_length >= 2 * math.pi * self.radius:
            raise ValueError("arc_length exceeds the cylinder circumference")

    def cirs_params(self) -> CirsParams:
        lam = wavelength_of(self.frequency)
        if self.radius is None:
            d_m = self.arc_length / self.rows
        else:
            step = self.arc_length / self.radius / self.rows
            d_m = 2.0 * self.radius * math.sin(step / 2.0)
        return CirsParams.from_radius(self.rows, self.cols, d_m,
                                      self.surface_length / self.cols,
                                      self.radius, lam)

    def track(self) -> np.ndarray:
        """Receiver positions: a straight track in the curved (x-z) plane."""
        if self.points == 1:
            zs = np.zeros(1)
        else:
            zs = np.linspace(-self.track_length / 2, self.track_length / 2, self.points)
        return np.column_stack([np.full_like(zs, self.rx_distance), np.zeros_like(zs), zs])

    def tx_position(self) -> np.ndarray:
        a = math.radians(self.tx_angle_deg)
        return np.array([self.tx_distance * math.cos(a), 0.0, self.tx_distance * math.sin(a)])


def chamber_sweep(config: ChamberConfig = ChamberConfig(),
                  layout: CirsLayout | None = None,
                  patterned: PhaseProfile | None = None) -> tuple[PatternSweep, PatternSweep]:
    """Reference (plain curved) and patterned sweeps, both in dB relative
    to the reference sweep's maximum.
    """
    if layout is None:
        layout = build_cylindrical_layout(config.cirs_params())
    if patterned is None:
        patterned = phase_cylindrical_mirror(layout, math.radians(config.design_angle_deg))
    rx = config.track()
    tx = config.tx_position()
    ref = np.abs(fresnel_sweep(layout, zero_reference_profile(layout), tx, rx))
    pat = np.abs(fresnel_sweep(layout, patterned, tx, rx))
    norm = ref.max()
    angles = np.degrees(np.arctan2(rx[:, 2], rx[:, 0]))
    return (PatternSweep(angles, 20 * np.log10(ref / norm)),
            PatternSweep(angles, 20 * np.log10(pat / norm)))


def focusing_gain_db(reference: PatternSweep, patterned: PatternSweep) -> float:
    return patterned.peak_db - reference.peak_db


def lobe_width(sweep: PatternSweep, drop_db: float = 3.0) -> float:
    """Angular width of the contiguous region around the peak within
    ``drop_db`` of it. Clipped to the sweep extent.
    """
    v = sweep.field_db
    i = int(np.argmax(v))
    floor = v[i] - drop_db
    lo = i
    while lo > 0 and v[lo - 1] >= floor:
        lo -= 1
    hi = i
    while hi < len(v) - 1 and v[hi + 1] >= floor:
        hi += 1
    return float(sweep.angles[hi] - sweep.angles[lo])


def write_sweep_csv(reference: PatternSweep, patterned: PatternSweep, path,
                    header_comment: str | None = None) -> None:
    with open(path, "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["phi_o_deg", "ref_db", "cirs_db"])
        for a, r, c in zip(reference.angles, reference.field_db, patterned.field_db):
            w.writerow([f"{a:.6f}", f"{r:.6f}", f"{c:.6f}"])
