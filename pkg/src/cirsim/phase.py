"""Phase profiles for conformal reflecting surfaces."""

from __future__ import annotations

import csv
import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import CirsLayout

DEFAULT_THETA_BAR = math.radians(80.0)


def wrap_phase(phi):
    """Map phases to (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(phi, dtype=float), 2.0 * np.pi)


@dataclass(frozen=True)
class AngleSpec:
    """Incidence and reflection directions in the surface's local frame.

    Azimuths are measured from the surface normal (+x) toward +y,
    elevations from the vertical (+z). All values in radians.
    """

    theta_in: float
    phi_in: float
    theta_out: float
    phi_out: float

    def __post_init__(self):
        for name in ("phi_in", "phi_out"):
            v = getattr(self, name)
            if not 0.0 <= v <= math.pi:
                raise ValueError(f"{name}={v} outside [0, pi]")
        for name in ("theta_in", "theta_out"):
            v = getattr(self, name)
            if not -math.pi <= v <= math.pi:
                raise ValueError(f"{name}={v} outside [-pi, pi]")

    @classmethod
    def mirror(cls, theta_bar: float) -> "AngleSpec":
        """Horizontal specular pair: theta_out = -theta_in = theta_bar."""
        return cls(-theta_bar, math.pi / 2, theta_bar, math.pi / 2)

    def swapped(self) -> "AngleSpec":
        return AngleSpec(self.theta_out, self.phi_out, self.theta_in, self.phi_in)


@dataclass(frozen=True, eq=False)
class PhaseProfile:
    """Per-element phases, flattened in layout order.

    ``unwrapped`` keeps the multi-turn values; ``wrapped`` is what a
    fabricated element realizes. A profile that splits as
    row_phase[m] + col_phase[n] may be built from the two parts alone; the
    flat vector is then formed on first access.
    """

    values: np.ndarray | None
    source: str
    angles: AngleSpec | None = None
    theta_bar: float | None = None
    row_phase: np.ndarray | None = field(default=None, repr=False)
    col_phase: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.values is None and not self.separable:
            raise ValueError("profile needs values or both row/column parts")
        parts = [self.values, self.row_phase, self.col_phase]
        if not all(np.all(np.isfinite(p)) for p in parts if p is not None):
            raise ValueError("phase profile has non-finite entries")

    @functools.cached_property
    def unwrapped(self) -> np.ndarray:
        if self.values is not None:
            return np.asarray(self.values, dtype=float)
        return (self.row_phase[:, None] + self.col_phase[None, :]).ravel()

    @property
    def wrapped(self) -> np.ndarray:
        return wrap_phase(self.unwrapped)

    @property
    def separable(self) -> bool:
        return self.row_phase is not None and self.col_phase is not None

    def __len__(self):
        if self.values is not None:
            return len(self.values)
        return self.row_phase.size * self.col_phase.size


def _separable(source, rows, cols, **meta) -> PhaseProfile:
    return PhaseProfile(None, source, row_phase=rows, col_phase=cols, **meta)


def phase_general(layout: CirsLayout, angles: AngleSpec) -> PhaseProfile:
    """Phase configuration steering ``angles.(theta_in, phi_in)`` into
    ``angles.(theta_out, phi_out)`` for an arbitrary element layout.
    """
    k = 2.0 * np.pi / layout.wavelength
    ti, pi_, to, po = angles.theta_in, angles.phi_in, angles.theta_out, angles.phi_out
    cx = math.cos(to) * math.sin(po) + math.cos(ti) * math.sin(pi_)
    cy = math.sin(to) * math.sin(po) + math.sin(ti) * math.sin(pi_)
    cz = math.cos(po) + math.cos(pi_)
    rows = -k * (layout.x_rows * cx + layout.z_rows * cz)
    cols = -k * layout.y_cols * cy
    return _separable("general", rows, cols, angles=angles)


def phase_general_offsets(offsets: np.ndarray, wavelength: float,
                          angles: AngleSpec) -> np.ndarray:
    """Same configuration for free-form element offsets, (E, 3) -> (E,)."""
    k = 2.0 * np.pi / wavelength
    ti, pi_, to, po = angles.theta_in, angles.phi_in, angles.theta_out, angles.phi_out
    coef = np.array([
        math.cos(to) * math.sin(po) + math.cos(ti) * math.sin(pi_),
        math.sin(to) * math.sin(po) + math.sin(ti) * math.sin(pi_),
        math.cos(po) + math.cos(pi_),
    ])
    return -k * (np.asarray(offsets, dtype=float) @ coef)


def phase_cylindrical_mirror(layout: CirsLayout,
                             theta_bar: float = DEFAULT_THETA_BAR) -> PhaseProfile:
    """Pre-configured profile making the cylinder act as a flat mirror for
    horizontal specular reflection at azimuth ``theta_bar``.
    """
    p = layout.params
    if p.is_planar:
        rows = np.zeros(p.rows)
    else:
        R = p.radius
        rows = -(4.0 * np.pi * R / p.wavelength) * (np.cos(layout.psi_rows) - 1.0) \
            * math.cos(theta_bar)
    return _separable("cylindrical_mirror", rows, np.zeros(p.cols),
                      angles=AngleSpec.mirror(theta_bar), theta_bar=theta_bar)


def zero_reference_profile(layout: CirsLayout) -> PhaseProfile:
    """Plain metallic target of the same shape: no phase compensation."""
    return _separable("zero_reference", np.zeros(layout.rows), np.zeros(layout.cols))


def quantize_phases(profile: PhaseProfile, levels: int) -> PhaseProfile:
    """Snap each phase to the nearest of ``levels`` values 2*pi*k/levels.

    Ties go to the lower grid value. The unwrapped turn count is preserved.
    """
    if levels < 2:
        raise ValueError("levels must be >= 2")
    step = 2.0 * np.pi / levels
    idx = np.ceil(profile.unwrapped / step - 0.5)
    return PhaseProfile(idx * step, profile.source, profile.angles, profile.theta_bar)


def write_phase_csv(layout: CirsLayout, profile: PhaseProfile, path,
                    header_comment: str | None = None) -> None:
    if len(profile) != layout.size:
        raise ValueError("profile and layout sizes differ")
    wrapped = profile.wrapped
    with open(path, "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["m", "n", "phi_rad_wrapped", "phi_rad_unwrapped"])
        for i in range(layout.size):
            w.writerow([int(layout.m_index[i]), int(layout.n_index[i]),
                        f"{wrapped[i]:.9g}", f"{profile.unwrapped[i]:.9g}"])
