"""Element layout of cylindrical-section conformal surfaces.

The local frame has the surface normal at the phase center along +x, the
curved (conformal) dimension in the x-z plane and the straight cylinder
axis along y. A zero curvature gives the planar limit.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0


def wavelength_of(frequency_hz: float) -> float:
    return SPEED_OF_LIGHT / frequency_hz


@dataclass(frozen=True)
class CirsParams:
    """Construction parameters of a cylinder-section surface.

    ``curvature`` is 1/R; 0 encodes an infinite radius (planar surface).
    """

    rows: int
    cols: int
    row_spacing: float
    col_spacing: float
    curvature: float
    wavelength: float
    phase_center: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("rows and cols must be >= 1")
        if self.row_spacing <= 0 or self.col_spacing <= 0:
            raise ValueError("element spacings must be positive")
        if self.wavelength <= 0:
            raise ValueError("wavelength must be positive")
        if self.curvature < 0 or not math.isfinite(self.curvature):
            raise ValueError("curvature must be finite and >= 0")
        if self.curvature > 0 and self.row_spacing > 2.0 * self.radius:
            raise ValueError(
                f"row spacing {self.row_spacing} exceeds 2R = {2.0 * self.radius}"
            )

    @classmethod
    def from_radius(cls, rows, cols, row_spacing, col_spacing, radius, wavelength,
                    phase_center=(0.0, 0.0, 0.0)) -> "CirsParams":
        if radius is None or math.isinf(radius):
            curvature = 0.0
        elif radius <= 0:
            raise ValueError("radius must be positive")
        else:
            curvature = 1.0 / radius
        return cls(rows, cols, row_spacing, col_spacing, curvature, wavelength,
                   tuple(phase_center))

    @property
    def radius(self) -> float:
        return math.inf if self.curvature == 0 else 1.0 / self.curvature

    @property
    def is_planar(self) -> bool:
        return self.curvature == 0


@dataclass(frozen=True, eq=False)
class CirsLayout:
    """Element positions of a surface, ordered row-major (m outer, n inner).

    Rows share (psi, x, z); columns share y. The per-row and per-column
    arrays are kept alongside the flattened offsets so that separable
    sums can run in O(M + N).
    """

    params: CirsParams
    m_index: np.ndarray
    n_index: np.ndarray
    psi_rows: np.ndarray
    x_rows: np.ndarray
    z_rows: np.ndarray
    y_cols: np.ndarray
    half_span: float
    length: float
    height: float
    area: float
    _offsets: np.ndarray = field(default=None, repr=False)

    @property
    def rows(self) -> int:
        return self.params.rows

    @property
    def cols(self) -> int:
        return self.params.cols

    @property
    def size(self) -> int:
        return self.params.rows * self.params.cols

    @property
    def wavelength(self) -> float:
        return self.params.wavelength

    @property
    def psi(self) -> np.ndarray:
        """Per-element local angle, flattened like ``offsets``."""
        return np.repeat(self.psi_rows, self.cols)

    @property
    def offsets(self) -> np.ndarray:
        """(MN, 3) element displacements from the phase center, in meters."""
        return self._offsets

    def positions(self) -> np.ndarray:
        """Absolute element positions (phase center + offsets)."""
        return self._offsets + np.asarray(self.params.phase_center, dtype=float)


def _centered(count: int) -> np.ndarray:
    # (i - (count - 1)/2) equals (m + 1/2) for m = -count/2 .. count/2 - 1
    return np.arange(count, dtype=float) - (count - 1) / 2.0


def build_cylindrical_layout(params: CirsParams) -> CirsLayout:
    M, N = params.rows, params.cols
    m_idx = np.arange(M) - M // 2
    n_idx = np.arange(N) - N // 2
    u = _centered(M)
    y_cols = _centered(N) * params.col_spacing

    if params.is_planar:
        psi_rows = np.zeros(M)
        x_rows = np.zeros(M)
        z_rows = u * params.row_spacing
        half_span = 0.0
        height = M * params.row_spacing
        arc = height
    else:
        R = params.radius
        half_step = math.asin(params.row_spacing / (2.0 * R))
        psi_rows = u * (2.0 * half_step)
        x_rows = R * (np.cos(psi_rows) - 1.0)
        z_rows = R * np.sin(psi_rows)
        half_span = M * half_step
        height = 2.0 * R * math.sin(min(half_span, math.pi / 2))
        arc = 2.0 * R * half_span

    length = N * params.col_spacing
    offsets = np.empty((M * N, 3))
    offsets[:, 0] = np.repeat(x_rows, N)
    offsets[:, 1] = np.tile(y_cols, M)
    offsets[:, 2] = np.repeat(z_rows, N)
    offsets.setflags(write=False)

    return CirsLayout(
        params=params,
        m_index=np.repeat(m_idx, N),
        n_index=np.tile(n_idx, M),
        psi_rows=psi_rows,
        x_rows=x_rows,
        z_rows=z_rows,
        y_cols=y_cols,
        half_span=half_span,
        length=length,
        height=height,
        area=length * arc,
        _offsets=offsets,
    )


def layout_area(layout: CirsLayout) -> float:
    """Surface area L * 2R * psi_M (L * H for a planar layout)."""
    p = layout.params
    if p.is_planar:
        return layout.length * layout.height
    return layout.length * 2.0 * p.radius * layout.half_span


def write_layout_csv(layout: CirsLayout, path, header_comment: str | None = None) -> None:
    with open(path, "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["m", "n", "psi_rad", "x_m", "y_m", "z_m"])
        psi = layout.psi
        for i, (m, n) in enumerate(zip(layout.m_index, layout.n_index)):
            x, y, z = layout.offsets[i]
            w.writerow([int(m), int(n)] + [f"{v:.9g}" for v in (psi[i], x, y, z)])


@dataclass(frozen=True)
class SurfacePose:
    """Placement of a surface in the global frame.

    ``normal`` is the outward surface normal at the phase center (local +x);
    local z is global vertical and local y completes a right-handed frame.
    """

    position: np.ndarray
    normal: np.ndarray

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        n = np.array([n[0], n[1], 0.0])
        norm = math.hypot(n[0], n[1])
        if norm == 0:
            raise ValueError("surface normal must have a horizontal component")
        n /= norm
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        # rows: local x (normal), local y = z cross x, local z (vertical)
        basis = np.array([n, [-n[1], n[0], 0.0], [0.0, 0.0, 1.0]])
        object.__setattr__(self, "_basis", basis)

    def basis(self) -> np.ndarray:
        return self._basis

    def local_direction(self, target) -> np.ndarray:
        """Unit vector from the phase center toward ``target``, local frame."""
        d = np.asarray(target, dtype=float) - self.position
        d = d / np.linalg.norm(d)
        return self.basis() @ d

    def local_angles(self, target) -> tuple[float, float]:
        """(azimuth, elevation) of ``target`` seen from the surface."""
        u = self.local_direction(target)
        return direction_angles(u)


def direction_angles(u) -> tuple[float, float]:
    """Inverse of :func:`unit_direction`."""
    u = np.asarray(u, dtype=float)
    theta = math.atan2(u[1], u[0])
    phi = math.acos(max(-1.0, min(1.0, u[2])))
    return theta, phi


def unit_direction(theta: float, phi: float) -> np.ndarray:
    """(cos t sin p, sin t sin p, cos p): azimuth t, elevation p from +z."""
    sp = math.sin(phi)
    return np.array([math.cos(theta) * sp, math.sin(theta) * sp, math.cos(phi)])
