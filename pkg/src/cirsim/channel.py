"""Direct and surface-cascaded MIMO channels between vehicle ULAs.

Every channel term is rank one, alpha * a_rx a_tx^H, and is stored as the
triple (alpha, a_tx, a_rx); the K x K matrix is only built on request.
The ULAs lie along the global x axis (across the road), so a steering
angle is arcsin of the x component of the unit direction.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .em_field import cascaded_gain
from .geometry import CirsLayout, SurfacePose, direction_angles, wavelength_of
from .phase import PhaseProfile


class NearFieldError(ValueError):
    """A hop is shorter than the far-field guard distance."""


@dataclass(frozen=True)
class LinkParams:
    frequency: float = 26e9
    tx_power_dbm: float = 20.0
    noise_power_dbm: float = -88.0
    antennas: int = 8
    antenna_spacing: float | None = None  # None: half wavelength
    element_gain_model: str = "isotropic"
    blocker_loss_db: float = 20.0
    blocker_loss_cap_db: float | None = None
    far_field_min: float = 5.0
    near_field_policy: str = "raise"

    def __post_init__(self):
        if self.antennas < 1:
            raise ValueError("antennas must be >= 1")
        if self.frequency <= 0:
            raise ValueError("frequency must be positive")
        if not (math.isfinite(self.tx_power_dbm) and math.isfinite(self.noise_power_dbm)):
            raise ValueError("powers must be finite")
        if self.blocker_loss_db < 0:
            raise ValueError("blocker_loss_db must be >= 0")
        if self.blocker_loss_cap_db is not None and self.blocker_loss_cap_db < 0:
            raise ValueError("blocker_loss_cap_db must be >= 0")
        if self.element_gain_model not in ("isotropic", "cosine"):
            raise ValueError(f"unknown element_gain_model {self.element_gain_model!r}")
        if self.near_field_policy not in ("raise", "warn"):
            raise ValueError(f"unknown near_field_policy {self.near_field_policy!r}")
        if self.antenna_spacing is not None and self.antenna_spacing <= 0:
            raise ValueError("antenna_spacing must be positive")

    @property
    def wavelength(self) -> float:
        return wavelength_of(self.frequency)

    @property
    def spacing(self) -> float:
        return self.antenna_spacing if self.antenna_spacing is not None else self.wavelength / 2

    @property
    def tx_power_mw(self) -> float:
        return 10 ** (self.tx_power_dbm / 10)

    @property
    def noise_power_mw(self) -> float:
        return 10 ** (self.noise_power_dbm / 10)

    def blockage_amplitude(self, blockers: int) -> float:
        loss = blockers * self.blocker_loss_db
        if self.blocker_loss_cap_db is not None:
            loss = min(loss, self.blocker_loss_cap_db)
        return 10 ** (-loss / 20)


def fspl_amplitude(distance: float, wavelength: float) -> float:
    if distance <= 0:
        raise ValueError("distance must be positive")
    return wavelength / (4.0 * math.pi * distance)


def ula_steering(K: int, spacing: float, wavelength: float, angle: float) -> np.ndarray:
    k = np.arange(K)
    return np.exp(-1j * 2.0 * np.pi / wavelength * k * spacing * math.sin(angle))


def ula_angle(p_from, p_to) -> float:
    """Steering angle from the ULA broadside toward ``p_to``."""
    d = np.asarray(p_to, dtype=float) - np.asarray(p_from, dtype=float)
    return math.asin(max(-1.0, min(1.0, d[0] / np.linalg.norm(d))))


def element_gain(model: str, angle: float) -> float:
    if model == "cosine":
        return max(math.cos(angle), 0.0)
    return 1.0


@dataclass(frozen=True, eq=False)
class PathTerm:
    """One rank-one channel contribution alpha * a_rx a_tx^H."""

    alpha: complex
    a_tx: np.ndarray
    a_rx: np.ndarray
    aod: float = 0.0
    aoa: float = 0.0
    label: str = "direct"
    blockers: tuple[int, ...] = ()
    surface_gain: complex | None = None

    @property
    def antennas(self) -> int:
        return self.a_tx.size

    def matrix(self) -> np.ndarray:
        return self.alpha * np.outer(self.a_rx, self.a_tx.conj())

    def bilinear(self, w: np.ndarray, f: np.ndarray) -> complex:
        return complex(self.alpha * (np.vdot(w, self.a_rx) * np.vdot(self.a_tx, f)))


def _random_phase(rng) -> complex:
    return complex(np.exp(1j * rng.uniform(0.0, 2.0 * np.pi)))


def direct_channel(p_tx, p_rx, blockers: int, params: LinkParams, rng) -> PathTerm:
    p_tx = np.asarray(p_tx, dtype=float)
    p_rx = np.asarray(p_rx, dtype=float)
    dist = float(np.linalg.norm(p_rx - p_tx))
    if dist == 0:
        raise ValueError("Tx and Rx positions coincide")
    lam = params.wavelength
    aod = ula_angle(p_tx, p_rx)
    aoa = ula_angle(p_rx, p_tx)
    amp = fspl_amplitude(dist, lam) * params.blockage_amplitude(blockers)
    amp *= element_gain(params.element_gain_model, aod) * element_gain(params.element_gain_model, aoa)
    return PathTerm(
        alpha=amp * _random_phase(rng),
        a_tx=ula_steering(params.antennas, params.spacing, lam, aod),
        a_rx=ula_steering(params.antennas, params.spacing, lam, aoa),
        aod=aod, aoa=aoa, label="direct", blockers=(blockers,),
    )


def element_factor(layout: CirsLayout) -> float:
    """Per-element bistatic aperture factor 4 pi d_m d_n / lambda^2."""
    p = layout.params
    return 4.0 * math.pi * p.row_spacing * p.col_spacing / p.wavelength ** 2


def cascaded_channel(p_tx, p_rx, pose: SurfacePose, layout: CirsLayout,
                     profile: PhaseProfile, blockers_in: int, blockers_out: int,
                     params: LinkParams, rng, label: str = "relay") -> PathTerm:
    """Tx -> surface -> Rx contribution through one relaying surface."""
    p_tx = np.asarray(p_tx, dtype=float)
    p_rx = np.asarray(p_rx, dtype=float)
    r1 = float(np.linalg.norm(pose.position - p_tx))
    r2 = float(np.linalg.norm(p_rx - pose.position))
    if min(r1, r2) < params.far_field_min:
        msg = f"hop length {min(r1, r2):.3f} m below far-field guard {params.far_field_min} m"
        if params.near_field_policy == "raise":
            raise NearFieldError(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)

    lam = params.wavelength
    u_in = pose.local_direction(p_tx)
    u_out = pose.local_direction(p_rx)
    if u_in[0] <= 0 or u_out[0] <= 0:
        # an endpoint behind the surface sees no reflection
        g = 0j
    else:
        g = cascaded_gain(layout, profile, direction_angles(u_in), direction_angles(u_out))

    aod = ula_angle(p_tx, pose.position)
    aoa = ula_angle(p_rx, pose.position)
    amp = (fspl_amplitude(r1, lam) * fspl_amplitude(r2, lam) * element_factor(layout)
           * params.blockage_amplitude(blockers_in) * params.blockage_amplitude(blockers_out))
    amp *= element_gain(params.element_gain_model, aod) * element_gain(params.element_gain_model, aoa)
    return PathTerm(
        alpha=amp * g * _random_phase(rng),
        a_tx=ula_steering(params.antennas, params.spacing, lam, aod),
        a_rx=ula_steering(params.antennas, params.spacing, lam, aoa),
        aod=aod, aoa=aoa, label=label, blockers=(blockers_in, blockers_out),
        surface_gain=g,
    )


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    direct: PathTerm
    cascaded: tuple[PathTerm, ...] = field(default_factory=tuple)

    @property
    def terms(self) -> tuple[PathTerm, ...]:
        return (self.direct,) + self.cascaded

    @property
    def antennas(self) -> int:
        return self.direct.antennas

    def bilinear(self, w: np.ndarray, f: np.ndarray) -> complex:
        """w^H H f without forming H."""
        return sum((t.bilinear(w, f) for t in self.terms), 0j)

    def bilinear_table(self, W: np.ndarray, F: np.ndarray) -> np.ndarray:
        """All pairs at once: entry [i, j] = W[j]^H H F[i] (tx-major)."""
        A_tx = np.stack([t.a_tx for t in self.terms])
        A_rx = np.stack([t.a_rx for t in self.terms])
        alpha = np.array([t.alpha for t in self.terms])
        tx_part = A_tx.conj() @ F.T          # (terms, tx beams)
        rx_part = W.conj() @ A_rx.T          # (rx beams, terms)
        return (tx_part.T * alpha) @ rx_part.T

    def matrix(self) -> np.ndarray:
        return sum((t.matrix() for t in self.terms), np.zeros((self.antennas,) * 2, complex))


def composite_channel(direct: PathTerm, cascaded_list=()) -> ChannelRealization:
    cascaded = tuple(cascaded_list)
    for t in cascaded:
        if t.antennas != direct.antennas:
            raise ValueError(f"antenna count mismatch: {t.antennas} vs {direct.antennas}")
    return ChannelRealization(direct, cascaded)
