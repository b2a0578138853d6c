"""Dynamic Tx/Rx codebooks and exhaustive beam-pair selection."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, LinkParams, ula_angle, ula_steering
from .scenario import RelayCandidate, Scenario


@dataclass(frozen=True, eq=False)
class Codebooks:
    tx_beams: np.ndarray     # (C + 1, K)
    rx_beams: np.ndarray     # (C + 1, K)
    tx_angles: np.ndarray
    rx_angles: np.ndarray
    labels: tuple

    def __len__(self):
        return len(self.labels)


@dataclass(frozen=True)
class BeamDecision:
    tx_index: int
    rx_index: int
    snr_db: float
    chosen_target: object


def build_codebooks(scn: Scenario, candidates: list[RelayCandidate],
                    params: LinkParams) -> Codebooks:
    """One steering beam per target: the direct link first, then each relay.

    Tx beams point at the Rx or the relay surface; Rx beams point at the
    Tx or the relay surface (where the relayed wave arrives from).
    """
    tx_targets = [scn.p_rx] + [c.position for c in candidates]
    rx_targets = [scn.p_tx] + [c.position for c in candidates]
    tx_angles = np.array([ula_angle(scn.p_tx, t) for t in tx_targets])
    rx_angles = np.array([ula_angle(scn.p_rx, t) for t in rx_targets])
    lam, d, K = params.wavelength, params.spacing, params.antennas
    return Codebooks(
        tx_beams=np.stack([ula_steering(K, d, lam, a) for a in tx_angles]),
        rx_beams=np.stack([ula_steering(K, d, lam, a) for a in rx_angles]),
        tx_angles=tx_angles,
        rx_angles=rx_angles,
        labels=("direct",) + tuple(c.vehicle for c in candidates),
    )


def snr_linear(gain: np.ndarray, params: LinkParams) -> np.ndarray:
    """sigma_s^2 |w^H H f|^2 / (K sigma_n^2) for unnormalized beams."""
    return params.tx_power_mw * np.abs(gain) ** 2 / (params.antennas * params.noise_power_mw)


def select_beam_pair(channel: ChannelRealization, books: Codebooks,
                     params: LinkParams) -> BeamDecision:
    """Exhaustive search over all (tx, rx) pairs; the first maximum in
    (tx_index, rx_index) lexicographic order wins ties."""
    if books.tx_beams.shape[1] != channel.antennas:
        raise ValueError("codebook and channel antenna counts differ")
    table = snr_linear(channel.bilinear_table(books.rx_beams, books.tx_beams), params)
    flat = int(np.argmax(table))
    i, j = divmod(flat, table.shape[1])
    best = table[i, j]
    snr_db = 10 * math.log10(best) if best > 0 else -math.inf
    return BeamDecision(i, j, snr_db, books.labels[i] if i == j else (books.labels[i], books.labels[j]))
