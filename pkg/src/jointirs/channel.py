"""Path loss, Rician/Rayleigh channel sampling and effective channels through the IRS."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SPEED_OF_LIGHT, SimGeometry, SystemConfig, db_to_linear


def pathloss_los_db(d3d, fc_ghz):
    """3GPP LOS path loss in dB for distance in meters and carrier in GHz."""
    d3d = np.asarray(d3d, dtype=float)
    fc_ghz = np.asarray(fc_ghz, dtype=float)
    if np.any(d3d <= 0) or np.any(fc_ghz <= 0):
        raise ValueError("distance and carrier frequency must be positive")
    return 28.0 + 22.0 * np.log10(d3d) + 20.0 * np.log10(fc_ghz)


def pathloss_nlos_db(d3d, fc_ghz, hc):
    """3GPP NLOS path loss in dB; ``hc`` is the user height in meters."""
    d3d = np.asarray(d3d, dtype=float)
    fc_ghz = np.asarray(fc_ghz, dtype=float)
    if np.any(d3d <= 0) or np.any(fc_ghz <= 0):
        raise ValueError("distance and carrier frequency must be positive")
    return 13.54 + 39.08 * np.log10(d3d) + 20.0 * np.log10(fc_ghz) - 0.6 * (np.asarray(hc) - 1.5)


def amplitude_gain(pl_db):
    """Linear amplitude factor applied to channel entries for a path loss in dB."""
    return 10.0 ** (-np.asarray(pl_db, dtype=float) / 20.0)


def los_phase_entry(d3d, wavelength):
    if np.any(np.asarray(wavelength) <= 0):
        raise ValueError("wavelength must be positive")
    # reduce modulo lambda first so large distances keep full phase precision
    frac = np.mod(np.asarray(d3d, dtype=float), wavelength) / wavelength
    return np.exp(2j * np.pi * frac)


def place_users(rng: np.random.Generator, geometry: SimGeometry, num_users: int) -> np.ndarray:
    """Uniform positions over the user disc, returned as a (K, 3) array."""
    if num_users < 1:
        raise ValueError("num_users must be >= 1")
    r = geometry.user_disc_radius * np.sqrt(rng.random(num_users))
    phi = 2 * np.pi * rng.random(num_users)
    cx, cy = geometry.user_disc_center
    return np.column_stack([cx + r * np.cos(phi), cy + r * np.sin(phi),
                            np.full(num_users, float(geometry.user_height))])


@dataclass(frozen=True)
class LinkChannels:
    """Raw channels of one link direction.

    direct: (K, M) rows h_{d,k}; reflected: (K, N) rows h_{r,k}; bs_irs: (M, N) G.
    """

    direct: np.ndarray
    reflected: np.ndarray
    bs_irs: np.ndarray

    def __post_init__(self):
        k, m = self.direct.shape
        if self.reflected.shape[0] != k or self.bs_irs.shape != (m, self.reflected.shape[1]):
            raise ValueError("inconsistent channel dimensions")

    @property
    def num_users(self) -> int:
        return self.direct.shape[0]

    @property
    def num_antennas(self) -> int:
        return self.direct.shape[1]

    @property
    def num_elements(self) -> int:
        return self.reflected.shape[1]

    def effective(self, theta) -> np.ndarray:
        """(K, M) effective channels h_k = h_{d,k} + G diag(theta) h_{r,k}."""
        return self.direct + (self.reflected * theta) @ self.bs_irs.T

    def masked(self, active) -> "LinkChannels":
        """Copy with the reflections of inactive IRS elements removed."""
        active = np.asarray(active, dtype=bool)
        return LinkChannels(self.direct, np.where(active, self.reflected, 0), self.bs_irs)


@dataclass(frozen=True)
class DuplexChannelSet:
    dl: LinkChannels
    ul: LinkChannels
    dl_carrier_ghz: float
    ul_carrier_ghz: float
    duplex: str

    def __post_init__(self):
        if self.duplex == "tdd" and (self.dl is not self.ul or self.dl_carrier_ghz != self.ul_carrier_ghz):
            raise ValueError("TDD channel sets must share one set of reciprocal channels")

    def masked(self, active) -> "DuplexChannelSet":
        dl = self.dl.masked(active)
        ul = dl if self.duplex == "tdd" else self.ul.masked(active)
        return DuplexChannelSet(dl, ul, self.dl_carrier_ghz, self.ul_carrier_ghz, self.duplex)


def effective_channel(direct, bs_irs, theta, reflected):
    """Single-user effective channel direct + G diag(theta) reflected."""
    direct = np.asarray(direct)
    bs_irs = np.asarray(bs_irs)
    theta = np.asarray(theta)
    reflected = np.asarray(reflected)
    if bs_irs.shape != (direct.shape[0], reflected.shape[0]) or theta.shape != reflected.shape:
        raise ValueError("dimension mismatch in effective_channel")
    return direct + bs_irs @ (theta * reflected)


def _cn(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def _distances(a, b):
    return np.linalg.norm(a[:, None, :] - b[None, :, :], axis=-1)


def _sample_link(rng, geometry, users, fc_ghz, kappa, kappa_users):
    lam = SPEED_OF_LIGHT / (fc_ghz * 1e9)
    bs_el = geometry.bs_element_positions()
    irs_el = geometry.irs_element_positions()
    bs_c = np.asarray(geometry.bs_position, dtype=float)
    irs_c = np.asarray(geometry.irs_position, dtype=float)
    m, n, k = len(bs_el), len(irs_el), len(users)

    g_los = los_phase_entry(_distances(bs_el, irs_el), lam)
    g_amp = amplitude_gain(pathloss_los_db(np.linalg.norm(bs_c - irs_c), fc_ghz))
    bs_irs = g_amp * (np.sqrt(kappa / (1 + kappa)) * g_los
                      + np.sqrt(1 / (1 + kappa)) * _cn(rng, (m, n)))

    ku = np.asarray(kappa_users, dtype=float)[:, None]
    h_los = los_phase_entry(_distances(users, irs_el), lam)
    r_amp = amplitude_gain(pathloss_los_db(np.linalg.norm(users - irs_c, axis=1), fc_ghz))[:, None]
    reflected = r_amp * (np.sqrt(ku / (1 + ku)) * h_los + np.sqrt(1 / (1 + ku)) * _cn(rng, (k, n)))

    d_amp = amplitude_gain(pathloss_nlos_db(np.linalg.norm(users - bs_c, axis=1), fc_ghz,
                                            users[:, 2]))[:, None]
    direct = d_amp * _cn(rng, (k, m))
    return LinkChannels(direct, reflected, bs_irs)


def sample_channels(config: SystemConfig, rng: np.random.Generator, users=None,
                    kappa=None, kappa_users=None) -> DuplexChannelSet:
    """Draw one channel realization (user positions are redrawn unless given).

    ``kappa``/``kappa_users`` are linear Rician factors overriding the config.
    """
    geometry = config.geometry
    if users is None:
        users = place_users(rng, geometry, config.num_users)
    if kappa is None:
        kappa = float(db_to_linear(config.kappa_db))
    if kappa_users is None:
        kappa_users = np.full(config.num_users, float(db_to_linear(config.kappa_user_db)))
    fc_dl, fc_ul = config.carriers_ghz
    ul = _sample_link(rng, geometry, users, fc_ul, kappa, kappa_users)
    dl = ul if config.duplex == "tdd" else _sample_link(rng, geometry, users, fc_dl, kappa, kappa_users)
    return DuplexChannelSet(dl, ul, fc_dl, fc_ul, config.duplex)
