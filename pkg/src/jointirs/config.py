"""Scenario configuration: geometry, radio parameters and solver knobs.

Config files are flat JSON objects whose keys are the field names of
:class:`SystemConfig`. Unknown keys are rejected so that typos do not
silently fall back to defaults.
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0


class ConfigError(ValueError):
    """Raised for malformed or inconsistent scenario parameters."""


def dbm_to_watt(dbm):
    return 10.0 ** ((np.asarray(dbm, dtype=float) - 30.0) / 10.0)


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


@dataclass(frozen=True)
class SimGeometry:
    """Positions (meters) and array sizes of the BS, the IRS and the user disc.

    The BS array lies in the y-z plane and the IRS array in the x-z plane,
    both centred on their reference positions.
    """

    bs_position: tuple = (0.0, 25.0, 25.0)
    irs_position: tuple = (300.0, 0.0, 15.0)
    user_disc_center: tuple = (300.0, 25.0)
    user_disc_radius: float = 20.0
    user_height: float = 1.5
    bs_array: tuple = (4, 2)
    irs_array: tuple = (20, 10)
    element_spacing: float = SPEED_OF_LIGHT / 1.95e9 / 2

    def __post_init__(self):
        if self.num_bs_antennas <= 0 or self.num_irs_elements <= 0:
            raise ConfigError("array sizes must be positive")
        if self.user_disc_radius < 0:
            raise ConfigError("user disc radius must be nonnegative")
        if self.element_spacing <= 0:
            raise ConfigError("element spacing must be positive")

    @property
    def num_bs_antennas(self) -> int:
        return int(self.bs_array[0]) * int(self.bs_array[1])

    @property
    def num_irs_elements(self) -> int:
        return int(self.irs_array[0]) * int(self.irs_array[1])

    def bs_element_positions(self) -> np.ndarray:
        """(M, 3) element coordinates, y index fastest."""
        return _ura_positions(self.bs_position, self.bs_array, self.element_spacing, axes=(1, 2))

    def irs_element_positions(self) -> np.ndarray:
        """(N, 3) element coordinates, x index fastest."""
        return _ura_positions(self.irs_position, self.irs_array, self.element_spacing, axes=(0, 2))


def _ura_positions(center, shape, spacing, axes):
    n_a, n_b = int(shape[0]), int(shape[1])
    off_a = (np.arange(n_a) - (n_a - 1) / 2) * spacing
    off_b = (np.arange(n_b) - (n_b - 1) / 2) * spacing
    grid_b, grid_a = np.meshgrid(off_b, off_a, indexing="ij")
    pos = np.tile(np.asarray(center, dtype=float), (n_a * n_b, 1))
    pos[:, axes[0]] += grid_a.ravel()
    pos[:, axes[1]] += grid_b.ravel()
    return pos


@dataclass(frozen=True)
class SystemConfig:
    """All scenario parameters. Powers are given in dBm, noise PSD in dBm/Hz."""

    duplex: str = "tdd"
    num_users: int = 4
    bs_position: tuple = (0.0, 25.0, 25.0)
    irs_position: tuple = (300.0, 0.0, 15.0)
    user_center: tuple = (300.0, 25.0)
    user_radius: float = 20.0
    user_height: float = 1.5
    bs_array: tuple = (4, 2)
    irs_array: tuple = (20, 10)
    kappa_db: float = 6.0
    kappa_user_db: float = 8.0
    bandwidth_hz: float = 20e6
    p_dl_dbm: float = 30.0
    p_ul_dbm: float = 17.0
    fc_ul_ghz: float = 1.95
    fc_dl_ghz: float = 2.14
    nf_dl_db: float = 9.0
    nf_ul_db: float = 7.0
    noise_psd_dbm_hz: float = -170.0
    alpha: float = 0.5
    beta: float = 0.5
    weighting: str = "equal"
    beamformer: str = "wmmse"
    pf_slots: int = 100
    eps_outer: float = 1e-4
    max_outer: int = 50
    tol_inner: float = 1e-6
    max_inner: int = 100
    max_rcg: int = 500

    def __post_init__(self):
        for name in ("bs_position", "irs_position", "user_center", "bs_array", "irs_array"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if self.duplex not in ("tdd", "fdd"):
            raise ConfigError(f"duplex must be 'tdd' or 'fdd', got {self.duplex!r}")
        if self.weighting not in ("equal", "pf", "independent"):
            raise ConfigError(f"unknown weighting {self.weighting!r}")
        if self.beamformer not in ("wmmse", "zf"):
            raise ConfigError(f"unknown beamformer {self.beamformer!r}")
        if self.num_users < 1:
            raise ConfigError("num_users must be >= 1")
        if not (0.0 <= self.alpha <= 1.0 and 0.0 <= self.beta <= 1.0):
            raise ConfigError("alpha and beta must lie in [0, 1]")
        if len(self.bs_position) != 3 or len(self.irs_position) != 3 or len(self.user_center) != 2:
            raise ConfigError("positions must be 3-D (user_center 2-D)")
        if self.bandwidth_hz <= 0 or self.fc_ul_ghz <= 0 or self.fc_dl_ghz <= 0:
            raise ConfigError("bandwidth and carriers must be positive")
        if self.user_height < 1.5:
            raise ConfigError("user_height below 1.5 m is outside the path-loss model")
        if self.pf_slots < 1:
            raise ConfigError("pf_slots must be >= 1")
        self.geometry  # validates array sizes and radius

    @property
    def carriers_ghz(self) -> tuple[float, float]:
        """(downlink, uplink) carrier frequencies; TDD runs both on the UL carrier."""
        if self.duplex == "tdd":
            return self.fc_ul_ghz, self.fc_ul_ghz
        return self.fc_dl_ghz, self.fc_ul_ghz

    @property
    def geometry(self) -> SimGeometry:
        return SimGeometry(
            bs_position=self.bs_position,
            irs_position=self.irs_position,
            user_disc_center=self.user_center,
            user_disc_radius=self.user_radius,
            user_height=self.user_height,
            bs_array=self.bs_array,
            irs_array=self.irs_array,
            element_spacing=SPEED_OF_LIGHT / (self.fc_ul_ghz * 1e9) / 2,
        )

    @property
    def num_bs_antennas(self) -> int:
        return self.geometry.num_bs_antennas

    @property
    def num_irs_elements(self) -> int:
        return self.geometry.num_irs_elements

    def replace(self, **changes) -> "SystemConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return {f.name: (list(v) if isinstance(v := getattr(self, f.name), tuple) else v)
                for f in dataclasses.fields(self)}


CONFIG_KEYS = frozenset(f.name for f in dataclasses.fields(SystemConfig))


def config_from_dict(data: dict) -> SystemConfig:
    unknown = set(data) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    try:
        return SystemConfig(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> SystemConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed config file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a flat JSON object")
    return config_from_dict(data)
