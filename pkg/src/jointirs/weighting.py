"""User-weighting strategies: equal, proportional-fair and independent."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .metrics import Weights


def _normalize(x):
    x = np.asarray(x, dtype=float)
    return x / x.sum()


def equal_weights(num_users: int) -> Weights:
    if num_users < 1:
        raise ValueError("num_users must be >= 1")
    w = np.full(num_users, 1.0 / num_users)
    return Weights(w, w.copy())


def independent_weights(num_users: int, rng: np.random.Generator) -> Weights:
    """Uniform(0, 1) draws normalized to one, drawn separately for DL and UL."""
    if num_users < 1:
        raise ValueError("num_users must be >= 1")
    dl = rng.uniform(size=num_users)
    ul = rng.uniform(size=num_users)
    # uniform() can return exactly 0
    dl = np.where(dl > 0, dl, np.finfo(float).tiny)
    ul = np.where(ul > 0, ul, np.finfo(float).tiny)
    return Weights(_normalize(dl), _normalize(ul))


@dataclass
class RateHistory:
    """Cumulative delivered rate per user, column 0 for DL and column 1 for UL."""

    cumulative: np.ndarray
    slot_index: int = 1

    @classmethod
    def empty(cls, num_users: int) -> "RateHistory":
        return cls(np.zeros((num_users, 2)), 1)

    @property
    def cold(self) -> bool:
        return bool(np.any(self.cumulative <= 0))

    def record(self, dl_rates, ul_rates):
        self.cumulative = self.cumulative + np.column_stack([dl_rates, ul_rates])
        self.slot_index += 1


def pf_weights(history: RateHistory) -> Weights:
    """Weights inversely proportional to each user's cumulative rate.

    Falls back to equal weights while any user has no delivered rate yet
    (check ``history.cold``).
    """
    if history.cold:
        return equal_weights(history.cumulative.shape[0])
    inv = 1.0 / history.cumulative
    return Weights(_normalize(inv[:, 0]), _normalize(inv[:, 1]))


def pf_simulate(channels_per_slot, slots: int, run_slot, num_users: int) -> Weights:
    """Proportional-fair weights in force at slot ``slots``.

    ``channels_per_slot`` is a sequence (cycled if shorter than ``slots``)
    and ``run_slot(channels, weights)`` returns the per-user delivered DL and
    UL rates of the scheduled design for that slot.
    """
    if slots < 1:
        raise ValueError("slots must be >= 1")
    history = RateHistory.empty(num_users)
    weights = equal_weights(num_users)
    channels_per_slot = list(channels_per_slot)
    for s in range(slots - 1):
        dl_rates, ul_rates = run_slot(channels_per_slot[s % len(channels_per_slot)], weights)
        history.record(dl_rates, ul_rates)
        weights = pf_weights(history)
    return weights
