"""Monte-Carlo (alpha, beta) sweeps over the design schemes.

Every realization draws one set of user positions, channels, weights and one
random initial phase vector; all designs and grid cells of that realization
are evaluated on the same draws, so differences between designs are paired.
Realizations use independent substreams of the master seed and are reduced
in index order, so results do not depend on the number of workers.
"""
from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from .channel import sample_channels
from .config import SystemConfig
from .designs import (BcdOptions, DesignKind, bcd_joint, dl_only, individual_design,
                      initial_state_from_theta, slicing_designs, ul_only)
from .metrics import DuplexParams, sinr_dl_all, sinr_ul_all
from .region import METRIC_NAMES, envelope, gain_loss_metrics
from .weighting import equal_weights, independent_weights, pf_simulate

log = logging.getLogger(__name__)

DEFAULT_GRID = tuple(round(0.1 * i, 10) for i in range(11))

# which pair of envelopes each metric compares
METRIC_PAIRS = {
    "max_dl_gain": "joint_vs_fixed_uplink",
    "max_ul_gain": "joint_vs_fixed_downlink",
    "max_dl_loss": "joint_vs_individual",
    "max_ul_loss": "joint_vs_individual",
}

CSV_FIELDS = ("design", "alpha", "beta", "dl_rate_mean", "ul_rate_mean",
              "dl_rate_stderr", "ul_rate_stderr", "outer_iters_mean")


@dataclass(frozen=True)
class SweepSpec:
    alpha_grid: tuple = DEFAULT_GRID
    beta_grid: tuple = DEFAULT_GRID
    realizations: int = 100
    seed: int = 0
    designs: tuple = tuple(DesignKind)

    def __post_init__(self):
        object.__setattr__(self, "alpha_grid", tuple(float(a) for a in self.alpha_grid))
        object.__setattr__(self, "beta_grid", tuple(float(b) for b in self.beta_grid))
        object.__setattr__(self, "designs", tuple(DesignKind(d) for d in self.designs))
        if not self.alpha_grid or not self.beta_grid:
            raise ValueError("grids must be nonempty")
        if any(not 0 <= x <= 1 for x in self.alpha_grid + self.beta_grid):
            raise ValueError("grid values must lie in [0, 1]")
        if self.realizations < 1:
            raise ValueError("realizations must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if not self.designs:
            raise ValueError("at least one design is required")


@dataclass
class CellStats:
    dl_mean: float
    ul_mean: float
    dl_stderr: float
    ul_stderr: float
    outer_iters_mean: float
    warnings: int = 0


@dataclass
class RegionResult:
    """Sweep output. ``samples[design]`` holds the per-realization rate points
    with shape (realizations, len(alpha_grid), len(beta_grid), 2)."""

    spec: SweepSpec
    points: dict
    envelopes: dict
    metrics: dict
    samples: dict = field(default_factory=dict)

    def mean_points(self, design) -> np.ndarray:
        design = DesignKind(design)
        return np.array([[c.dl_mean, c.ul_mean] for (d, _, _), c in self.points.items() if d == design])


def realization_rng(seed: int, index: int):
    """Generators for channels, initial phases and weights of one realization."""
    ss = np.random.SeedSequence(seed, spawn_key=(index,))
    return [np.random.default_rng(s) for s in ss.spawn(3)]


def _per_user_rates(channels, params, weights, sol):
    dl = np.log2(1 + sinr_dl_all(channels.dl.effective(sol.theta_dl), sol.W, params.noise_dl))
    ul = np.log2(1 + sinr_ul_all(channels.ul.effective(sol.theta_ul), sol.V, sol.p, params.noise_ul))
    return dl, ul


def draw_weights(config: SystemConfig, channels, theta_init, rng, options):
    k = config.num_users
    if config.weighting == "equal":
        return equal_weights(k)
    if config.weighting == "independent":
        return independent_weights(k, rng)
    params = DuplexParams.from_config(config)

    def run_slot(ch, weights):
        init = initial_state_from_theta(ch, params, theta_init)
        return _per_user_rates(ch, params, weights, bcd_joint(ch, params, weights, init, options))

    # static users: the realization's channels repeat in every slot
    return pf_simulate([channels], config.pf_slots, run_slot, k)


def run_realization(config: SystemConfig, spec: SweepSpec, index: int) -> dict:
    """All cells of one realization: {design: array (n_alpha, n_beta, 4)} holding
    DL rate, UL rate, outer iterations and warning count."""
    with threadpool_limits(limits=1):
        return _run_realization(config, spec, index)


def _run_realization(config, spec, index):
    rng_ch, rng_theta, rng_w = realization_rng(spec.seed, index)
    channels = sample_channels(config, rng_ch)
    theta_init = np.exp(2j * np.pi * rng_theta.random(config.num_irs_elements))
    options = BcdOptions.from_config(config)
    weights = draw_weights(config, channels, theta_init, rng_w, options)

    na, nb = len(spec.alpha_grid), len(spec.beta_grid)
    out = {d: np.zeros((na, nb, 4)) for d in spec.designs}
    wanted = set(spec.designs)

    def record(design, ia, ib, sol):
        out[design][ia, ib] = (*sol.rate_point.as_tuple(), sol.iterations, len(sol.warnings))

    for ia, alpha in enumerate(spec.alpha_grid):
        base = DuplexParams.from_config(config, alpha=alpha, beta=0.5)
        init = initial_state_from_theta(channels, base, theta_init)
        cache = {}

        def joint(beta):
            # fixed designs coincide with joint runs at beta = 1 and beta = 0
            if beta not in cache:
                params = DuplexParams.from_config(config, alpha=alpha, beta=beta)
                cache[beta] = bcd_joint(channels, params, weights, init, options)
            return cache[beta]

        fixed = {}
        if DesignKind.FIXED_DOWNLINK in wanted:
            fixed[DesignKind.FIXED_DOWNLINK] = joint(dl_only(base).beta)
        if DesignKind.FIXED_UPLINK in wanted:
            fixed[DesignKind.FIXED_UPLINK] = joint(ul_only(base).beta)
        slicing = {}
        if wanted & {DesignKind.SLICING_WITH_INTERFERENCE, DesignKind.SLICING_WITHOUT_INTERFERENCE}:
            with_i, without_i = slicing_designs(channels, base, weights, init, options)
            slicing = {DesignKind.SLICING_WITH_INTERFERENCE: with_i,
                       DesignKind.SLICING_WITHOUT_INTERFERENCE: without_i}

        for ib, beta in enumerate(spec.beta_grid):
            params = DuplexParams.from_config(config, alpha=alpha, beta=beta)
            if wanted & {DesignKind.JOINT, DesignKind.INDIVIDUAL}:
                sol = joint(beta)
                if DesignKind.JOINT in wanted:
                    record(DesignKind.JOINT, ia, ib, sol)
                if DesignKind.INDIVIDUAL in wanted:
                    record(DesignKind.INDIVIDUAL, ia, ib,
                           individual_design(channels, params, weights, sol, options))
            for kind, sol in {**fixed, **slicing}.items():
                record(kind, ia, ib, sol)
    return out


def _stderr(x):
    return float(np.std(x, ddof=1) / math.sqrt(len(x))) if len(x) > 1 else math.nan


def aggregate(spec: SweepSpec, per_realization: list) -> RegionResult:
    points, envelopes, samples = {}, {}, {}
    for design in spec.designs:
        stack = np.stack([r[design] for r in per_realization])  # (R, na, nb, 4)
        samples[design] = stack[..., :2]
        # explicit index-order summation keeps the reduction independent of scheduling
        total = np.zeros(stack.shape[1:])
        for r in stack:
            total = total + r
        mean = total / len(stack)
        for ia, alpha in enumerate(spec.alpha_grid):
            for ib, beta in enumerate(spec.beta_grid):
                cell = stack[:, ia, ib]
                points[(design, alpha, beta)] = CellStats(
                    float(mean[ia, ib, 0]), float(mean[ia, ib, 1]),
                    _stderr(cell[:, 0]), _stderr(cell[:, 1]),
                    float(mean[ia, ib, 2]), int(cell[:, 3].sum()))
        envelopes[design] = envelope(mean[..., :2].reshape(-1, 2))

    metrics = {}
    need = (DesignKind.JOINT, DesignKind.FIXED_DOWNLINK, DesignKind.FIXED_UPLINK, DesignKind.INDIVIDUAL)
    if all(d in envelopes for d in need):
        metrics = gain_loss_metrics(*(envelopes[d] for d in need))
    return RegionResult(spec, points, envelopes, metrics, samples)


def run_sweep(spec: SweepSpec, config: SystemConfig, workers: int = 1) -> RegionResult:
    indices = range(spec.realizations)
    if workers <= 1:
        results = [run_realization(config, spec, i) for i in indices]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_realization, [config] * len(indices), [spec] * len(indices), indices))
    for design in spec.designs:
        n_warn = sum(int(r[design][..., 3].sum()) for r in results)
        if n_warn:
            log.warning("%s: %d cell runs reported warnings", design.value, n_warn)
    return aggregate(spec, results)


def fmt(x) -> str:
    return format(float(x), ".12g")


def write_outputs(result: RegionResult, config: SystemConfig, out_dir) -> list:
    """Write one CSV per design, envelope.csv, metrics.csv and summary.json."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for design in result.spec.designs:
        path = out_dir / f"{design.value}.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_FIELDS)
            for (d, alpha, beta), c in result.points.items():
                if d == design:
                    w.writerow([d.value, fmt(alpha), fmt(beta), fmt(c.dl_mean), fmt(c.ul_mean),
                                fmt(c.dl_stderr), fmt(c.ul_stderr), fmt(c.outer_iters_mean)])
        written.append(path)

    path = out_dir / "envelope.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("design", "dl", "ul"))
        for design, env in result.envelopes.items():
            for dl, ul in env:
                w.writerow([design.value, fmt(dl), fmt(ul)])
    written.append(path)

    path = out_dir / "metrics.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("design_pair", "metric", "value"))
        for name in METRIC_NAMES:
            if name in result.metrics:
                w.writerow([METRIC_PAIRS[name], name, fmt(result.metrics[name])])
    written.append(path)

    summary = {
        "config": config.to_dict(),
        "alpha_grid": list(result.spec.alpha_grid),
        "beta_grid": list(result.spec.beta_grid),
        "realizations": result.spec.realizations,
        "seed": result.spec.seed,
        "designs": [d.value for d in result.spec.designs],
        "metrics": {k: (None if math.isnan(v) else v) for k, v in result.metrics.items()},
        "cells_with_warnings": [
            {"design": d.value, "alpha": a, "beta": b, "count": c.warnings}
            for (d, a, b), c in result.points.items() if c.warnings
        ],
    }
    path = out_dir / "summary.json"
    path.write_text(json.dumps(summary, indent=2, allow_nan=True) + "\n")
    written.append(path)
    return written
