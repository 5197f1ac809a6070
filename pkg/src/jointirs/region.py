"""Rate-region envelopes and the gain/loss comparison metrics.

An envelope is the upper-right boundary of the convex hull of a point set
augmented with its projections onto both axes, i.e. the region reachable
by time-sharing between operating points. It is stored as an (n, 2) array
of (DL, UL) vertices sorted by increasing DL (hence decreasing UL).
"""
from __future__ import annotations

import math

import numpy as np

METRIC_NAMES = ("max_dl_gain", "max_ul_gain", "max_dl_loss", "max_ul_loss")


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def envelope(points, rtol=1e-12) -> np.ndarray:
    """Nondominated vertices of the time-sharing region of ``points``.

    Points lying exactly on a boundary segment are kept; ``rtol`` (relative
    to the squared coordinate scale) absorbs rounding in that test.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        raise ValueError("envelope needs at least one point")
    if np.any(~np.isfinite(pts)):
        raise ValueError("envelope points must be finite")
    pts = np.clip(pts, 0.0, None)
    y_max = pts[:, 1].max()
    tol = rtol * max(pts.max(), np.finfo(float).tiny) ** 2

    # the projection (0, y_max) anchors the flat top of the boundary
    cand = sorted({(float(x), float(y)) for x, y in pts} | {(0.0, float(y_max))})
    hull = []
    for p in cand:
        while len(hull) >= 2 and _cross(hull[-2], hull[-1], p) > tol:
            hull.pop()
        hull.append(p)

    # drop everything left of the rightmost point at the top level
    top = max(i for i, (_, y) in enumerate(hull) if y == y_max)
    out = [hull[top]]
    for p in hull[top + 1:]:
        if p[1] < out[-1][1] and p[0] > out[-1][0]:
            out.append(p)
    return np.array(out)


def dl_at_ul(env, ul):
    """Largest DL rate on the envelope at UL level ``ul`` (NaN above its range)."""
    env = np.asarray(env, dtype=float)
    ul = np.asarray(ul, dtype=float)
    # reversed so the UL abscissa is increasing; below the last vertex the
    # boundary is flat at the maximum DL rate
    val = np.interp(ul, env[::-1, 1], env[::-1, 0])
    return np.where(ul > env[0, 1], np.nan, val)


def ul_at_dl(env, dl):
    """Largest UL rate on the envelope at DL level ``dl`` (NaN beyond its range)."""
    env = np.asarray(env, dtype=float)
    dl = np.asarray(dl, dtype=float)
    val = np.interp(dl, env[:, 0], env[:, 1])
    return np.where(dl > env[-1, 0], np.nan, val)


def _max_relative_gap(top, base, ref, axis, resolution=1e-4, min_reference=0.05):
    """max over matched off-axis levels of (top - base) / ref.

    ``top``, ``base`` and ``ref`` are envelopes; ``axis`` is 0 to compare DL
    rates at matched UL levels and 1 for the converse. All functions are
    piecewise linear between the union of breakpoints, so the ratio is
    monotone on each piece and only breakpoints need checking.

    Near the end of the common range the reference rate goes to zero and the
    ratio turns into amplified solver noise (two envelopes whose extremes
    differ by 0.1% show a 100% gap there). Levels where the reference rate is
    below ``min_reference`` times its peak are therefore left out, and
    differences below ``resolution`` times the axis scale count as zero.
    """
    off = 1 - axis
    hi = min(top[:, off].max(), base[:, off].max())
    if not hi >= 0:
        return math.nan
    at = dl_at_ul if axis == 0 else ul_at_dl
    inv = ul_at_dl if axis == 0 else dl_at_ul
    floor = resolution * max(top[:, axis].max(), base[:, axis].max())
    cutoff = min_reference * ref[:, axis].max()
    levels = np.concatenate([top[:, off], base[:, off], [0.0, hi], np.atleast_1d(inv(ref, cutoff))])
    levels = np.unique(levels[(levels >= 0) & (levels <= hi)])
    t, b = at(top, levels), at(base, levels)
    r = t if ref is top else b
    best = math.nan
    for tv, bv, rv in zip(t, b, r):
        if not rv >= cutoff * (1 - 1e-12) or rv <= 0:
            continue
        gap = 0.0 if abs(tv - bv) <= floor else (tv - bv) / rv
        best = gap if math.isnan(best) else max(best, gap)
    return best


def max_gain(better_env, base_env, axis, resolution=1e-4, min_reference=0.05):
    """Largest relative improvement of ``better_env`` over ``base_env`` along ``axis``."""
    better_env = np.asarray(better_env, float)
    base_env = np.asarray(base_env, float)
    return _max_relative_gap(better_env, base_env, base_env, axis, resolution, min_reference)


def max_loss(reference_env, env, axis, resolution=1e-4, min_reference=0.05):
    """Largest relative shortfall of ``env`` below ``reference_env``, clamped at zero."""
    reference_env = np.asarray(reference_env, float)
    env = np.asarray(env, float)
    val = _max_relative_gap(reference_env, env, reference_env, axis, resolution, min_reference)
    return val if math.isnan(val) else max(val, 0.0)


def gain_loss_metrics(joint_env, fixed_dl_env, fixed_ul_env, individual_env,
                      resolution=1e-4, min_reference=0.05) -> dict:
    """The four comparison metrics as fractions; NaN marks an undefined metric."""
    kw = dict(resolution=resolution, min_reference=min_reference)
    return {
        "max_dl_gain": max_gain(joint_env, fixed_ul_env, 0, **kw),
        "max_ul_gain": max_gain(joint_env, fixed_dl_env, 1, **kw),
        "max_dl_loss": max_loss(individual_env, joint_env, 0, **kw),
        "max_ul_loss": max_loss(individual_env, joint_env, 1, **kw),
    }


def _shared_levels(a, b, off):
    hi = min(a[:, off].max(), b[:, off].max())
    levels = np.concatenate([a[:, off], b[:, off], [0.0, hi]])
    return np.unique(levels[(levels >= 0) & (levels <= hi)])


def dominates(outer_env, inner_env, atol=1e-6) -> bool:
    """True if ``outer_env`` is at least ``inner_env`` on both axes over their shared ranges."""
    outer_env = np.asarray(outer_env, float)
    inner_env = np.asarray(inner_env, float)
    lv = _shared_levels(outer_env, inner_env, 1)
    ok_dl = np.all(dl_at_ul(inner_env, lv) - dl_at_ul(outer_env, lv) <= atol)
    lv = _shared_levels(outer_env, inner_env, 0)
    ok_ul = np.all(ul_at_dl(inner_env, lv) - ul_at_dl(outer_env, lv) <= atol)
    return bool(ok_dl and ok_ul)
