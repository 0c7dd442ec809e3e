"""Gap eigenvalues, the Dirac-Coulomb oracle and edge-clustering statistics."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import List, Optional

import numpy as np
from scipy.optimize import brentq

from .channel import ChannelSpec, bv_decay
from .errors import ConvergenceError, EigenvalueNotFoundError, SupercriticalError
from .prufer import count_from_mismatch, mismatch
from .spacetime import SpacetimeProfile

GAP_MARGIN = 1e-6
BRACKET_TOL = 1e-9


def coulomb_oracle(g, kappa, n_r):
    """Sommerfeld fine-structure level for coupling ``g``, channel ``kappa``
    and radial index ``n_r`` (``n_r >= 1`` when ``kappa > 0``)."""
    if kappa == 0:
        raise ValueError("kappa must be nonzero")
    if abs(g) >= abs(kappa):
        raise SupercriticalError(f"g = {g} >= |kappa| = {abs(kappa)}: no closed-form levels")
    if n_r < (1 if kappa > 0 else 0):
        raise ValueError("n_r must be >= 1 for kappa > 0 and >= 0 for kappa < 0")
    if g == 0:
        return 1.0
    return (1.0 + (g / (n_r + math.sqrt(kappa * kappa - g * g))) ** 2) ** -0.5


def oracle_for_index(g, kappa, index):
    """Oracle level of the ``index``-th eigenvalue (counted from 0) in a channel."""
    return coulomb_oracle(g, kappa, index + (1 if kappa > 0 else 0))


def principal_number(kappa, index):
    return index + abs(kappa) + (1 if kappa > 0 else 0)


@dataclass
class EigenvalueRecord:
    kappa: int
    index: int
    energy: float
    residual: float
    node_count: int
    r_max_used: float
    tolerance_flags: List[str] = field(default_factory=list)

    def as_dict(self):
        return asdict(self)


class _Counter:
    """Memoized mismatch / count evaluation for one (profile, channel)."""

    def __init__(self, profile, channel, r_max=None, rtol=None):
        self.profile = profile
        self.channel = channel
        self.kw = {"r_max": r_max}
        if rtol is not None:
            self.kw["rtol"] = rtol
            self.kw["atol"] = rtol * 1e-2
        self.cache = {}

    def delta(self, lam):
        d = self.cache.get(lam)
        if d is None:
            d = mismatch(self.profile, self.channel, lam, **self.kw)
            self.cache[lam] = d
        return d

    def count(self, lam):
        return count_from_mismatch(self.delta(lam))


def _bracket_index(counter, index, lo, hi):
    """Bisect on counts until N(lo) = index and N(hi) = index + 1."""
    n_lo, n_hi = counter.count(lo), counter.count(hi)
    if n_hi <= index:
        raise EigenvalueNotFoundError(
            f"only {n_hi} eigenvalue(s) below {hi!r}; index {index} not found", count=n_hi)
    if n_lo > index:
        raise EigenvalueNotFoundError(f"index {index} lies below {lo!r}", count=n_lo)
    for _ in range(200):
        if n_lo == index and n_hi == index + 1:
            return lo, hi
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        n_mid = counter.count(mid)
        if n_mid < n_lo or n_mid > n_hi:
            raise ConvergenceError(f"non-monotone eigenvalue count at lambda = {mid!r}")
        if n_mid <= index:
            lo, n_lo = mid, n_mid
        else:
            hi, n_hi = mid, n_mid
    raise ConvergenceError(f"could not isolate eigenvalue {index} in [{lo!r}, {hi!r}]")


def _refine(counter, index, lo, hi):
    target = (index + 1) * math.pi

    def h(lam):
        return counter.delta(lam) - target

    energy = brentq(h, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200)
    # verify a sign-change bracket of width <= BRACKET_TOL around the root
    flags = []
    half = 0.25 * BRACKET_TOL
    while True:
        a, b = max(lo, energy - half), min(hi, energy + half)
        if h(a) < 0 <= h(b) or a == lo or b == hi:
            break
        half *= 2
        if 2 * half > BRACKET_TOL:
            flags.append("bracket_unverified")
            break
    return energy, b - a, flags


def find_eigenvalue(profile: SpacetimeProfile, channel: ChannelSpec, index, window=None,
                    r_max=None, rtol=None) -> EigenvalueRecord:
    """Locate the ``index``-th eigenvalue of a channel.

    Counts bracket the level, then Brent's method on the continuous mismatch
    pins it down; the returned ``residual`` is the width of a verified
    sign-change bracket around the energy.
    """
    if index < 0:
        raise ValueError("index must be >= 0")
    lo, hi = window if window is not None else (-1.0 + GAP_MARGIN, 1.0 - GAP_MARGIN)
    counter = _Counter(profile, channel, r_max, rtol)
    return _find(counter, index, lo, hi, profile, r_max)


def _find(counter, index, lo, hi, profile, r_max):
    lo, hi = _bracket_index(counter, index, lo, hi)
    energy, width, flags = _refine(counter, index, lo, hi)
    g = profile.params.g
    r_used = r_max or profile.r_max
    if g != 0 and r_used < 50.0 * (index + 2) ** 2 / abs(g):
        flags.append("r_max_below_recommended")
    if width > BRACKET_TOL:
        flags.append("bracket_wide")
    node = counter.count(lo)
    if not -1.0 < energy < 1.0:
        raise ConvergenceError(f"eigenvalue {energy!r} outside the gap")
    return EigenvalueRecord(counter.channel.kappa, int(index), float(energy), float(width),
                            int(node), float(r_used), flags)


@dataclass
class SpectrumScanResult:
    kappa: int
    window: tuple
    records: List[EigenvalueRecord]
    truncated: bool
    count_in_window: int

    @property
    def energies(self):
        return np.array([r.energy for r in self.records])

    @property
    def gap_edge_distances(self):
        return 1.0 - self.energies

    @property
    def successive_gaps(self):
        return np.diff(self.energies)

    @property
    def lower_edge_clear_margin(self):
        return float(self.energies.min() + 1.0) if self.records else math.inf

    @property
    def principal_numbers(self):
        return np.array([principal_number(r.kappa, r.index) for r in self.records])

    def rydberg_fit(self, n_min=None):
        return rydberg_fit(self, n_min)

    def as_dict(self):
        return {"kappa": self.kappa, "window": list(self.window),
                "truncated": self.truncated, "count_in_window": self.count_in_window,
                "records": [r.as_dict() for r in self.records]}


def rydberg_fit(result: SpectrumScanResult, n_min=None):
    """Fit the top states to hydrogen-like laws in the principal number n.

    ``pure``: least squares ``1 - E ~ c / n^2``.
    ``defect``: ``(1 - E)^(-1/2) = (n - delta) / sqrt(c)``, linear in n,
    which absorbs a constant quantum defect.
    """
    n = result.principal_numbers.astype(float)
    d = result.gap_edge_distances
    if n_min is None:
        n_min = n[len(n) // 2] if len(n) else 0
    sel = n >= n_min
    n, d = n[sel], d[sel]
    if n.size < 2:
        return {"n_min": float(n_min), "states": int(n.size)}
    w = 1.0 / n ** 2
    c_pure = float(np.dot(w, d) / np.dot(w, w))
    rel = float(np.max(np.abs(c_pure * w - d) / d))
    slope, icpt = np.polyfit(n, d ** -0.5, 1)
    c_def = float(slope ** -2)
    defect = float(-icpt / slope)
    rel_def = float(np.max(np.abs(c_def / (n - defect) ** 2 - d) / d))
    return {"n_min": float(n_min), "states": int(n.size),
            "coefficient": c_pure, "relative_residual": rel,
            "defect_coefficient": c_def, "quantum_defect": defect,
            "defect_relative_residual": rel_def}


def scan_spectrum(profile: SpacetimeProfile, channel: ChannelSpec, window, max_count=50,
                  threads=1, r_max=None, rtol=None) -> SpectrumScanResult:
    """All eigenvalues of one channel inside ``window`` (at most ``max_count``).

    The upper end is clipped to ``1 - 1e-6``; a clipped or capped scan is
    marked ``truncated``.
    """
    lo, hi = window
    if not -1.0 < lo < hi < 1.0 and not (-1.0 < lo < hi <= 1.0):
        raise ValueError(f"window {window!r} is not inside the gap (-1, 1)")
    if lo <= -1.0:
        raise ValueError(f"window {window!r} is not inside the gap (-1, 1)")
    truncated = False
    if hi > 1.0 - GAP_MARGIN:
        hi = 1.0 - GAP_MARGIN
        truncated = True
    counter = _Counter(profile, channel, r_max, rtol)
    n_lo, n_hi = counter.count(lo), counter.count(hi)
    if n_hi < n_lo:
        raise ConvergenceError("eigenvalue count decreases across the window")
    indices = list(range(n_lo, n_hi))
    if len(indices) > max_count:
        indices = indices[:max_count]
        truncated = True

    def job(k):
        # a private counter per job keeps every search independent of scheduling
        return _find(_Counter(profile, channel, r_max, rtol), k, lo, hi, profile, r_max)

    if threads > 1 and len(indices) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(job, indices))
    else:
        records = [job(k) for k in indices]
    return SpectrumScanResult(channel.kappa, (float(window[0]), float(window[1])), records,
                              truncated, n_hi - n_lo)


def clustering_conditions(profile: SpacetimeProfile, channel: ChannelSpec,
                          near_zero_fraction=0.1):
    """Evaluate the three hypotheses of the edge-clustering criterion.

    With ``p = -kappa f / r``, ``V = v + (1 - f)`` and gap half-width 1:

    (i) ``x |p|`` and ``x^2 |p'|`` bounded at large x,
    (ii) ``V > 0`` with ``x^2 V`` increasing without bound,
    (iii) ``|p| >= |V| + 1`` in a neighbourhood of the center.

    For (iii) the largest radius ``r*`` below which the inequality holds is
    located on ``[r_min, near_zero_fraction * ell_hat]``; the hypothesis only
    needs some ``r* > 0``.
    """
    def p_and_V(r):
        f = np.atleast_1d(profile.f(r))
        return -channel.kappa * f / r, np.atleast_1d(profile.v(r)) + 1.0 - f

    x_big = np.logspace(1, math.log10(min(1e4, 0.5 * profile.x_max)), 25)
    bv = bv_decay(profile, channel, x_big)
    r_big = np.atleast_1d(profile.r_of_x(x_big))
    p_big, V_big = p_and_V(r_big)
    xp = x_big * np.abs(p_big)
    x2V = x_big ** 2 * V_big
    cond_i = bool(np.all(np.isfinite(xp)) and np.all(np.isfinite(bv["x2_dp"])))
    cond_ii = bool(np.all(V_big > 0) and np.all(np.diff(x2V) > 0))
    ell = profile.params.ell_hat if profile.params.ell_hat > 0 else 1.0
    r_small = np.logspace(math.log10(profile.r_min), math.log10(near_zero_fraction * ell), 400)
    p_s, V_s = p_and_V(r_small)
    margin_small = np.abs(p_s) - np.abs(V_s) - 1.0
    holds = margin_small > 0
    whole = bool(np.all(holds))
    r_star = float(r_small[-1]) if whole else float(r_small[np.argmin(holds)])
    cond_iii = bool(holds[0] and r_star > r_small[0])
    failed = [name for name, ok in (("i", cond_i), ("ii", cond_ii), ("iii", cond_iii)) if not ok]
    return {"i_p_is_O_1_over_x": cond_i, "sup_x_abs_p": float(xp.max()),
            "sup_x2_dp": bv["sup_dp"], "sup_x2_dv": bv["sup_dv"], "sup_x2_df": bv["sup_df"],
            "ii_x2V_unbounded": cond_ii, "x2V_last": float(x2V[-1]),
            "iii_center_domination": cond_iii,
            "iii_holds_below": r_star,
            "iii_checked_up_to": float(r_small[-1]),
            "iii_holds_on_checked_range": whole,
            "iii_min_margin": float(margin_small.min()),
            "failed_conditions": failed}


def cluster_report(result: SpectrumScanResult, profile: SpacetimeProfile,
                   lower_scan: Optional[SpectrumScanResult] = None, lower_margin=0.05,
                   n_min=None, near_zero_fraction=0.1):
    """Verdict on accumulation at the upper gap edge and clearance of the lower.

    The upper edge counts as an accumulation point when ``1 - E_n`` decreases
    strictly and the top states follow a ``1/n^2`` law (fit reported).  The
    lower edge is clear when ``lower_scan`` found nothing, or else when the
    lowest state sits more than ``lower_margin`` above -1.  The hypotheses
    of the clustering criterion come from :func:`clustering_conditions`.
    """
    if len(result.records) < 5:
        raise ValueError("cluster_report needs at least 5 records")
    ch = ChannelSpec(result.kappa)
    d = result.gap_edge_distances
    fit = rydberg_fit(result, n_min)
    upper = bool(np.all(np.diff(d) < 0) and np.all(result.successive_gaps > 0))
    if lower_scan is not None:
        margin = lower_scan.lower_edge_clear_margin if lower_scan.records else math.inf
        lower_clear = len(lower_scan.records) == 0
    else:
        margin = result.lower_edge_clear_margin
        lower_clear = margin > lower_margin
    cond = clustering_conditions(profile, ch, near_zero_fraction)
    failed = cond.pop("failed_conditions")
    return {"upper_edge_accumulation": upper and fit.get("states", 0) >= 2,
            "gap_edge_distances_decreasing": upper,
            "rydberg_fit": fit,
            "lower_edge_clear": bool(lower_clear),
            "lower_edge_margin": float(margin),
            "truncated": result.truncated,
            "conditions": cond,
            "failed_conditions": failed}


def compare_with_coulomb(result: SpectrumScanResult, g):
    """Per-state deviation from the Sommerfeld level with the same (kappa, index)."""
    rows = []
    for rec in result.records:
        try:
            ref = oracle_for_index(g, rec.kappa, rec.index)
        except SupercriticalError:
            ref = math.nan
        rows.append({"kappa": rec.kappa, "index": rec.index, "energy": rec.energy,
                     "oracle": ref, "deviation": rec.energy - ref})
    dev = np.abs([r["deviation"] for r in rows])
    shrinking = bool(len(dev) < 2 or np.all(np.diff(dev) < 0))
    return {"rows": rows, "max_abs_deviation": float(dev.max()) if len(dev) else 0.0,
            "deviation_shrinks_with_index": shrinking}
