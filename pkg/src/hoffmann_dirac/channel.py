"""Per-channel radial Dirac coefficients.

In the tortoise-type coordinate ``x`` (``dx/dr = f^-2``) each spin-orbit
channel ``kappa`` reduces to a two-component first-order system whose
coefficient matrix is

    P(x) = [[f - v, f kappa / r],
            [f kappa / r, -f - v]]

in Compton units.  As ``x -> inf`` it tends to ``P0 = diag(1, -1)``, whose
eigenvalues bound the spectral gap.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .spacetime import SpacetimeProfile


@dataclass(frozen=True)
class ChannelSpec:
    kappa: int

    def __post_init__(self):
        if int(self.kappa) != self.kappa or self.kappa == 0:
            raise ValueError(f"kappa must be a nonzero integer, got {self.kappa!r}")
        object.__setattr__(self, "kappa", int(self.kappa))

    @property
    def j(self):
        return abs(self.kappa) - 0.5

    @property
    def degeneracy(self):
        return int(2 * self.j + 1)

    @property
    def sign(self):
        return 1 if self.kappa > 0 else -1


@dataclass(frozen=True)
class PotentialMatrixSample:
    x_hat: float
    P11: float
    P12: float
    P22: float

    def as_array(self):
        return np.array([[self.P11, self.P12], [self.P12, self.P22]])


def asymptotic_matrix():
    """The limit of ``P`` at infinity, ``diag(1, -1)``."""
    return PotentialMatrixSample(math.inf, 1.0, 0.0, -1.0)


def _entries_at_r(profile, kappa, r):
    f = profile.f(r)
    v = profile.v(r)
    return f - v, f * kappa / r, -f - v


def potential_matrix(profile: SpacetimeProfile, channel: ChannelSpec, x_hat):
    r = profile.r_of_x(x_hat)
    P11, P12, P22 = _entries_at_r(profile, channel.kappa, r)
    return PotentialMatrixSample(float(x_hat), float(P11), float(P12), float(P22))


def potential_matrix_at_r(profile: SpacetimeProfile, channel: ChannelSpec, r_hat):
    P11, P12, P22 = _entries_at_r(profile, channel.kappa, r_hat)
    return PotentialMatrixSample(float(profile.x_of_r(r_hat)), float(P11), float(P12), float(P22))


def perturbation_split(profile: SpacetimeProfile, channel: ChannelSpec, x_hat):
    """Split ``P`` into the free operator (mass term and ``kappa/x``) and the
    three scalar remainder pieces.

    Returns
    -------
    dict
        ``offdiag = kappa (f/r - 1/x)``, ``mass_defect = f - 1`` and
        ``electric = -v``; ``P11 = 1 + mass_defect + electric``,
        ``P22 = -1 - mass_defect + electric`` and
        ``P12 = kappa/x + offdiag``.
    """
    if not x_hat > 0:
        raise ValueError("x_hat must be positive")
    r = profile.r_of_x(x_hat)
    f = profile.f(r)
    v = profile.v(r)
    k = channel.kappa
    return {"x_hat": float(x_hat), "free_offdiag": k / x_hat,
            "offdiag": k * (f / r - 1.0 / x_hat), "mass_defect": f - 1.0,
            "electric": -v}


def reassemble(split):
    k_over_x = split["free_offdiag"]
    P11 = 1.0 + split["mass_defect"] + split["electric"]
    P22 = -1.0 - split["mass_defect"] + split["electric"]
    return PotentialMatrixSample(split["x_hat"], P11, k_over_x + split["offdiag"], P22)


def _deviation_density(profile, kappa, t, remainder):
    """max-abs entry of P - P0 (or of the remainder V), times dx/dt, at r = exp(t)."""
    r = math.exp(t)
    f = profile.f(r)
    v = profile.v(r)
    off = f * kappa / r
    if remainder:
        off -= kappa / float(profile.x_of_r(r))
    dev = max(abs(f - 1.0 - v), abs(off), abs(1.0 - f - v))
    return dev * r / (f * f)


def cesaro_decay(profile: SpacetimeProfile, channel: ChannelSpec, d, x_values, part="full"):
    """Cesaro means ``x^-1 int_d^x |P - P0| dt`` (entrywise max-abs norm).

    With ``part="remainder"`` the free ``kappa/x`` term is subtracted first,
    so only the perturbation ``V`` is averaged (identically 0 for ``g = 0``
    in flat space).
    """
    if part not in ("full", "remainder"):
        raise ValueError(f"part must be 'full' or 'remainder', got {part!r}")
    remainder = part == "remainder"
    x_values = np.asarray(x_values, dtype=float)
    if d < 1:
        raise ValueError("start point d must be >= 1")
    if np.any(np.diff(x_values) <= 0) or np.any(x_values <= d):
        raise ValueError("x_values must be increasing and above d")
    t_pts = np.log(np.concatenate(([profile.r_of_x(d)], profile.r_of_x(x_values))))
    total = 0.0
    means = np.empty(x_values.size)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        for i in range(x_values.size):
            a, b = t_pts[i], t_pts[i + 1]
            # one decade per piece keeps quad well-conditioned on long ranges
            edges = np.linspace(a, b, max(2, int(math.ceil((b - a) / math.log(10))) + 1))
            for lo, hi in zip(edges[:-1], edges[1:]):
                total += quad(lambda t: _deviation_density(profile, channel.kappa, t, remainder),
                              lo, hi, epsabs=1e-14, epsrel=1e-10, limit=200)[0]
            means[i] = total / x_values[i]
    return means


def bv_decay(profile: SpacetimeProfile, channel: ChannelSpec, x_values):
    """Derivatives in ``x`` of ``f/r``, ``v`` and ``f`` at the given points.

    Returns a dict of arrays keyed ``x_hat``, ``d_f_over_r``, ``dv``, ``df``
    plus the ``x^2``-scaled magnitudes ``x2_*`` and their maxima ``sup_*``.
    """
    x = np.asarray(x_values, dtype=float)
    if np.any(x < 1):
        raise ValueError("x_values must be >= 1")
    r = np.atleast_1d(profile.r_of_x(x))
    f = np.atleast_1d(profile.f(r))
    f2 = f * f
    dfdr = np.atleast_1d(profile.df_dr(r))
    dvdr = np.atleast_1d(profile.dv_dr(r))
    d_for = f2 * (dfdr / r - f / r ** 2)
    dv = f2 * dvdr
    df = f2 * dfdr
    out = {"x_hat": x, "d_f_over_r": d_for, "dp": channel.kappa * d_for, "dv": dv, "df": df}
    for key in ("d_f_over_r", "dp", "dv", "df"):
        scaled = x * x * np.abs(out[key])
        out["x2_" + key] = scaled
        out["sup_" + key] = float(np.max(scaled))
    return out


def write_matrix_csv(samples, path):
    rows = ["x_hat,P11,P12,P22"]
    for s in samples:
        rows.append(",".join(format(float(q), ".17g") for q in (s.x_hat, s.P11, s.P12, s.P22)))
    Path(path).write_text("\n".join(rows) + "\n")
