"""Prufer-angle shooting for one Dirac channel.

Write a solution of the channel system as ``u = R (cos theta, -sin theta)``.
Substituting into

    u1' = -p u1 + (lam - P22) u2,    u2' = -(lam - P11) u1 + p u2

(prime = d/dx, ``p = P12 = f kappa / r``) gives

    theta'  = (lam - P11) cos^2 + 2 P12 sin cos + (lam - P22) sin^2
    (ln R)' = -p cos(2 theta) - f sin(2 theta)

The quadratic form in ``theta'`` is ``(lam - P)`` evaluated on the unit
vector ``(cos, sin)``, so ``theta`` at any fixed point is nondecreasing in
``lam``.  Integration runs in ``t = ln r`` with ``dx = r dt / f^2``.

Eigenvalues are counted by the mismatch ``delta = theta_L - theta_R`` at a
matching point.  The right start angle is taken on the half-turn just below
the nominal left angle, so that ``delta`` lies in ``(0, pi)`` when no
eigenvalue is below ``lam`` and ``N(lam) = floor(delta / pi)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernel
from .channel import ChannelSpec, PotentialMatrixSample
from .errors import NotInGapError, ProbeInconclusiveError, StiffnessError
from .spacetime import SpacetimeProfile

RTOL = 1e-10
ATOL = 1e-12
MAX_STEPS = 10_000_000


@dataclass
class PruferTrajectory:
    r_hat: np.ndarray
    x_hat: np.ndarray
    theta: np.ndarray
    log_amplitude: np.ndarray
    lam: float
    kappa: int
    direction: str  # "left_to_right" or "right_to_left"

    @property
    def theta_end(self):
        return float(self.theta[-1])

    def to_csv(self, path):
        rows = ["r_hat,x_hat,theta,log_amplitude"]
        for q in zip(self.r_hat, self.x_hat, self.theta, self.log_amplitude):
            rows.append(",".join(format(float(a), ".17g") for a in q))
        Path(path).write_text("\n".join(rows) + "\n")


def prufer_rhs(P: PotentialMatrixSample, lam, theta):
    """``d theta / dx`` for coefficient matrix ``P``."""
    c, s = math.cos(theta), math.sin(theta)
    return (lam - P.P11) * c * c + 2.0 * P.P12 * s * c + (lam - P.P22) * s * s


def nominal_left_angle(kappa):
    if kappa == 0:
        raise ValueError("kappa must be nonzero")
    return 0.0 if kappa < 0 else 0.5 * math.pi


def left_boundary_angle(channel: ChannelSpec, profile: SpacetimeProfile = None):
    """Start angle of the solution regular at the center.

    For a bounded potential the regular solution near 0 is ``(1, 0)`` for
    ``kappa < 0`` and ``(0, 1)`` for ``kappa > 0``.  A point-charge potential
    ``g0/r`` (flat Maxwell) tilts the regular direction to the Frobenius
    solution ``r^gamma`` with ``gamma = sqrt(kappa^2 - g0^2)``.
    """
    kappa = channel.kappa
    base = nominal_left_angle(kappa)
    g0 = 0.0 if profile is None else profile.coulomb_strength
    if g0 == 0.0 or profile.params.curved:
        return base
    if abs(g0) >= abs(kappa):
        raise ValueError("point-charge coupling is supercritical for this channel")
    gam = math.sqrt(kappa * kappa - g0 * g0)
    if kappa < 0:
        return math.atan(-(gam + kappa) / g0)
    return base + math.atan(g0 / (gam + kappa))


def right_boundary_angle(lam):
    """Angle of the solution decaying at infinity, in ``(0, pi/2)``."""
    if not -1.0 < lam < 1.0:
        raise NotInGapError(f"lambda = {lam!r} is not in the gap (-1, 1)")
    return math.atan(math.sqrt((1.0 - lam) / (1.0 + lam)))


def matching_radius(profile: SpacetimeProfile):
    g = profile.params.g
    return max(1.0, 1.0 / abs(g)) if g != 0 else 1.0


def _run(profile, kappa, lam, r_from, r_to, theta0, record, rtol, atol):
    status, t_end, theta, logR, ts, ths, lrs = _kernel.integrate(
        math.log(r_from), math.log(r_to), float(theta0), float(lam), float(kappa),
        *profile.kernel_args(), rtol, atol, record, MAX_STEPS)
    if status != _kernel.STATUS_OK:
        what = "step size underflow" if status == _kernel.STATUS_UNDERFLOW else "step limit"
        raise StiffnessError(f"Prufer integration failed ({what}) at r_hat = {math.exp(t_end)!r}",
                             location=math.exp(t_end))
    return theta, logR, ts, ths, lrs


def integrate_prufer(profile: SpacetimeProfile, channel: ChannelSpec, lam, r_from, r_to,
                     theta0, rtol=RTOL, atol=ATOL) -> PruferTrajectory:
    """Integrate the angle and log-amplitude from ``r_from`` to ``r_to``,
    recording every accepted step."""
    _, _, ts, ths, lrs = _run(profile, channel.kappa, lam, r_from, r_to, theta0, True, rtol, atol)
    r = np.exp(ts)
    r[0], r[-1] = r_from, r_to
    x = np.atleast_1d(profile.x_of_r(r))
    direction = "left_to_right" if r_to >= r_from else "right_to_left"
    return PruferTrajectory(r, x, ths.copy(), lrs.copy(), float(lam), channel.kappa, direction)


def right_start_angle(channel: ChannelSpec, lam):
    """Right boundary angle placed on the branch used for counting."""
    a = right_boundary_angle(lam)
    return a - math.pi if channel.kappa < 0 else a


def mismatch(profile: SpacetimeProfile, channel: ChannelSpec, lam, r_match=None, r_max=None,
             rtol=RTOL, atol=ATOL):
    """``theta_L(r_m) - theta_R(r_m)`` with the counting branch convention."""
    r_match = r_match or matching_radius(profile)
    r_max = r_max or profile.r_max
    thL = _run(profile, channel.kappa, lam, profile.r_min, r_match,
               left_boundary_angle(channel, profile), False, rtol, atol)[0]
    thR = _run(profile, channel.kappa, lam, r_max, r_match, right_start_angle(channel, lam),
               False, rtol, atol)[0]
    return thL - thR


def count_from_mismatch(delta):
    return max(0, int(math.floor(delta / math.pi)))


def count_eigenvalues_below(profile: SpacetimeProfile, channel: ChannelSpec, lam, **kw):
    """Number of eigenvalues of the channel below ``lam`` (rotation count)."""
    return count_from_mismatch(mismatch(profile, channel, lam, **kw))


def eigenfunction_sign_changes(profile: SpacetimeProfile, channel: ChannelSpec, lam,
                               r_match=None, r_max=None):
    """Sign changes of the upper component of the glued shooting solution."""
    r_match = r_match or matching_radius(profile)
    r_max = r_max or profile.r_max
    left = integrate_prufer(profile, channel, lam, profile.r_min, r_match,
                            left_boundary_angle(channel, profile))
    right = integrate_prufer(profile, channel, lam, r_max, r_match,
                             right_start_angle(channel, lam))
    shift = math.pi * round((left.theta_end - right.theta_end) / math.pi)
    theta = np.concatenate((left.theta, right.theta[::-1][1:] + shift))
    # theta only crosses pi/2 mod pi upward (theta' = lam + f + v > 0 there in
    # an attractive well), so sampled crossings are counted exactly
    k = np.floor((theta - 0.5 * math.pi) / math.pi)
    return int(np.count_nonzero(np.diff(k)))


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------

def lpc_probe(profile: SpacetimeProfile, channel: ChannelSpec, n_points=81, max_residual=1e-3):
    """Growth exponents of the decoupled zero-energy solutions near the center.

    Near ``r = 0`` the channel system decouples into ``u1' = -p u1`` and
    ``u2' = p u2``, so ``ln|u1| = -int p dx`` and ``ln|u2| = +int p dx``.
    Both are tabulated on ``r in [1e-8, 1e-4] * max(1, ell_hat)`` and the
    slope of ``ln|u|`` against ``ln x`` is fitted.

    Returns
    -------
    dict
        ``upper_exponent``, ``lower_exponent``, ``dominant_magnitude``,
        ``fit_residual`` and ``expected_magnitude`` (``|kappa| / f(0)``).
    """
    scale = max(1.0, profile.params.ell_hat if profile.params.ell_hat > 0 else 1.0)
    r = np.logspace(math.log10(1e-8 * scale), math.log10(1e-4 * scale), n_points)
    t = np.log(r)
    # int p dx = kappa int dr / (f r) = kappa int dt / f, by Simpson on a fine grid
    fine = np.linspace(t[0], t[-1], 8 * (n_points - 1) + 1)
    inv_f = 1.0 / np.atleast_1d(profile.f(np.exp(fine)))
    step = fine[1] - fine[0]
    cell = step / 3.0 * (inv_f[:-2:2] + 4 * inv_f[1:-1:2] + inv_f[2::2])
    cum = np.concatenate(([0.0], np.cumsum(cell)))[::4]
    log_u1 = -channel.kappa * cum
    log_u2 = channel.kappa * cum
    log_x = np.log(np.atleast_1d(profile.x_of_r(r)))
    out = {}
    resid = 0.0
    for name, lu in (("upper_exponent", log_u1), ("lower_exponent", log_u2)):
        coef = np.polyfit(log_x, lu, 1)
        span = float(np.ptp(lu))
        resid = max(resid, float(np.max(np.abs(np.polyval(coef, log_x) - lu))) / span)
        out[name] = float(coef[0])
    out["dominant_magnitude"] = max(abs(out["upper_exponent"]), abs(out["lower_exponent"]))
    out["fit_residual"] = resid
    f0 = math.sqrt(profile.f0_squared) if math.isfinite(profile.f0_squared) else math.nan
    out["expected_magnitude"] = abs(channel.kappa) / f0
    out["r_range"] = [float(r[0]), float(r[-1])]
    if resid > max_residual:
        raise ProbeInconclusiveError(f"power-law fit residual {resid:.3g} exceeds {max_residual}")
    return out


def prufer_boundedness_probe(profile: SpacetimeProfile, channel: ChannelSpec, lam, decades=3,
                             r0=None, theta0=None):
    """Total variation of ``theta`` per decade while integrating toward 0.

    Starting at ``r0`` (default: the profile's smallest radius) from a
    generic angle, the angle is integrated down to ``r0 * 10**-decades``.
    Near the center ``theta`` is driven by ``(kappa/f(0)) sin(2 theta)`` per
    unit ``ln r`` (plus ``g0`` for a point charge), so toward 0 it locks onto
    the fixed point of the dominant solution; the regular and dominant fixed
    points sum to ``pi/2`` modulo ``pi``.
    """
    if not 1 <= decades <= 4:
        raise ValueError("decades must be in 1..4")
    r0 = r0 or profile.r_min
    base = left_boundary_angle(channel, profile)
    if theta0 is None:
        theta0 = nominal_left_angle(channel.kappa) + 0.25 * math.pi
    traj = integrate_prufer(profile, channel, lam, r0, r0 * 10.0 ** (-decades), theta0)
    lr = np.log10(traj.r_hat / r0)
    per_decade = []
    for k in range(1, decades + 1):
        sel = (lr <= -(k - 1) + 1e-12) & (lr >= -k - 1e-12)
        per_decade.append(float(np.sum(np.abs(np.diff(traj.theta[sel])))))
    limit = traj.theta_end
    # the two center fixed points sum to pi/2 (mod pi)
    dominant = 0.5 * math.pi - base
    dist_dom = abs(math.remainder(limit - dominant, math.pi))
    dist_reg = abs(math.remainder(limit - base, math.pi))
    decreasing = all(b <= a for a, b in zip(per_decade, per_decade[1:]))
    return {"per_decade_variation": per_decade,
            "total_variation": float(sum(per_decade)),
            "decreasing": bool(decreasing),
            "limit_angle": float(limit),
            "distance_to_dominant_direction": float(dist_dom),
            "distance_to_regular_direction": float(dist_reg),
            "r_range": [float(r0 * 10.0 ** (-decades)), float(r0)]}


def gap_ode_gamma(profile: SpacetimeProfile, channel: ChannelSpec, component, x_hat):
    """Coefficient ``Gamma(x)`` of the scalar oscillation test.

    ``upper``: ``(f - v)^2 + (kappa f/r)^2 - 1 + kappa (f/r)'``;
    ``lower``: ``(f + v)^2 + (kappa f/r)^2 - 1 - kappa (f/r)'``,
    with ``' = d/dx``.
    """
    if component not in ("upper", "lower"):
        raise ValueError("component must be 'upper' or 'lower'")
    x = np.asarray(x_hat, dtype=float)
    r = np.atleast_1d(profile.r_of_x(x))
    f = np.atleast_1d(profile.f(r))
    v = np.atleast_1d(profile.v(r))
    dfdr = np.atleast_1d(profile.df_dr(r))
    k = channel.kappa
    d_for = f * f * (dfdr / r - f / r ** 2)
    if component == "upper":
        gam = (f - v) ** 2 + (k * f / r) ** 2 - 1.0 + k * d_for
    else:
        gam = (f + v) ** 2 + (k * f / r) ** 2 - 1.0 - k * d_for
    return float(gam[0]) if x.ndim == 0 else gam
