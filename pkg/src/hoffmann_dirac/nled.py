"""Nonlinear-electrodynamics vacuum laws and the constants they induce.

A vacuum law is described by its reduced Hamiltonian ``zeta(mu)``.  Two laws
are built in (Born-Infeld and Maxwell); anything else can be supplied as a
sampled two-column table.  All callables accept scalars or numpy arrays.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.interpolate import PchipInterpolator

from .errors import DomainError, InfiniteEnergyError

QUAD_RTOL = 1e-10
_QUAD_LIMIT = 200
_RICHARDSON_MU = (1e8, 1e10, 1e12)
# 2**(-11/4): prefactor of the field-energy integral
_ENERGY_PREFACTOR = 2.0 ** -2.75


@dataclass(frozen=True)
class ReducedHamiltonianModel:
    """A vacuum law ``zeta`` together with its first (and optionally second)
    derivative."""

    name: str
    zeta: Callable
    zeta_prime: Callable
    zeta_second: Optional[Callable] = None
    # relative slack for sampled sign conditions; loosened for tabulated laws
    sample_tolerance: float = 1e-10


@dataclass(frozen=True)
class ModelConstants:
    I_zeta: float
    J_zeta: float
    A: float
    one_over_A: float

    def as_dict(self):
        return {"I_zeta": self.I_zeta, "J_zeta": self.J_zeta,
                "A": self.A, "one_over_A": self.one_over_A}


# ---------------------------------------------------------------------------
# built-in laws
# ---------------------------------------------------------------------------

def eval_born_infeld(mu):
    """Born-Infeld reduced Hamiltonian ``sqrt(1 + 2 mu) - 1``.

    Evaluated as ``2 mu / (sqrt(1 + 2 mu) + 1)`` so that tiny arguments do not
    lose their significant digits.
    """
    mu_arr = np.asarray(mu, dtype=float)
    if np.any(mu_arr < 0) or np.any(np.isnan(mu_arr)):
        raise DomainError("Born-Infeld zeta is defined for mu >= 0 only")
    out = 2.0 * mu_arr / (np.sqrt(1.0 + 2.0 * mu_arr) + 1.0)
    return float(out) if out.ndim == 0 else out


def _bi_prime(mu):
    return 1.0 / np.sqrt(1.0 + 2.0 * np.asarray(mu, dtype=float))


def _bi_second(mu):
    return -(1.0 + 2.0 * np.asarray(mu, dtype=float)) ** -1.5


def born_infeld() -> ReducedHamiltonianModel:
    return ReducedHamiltonianModel("born_infeld", eval_born_infeld,
                                   _bi_prime, _bi_second)


def maxwell() -> ReducedHamiltonianModel:
    return ReducedHamiltonianModel(
        "maxwell",
        lambda mu: np.asarray(mu, dtype=float) * 1.0,
        lambda mu: np.ones_like(np.asarray(mu, dtype=float)),
        lambda mu: np.zeros_like(np.asarray(mu, dtype=float)),
    )


def table_model(mu, zeta, name="table") -> ReducedHamiltonianModel:
    """Vacuum law from samples, interpolated by a monotone cubic in log-log
    space.

    Outside the sampled range the law is continued as a power law with the
    end slopes of the interpolant.  ``zeta'`` and ``zeta''`` are derived from
    the interpolant.
    """
    mu = np.asarray(mu, dtype=float)
    zeta = np.asarray(zeta, dtype=float)
    if mu.ndim != 1 or mu.shape != zeta.shape or mu.size < 4:
        raise DomainError("table needs at least 4 matching (mu, zeta) samples")
    if np.any(np.diff(mu) <= 0) or mu[0] <= 0:
        raise DomainError("table mu column must be positive and strictly increasing")
    if np.any(zeta <= 0):
        raise DomainError("table zeta column must be positive")
    spline = PchipInterpolator(np.log(mu), np.log(zeta), extrapolate=False)
    d1 = spline.derivative(1)
    d2 = spline.derivative(2)
    lo, hi = math.log(mu[0]), math.log(mu[-1])
    slope_lo, slope_hi = float(d1(lo)), float(d1(hi))
    y_lo, y_hi = math.log(zeta[0]), math.log(zeta[-1])

    def _parts(m):
        s = np.log(np.asarray(m, dtype=float))
        sc = np.clip(s, lo, hi)
        y = np.where(s < lo, y_lo + slope_lo * (s - lo),
                     np.where(s > hi, y_hi + slope_hi * (s - hi), spline(sc)))
        dy = np.where(s < lo, slope_lo, np.where(s > hi, slope_hi, d1(sc)))
        ddy = np.where((s < lo) | (s > hi), 0.0, d2(sc))
        return s, y, dy, ddy

    def z(m):
        _, y, _, _ = _parts(m)
        out = np.exp(y)
        return float(out) if out.ndim == 0 else out

    def zp(m):
        s, y, dy, _ = _parts(m)
        out = np.exp(y - s) * dy
        return float(out) if out.ndim == 0 else out

    def zpp(m):
        s, y, dy, ddy = _parts(m)
        out = np.exp(y - 2.0 * s) * (ddy + dy * dy - dy)
        return float(out) if out.ndim == 0 else out

    return ReducedHamiltonianModel(name, z, zp, zpp, sample_tolerance=1e-3)


def load_table(path) -> ReducedHamiltonianModel:
    """Read a two-column ``mu zeta`` text file (``#`` starts a comment)."""
    data = np.loadtxt(Path(path), comments="#", ndmin=2)
    if data.shape[1] != 2:
        raise DomainError(f"{path}: expected two columns 'mu zeta'")
    return table_model(data[:, 0], data[:, 1], name=Path(path).stem)


_BUILTIN = {"born_infeld": born_infeld, "maxwell": maxwell}


def model_from_name(name: str) -> ReducedHamiltonianModel:
    try:
        return _BUILTIN[name]()
    except KeyError:
        raise DomainError(f"unknown model {name!r}; expected one of {sorted(_BUILTIN)}") from None


def scaled(model: ReducedHamiltonianModel, beta: float) -> ReducedHamiltonianModel:
    """The rescaled law ``zeta_beta(mu) = beta**-4 * zeta(beta**4 * mu)``."""
    b4 = float(beta) ** 4
    z, zp, zpp = model.zeta, model.zeta_prime, model.zeta_second
    return ReducedHamiltonianModel(
        f"{model.name}[beta={beta:g}]",
        lambda mu: z(b4 * np.asarray(mu, dtype=float)) / b4,
        lambda mu: zp(b4 * np.asarray(mu, dtype=float)),
        None if zpp is None else (lambda mu: b4 * zpp(b4 * np.asarray(mu, dtype=float))),
        sample_tolerance=model.sample_tolerance,
    )


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

def _quad01(func, endpoint, what, accept=1e-6):
    """Integrate ``func`` over [0, 1]; divergence or non-convergence is
    reported as an infinite-energy fault at ``endpoint``.

    ``accept`` is the largest relative error estimate taken as converged;
    tabulated laws pass their sample tolerance, since a piecewise-cubic
    derivative limits what quadrature can certify.

    After the endpoint substitutions every admissible integrand is bounded
    at 0, so growth there is taken as divergence even when QUADPACK returns
    a number.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        with np.errstate(all="ignore"):
            out = quad(func, 0.0, 1.0, epsabs=0.0, epsrel=QUAD_RTOL,
                       limit=_QUAD_LIMIT, full_output=1)
            probes = [abs(float(func(s))) for s in (1e-4, 1e-8, 1e-12)]
    value, abserr = out[0], out[1]
    unconverged = len(out) > 3 and not abserr <= accept * abs(value)
    blowup = not all(math.isfinite(p) for p in probes) or probes[2] > 100.0 * probes[0] + 1e-300
    if unconverged or blowup or not math.isfinite(value):
        raise InfiniteEnergyError(
            f"{what}: quadrature does not converge near mu -> {endpoint}",
            endpoint=endpoint)
    return value


def energy_integral(model: ReducedHamiltonianModel) -> float:
    """``I_zeta = 2**(-11/4) * int_0^inf mu**(-7/4) zeta(mu) dmu``.

    Split at mu = 1; mu = t**4 on the lower piece and mu = s**-4 on the upper
    piece turn both algebraic endpoints into bounded integrands.
    """
    z = model.zeta

    def lower(t):
        return 4.0 * z(t ** 4) / t ** 4

    def upper(s):
        return 4.0 * s * s * z(s ** -4.0)

    acc = max(1e-6, model.sample_tolerance)
    return _ENERGY_PREFACTOR * (_quad01(lower, "0", "I_zeta", acc)
                                + _quad01(upper, "infinity", "I_zeta", acc))


def potential_center_identity(model: ReducedHamiltonianModel) -> float:
    """``K = int_0^inf zeta'(1/(2 t**4)) t**-2 dt``, the scaled potential at
    the center of the charge.  Equals ``1.5 * I_zeta`` for admissible laws."""
    zp = model.zeta_prime

    def near_center(t):
        return float(zp(0.5 / t ** 4)) / (t * t)

    def far(u):
        return float(zp(0.5 * u ** 4))

    acc = max(1e-6, model.sample_tolerance)
    return (_quad01(near_center, "infinity", "center potential", acc)
            + _quad01(far, "0", "center potential", acc))


def strong_field_limit(model: ReducedHamiltonianModel) -> float:
    """``J_zeta = lim zeta(mu)/sqrt(mu)``, Richardson-extrapolated in
    ``h = mu**-1/2`` from the samples at mu = 1e8, 1e10, 1e12."""
    hs = [m ** -0.5 for m in _RICHARDSON_MU]
    fs = [float(model.zeta(m)) / math.sqrt(m) for m in _RICHARDSON_MU]
    # Neville: quadratic through the three points, evaluated at h = 0
    h0, h1, h2 = hs
    f0, f1, f2 = fs
    p01 = (h1 * f0 - h0 * f1) / (h1 - h0)
    p12 = (h2 * f1 - h1 * f2) / (h2 - h1)
    return (h2 * p01 - h0 * p12) / (h2 - h0)


def compute_constants(model: ReducedHamiltonianModel) -> ModelConstants:
    I = energy_integral(model)
    J = strong_field_limit(model)
    if not (I > 0 and J > 0 and math.isfinite(J)):
        raise InfiniteEnergyError(f"{model.name}: non-positive constants I={I}, J={J}")
    A = math.sqrt(2.0) * J / I ** 2
    return ModelConstants(I_zeta=I, J_zeta=J, A=A, one_over_A=1.0 / A)


# ---------------------------------------------------------------------------
# admissibility
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SamplingGrid:
    mu_min: float = 1e-8
    mu_max: float = 1e12
    per_decade: int = 100
    weak_field_max: float = 1e-2

    def points(self, refine=1):
        decades = math.log10(self.mu_max / self.mu_min)
        n = int(round(decades * self.per_decade * refine)) + 1
        return np.logspace(math.log10(self.mu_min), math.log10(self.mu_max), n)


@dataclass
class ConditionResult:
    name: str
    status: str  # "pass" | "fail" | "skipped"
    detail: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.status != "fail"

    def as_dict(self):
        return {"condition": self.name, "status": self.status, **self.detail}


@dataclass
class AdmissibilityReport:
    model: str
    conditions: list
    sampling: SamplingGrid

    @property
    def passed(self):
        return all(c.passed for c in self.conditions)

    def __getitem__(self, name):
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    def as_dict(self):
        return {
            "model": self.model,
            "admissible": self.passed,
            "sampling": {"mu_min": self.sampling.mu_min, "mu_max": self.sampling.mu_max,
                         "per_decade": self.sampling.per_decade},
            "conditions": [c.as_dict() for c in self.conditions],
        }


def _failures(mu, bad, limit=5):
    idx = np.flatnonzero(bad)
    return {"n_failed": int(idx.size), "failure_mu": [float(mu[i]) for i in idx[:limit]]}


def _weak_field_constant(model, mu):
    z = np.asarray(model.zeta(mu), dtype=float)
    ratio = np.abs(z - mu) / mu ** 1.25
    return float(np.max(ratio)), ratio


def _check_weak_field(model, sampling):
    fits = []
    for refine in (1, 2, 4):
        mu = sampling.points(refine)
        mu = mu[mu <= sampling.weak_field_max * (1 + 1e-12)]
        fits.append(_weak_field_constant(model, mu))
    cs = [c for c, _ in fits]
    finite = all(math.isfinite(c) for c in cs)
    stable = finite and all(abs(c - cs[0]) <= 1e-2 * max(cs[0], 1e-300) for c in cs[1:])
    # a ratio still growing at the smallest sampled decade is not O(mu^(5/4))
    ratio = fits[0][1]
    k = max(2, ratio.size // 10)
    growing = finite and ratio[:k].max() > 1.01 * ratio[k:].max() and ratio[:k].max() > 0
    ok = finite and stable and not growing
    return ConditionResult("weak_field", "pass" if ok else "fail",
                           {"C": cs[0] if finite else None,
                            "C_refinements": cs if finite else None,
                            "growing_near_zero": bool(growing)})


def _strong_field(model, mu, J):
    detail = {"J_zeta": J if math.isfinite(J) else None}
    z = np.asarray(model.zeta(mu), dtype=float)
    zp = np.asarray(model.zeta_prime(mu), dtype=float)
    # tail value must be a converged limit
    tail = [float(model.zeta(m)) / math.sqrt(m) for m in _RICHARDSON_MU]
    converged = math.isfinite(J) and J > 0 and abs(tail[-1] - tail[-2]) <= 1e-2 * abs(tail[-1])
    detail["tail_converged"] = bool(converged)
    if not converged:
        return ConditionResult("strong_field", "fail", detail)
    close = np.abs(z / np.sqrt(mu) - J) <= 0.1 * J
    # mu0: smallest grid point from which zeta/sqrt(mu) stays within 10% of J
    bad_tail = np.flatnonzero(~close)
    start = 0 if bad_tail.size == 0 else bad_tail[-1] + 1
    if start >= mu.size:
        detail["mu0"] = None
        return ConditionResult("strong_field", "fail", detail)
    mu0 = float(mu[start])
    m, zz, zzp = mu[start:], z[start:], zp[start:]
    sq = np.sqrt(m)
    tol = model.sample_tolerance
    upper_z = zz <= J * sq * (1 + tol)
    upper_zp = zzp <= J / (2 * sq) * (1 + tol)
    K_samples = J * sq - zz
    L_samples = m * (J / (2 * sq) - zzp)
    K = float(np.max(K_samples))
    L = float(np.max(L_samples))
    # boundedness: no growth over the last two decades
    # (differences of O(J sqrt(mu)) numbers carry roundoff of that relative size)
    top = m >= m[-1] / 100
    floor = tol * J * math.sqrt(m[-1]) + 1e-12
    k_bounded = float(np.max(K_samples[top])) <= 1.5 * max(float(np.max(K_samples[~top])), 0) + floor \
        if np.any(~top) else True
    l_bounded = float(np.max(L_samples[top])) <= 1.5 * max(float(np.max(L_samples[~top])), 0) + floor \
        if np.any(~top) else True
    ok = bool(np.all(upper_z) and np.all(upper_zp) and k_bounded and l_bounded and K >= 0 and L >= 0)
    detail.update({"mu0": mu0, "K_zeta": K, "L_zeta": L,
                   "zeta_upper_bound_ok": bool(np.all(upper_z)),
                   "zeta_prime_upper_bound_ok": bool(np.all(upper_zp)),
                   "K_bounded": bool(k_bounded), "L_bounded": bool(l_bounded)})
    return ConditionResult("strong_field", "pass" if ok else "fail", detail)


def check_admissibility(model: ReducedHamiltonianModel,
                        sampling: Optional[SamplingGrid] = None) -> AdmissibilityReport:
    """Evaluate every admissibility condition on a log-spaced sample of mu.

    Failures are recorded in the report; nothing is raised.
    """
    sampling = sampling or SamplingGrid()
    mu = sampling.points()
    with np.errstate(all="ignore"):
        z = np.asarray(model.zeta(mu), dtype=float)
        zp = np.asarray(model.zeta_prime(mu), dtype=float)
    conditions = []

    bad = ~(z > 0)
    conditions.append(ConditionResult("positivity", "fail" if bad.any() else "pass",
                                      _failures(mu, bad)))

    conditions.append(_check_weak_field(model, sampling))

    tol = model.sample_tolerance
    bad = ~((zp >= -tol) & (z - mu * zp >= -tol * np.abs(z)))
    conditions.append(ConditionResult("dominant_energy", "fail" if bad.any() else "pass",
                                      _failures(mu, bad)))

    if model.zeta_second is None:
        conditions.append(ConditionResult("lagrangian", "skipped",
                                          {"reason": "no second derivative supplied"}))
    else:
        with np.errstate(all="ignore"):
            zpp = np.asarray(model.zeta_second(mu), dtype=float)
        bad = ~(zp + 2 * mu * zpp >= -tol * np.abs(zp))
        conditions.append(ConditionResult("lagrangian", "fail" if bad.any() else "pass",
                                          _failures(mu, bad)))

    bad = ~(z <= mu * (1 + tol))
    conditions.append(ConditionResult("bounded_by_maxwell", "fail" if bad.any() else "pass",
                                      _failures(mu, bad)))

    try:
        I = energy_integral(model)
        ok = I > 0
        conditions.append(ConditionResult("finite_energy", "pass" if ok else "fail",
                                          {"I_zeta": I}))
    except InfiniteEnergyError as exc:
        conditions.append(ConditionResult("finite_energy", "fail",
                                          {"I_zeta": None, "divergent_endpoint": exc.endpoint}))

    with np.errstate(all="ignore"):
        J = strong_field_limit(model)
    conditions.append(_strong_field(model, mu, J))
    return AdmissibilityReport(model.name, conditions, sampling)
