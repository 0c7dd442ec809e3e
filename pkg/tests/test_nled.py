import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.special import gamma

from hoffmann_dirac import nled
from hoffmann_dirac.errors import DomainError, InfiniteEnergyError

I_PAPER, I_TOL = 1.23605, 2e-5
INV_A_PAPER, INV_A_TOL = 0.76391, 1e-4
# K = 1.5 I in closed form for Born-Infeld: Gamma(1/4)^2 / (4 sqrt(pi))
K_EXACT = gamma(0.25) ** 2 / (4.0 * math.sqrt(math.pi))


def rational_model():
    """zeta = mu / sqrt(1 + mu): J = 1, but zeta' exceeds J / (2 sqrt(mu))
    for mu > (sqrt(5) - 1) / 2, violating the strong-field upper bound."""
    return nled.ReducedHamiltonianModel(
        "rational",
        lambda m: np.asarray(m, dtype=float) / np.sqrt(1.0 + np.asarray(m, dtype=float)),
        lambda m: (2.0 + np.asarray(m, dtype=float))
        / (2.0 * (1.0 + np.asarray(m, dtype=float)) ** 1.5),
    )


def _exp_prime(m):
    m = np.asarray(m, dtype=float)
    return 1.0 / np.sqrt(2.0 * m + np.exp(-m))


_EXP_SWITCH = 50.0
_EXP_DEFECT = quad(lambda u: (2 * u) ** -0.5 - float(_exp_prime(u)), 0.0, _EXP_SWITCH,
                   epsabs=0, epsrel=1e-13, limit=200)[0]


def _exp_zeta(m):
    def one(x):
        if x > _EXP_SWITCH:
            # the neglected integrand tail is below exp(-50)
            return math.sqrt(2 * x) - _EXP_DEFECT
        return quad(lambda u: float(_exp_prime(u)), 0.0, x, epsabs=0, epsrel=1e-13)[0]
    out = np.vectorize(one, otypes=[float])(np.asarray(m, dtype=float))
    return float(out) if out.ndim == 0 else out


def exp_model():
    """zeta' = (2 mu + exp(-mu))^(-1/2): admissible (J = sqrt 2, zeta' + 2 mu zeta''
    = e^-mu (1 + mu) (2 mu + e^-mu)^(-3/2) >= 0) and not a rescaled Born-Infeld."""
    return nled.ReducedHamiltonianModel("exp", _exp_zeta, _exp_prime)


# -- eval_born_infeld --------------------------------------------------------

def test_born_infeld_values():
    assert nled.eval_born_infeld(0.0) == 0.0
    assert nled.eval_born_infeld(4.0) == pytest.approx(2.0, rel=1e-15)
    assert abs(nled.eval_born_infeld(1e12) / 1e6 - math.sqrt(2)) < 1e-6


def test_born_infeld_small_argument_keeps_digits():
    mu = 1e-20
    assert nled.eval_born_infeld(mu) == pytest.approx(mu, rel=1e-15)


def test_born_infeld_negative_rejected():
    with pytest.raises(DomainError):
        nled.eval_born_infeld(-1e-3)


@given(st.floats(min_value=1e-8, max_value=1e12))
def test_born_infeld_sample_invariants(mu):
    bi = nled.born_infeld()
    z, zp, zpp = bi.zeta(mu), bi.zeta_prime(mu), bi.zeta_second(mu)
    assert 0 < z <= mu
    assert zp >= 0
    assert z - mu * zp >= -1e-12 * z
    assert zp + 2 * mu * zpp >= -1e-12 * zp


# -- constants ---------------------------------------------------------------

def test_born_infeld_constants(bi_constants):
    c = bi_constants
    assert abs(c.I_zeta - I_PAPER) <= I_TOL
    assert abs(c.J_zeta - math.sqrt(2)) <= 1e-6
    assert abs(c.one_over_A - INV_A_PAPER) <= INV_A_TOL
    assert c.one_over_A == pytest.approx(1.0 / c.A, rel=1e-15)
    # A = 2 / I^2 when J = sqrt(2)
    assert c.A == pytest.approx(2.0 / c.I_zeta ** 2, rel=1e-9)


def test_energy_integral_matches_closed_form(bi_constants):
    assert bi_constants.I_zeta == pytest.approx(K_EXACT / 1.5, rel=1e-10)


def test_potential_center_identity(bi, bi_constants):
    K = nled.potential_center_identity(bi)
    assert K / bi_constants.I_zeta == pytest.approx(1.5, rel=1e-6)
    assert abs(K - 1.85407) <= 5e-5
    assert K == pytest.approx(K_EXACT, rel=1e-9)


def test_potential_center_identity_other_model():
    m = exp_model()
    c = nled.compute_constants(m)
    K = nled.potential_center_identity(m)
    assert K > 0
    assert K / c.I_zeta == pytest.approx(1.5, rel=1e-6)
    assert c.J_zeta == pytest.approx(math.sqrt(2), rel=1e-6)


def test_maxwell_constants_diverge(mx):
    with pytest.raises(InfiniteEnergyError) as exc:
        nled.compute_constants(mx)
    assert exc.value.endpoint in ("0", "infinity")


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=0.2, max_value=5.0))
def test_scaled_model_J_invariant(beta):
    bi = nled.born_infeld()
    J = nled.strong_field_limit(bi)
    Jb = nled.strong_field_limit(nled.scaled(bi, beta))
    assert Jb == pytest.approx(J / beta ** 2, rel=1e-8)


# -- admissibility -----------------------------------------------------------

def test_born_infeld_admissible(bi):
    rep = nled.check_admissibility(bi)
    assert rep.passed
    assert all(c.status == "pass" for c in rep.conditions)
    sf = rep["strong_field"].detail
    assert sf["mu0"] > 0 and sf["K_zeta"] >= 0 and sf["L_zeta"] >= 0
    assert math.isfinite(rep["weak_field"].detail["C"])


def test_maxwell_fails_last_two(mx):
    rep = nled.check_admissibility(mx)
    assert not rep.passed
    assert rep["finite_energy"].status == "fail"
    assert rep["strong_field"].status == "fail"
    assert rep["positivity"].status == "pass"


def test_negative_law_fails_positivity_everywhere():
    neg = nled.ReducedHamiltonianModel("neg", lambda m: -np.asarray(m, dtype=float),
                                       lambda m: -np.ones_like(np.asarray(m, dtype=float)))
    grid = nled.SamplingGrid()
    rep = nled.check_admissibility(neg, grid)
    assert rep["positivity"].status == "fail"
    assert rep["positivity"].detail["n_failed"] == grid.points().size


def test_exp_model_admissible():
    assert nled.check_admissibility(exp_model(), nled.SamplingGrid(per_decade=20)).passed


def test_strong_field_derivative_bound_detected():
    rep = nled.check_admissibility(rational_model())
    sf = rep["strong_field"]
    assert sf.status == "fail"
    assert sf.detail["zeta_upper_bound_ok"]
    assert not sf.detail["zeta_prime_upper_bound_ok"]


def test_report_deterministic(bi):
    a = nled.check_admissibility(bi).as_dict()
    b = nled.check_admissibility(bi).as_dict()
    assert a == b


def test_report_rejects_strong_growth():
    # zeta = mu^(3/4): finite weak-field fit fails (too large near 0) and no sqrt tail
    m = nled.ReducedHamiltonianModel("pow", lambda x: np.asarray(x, dtype=float) ** 0.75,
                                     lambda x: 0.75 * np.asarray(x, dtype=float) ** -0.25)
    rep = nled.check_admissibility(m)
    assert not rep.passed
    assert rep["strong_field"].status == "fail"


# -- tables ------------------------------------------------------------------

def test_table_model_reproduces_born_infeld(tmp_path, bi_constants):
    mu = np.logspace(-10, 14, 2401)
    path = tmp_path / "bi.txt"
    np.savetxt(path, np.column_stack([mu, nled.eval_born_infeld(mu)]), header="mu zeta")
    m = nled.load_table(path)
    c = nled.compute_constants(m)
    assert c.I_zeta == pytest.approx(bi_constants.I_zeta, rel=1e-6)
    assert c.J_zeta == pytest.approx(math.sqrt(2), rel=1e-6)
    assert nled.check_admissibility(m).passed


def test_table_validation():
    with pytest.raises(DomainError):
        nled.table_model([1, 2, 2, 3], [1, 2, 3, 4])
    with pytest.raises(DomainError):
        nled.table_model([1, 2, 3, 4], [1, -2, 3, 4])


def test_model_from_name():
    assert nled.model_from_name("born_infeld").name == "born_infeld"
    with pytest.raises(DomainError):
        nled.model_from_name("euler_heisenberg")
