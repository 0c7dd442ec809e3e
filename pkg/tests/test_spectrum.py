import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hoffmann_dirac import nled, spacetime, spectrum
from hoffmann_dirac.channel import ChannelSpec
from hoffmann_dirac.errors import EigenvalueNotFoundError, SupercriticalError

from conftest import flat_maxwell

E0 = math.sqrt(0.75)
# closed form at g = 0.5, kappa = -1, n_r = 1 is cos(15 deg)
E1 = math.cos(math.pi / 12)


def flat_bi(ell, g=0.5, r_max=3e4):
    bi = nled.born_infeld()
    p = spacetime.dimensionless_parameters(g, 0.0, 0.0, ell_hat=ell, flat=True)
    return spacetime.build_profile(p, bi, spacetime.GridConfig(r_max=r_max))


# -- oracle ------------------------------------------------------------------

def test_oracle_examples():
    assert spectrum.coulomb_oracle(0.5, -1, 0) == pytest.approx(0.8660254, abs=1e-7)
    assert spectrum.coulomb_oracle(0.5, -1, 1) == pytest.approx(0.96592583, abs=1e-8)
    assert spectrum.coulomb_oracle(1e-9, -1, 0) == pytest.approx(1.0, abs=1e-15)
    assert spectrum.coulomb_oracle(0.0, 2, 3) == 1.0


def test_oracle_errors():
    with pytest.raises(SupercriticalError):
        spectrum.coulomb_oracle(1.0, -1, 0)
    with pytest.raises(ValueError):
        spectrum.coulomb_oracle(0.5, 1, 0)
    with pytest.raises(ValueError):
        spectrum.coulomb_oracle(0.5, 0, 0)


@given(st.floats(0.01, 0.99), st.integers(1, 4), st.integers(1, 30))
def test_oracle_properties(g, k, n_r):
    e = spectrum.coulomb_oracle(g, -k, n_r)
    assert 0 < e < 1
    assert spectrum.coulomb_oracle(g, -k, n_r + 1) > e
    # the Dirac-Coulomb degeneracy of +-kappa at equal n_r
    assert spectrum.coulomb_oracle(g, k, n_r) == e


def test_principal_number():
    assert spectrum.principal_number(-1, 0) == 1
    assert spectrum.principal_number(1, 0) == 2
    assert spectrum.principal_number(-2, 0) == 2


# -- find_eigenvalue ---------------------------------------------------------

@pytest.mark.parametrize("index,expected", [(0, E0), (1, E1)])
def test_find_flat_coulomb(coulomb05, km1, index, expected):
    rec = spectrum.find_eigenvalue(coulomb05, km1, index)
    assert rec.energy == pytest.approx(expected, abs=1e-6)
    assert rec.residual <= spectrum.BRACKET_TOL
    assert rec.node_count == index
    assert rec.tolerance_flags == []


def test_find_positive_kappa(coulomb05):
    rec = spectrum.find_eigenvalue(coulomb05, ChannelSpec(1), 0)
    assert rec.energy == pytest.approx(E1, rel=1e-6)


def test_flat_born_infeld_converges_to_coulomb(km1):
    devs = [spectrum.find_eigenvalue(flat_bi(ell), km1, 0).energy - E0 for ell in (0.1, 0.03, 0.01)]
    # the smoothed center pushes the level up; it relaxes toward the point-charge value
    assert devs[0] > devs[1] > devs[2] > 0


def test_find_not_found(coulomb05, km1):
    with pytest.raises(EigenvalueNotFoundError) as exc:
        spectrum.find_eigenvalue(coulomb05, km1, 3, window=(-0.5, 0.97))
    assert exc.value.count == 2


def test_find_rejects_negative_index(coulomb05, km1):
    with pytest.raises(ValueError):
        spectrum.find_eigenvalue(coulomb05, km1, -1)


def test_r_max_flag(coulomb05, km1):
    rec = spectrum.find_eigenvalue(coulomb05, km1, 2, r_max=100.0)
    assert "r_max_below_recommended" in rec.tolerance_flags


# -- scans -------------------------------------------------------------------

def test_scan_free_empty(free, km1):
    res = spectrum.scan_spectrum(free, km1, (-0.99, 0.999))
    assert res.records == [] and res.count_in_window == 0
    assert res.lower_edge_clear_margin == math.inf


def test_scan_flat_coulomb(coulomb05, km1):
    res = spectrum.scan_spectrum(coulomb05, km1, (0.85, 0.999))
    assert len(res.records) >= 10
    assert np.all(res.successive_gaps > 0)
    assert np.all(np.diff(res.gap_edge_distances) < 0)
    assert [r.index for r in res.records] == list(range(len(res.records)))
    assert all(-1 < e < 1 for e in res.energies)
    n = res.principal_numbers
    ratio = res.gap_edge_distances * n ** 2
    assert abs(ratio[-1] - 0.125) < abs(ratio[0] - 0.125)


def test_scan_curved_lower_edge_empty(curved01, km1):
    assert spectrum.scan_spectrum(curved01, km1, (-0.95, -0.5)).records == []


def test_scan_window_checked(coulomb05, km1):
    for w in ((-2.0, 0.0), (0.5, 0.4), (-1.0, 0.5)):
        with pytest.raises(ValueError):
            spectrum.scan_spectrum(coulomb05, km1, w)


def test_scan_truncation(coulomb05, km1):
    res = spectrum.scan_spectrum(coulomb05, km1, (0.8, 1.0), max_count=3)
    assert res.truncated and len(res.records) == 3 and res.count_in_window > 3
    assert not spectrum.scan_spectrum(coulomb05, km1, (0.8, 0.97)).truncated


def test_scan_thread_independent(curved01, km1):
    a = spectrum.scan_spectrum(curved01, km1, (0.9, 0.995), threads=1)
    b = spectrum.scan_spectrum(curved01, km1, (0.9, 0.995), threads=4)
    assert a.as_dict() == b.as_dict()


def test_truncation_stability(bi, bi_constants, km1):
    p = spacetime.dimensionless_parameters(0.5, 0.1, 1.0, bi_constants)
    prof = spacetime.build_profile(p, bi, spacetime.GridConfig(r_max=1.2e4), bi_constants)
    a = spectrum.scan_spectrum(prof, km1, (0.8, 0.996), r_max=6e3).energies
    b = spectrum.scan_spectrum(prof, km1, (0.8, 0.996), r_max=1.2e4).energies
    assert a.size == b.size >= 4
    assert np.max(np.abs(a - b)) < 1e-8


# -- clustering --------------------------------------------------------------

def test_cluster_flat_coulomb(coulomb05, km1):
    res = spectrum.scan_spectrum(coulomb05, km1, (0.85, 0.9995), max_count=12)
    assert len(res.records) == 12
    rep = spectrum.cluster_report(res, coulomb05, n_min=8)
    assert rep["upper_edge_accumulation"]
    assert rep["rydberg_fit"]["coefficient"] == pytest.approx(0.125, rel=0.1)
    assert rep["lower_edge_clear"]


def test_cluster_needs_records(coulomb05, km1):
    res = spectrum.scan_spectrum(coulomb05, km1, (0.85, 0.97))
    with pytest.raises(ValueError):
        spectrum.cluster_report(res, coulomb05)


def test_conditions_curved(curved01, km1):
    c = spectrum.clustering_conditions(curved01, km1)
    assert c["failed_conditions"] == []
    assert c["i_p_is_O_1_over_x"] and c["ii_x2V_unbounded"]
    # |p| >= |V| + 1 holds on a neighbourhood of the center ...
    assert c["iii_center_domination"]
    assert c["iii_holds_below"] > 0.5
    # ... but not out to r = 0.1 ell_hat: the margin turns negative near r = 0.93
    assert not c["iii_holds_on_checked_range"]
    assert c["iii_holds_below"] == pytest.approx(0.93, abs=0.02)


def test_conditions_repulsive(bi, bi_constants, km1):
    p = spacetime.dimensionless_parameters(-0.5, 0.1, 1.0, bi_constants)
    prof = spacetime.build_profile(p, bi, spacetime.GridConfig(r_max=3e4), bi_constants)
    c = spectrum.clustering_conditions(prof, km1)
    assert "ii" in c["failed_conditions"]
    assert not c["ii_x2V_unbounded"]


def test_rydberg_fit_pure_hydrogenic():
    recs = [spectrum.EigenvalueRecord(-1, k, 1 - 0.1 / (k + 1) ** 2, 0.0, k, 1.0)
            for k in range(10)]
    res = spectrum.SpectrumScanResult(-1, (0.0, 1.0), recs, False, 10)
    fit = res.rydberg_fit(n_min=5)
    assert fit["coefficient"] == pytest.approx(0.1, rel=1e-12)
    assert fit["quantum_defect"] == pytest.approx(0.0, abs=1e-9)


# -- Coulomb comparison ------------------------------------------------------

def test_compare_flat_maxwell(km1):
    prof = flat_maxwell(nled.maxwell(), 0.25)
    res = spectrum.scan_spectrum(prof, km1, (0.9, 0.999), max_count=4)
    cmp = spectrum.compare_with_coulomb(res, 0.25)
    assert cmp["max_abs_deviation"] < 1e-6


def test_compare_flat_born_infeld(km1):
    res = spectrum.scan_spectrum(flat_bi(0.1), km1, (0.8, 0.995), max_count=6)
    cmp = spectrum.compare_with_coulomb(res, 0.5)
    assert cmp["deviation_shrinks_with_index"]


def test_compare_curved_reports(curved01, km1):
    res = spectrum.scan_spectrum(curved01, km1, (0.8, 0.98))
    cmp = spectrum.compare_with_coulomb(res, 0.5)
    assert len(cmp["rows"]) == len(res.records) > 0
    assert all(math.isfinite(r["deviation"]) for r in cmp["rows"])
