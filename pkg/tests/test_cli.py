import json
import subprocess
import sys

import pytest

from hoffmann_dirac import cli


def run(tmp_path, *argv, name="out"):
    out = tmp_path / name
    code = cli.main([*argv, "--out", str(out)])
    return code, out


def write_config(tmp_path, doc, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


FLAT_COULOMB = ["--model", "maxwell", "--flat", "--g", "0.5", "--epsilon", "0", "--rho", "0",
                "--ell-hat", "1"]
CURVED = ["--model", "born_infeld", "--g", "0.5", "--epsilon", "0.1", "--rho", "1"]


# -- check-model -------------------------------------------------------------

def test_check_model_born_infeld(tmp_path):
    code, out = run(tmp_path, "check-model", "--model", "born_infeld")
    assert code == 0
    doc = json.loads((out / "admissibility.json").read_text())
    assert abs(doc["constants"]["I_zeta"] - 1.23605) < 2e-5
    assert doc["report"]["admissible"]


def test_check_model_maxwell(tmp_path):
    code, out = run(tmp_path, "check-model", "--model", "maxwell")
    assert code == 2
    doc = json.loads((out / "admissibility.json").read_text())
    status = {c["condition"]: c["status"] for c in doc["report"]["conditions"]}
    assert status["finite_energy"] == "fail"
    assert doc["constants"] is None


def test_check_model_missing_name(tmp_path, capsys):
    code, _ = run(tmp_path, "check-model")
    assert code == 64
    assert "model" in capsys.readouterr().err


def test_check_model_table(tmp_path):
    import numpy as np
    from hoffmann_dirac.nled import eval_born_infeld
    mu = np.logspace(-10, 14, 2401)
    table = tmp_path / "bi.txt"
    np.savetxt(table, np.column_stack([mu, eval_born_infeld(mu)]))
    code, out = run(tmp_path, "check-model", "--model", str(table))
    assert code == 0
    doc = json.loads((out / "admissibility.json").read_text())
    assert abs(doc["K"] / doc["constants"]["I_zeta"] - 1.5) < 1e-6


# -- profile -----------------------------------------------------------------

def test_profile_curved(tmp_path):
    from hoffmann_dirac import nled
    A = nled.compute_constants(nled.born_infeld()).A
    code, out = run(tmp_path, "profile", *CURVED, "--r-max", "100")
    assert code == 0
    lines = (out / "profile.csv").read_text().splitlines()
    assert lines[0] == "r_hat,x_hat,f2,v,mass_integral"
    f2 = float(lines[1].split(",")[2])
    assert abs(f2 - (1 - A * 0.01)) < 1e-6
    rep = json.loads((out / "asymptotics.json").read_text())
    assert "near_center" in rep["asymptotics"]


def test_profile_smallness_violation(tmp_path, capsys):
    code, _ = run(tmp_path, "profile", "--model", "born_infeld", "--g", "0.5",
                  "--epsilon", "0.9", "--rho", "1")
    assert code == 3
    assert "SmallnessError" in capsys.readouterr().err


def test_profile_flat(tmp_path):
    code, out = run(tmp_path, "profile", "--model", "born_infeld", "--flat", "--g", "0.5",
                    "--epsilon", "0", "--rho", "0", "--ell-hat", "0.1", "--r-max", "100")
    assert code == 0
    rows = (out / "profile.csv").read_text().splitlines()[1:]
    assert {r.split(",")[2] for r in rows} == {"1"}


def test_profile_curved_maxwell_refused(tmp_path):
    code, _ = run(tmp_path, "profile", "--model", "maxwell", "--g", "0.5", "--epsilon", "0.1",
                  "--rho", "1", "--ell-hat", "1")
    assert code == 2


def test_profile_rwn_horizon(tmp_path):
    code, _ = run(tmp_path, "profile", "--model", "maxwell", "--maxwell-closed-form",
                  "--g", "0.5", "--epsilon", "1.5", "--rho", "1", "--ell-hat", "1")
    assert code == 3


def test_profile_plots(tmp_path):
    code, out = run(tmp_path, "profile", *CURVED, "--r-max", "100", "--plots")
    assert code == 0
    assert (out / "profile.png").stat().st_size > 1000


def test_physical_config(tmp_path):
    cfg = write_config(tmp_path, {"model": "born_infeld", "mode": "physical",
                                  "parameters": {"Z": 1, "N_n": 1},
                                  "grid": {"per_decade": 20}})
    code, out = run(tmp_path, "profile", "--config", cfg)
    assert code == 0
    params = json.loads((out / "asymptotics.json").read_text())["parameters"]
    assert abs(params["epsilon"] - 1.80049e-18) < 1e-22


# -- spectrum ----------------------------------------------------------------

def test_spectrum_flat_coulomb(tmp_path):
    code, out = run(tmp_path, "spectrum", *FLAT_COULOMB, "--window", "0.8", "0.99",
                    "--channels", "-1")
    assert code == 0
    doc = json.loads((out / "spectrum.json").read_text())
    energies = [r["energy"] for r in doc["scans"][0]["records"]]
    assert abs(energies[0] - 0.8660254) < 1e-6
    assert abs(energies[1] - 0.9659258) < 1e-6
    assert (out / "spectrum.csv").read_text().startswith("kappa,index,energy,residual,node_count\n")


def test_spectrum_free_empty(tmp_path):
    code, out = run(tmp_path, "spectrum", "--model", "maxwell", "--flat", "--g", "0",
                    "--epsilon", "0", "--rho", "0", "--ell-hat", "1")
    assert code == 0
    doc = json.loads((out / "spectrum.json").read_text())
    assert doc["scans"][0]["records"] == []


def test_spectrum_window_outside_gap(tmp_path):
    code, _ = run(tmp_path, "spectrum", *FLAT_COULOMB, "--window", "-2", "0")
    assert code == 64


def test_spectrum_convergence_failure(tmp_path, monkeypatch):
    from hoffmann_dirac import prufer
    monkeypatch.setattr(prufer, "MAX_STEPS", 3)
    code, _ = run(tmp_path, "spectrum", *FLAT_COULOMB)
    assert code == 4


def test_spectrum_deterministic(tmp_path):
    args = ["spectrum", *CURVED, "--window", "0.9", "0.995", "--channels=-1,1"]
    _, a = run(tmp_path, *args, "--threads", "1", name="a")
    _, b = run(tmp_path, *args, "--threads", "4", name="b")
    _, c = run(tmp_path, *args, "--threads", "1", name="c")
    for name in ("spectrum.json", "spectrum.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes() == (c / name).read_bytes()


# -- diagnostics -------------------------------------------------------------

def checks_by_name(out):
    doc = json.loads((out / "diagnostics.json").read_text())
    return {(c["check"], c["kappa"]): c for c in doc["checks"]}


def test_diagnostics_curved(tmp_path):
    code, out = run(tmp_path, "diagnostics", "--model", "born_infeld", "--g", "0.5",
                    "--epsilon", "0.5", "--rho", "1", "--channels", "1")
    assert code == 0
    c = checks_by_name(out)
    lpc = c[("limit_point_exponent", 1)]
    assert abs(lpc["dominant_magnitude"] - 1.2192) < 0.02 * 1.2192
    assert lpc["pass"] and lpc["exceeds_one"]
    assert c[("gap_ode_oscillation", 1)]["pass"]
    assert c[("cesaro_decay", 1)]["pass"]
    assert c[("bounded_variation", 1)]["pass"]


def test_diagnostics_repulsive_uses_lower(tmp_path):
    code, out = run(tmp_path, "diagnostics", "--model", "born_infeld", "--g", "-0.5",
                    "--epsilon", "0.1", "--rho", "1", "--channels", "-1")
    assert code == 0
    gap = checks_by_name(out)[("gap_ode_oscillation", -1)]
    assert gap["component"] == "lower" and gap["pass"]


def test_diagnostics_inconclusive_probe(tmp_path, monkeypatch):
    from hoffmann_dirac import errors, prufer

    def boom(*a, **k):
        raise errors.ProbeInconclusiveError("fit residual too large")
    monkeypatch.setattr(prufer, "lpc_probe", boom)
    code, _ = run(tmp_path, "diagnostics", *FLAT_COULOMB)
    assert code == 4


# -- compare-coulomb ---------------------------------------------------------

def test_compare_flat_maxwell(tmp_path):
    code, out = run(tmp_path, "compare-coulomb", *FLAT_COULOMB)
    assert code == 0
    doc = json.loads((out / "compare.json").read_text())
    assert doc["channels"][0]["max_abs_deviation"] < 1e-6
    assert (out / "compare.csv").read_text().startswith("kappa,index,energy,oracle,deviation\n")


def test_compare_flat_born_infeld(tmp_path):
    code, out = run(tmp_path, "compare-coulomb", "--model", "born_infeld", "--flat", "--g", "0.5",
                    "--epsilon", "0", "--rho", "0", "--ell-hat", "0.1")
    assert code == 0
    assert json.loads((out / "compare.json").read_text())["channels"][0][
        "deviation_shrinks_with_index"]


def test_compare_curved(tmp_path):
    code, out = run(tmp_path, "compare-coulomb", *CURVED)
    assert code == 0
    assert len((out / "compare.csv").read_text().splitlines()) == 5


# -- config handling ---------------------------------------------------------

@pytest.mark.parametrize("doc", [
    {"model": "born_infeld", "bogus": 1},
    {"model": "born_infeld", "mode": "dimensionless", "parameters": {"g": 0.5}},
    {"model": "born_infeld", "mode": "weird", "parameters": {"g": 0.5, "epsilon": 0.1, "rho": 1}},
    {"model": "born_infeld", "parameters": {"g": "x", "epsilon": 0.1, "rho": 1}},
    {"model": "born_infeld", "parameters": {"g": 0.5, "epsilon": 0.1, "rho": 1},
     "channels": [0]},
    {"model": "born_infeld", "parameters": {"g": 0.5, "epsilon": 0.1, "rho": 1},
     "solver": {"rtol": -1}},
    [1, 2],
])
def test_bad_configs(tmp_path, doc):
    code, _ = run(tmp_path, "profile", "--config", write_config(tmp_path, doc))
    assert code == 64


def test_unreadable_config(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(tmp_path, "profile", "--config", str(bad))[0] == 64
    assert run(tmp_path, "profile", "--config", str(tmp_path / "none.json"))[0] == 64


def test_unknown_argument(tmp_path):
    assert run(tmp_path, "profile", "--frobnicate")[0] == 64
    assert cli.main(["nonsense"]) == 64


def test_flags_override_config(tmp_path):
    cfg = write_config(tmp_path, {"model": "born_infeld",
                                  "parameters": {"g": 0.5, "epsilon": 0.9, "rho": 1},
                                  "grid": {"r_max": 100}})
    assert run(tmp_path, "profile", "--config", cfg, name="a")[0] == 3
    assert run(tmp_path, "profile", "--config", cfg, "--epsilon", "0.1", name="b")[0] == 0


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "hoffmann_dirac", "check-model", "--model",
                           "born_infeld", "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0
    assert (tmp_path / "admissibility.json").exists()
