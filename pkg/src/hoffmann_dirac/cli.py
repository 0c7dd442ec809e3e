"""Command-line interface.

Every run is described by one JSON config; command-line flags override its
fields one-to-one.  Exit codes: 0 success, 2 model not admissible, 3 smallness
(or horizon) violation, 4 convergence or probe failure, 64 bad configuration.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import channel as chan
from . import nled, prufer, spacetime, spectrum
from .errors import (ConfigError, ConvergenceError, DomainError, EigenvalueNotFoundError,
                     HorizonError, InfiniteEnergyError, ProbeInconclusiveError,
                     SmallnessError, StiffnessError)
from .output import write_csv, write_json

EXIT_OK = 0
EXIT_ADMISSIBILITY = 2
EXIT_SMALLNESS = 3
EXIT_CONVERGENCE = 4
EXIT_CONFIG = 64

_PHYSICAL_KEYS = {f.name for f in fields(spacetime.PhysicalParameters)}
_TOP_KEYS = {"model", "mode", "parameters", "flags", "grid", "solver", "channels",
             "spectrum", "diagnostics", "compare"}


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass
class RunConfig:
    model: Optional[object] = None  # builtin name or {"table": path}
    mode: str = "dimensionless"
    parameters: dict = field(default_factory=dict)
    flat: bool = False
    maxwell_closed_form: bool = False
    r_min: Optional[float] = None
    r_max: Optional[float] = None
    per_decade: int = 2000
    rtol: float = 1e-10
    channels: List[int] = field(default_factory=lambda: [-1])
    window: tuple = (0.8, 0.99)
    max_count: int = 20
    diag_lambda: float = 0.5
    diag_decades: int = 3
    compare_count: int = 4

    # -- construction --------------------------------------------------------
    @classmethod
    def from_dict(cls, doc):
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(doc) - _TOP_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls()
        if "model" in doc:
            cfg.model = doc["model"]
        cfg.mode = doc.get("mode", cfg.mode)
        cfg.parameters = dict(doc.get("parameters", {}))
        flags = doc.get("flags", {})
        cfg.flat = bool(flags.get("flat", False))
        cfg.maxwell_closed_form = bool(flags.get("maxwell_closed_form", False))
        grid = doc.get("grid", {})
        cfg.r_min = grid.get("r_min")
        cfg.r_max = grid.get("r_max")
        cfg.per_decade = grid.get("per_decade", cfg.per_decade)
        cfg.rtol = doc.get("solver", {}).get("rtol", cfg.rtol)
        if "channels" in doc:
            cfg.channels = list(doc["channels"])
        spec = doc.get("spectrum", {})
        if "window" in spec:
            cfg.window = tuple(spec["window"])
        cfg.max_count = spec.get("max_count", cfg.max_count)
        diag = doc.get("diagnostics", {})
        cfg.diag_lambda = diag.get("lambda", cfg.diag_lambda)
        cfg.diag_decades = diag.get("decades", cfg.diag_decades)
        cfg.compare_count = doc.get("compare", {}).get("max_count", cfg.compare_count)
        return cfg

    def validate(self, need_params=True):
        if self.model is None:
            raise ConfigError("no model given (config 'model' or --model)")
        if self.mode not in ("dimensionless", "physical"):
            raise ConfigError(f"mode must be 'dimensionless' or 'physical', got {self.mode!r}")
        p = self.parameters
        if need_params:
            if self.mode == "dimensionless":
                for key in ("g", "epsilon", "rho"):
                    if key not in p:
                        raise ConfigError(f"dimensionless mode needs parameter {key!r}")
                extra = set(p) - {"g", "epsilon", "rho", "ell_hat"}
            else:
                extra = set(p) - _PHYSICAL_KEYS
            if extra:
                raise ConfigError(f"unexpected parameters for {self.mode} mode: {sorted(extra)}")
            for k, v in p.items():
                if v is not None and (isinstance(v, bool) or not isinstance(v, (int, float))):
                    raise ConfigError(f"parameter {k!r} must be a number")
        if not self.channels or any(int(k) != k or k == 0 for k in self.channels):
            raise ConfigError("channels must be a nonempty list of nonzero integers")
        lo, hi = self.window
        if not -1.0 < lo < hi <= 1.0:
            raise ConfigError(f"window {list(self.window)} is not inside the gap (-1, 1)")
        if not self.rtol > 0:
            raise ConfigError("solver tolerance must be positive")
        if self.r_max is not None and not self.r_max > 0:
            raise ConfigError("grid r_max must be positive")
        if int(self.per_decade) != self.per_decade or self.per_decade < 10:
            raise ConfigError("grid per_decade must be an integer >= 10")
        if int(self.max_count) != self.max_count or self.max_count < 1:
            raise ConfigError("spectrum max_count must be a positive integer")
        if not 1 <= self.diag_decades <= 4:
            raise ConfigError("diagnostics decades must be in 1..4")

    # -- builders ------------------------------------------------------------
    def build_model(self):
        m = self.model
        if isinstance(m, dict) and "table" in m:
            return nled.load_table(m["table"])
        if isinstance(m, str):
            return nled.model_from_name(m)
        raise ConfigError(f"model must be a name or {{'table': path}}, got {m!r}")

    def build_parameters(self, model, constants):
        flags = {"flat": self.flat, "maxwell_closed_form": self.maxwell_closed_form}
        if self.mode == "physical":
            phys = spacetime.PhysicalParameters(**self.parameters)
            if constants is None:
                raise InfiniteEnergyError("physical mode needs a finite-energy model", "0")
            params = spacetime.derive_parameters(phys, model, constants)
            return spacetime.dimensionless_parameters(params.g, params.epsilon, params.rho,
                                                      constants, **flags)
        p = self.parameters
        ell = p.get("ell_hat")
        if ell is None and (constants is None or p["epsilon"] <= 0):
            ell = 1.0 if (self.flat or constants is None) else None
            if ell is None:
                raise ConfigError("ell_hat is required when epsilon = 0")
        return spacetime.dimensionless_parameters(p["g"], p["epsilon"], p["rho"], constants,
                                                  ell_hat=ell, **flags)

    def grid(self, default_r_max):
        r_max = self.r_max if self.r_max is not None else default_r_max
        return spacetime.GridConfig(r_min=self.r_min, r_max=float(r_max),
                                    per_decade=int(self.per_decade))


def _constants_or_none(model):
    try:
        return nled.compute_constants(model)
    except InfiniteEnergyError:
        return None


def _spectral_r_max(params, count):
    g = abs(params.g)
    if g == 0:
        return 1e3
    return min(max(1e3, 50.0 * (count + 2) ** 2 / g), 1e7)


def _build(cfg, default_r_max):
    model = cfg.build_model()
    constants = _constants_or_none(model)
    params = cfg.build_parameters(model, constants)
    r_max = default_r_max(params) if callable(default_r_max) else default_r_max
    profile = spacetime.build_profile(params, model, cfg.grid(r_max), constants)
    return model, constants, params, profile


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_check_model(cfg, out, opts):
    cfg.validate(need_params=False)
    model = cfg.build_model()
    report = nled.check_admissibility(model)
    constants = _constants_or_none(model)
    doc = {"report": report.as_dict(),
           "constants": None if constants is None else constants.as_dict(),
           "K": None if constants is None else nled.potential_center_identity(model)}
    write_json(doc, out / "admissibility.json")
    return EXIT_OK if report.passed else EXIT_ADMISSIBILITY


def cmd_profile(cfg, out, opts):
    cfg.validate()
    _, _, params, profile = _build(cfg, lambda p: 1e3 * max(1.0, p.ell_hat))
    profile.to_csv(out / "profile.csv")
    report = spacetime.asymptotics_report(profile)
    write_json({"parameters": params.as_dict(), "asymptotics": report},
               out / "asymptotics.json")
    if opts.plots:
        from .plotting import plot_profile
        plot_profile(profile, out / "profile.png")
    return EXIT_OK


def cmd_spectrum(cfg, out, opts):
    cfg.validate()
    _, _, params, profile = _build(cfg, lambda p: _spectral_r_max(p, cfg.max_count))
    scans, clusters = [], []
    for k in cfg.channels:
        ch = chan.ChannelSpec(int(k))
        scan = spectrum.scan_spectrum(profile, ch, cfg.window, max_count=int(cfg.max_count),
                                      threads=opts.threads, rtol=cfg.rtol)
        scans.append(scan)
        if len(scan.records) >= 5:
            clusters.append({"kappa": ch.kappa,
                             **spectrum.cluster_report(scan, profile)})
    write_json({"parameters": params.as_dict(), "r_max": profile.r_max,
                "scans": [s.as_dict() for s in scans], "cluster_reports": clusters},
               out / "spectrum.json")
    rows = [(r.kappa, r.index, r.energy, r.residual, r.node_count)
            for s in scans for r in s.records]
    write_csv(["kappa", "index", "energy", "residual", "node_count"], rows,
              out / "spectrum.csv")
    if opts.plots:
        from .plotting import plot_spectrum
        plot_spectrum(scans, out / "spectrum.png")
    return EXIT_OK


def cmd_diagnostics(cfg, out, opts):
    cfg.validate()
    _, _, params, profile = _build(cfg, 2e4)
    checks = []
    x_gamma = np.logspace(3, 4, 21)
    gamma_series = {}
    for k in cfg.channels:
        ch = chan.ChannelSpec(int(k))
        lpc = prufer.lpc_probe(profile, ch)
        checks.append({"check": "limit_point_exponent", "kappa": ch.kappa,
                       "pass": lpc["dominant_magnitude"] > 0.5,
                       "exceeds_one": lpc["dominant_magnitude"] > 1.0, **lpc})
        bnd = prufer.prufer_boundedness_probe(profile, ch, cfg.diag_lambda, cfg.diag_decades)
        checks.append({"check": "prufer_boundedness", "kappa": ch.kappa,
                       "lambda": cfg.diag_lambda, "pass": bnd["decreasing"], **bnd})
        xs = [1e2, 1e3, 1e4]
        means = chan.cesaro_decay(profile, ch, 1.0, xs)
        checks.append({"check": "cesaro_decay", "kappa": ch.kappa, "x_hat": xs,
                       "means": means, "ratio": float(means[0] / means[-1])
                       if means[-1] > 0 else math.inf,
                       "pass": bool(means[-1] <= means[0] / 10 or means[0] == 0)})
        bv = chan.bv_decay(profile, ch, np.logspace(1, 4, 31))
        sups = {key: bv[key] for key in ("sup_dp", "sup_dv", "sup_df")}
        checks.append({"check": "bounded_variation", "kappa": ch.kappa, "x_range": [10.0, 1e4],
                       "pass": all(math.isfinite(v) for v in sups.values()), **sups})
        component = "upper" if params.g >= 0 else "lower"
        x2g = x_gamma ** 2 * prufer.gap_ode_gamma(profile, ch, component, x_gamma)
        gamma_series[f"kappa={ch.kappa} {component}"] = x2g
        entry = {"check": "gap_ode_oscillation", "kappa": ch.kappa, "component": component,
                 "x_hat": x_gamma, "x2_gamma": x2g, "max_x2_gamma": float(x2g.max())}
        if params.g == 0:
            entry["expected_limit"] = float(ch.kappa ** 2 - ch.kappa)
            entry["pass"] = bool(x2g[-1] > -0.25)
            entry["oscillatory"] = False
        else:
            entry["pass"] = bool(np.all(x2g < -0.25))
            entry["oscillatory"] = entry["pass"]
        checks.append(entry)
    write_json({"parameters": params.as_dict(), "checks": checks}, out / "diagnostics.json")
    if opts.plots:
        from .plotting import plot_gamma
        plot_gamma(x_gamma, gamma_series, out / "gap_ode.png")
    return EXIT_OK


def cmd_compare_coulomb(cfg, out, opts):
    cfg.validate()
    n = int(cfg.compare_count)
    _, _, params, profile = _build(cfg, lambda p: _spectral_r_max(p, n))
    rows, summary = [], []
    for k in cfg.channels:
        ch = chan.ChannelSpec(int(k))
        records = [spectrum.find_eigenvalue(profile, ch, i, rtol=cfg.rtol) for i in range(n)]
        scan = spectrum.SpectrumScanResult(ch.kappa, (-1.0, 1.0), records, False, n)
        table = spectrum.compare_with_coulomb(scan, params.g)
        rows.extend((r["kappa"], r["index"], r["energy"], r["oracle"], r["deviation"])
                    for r in table["rows"])
        summary.append({"kappa": ch.kappa, "max_abs_deviation": table["max_abs_deviation"],
                        "deviation_shrinks_with_index": table["deviation_shrinks_with_index"]})
    write_csv(["kappa", "index", "energy", "oracle", "deviation"], rows, out / "compare.csv")
    write_json({"parameters": params.as_dict(), "channels": summary}, out / "compare.json")
    return EXIT_OK


COMMANDS = {"check-model": cmd_check_model, "profile": cmd_profile,
            "spectrum": cmd_spectrum, "diagnostics": cmd_diagnostics,
            "compare-coulomb": cmd_compare_coulomb}


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _int_list(text):
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser():
    common = _Parser(add_help=False)
    g = common.add_argument_group("run options")
    g.add_argument("--config", type=Path, help="JSON run configuration")
    g.add_argument("--out", type=Path, default=Path("."), help="output directory")
    g.add_argument("--threads", type=int, default=1, help="worker threads for eigen searches")
    g.add_argument("--seedless", action="store_true",
                   help="accepted for symmetry; every computation is deterministic")
    g.add_argument("--plots", action="store_true", help="also render PNG figures")
    o = common.add_argument_group("config overrides")
    o.add_argument("--model", help="born_infeld, maxwell, or a path to a 'mu zeta' table")
    o.add_argument("--mode", choices=["dimensionless", "physical"])
    o.add_argument("--g", type=float)
    o.add_argument("--epsilon", type=float)
    o.add_argument("--rho", type=float)
    o.add_argument("--ell-hat", type=float)
    o.add_argument("--Z", type=int)
    o.add_argument("--N-n", type=int)
    o.add_argument("--flat", action="store_true", default=None)
    o.add_argument("--maxwell-closed-form", action="store_true", default=None)
    o.add_argument("--r-max", type=float)
    o.add_argument("--per-decade", type=int)
    o.add_argument("--rtol", type=float)
    o.add_argument("--channels", type=_int_list, help="comma-separated kappa values")
    o.add_argument("--window", type=float, nargs=2, metavar=("LO", "HI"))
    o.add_argument("--max-count", type=int)
    o.add_argument("--lambda", dest="diag_lambda", type=float)

    parser = _Parser(prog="hoffmann-dirac",
                     description="Dirac bound states on nonlinear-electrodynamics backgrounds.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {"check-model": "certify a vacuum law and compute its constants",
             "profile": "tabulate the background and check its asymptotics",
             "spectrum": "scan gap eigenvalues per channel",
             "diagnostics": "numerical checks of the spectral-theory hypotheses",
             "compare-coulomb": "compare low states with the point-charge levels"}
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text)
    return parser


def _apply_overrides(cfg, args):
    if args.model is not None:
        m = args.model
        cfg.model = {"table": m} if Path(m).suffix or "/" in m else m
    if args.mode is not None:
        cfg.mode = args.mode
    for key, attr in (("g", "g"), ("epsilon", "epsilon"), ("rho", "rho"),
                      ("ell_hat", "ell_hat"), ("Z", "Z"), ("N_n", "N_n")):
        val = getattr(args, attr)
        if val is not None:
            cfg.parameters[key] = val
    for attr in ("flat", "maxwell_closed_form", "r_max", "per_decade", "rtol", "channels",
                 "max_count", "diag_lambda"):
        val = getattr(args, attr)
        if val is not None:
            setattr(cfg, attr, val)
    if args.window is not None:
        cfg.window = tuple(args.window)
    return cfg


def load_config(args):
    if args.config is None:
        return RunConfig()
    try:
        doc = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {args.config}: {exc}") from None
    return RunConfig.from_dict(doc)


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        cfg = _apply_overrides(load_config(args), args)
        args.out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, args.out, args)
    except (ConfigError, DomainError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfiniteEnergyError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ADMISSIBILITY
    except (SmallnessError, HorizonError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SMALLNESS
    except (EigenvalueNotFoundError, ConvergenceError, StiffnessError,
            ProbeInconclusiveError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (ValueError, TypeError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
