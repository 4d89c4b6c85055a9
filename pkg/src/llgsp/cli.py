"""Command-line front end.

Every command reads settings from (lowest to highest precedence) built-in
defaults, an optional ``--config`` file of ``key = value`` lines, and flags.
Defaults reproduce the published benchmark settings, so e.g.
``llgsp accuracy-time-1d`` with no flags runs the 1D temporal table.

Exit codes: 0 success, 1 numerical failure (blowup, solver, projection) or
I/O error, 2 usage error.
"""

from __future__ import annotations

import argparse
import configparser
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence

from . import harness
from .checks import LAPLACIAN_LIMITS, ROTATION_LIMITS, laplacian_properties, rotation_properties
from .errors import NumericalFailure
from .grid import Grid, max_unit_deviation, norm_linf, write_field_csv
from .manufactured import PROFILE_DIM, PROFILE_IDS, initial_profile
from .schemes import FORCING_MODES, FORCING_TIMES, SCHEMES, SchemeConfig, evolve
from .solvers import METHODS, SolverConfig

logger = logging.getLogger("llgsp")

COMMANDS = ("accuracy-time-1d", "accuracy-space-1d", "accuracy-3d", "norm-1d", "norm-3d",
            "evolve", "compare", "selftest")


class UsageError(Exception):
    pass


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.replace(";", ",").split(",") if v.strip()]


def _bool(text: str) -> bool:
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# key -> (converter, help)
KEYS: dict[str, tuple[Any, str]] = {
    "alpha": (float, "Gilbert damping (>= 0)"),
    "T": (float, "final time"),
    "T0": (float, "time parameter of the initial profile"),
    "k": (float, "time step"),
    "ks": (_float_list, "comma-separated time steps"),
    "n": (int, "cells per axis"),
    "ns": (_int_list, "comma-separated cells per axis"),
    "nt": (int, "number of time steps (overrides k)"),
    "scheme": (str, f"one of {', '.join(SCHEMES)}"),
    "forcing": (str, f"one of {', '.join(FORCING_MODES)}"),
    "forcing_time": (str, f"one of {', '.join(FORCING_TIMES)}"),
    "profile": (str, f"one of {', '.join(PROFILE_IDS)}"),
    "method": (str, f"linear solver, one of {', '.join(METHODS)}"),
    "rel_tol": (float, "linear solver relative tolerance"),
    "finest": (_bool, "include the 32^3 level in 3D studies"),
    "diagnostics": (_bool, "add solver iteration/residual columns to CSV output"),
    "record_every": (int, "norm studies: record deviation every N steps"),
    "out": (str, "output directory"),
}

COMMON = {"alpha": 0.01, "T": 0.1, "scheme": "proposed", "method": "auto", "rel_tol": 1e-10,
          "out": "results", "diagnostics": False}

DEFAULTS: dict[str, dict[str, Any]] = {
    "accuracy-time-1d": {**COMMON, "ks": list(harness.TABLE1_KS), "n": 2000,
                         "forcing": "direct", "forcing_time": "start"},
    "accuracy-space-1d": {**COMMON, "ns": list(harness.TABLE2_NS), "k": 1e-6,
                          "forcing": "direct", "forcing_time": "start"},
    "accuracy-3d": {**COMMON, "finest": False, "forcing": "direct", "forcing_time": "start"},
    "norm-1d": {**COMMON, "ks": list(harness.TABLE1_KS), "n": 2000, "T0": 0.01,
                "profile": "cos1d", "record_every": 1},
    "norm-3d": {**COMMON, "finest": False, "T0": 0.01, "profile": "xyz3d", "record_every": 1},
    "evolve": {**COMMON, "profile": "cos1d", "n": None, "nt": 5, "T0": 0.0, "forcing": "none"},
    "compare": {**COMMON, "profile": "cos1d", "n": None, "nt": 5, "T0": 0.01, "forcing": "none"},
    "selftest": {"out": "results"},
}

# keys each command understands (anything else is a usage error)
ALLOWED = {cmd: set(d) | ({"k"} if cmd in ("evolve", "compare") else set())
           for cmd, d in DEFAULTS.items()}


@dataclass
class RunConfig:
    command: str
    values: dict[str, Any] = field(default_factory=dict)
    explicit: set[str] = field(default_factory=set)

    def __getattr__(self, name: str) -> Any:
        try:
            return self.__dict__["values"][name]
        except KeyError:
            raise AttributeError(name) from None

    def solver(self) -> SolverConfig:
        return SolverConfig(rel_tol=self.values["rel_tol"], method=self.values["method"])


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="llgsp", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd in COMMANDS:
        p = sub.add_parser(cmd)
        p.add_argument("--config", help="file of key = value settings")
        for key in sorted(ALLOWED[cmd]):
            conv, text = KEYS[key]
            flag = "--" + key.replace("_", "-")
            names = [flag] if flag == "--" + key else [flag, "--" + key]
            p.add_argument(*names, dest=key, default=argparse.SUPPRESS, help=text)
    return parser


def _read_config_file(path: str) -> dict[str, str]:
    text = Path(path).read_text()
    cp = configparser.ConfigParser(delimiters=("=",), comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise UsageError(f"{path}: {exc}") from exc
    values: dict[str, str] = {}
    for section in cp.sections():
        values.update(cp[section])
    return values


def _convert(key: str, raw: Any) -> Any:
    conv = KEYS[key][0]
    if not isinstance(raw, str):
        return raw
    try:
        return conv(raw)
    except ValueError as exc:
        raise UsageError(f"bad value for {key}: {raw!r}") from exc


def _validate(cfg: RunConfig) -> None:
    v = cfg.values

    def need(cond: bool, msg: str) -> None:
        if not cond:
            raise UsageError(msg)

    if "alpha" in v:
        need(v["alpha"] >= 0, "alpha must be >= 0")
    if "T" in v:
        need(v["T"] > 0, "T must be > 0")
    if v.get("k") is not None:
        need(v["k"] > 0, "k must be > 0")
    if "ks" in v:
        need(len(v["ks"]) >= 2 and all(k > 0 for k in v["ks"]), "ks needs >= 2 positive values")
    if "ns" in v:
        need(len(v["ns"]) >= 2 and all(n >= 2 for n in v["ns"]), "ns needs >= 2 values >= 2")
    if v.get("n") is not None:
        need(v["n"] >= 2, "n must be >= 2")
    if "nt" in v and v["nt"] is not None:
        need(v["nt"] >= 1, "nt must be >= 1")
    if "rel_tol" in v:
        need(v["rel_tol"] > 0, "rel_tol must be > 0")
    if "record_every" in v:
        need(v["record_every"] >= 1, "record_every must be >= 1")
    for key, choices in (("scheme", SCHEMES), ("forcing", FORCING_MODES),
                         ("forcing_time", FORCING_TIMES), ("profile", PROFILE_IDS),
                         ("method", METHODS)):
        if key in v:
            need(v[key] in choices, f"{key} must be one of {', '.join(choices)}")
    if cfg.command in ("norm-1d", "norm-3d"):
        dim = 1 if cfg.command == "norm-1d" else 3
        need(PROFILE_DIM[v["profile"]] == dim, f"profile {v['profile']} is not {dim}D")
    if cfg.command == "compare":
        need(v["scheme"] == "proposed", "compare always runs proposed against bdf1_projection")
    three_d = cfg.command in ("accuracy-3d", "norm-3d") or (
        "profile" in v and PROFILE_DIM[v["profile"]] == 3)
    if v.get("method") == "direct":
        need(not three_d, "the direct banded solver is 1D only")
    if v.get("method") == "cg" and cfg.command != "selftest":
        need(v.get("scheme") in ("scheme1_explicit", "scheme3_semi_implicit"),
             "cg needs a symmetric system; the predictor solve is nonsymmetric")


def parse_config(argv: Optional[Sequence[str]] = None) -> RunConfig:
    """Parse flags (and an optional config file) into a validated ``RunConfig``.

    Raises ``UsageError`` for anything invalid; argparse itself exits with 2 on
    malformed flags.
    """
    args = vars(_build_parser().parse_args(argv))
    command = args.pop("command")
    verbose = args.pop("verbose", False)
    config_path = args.pop("config", None)

    values = dict(DEFAULTS[command])
    explicit: set[str] = set()
    if config_path:
        try:
            file_values = _read_config_file(config_path)
        except OSError as exc:
            raise UsageError(f"cannot read config file: {exc}") from exc
        for key, raw in file_values.items():
            if key not in ALLOWED[command]:
                raise UsageError(f"unknown key {key!r} for {command}")
            values[key] = _convert(key, raw)
            explicit.add(key)
    for key, raw in args.items():
        values[key] = _convert(key, raw)
        explicit.add(key)
    values["verbose"] = verbose
    cfg = RunConfig(command, values, explicit)
    _validate(cfg)
    return cfg


# ---------------------------------------------------------------- commands

def _outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _print_table(table) -> None:
    if isinstance(table, harness.NormTable):
        for r in table.rows:
            print(f"k={r.k:<12.6g} h={r.h:<10.6g} max ||m|-1| = {r.max_unit_deviation:.3e}")
        return
    for r in table.rows:
        print(f"k={r.k:<12.6g} h={r.h:<10.6g} Linf={r.err_linf:.6e} L2={r.err_l2:.6e} "
              f"H1={r.err_h1:.6e}")
    for p, orders in table.orders.items():
        print(f"order vs {p}: " + "  ".join(f"{c}={o:.4f}" for c, o in orders.items()))


def _accuracy_kwargs(cfg: RunConfig) -> dict:
    return dict(alpha=cfg.alpha, T=cfg.T, scheme=cfg.scheme, forcing_mode=cfg.forcing,
                forcing_time=cfg.forcing_time, solver=cfg.solver(), diagnostics=cfg.diagnostics)


def _run_study(cfg: RunConfig) -> int:
    out = _outdir(cfg)
    cmd = cfg.command
    try:
        if cmd == "accuracy-time-1d":
            table = harness.run_temporal_study_1d(cfg.ks, cfg.n, **_accuracy_kwargs(cfg))
            name = "table1_temporal_1d.csv"
        elif cmd == "accuracy-space-1d":
            table = harness.run_spatial_study_1d(cfg.ns, cfg.k, **_accuracy_kwargs(cfg))
            name = "table2_spatial_1d.csv"
        elif cmd == "accuracy-3d":
            table = harness.run_coupled_study_3d(include_finest=cfg.finest, **_accuracy_kwargs(cfg))
            name = "table3_coupled_3d.csv"
        elif cmd == "norm-1d":
            table = harness.run_norm_study(1, ks=cfg.ks, n=cfg.n, alpha=cfg.alpha, T=cfg.T,
                                           T0=cfg.T0, profile=cfg.profile, scheme=cfg.scheme,
                                           solver=cfg.solver(), record_every=cfg.record_every)
            name = "table4_norm_1d.csv"
        else:
            table = harness.run_norm_study(3, levels=harness.coupled_levels(cfg.finest),
                                           alpha=cfg.alpha, T=cfg.T, T0=cfg.T0,
                                           profile=cfg.profile, scheme=cfg.scheme,
                                           solver=cfg.solver(), record_every=cfg.record_every)
            name = "table5_norm_3d.csv"
    except harness.StudyAborted as exc:
        partial = exc.partial
        if len(getattr(partial, "rows", [])) >= 2 or isinstance(partial, harness.NormTable):
            harness.write_table_csv(partial, out / ("partial_" + _study_name(cmd)))
        raise
    _print_table(table)
    harness.write_table_csv(table, out / name, diagnostics=cfg.diagnostics)
    print(f"wrote {out / name}")
    return 0


def _study_name(cmd: str) -> str:
    return {
        "accuracy-time-1d": "table1_temporal_1d.csv",
        "accuracy-space-1d": "table2_spatial_1d.csv",
        "accuracy-3d": "table3_coupled_3d.csv",
        "norm-1d": "table4_norm_1d.csv",
        "norm-3d": "table5_norm_3d.csv",
    }[cmd]


def _evolve_setup(cfg: RunConfig):
    dim = PROFILE_DIM[cfg.profile]
    n = cfg.n if cfg.n is not None else (2000 if dim == 1 else 20)
    grid = Grid.uniform(n, dim)
    m0 = initial_profile(cfg.profile, grid, cfg.T0)
    if "k" in cfg.explicit and "nt" not in cfg.explicit:
        k = cfg.k
    else:
        k = cfg.T / cfg.nt
    return grid, m0, k


def _scheme_config(cfg: RunConfig, scheme: str, k: float) -> SchemeConfig:
    forcing = cfg.forcing
    if forcing != "none":
        raise UsageError("evolve/compare run without a source term; use --forcing=none")
    return SchemeConfig(scheme=scheme, alpha=cfg.alpha, k=k, forcing_mode="none",
                        solver=cfg.solver())


def _run_evolve(cfg: RunConfig) -> int:
    out = _outdir(cfg)
    grid, m0, k = _evolve_setup(cfg)
    m, traj = evolve(m0, 0.0, cfg.T, _scheme_config(cfg, cfg.scheme, k))
    write_field_csv(m0, out / f"field_{cfg.profile}_initial.csv")
    path = out / f"field_{cfg.profile}_{cfg.scheme}.csv"
    write_field_csv(m, path)
    steps = len(traj.times) - 1
    print(f"{steps} steps of {cfg.scheme} on {grid.cells}: max ||m|-1| = {max_unit_deviation(m):.3e}")
    print(f"wrote {path}")
    return 0


def _run_compare(cfg: RunConfig) -> int:
    out = _outdir(cfg)
    grid, m0, k = _evolve_setup(cfg)
    proposed, _ = evolve(m0, 0.0, cfg.T, _scheme_config(cfg, "proposed", k))
    projected, _ = evolve(m0, 0.0, cfg.T, _scheme_config(cfg, "bdf1_projection", k))
    write_field_csv(m0, out / f"compare_{cfg.profile}_initial.csv")
    write_field_csv(proposed, out / f"compare_{cfg.profile}_proposed.csv")
    write_field_csv(projected, out / f"compare_{cfg.profile}_bdf1_projection.csv")
    diff = norm_linf(proposed - projected)
    dev_p = max_unit_deviation(proposed)
    dev_b = max_unit_deviation(projected)
    with open(out / f"compare_{cfg.profile}_summary.csv", "w") as fh:
        fh.write("linf_difference,max_unit_deviation_proposed,max_unit_deviation_projection\n")
        fh.write(f"{diff:.17g},{dev_p:.17g},{dev_b:.17g}\n")
    print(f"Linf(proposed - projection) = {diff:.3e}; "
          f"max ||m|-1|: proposed {dev_p:.3e}, projection {dev_b:.3e}")
    return 0


def _run_selftest(cfg: RunConfig) -> int:
    ok = True
    for name, results, limits in (("rotation", rotation_properties(), ROTATION_LIMITS),
                                  ("laplacian", laplacian_properties(), LAPLACIAN_LIMITS)):
        for key, value in results.items():
            passed = value <= limits[key]
            ok &= passed
            print(f"{'PASS' if passed else 'FAIL'} {name}.{key}: {value:.3e} (limit {limits[key]:.0e})")
    return 0 if ok else 1


def run(cfg: RunConfig) -> int:
    if cfg.command == "selftest":
        return _run_selftest(cfg)
    if cfg.command == "evolve":
        return _run_evolve(cfg)
    if cfg.command == "compare":
        return _run_compare(cfg)
    return _run_study(cfg)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        print(f"llgsp: usage error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # argparse
        return 0 if exc.code in (0, None) else 2
    logging.basicConfig(level=logging.INFO if cfg.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return run(cfg)
    except UsageError as exc:
        print(f"llgsp: usage error: {exc}", file=sys.stderr)
        return 2
    except NumericalFailure as exc:
        print(f"llgsp: numerical failure: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"llgsp: I/O error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # keep the exit-code contract total
        print(f"llgsp: internal error: {exc!r}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
