"""Command-line entry point.

Subcommands: `sigma`, `simulate {fbm|fbmbt}`, `verify <check|all>`.
Configuration may come from a flat key=value file (--config); explicit
flags override file values.  Every emitted artifact embeds the effective
config, the master seed, and the package version, and is byte-reproducible
from that embedded config.

Exit codes: 0 success, 1 verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import inspect
import json
import math
import sys
from pathlib import Path

import numpy as np

from .acceptance import ACCEPTANCE, DEFAULT_MASTER_SEEDS, run_check
from .brownian_time import identity_residuals, sample_fbmbt
from .fbm import GridSpec, SeedSpec, sample_fbm
from .gaussian import bivariate_odd_moment, fgn_correlation, limit_sigma
from .variations import (
    endpoint_variation,
    midpoint_variation,
    trapezoidal_variation,
    unweighted_variation,
)
from .version import VERSION
from .weights import REGISTRY, get_weight


class UsageError(Exception):
    """Invalid parameters; maps to exit code 2 with a one-line diagnostic."""


def load_config(path: str) -> dict:
    """Flat key=value config file; '#' starts a comment."""
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, _, val = line.partition("=")
        values[key.strip().replace("-", "_")] = val.strip()
    return values


_CASTS = {
    "h": float, "t": float, "t_min": float, "tol": float,
    "r": int, "n": int, "m": int, "replicates": int, "seed": int, "threads": int,
    "f": str, "out": str, "dump_paths": str, "dump_series": str, "dump_walk": str,
}


def merge_config(args: argparse.Namespace, file_cfg: dict, defaults: dict) -> dict:
    """Effective config: hard defaults < config file < explicit flags."""
    merged = dict(defaults)
    for key, raw in file_cfg.items():
        if key not in _CASTS:
            raise UsageError(f"unknown config key '{key}'")
        try:
            merged[key] = _CASTS[key](raw)
        except ValueError:
            raise UsageError(f"config key '{key}': cannot parse {raw!r}") from None
    for key in defaults:
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
    return merged


def _emit(document: dict, out: str | None) -> None:
    text = json.dumps(document, sort_keys=True, indent=1) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _write_csv(path: Path, header: str, columns) -> None:
    rows = zip(*columns)
    with open(path, "w", newline="") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def cmd_sigma(args) -> int:
    cfg = merge_config(args, _file_cfg(args), {"r": 2, "h": 0.25, "tol": 1e-8, "out": None})
    r, h, tol = cfg["r"], cfg["h"], cfg["tol"]
    if r < 1:
        raise UsageError(f"--r must be >= 1, got {r}")
    if not 0.0 < h < 0.5:
        raise UsageError(f"--h must lie in (0, 1/2) for the variance constant, got {h}")
    if tol <= 0.0:
        raise UsageError("--tol must be positive")
    sigma = limit_sigma(r, h, tol)
    print(f"{'r':>3} {'H':>8} {'sigma':>18} {'sigma^2':>18} {'tail_bound':>12}")
    print(f"{r:>3} {h:>8.4g} {sigma.value:>18.12g} {sigma.value ** 2:>18.12g} "
          f"{sigma.tail_bound:>12.3g}")
    if args.verbose:
        print("\n  j        rho_H(j)    series term (2*E[..])   running sigma^2")
        running = float(sum(c * c * math.factorial(w)
                            for c, w in zip(*_coeff_pairs(r))))
        for j in range(1, 21):
            rho = fgn_correlation(h, j)
            term = 2.0 * bivariate_odd_moment(r, rho)
            running += term
            print(f"{j:>3} {rho:>15.8g} {term:>22.10g} {running:>18.10g}")
        print(f"  ... ({sigma.terms_used} truncated-series terms used in total)")
    document = {
        "command": "sigma",
        "version": VERSION,
        "config": cfg,
        "master_seed": None,
        "results": {
            "sigma": sigma.value,
            "sigma_sq": sigma.value**2,
            "tail_bound": sigma.tail_bound,
            "terms_used": sigma.terms_used,
        },
    }
    if cfg["out"]:
        _emit(document, cfg["out"])
    return 0


def _coeff_pairs(r):
    from .gaussian import hermite_coeffs

    hc = hermite_coeffs(r)
    return hc.c, hc.orders


def cmd_simulate_fbm(args) -> int:
    defaults = {"h": 0.25, "n": 10, "t": 1.0, "t_min": 0.0, "r": 1, "f": "one",
                "seed": DEFAULT_MASTER_SEEDS[0], "out": None,
                "dump_paths": None, "dump_series": None}
    cfg = merge_config(args, _file_cfg(args), defaults)
    if cfg["n"] < 1:
        raise UsageError(f"--n must be >= 1, got {cfg['n']}")
    if not 0.0 < cfg["h"] < 1.0:
        raise UsageError(f"--h must lie in (0, 1), got {cfg['h']}")
    if cfg["t"] <= 0.0:
        raise UsageError("--t must be positive")
    if cfg["r"] < 1:
        raise UsageError("--r must be >= 1")
    if cfg["f"] not in REGISTRY:
        raise UsageError(f"--f must be one of {sorted(REGISTRY)}")
    try:
        grid = GridSpec(level=cfg["n"], t_min=cfg["t_min"], t_max=cfg["t"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    seed = SeedSpec(cfg["seed"], 0)
    path = sample_fbm(cfg["h"], grid, seed)
    results = {"terminal_value": path.value_at(cfg["t"]),
               "points": grid.npoints}
    if cfg["dump_paths"]:
        directory = Path(cfg["dump_paths"])
        directory.mkdir(parents=True, exist_ok=True)
        _write_csv(directory / "fbm_path.csv", "t,value", (grid.times(), path.values))
        results["path_csv"] = str(directory / "fbm_path.csv")
    if cfg["dump_series"]:
        f = get_weight(cfg["f"])
        r = cfg["r"]
        phi = midpoint_variation(path, f, r)
        psi = trapezoidal_variation(path, f, r)
        left = endpoint_variation(path, f, r, "left")
        right = endpoint_variation(path, f, r, "right")
        unw = unweighted_variation(path, r)
        directory = Path(cfg["dump_series"])
        directory.mkdir(parents=True, exist_ok=True)
        _write_csv(
            directory / "series.csv",
            "t,phi,psi,left,right,unweighted",
            (phi.times, phi.values, psi.values, left.values, right.values, unw.values),
        )
        results["series_csv"] = str(directory / "series.csv")
    _emit({"command": "simulate fbm", "version": VERSION, "config": cfg,
           "master_seed": cfg["seed"], "results": results}, cfg["out"])
    return 0


def cmd_simulate_fbmbt(args) -> int:
    defaults = {"h": 0.25, "n": 8, "t": 1.0, "r": 2, "f": "one",
                "seed": DEFAULT_MASTER_SEEDS[0], "out": None, "dump_walk": None,
                "tol": 1e-9}
    cfg = merge_config(args, _file_cfg(args), defaults)
    if cfg["n"] < 2 or cfg["n"] % 2:
        raise UsageError(f"--n must be a positive even integer, got {cfg['n']}")
    if not 0.0 < cfg["h"] < 1.0:
        raise UsageError(f"--h must lie in (0, 1), got {cfg['h']}")
    if cfg["r"] < 1:
        raise UsageError("--r must be >= 1")
    if math.floor(cfg["t"] * 2 ** cfg["n"]) < 1:
        raise UsageError("--t too small: the walk needs at least one step")
    if cfg["f"] not in REGISTRY:
        raise UsageError(f"--f must be one of {sorted(REGISTRY)}")
    seed = SeedSpec(cfg["seed"], 0)
    sample = sample_fbmbt(cfg["h"], cfg["n"], cfg["t"], seed)
    res = identity_residuals(sample, get_weight(cfg["f"]), cfg["r"], cfg["t"])
    results = {
        "walk_variation": res["direct"],
        "spatial_variation_at_terminal": res["composed"],
        "terminal_site": res["terminal_site"],
        "residual_crossing": res["residual_crossing"],
        "residual_composition": res["residual_composition"],
    }
    if cfg["dump_walk"]:
        directory = Path(cfg["dump_walk"])
        directory.mkdir(parents=True, exist_ok=True)
        k = np.arange(len(sample.walk.s))
        _write_csv(directory / "walk.csv", "k,S_k,Z_k",
                   (k, sample.walk.s, sample.z_values()))
        results["walk_csv"] = str(directory / "walk.csv")
    _emit({"command": "simulate fbmbt", "version": VERSION, "config": cfg,
           "master_seed": cfg["seed"], "results": results}, cfg["out"])
    worst = max(res["residual_crossing"], res["residual_composition"])
    if worst > cfg["tol"]:
        print(f"identity residual {worst:.3e} exceeds {cfg['tol']:g}", file=sys.stderr)
        return 1
    return 0


def cmd_verify(args) -> int:
    defaults = {"seed": None, "replicates": None, "n": None, "threads": 1, "out": None}
    cfg = merge_config(args, _file_cfg(args), defaults)
    names = list(ACCEPTANCE) if args.suite == "all" else [args.suite]
    for name in names:
        if name not in ACCEPTANCE:
            raise UsageError(f"unknown check '{name}'; known: {', '.join(ACCEPTANCE)} or 'all'")
    seeds = DEFAULT_MASTER_SEEDS if cfg["seed"] is None else (
        (cfg["seed"],) + tuple(s for s in DEFAULT_MASTER_SEEDS if s != cfg["seed"])[:2]
    )
    checks = {}
    all_passed = True
    for name in names:
        fn = ACCEPTANCE[name].fn
        overrides = {}
        params = inspect.signature(fn).parameters
        if cfg["replicates"] is not None and "replicates" in params:
            overrides["replicates"] = cfg["replicates"]
        if cfg["n"] is not None and "level" in params:
            overrides["level"] = cfg["n"]
        passed, reports = run_check(name, master_seeds=seeds, threads=cfg["threads"], **overrides)
        all_passed &= passed
        status = "PASS" if passed else "FAIL"
        extra = "" if len(reports) == 1 else f" (majority over {len(reports)} seeds)"
        print(f"{name}: {status}{extra} - {ACCEPTANCE[name].summary}")
        for rep in reports:
            for msg in rep.failures:
                print(f"    [{rep.master_seed}] {msg}")
        checks[name] = [json.loads(rep.canonical_json()) for rep in reports]
    if cfg["out"]:
        _emit({"command": "verify", "version": VERSION, "config": cfg,
               "master_seed": seeds[0], "passed": all_passed, "checks": checks},
              cfg["out"])
    return 0 if all_passed else 1


def _file_cfg(args) -> dict:
    return load_config(args.config) if getattr(args, "config", None) else {}


def _add_common(parser, *names):
    spec = {
        "--h": dict(type=float, help="Hurst parameter"),
        "--r": dict(type=int, help="power parameter (statistic order 2r-1)"),
        "--n": dict(type=int, help="dyadic level"),
        "--m": dict(type=int, help="coarse dyadic level"),
        "--t": dict(type=float, help="time horizon"),
        "--t-min": dict(type=float, dest="t_min", help="left grid endpoint (<= 0)"),
        "--f": dict(type=str, help=f"weight id, one of {sorted(REGISTRY)}"),
        "--replicates": dict(type=int, help="Monte Carlo replicates"),
        "--seed": dict(type=int, help="master seed"),
        "--threads": dict(type=int, help="worker thread cap"),
        "--out": dict(type=str, help="write the JSON artifact here instead of stdout"),
        "--dump-paths": dict(type=str, dest="dump_paths", help="directory for path CSV dumps"),
        "--dump-series": dict(type=str, dest="dump_series", help="directory for series CSV dumps"),
        "--dump-walk": dict(type=str, dest="dump_walk", help="directory for walk CSV dumps"),
        "--tol": dict(type=float, help="tolerance"),
    }
    for name in names:
        parser.add_argument(name, **spec[name])
    parser.add_argument("--config", type=str, help="key=value config file (flags override)")
    parser.add_argument("--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fbmvar",
        description="Weighted odd-power variations of fractional Brownian motion",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sigma = sub.add_parser("sigma", help="variance-series constant sigma(r, H)")
    _add_common(p_sigma, "--r", "--h", "--tol", "--out")

    p_sim = sub.add_parser("simulate", help="generate paths/walks and dump statistics")
    sim_sub = p_sim.add_subparsers(dest="process", required=True)
    p_fbm = sim_sub.add_parser("fbm", help="two-sided fractional Brownian motion")
    _add_common(p_fbm, "--h", "--n", "--t", "--t-min", "--r", "--f", "--seed",
                "--out", "--dump-paths", "--dump-series")
    p_bt = sim_sub.add_parser("fbmbt", help="fBm in Brownian time (walk embedding)")
    _add_common(p_bt, "--h", "--n", "--t", "--r", "--f", "--seed", "--out",
                "--dump-walk", "--tol")

    p_verify = sub.add_parser("verify", help="run acceptance checks")
    p_verify.add_argument("suite", help="check name (A1..A10) or 'all'")
    _add_common(p_verify, "--seed", "--replicates", "--n", "--threads", "--out")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "sigma":
            return cmd_sigma(args)
        if args.command == "simulate":
            if args.process == "fbm":
                return cmd_simulate_fbm(args)
            return cmd_simulate_fbmbt(args)
        if args.command == "verify":
            return cmd_verify(args)
        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
