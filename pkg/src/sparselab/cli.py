"""Command-line front end: simulate, fit, diagnose, bench, penalty-curves."""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .bench import emit_plot_tables, emit_report, run_grid
from .diagnostics import diagnose_scenario
from .errors import ConfigError, SparselabError
from .linalg import read_csv, standardize, write_csv
from .methods import METHODS, get_method
from .penalties import CURVE_COLUMNS, penalty_curves
from .scenarios import RNG_ALGORITHM, RngStream, generate_replication, make_scenario
from .selection import screen_then_refit

MAX_SEED = 2 ** 64 - 1

# every config-file key a subcommand accepts, with its default
KEYS = {
    "simulate": {"scenario": None, "n": None, "s": None, "rho": None, "p": 100, "seed": 0,
                 "out": None},
    "fit": {"data": None, "response": "y", "method": "lasso", "seed": 0, "out": None},
    "diagnose": {"scenario": None, "n": None, "s": None, "rho": None, "p": 100, "out": None},
    "bench": {"scenario": None, "n": [25, 50, 100, 200, 400], "s": None, "rho": None, "p": 100,
              "methods": list(METHODS), "m": 100, "seed": 0, "out": None, "threads": None},
    "penalty-curves": {"out": None},
}
REQUIRED = {
    "simulate": ("scenario", "n", "out"),
    "fit": ("data",),
    "diagnose": ("scenario", "n"),
    "bench": ("scenario", "out"),
    "penalty-curves": ("out",),
}


class UsageError(Exception):
    pass


def _int_list(text: str) -> list:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _name_list(text: str) -> list:
    return [v.strip() for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sparselab", description=__doc__)
    parser.add_argument("--version", action="version", version=f"sparselab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_flags(p, with_seed=True):
        p.add_argument("--scenario", help="S1, S2, S3a or S3b")
        p.add_argument("--s", type=int, help="number of true covariates")
        p.add_argument("--rho", type=float, help="dependence parameter")
        p.add_argument("--p", type=int, help="number of covariates (default 100)")
        if with_seed:
            p.add_argument("--seed", type=int, help="master seed (default 0)")
        p.add_argument("--config", help="JSON file mirroring the flags")

    p = sub.add_parser("simulate", help="draw one dataset from a scenario")
    scenario_flags(p)
    p.add_argument("--n", type=int)
    p.add_argument("--out", help="CSV path; a .json sidecar holds the ground truth")

    p = sub.add_parser("fit", help="fit one method to a CSV dataset")
    p.add_argument("--data", help="CSV file with a header row")
    p.add_argument("--response", help="response column (default y)")
    p.add_argument("--method", help=f"one of {', '.join(METHODS)}")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="optional JSON output path")
    p.add_argument("--config")

    p = sub.add_parser("diagnose", help="population consistency diagnostics as JSON")
    scenario_flags(p, with_seed=False)
    p.add_argument("--n", type=int)
    p.add_argument("--out", help="optional JSON output path")

    p = sub.add_parser("bench", help="Monte Carlo comparison of methods")
    scenario_flags(p)
    p.add_argument("--n", type=_int_list, help="comma-separated sample sizes")
    p.add_argument("--methods", type=_name_list, help="comma-separated method names")
    p.add_argument("--m", type=int, help="replications per cell (default 100)")
    p.add_argument("--threads", type=int, help="worker processes (default SPARSELAB_THREADS or 1)")
    p.add_argument("--out", help="output directory")

    p = sub.add_parser("penalty-curves", help="penalty values on a beta grid as TSV")
    p.add_argument("--out")
    p.add_argument("--config")
    return parser


def parse_config(argv=None) -> dict:
    """Resolve flags over an optional JSON config file over defaults."""
    args = build_parser().parse_args(argv)
    command = args.command
    allowed = KEYS[command]
    resolved = dict(allowed)
    if getattr(args, "config", None):
        try:
            doc = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"--config: cannot read {args.config}: {exc}") from None
        if not isinstance(doc, dict):
            raise UsageError("--config: top level must be a JSON object")
        unknown = sorted(set(doc) - set(allowed))
        if unknown:
            raise UsageError(f"--config: unknown key(s) {', '.join(unknown)} for {command}; "
                             f"allowed: {', '.join(allowed)}")
        resolved.update(doc)
    for key in allowed:
        value = getattr(args, key, None)
        if value is not None:
            resolved[key] = value
    if command == "bench" and resolved["threads"] is None:
        env = os.environ.get("SPARSELAB_THREADS")
        try:
            resolved["threads"] = int(env) if env else 1
        except ValueError:
            raise UsageError(f"SPARSELAB_THREADS must be an integer, got {env!r}") from None
    missing = [k for k in REQUIRED[command] if resolved.get(k) is None]
    if missing:
        raise UsageError(f"{command}: missing --{missing[0]}")
    _validate(command, resolved)
    resolved["command"] = command
    return resolved


def _validate(command: str, cfg: dict):
    if "seed" in cfg and not (isinstance(cfg["seed"], int) and 0 <= cfg["seed"] <= MAX_SEED):
        raise UsageError(f"--seed must be an integer in [0, 2^64 - 1], got {cfg['seed']!r}")
    if command == "bench":
        bad = [mth for mth in cfg["methods"] if mth not in METHODS]
        if bad:
            raise UsageError(f"--methods: unknown method {bad[0]!r}; valid methods: "
                             f"{', '.join(METHODS)}")
        if not cfg["methods"]:
            raise UsageError("--methods: empty list")
        if not isinstance(cfg["m"], int) or cfg["m"] < 1:
            raise UsageError("--m must be a positive integer")
        if cfg["threads"] < 1:
            raise UsageError("--threads must be at least 1")
        ns = cfg["n"] if isinstance(cfg["n"], list) else [cfg["n"]]
        if not ns or any(not isinstance(v, int) or v < 2 for v in ns):
            raise UsageError("--n must list integers >= 2")
        cfg["n"] = ns
    if command == "fit" and cfg["method"] not in METHODS:
        raise UsageError(f"--method: unknown method {cfg['method']!r}; valid methods: "
                         f"{', '.join(METHODS)}")
    if command in ("simulate", "diagnose", "bench"):
        # builds the scenario once so inconsistent combinations fail before any work
        for n in (cfg["n"] if isinstance(cfg["n"], list) else [cfg["n"]]):
            try:
                make_scenario(cfg["scenario"], n, cfg["s"], cfg["rho"], p=cfg["p"])
            except ConfigError as exc:
                raise UsageError(f"--scenario {cfg['scenario']}: {exc}") from None


def _write_manifest(directory: Path, cfg: dict, outputs):
    manifest = {
        "sparselab_version": __version__,
        "rng_algorithm": RNG_ALGORITHM,
        "config": {k: v for k, v in sorted(cfg.items())},
        "outputs": sorted(str(Path(o).name) for o in outputs),
    }
    path = directory / "run-manifest.json"
    tmp = path.with_name(path.name + ".partial")
    tmp.write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    os.replace(tmp, path)


def _write_json(path: Path, doc):
    tmp = path.with_name(path.name + ".partial")
    tmp.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    os.replace(tmp, path)


def cmd_simulate(cfg: dict) -> int:
    spec = make_scenario(cfg["scenario"], cfg["n"], cfg["s"], cfg["rho"], p=cfg["p"])
    raw, beta, sigma2 = generate_replication(spec, RngStream(cfg["seed"], "simulate"))
    out = Path(cfg["out"])
    out.parent.mkdir(parents=True, exist_ok=True)
    tmp = out.with_name(out.name + ".partial")
    write_csv(tmp, raw.x, raw.y, raw.names)
    os.replace(tmp, out)
    side = out.with_suffix(".json")
    _write_json(side, {
        "scenario": spec.name, "n": spec.n, "p": spec.p, "s": spec.s, "rho": spec.rho,
        "beta": [float(b) for b in beta],
        "support": [j + 1 for j in spec.beta_positions],
        "sigma2": float(sigma2),
    })
    _write_manifest(out.parent, cfg, [out, side])
    print(f"wrote {out} ({spec.n} x {spec.p}), sigma2 = {sigma2:.6g}")
    return 0


def cmd_fit(cfg: dict) -> int:
    raw = read_csv(cfg["data"], cfg["response"])
    data = standardize(raw)
    res = screen_then_refit(data, get_method(cfg["method"]), rng=RngStream(cfg["seed"], "fit"))
    names = raw.names or tuple(f"x{j + 1}" for j in range(raw.p))
    beta = res.coef.original_beta(data)
    doc = {
        "method": cfg["method"],
        "selected": [names[j] for j in res.coef.support],
        "selected_index": [j + 1 for j in res.coef.support],
        "coefficients": {names[j]: float(beta[j]) for j in res.coef.support},
        "intercept": float(res.coef.intercept),
        "refit": res.refit,
        "note": res.reason,
    }
    if cfg["out"]:
        out = Path(cfg["out"])
        out.parent.mkdir(parents=True, exist_ok=True)
        _write_json(out, doc)
        _write_manifest(out.parent, cfg, [out])
    print(json.dumps(doc, indent=1))
    return 0


def cmd_diagnose(cfg: dict) -> int:
    spec = make_scenario(cfg["scenario"], cfg["n"], cfg["s"], cfg["rho"], p=cfg["p"])
    doc = diagnose_scenario(spec).to_dict()
    if cfg["out"]:
        out = Path(cfg["out"])
        out.parent.mkdir(parents=True, exist_ok=True)
        _write_json(out, doc)
        _write_manifest(out.parent, cfg, [out])
    print(json.dumps(doc, indent=1, sort_keys=True))
    return 0


def cmd_bench(cfg: dict) -> int:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    reports = run_grid(cfg["scenario"], cfg["n"], cfg["s"], cfg["rho"], cfg["methods"],
                       cfg["m"], cfg["seed"], cfg["threads"], p=cfg["p"])
    files = [emit_report(reports, "csv", out / "summary.csv"),
             emit_report(reports, "json", out / "summary.json")]
    files += emit_plot_tables(reports, out)
    # threads never changes results, so it stays out of the manifest
    _write_manifest(out, {k: v for k, v in cfg.items() if k != "threads"}, files)
    print(f"{'method':<8}{'n':>6}{'tp':>8}{'fp':>8}{'mse':>10}{'%dev':>8}{'fail':>6}")
    for r in reports:
        print(f"{r.method:<8}{r.scenario['n']:>6}{r.means['tp']:>8.2f}{r.means['fp']:>8.2f}"
              f"{r.means['mse']:>10.4f}{r.means['pct_dev']:>8.3f}{r.failures:>6}")
    failures = sum(r.failures for r in reports)
    if failures:
        print(f"{failures} method fit(s) failed; see summary.json", file=sys.stderr)
        return 1
    return 0


def cmd_penalty_curves(cfg: dict) -> int:
    beta, table = penalty_curves()
    out = Path(cfg["out"])
    out.parent.mkdir(parents=True, exist_ok=True)
    names = [name for name, _ in CURVE_COLUMNS]
    lines = ["beta\t" + "\t".join(names)]
    for i, b in enumerate(beta):
        lines.append(f"{b:.2f}\t" + "\t".join(repr(float(table[c][i])) for c in names))
    tmp = out.with_name(out.name + ".partial")
    tmp.write_text("\n".join(lines) + "\n")
    os.replace(tmp, out)
    _write_manifest(out.parent, cfg, [out])
    print(f"wrote {out} ({len(beta)} rows)")
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "diagnose": cmd_diagnose,
    "bench": cmd_bench,
    "penalty-curves": cmd_penalty_curves,
}


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        print(f"sparselab: error: {exc}", file=sys.stderr)
        return 2
    try:
        return COMMANDS[cfg["command"]](cfg)
    except (SparselabError, ValueError, OSError) as exc:
        print(f"sparselab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
