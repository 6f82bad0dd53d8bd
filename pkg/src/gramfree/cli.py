"""Command-line runner: ``gramfree {freeness,bound,zeroset,negligibility,selftest}``.

Each command writes ``report.json``, one or more CSV tables and
``manifest.json`` into ``--out``. CSV files start with a ``#`` comment line
carrying the master seed and the resolved config, then a header row; read
them with ``pandas.read_csv(path, comment="#")``.

Exit codes: 0 when the command's gate passes, 1 when it does not, 2 for a
bad config or arguments, 3 when outputs cannot be written.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .config import load_config
from .errors import ConfigError, GramFreeError
from .experiments import (DEFAULT_D, DEFAULT_EPS_GRID, DEFAULT_K_MAX, DEFAULT_T_GRID,
                          DEFAULT_TRIALS, TOL_ABS, ExperimentConfig, predicted_onset,
                          run_bound, run_freeness, run_negligibility_probe, run_selftest,
                          run_zeroset_probe)
from .engine import TOL_DEP

EXIT_OK, EXIT_GATE, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3

DEFAULTS_HELP = f"""\
defaults (when neither --config nor a flag sets them):
  d = {DEFAULT_D}, k_max = {DEFAULT_K_MAX}, trials = {DEFAULT_TRIALS}, master_seed = 0
  tol_dep = {TOL_DEP:g}  (relative dependence threshold h <= tol_dep * |v|)
  t_grid = {list(DEFAULT_T_GRID)}
  eps_grid = {list(DEFAULT_EPS_GRID)}
  [sampler] kind = "gaussian", decay = 0.5  (variances 2**-i)
  [negligibility] k = [1, 2, 3], subspace = first 3 coordinate axes,
                  shift = last coordinate axis; membership tolerance {TOL_ABS:g}
  [selftest] cases = 1000, d = 32, k_max = 16
"""


class OutputError(Exception):
    pass


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _csv_text(rows: list[dict], columns: list[str], comment: str) -> str:
    buf = io.StringIO()
    buf.write(f"# {comment}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def _write(out_dir: str, name: str, text: str) -> None:
    try:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, name), "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write {name} in {out_dir}: {exc.strerror}") from None


def _json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _comment(command: str, resolved: dict) -> str:
    return (f"gramfree {command} master_seed={resolved['master_seed']} "
            f"config={json.dumps(resolved, separators=(',', ':'))}")


# -- commands -------------------------------------------------------------------

def cmd_freeness(config, extras, args):
    report = run_freeness(config, workers=args.workers)
    onset = predicted_onset(config)
    expected = [1.0 if k < onset else 0.0 for k in range(config.k_max + 1)]
    ok = report.freeness_rate == expected
    rows = report.per_k_rows()
    summary = report.to_dict()
    summary["predicted_onset"] = onset
    summary["gate_passed"] = ok
    return ok, summary, {
        "freeness.csv": (rows, ["k", "freeness_rate", "mean_log_det", "stderr"])}


def cmd_bound(config, extras, args):
    report = run_bound(config, workers=args.workers)
    rows = report.bound_rows()
    ok = all(r["satisfied"] for r in rows) and all(report.bound.monotone_in_t())
    summary = report.to_dict()
    summary["gate_passed"] = ok
    cols = ["k", "t", "eps", "lhs_hat", "rhs_hat", "stderr_rhs", "satisfied"]
    return ok, summary, {"bound.csv": (rows, cols)}


def cmd_zeroset(config, extras, args):
    report = run_zeroset_probe(config, workers=args.workers)
    measure = report.zeroset_measure
    ok = all(m == (0.0 if k < config.d else 1.0) for k, m in enumerate(measure))
    rows = report.per_k_rows()
    summary = report.to_dict()
    summary["gate_passed"] = ok
    return ok, summary, {"zeroset.csv": (rows, ["k", "trials", "dependent", "zeroset_measure"])}


def _probe_params(config: ExperimentConfig, section: dict):
    d = config.d
    ks = section.get("k", [1, 2, 3])
    ks = [ks] if isinstance(ks, int) else list(ks)
    if "subspace" in section:
        subspace = section["subspace"]
    else:
        m = int(section.get("subspace_dim", min(3, d - 1)))
        subspace = np.eye(d)[:m].tolist()
    shift = section.get("shift", np.eye(d)[d - 1].tolist())
    unknown = set(section) - {"k", "subspace", "subspace_dim", "shift"}
    if unknown:
        raise ConfigError(f"unknown [negligibility] keys: {sorted(unknown)}")
    return subspace, shift, ks


def cmd_negligibility(config, extras, args):
    subspace, shift, ks = _probe_params(config, extras["negligibility"])
    reports = [run_negligibility_probe(subspace, shift, k, config, workers=args.workers)
               for k in ks]
    rows = [r.hit_rates() for r in reports]
    ok = all(r["continuous_hits"] == 0 and r["contrast_hits"] == r["draws"] for r in rows)
    summary = {"kind": "negligibility", "config": config.to_dict(),
               "reports": [r.to_dict() for r in reports], "gate_passed": ok}
    cols = ["k", "draws", "continuous_hits", "contrast_hits", "continuous_rate",
            "contrast_rate"]
    return ok, summary, {"negligibility.csv": (rows, cols)}


def cmd_selftest(config, extras, args):
    section = dict(extras["selftest"])
    unknown = set(section) - {"cases", "d", "k_max"}
    if unknown:
        raise ConfigError(f"unknown [selftest] keys: {sorted(unknown)}")
    cases = args.trials if args.trials is not None else int(section.get("cases", 1000))
    d = args.d if args.d is not None else int(section.get("d", 32))
    k_max = args.kmax if args.kmax is not None else int(section.get("k_max", 16))
    result = run_selftest(cases, d, k_max, config.master_seed, config.tol_dep)
    rows = result.pop("rows")
    result["config"] = {"cases": cases, "d": d, "k_max": k_max,
                        "master_seed": config.master_seed, "tol_dep": config.tol_dep}
    cols = ["case", "n_vectors", "log_det_incremental", "log_det_direct", "abs_diff",
            "compared"]
    return result["passed"], result, {"selftest.csv": (rows, cols)}


COMMANDS = {
    "freeness": (cmd_freeness, "per-k freeness rate of a random sequence"),
    "bound": (cmd_bound, "check P(det > eps) >= 1 - E[exp(-t det)] exp(t eps) on grids"),
    "zeroset": (cmd_zeroset, "base-measure mass of the zero set of the Gram determinant"),
    "negligibility": (cmd_negligibility, "hit rates of a strict affine subspace"),
    "selftest": (cmd_selftest, "incremental vs direct Gram determinant on random cases"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gramfree", description=__doc__.splitlines()[0],
        epilog=DEFAULTS_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"gramfree {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text,
                           epilog=DEFAULTS_HELP,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        p.add_argument("--config", metavar="PATH", help="TOML config file")
        p.add_argument("--out", metavar="DIR", default=".", help="output directory")
        p.add_argument("--seed", metavar="U64", type=int, help="master seed")
        p.add_argument("--workers", metavar="N", type=int, default=1,
                       help="worker processes (results do not depend on N)")
        p.add_argument("--trials", metavar="N", type=int, help="number of trials")
        p.add_argument("--d", metavar="N", type=int, help="truncation dimension")
        p.add_argument("--kmax", metavar="N", type=int, help="largest index k")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    func = COMMANDS[args.command][0]
    started = time.perf_counter()
    try:
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        overrides = dict(master_seed=args.seed)
        if args.command != "selftest":
            overrides.update(trials=args.trials, d=args.d, k_max=args.kmax)
        config, extras = load_config(args.config, **overrides)
        ok, summary, tables = func(config, extras, args)
    except GramFreeError as exc:
        print(f"gramfree {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    resolved = summary["config"]
    code = EXIT_OK if ok else EXIT_GATE
    manifest = {"command": args.command, "config_path": args.config,
                "config": resolved, "master_seed": resolved["master_seed"],
                "out_dir": os.path.abspath(args.out), "version": __version__,
                "workers": args.workers, "exit_code": code,
                "wall_clock_s": time.perf_counter() - started}
    try:
        for name, (rows, cols) in tables.items():
            _write(args.out, name, _csv_text(rows, cols, _comment(args.command, resolved)))
        _write(args.out, "report.json", _json(summary))
        _write(args.out, "manifest.json", _json(manifest))
    except OutputError as exc:
        print(f"gramfree {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_IO
    status = "passed" if ok else "FAILED"
    print(f"gramfree {args.command}: gate {status}; outputs in {args.out}")
    return code


if __name__ == "__main__":
    sys.exit(main())
