"""Command-line entry point: ``phaseconj {bounds,simulate,oracle,spectra}``.

Exit codes: 0 success, 1 a check failed, 2 usage or input error.

Options can also come from ``--config FILE``: one ``key = value`` per line,
keys spelled like the long flags without dashes (``n``, ``lambda``, ``samples``,
``seed``, ``fock-dim``, ``grid-nodes``, ``workers``, ``out``, ...).  ``#`` starts a
comment.  Flags given on the command line win over the file.  The default seed
is read from ``PHASECONJ_SEED`` when set.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import fock_oracle as fo
from .phase_space import GaussianPrior
from .quadrature import GridNotConvergedError, QuadratureGrid
from .spectra import TraceFormatError, analyze_traces, load_trace_set
from .strategies import (
    MIN_SAMPLES,
    ScenarioConfig,
    local_fidelity_bound,
    nonlocal_fidelity_bound,
    run_local_mc,
    run_nonlocal_mc,
)

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE = 0, 1, 2
SEED_ENV = "PHASECONJ_SEED"
Z_LIMIT = 5.0

DEFAULT_BETAS = ("0", "0.5", "0.8+0.3j", "1.5j")


class UsageError(Exception):
    pass


def _round12(obj):
    if isinstance(obj, float):
        return float(f"{obj:.12g}") if math.isfinite(obj) else obj
    if isinstance(obj, dict):
        return {k: _round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round12(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return _round12(obj.item())
    return obj


def _dump_json(obj) -> str:
    return json.dumps(_round12(obj), indent=2) + "\n"


def _emit(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _complex(text) -> complex:
    try:
        return complex(str(text).replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def _number_list(kind):
    def parse(text):
        try:
            return [kind(t) for t in str(text).replace(",", " ").split()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad list {text!r}") from None

    return parse


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 42
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV}={raw!r} is not an integer") from None


def read_config(path) -> dict:
    """Parse a ``key = value`` config file into a dict of strings."""
    values = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("_", "-")] = value
    return values


# -- subcommands ---------------------------------------------------------------


def cmd_bounds(args) -> int:
    ns, lams = args.n, args.lam
    if not ns or not lams:
        raise UsageError("bounds needs at least one n and one lambda")
    for n in ns:
        if n < 2 or n % 2:
            raise UsageError(f"n must be even and >= 2 (got {n})")
    for lam in lams:
        if lam < 0:
            raise UsageError(f"lambda must be >= 0 (got {lam})")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "lambda", "F_local", "F_nonlocal", "gap"])
    for n in ns:
        for lam in lams:
            fl, fn = local_fidelity_bound(n, lam), nonlocal_fidelity_bound(n, lam)
            w.writerow([n, f"{lam:.12g}", f"{fl:.12g}", f"{fn:.12g}", f"{fn - fl:.12g}"])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def _scenario(args) -> ScenarioConfig:
    n, lam = args.n, args.lam
    if n < 2 or n % 2:
        raise UsageError("simulate needs an even --n >= 2 (both strategies run)")
    if lam < 0:
        raise UsageError("--lambda must be >= 0")
    if args.samples < MIN_SAMPLES:
        raise UsageError(f"--samples must be >= {MIN_SAMPLES}")
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")
    mode = args.mode
    if mode == "auto":
        mode = "fixed-alpha" if lam == 0 else "sample-prior"
    if mode == "fixed-alpha" and lam != 0:
        raise UsageError("fixed-alpha mode models the flat prior; use --lambda 0")
    if mode == "sample-prior" and lam == 0:
        raise UsageError("lambda = 0 cannot be sampled; use --mode fixed-alpha")
    return ScenarioConfig(n, GaussianPrior(lam), mode, args.alpha if mode == "fixed-alpha" else None)


def cmd_simulate(args) -> int:
    cfg = _scenario(args)
    loc = run_local_mc(cfg, args.samples, args.seed, workers=args.workers)
    nonloc = run_nonlocal_mc(cfg, args.samples, args.seed, workers=args.workers)
    lam = cfg.prior.lam
    bounds = {"local": local_fidelity_bound(cfg.n_states, lam), "nonlocal": nonlocal_fidelity_bound(cfg.n_states, lam)}
    z = {
        "local": (loc.mean - bounds["local"]) / loc.stderr,
        "nonlocal": (nonloc.mean - bounds["nonlocal"]) / nonloc.stderr,
    }
    report = {
        "config": {
            "n": cfg.n_states,
            "lambda": lam,
            "mode": cfg.mode,
            "fixed_alpha": None if cfg.fixed_alpha is None else [cfg.fixed_alpha.real, cfg.fixed_alpha.imag],
            "samples": args.samples,
            "seed": args.seed,
        },
        "local": loc.to_dict(),
        "nonlocal": nonloc.to_dict(),
        "bounds": bounds,
        "z_scores": z,
    }
    _emit(_dump_json(report), args.out)
    return EXIT_CHECK_FAILED if any(abs(v) > Z_LIMIT for v in z.values()) else EXIT_OK


def _guard(name, params, fn):
    try:
        return fn()
    except GridNotConvergedError as exc:
        return fo.CheckReport(name, params, math.nan, math.nan, False,
                              {"failure": "grid_not_converged", "message": str(exc)})


def run_oracle_suite(args):
    grid = QuadratureGrid(nodes=args.grid_nodes) if args.grid_nodes else QuadratureGrid()
    rng = np.random.default_rng(args.seed)
    records = []

    for n in (1, 2):
        for lam in (0.5, 1.0):
            for _ in range(args.pnorm_states):
                phi = fo.random_state(12, rng)
                records.append(_guard("pnorm_inequality", {"n": n, "lambda": lam},
                                      lambda: fo.pnorm_inequality_check(phi, 2, n, lam, grid)))

    for _ in range(args.trace_states):
        phi = fo.random_state(8, rng)
        records.append(_guard("trace_inequality", {"n": 1, "lambda": 1.0},
                              lambda: fo.trace_inequality_check(phi, 1, 1.0, grid=grid)))

    for beta in args.beta:
        records.append(_guard("O_beta_eigenvector", {"beta": [beta.real, beta.imag]},
                              lambda: fo.eigenvector_check(beta, 2, 1.0, args.fock_dim, grid)))

    for _ in range(args.conj_ops):
        h = rng.normal(size=(20, 20)) + 1j * rng.normal(size=(20, 20))
        h = 0.5 * (h + h.conj().T)
        alpha = 2.0 * math.sqrt(rng.random()) * np.exp(2j * math.pi * rng.random())
        records.append(fo.locc_conjugation_check(h, alpha))

    for lam in (0.5, 1.0, 2.0):
        target = nonlocal_fidelity_bound(2, lam)

        def bound_check(lam=lam, target=target):
            val = fo.nonlocal_bound_via_oracle(2, lam, grid=grid)
            return fo.CheckReport("nonlocal_bound", {"n": 2, "lambda": lam}, val, target, abs(val - target) <= 1e-4)

        records.append(_guard("nonlocal_bound", {"n": 2, "lambda": lam}, bound_check))
    return records


def cmd_oracle(args) -> int:
    # Truncation gate before any work: every requested beta must fit in D.
    for beta in args.beta:
        centre = 2 * math.sqrt(2) * beta / 5
        reach = abs(centre) + 5.0 / math.sqrt(5.0)
        if fo.fock_tail(reach, args.fock_dim) > fo.TAIL_TOL:
            raise UsageError(
                f"--fock-dim {args.fock_dim} is too small for beta = {beta}: "
                f"need at least {fo.required_dim(reach)}"
            )
    records = run_oracle_suite(args)
    failures = [r for r in records if not r.holds]
    grid_failures = [r for r in failures if r.extra.get("failure") == "grid_not_converged"]
    summary = {
        "checks": len(records),
        "failures": len(failures) - len(grid_failures),
        "grid_failures": len(grid_failures),
    }
    _emit(_dump_json({"summary": summary, "records": [r.to_record() for r in records]}), args.out)
    return EXIT_CHECK_FAILED if failures else EXIT_OK


def cmd_spectra(args) -> int:
    from .fixtures import fixture_path

    if (args.input is None) == (args.fixture is None):
        raise UsageError("give exactly one of INPUT_DIR or --fixture")
    directory = fixture_path(args.fixture) if args.fixture else Path(args.input)
    if not directory.is_dir():
        raise UsageError(f"{directory} is not a directory of traces")
    traces, sideband = load_trace_set(directory)
    _emit(_dump_json(analyze_traces(traces, sideband)), args.out)
    return EXIT_OK


# -- parser ----------------------------------------------------------------------


def _common(p, *, n_default, lam_default, lists=False):
    if lists:
        p.add_argument("--n", type=_number_list(int), default=n_default, help="state counts, e.g. '2,4,6'")
        p.add_argument("--lambda", dest="lam", type=_number_list(float), default=lam_default,
                       help="prior precisions, e.g. '0,0.1,1'")
    else:
        p.add_argument("--n", type=int, default=n_default, help="total number of coherent states")
        p.add_argument("--lambda", dest="lam", type=float, default=lam_default, help="prior precision")
    p.add_argument("--samples", type=int, default=10**6)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--fock-dim", dest="fock_dim", type=int, default=40)
    p.add_argument("--grid-nodes", dest="grid_nodes", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None, help="output file (default: stdout)")
    p.add_argument("--config", default=None, help="key = value file; flags override it")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phaseconj", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    parser.subcommands = sub.choices

    p = sub.add_parser("bounds", help="tabulate local and joint fidelity bounds")
    _common(p, n_default=[2, 4, 6, 8], lam_default=[0.0, 0.1, 1.0, 10.0], lists=True)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("simulate", help="Monte Carlo both strategies")
    _common(p, n_default=2, lam_default=0.0)
    p.add_argument("--mode", choices=["auto", "sample-prior", "fixed-alpha"], default="auto")
    p.add_argument("--alpha", type=_complex, default=complex(1.0, 0.5), help="amplitude for fixed-alpha mode")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("oracle", help="run the truncated Fock-space checks")
    _common(p, n_default=2, lam_default=1.0)
    p.add_argument("--beta", type=_complex, action="append", default=None,
                   help="outcome for the O_beta eigenvector check (repeatable)")
    p.add_argument("--pnorm-states", dest="pnorm_states", type=int, default=100)
    p.add_argument("--trace-states", dest="trace_states", type=int, default=25)
    p.add_argument("--conj-ops", dest="conj_ops", type=int, default=50)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("spectra", help="added noise and fidelity from trace files")
    _common(p, n_default=2, lam_default=0.0)
    p.add_argument("input", nargs="?", default=None, help="directory of traces")
    p.add_argument("--fixture", choices=["local", "nonlocal"], default=None, help="use a bundled fixture")
    p.set_defaults(func=cmd_spectra)
    return parser


def _apply_config(parser, argv):
    """Re-parse with config-file values as defaults so explicit flags win."""
    args = parser.parse_args(argv)
    if not args.config:
        return args
    values = read_config(args.config)
    sub = parser.subcommands[args.command]
    known = {a.dest: a for a in sub._actions}
    flag_to_dest = {opt.lstrip("-"): a.dest for a in sub._actions for opt in a.option_strings}
    defaults = {}
    for key, raw in values.items():
        dest = flag_to_dest.get(key)
        if dest is None or dest in ("config", "help"):
            raise UsageError(f"{args.config}: unknown key {key!r} for '{args.command}'")
        action = known[dest]
        try:
            value = action.type(raw) if action.type else raw
        except (argparse.ArgumentTypeError, ValueError):
            raise UsageError(f"{args.config}: bad value for {key!r}: {raw!r}") from None
        defaults[dest] = [value] if isinstance(action, argparse._AppendAction) else value
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        if args.seed is None:
            args.seed = _default_seed()
        if args.command == "oracle" and not args.beta:
            args.beta = [_complex(b) for b in DEFAULT_BETAS]
        return args.func(args)
    except (UsageError, TraceFormatError, fo.TruncationError) as exc:
        print(f"phaseconj: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        # Input validation inside the library (grid mismatch, missing peak, ...).
        print(f"phaseconj: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
