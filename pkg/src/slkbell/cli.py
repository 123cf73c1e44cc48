"""Command-line interface: ``slkbell <command> [options]``.

Exit codes: 0 success, 1 a verification check failed, 2 bad usage/config.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import _io
from .errors import SLKError
from .functional import (
    evaluate,
    lr_bound,
    slope,
    violation_threshold,
)
from .identities import DEFAULT_B_GRID, default_sweep, reports_to_csv
from .measurement import CANONICAL_OFFSETS, PhaseOffsets
from .optimizer import optimize
from .sampling import (
    CountTable,
    ExperimentPlan,
    estimate_concurrence,
    estimate_slk,
    simulate_counts,
)
from .state import (
    SchmidtState,
    concurrence,
    maximally_entangled,
    new_schmidt,
    random_schmidt,
)

EVALUATE_EPILOG = """\
The violation threshold is reported as lr_bound(d) / (2 sqrt2 (d-1)). At d=2
this is 1/sqrt2 ~ 0.7071: a pure two-qubit state violates the local bound with
these settings only when its concurrence exceeds 1/sqrt2.
"""


class ConfigError(SLKError):
    pass


# argument parsing -------------------------------------------------------------


def parse_int_list(text: str) -> list[int]:
    """``"3"``, ``"2,3,5"`` or an inclusive range ``"2..6"``."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError(f"empty integer list {text!r}")
    return out


def parse_floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _state_args(p: argparse.ArgumentParser, d_list: bool = False) -> None:
    if d_list:
        p.add_argument("--d", type=parse_int_list, default=None, help="dimensions, e.g. 2..6 or 2,3,5")
    else:
        p.add_argument("--d", type=int, default=None, help="local dimension")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--coeffs", type=parse_floats, help="comma-separated Schmidt coefficients")
    src.add_argument("--max-entangled", action="store_true", help="maximally entangled state")
    src.add_argument("--random", type=int, nargs="?", const=1, metavar="N", help="N random states (seeded)")
    p.add_argument("--seed", type=int, default=0, help="seed for random states and sampling")
    off = p.add_mutually_exclusive_group()
    off.add_argument("--offsets", type=parse_floats, metavar="D1,D2,E1,E2", help="explicit phase offsets")
    off.add_argument("--canonical", action="store_true", help="canonical offsets (default)")


def _output_args(p: argparse.ArgumentParser, default_format: str) -> None:
    p.add_argument("--out", type=Path, default=None, help="output file (default: stdout)")
    p.add_argument("--format", choices=("json", "csv"), default=default_format)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slkbell", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "evaluate",
        help="Bell value, bound and concurrence of one state",
        epilog=EVALUATE_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    _state_args(p)
    _output_args(p, "json")

    p = sub.add_parser("sweep-relation", help="value vs concurrence over random states")
    _state_args(p, d_list=True)
    p.add_argument("--figure", type=Path, default=None, help="also render a PNG/PDF figure")
    _output_args(p, "csv")

    p = sub.add_parser("identities", help="numerical sweep of the trigonometric identities")
    p.add_argument("--d", type=parse_int_list, default=list(range(2, 65)), help="d range for cosine sums")
    p.add_argument("--k", type=parse_int_list, default=list(range(2, 41)), help="k range for the theorems")
    p.add_argument("--b", type=parse_floats, default=list(DEFAULT_B_GRID), help="b grid for the theorems")
    p.add_argument("--hassan-d", type=parse_int_list, default=list(range(2, 101)), help="d range for cot sums")
    p.add_argument("--precision", type=int, default=None, help="decimal digits (mpmath) instead of doubles")
    p.add_argument("--figure", type=Path, default=None)
    _output_args(p, "csv")

    p = sub.add_parser("sample", help="finite-shot emulation and estimate")
    _state_args(p)
    p.add_argument("--shots", type=int, default=10**6, help="shots per setting pair")
    p.add_argument("--visibility", type=float, default=1.0)
    p.add_argument("--bootstrap", type=int, default=200, help="bootstrap resamples (0: none)")
    p.add_argument("--counts-out", type=Path, default=None, help="write counts (.csv or .json)")
    p.add_argument("--counts-in", type=Path, default=None, help="estimate from a counts file instead")
    _output_args(p, "json")

    p = sub.add_parser("optimize", help="search phase offsets for a larger value")
    _state_args(p)
    p.add_argument("--budget", type=int, default=10**4, help="maximum objective evaluations")
    p.add_argument("--trace", type=Path, default=None, help="write the evaluation trace as CSV")
    p.add_argument("--figure", type=Path, default=None)
    _output_args(p, "json")
    return parser


# config resolution ------------------------------------------------------------


def resolve_offsets(args) -> PhaseOffsets:
    if getattr(args, "offsets", None):
        if len(args.offsets) != 4:
            raise ConfigError("--offsets needs exactly four values")
        return PhaseOffsets(*args.offsets)
    return CANONICAL_OFFSETS


def resolve_state(args, d: int | None = None) -> SchmidtState:
    d = args.d if d is None else d
    if args.coeffs is not None:
        return new_schmidt(len(args.coeffs) if d is None else d, args.coeffs)
    if d is None:
        raise ConfigError("--d is required unless --coeffs is given")
    if args.max_entangled:
        return maximally_entangled(d)
    if args.random is not None:
        if args.random != 1:
            raise ConfigError("this command takes a single state; use --random without a count")
        return random_schmidt(d, args.seed)
    raise ConfigError("choose a state: --coeffs, --max-entangled or --random")


def _emit(args, payload, header=None, rows=None) -> None:
    if args.format == "csv":
        if rows is None:
            flat = _flatten(payload)
            header, rows = list(flat), [list(flat.values())]
        text = _io.dumps_csv(header, rows)
    else:
        text = _io.dumps_json(payload)
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.write_text(text)


def _flatten(payload: dict, prefix: str = "") -> dict:
    """One CSV row: nested dicts become ``outer.inner`` columns, lists join with ';'."""
    flat = {}
    for key, value in payload.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, name + "."))
        elif isinstance(value, (list, tuple)):
            flat[name] = ";".join(_io.fmt_real(v) for v in value)
        else:
            flat[name] = value
    return flat


def _finite_or_none(x: float):
    return x if math.isfinite(x) else None


# commands ---------------------------------------------------------------------


def cmd_evaluate(args) -> int:
    offsets = resolve_offsets(args)
    state = resolve_state(args)
    prob = evaluate(state, offsets, "probability")
    corr = evaluate(state, offsets, "correlation")
    conc = concurrence(state)
    predicted = slope(state.d) * conc
    payload = {
        "schema_version": _io.SCHEMA_VERSION,
        "d": state.d,
        "coeffs": [float(c) for c in state.coeffs],
        "rescaled": state.rescaled,
        "offsets": offsets.to_dict(),
        "canonical_offsets": offsets == CANONICAL_OFFSETS,
        "value": prob.value,
        "value_correlation": corr.value,
        "path_difference": prob.value - corr.value,
        "lr_bound": prob.lr_bound,
        "violated": prob.violated,
        "concurrence": conc,
        "violation_threshold": violation_threshold(state.d),
        "predicted": predicted,
        "residual": prob.value - predicted,
        "state_digest": state.digest(),
    }
    _emit(args, payload)
    return 0


RELATION_HEADER = ("schema_version", "d", "seed", "concurrence", "i_slk", "predicted", "residual")


def relation_rows(ds, count: int, seed: int, offsets=CANONICAL_OFFSETS) -> list[dict]:
    rows = []
    for d in sorted(set(ds)):
        for s in range(seed, seed + count):
            state = random_schmidt(d, s)
            c = concurrence(state)
            value = evaluate(state, offsets).value
            predicted = slope(d) * c
            rows.append({"d": d, "seed": s, "concurrence": c, "i_slk": value, "predicted": predicted, "residual": value - predicted})
    return rows


def relation_fits(rows: list[dict]) -> list[dict]:
    fits = []
    for d in sorted({r["d"] for r in rows}):
        pts = [r for r in rows if r["d"] == d]
        x = np.array([r["concurrence"] for r in pts])
        y = np.array([r["i_slk"] for r in pts])
        fit_slope, intercept = np.polyfit(x, y, 1)
        fits.append({
            "d": d,
            "slope": float(fit_slope),
            "expected_slope": slope(d),
            "intercept": float(intercept),
            "max_abs_residual": float(max(abs(r["residual"]) for r in pts)),
            "lr_bound": lr_bound(d),
        })
    return fits


def cmd_sweep_relation(args) -> int:
    offsets = resolve_offsets(args)
    ds = args.d if args.d is not None else list(range(2, 7))
    if any(d < 2 for d in ds):
        raise ConfigError("dimensions must be >= 2")
    count = args.random if args.random is not None else 100
    if count < 1:
        raise ConfigError("--random count must be >= 1")
    if args.coeffs is not None or args.max_entangled:
        raise ConfigError("sweep-relation draws random states; use --random N")
    rows = relation_rows(ds, count, args.seed, offsets)
    if args.format == "csv":
        table = [[_io.SCHEMA_VERSION] + [r[h] for h in RELATION_HEADER[1:]] for r in rows]
        _emit(args, None, RELATION_HEADER, table)
    else:
        _emit(args, {"schema_version": _io.SCHEMA_VERSION, "offsets": offsets.to_dict(), "fits": relation_fits(rows), "rows": rows})
    if args.figure is not None:
        from .plotting import relation_figure

        relation_figure(rows, args.figure)
    return 0


def cmd_identities(args) -> int:
    if min(args.d) < 2 or min(args.hassan_d) < 2 or min(args.k) < 2:
        raise ConfigError("dimension and k ranges must start at 2 or above")
    if any(not 0 < b < 1 for b in args.b):
        raise ConfigError("b values must lie strictly between 0 and 1")
    reports = default_sweep(args.d, args.k, args.b, args.hassan_d, precision=args.precision)
    if args.format == "csv":
        text = reports_to_csv(reports)
        if args.out is None:
            sys.stdout.write(text)
        else:
            args.out.write_text(text)
    else:
        payload = {
            "schema_version": _io.SCHEMA_VERSION,
            "reports": [
                {"identity": r.name, **r.params, "lhs": _finite_or_none(r.lhs), "rhs": _finite_or_none(r.rhs),
                 "abs_error": _finite_or_none(r.abs_error), "tolerance": r.tolerance, "pass": r.status}
                for r in reports
            ],
        }
        _emit(args, payload)
    if args.figure is not None:
        from .plotting import identities_figure

        identities_figure(reports, args.figure)
    failed = [r for r in reports if not r.skipped and not r.passed]
    for r in failed[:20]:
        print(f"FAIL {r.name} {r.params} abs_error={r.abs_error:.3g} tol={r.tolerance:.3g}", file=sys.stderr)
    return 1 if failed else 0


def _read_counts(path: Path, offsets) -> CountTable:
    text = path.read_text()
    if path.suffix == ".json":
        counts = CountTable.from_json(text)
        return counts if counts.offsets is not None else CountTable(counts.d, counts.counts, offsets)
    return CountTable.from_csv(text, offsets=offsets)


def _write_counts(path: Path, counts: CountTable) -> None:
    path.write_text(counts.to_json() if path.suffix == ".json" else counts.to_csv())


def cmd_sample(args) -> int:
    offsets = resolve_offsets(args)
    if args.bootstrap < 0:
        raise ConfigError("--bootstrap must be >= 0")
    analytic = None
    plan = None
    if args.counts_in is not None:
        counts = _read_counts(args.counts_in, offsets)
        if args.coeffs is not None or args.max_entangled or args.random is not None:
            state = resolve_state(args, d=counts.d if args.d is None else args.d)
            plan = ExperimentPlan(state, offsets, 1, args.visibility, args.seed)
            analytic = plan.analytic_value()
    else:
        state = resolve_state(args)
        plan = ExperimentPlan(state, offsets, args.shots, args.visibility, args.seed)
        counts = simulate_counts(plan)
        analytic = plan.analytic_value()
    if args.counts_out is not None:
        _write_counts(args.counts_out, counts)
    est = estimate_slk(counts, n_boot=args.bootstrap, seed=args.seed)
    conc = estimate_concurrence(counts, n_boot=args.bootstrap, seed=args.seed)
    z = None
    if analytic is not None and est.std_error > 0:
        z = (est.value - analytic) / est.std_error
    payload = {
        "schema_version": _io.SCHEMA_VERSION,
        "d": counts.d,
        "shots": counts.shots,
        "visibility": None if plan is None else plan.visibility,
        "seed": args.seed,
        "offsets": offsets.to_dict(),
        "estimate": est.value,
        "std_error": est.std_error,
        "method": est.method,
        "analytic": analytic,
        "z_score": z,
        "lr_bound": lr_bound(counts.d),
        "concurrence_estimate": conc.value,
        "concurrence_std_error": conc.std_error,
        "concurrence_in_range": conc.in_range,
    }
    _emit(args, payload)
    return 0


def cmd_optimize(args) -> int:
    state = resolve_state(args)
    if args.budget < 1:
        raise ConfigError("--budget must be >= 1")
    result = optimize(state, budget=args.budget, seed=args.seed, keep_trace=args.trace is not None or args.figure is not None)
    payload = result.to_dict()
    payload["d"] = state.d
    payload["coeffs"] = [float(c) for c in state.coeffs]
    _emit(args, payload)
    if args.trace is not None:
        args.trace.write_text(result.trace_csv())
    if args.figure is not None:
        from .plotting import trace_figure

        trace_figure(result, args.figure)
    return 0


COMMANDS = {
    "evaluate": cmd_evaluate,
    "sweep-relation": cmd_sweep_relation,
    "identities": cmd_identities,
    "sample": cmd_sample,
    "optimize": cmd_optimize,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (SLKError, ValueError, OSError) as exc:
        print(f"slkbell {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
