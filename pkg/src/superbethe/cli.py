"""Command-line front end.

Exit status: 0 when every check passes, 1 on a check failure, 2 on a bad
configuration or argument, 3 on an internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import bae, verify
from .analytic import EvalContext
from .diagrams import SkewShape, count_admissible, enumerate_admissible, enumerate_restricted
from .dvf import (
    CapExceeded,
    DvfSpec,
    build,
    dump_formula,
    supercharacter,
    supercharacter_col_determinant,
    supercharacter_row_determinant,
)
from .model import ModelError, Rank, is_typical, kac_dynkin_from_diagram, typical_dimension
from .report import (
    TOL_ENV,
    Check,
    VerificationReport,
    complex_from_json,
    complex_to_json,
    config_from_json,
    config_to_json,
    digest,
    env_tolerance,
    fmt_float,
    parse_counts,
    state_from_json,
    state_to_json,
)

log = logging.getLogger("superbethe")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(ModelError):
    pass


# -- input helpers ---------------------------------------------------------------------

def _load_json(text_or_path: str):
    """A JSON file path, or inline JSON text."""
    text = text_or_path.strip()
    if not text.startswith(("{", "[")):
        try:
            text = Path(text_or_path).read_text()
        except OSError as exc:
            raise UsageError(f"cannot read {text_or_path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"invalid JSON in {text_or_path}: {exc}") from None


def _complex_list(text: str) -> list[complex]:
    return [complex_from_json(x) for x in text.split(";" if ";" in text else ",") if x.strip()]


def _partition_arg(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def dvf_spec_from_json(data) -> DvfSpec:
    if not isinstance(data, dict) or "kind" not in data:
        raise UsageError('DVF spec must look like {"kind": "plain", "mu": [...], ...}')
    known = {"kind", "mu", "lambda", "c", "route"}
    extra = set(data) - known
    if extra:
        raise UsageError(f"unknown DVF spec keys {sorted(extra)}")
    return DvfSpec(
        data["kind"],
        tuple(data.get("mu", ())),
        tuple(data.get("lambda", ())),
        complex_from_json(data.get("c", 0)),
        data.get("route"),
    )


def _tolerance(args, default: float) -> float:
    if getattr(args, "tol", None) is not None:
        return args.tol
    return args.env_tol if args.env_tol is not None else default


def _emit(args, report: VerificationReport) -> int:
    if args.env_tol is not None:
        report.meta[TOL_ENV] = fmt_float(args.env_tol)
    text = report.dumps() if args.format == "json" else report.text()
    _write(args.out, text)
    return EXIT_OK if report.passed else EXIT_FAIL


def _write(path: str | None, text: str):
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


# -- verbs ------------------------------------------------------------------------------

def cmd_tableaux(args) -> int:
    shape = SkewShape.parse(args.shape)
    stream = enumerate_restricted if args.restricted else enumerate_admissible
    tabs = list(stream(shape, args.rank))
    if args.format == "json":
        out = {"shape": shape.to_json(), "tableaux": [t.grid() for t in tabs], "count": len(tabs)}
        _write(args.out, json.dumps(out) + "\n")
    else:
        _write(args.out, "".join(f"{t}\n" for t in tabs) + f"count {len(tabs)}\n")
    return EXIT_OK


def _context(args) -> EvalContext:
    config, _ = config_from_json(_load_json(args.config))
    state = None
    if args.roots:
        state = state_from_json(_load_json(args.roots), config.rank.n_colors)
    return EvalContext(config, state)


def cmd_eval(args) -> int:
    ctx = _context(args)
    spec = dvf_spec_from_json(_load_json(args.dvf))
    if args.dump:
        _write(args.out, dump_formula(spec, ctx) + "\n")
        return EXIT_OK
    f = build(spec, ctx)
    if args.u:
        u = np.array(_complex_list(args.u), dtype=complex)
    else:
        rng = np.random.default_rng(args.seed)
        u = rng.uniform(-1, 1, args.points) + 1j * rng.uniform(-1, 1, args.points)
    values = f(u)
    if args.format == "json":
        out = {
            "label": f.label,
            "terms": f.terms,
            "flags": list(f.flags),
            "points": [complex_to_json(z) for z in u],
            "values": [complex_to_json(z) for z in values],
        }
        _write(args.out, json.dumps(out, indent=2) + "\n")
    else:
        _write(args.out, "".join(f"{x:.17g}\t{v:.17g}\n" for x, v in zip(u, values)))
    return EXIT_OK


def cmd_verify_jt(args) -> int:
    shapes = [SkewShape.parse(args.shape)] if args.shape else verify.all_skew_shapes(args.max_cells)
    report = verify.verify_jt(args.rank, shapes, args.points, args.seed, _tolerance(args, verify.JT_TOL))
    return _emit(args, report)


def cmd_verify_red(args) -> int:
    mus = [_partition_arg(args.mu)] if args.mu else None
    cs = [int(c) for c in _partition_arg(args.c)]
    report = verify.verify_red(args.rank, mus, cs, args.points, args.seed, _tolerance(args, verify.RED_TOL))
    return _emit(args, report)


def cmd_verify_hirota(args) -> int:
    tol = _tolerance(args, verify.RELATION_TOL)
    return _emit(args, verify.verify_hirota(args.rank, args.amax, args.mmax, args.points, args.seed, tol))


def cmd_verify_cshift(args) -> int:
    mus = [_partition_arg(args.mu)] if args.mu else None
    tol = _tolerance(args, verify.RELATION_TOL)
    return _emit(args, verify.verify_cshift(args.rank, mus, args.points, args.seed, tol))


def cmd_character(args) -> int:
    shape = SkewShape.parse(args.shape)
    x, y = _complex_list(args.x), _complex_list(args.y)
    values = {
        "tableau_sum": supercharacter(shape, args.rank, x, y),
        "row_determinant": supercharacter_row_determinant(shape, args.rank, x, y),
        "column_determinant": supercharacter_col_determinant(shape, args.rank, x, y),
    }
    ref = values["tableau_sum"]
    report = VerificationReport("character", meta={
        "shape": str(shape), "value": complex_to_json(ref),
    })
    for route in ("row_determinant", "column_determinant"):
        err = float(verify.rel_err(values[route], ref))
        report.add(Check(f"{route} = tableau_sum", err, _tolerance(args, verify.JT_TOL), 1,
                         digest=digest(shape, x, y)))
    return _emit(args, report)


def cmd_dim(args) -> int:
    mu = SkewShape.parse(args.shape)
    if mu.inner:
        raise UsageError("dim takes a straight shape mu=...")
    n = count_admissible(mu, args.rank)
    label = kac_dynkin_from_diagram(args.rank, mu.outer)
    report = VerificationReport("dim", meta={
        "shape": str(mu), "tableaux": n, "kac_dynkin": [fmt_float(complex(b).real) for b in label.b],
    })
    if is_typical(args.rank, mu.outer):
        d = typical_dimension(args.rank, label)
        report.meta["typical_dimension"] = int(d)
        report.add(Check("tableau count = typical dimension", 0.0 if n == d else 1.0, 0.5,
                         metric="mismatch", note=f"tableaux={n} formula={d}"))
    else:
        report.meta["typical"] = False
    return _emit(args, report)


def cmd_solve_bae(args) -> int:
    config, seed = config_from_json(_load_json(args.config))
    counts = parse_counts(args.counts)
    system = bae.BaeSystem.from_config(config)
    rng = np.random.default_rng(args.seed if args.seed is not None else seed)
    sols = bae.multi_start(system, counts, args.seeds, rng, tol=args.tol)
    report = VerificationReport("solve-bae", seed=args.seed, meta={"solutions": len(sols)})
    for k, sol in enumerate(sols):
        res = bae.bae_residual(system, sol)
        report.add(Check(f"solution {k} bae_residual", float(np.max(np.abs(res), initial=0.0)),
                         args.tol, len(res)))
    if not sols:
        report.add(Check("solution found", 1.0, 0.5, note=f"no seed of {args.seeds} converged"))
    out = {
        "config": config_to_json(config, seed),
        "counts": list(counts),
        "solutions": [state_to_json(s)["roots"] for s in sols],
        "summary": report.summary(),
    }
    if sols:
        out["roots"] = state_to_json(sols[0])["roots"]
    _write(args.out, json.dumps(out, indent=2) + "\n")
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_pole_scan(args) -> int:
    ctx = _context(args)
    spec = dvf_spec_from_json(_load_json(args.dvf))
    f = build(spec, ctx)
    tol = _tolerance(args, bae.RESIDUE_TOL)
    report = bae.pole_scan(f, ctx.state, ctx, tol=tol, require_bae=not args.no_bae_check)
    args.out = args.report or args.out
    return _emit(args, report)


def cmd_fixtures(args) -> int:
    names = [args.name] if args.name else None
    tol = _tolerance(args, verify.FIXTURE_TOL)
    return _emit(args, verify.verify_fixtures(names, args.points, args.seed, tol))


# -- parser -----------------------------------------------------------------------------

def _rank(text: str) -> Rank:
    try:
        return Rank.parse(text)
    except ModelError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), help="default: text for tableaux, json otherwise")
    common.add_argument("--out", help="write output here instead of standard output")
    common.add_argument("-v", "--verbose", action="store_true")

    randomized = argparse.ArgumentParser(add_help=False)
    randomized.add_argument("--seed", type=int, default=0)
    randomized.add_argument("--points", type=int, default=20)
    randomized.add_argument("--tol", type=float, help=f"tolerance (default: ${TOL_ENV} or the suite default)")

    ranked = argparse.ArgumentParser(add_help=False)
    ranked.add_argument("--rank", type=_rank, required=True, help="r,s for sl(r+1|s+1)")

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--config", required=True, help="model JSON file")
    model.add_argument("--roots", help='Bethe roots JSON {"roots": {...}}')
    model.add_argument("--dvf", required=True, help="DVF spec JSON file or inline JSON")

    parser = argparse.ArgumentParser(prog="superbethe", description=__doc__.splitlines()[0])
    # argparse exits with status 2 on bad flags, which is also the config-error code
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("tableaux", parents=[common, ranked], help="enumerate admissible tableaux")
    p.add_argument("--shape", required=True)
    p.add_argument("--restricted", action="store_true", help="odd letters only in the first column")
    # parents share their actions, so a per-verb format default goes under its own key
    p.set_defaults(func=cmd_tableaux, default_format="text")

    p = sub.add_parser("eval", parents=[common, model], help="evaluate a DVF")
    p.add_argument("--u", help="points, e.g. '0.1+0.2j;0.3'")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--points", type=int, default=20)
    p.add_argument("--dump", action="store_true", help="print the term expansion instead")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("verify-jt", parents=[common, randomized, ranked], help="Jacobi-Trudi route equivalence")
    p.add_argument("--shape", help="one shape; default: every skew shape up to --max-cells")
    p.add_argument("--max-cells", type=int, default=10)
    p.set_defaults(func=cmd_verify_jt)

    p = sub.add_parser("verify-red", parents=[common, randomized, ranked], help="integer-c reduction")
    p.add_argument("--mu")
    p.add_argument("--c", default="0,1,2")
    p.set_defaults(func=cmd_verify_red)

    p = sub.add_parser("verify-hirota", parents=[common, randomized, ranked], help="Hirota relation")
    p.add_argument("--amax", type=int, default=3)
    p.add_argument("--mmax", type=int, default=3)
    p.set_defaults(func=cmd_verify_hirota)

    p = sub.add_parser("verify-cshift", parents=[common, randomized, ranked], help="c-shift relation")
    p.add_argument("--mu")
    p.set_defaults(func=cmd_verify_cshift)

    p = sub.add_parser("character", parents=[common, ranked], help="supercharacter by three routes")
    p.add_argument("--shape", required=True)
    p.add_argument("--x", required=True, help="even variables")
    p.add_argument("--y", required=True, help="odd variables")
    p.add_argument("--tol", type=float)
    p.set_defaults(func=cmd_character)

    p = sub.add_parser("dim", parents=[common, ranked], help="tableau count against the dimension formula")
    p.add_argument("--shape", required=True)
    p.set_defaults(func=cmd_dim)

    p = sub.add_parser("solve-bae", parents=[common], help="multi-start Newton for BAE roots")
    p.add_argument("--config", required=True)
    p.add_argument("--counts", required=True, help="roots per color, e.g. 1,1")
    p.add_argument("--seeds", type=int, default=64)
    p.add_argument("--tol", type=float, default=bae.BAE_TOL)
    p.add_argument("--seed", type=int, help="RNG seed (default: the config's seed)")
    p.set_defaults(func=cmd_solve_bae)

    p = sub.add_parser("pole-scan", parents=[common, model], help="contour residues at catalog poles")
    p.add_argument("--report", help="report file (alias of --out)")
    p.add_argument("--tol", type=float)
    p.add_argument("--no-bae-check", action="store_true", help="skip the BAE residual check")
    p.set_defaults(func=cmd_pole_scan)

    p = sub.add_parser("fixtures", parents=[common, randomized], help="closed-form fixtures")
    p.add_argument("--name", choices=sorted(verify.FIXTURES))
    p.set_defaults(func=cmd_fixtures)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = getattr(args, "default_format", "json")
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        args.env_tol = env_tolerance()
        if args.env_tol is not None:
            log.info("%s=%g", TOL_ENV, args.env_tol)
        return args.func(args)
    except (ModelError, CapExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        log.debug("internal error", exc_info=True)
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
