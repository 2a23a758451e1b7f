"""Command-line front end: ``weightcalc <command> --weight EXPR ...``.

Exit codes: 0 success or SATISFIED, 3 VIOLATED, 4 INCONCLUSIVE, 1 usage or
output error, 2 invalid weight. Errors are a single stderr line of the form
``weightcalc: error: <kind>: <message>``.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import criteria as cr
from .envelope import associated_weight, envelope_csv, monomial_coefficients, sandwich_constants
from .expr import WeightSyntaxError
from .reports import atomic_write_text, csv_text, encode_float, format_float, format_log_value
from .series import (
    CircleQuadrature,
    Operator,
    TruncationWarning,
    empirical_operator_norm,
    envelope_series,
    log_mp_means,
    oracle_samples,
    parse_exponent,
)
from .weights import (
    DEFAULT_DISK_EXTENT,
    DEFAULT_PLANE_EXTENT,
    DEFAULT_POINTS,
    Domain,
    WeightSpec,
    WeightValidationError,
    build_grid,
    log_transform,
    validate_weight,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVALID_WEIGHT = 2
EXIT_VIOLATED = 3
EXIT_INCONCLUSIVE = 4

STATUS_EXIT = {
    cr.Status.SATISFIED: EXIT_OK,
    cr.Status.VIOLATED: EXIT_VIOLATED,
    cr.Status.INCONCLUSIVE: EXIT_INCONCLUSIVE,
}

COMMANDS = ("analyze", "envelope", "check-j", "check-d", "doubling", "mp", "oracle")


class UsageError(Exception):
    pass


class EmptyResultError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="weightcalc", description="Growth-space weights, envelopes and operator criteria.")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True
    helps = {
        "analyze": "validate a weight and tabulate it against its monomial envelope",
        "envelope": "list the monomial envelope coefficients",
        "check-j": "integration operator: boundedness (and compactness on the plane)",
        "check-d": "differentiation operator criteria",
        "doubling": "dyadic doubling test on the disk",
        "mp": "integral means of the envelope test function",
        "oracle": "empirical lower bounds for the norms of D and J",
    }
    for name in COMMANDS:
        sp = sub.add_parser(name, help=helps[name])
        sp.add_argument("--weight", required=True, help="weight expression in r")
        sp.add_argument("--target", help="target weight expression in r")
        sp.add_argument("--domain", choices=("disk", "plane"), help="default: plane (disk for doubling)")
        sp.add_argument("--p", type=_exponent, help="exponent in (0, inf]")
        sp.add_argument("--grid-points", type=int, default=DEFAULT_POINTS)
        sp.add_argument("--extent", type=float, help="largest radius (plane) or largest log 1/(1-r) (disk)")
        sp.add_argument("--n-max", type=int, help="largest slope / series degree / dyadic index")
        sp.add_argument("--json", type=Path, help="write a JSON report here")
        sp.add_argument("--csv", type=Path, help="write a CSV table here")
        sp.add_argument("--seed", type=int, default=0, help="seed for random sample polynomials")
    return parser


def _exponent(text: str) -> float:
    try:
        return parse_exponent(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


@dataclass
class Outcome:
    exit_code: int
    table: list[tuple[str, str, str, str]] = field(default_factory=list)
    lines: list[str] = field(default_factory=list)
    json_doc: Optional[dict] = None
    csv_files: list[tuple[Path, str]] = field(default_factory=list)


# -- helpers ---------------------------------------------------------------------------


def _domain(args) -> Domain:
    if args.command == "doubling":
        if args.domain == "plane":
            raise UsageError("doubling is defined on the disk")
        return Domain.DISK
    return Domain.parse(args.domain or "plane")


def _grid(args, domain: Domain):
    extent = args.extent
    if extent is None:
        extent = DEFAULT_PLANE_EXTENT if domain is Domain.PLANE else DEFAULT_DISK_EXTENT
    try:
        return build_grid(domain, args.grid_points, extent)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _weight(text: str, domain: Domain, grid) -> WeightSpec:
    spec = WeightSpec.parse(text, domain)
    validate_weight(spec, grid).raise_for_status()
    return spec


def _table(spec: WeightSpec, grid, n_max: Optional[int] = None):
    env = monomial_coefficients(spec, log_transform(spec, grid), n_max=n_max)
    return associated_weight(env, grid)


def _require(args, *names):
    for name in names:
        if getattr(args, name.replace("-", "_")) is None:
            raise UsageError(f"--{name} is required for {args.command}")


def _verdict_row(v: cr.Verdict) -> tuple[str, str, str, str]:
    slope = "-" if v.tail_slope is None else f"{v.tail_slope:.6g}"
    return (v.criterion.value, v.status.value, f"{v.constant:.6g}", slope)


def _verdict_outcome(args, verdicts: Sequence[cr.Verdict], status: cr.Status) -> Outcome:
    """Report verdicts; the exit code follows ``status``."""
    out = Outcome(STATUS_EXIT[status])
    named = []
    for i, v in enumerate(verdicts):
        path = None
        if args.csv is not None and v.evidence is not None:
            path = args.csv if i == 0 else args.csv.with_name(f"{args.csv.stem}.{v.criterion.value.lower()}{args.csv.suffix}")
            text = v.evidence.csv()
            if text.count("\n") < 2:
                raise EmptyResultError(f"no evidence rows for {v.criterion.value}")
            out.csv_files.append((path, text))
        named.append(v if path is None else _with_path(v, str(path)))
        out.table.append(_verdict_row(v))
        for note in v.notes:
            out.lines.append(f"note [{v.criterion.value}]: {note}")
    out.json_doc = {
        "command": args.command,
        "status": status.value,
        "verdicts": [v.to_json_dict() for v in named],
    }
    return out


def _with_path(v: cr.Verdict, path: str) -> cr.Verdict:
    from dataclasses import replace

    return replace(v, evidence_csv=path)


# -- commands --------------------------------------------------------------------------


def cmd_analyze(args) -> Outcome:
    domain = _domain(args)
    grid = _grid(args, domain)
    spec = WeightSpec.parse(args.weight, domain)
    report = validate_weight(spec, grid)
    report.raise_for_status()
    lt = log_transform(spec, grid)
    table = _table(spec, grid, args.n_max)
    sw = sandwich_constants(spec, table)
    env = table.envelope
    lw = spec.log_eval(table.r)
    rows = [
        (format_float(r), format_log_value(a), format_log_value(b), format_log_value(a - b))
        for r, a, b in zip(table.r, lw, table.log_values)
    ]
    out = Outcome(EXIT_OK)
    if args.csv is not None:
        out.csv_files.append((args.csv, csv_text(["r", "w", "w_hat", "ratio"], rows)))
    kind = "sup w/w_hat" if domain is Domain.DISK else "sup w/((r+1) w_hat)"
    out.lines += [
        f"weight    {spec.label} on the {domain.value}",
        f"checks    " + ", ".join(f"{c.name}={'ok' if c.passed else 'FAIL'}" for c in report.checks),
        f"log-convex {lt.convex} (min second difference {lt.min_second_difference:.3g})",
        f"envelope  {len(env)} monomials, slopes {int(env.slopes[0])}..{int(env.slopes[-1])}"
        + (" (sparse)" if env.sparse else "")
        + (" (truncated)" if env.truncated else ""),
        f"sandwich  {kind} = {sw.constant:.6g} at r = {sw.worst_r:.6g}",
    ]
    out.json_doc = {
        "command": "analyze",
        "weight": spec.label,
        "domain": domain.value,
        "grid": {"domain": domain.value, "n_points": grid.n_points, "extent": grid.extent},
        "checks": {c.name: c.passed for c in report.checks},
        "log_convex": lt.convex,
        "envelope_lines": len(env),
        "envelope_sparse": env.sparse,
        "envelope_truncated": env.truncated,
        "sandwich_constant": encode_float(sw.constant),
        "sandwich_worst_r": encode_float(sw.worst_r),
    }
    return out


def cmd_envelope(args) -> Outcome:
    domain = _domain(args)
    grid = _grid(args, domain)
    spec = _weight(args.weight, domain, grid)
    env = _table(spec, grid, args.n_max).envelope
    out = Outcome(EXIT_OK)
    if len(env) == 0:
        raise EmptyResultError("envelope has no lines")
    if args.csv is not None:
        out.csv_files.append((args.csv, envelope_csv(env)))
    out.lines.append(f"{len(env)} monomials on the envelope of {spec.label}")
    show = range(len(env)) if len(env) <= 12 else list(range(6)) + list(range(len(env) - 6, len(env)))
    out.lines.append(f"{'n':>8}  {'a_n':>24}  {'t_n':>24}")
    for i in show:
        out.lines.append(f"{int(env.slopes[i]):>8}  {env.log_coeffs[i]:>24.17g}  {env.touch[i]:>24.17g}")
    out.json_doc = {
        "command": "envelope",
        "weight": spec.label,
        "domain": domain.value,
        "n": [int(n) for n in env.slopes],
        "a_n": [encode_float(a) for a in env.log_coeffs],
        "t_n": [encode_float(t) for t in env.touch],
        "sparse": env.sparse,
        "truncated": env.truncated,
    }
    return out


def cmd_check_j(args) -> Outcome:
    _require(args, "target")
    domain = _domain(args)
    grid = _grid(args, domain)
    w = _weight(args.weight, domain, grid)
    v = _weight(args.target, domain, grid)
    table = _table(w, grid, args.n_max)
    bounded = cr.check_integration_bounded(table, v)
    verdicts = [bounded]
    if domain is Domain.PLANE:
        verdicts.append(cr.check_integration_compact(table, v))
    return _verdict_outcome(args, verdicts, bounded.status)


def cmd_check_d(args) -> Outcome:
    _require(args, "p")
    domain = _domain(args)
    grid = _grid(args, domain)
    w = _weight(args.weight, domain, grid)
    if args.target is None:
        if domain is Domain.PLANE:
            v = cr.check_D_self_plane(_table(w, grid, args.n_max), w, args.p)
        else:
            v = cr.check_D_disk_weighted_target(w, args.p, args.n_max or 40, grid)
        return _verdict_outcome(args, [v], v.status)
    target = _weight(args.target, domain, grid)
    if domain is Domain.DISK:
        suff = cr.check_differentiation_sufficient_disk(w, target, grid)
    else:
        suff = cr.check_differentiation_sufficient_plane(w, target, grid)
    nec = cr.check_differentiation_necessary(_table(w, grid, args.n_max), _table(target, grid, args.n_max), args.p)
    # sufficient condition proves boundedness; failure of the necessary one disproves it
    if suff.status is cr.Status.SATISFIED:
        status = cr.Status.SATISFIED
    elif nec.status is cr.Status.VIOLATED:
        status = cr.Status.VIOLATED
    else:
        status = cr.Status.INCONCLUSIVE
    return _verdict_outcome(args, [suff, nec], status)


def cmd_doubling(args) -> Outcome:
    domain = _domain(args)
    w = _weight(args.weight, domain, _grid(args, domain))
    v = cr.doubling_constant(w, args.n_max or 40)
    return _verdict_outcome(args, [v], v.status)


def cmd_mp(args) -> Outcome:
    _require(args, "p")
    domain = _domain(args)
    grid = _grid(args, domain)
    w = _weight(args.weight, domain, grid)
    env = _table(w, grid).envelope
    n_max = args.n_max if args.n_max is not None else int(env.slopes[-1])
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", TruncationWarning)
        g = envelope_series(env, n_max)
    radii = np.concatenate([[0.0], grid.rs])
    lm = log_mp_means(g, args.p, radii, CircleQuadrature.for_series(g), domain)
    lw = w.log_eval(radii)
    ratio = lm - lw
    if len(radii) == 0:
        raise EmptyResultError("no radii")
    rows = [(format_float(r), format_log_value(a), format_log_value(b), format_log_value(a - b)) for r, a, b in zip(radii, lm, lw)]
    out = Outcome(EXIT_OK)
    if args.csv is not None:
        out.csv_files.append((args.csv, csv_text(["r", "mp", "w", "ratio"], rows)))
    i = int(np.argmax(ratio))
    out.lines += [f"warning: {m.message}" for m in caught]
    out.lines += [
        f"test function g of degree {g.degree} for {w.label}",
        f"sup M_p(g, r)/w(r) = {format_log_value(ratio[i])} at r = {radii[i]:.6g}",
    ]
    out.json_doc = {
        "command": "mp",
        "weight": w.label,
        "domain": domain.value,
        "p": encode_float(args.p),
        "degree": g.degree,
        "sup_ratio": encode_float(math.exp(min(float(ratio[i]), 709.0))),
        "argmax_radius": float(radii[i]),
        "truncated": bool(caught),
    }
    return out


def cmd_oracle(args) -> Outcome:
    _require(args, "p")
    domain = _domain(args)
    grid = _grid(args, domain)
    w = _weight(args.weight, domain, grid)
    v = _weight(args.target, domain, grid) if args.target else w
    env = _table(w, grid).envelope
    samples = oracle_samples(env, n_series=args.n_max or 60, seed=args.seed)
    reports = [empirical_operator_norm(op, w, v, samples, grid, args.p) for op in (Operator.D, Operator.J)]
    out = Outcome(EXIT_OK)
    for rep in reports:
        out.lines.append(
            f"{rep.op.value}: lower bound {rep.lower_bound:.6g} (sample {rep.argmax_sample}, r = {rep.argmax_radius:.6g})"
        )
    if args.csv is not None:
        rows = [(r.op.value, format_float(r.p), format_float(r.lower_bound), r.argmax_sample, format_float(r.argmax_radius)) for r in reports]
        out.csv_files.append((args.csv, csv_text(["op", "p", "lower_bound", "argmax_sample", "argmax_radius"], rows)))
    out.json_doc = {"command": "oracle", "weight": w.label, "target": v.label, "reports": [r.to_json_dict() for r in reports]}
    return out


HANDLERS = {
    "analyze": cmd_analyze,
    "envelope": cmd_envelope,
    "check-j": cmd_check_j,
    "check-d": cmd_check_d,
    "doubling": cmd_doubling,
    "mp": cmd_mp,
    "oracle": cmd_oracle,
}


# -- output ----------------------------------------------------------------------------


def format_table(rows: Sequence[tuple[str, str, str, str]]) -> str:
    header = ("criterion", "status", "constant", "tail_slope")
    allrows = [header, *rows]
    widths = [max(len(r[i]) for r in allrows) for i in range(4)]
    lines = [" | ".join(c.ljust(wd) for c, wd in zip(r, widths)).rstrip() for r in allrows]
    lines.insert(1, "-+-".join("-" * wd for wd in widths))
    return "\n".join(lines)


def emit(outcome: Outcome, args, stdout) -> None:
    """Write files (all texts are ready before the first write) and print."""
    files = list(outcome.csv_files)
    if args.json is not None:
        if outcome.json_doc is None:
            raise EmptyResultError("nothing to write")
        files.append((args.json, json.dumps(outcome.json_doc, indent=2, sort_keys=True) + "\n"))
    for path, _ in files:
        if path.exists() and path.is_dir():
            raise OSError(f"{path} is a directory")
    for path, text in files:
        atomic_write_text(path, text)
    if outcome.table:
        print(format_table(outcome.table), file=stdout)
    for line in outcome.lines:
        print(line, file=stdout)


def _fail(kind: str, message: str, code: int, stderr) -> int:
    message = " ".join(str(message).split())
    print(f"weightcalc: error: {kind}: {message}", file=stderr)
    return code


def main(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.grid_points < 16:
            raise UsageError("--grid-points must be at least 16")
        if args.n_max is not None and args.n_max < 0:
            raise UsageError("--n-max must be non-negative")
        outcome = HANDLERS[args.command](args)
        emit(outcome, args, stdout)
        return outcome.exit_code
    except UsageError as exc:
        return _fail("usage", exc, EXIT_USAGE, stderr)
    except WeightSyntaxError as exc:
        return _fail("syntax", exc, EXIT_INVALID_WEIGHT, stderr)
    except WeightValidationError as exc:
        detail = "; ".join(f"{c.name}: {c.detail}" for c in exc.report.failed())
        return _fail("validation", f"{exc} ({detail})", EXIT_INVALID_WEIGHT, stderr)
    except EmptyResultError as exc:
        return _fail("empty", exc, EXIT_USAGE, stderr)
    except OSError as exc:
        return _fail("io", exc, EXIT_USAGE, stderr)
    except ValueError as exc:
        return _fail("usage", exc, EXIT_USAGE, stderr)


if __name__ == "__main__":
    sys.exit(main())
