"""Run every operator criterion over a small gallery of weight pairs."""

import argparse
import json
import math
from pathlib import Path

from weightcalc import criteria as cr
from weightcalc.cli import format_table
from weightcalc.envelope import associated_weight, monomial_coefficients
from weightcalc.reports import atomic_write_text
from weightcalc.weights import Domain, WeightSpec, default_grid, log_transform


def table(spec):
    grid = default_grid(spec.domain)
    return associated_weight(monomial_coefficients(spec, log_transform(spec, grid)), grid)


def plane_cases():
    for w_text, v_text in [
        ("exp(r)", "exp(r)"),
        ("exp(r)", "exp(r/2)"),
        ("exp(r)", "exp(2*r)"),
        ("exp(r)", "exp(r)*(r+1)"),
        ("exp(r^2)", "exp(r^2)"),
        ("exp(r^2)", "exp((r+1)^2)"),
    ]:
        w, v = WeightSpec.parse(w_text, "plane"), WeightSpec.parse(v_text, "plane")
        tw, tv = table(w), table(v)
        yield f"{w_text} -> {v_text}", [
            cr.check_integration_bounded(tw, v),
            cr.check_integration_compact(tw, v),
            cr.check_differentiation_sufficient_plane(w, v),
            cr.check_differentiation_necessary(tw, tv, 2),
        ]
    for w_text in ("exp(r)", "exp(r^2)", "exp(r*log(r+1))"):
        w = WeightSpec.parse(w_text, "plane")
        yield f"{w_text} self", [cr.check_D_self_plane(table(w), w, 2)]


def disk_cases():
    for w_text in ("1/(1-r)", "1/(1-r)^2", "log(2/(1-r))", "exp(1/(1-r))"):
        w = WeightSpec.parse(w_text, "disk")
        v = WeightSpec.parse(f"({w_text})/(1-r)", "disk")
        tw, tv = table(w), table(v)
        yield f"{w_text} -> w/(1-r)", [
            cr.doubling_constant(w),
            cr.check_differentiation_sufficient_disk(w, v),
            cr.check_differentiation_necessary(tw, tv, 2),
            cr.check_D_disk_weighted_target(w, 2),
            cr.check_integration_bounded(tw, v),
        ]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--json", type=Path, help="write all verdicts as JSON")
    args = parser.parse_args()
    doc = {}
    for name, verdicts in [*plane_cases(), *disk_cases()]:
        print(f"\n{name}")
        rows = [(v.criterion.value, v.status.value, f"{v.constant:.6g}", "-" if v.tail_slope is None else f"{v.tail_slope:.4g}") for v in verdicts]
        print(format_table(rows))
        doc[name] = [v.to_json_dict() for v in verdicts]
    if args.json:
        atomic_write_text(args.json, json.dumps(doc, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
