"""Sandwich constants of the monomial envelope as the grid is refined.

Disk: sup w / w_hat. Plane: sup w / ((r + 1) w_hat).
"""

import argparse
from pathlib import Path

from weightcalc.envelope import associated_weight, monomial_coefficients, sandwich_constants
from weightcalc.reports import atomic_write_text, csv_text, format_float
from weightcalc.weights import Domain, WeightSpec, default_grid, log_transform

WEIGHTS = [
    ("1/(1-r)", "disk"),
    ("1/(1-r)^2", "disk"),
    ("log(2/(1-r))", "disk"),
    ("exp(1/(1-r))", "disk"),
    ("exp(r)", "plane"),
    ("exp(r^2)", "plane"),
    ("exp(r)*(r+1)", "plane"),
    ("exp(r^0.5)", "plane"),
]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--points", type=int, nargs="+", default=[128, 256, 512, 1024])
    parser.add_argument("--out", type=Path, help="optional CSV output")
    args = parser.parse_args()

    rows = []
    print(f"{'weight':<16} {'domain':<6} " + " ".join(f"{n:>10}" for n in args.points))
    for text, dom in WEIGHTS:
        spec = WeightSpec.parse(text, dom)
        consts = []
        for n in args.points:
            grid = default_grid(spec.domain, n)
            env = monomial_coefficients(spec, log_transform(spec, grid))
            sw = sandwich_constants(spec, associated_weight(env, grid))
            consts.append(sw.constant)
            rows.append((text, dom, n, format_float(sw.constant), format_float(sw.worst_r), len(env), int(env.sparse)))
        print(f"{text:<16} {dom:<6} " + " ".join(f"{c:>10.6f}" for c in consts))
    if args.out:
        atomic_write_text(args.out, csv_text(["weight", "domain", "points", "constant", "worst_r", "lines", "sparse"], rows))


if __name__ == "__main__":
    main()
