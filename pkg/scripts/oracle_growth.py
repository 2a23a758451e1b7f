"""Growth of the empirical norm of D on H^inf with weight exp(r^2).

For monomials the ratio has the closed form
sqrt(2 e n) (1 - 1/n)^((n-1)/2) ~ sqrt(2 n), so it grows without bound but
slowly: it first exceeds 10 only around n = 50.
"""

import argparse
import math

from weightcalc.series import Operator, empirical_operator_norm, monomials
from weightcalc.weights import Domain, WeightSpec, build_grid


def closed_form(n: int) -> float:
    return math.sqrt(2 * math.e * n) * (1 - 1 / n) ** ((n - 1) / 2)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n-max", type=int, default=80)
    parser.add_argument("--points", type=int, default=512)
    parser.add_argument("--extent", type=float, default=math.exp(8))
    args = parser.parse_args()

    w = WeightSpec.parse("exp(r^2)", "plane")
    grid = build_grid(Domain.PLANE, args.points, args.extent)
    samples = monomials(args.n_max)
    print(f"{'n':>4} {'grid oracle':>12} {'closed form':>12}")
    for n in range(2, args.n_max + 1, 2):
        rep = empirical_operator_norm(Operator.D, w, w, samples[n : n + 1], grid)
        print(f"{n:>4} {rep.lower_bound:>12.5f} {closed_form(n):>12.5f}")
    first = next((n for n in range(2, 10_000) if closed_form(n) > 10), None)
    print(f"closed form first exceeds 10 at n = {first}")


if __name__ == "__main__":
    main()
